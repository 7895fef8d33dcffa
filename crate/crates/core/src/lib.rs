//! Liquidity provision in concentrated-liquidity AMMs as a non-cooperative game.
//!
//! - [`amm`]: pool math (liquidity prices, impermanent loss, bonding curves)
//! - [`game`]: the original and atomic games and the maps between them
//! - [`solver`]: best responses, Nash equilibrium, KKT and structure verifiers
//! - [`pipeline`]: event logs to daily game instances
//! - [`strategies`]: strategy suite and evaluation metrics
//! - [`cli`]: the `clmm` command-line front end

// `!(x > 0.0)` rejects NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod amm;
pub mod cli;
pub mod error;
pub mod game;
pub mod pipeline;
pub mod quadrature;
pub mod solver;
pub mod strategies;

pub use error::{Error, Result};
