//! Turn a pool's event log into one game per day.
//!
//! ```text
//! cargo run --example daily_pipeline -- path/to/pool
//! ```
//! Without an argument the bundled synthetic pool is used.

use std::path::PathBuf;

use clmm_game::pipeline::{build_all_days, GameOptions, PoolData};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/pool"));
    let pool = PoolData::load(&dir)?;
    println!("{}: {} events, {} price rows", pool.header.name, pool.log.events.len(), pool.prices.len());

    let (games, warnings) = build_all_days(&pool, &GameOptions::default())?;
    for g in &games {
        let s = &g.spec;
        println!(
            "{} players={} ranges={} fees=${:.2} budgets=${:.0} retained={:.3}",
            g.day.date,
            s.num_players(),
            s.num_ranges(),
            s.fees().iter().sum::<f64>(),
            s.budgets().iter().sum::<f64>(),
            g.retained_fraction
        );
    }
    for w in warnings {
        println!("warning: {w}");
    }
    Ok(())
}
