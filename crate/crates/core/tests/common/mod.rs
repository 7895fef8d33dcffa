#![allow(dead_code)]

use clmm_game::amm::TickGrid;
use clmm_game::game::GameSpec;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
pub struct SpecShape {
    pub players: usize,
    pub ranges: usize,
    pub alpha: f64,
    pub equal_budgets: bool,
    pub with_chi: bool,
    /// Budgets relative to the ample-budget spend; `None` draws from `[0.2, 1.5]`.
    pub budget_scale: Option<f64>,
}

pub fn random_grid(rng: &mut ChaCha8Rng, ranges: usize) -> TickGrid {
    let mut t = rng.gen_range(0.5..1.5);
    let mut ticks = vec![t];
    for _ in 0..ranges {
        t *= rng.gen_range(1.05..1.6);
        ticks.push(t);
    }
    TickGrid::new(ticks).unwrap()
}

pub fn random_spec(rng: &mut ChaCha8Rng, shape: SpecShape) -> GameSpec {
    let grid = random_grid(rng, shape.ranges);
    let (lo, hi) = (grid.lowest(), grid.highest());
    let q0 = rng.gen_range(0.8 * lo..1.2 * hi);
    let p_y0 = rng.gen_range(0.5..2.0);
    let m = shape.ranges;
    let fees: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..10.0)).collect();
    let taus: Vec<f64> = (0..m).map(|_| rng.gen_range(0.01..0.5)).collect();
    let chis: Vec<f64> = if shape.with_chi {
        (0..m).map(|r| rng.gen_range(0.0..1.0) * fees[r] / taus[r]).collect()
    } else {
        vec![0.0; m]
    };
    let eps = grid.liquidity_prices(q0, p_y0);
    let nf = shape.players as f64;
    // A lone player's ample spend is zero; size its budget as if it had one rival.
    let share = if shape.players > 1 { (nf - 1.0) / (nf * nf) } else { 0.25 };
    let ample: f64 = (0..m).map(|r| shape.alpha * share * fees[r] * eps[r] / taus[r]).sum::<f64>();
    let scale = |rng: &mut ChaCha8Rng| shape.budget_scale.unwrap_or_else(|| rng.gen_range(0.2..1.5));
    let budgets: Vec<f64> = if shape.equal_budgets {
        vec![scale(rng) * ample; shape.players]
    } else {
        (0..shape.players).map(|_| scale(rng) * ample).collect()
    };
    let ids = (0..shape.players).map(|i| format!("lp{i}")).collect();
    GameSpec::new(grid, shape.alpha, q0, p_y0, fees, taus, chis, budgets, ids).unwrap()
}

/// A random non-negative row spending at most player `n`'s budget.
pub fn random_feasible_row(rng: &mut ChaCha8Rng, spec: &GameSpec, n: usize) -> Vec<f64> {
    let m = spec.num_ranges();
    let raw: Vec<f64> = (0..m)
        .map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..1.0) })
        .collect();
    let spend: f64 = raw.iter().zip(spec.eps()).map(|(k, e)| k * e).sum();
    if spend == 0.0 {
        return raw;
    }
    let target = spec.budgets()[n] * rng.gen_range(0.0..1.0_f64).sqrt();
    raw.iter().map(|k| k * target / spend).collect()
}

pub fn sup_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
