//! Solve a small liquidity-provision game and certify the result.

use clmm_game::amm::TickGrid;
use clmm_game::game::GameSpec;
use clmm_game::solver::{
    closed_form_constant_budget, kkt_residuals, solve_ne, structure_checks, waterfill_check, SolverOptions,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = GameSpec::new(
        TickGrid::new(vec![1.0, 1.5, 2.0, 3.0])?,
        1.0,
        1.8,
        1.0,
        vec![4.0, 9.0, 2.0],
        vec![0.02, 0.05, 0.01],
        vec![0.0, 0.0, 0.0],
        vec![5.0, 5.0, 5.0],
        vec!["alice".into(), "bob".into(), "carol".into()],
    )?;

    let result = solve_ne(&spec, &SolverOptions::default())?;
    println!("converged in {} iterations", result.iterations);
    for (id, row) in spec.player_ids().iter().zip(&result.profile.k) {
        println!("{id:>6}: {row:.4?}");
    }
    println!("utilities: {:.4?}", result.utilities(&spec));

    // Equal budgets and no outside liquidity: a formula exists to compare against.
    let cf = closed_form_constant_budget(&spec)?;
    println!("closed form row: {:.4?} (budget binding: {})", cf.profile.k[0], cf.budget_limited);

    let cert = kkt_residuals(&spec, &result.profile);
    println!("KKT residual {:.2e}, budget duals {:.4?}", cert.residuals.max(), cert.lambda);
    println!("waterfill passed: {}", waterfill_check(&spec, &result, 1e-6).passed);
    println!("structure passed: {}", structure_checks(&spec, &result, 1e-6).passed());

    // Unequal budgets and alpha < 1.
    let uneven = GameSpec::new(
        spec.grid().clone(),
        0.6,
        spec.q0(),
        spec.p_y0(),
        spec.fees().to_vec(),
        spec.taus().to_vec(),
        vec![10.0, 0.0, 5.0],
        vec![0.5, 3.0, 20.0],
        spec.player_ids().to_vec(),
    )?;
    let r = solve_ne(&uneven, &SolverOptions { seed: 7, ..SolverOptions::default() })?;
    println!("\nalpha = 0.6, budgets (0.5, 3, 20):");
    for (id, row) in uneven.player_ids().iter().zip(&r.profile.k) {
        println!("{id:>6}: {row:.4?}");
    }
    Ok(())
}
