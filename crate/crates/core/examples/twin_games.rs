//! Positions on arbitrary tick ranges collapse to per-range liquidity
//! without changing anyone's payoff or spend.

use clmm_game::amm::{PriceDistribution, TickGrid};
use clmm_game::game::{
    atomic_utility, budget_used, budget_used_general, general_taus, original_utility, theta, AtomicProfile,
    GameSpec, GeneralAllocation,
};
use clmm_game::solver::{lift_to_original, solve_ne, SolverOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = TickGrid::new(vec![1.0, 2.0, 4.0, 8.0])?;
    let q0 = 3.0;
    let dist = PriceDistribution::LogUniform { r: 1.3 };
    let taus = (0..grid.num_ranges())
        .map(|m| {
            let (a, b) = grid.atomic_range(m);
            clmm_game::amm::expected_il_rate(a, b, q0, &dist, 1.0)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let spec = GameSpec::new(
        grid.clone(),
        1.0,
        q0,
        1.0,
        vec![1.0, 3.0, 1.5],
        taus,
        vec![0.5, 0.5, 0.5],
        vec![10.0, 10.0],
        vec!["wide".into(), "narrow".into()],
    )?;

    let mut wide = GeneralAllocation::new();
    wide.insert(0, 3, 2.0);
    let mut narrow = GeneralAllocation::new();
    narrow.insert(1, 2, 4.0);
    narrow.insert(1, 3, 1.0);
    let allocs = vec![wide, narrow];

    let rows = allocs.iter().map(|a| theta(a, &grid)).collect::<Result<Vec<_>, _>>()?;
    let profile = AtomicProfile { k: rows };
    let taus_general = general_taus(&spec, &dist)?;
    for n in 0..2 {
        println!(
            "{}: K = {:?}, utility {:.6} vs {:.6}, spend {:.6} vs {:.6}",
            spec.player_ids()[n],
            profile.k[n],
            original_utility(&spec, &allocs, &taus_general, n)?,
            atomic_utility(&spec, &profile, n),
            budget_used_general(&spec, &allocs[n]),
            budget_used(&spec, &profile.k[n]),
        );
    }

    // An atomic equilibrium lifts back to concrete positions.
    let eq = solve_ne(&spec, &SolverOptions::default())?;
    for (n, alloc) in lift_to_original(&eq).iter().enumerate() {
        println!("{} positions: {:?}", spec.player_ids()[n], alloc.entries);
    }
    Ok(())
}
