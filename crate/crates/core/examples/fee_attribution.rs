//! Split swap fees across ranges and estimate outside liquidity from them.

use clmm_game::amm::{PricePoint, TickGrid};
use clmm_game::pipeline::{attribute_fees, estimate_chi};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = TickGrid::new(vec![1.0, 4.0, 9.0])?;
    let players = [1.0, 2.0];
    let others = [1.0, 0.5];
    let trades = [(1.0, 9.0), (9.0, 2.0)];
    let end = PricePoint::new(2.0, 2.0, 1.0)?;
    let fa = attribute_fees(&trades, &grid, &players, &others, 0.003, &end)?;
    for (m, &kappa) in players.iter().enumerate() {
        println!(
            "range {:?}: {:.5} Y + {:.5} X = ${:.5}, players ${:.5}, weight {:?}",
            grid.atomic_range(m),
            fa.fees_y[m],
            fa.fees_x[m],
            fa.fees[m],
            fa.player_fees[m],
            estimate_chi(kappa, fa.fees[m], fa.player_fees[m])?
        );
    }
    Ok(())
}
