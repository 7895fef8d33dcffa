//! The reserve curve y = phi(x) traced by a liquidity histogram.

use clmm_game::amm::{bonding_curve, LiquidityHistogram, Position, TickGrid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = TickGrid::new(vec![1.0, 2.0, 4.0, 8.0])?;
    let positions = [Position::new(3.0, 1.0, 4.0)?, Position::new(1.0, 2.0, 8.0)?];
    let hist = LiquidityHistogram::from_positions(grid, &positions)?;
    println!("liquidity per range: {:?}", hist.per_range());

    let curve = bonding_curve(&hist)?;
    for bp in curve.breakpoints() {
        println!("tick {:>4}: x = {:.5}, y = {:.5}", bp.tick, bp.x, bp.y);
    }

    let (lo, hi) = curve.domain();
    for i in 1..5 {
        let x = lo + (hi - lo) * i as f64 / 5.0;
        println!("x = {x:.4}: y = {:.5}, price = {:.5}", curve.eval(x)?, curve.price_at(x)?);
    }
    Ok(())
}
