//! Pool math on a single range: reserves, the dollar price of liquidity,
//! impermanent loss after a move, and its expectation under a random move.

use clmm_game::amm::{
    expected_il_rate, il_rate, liquidity_price, position_amounts, shift_prices, Position, PriceDistribution,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (a, b) = (1500.0, 2500.0);
    let pos = Position::new(10.0, a, b)?;

    // Quoted dollar prices rarely satisfy p_x = q p_y exactly; shift them first.
    let q = 2000.0;
    let (p_x, p_y) = shift_prices(2001.3, 1.0002, q);
    println!("shifted prices: p_x = {p_x:.4}, p_y = {p_y:.6}");

    for price in [1200.0, 2000.0, 2800.0] {
        let (x, y) = position_amounts(&pos, price);
        println!("q = {price:>6}: x = {x:.6}, y = {y:.4}");
    }

    let eps = liquidity_price(a, b, q, p_y);
    println!("one unit of liquidity on ({a}, {b}) costs ${eps:.4}");

    for q_new in [1800.0, 2000.0, 2300.0, 3000.0] {
        let il = il_rate(a, b, q, q_new, p_y, p_y)?;
        println!("move to {q_new:>6}: loss ${:.4} per unit of liquidity", il * p_y);
    }

    let dist = PriceDistribution::LogUniform { r: 1.1 };
    let tau = expected_il_rate(a, b, q, &dist, p_y)?;
    println!("expected loss for a +-10% log-uniform move: ${tau:.6} per unit");
    Ok(())
}
