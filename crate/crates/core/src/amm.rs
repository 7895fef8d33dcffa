//! Concentrated-liquidity pool math.
//!
//! Prices are quoted as units of token Y per unit of token X. Dollar-valued
//! quantities take an explicit `p_y` (the dollar price of Y); the fiat-pegged
//! model is the special case `p_y = 1`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Points per piece used when integrating over a log-uniform price move.
pub const LOG_UNIFORM_QUADRATURE_POINTS: usize = 64;

/// Strictly increasing positive price ticks `t_0 < t_1 < ... < t_M`.
///
/// Atomic range `m` (zero-based, `m < M`) is `(t_m, t_{m+1})`. General ranges
/// are index pairs `(i, j)` with `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TickGrid {
    ticks: Vec<f64>,
}

impl TickGrid {
    pub fn new(ticks: Vec<f64>) -> Result<Self> {
        if ticks.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 ticks, got {}",
                ticks.len()
            )));
        }
        if let Some(t) = ticks.iter().find(|t| !t.is_finite() || **t <= 0.0) {
            return Err(Error::InvalidGrid(format!("tick {t} is not a positive finite price")));
        }
        if let Some(w) = ticks.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(format!(
                "ticks must be strictly increasing, found {} then {}",
                w[0], w[1]
            )));
        }
        Ok(Self { ticks })
    }

    pub fn ticks(&self) -> &[f64] {
        &self.ticks
    }

    /// Number of atomic ranges `M`.
    pub fn num_ranges(&self) -> usize {
        self.ticks.len() - 1
    }

    pub fn atomic_range(&self, m: usize) -> (f64, f64) {
        (self.ticks[m], self.ticks[m + 1])
    }

    pub fn lowest(&self) -> f64 {
        self.ticks[0]
    }

    pub fn highest(&self) -> f64 {
        self.ticks[self.ticks.len() - 1]
    }

    /// All general ranges as tick-index pairs `(i, j)`, `i < j`.
    pub fn general_ranges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.ticks.len();
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
    }

    pub fn index_of(&self, price: f64) -> Option<usize> {
        self.ticks.iter().position(|&t| t == price)
    }

    /// Per-range dollar price of liquidity at pool price `q`.
    pub fn liquidity_prices(&self, q: f64, p_y: f64) -> Vec<f64> {
        self.ticks
            .windows(2)
            .map(|w| liquidity_price(w[0], w[1], q, p_y))
            .collect()
    }

    /// Sorted union of this grid's ticks with `other`'s.
    pub fn union(&self, other: &TickGrid) -> TickGrid {
        let mut ticks: Vec<f64> = self.ticks.iter().chain(&other.ticks).copied().collect();
        ticks.sort_by(f64::total_cmp);
        ticks.dedup();
        TickGrid { ticks }
    }
}

/// Pool price together with the two dollar prices of the tokens.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricePoint {
    pub q: f64,
    pub p_x: f64,
    pub p_y: f64,
}

impl PricePoint {
    pub fn new(q: f64, p_x: f64, p_y: f64) -> Result<Self> {
        for (name, v) in [("q", q), ("p_x", p_x), ("p_y", p_y)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidPrice(format!("{name} = {v} must be positive and finite")));
            }
        }
        Ok(Self { q, p_x, p_y })
    }

    /// Relative disagreement `|p_x - q p_y| / p_x` of the raw market data.
    pub fn inconsistency(&self) -> f64 {
        (self.p_x - self.q * self.p_y).abs() / self.p_x
    }

    /// The same point with dollar prices replaced by their shifted values.
    pub fn shifted(&self) -> PricePoint {
        let (p_x, p_y) = shift_prices(self.p_x, self.p_y, self.q);
        PricePoint { q: self.q, p_x, p_y }
    }
}

/// A liquidity position `(L, a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub liquidity: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Position {
    pub fn new(liquidity: f64, lower: f64, upper: f64) -> Result<Self> {
        if !(lower > 0.0 && lower < upper && upper.is_finite()) {
            return Err(Error::InvalidRange { lower, upper });
        }
        if !(liquidity >= 0.0 && liquidity.is_finite()) {
            return Err(Error::InvalidPrice(format!(
                "liquidity {liquidity} must be non-negative and finite"
            )));
        }
        Ok(Self { liquidity, lower, upper })
    }

    /// Dollar value of the position at pool price `q`.
    pub fn value(&self, q: f64, p_y: f64) -> f64 {
        self.liquidity * liquidity_price(self.lower, self.upper, q, p_y)
    }
}

/// Aggregate liquidity `J_m` covering each atomic range of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LiquidityHistogram {
    grid: TickGrid,
    per_range: Vec<f64>,
}

impl LiquidityHistogram {
    pub fn new(grid: TickGrid, per_range: Vec<f64>) -> Result<Self> {
        if per_range.len() != grid.num_ranges() {
            return Err(Error::InvalidGrid(format!(
                "histogram has {} entries for {} ranges",
                per_range.len(),
                grid.num_ranges()
            )));
        }
        if per_range.iter().any(|j| !(*j >= 0.0 && j.is_finite())) {
            return Err(Error::InvalidGrid("histogram entries must be non-negative".into()));
        }
        Ok(Self { grid, per_range })
    }

    /// Aggregates positions whose endpoints all lie on `grid`.
    pub fn from_positions(grid: TickGrid, positions: &[Position]) -> Result<Self> {
        let mut per_range = vec![0.0; grid.num_ranges()];
        for p in positions {
            let (i, j) = match (grid.index_of(p.lower), grid.index_of(p.upper)) {
                (Some(i), Some(j)) => (i, j),
                _ => {
                    return Err(Error::InvalidGrid(format!(
                        "position ({}, {}) does not align with the grid",
                        p.lower, p.upper
                    )))
                }
            };
            for slot in &mut per_range[i..j] {
                *slot += p.liquidity;
            }
        }
        Self::new(grid, per_range)
    }

    pub fn grid(&self) -> &TickGrid {
        &self.grid
    }

    pub fn per_range(&self) -> &[f64] {
        &self.per_range
    }
}

#[inline]
fn clamp_unchecked(q: f64, a: f64, b: f64) -> f64 {
    a.max(b.min(q))
}

/// Projects `q` onto `[a, b]`.
pub fn clamp_price(q: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && a < b) {
        return Err(Error::InvalidRange { lower: a, upper: b });
    }
    Ok(clamp_unchecked(q, a, b))
}

/// Token amounts `(dx, dy)` held by `pos` at pool price `q`.
pub fn position_amounts(pos: &Position, q: f64) -> (f64, f64) {
    let qh = clamp_unchecked(q, pos.lower, pos.upper);
    let sq = qh.sqrt();
    let dx = pos.liquidity * (1.0 / sq - 1.0 / pos.upper.sqrt());
    let dy = pos.liquidity * (sq - pos.lower.sqrt());
    (dx, dy)
}

/// Dollar price of one unit of liquidity on `(a, b)` at pool price `q`.
#[inline]
pub fn liquidity_price(a: f64, b: f64, q: f64, p_y: f64) -> f64 {
    debug_assert!(a > 0.0 && a < b);
    let sq = clamp_unchecked(q, a, b).sqrt();
    p_y * (sq - a.sqrt() + q / sq - q / b.sqrt())
}

#[inline]
fn il_core(a: f64, b: f64, q: f64, q_new: f64) -> f64 {
    let s0 = clamp_unchecked(q, a, b).sqrt();
    let s1 = clamp_unchecked(q_new, a, b).sqrt();
    (s0 - s1) * (1.0 - q_new / (s0 * s1))
}

/// Impermanent loss per unit of liquidity on `(a, b)` when the pool price
/// moves from `q` to `q_new` and Y's dollar price from `p_y` to `p_y_new`,
/// expressed in units of the starting Y price (multiply by `p_y` for dollars).
pub fn il_rate(a: f64, b: f64, q: f64, q_new: f64, p_y: f64, p_y_new: f64) -> Result<f64> {
    if !(a > 0.0 && a < b) {
        return Err(Error::InvalidRange { lower: a, upper: b });
    }
    Ok(p_y_new / p_y * il_core(a, b, q, q_new))
}

/// Impermanent loss as a fraction of the position's starting value; times
/// [`liquidity_price`] this is the per-liquidity loss [`il_rate`].
pub fn il_fraction(a: f64, b: f64, q: f64, q_new: f64, p_y: f64, p_y_new: f64) -> Result<f64> {
    Ok(il_rate(a, b, q, q_new, p_y, p_y_new)? / (liquidity_price(a, b, q, p_y) / p_y))
}

/// Impermanent loss of full-range (constant-product) liquidity.
pub fn il_rate_legacy(q: f64, q_new: f64, p_y: f64, p_y_new: f64) -> f64 {
    let (s0, s1) = (q.sqrt(), q_new.sqrt());
    p_y_new / p_y * (s0 - s1).powi(2) / s0
}

/// Distribution of the pool price at the end of a game.
#[derive(Debug, Clone, PartialEq)]
pub enum PriceDistribution {
    /// Finitely many `(price, probability)` pairs.
    Discrete(Vec<(f64, f64)>),
    /// `q' = R q` with `log R` uniform on `[-log r, log r]`.
    LogUniform { r: f64 },
}

impl PriceDistribution {
    pub fn point(q: f64) -> Self {
        PriceDistribution::Discrete(vec![(q, 1.0)])
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PriceDistribution::Discrete(pairs) => {
                if pairs.is_empty() {
                    return Err(Error::InvalidDistribution("empty support".into()));
                }
                if pairs.iter().any(|&(p, w)| !(p > 0.0 && p.is_finite()) || !(w >= 0.0)) {
                    return Err(Error::InvalidDistribution(
                        "prices must be positive and weights non-negative".into(),
                    ));
                }
                let total: f64 = pairs.iter().map(|p| p.1).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidDistribution(format!(
                        "weights sum to {total}, not 1"
                    )));
                }
                Ok(())
            }
            PriceDistribution::LogUniform { r } => {
                if !(*r > 1.0 && r.is_finite()) {
                    return Err(Error::InvalidDistribution(format!("fluctuation r = {r} must exceed 1")));
                }
                Ok(())
            }
        }
    }
}

fn log_uniform_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(LOG_UNIFORM_QUADRATURE_POINTS))
}

/// Expected impermanent loss per unit of liquidity on `(a, b)` starting from
/// price `q`, in dollars at a constant Y price `p_y`.
///
/// The log-uniform case integrates over `log q'` with the interval split at
/// `log a` and `log b`, where the integrand has kinks.
pub fn expected_il_rate(a: f64, b: f64, q: f64, dist: &PriceDistribution, p_y: f64) -> Result<f64> {
    if !(a > 0.0 && a < b) {
        return Err(Error::InvalidRange { lower: a, upper: b });
    }
    dist.validate()?;
    let value = match dist {
        PriceDistribution::Discrete(pairs) => pairs
            .iter()
            .map(|&(q_new, w)| w * il_core(a, b, q, q_new))
            .sum::<f64>(),
        PriceDistribution::LogUniform { r } => {
            let half = r.ln();
            let lo = q.ln() - half;
            let hi = q.ln() + half;
            let mut cuts = vec![lo];
            for k in [a.ln(), b.ln()] {
                if k > lo && k < hi {
                    cuts.push(k);
                }
            }
            cuts.push(hi);
            let rule = log_uniform_rule();
            let integral: f64 = cuts
                .windows(2)
                .map(|w| rule.integrate(|u| il_core(a, b, q, u.exp()), w[0], w[1]))
                .sum();
            integral / (2.0 * half)
        }
    };
    Ok(p_y * value)
}

/// Shifted dollar prices satisfying `p̄_x = q p̄_y` and `p̄_x p̄_y = p_x p_y`.
pub fn shift_prices(p_x: f64, p_y: f64, q: f64) -> (f64, f64) {
    let prod = p_x * p_y;
    ((prod * q).sqrt(), (prod / q).sqrt())
}

/// Realized impermanent loss per unit of liquidity on `(a, b)` between two
/// observed days, in dollars, using shifted prices on both days.
pub fn empirical_il_rate(a: f64, b: f64, prev: &PricePoint, cur: &PricePoint) -> Result<f64> {
    if !(a > 0.0 && a < b) {
        return Err(Error::InvalidRange { lower: a, upper: b });
    }
    let p0 = prev.shifted();
    let p1 = cur.shifted();
    let unit = Position { liquidity: 1.0, lower: a, upper: b };
    let (x0, y0) = position_amounts(&unit, p0.q);
    let (x1, y1) = position_amounts(&unit, p1.q);
    let v_init = p0.p_x * x0 + p0.p_y * y0;
    let v_hold = p1.p_x * x0 + p1.p_y * y0;
    let v_lp = p1.p_x * x1 + p1.p_y * y1;
    let eps = liquidity_price(a, b, p0.q, p0.p_y);
    Ok(eps * (v_hold - v_lp) / v_init)
}

/// Continuous, decreasing, convex bonding curve `y = φ(x)` of a liquidity histogram.
#[derive(Debug, Clone)]
pub struct BondingCurve {
    ticks: Vec<f64>,
    liquidity: Vec<f64>,
    // x_0 >= x_1 >= ... >= x_M and y_0 <= ... <= y_M
    xs: Vec<f64>,
    ys: Vec<f64>,
}

/// One breakpoint `(x_m, y_m, t_m)` of a bonding curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakpoint {
    pub x: f64,
    pub y: f64,
    pub tick: f64,
}

pub fn bonding_curve(hist: &LiquidityHistogram) -> Result<BondingCurve> {
    BondingCurve::new(hist)
}

impl BondingCurve {
    pub fn new(hist: &LiquidityHistogram) -> Result<Self> {
        let ticks = hist.grid().ticks().to_vec();
        let liquidity = hist.per_range().to_vec();
        if !liquidity.iter().any(|&j| j > 0.0) {
            return Err(Error::InvalidGrid("bonding curve needs some positive liquidity".into()));
        }
        let m = liquidity.len();
        let mut xs = vec![0.0; m + 1];
        for k in (0..m).rev() {
            xs[k] = xs[k + 1] + (1.0 / ticks[k].sqrt() - 1.0 / ticks[k + 1].sqrt()) * liquidity[k];
        }
        let mut ys = vec![0.0; m + 1];
        for k in 0..m {
            ys[k + 1] = ys[k] + (ticks[k + 1].sqrt() - ticks[k].sqrt()) * liquidity[k];
        }
        Ok(Self { ticks, liquidity, xs, ys })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[self.xs.len() - 1], self.xs[0])
    }

    pub fn breakpoints(&self) -> Vec<Breakpoint> {
        (0..self.xs.len())
            .map(|k| Breakpoint { x: self.xs[k], y: self.ys[k], tick: self.ticks[k] })
            .collect()
    }

    /// Positive-liquidity piece containing `x`, preferring the piece to the
    /// left of a breakpoint. Piece `k` spans `[x_{k+1}, x_k]`.
    fn piece(&self, x: f64) -> Result<usize> {
        let (lo, hi) = self.domain();
        if !(x >= lo && x <= hi) {
            return Err(Error::OutOfDomain { x, lo, hi });
        }
        let m = self.liquidity.len();
        let mut fallback = None;
        for k in 0..m {
            if self.liquidity[k] <= 0.0 {
                continue;
            }
            if x > self.xs[k + 1] && x <= self.xs[k] {
                return Ok(k);
            }
            if x == self.xs[k + 1] {
                fallback = Some(k);
            }
        }
        fallback.ok_or(Error::OutOfDomain { x, lo, hi })
    }

    /// Pool price at reserve `x`.
    pub fn price_at(&self, x: f64) -> Result<f64> {
        let k = self.piece(x)?;
        let j = self.liquidity[k];
        let d = x - self.xs[k + 1] + j / self.ticks[k + 1].sqrt();
        Ok((j / d).powi(2))
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let k = self.piece(x)?;
        let j = self.liquidity[k];
        let d = x - self.xs[k + 1] + j / self.ticks[k + 1].sqrt();
        Ok(j * j / d + self.ys[k] - j * self.ticks[k].sqrt())
    }

    /// Derivative `dy/dx`, equal to minus the pool price.
    pub fn slope(&self, x: f64) -> Result<f64> {
        Ok(-self.price_at(x)?)
    }
}
