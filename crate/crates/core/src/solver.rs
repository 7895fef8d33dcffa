//! Nash equilibrium of the atomic game.
//!
//! Each player's problem against fixed opponents is a concave program with a
//! single budget constraint. [`best_response`] solves it exactly through its
//! budget dual; [`solve_ne`] iterates damped simultaneous best responses and
//! certifies the result with [`kkt_residuals`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::game::{
    atomic_utility, budget_used, others_weight, weight, xi, AtomicProfile, GameSpec, GeneralAllocation,
};
use crate::error::{Error, Result};

/// Relative tolerance used to decide whether a budget binds.
pub const BINDING_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relaxation weight on the new best response, in `(0, 1]`.
    pub damping: f64,
    pub max_iters: usize,
    /// Sup-norm step size (scaled by `max(1, max K)`) at which iteration stops.
    pub tol_profile: f64,
    pub tol_kkt: f64,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { damping: 0.5, max_iters: 10_000, tol_profile: 1e-10, tol_kkt: 1e-8, seed: 0 }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            v.push(format!("damping out of (0,1]: {}", self.damping));
        }
        if !(self.tol_profile > 0.0) || !(self.tol_kkt > 0.0) {
            v.push("tolerances must be positive".to_string());
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidGame(v))
        }
    }
}

/// Worst violation of each KKT condition family.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    pub stationarity: f64,
    pub comp_slack: f64,
    pub feasibility: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity.max(self.comp_slack).max(self.feasibility)
    }
}

/// Dual variables recovered from a profile, with the residuals they leave.
#[derive(Debug, Clone, PartialEq)]
pub struct KktCertificate {
    pub lambda: Vec<f64>,
    pub mu: Vec<Vec<f64>>,
    pub residuals: KktResiduals,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub profile: AtomicProfile,
    pub lambda: Vec<f64>,
    pub mu: Vec<Vec<f64>>,
    pub residuals: KktResiduals,
    pub iterations: usize,
    pub converged: bool,
    /// Last sup-norm relaxation step.
    pub last_step: f64,
    /// Damping in effect when iteration stopped.
    pub damping: f64,
}

/// Serialized form of an [`EquilibriumResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumData {
    pub k: Vec<Vec<f64>>,
    pub lambda: Vec<f64>,
    pub mu: Vec<Vec<f64>>,
    pub residuals: KktResiduals,
    pub iterations: usize,
    pub converged: bool,
}

impl EquilibriumResult {
    pub fn to_data(&self) -> EquilibriumData {
        EquilibriumData {
            k: self.profile.k.clone(),
            lambda: self.lambda.clone(),
            mu: self.mu.clone(),
            residuals: self.residuals,
            iterations: self.iterations,
            converged: self.converged,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_data()).expect("equilibrium serializes")
    }

    pub fn utilities(&self, spec: &GameSpec) -> Vec<f64> {
        (0..spec.num_players()).map(|n| atomic_utility(spec, &self.profile, n)).collect()
    }
}

/// Marginal fee reward `∂/∂K [f K^α / (ν + K^α)]`; infinite at `K = 0`
/// whenever the range pays fees and is not already saturated.
#[inline]
pub fn marginal_reward(fee: f64, others: f64, k: f64, alpha: f64) -> f64 {
    if fee == 0.0 {
        return 0.0;
    }
    if k <= 0.0 {
        return if alpha == 1.0 && others > 0.0 { fee / others } else { f64::INFINITY };
    }
    if alpha == 1.0 {
        fee * others / (others + k).powi(2)
    } else {
        let w = k.powf(alpha);
        alpha * fee * others * w / k / (others + w).powi(2)
    }
}

/// Liquidity at which the marginal reward equals `cost`.
fn range_demand(fee: f64, others: f64, cost: f64, alpha: f64) -> f64 {
    if fee == 0.0 {
        return 0.0;
    }
    if cost <= 0.0 {
        return f64::INFINITY;
    }
    if alpha == 1.0 {
        return ((fee * others / cost).sqrt() - others).max(0.0);
    }
    // g(u) = ln(marginal(e^u)) - ln(cost) is strictly decreasing in u = ln K
    let ln_c = (alpha * fee * others).ln() - cost.ln();
    let g = |u: f64| {
        let w = (alpha * u).exp();
        ln_c + (alpha - 1.0) * u - 2.0 * (others + w).ln()
    };
    let dg = |u: f64| {
        let w = (alpha * u).exp();
        (alpha - 1.0) - 2.0 * alpha * w / (others + w)
    };
    let mut hi = (alpha * fee * others / cost).ln() / (1.0 + alpha);
    while g(hi) > 0.0 {
        hi += 1.0;
    }
    let mut lo = hi - 1.0;
    let mut step = 1.0;
    while g(lo) < 0.0 {
        step *= 2.0;
        lo -= step;
        if lo < -745.0 {
            return 0.0;
        }
    }
    let mut u = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gu = g(u);
        if gu > 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let mut next = u - gu / dg(u);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - u).abs() <= 1e-15 * u.abs().max(1.0) || hi - lo <= 1e-15 * hi.abs().max(1.0) {
            u = next;
            break;
        }
        u = next;
    }
    u.exp()
}

fn demand_row(spec: &GameSpec, others: &[f64], lambda: f64, out: &mut [f64]) -> f64 {
    let mut total = 0.0;
    for m in 0..spec.num_ranges() {
        let cost = spec.taus()[m] + lambda * spec.eps()[m];
        let k = range_demand(spec.fees()[m], others[m], cost, spec.alpha());
        out[m] = k;
        total += k * spec.eps()[m];
    }
    total
}

/// Best response of player `n` when the rest of the pool has weight `others`
/// (`ν_{-n,m}`, non-player weight included). Returns the row and its budget dual.
pub fn best_response_to_weight(spec: &GameSpec, n: usize, others: &[f64]) -> Result<(Vec<f64>, f64)> {
    let m = spec.num_ranges();
    for r in 0..m {
        if spec.fees()[r] > 0.0 && others[r] <= 0.0 {
            return Err(Error::NoMaximizer { player: n, range: r });
        }
    }
    let budget = spec.budgets()[n];
    let mut row = vec![0.0; m];
    let total0 = demand_row(spec, others, 0.0, &mut row);
    if total0 <= budget {
        return Ok((row, 0.0));
    }

    // budget binds: find λ > 0 with spend(λ) = B
    let mut hi = (0..m)
        .filter(|&r| spec.fees()[r] > 0.0)
        .map(|r| marginal_reward(spec.fees()[r], others[r], 0.0, spec.alpha()) / spec.eps()[r])
        .filter(|v| v.is_finite())
        .fold(1.0_f64, f64::max);
    let mut f_hi = demand_row(spec, others, hi, &mut row) - budget;
    while f_hi > 0.0 {
        hi *= 2.0;
        f_hi = demand_row(spec, others, hi, &mut row) - budget;
    }
    let mut lo = 0.0;
    let mut f_lo = if total0.is_finite() { total0 - budget } else { f64::INFINITY };
    let mut side = 0i8;
    let mut lambda = hi;
    for _ in 0..300 {
        // Illinois variant of regula falsi, bisection while an end is unbounded
        let mut next = if f_lo.is_finite() {
            (lo * f_hi - hi * f_lo) / (f_hi - f_lo)
        } else {
            0.5 * (lo + hi)
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let f = demand_row(spec, others, next, &mut row) - budget;
        lambda = next;
        if f.abs() <= 1e-14 * budget || hi - lo <= 1e-15 * hi {
            break;
        }
        if f > 0.0 {
            lo = next;
            f_lo = f;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = next;
            f_hi = f;
            if side == -1 && f_lo.is_finite() {
                f_lo *= 0.5;
            }
            side = -1;
        }
    }
    let spent = demand_row(spec, others, lambda, &mut row);
    if spent > budget {
        let s = budget / spent;
        row.iter_mut().for_each(|k| *k *= s);
    }
    Ok((row, lambda))
}

/// Best response of player `n` to the other rows of `profile`.
pub fn best_response(spec: &GameSpec, profile: &AtomicProfile, n: usize) -> Result<Vec<f64>> {
    Ok(best_response_to_weight(spec, n, &others_weight(spec, profile, n))?.0)
}

/// Random interior starting profile.
pub fn random_profile(spec: &GameSpec, seed: u64) -> AtomicProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = spec.num_ranges();
    let k = (0..spec.num_players())
        .map(|n| {
            (0..m)
                .map(|r| rng.gen_range(0.05..1.0) * spec.budgets()[n] / (m as f64 * spec.eps()[r]))
                .collect()
        })
        .collect();
    AtomicProfile { k }
}

pub fn solve_ne(spec: &GameSpec, opts: &SolverOptions) -> Result<EquilibriumResult> {
    solve_ne_from(spec, opts, random_profile(spec, opts.seed))
}

/// Damped simultaneous best-response iteration from `init`.
pub fn solve_ne_from(spec: &GameSpec, opts: &SolverOptions, init: AtomicProfile) -> Result<EquilibriumResult> {
    opts.validate()?;
    let n_players = spec.num_players();
    let m = spec.num_ranges();
    if spec.fees().iter().all(|&f| f == 0.0) {
        let profile = AtomicProfile::zeros(n_players, m);
        return Ok(finish(spec, profile, 0, true, 0.0, opts.damping));
    }

    let mut profile = init;
    let mut omega = opts.damping;
    let mut prev_step = f64::INFINITY;
    let mut growth = 0;
    let mut step = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iters {
        iterations += 1;
        let responses = all_best_responses(spec, &profile)?;
        step = 0.0;
        let mut scale: f64 = 1.0;
        for (row, br) in profile.k.iter_mut().zip(&responses) {
            for (k, b) in row.iter_mut().zip(br) {
                let next = (1.0 - omega) * *k + omega * b;
                step = step.max((next - *k).abs());
                scale = scale.max(next);
                *k = next;
            }
        }
        if step <= opts.tol_profile * scale {
            converged = true;
            break;
        }
        if step > prev_step {
            growth += 1;
            if growth >= 3 && omega > 1e-3 {
                omega *= 0.5;
                growth = 0;
            }
        } else {
            growth = 0;
        }
        prev_step = step;
    }
    if converged {
        // one undamped sweep snaps entries that are converging to zero
        let responses = all_best_responses(spec, &profile)?;
        profile = AtomicProfile { k: responses };
    }
    let mut result = finish(spec, profile, iterations, converged, step, omega);
    if result.converged && result.residuals.max() > opts.tol_kkt {
        result.converged = false;
    }
    Ok(result)
}

fn all_best_responses(spec: &GameSpec, profile: &AtomicProfile) -> Result<Vec<Vec<f64>>> {
    let m = spec.num_ranges();
    let a = spec.alpha();
    let totals: Vec<f64> = (0..m)
        .map(|r| spec.chis()[r] + profile.k.iter().map(|row| weight(row[r], a)).sum::<f64>())
        .collect();
    (0..spec.num_players())
        .map(|n| {
            let others: Vec<f64> = (0..m)
                .map(|r| (totals[r] - weight(profile.k[n][r], a)).max(0.0))
                .collect();
            best_response_to_weight(spec, n, &others).map(|(row, _)| row)
        })
        .collect()
}

fn finish(
    spec: &GameSpec,
    profile: AtomicProfile,
    iterations: usize,
    converged: bool,
    last_step: f64,
    damping: f64,
) -> EquilibriumResult {
    let cert = kkt_residuals(spec, &profile);
    EquilibriumResult {
        profile,
        lambda: cert.lambda,
        mu: cert.mu,
        residuals: cert.residuals,
        iterations,
        converged,
        last_step,
        damping,
    }
}

/// Recovers budget and non-negativity duals from `profile` and reports how
/// far it is from satisfying the equilibrium KKT system.
pub fn kkt_residuals(spec: &GameSpec, profile: &AtomicProfile) -> KktCertificate {
    let m = spec.num_ranges();
    let a = spec.alpha();
    let mut lambda = Vec::with_capacity(spec.num_players());
    let mut mu = Vec::with_capacity(spec.num_players());
    let mut res = KktResiduals::default();
    for (n, row) in profile.k.iter().enumerate() {
        let others = others_weight(spec, profile, n);
        let marg: Vec<f64> = (0..m).map(|r| marginal_reward(spec.fees()[r], others[r], row[r], a)).collect();
        let budget = spec.budgets()[n];
        let slack = (budget - budget_used(spec, row)).max(0.0);

        let evaluate = |lam: f64| {
            let mut stat: f64 = 0.0;
            for r in 0..m {
                let gap = marg[r] - spec.taus()[r] - lam * spec.eps()[r];
                stat = stat.max(if row[r] > 0.0 { gap.abs() } else { gap.max(0.0) });
            }
            (stat, lam * slack)
        };

        let ratios: Vec<f64> = (0..m)
            .filter(|&r| row[r] > 0.0)
            .map(|r| (marg[r] - spec.taus()[r]) / spec.eps()[r])
            .collect();
        let mut candidates = vec![0.0];
        if !ratios.is_empty() {
            let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            candidates.push((0.5 * (hi + lo)).max(0.0));
        }
        let (lam, (stat, cs)) = candidates
            .into_iter()
            .map(|l| (l, evaluate(l)))
            .min_by(|x, y| x.1 .0.max(x.1 .1).total_cmp(&y.1 .0.max(y.1 .1)))
            .expect("at least one candidate");

        let mu_row: Vec<f64> = (0..m)
            .map(|r| {
                if row[r] > 0.0 {
                    0.0
                } else {
                    (spec.taus()[r] + lam * spec.eps()[r] - marg[r]).max(0.0)
                }
            })
            .collect();

        let over = (budget_used(spec, row) - budget).max(0.0) / budget.max(1.0);
        let neg = row.iter().fold(0.0_f64, |acc, &k| acc.max(-k));
        res.stationarity = res.stationarity.max(stat);
        res.comp_slack = res.comp_slack.max(cs);
        res.feasibility = res.feasibility.max(over).max(neg);
        lambda.push(lam);
        mu.push(mu_row);
    }
    KktCertificate { lambda, mu, residuals: res }
}

/// Symmetric equilibrium of an equal-budget game without non-player weight.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormEquilibrium {
    pub profile: AtomicProfile,
    /// Common budget dual; zero when budgets are ample.
    pub budget_dual: f64,
    pub budget_limited: bool,
    /// Set for single-player games, where the formula collapses to zero.
    pub degenerate: bool,
}

/// Closed-form equilibrium when every budget equals `B₀` and `χ = 0`.
///
/// Each player holds `α(N-1) f_m / (N² (τ_m + μ ε_m))` on range `m`, where
/// `μ = 0` if that spends at most `B₀` and otherwise solves the spend equation.
pub fn closed_form_constant_budget(spec: &GameSpec) -> Result<ClosedFormEquilibrium> {
    let budgets = spec.budgets();
    let b0 = budgets[0];
    if budgets.iter().any(|&b| (b - b0).abs() > 1e-12 * b0.max(1.0)) {
        return Err(Error::ClosedFormUnavailable("equal budgets"));
    }
    if spec.chis().iter().any(|&c| c != 0.0) {
        return Err(Error::ClosedFormUnavailable("zero non-player weight"));
    }
    let n = spec.num_players();
    let m = spec.num_ranges();
    if n == 1 {
        return Ok(ClosedFormEquilibrium {
            profile: AtomicProfile::zeros(1, m),
            budget_dual: 0.0,
            budget_limited: false,
            degenerate: true,
        });
    }
    let nf = n as f64;
    let coef = spec.alpha() * (nf - 1.0) / (nf * nf);
    let level = |mu: f64| -> Vec<f64> {
        (0..m)
            .map(|r| {
                let f = spec.fees()[r];
                if f == 0.0 {
                    0.0
                } else {
                    coef * f / (spec.taus()[r] + mu * spec.eps()[r])
                }
            })
            .collect()
    };
    let spend = |mu: f64| -> f64 { level(mu).iter().zip(spec.eps()).map(|(k, e)| k * e).sum() };

    let ample = spend(0.0);
    let (mu, limited) = if ample <= b0 {
        (0.0, false)
    } else {
        let mut hi = 1.0;
        while spend(hi) > b0 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if spend(mid) > b0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (hi, true)
    };
    let row = level(mu);
    Ok(ClosedFormEquilibrium {
        profile: AtomicProfile { k: vec![row; n] },
        budget_dual: mu,
        budget_limited: limited,
        degenerate: false,
    })
}

/// Outcome of the waterfilling verifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterfillReport {
    pub passed: bool,
    /// Players whose budgets do not bind.
    pub unconstrained: Vec<usize>,
    /// Common per-range level `h_m`.
    pub levels: Vec<f64>,
    /// Common spend level `h`.
    pub level: f64,
    pub worst_row_spread: f64,
    pub worst_cap_violation: f64,
    pub worst_budget_violation: f64,
}

fn budget_slack_tolerance(b: f64) -> f64 {
    BINDING_TOLERANCE * b.max(1.0)
}

/// Checks the waterfilling pattern: unconstrained players share one row,
/// everyone else stays below it, and spend equals `min(h, B_n)`.
pub fn waterfill_check(spec: &GameSpec, result: &EquilibriumResult, tol: f64) -> WaterfillReport {
    let spends: Vec<f64> = result.profile.k.iter().map(|r| budget_used(spec, r)).collect();
    let budgets = spec.budgets();
    let mut definite = Vec::new();
    let mut borderline = Vec::new();
    for n in 0..spec.num_players() {
        let gap = budgets[n] - spends[n];
        let t = budget_slack_tolerance(budgets[n]);
        if gap > 10.0 * t {
            definite.push(n);
        } else if gap > 0.1 * t {
            borderline.push(n);
        }
    }
    let combos: Vec<Vec<usize>> = if borderline.len() <= 10 {
        (0..1usize << borderline.len())
            .map(|mask| {
                let mut set = definite.clone();
                set.extend(borderline.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &n)| n));
                set.sort_unstable();
                set
            })
            .collect()
    } else {
        let mut all = definite.clone();
        all.extend(&borderline);
        all.sort_unstable();
        vec![definite.clone(), all]
    };
    let mut best: Option<WaterfillReport> = None;
    for set in combos {
        let report = waterfill_for(spec, &result.profile, &spends, &set, tol);
        let better = match &best {
            None => true,
            Some(b) => !b.passed && (report.passed || report_badness(&report) < report_badness(b)),
        };
        if better {
            best = Some(report);
        }
        if best.as_ref().is_some_and(|b| b.passed) {
            break;
        }
    }
    best.expect("at least one classification")
}

fn report_badness(r: &WaterfillReport) -> f64 {
    r.worst_row_spread.max(r.worst_cap_violation).max(r.worst_budget_violation)
}

fn waterfill_for(
    spec: &GameSpec,
    profile: &AtomicProfile,
    spends: &[f64],
    unconstrained: &[usize],
    tol: f64,
) -> WaterfillReport {
    let m = spec.num_ranges();
    let rows = &profile.k;
    let levels: Vec<f64> = if unconstrained.is_empty() {
        (0..m).map(|r| rows.iter().map(|row| row[r]).fold(0.0, f64::max)).collect()
    } else {
        (0..m)
            .map(|r| unconstrained.iter().map(|&n| rows[n][r]).sum::<f64>() / unconstrained.len() as f64)
            .collect()
    };
    let level: f64 = levels.iter().zip(spec.eps()).map(|(h, e)| h * e).sum();

    let mut spread: f64 = 0.0;
    for &i in unconstrained {
        for &j in unconstrained {
            for r in 0..m {
                let d = (rows[i][r] - rows[j][r]).abs() / rows[i][r].abs().max(1.0);
                spread = spread.max(d);
            }
        }
    }
    let mut cap: f64 = 0.0;
    let mut budget_violation: f64 = 0.0;
    for n in 0..spec.num_players() {
        if !unconstrained.contains(&n) {
            for r in 0..m {
                cap = cap.max((rows[n][r] - levels[r]) / levels[r].abs().max(1.0));
            }
        }
        let want = level.min(spec.budgets()[n]);
        budget_violation = budget_violation.max((spends[n] - want).abs() / want.abs().max(1.0));
    }
    WaterfillReport {
        passed: spread <= tol && cap <= tol && budget_violation <= tol,
        unconstrained: unconstrained.to_vec(),
        levels,
        level,
        worst_row_spread: spread,
        worst_cap_violation: cap.max(0.0),
        worst_budget_violation: budget_violation,
    }
}

/// Outcome of the budget-dominance, positive-liquidity and constant-utility checks.
/// `None` marks a check that does not apply to the game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub dominance: bool,
    pub worst_dominance_violation: f64,
    pub positive_liquidity: Option<bool>,
    pub constant_utility: Option<bool>,
    pub expected_utility: Option<f64>,
    pub worst_utility_error: Option<f64>,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.dominance && self.positive_liquidity != Some(false) && self.constant_utility != Some(false)
    }
}

/// Verifies budget dominance, strictly positive liquidity for `α < 1`, and the
/// common utility `((1-α)N + α)/N² Σ f_m` when no budget binds.
pub fn structure_checks(spec: &GameSpec, result: &EquilibriumResult, tol: f64) -> StructureReport {
    let rows = &result.profile.k;
    let b = spec.budgets();
    let n_players = spec.num_players();
    let m = spec.num_ranges();
    let mut worst: f64 = 0.0;
    for i in 0..n_players {
        for j in 0..n_players {
            if i == j {
                continue;
            }
            let equal = (b[i] - b[j]).abs() <= 1e-12 * b[i].max(b[j]).max(1.0);
            for r in 0..m {
                let scale = rows[i][r].abs().max(rows[j][r].abs()).max(1.0);
                if equal {
                    worst = worst.max((rows[i][r] - rows[j][r]).abs() / scale);
                } else if b[i] < b[j] {
                    worst = worst.max((rows[i][r] - rows[j][r]) / scale);
                }
            }
        }
    }
    let no_chi = spec.chis().iter().all(|&c| c == 0.0);

    let positive_liquidity = (no_chi && spec.alpha() < 1.0).then(|| {
        (0..m)
            .filter(|&r| spec.fees()[r] > 0.0)
            .all(|r| rows.iter().all(|row| row[r] > 0.0))
    });

    let none_binding = rows
        .iter()
        .enumerate()
        .all(|(n, row)| b[n] - budget_used(spec, row) > budget_slack_tolerance(b[n]));
    let (constant_utility, expected, err) = if no_chi && none_binding {
        let nf = n_players as f64;
        let a = spec.alpha();
        let want = ((1.0 - a) * nf + a) / (nf * nf) * spec.fees().iter().sum::<f64>();
        let err = (0..n_players)
            .map(|n| (atomic_utility(spec, &result.profile, n) - want).abs() / want.abs().max(1e-300))
            .fold(0.0, f64::max);
        (Some(err <= tol), Some(want), Some(err))
    } else {
        (None, None, None)
    };

    StructureReport {
        dominance: worst <= tol,
        worst_dominance_violation: worst.max(0.0),
        positive_liquidity,
        constant_utility,
        expected_utility: expected,
        worst_utility_error: err,
    }
}

/// Lifts an atomic equilibrium to original-game positions on atomic ranges.
pub fn lift_to_original(result: &EquilibriumResult) -> Vec<GeneralAllocation> {
    result.profile.k.iter().map(|row| xi(row)).collect()
}
