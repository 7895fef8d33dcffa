//! Strategy suite and evaluation metrics.
//!
//! Every strategy is scored in one evaluation game per day: the day's game
//! rebuilt on a grid that also contains yesterday's ticks and the inert
//! game's ticks, so actions computed on any of those grids embed exactly.
//! A player's action is scored against everyone else playing their actual
//! (GT) liquidity.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::amm::TickGrid;
use crate::error::{Error, Result};
use crate::game::{atomic_utility, budget_used, check_row, deviation_utility, weight, AtomicProfile, GameSpec};
use crate::pipeline::{
    build_daily_game, build_inert_game, build_reactive_game, inert_grid, refine_row, DailyGame, GameOptions,
    PoolData, INERT_WINDOW, REACTIVE_FLUCTUATION,
};
use crate::solver::{best_response, best_response_to_weight, solve_ne, EquilibriumResult, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Gt,
    Ne,
    Br,
    Yday,
    Rne,
    Ine,
    Ibr,
    /// Every player plays the equilibrium at once.
    NeAll,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 8] = [
        StrategyKind::Gt,
        StrategyKind::Ne,
        StrategyKind::Br,
        StrategyKind::Yday,
        StrategyKind::Rne,
        StrategyKind::Ine,
        StrategyKind::Ibr,
        StrategyKind::NeAll,
    ];

    pub fn label(self) -> &'static str {
        match self {
            StrategyKind::Gt => "gt",
            StrategyKind::Ne => "ne",
            StrategyKind::Br => "br",
            StrategyKind::Yday => "yday",
            StrategyKind::Rne => "rne",
            StrategyKind::Ine => "ine",
            StrategyKind::Ibr => "ibr",
            StrategyKind::NeAll => "neall",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for StrategyKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.label() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| format!("unknown strategy `{s}`"))
    }
}

/// Parses a comma-separated strategy list; `all` selects every strategy.
pub fn parse_strategies(list: &str) -> std::result::Result<Vec<StrategyKind>, String> {
    if list.trim() == "all" {
        return Ok(StrategyKind::ALL.to_vec());
    }
    let mut out: Vec<StrategyKind> = list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect::<std::result::Result<_, _>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

/// Similarity `1 - TV` of two actions of player `n`, treating unspent
/// budget as one more bucket.
pub fn overlap(spec: &GameSpec, n: usize, a1: &[f64], a2: &[f64]) -> Result<f64> {
    check_row(spec, n, a1)?;
    check_row(spec, n, a2)?;
    let eps = spec.eps();
    let mut abs = 0.0;
    let mut signed = 0.0;
    for m in 0..spec.num_ranges() {
        let d = eps[m] * (a1[m] - a2[m]);
        abs += d.abs();
        signed += d;
    }
    let tv = (abs + signed.abs()) / (2.0 * spec.budgets()[n]);
    Ok((1.0 - tv).clamp(0.0, 1.0))
}

/// Utility and ROI of player `n` playing `row` while the others play `gt`.
pub fn evaluate_action(spec: &GameSpec, gt: &AtomicProfile, n: usize, row: &[f64]) -> Result<(f64, f64)> {
    check_row(spec, n, row)?;
    let u = deviation_utility(spec, gt, n, row);
    Ok((u, u / spec.budgets()[n]))
}

/// Normalized optimality gap `(U(BR) - U(row)) / B_n` against `gt`.
pub fn nog(spec: &GameSpec, gt: &AtomicProfile, n: usize, row: &[f64]) -> Result<f64> {
    let br = best_response(spec, gt, n)?;
    let (u_br, _) = evaluate_action(spec, gt, n, &br)?;
    let (u, _) = evaluate_action(spec, gt, n, row)?;
    Ok((u_br - u) / spec.budgets()[n])
}

/// Yesterday's action scaled to today's budget.
pub fn yday(prev_row: &[f64], prev_budget: f64, new_budget: f64) -> Result<Vec<f64>> {
    if !(prev_budget > 0.0) {
        return Err(Error::Infeasible(format!("previous budget must be positive: {prev_budget}")));
    }
    let s = new_budget / prev_budget;
    Ok(prev_row.iter().map(|k| k * s).collect())
}

/// Best single-range action of player `n` when the rest of the pool has weight `others`.
pub fn ibr(spec: &GameSpec, others: f64, n: usize) -> Result<Vec<f64>> {
    if spec.num_ranges() != 1 {
        return Err(Error::InvalidGame(vec![format!("expected a single range, got {}", spec.num_ranges())]));
    }
    Ok(best_response_to_weight(spec, n, &[others])?.0)
}

/// Scales `row` down if it overspends player `n`'s budget.
fn clip_to_budget(spec: &GameSpec, n: usize, mut row: Vec<f64>) -> Vec<f64> {
    let used = budget_used(spec, &row);
    let b = spec.budgets()[n];
    if used > b {
        let s = b / used;
        row.iter_mut().for_each(|k| *k *= s);
    }
    row
}

/// One cell of the evaluation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRow {
    pub pool: String,
    pub date: String,
    pub player: String,
    pub strategy: StrategyKind,
    pub overlap_gt: f64,
    pub utility_usd: f64,
    pub roi: f64,
    /// Absent for the all-players equilibrium.
    pub nog: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub strategies: Vec<StrategyKind>,
    pub solver: SolverOptions,
    pub game: GameOptions,
    pub expansion: f64,
    pub fluctuation: f64,
    /// Worker threads across days.
    pub jobs: usize,
    /// Only days in this inclusive range are scored; earlier days still serve as history.
    pub from: Option<chrono::NaiveDate>,
    pub to: Option<chrono::NaiveDate>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            strategies: StrategyKind::ALL.to_vec(),
            solver: SolverOptions::default(),
            game: GameOptions::default(),
            expansion: 2.0,
            fluctuation: REACTIVE_FLUCTUATION,
            jobs: 1,
            from: None,
            to: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SuiteReport {
    pub rows: Vec<EvaluationRow>,
    /// Cells that could not be computed, with the reason.
    pub absent: Vec<String>,
}

/// Runs the strategy suite over `days` (chronological daily games of `pool`).
pub fn run_strategy_suite(pool: &PoolData, days: &[DailyGame], config: &SuiteConfig) -> Result<SuiteReport> {
    if !(config.expansion >= 1.0) {
        return Err(Error::InvalidGame(vec![format!("expansion factor must be at least 1: {}", config.expansion)]));
    }
    if !(config.fluctuation > 1.0) {
        return Err(Error::InvalidGame(vec![format!("fluctuation must exceed 1: {}", config.fluctuation)]));
    }
    let jobs = config.jobs.max(1).min(days.len().max(1));
    let mut results: Vec<Option<Result<SuiteReport>>> = (0..days.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunk = days.len().div_ceil(jobs).max(1);
        let handles: Vec<_> = (0..days.len())
            .step_by(chunk)
            .map(|start| {
                let end = (start + chunk).min(days.len());
                scope.spawn(move || (start..end).map(|d| evaluate_day(pool, days, d, config)).collect::<Vec<_>>())
            })
            .collect();
        let mut d = 0;
        for h in handles {
            for r in h.join().expect("evaluation worker panicked") {
                results[d] = Some(r);
                d += 1;
            }
        }
    });
    let mut report = SuiteReport::default();
    for r in results.into_iter().flatten() {
        let r = r?;
        report.rows.extend(r.rows);
        report.absent.extend(r.absent);
    }
    Ok(report)
}

fn evaluate_day(pool: &PoolData, days: &[DailyGame], d: usize, config: &SuiteConfig) -> Result<SuiteReport> {
    let today = &days[d];
    let date = today.day.date;
    if config.from.is_some_and(|f| date < f) || config.to.is_some_and(|t| date > t) {
        return Ok(SuiteReport::default());
    }
    let prev = (d > 0 && days[d - 1].day.index + 1 == today.day.index).then(|| &days[d - 1]);
    let history = &days[d.saturating_sub(INERT_WINDOW)..d];
    let wants = |k: StrategyKind| config.strategies.contains(&k);

    let mut extra: Vec<f64> = today.spec.grid().ticks().to_vec();
    if let Some(p) = prev {
        extra.extend(p.spec.grid().ticks());
    }
    let inert = if history.is_empty() { None } else { Some(inert_grid(history, config.expansion)?) };
    if let Some(g) = &inert {
        extra.extend(g.ticks());
    }
    let opts = GameOptions { alpha: config.game.alpha, extra_ticks: extra };
    let eval = match build_daily_game(pool, &today.day, &opts)? {
        Ok(g) => g,
        Err(w) => return Ok(SuiteReport { rows: vec![], absent: w }),
    };
    let spec = &eval.spec;
    let grid = spec.grid();
    let gt = &eval.gt;
    let mut report = SuiteReport::default();

    let solve = |s: &GameSpec, what: &str, absent: &mut Vec<String>| -> Option<EquilibriumResult> {
        match solve_ne(s, &config.solver) {
            Ok(r) if r.converged => Some(r),
            Ok(r) => {
                absent.push(format!("{date}: {what} did not converge after {} iterations", r.iterations));
                None
            }
            Err(e) => {
                absent.push(format!("{date}: {what}: {e}"));
                None
            }
        }
    };
    let ne = (wants(StrategyKind::Ne) || wants(StrategyKind::NeAll))
        .then(|| solve(spec, "equilibrium", &mut report.absent))
        .flatten();
    let reactive = if wants(StrategyKind::Rne) {
        match build_reactive_game(prev, today, config.fluctuation) {
            Ok(g) => solve(&g, "reactive equilibrium", &mut report.absent).map(|r| (g, r)),
            Err(e) => {
                report.absent.push(format!("{date}: rne: {e}"));
                None
            }
        }
    } else {
        None
    };
    let inert_game = if wants(StrategyKind::Ine) || wants(StrategyKind::Ibr) {
        match build_inert_game(history, today, config.expansion) {
            Ok(g) => Some(g),
            Err(e) => {
                report.absent.push(format!("{date}: inert game: {e}"));
                None
            }
        }
    } else {
        None
    };
    let inert_ne = match (&inert_game, wants(StrategyKind::Ine)) {
        (Some(g), true) => solve(g, "inert equilibrium", &mut report.absent),
        _ => None,
    };

    for n in 0..spec.num_players() {
        let id = &spec.player_ids()[n];
        let b = spec.budgets()[n];
        let br = match best_response(spec, gt, n) {
            Ok(row) => row,
            Err(e) => {
                report.absent.push(format!("{date}/{id}: best response: {e}"));
                continue;
            }
        };
        let u_br = deviation_utility(spec, gt, n, &br);
        for &kind in &config.strategies {
            let action: std::result::Result<Vec<f64>, String> = match kind {
                StrategyKind::Gt => Ok(gt.k[n].clone()),
                StrategyKind::Br => Ok(br.clone()),
                StrategyKind::Ne | StrategyKind::NeAll => {
                    ne.as_ref().map(|r| r.profile.k[n].clone()).ok_or_else(|| "no equilibrium".to_string())
                }
                StrategyKind::Yday => yday_action(prev, id, spec, n, grid),
                StrategyKind::Rne => match &reactive {
                    Some((g, r)) => foreign_row(g, &r.profile.k[n], spec, n),
                    None => Err("no reactive equilibrium".into()),
                },
                StrategyKind::Ine => match (&inert_game, &inert_ne) {
                    (Some(g), Some(r)) => foreign_row(g, &r.profile.k[n], spec, n),
                    _ => Err("no inert equilibrium".into()),
                },
                StrategyKind::Ibr => match &inert_game {
                    Some(g) => ibr_action(g, spec, gt, n),
                    None => Err("no inert game".into()),
                },
            };
            let row = match action {
                Ok(r) => r,
                Err(reason) => {
                    report.absent.push(format!("{date}/{id}/{kind}: {reason}"));
                    continue;
                }
            };
            let (utility, nog_value) = if kind == StrategyKind::NeAll {
                (atomic_utility(spec, &ne.as_ref().expect("checked above").profile, n), None)
            } else {
                let u = deviation_utility(spec, gt, n, &row);
                (u, Some((u_br - u) / b))
            };
            report.rows.push(EvaluationRow {
                pool: pool.header.name.clone(),
                date: date.to_string(),
                player: id.clone(),
                strategy: kind,
                overlap_gt: overlap(spec, n, &row, &gt.k[n])?,
                utility_usd: utility,
                roi: utility / b,
                nog: nog_value,
            });
        }
    }
    Ok(report)
}

fn yday_action(
    prev: Option<&DailyGame>,
    id: &str,
    spec: &GameSpec,
    n: usize,
    grid: &TickGrid,
) -> std::result::Result<Vec<f64>, String> {
    let prev = prev.ok_or("no previous day")?;
    let i = prev.spec.player_ids().iter().position(|p| p == id).ok_or("player absent yesterday")?;
    let refined = refine_row(prev.spec.grid(), &prev.gt.k[i], grid).map_err(|e| e.to_string())?;
    let scaled = yday(&refined, prev.spec.budgets()[i], spec.budgets()[n]).map_err(|e| e.to_string())?;
    Ok(clip_to_budget(spec, n, scaled))
}

fn foreign_row(game: &GameSpec, row: &[f64], spec: &GameSpec, n: usize) -> std::result::Result<Vec<f64>, String> {
    let refined = refine_row(game.grid(), row, spec.grid()).map_err(|e| e.to_string())?;
    Ok(clip_to_budget(spec, n, refined))
}

fn ibr_action(inert: &GameSpec, spec: &GameSpec, gt: &AtomicProfile, n: usize) -> std::result::Result<Vec<f64>, String> {
    let eps = inert.eps()[0];
    let others = inert.chis()[0]
        + (0..spec.num_players())
            .filter(|&i| i != n)
            .map(|i| weight(budget_used(spec, &gt.k[i]) / eps, inert.alpha()))
            .sum::<f64>();
    let row = ibr(inert, others, n).map_err(|e| e.to_string())?;
    foreign_row(inert, &row, spec, n)
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

/// Report CSV with columns `pool,date,player,strategy,overlap_gt,utility_usd,roi,nog`.
pub fn report_csv(rows: &[EvaluationRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["pool", "date", "player", "strategy", "overlap_gt", "utility_usd", "roi", "nog"])?;
    for r in rows {
        w.write_record([
            r.pool.clone(),
            r.date.clone(),
            r.player.clone(),
            r.strategy.label().to_string(),
            fmt_num(r.overlap_gt),
            fmt_num(r.utility_usd),
            fmt_num(r.roi),
            r.nog.map(fmt_num).unwrap_or_default(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Deserialize)]
struct CsvRow {
    pool: String,
    date: String,
    player: String,
    strategy: StrategyKind,
    overlap_gt: f64,
    utility_usd: f64,
    roi: f64,
    nog: Option<f64>,
}

pub fn parse_report_csv(text: &str) -> Result<Vec<EvaluationRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize::<CsvRow>()
        .map(|row| {
            let c = row?;
            Ok(EvaluationRow {
                pool: c.pool,
                date: c.date,
                player: c.player,
                strategy: c.strategy,
                overlap_gt: c.overlap_gt,
                utility_usd: c.utility_usd,
                roi: c.roi,
                nog: c.nog,
            })
        })
        .collect()
}

/// Count, mean, sample standard deviation and quartiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let mean = v.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        let quantile = |p: f64| {
            let h = p * (n - 1) as f64;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Some(Stats {
            count: n,
            mean,
            std: var.sqrt(),
            min: v[0],
            q1: quantile(0.25),
            median: quantile(0.5),
            q3: quantile(0.75),
            max: v[n - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub overlap_gt: Option<Stats>,
    pub utility_usd: Option<Stats>,
    pub roi: Option<Stats>,
    pub nog: Option<Stats>,
}

/// Per-strategy statistics of every metric column.
pub fn summarize(rows: &[EvaluationRow]) -> BTreeMap<String, StrategySummary> {
    let mut groups: BTreeMap<StrategyKind, Vec<&EvaluationRow>> = BTreeMap::new();
    for r in rows {
        groups.entry(r.strategy).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(k, rs)| {
            let col = |f: &dyn Fn(&EvaluationRow) -> Option<f64>| Stats::of(&rs.iter().filter_map(|r| f(r)).collect::<Vec<_>>());
            (
                k.label().to_string(),
                StrategySummary {
                    overlap_gt: col(&|r| Some(r.overlap_gt)),
                    utility_usd: col(&|r| Some(r.utility_usd)),
                    roi: col(&|r| Some(r.roi)),
                    nog: col(&|r| r.nog),
                },
            )
        })
        .collect()
}

pub fn summary_json(rows: &[EvaluationRow]) -> String {
    serde_json::to_string_pretty(&summarize(rows)).expect("summary serializes")
}
