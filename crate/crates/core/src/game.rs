//! The original (general-range) game and the atomic game.
//!
//! A player's action in the atomic game is a row of active liquidity, one
//! entry per atomic range. In the original game it is a map from general
//! ranges to liquidity; [`theta`] and [`xi`] move between the two.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::amm::{expected_il_rate, liquidity_price, PriceDistribution, TickGrid};
use crate::error::{Error, Result};

/// Absolute slack allowed on a budget constraint, relative to `max(1, B)`.
pub const BUDGET_SLACK: f64 = 1e-9;

/// One player entry of the GameSpec JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerData {
    pub id: String,
    pub budget: f64,
}

/// Serialized form of a game instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSpecData {
    pub alpha: f64,
    pub q0: f64,
    #[serde(default = "one")]
    pub p_y0: f64,
    pub ticks: Vec<f64>,
    pub fees: Vec<f64>,
    pub taus: Vec<f64>,
    pub chis: Vec<f64>,
    pub players: Vec<PlayerData>,
}

fn one() -> f64 {
    1.0
}

/// Lists every invariant a game instance violates; empty means valid.
pub fn validate_spec(data: &GameSpecData) -> Vec<String> {
    let mut out = Vec::new();
    if !(data.alpha > 0.0 && data.alpha <= 1.0) {
        out.push(format!("alpha out of (0,1]: {}", data.alpha));
    }
    if !(data.q0 > 0.0 && data.q0.is_finite()) {
        out.push(format!("q0 must be positive: {}", data.q0));
    }
    if !(data.p_y0 > 0.0 && data.p_y0.is_finite()) {
        out.push(format!("p_y0 must be positive: {}", data.p_y0));
    }
    let grid = match TickGrid::new(data.ticks.clone()) {
        Ok(g) => Some(g),
        Err(e) => {
            out.push(format!("ticks: {e}"));
            None
        }
    };
    let m = grid.as_ref().map(|g| g.num_ranges());
    for (name, values) in [("fees", &data.fees), ("taus", &data.taus), ("chis", &data.chis)] {
        if let Some(m) = m {
            if values.len() != m {
                out.push(format!("{name} has {} entries, expected {m}", values.len()));
            }
        }
        for (i, v) in values.iter().enumerate() {
            if !(*v >= 0.0 && v.is_finite()) {
                out.push(format!("{name}[{i}] must be non-negative: {v}"));
            }
        }
    }
    if data.players.is_empty() {
        out.push("players must be non-empty".to_string());
    }
    for (i, p) in data.players.iter().enumerate() {
        if !(p.budget > 0.0 && p.budget.is_finite()) {
            out.push(format!("players[{i}] ({}) budget must be positive: {}", p.id, p.budget));
        }
    }
    if let (Some(grid), true) = (grid, data.q0 > 0.0 && data.p_y0 > 0.0) {
        for (i, e) in grid.liquidity_prices(data.q0, data.p_y0).iter().enumerate() {
            if !(*e > 0.0 && e.is_finite()) {
                out.push(format!("liquidity price of range {i} is not positive: {e}"));
            }
        }
    }
    out
}

/// A validated atomic game instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    grid: TickGrid,
    alpha: f64,
    q0: f64,
    p_y0: f64,
    fees: Vec<f64>,
    taus: Vec<f64>,
    chis: Vec<f64>,
    budgets: Vec<f64>,
    player_ids: Vec<String>,
    eps: Vec<f64>,
}

impl GameSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        grid: TickGrid,
        alpha: f64,
        q0: f64,
        p_y0: f64,
        fees: Vec<f64>,
        taus: Vec<f64>,
        chis: Vec<f64>,
        budgets: Vec<f64>,
        player_ids: Vec<String>,
    ) -> Result<Self> {
        if player_ids.len() != budgets.len() {
            return Err(Error::InvalidGame(vec![format!(
                "{} player ids for {} budgets",
                player_ids.len(),
                budgets.len()
            )]));
        }
        let data = GameSpecData {
            alpha,
            q0,
            p_y0,
            ticks: grid.ticks().to_vec(),
            fees,
            taus,
            chis,
            players: player_ids
                .into_iter()
                .zip(budgets)
                .map(|(id, budget)| PlayerData { id, budget })
                .collect(),
        };
        Self::from_data(data)
    }

    pub fn from_data(data: GameSpecData) -> Result<Self> {
        let violations = validate_spec(&data);
        if !violations.is_empty() {
            return Err(Error::InvalidGame(violations));
        }
        let grid = TickGrid::new(data.ticks)?;
        let eps = grid.liquidity_prices(data.q0, data.p_y0);
        let (player_ids, budgets) = data.players.into_iter().map(|p| (p.id, p.budget)).unzip();
        Ok(Self {
            grid,
            alpha: data.alpha,
            q0: data.q0,
            p_y0: data.p_y0,
            fees: data.fees,
            taus: data.taus,
            chis: data.chis,
            budgets,
            player_ids,
            eps,
        })
    }

    pub fn to_data(&self) -> GameSpecData {
        GameSpecData {
            alpha: self.alpha,
            q0: self.q0,
            p_y0: self.p_y0,
            ticks: self.grid.ticks().to_vec(),
            fees: self.fees.clone(),
            taus: self.taus.clone(),
            chis: self.chis.clone(),
            players: self
                .player_ids
                .iter()
                .zip(&self.budgets)
                .map(|(id, &budget)| PlayerData { id: id.clone(), budget })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_data(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_data()).expect("game spec serializes")
    }

    pub fn grid(&self) -> &TickGrid {
        &self.grid
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn q0(&self) -> f64 {
        self.q0
    }
    pub fn p_y0(&self) -> f64 {
        self.p_y0
    }
    pub fn fees(&self) -> &[f64] {
        &self.fees
    }
    pub fn taus(&self) -> &[f64] {
        &self.taus
    }
    pub fn chis(&self) -> &[f64] {
        &self.chis
    }
    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }
    pub fn player_ids(&self) -> &[String] {
        &self.player_ids
    }
    /// Dollar price of liquidity on each atomic range at the start price.
    pub fn eps(&self) -> &[f64] {
        &self.eps
    }
    pub fn num_players(&self) -> usize {
        self.budgets.len()
    }
    pub fn num_ranges(&self) -> usize {
        self.grid.num_ranges()
    }

    pub fn with_taus(&self, taus: Vec<f64>) -> Result<Self> {
        let mut data = self.to_data();
        data.taus = taus;
        Self::from_data(data)
    }

    pub fn with_budgets(&self, player_ids: Vec<String>, budgets: Vec<f64>) -> Result<Self> {
        let mut data = self.to_data();
        data.players = player_ids
            .into_iter()
            .zip(budgets)
            .map(|(id, budget)| PlayerData { id, budget })
            .collect();
        Self::from_data(data)
    }

    /// Budget slack tolerance for player `n`.
    pub fn budget_tolerance(&self, n: usize) -> f64 {
        BUDGET_SLACK * self.budgets[n].max(1.0)
    }
}

/// Active liquidity of every player on every atomic range (`N x M`).
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicProfile {
    pub k: Vec<Vec<f64>>,
}

/// Serialized form of an [`AtomicProfile`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileData {
    pub players: Vec<String>,
    pub k: Vec<Vec<f64>>,
}

impl AtomicProfile {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self { k: vec![vec![0.0; m]; n] }
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.k
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.k[n]
    }

    /// Total active liquidity `κ_m` per range.
    pub fn totals(&self) -> Vec<f64> {
        let m = self.k.first().map_or(0, Vec::len);
        (0..m).map(|j| self.k.iter().map(|r| r[j]).sum()).collect()
    }

    /// Checks shape, non-negativity and budgets against `spec`.
    pub fn check_feasible(&self, spec: &GameSpec) -> Result<()> {
        if self.k.len() != spec.num_players() {
            return Err(Error::Infeasible(format!(
                "profile has {} rows for {} players",
                self.k.len(),
                spec.num_players()
            )));
        }
        for (n, row) in self.k.iter().enumerate() {
            check_row(spec, n, row)?;
        }
        Ok(())
    }

    pub fn to_data(&self, spec: &GameSpec) -> ProfileData {
        ProfileData { players: spec.player_ids().to_vec(), k: self.k.clone() }
    }

    pub fn to_json(&self, spec: &GameSpec) -> String {
        serde_json::to_string_pretty(&self.to_data(spec)).expect("profile serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let data: ProfileData = serde_json::from_str(text)?;
        Ok(Self { k: data.k })
    }
}

/// Checks that `row` is a feasible action for player `n`.
pub fn check_row(spec: &GameSpec, n: usize, row: &[f64]) -> Result<()> {
    if row.len() != spec.num_ranges() {
        return Err(Error::Infeasible(format!(
            "row for player {n} has {} entries, expected {}",
            row.len(),
            spec.num_ranges()
        )));
    }
    if let Some(v) = row.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(Error::Infeasible(format!("player {n} has negative or non-finite liquidity {v}")));
    }
    let used = budget_used(spec, row);
    if used > spec.budgets()[n] + spec.budget_tolerance(n) {
        return Err(Error::Infeasible(format!(
            "player {n} spends {used} over budget {}",
            spec.budgets()[n]
        )));
    }
    Ok(())
}

/// Liquidity on general ranges, keyed by tick-index pairs `(i, j)`, `i < j`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GeneralAllocation {
    pub entries: BTreeMap<(usize, usize), f64>,
}

impl GeneralAllocation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, lower: usize, upper: usize, liquidity: f64) {
        *self.entries.entry((lower, upper)).or_insert(0.0) += liquidity;
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Active liquidity per atomic range of a general allocation.
pub fn theta(alloc: &GeneralAllocation, grid: &TickGrid) -> Result<Vec<f64>> {
    let m = grid.num_ranges();
    let mut k = vec![0.0; m];
    for (&(i, j), &l) in &alloc.entries {
        if !(i < j && j <= m) {
            return Err(Error::InvalidGrid(format!("range ({i}, {j}) not valid for {m} atomic ranges")));
        }
        for slot in &mut k[i..j] {
            *slot += l;
        }
    }
    Ok(k)
}

/// Embeds an atomic row as positions on atomic ranges only.
pub fn xi(k: &[f64]) -> GeneralAllocation {
    let mut alloc = GeneralAllocation::new();
    for (m, &v) in k.iter().enumerate() {
        if v != 0.0 {
            alloc.entries.insert((m, m + 1), v);
        }
    }
    alloc
}

/// Dollars spent by an atomic row.
pub fn budget_used(spec: &GameSpec, row: &[f64]) -> f64 {
    row.iter().zip(spec.eps()).map(|(k, e)| k * e).sum()
}

/// Dollars spent by a general allocation at the game's start price.
pub fn budget_used_general(spec: &GameSpec, alloc: &GeneralAllocation) -> f64 {
    let t = spec.grid().ticks();
    alloc
        .entries
        .iter()
        .map(|(&(i, j), &l)| l * liquidity_price(t[i], t[j], spec.q0(), spec.p_y0()))
        .sum()
}

/// `ν_{-n,m}`: non-player weight plus every other player's weight per range.
pub fn others_weight(spec: &GameSpec, profile: &AtomicProfile, n: usize) -> Vec<f64> {
    let a = spec.alpha();
    (0..spec.num_ranges())
        .map(|m| {
            spec.chis()[m]
                + profile
                    .k
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != n)
                    .map(|(_, r)| weight(r[m], a))
                    .sum::<f64>()
        })
        .collect()
}

#[inline]
pub(crate) fn weight(k: f64, alpha: f64) -> f64 {
    if k <= 0.0 {
        0.0
    } else if alpha == 1.0 {
        k
    } else {
        k.powf(alpha)
    }
}

/// Fee share `K^α / (ν_{-n} + K^α)`, defined as zero when `K = 0`.
#[inline]
pub fn fee_share(k: f64, others: f64, alpha: f64) -> f64 {
    if k <= 0.0 {
        return 0.0;
    }
    let w = weight(k, alpha);
    w / (others + w)
}

/// Utility of playing `row` when the rest of the pool has weight `others`.
pub fn utility_against(spec: &GameSpec, row: &[f64], others: &[f64]) -> f64 {
    let a = spec.alpha();
    (0..spec.num_ranges())
        .map(|m| spec.fees()[m] * fee_share(row[m], others[m], a) - spec.taus()[m] * row[m])
        .sum()
}

/// Utility of player `n` in the atomic game.
pub fn atomic_utility(spec: &GameSpec, profile: &AtomicProfile, n: usize) -> f64 {
    utility_against(spec, &profile.k[n], &others_weight(spec, profile, n))
}

/// Utility of player `n` when it deviates to `row` and everyone else keeps `profile`.
pub fn deviation_utility(spec: &GameSpec, profile: &AtomicProfile, n: usize, row: &[f64]) -> f64 {
    utility_against(spec, row, &others_weight(spec, profile, n))
}

/// Expected impermanent loss rate of every general range under `dist`.
pub fn general_taus(spec: &GameSpec, dist: &PriceDistribution) -> Result<BTreeMap<(usize, usize), f64>> {
    let t = spec.grid().ticks();
    spec.grid()
        .general_ranges()
        .map(|(i, j)| Ok(((i, j), expected_il_rate(t[i], t[j], spec.q0(), dist, spec.p_y0())?)))
        .collect()
}

/// Utility of player `n` in the original game.
pub fn original_utility(
    spec: &GameSpec,
    allocs: &[GeneralAllocation],
    taus_general: &BTreeMap<(usize, usize), f64>,
    n: usize,
) -> Result<f64> {
    let rows = allocs
        .iter()
        .map(|a| theta(a, spec.grid()))
        .collect::<Result<Vec<_>>>()?;
    let profile = AtomicProfile { k: rows };
    let others = others_weight(spec, &profile, n);
    let a = spec.alpha();
    let fee: f64 = (0..spec.num_ranges())
        .map(|m| spec.fees()[m] * fee_share(profile.k[n][m], others[m], a))
        .sum();
    let mut loss = 0.0;
    for (key, &l) in &allocs[n].entries {
        let tau = taus_general
            .get(key)
            .ok_or_else(|| Error::Inconsistent(format!("no impermanent loss rate for range {key:?}")))?;
        loss += tau * l;
    }
    Ok(fee - loss)
}
