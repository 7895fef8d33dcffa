//! Event logs and daily prices to daily game instances.
//!
//! Each day runs from one UTC midnight in the prices file to the next. The
//! pool is replayed up to the day start to find the positions that qualify
//! as players; the day's swaps are then replayed against live pool
//! liquidity to attribute fees to atomic ranges.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use chrono::{NaiveDate, NaiveTime};
use serde::{Deserialize, Serialize};

use crate::amm::{
    empirical_il_rate, expected_il_rate, liquidity_price, shift_prices, LiquidityHistogram, Position,
    PriceDistribution, PricePoint, TickGrid,
};
use crate::error::{Error, Result};
use crate::game::{budget_used, AtomicProfile, GameSpec};

/// Most players kept per day before the prefix rule.
pub const MAX_PLAYERS: usize = 30;
/// Share of the top players' value the retained prefix must hold.
pub const PREFIX_SHARE: f64 = 0.99;
/// Price fluctuation assumed by the reactive game.
pub const REACTIVE_FLUCTUATION: f64 = 1.1;
/// Days of history averaged by the inert game.
pub const INERT_WINDOW: usize = 7;

/// Pool-level metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolHeader {
    pub gamma: f64,
    pub name: String,
    /// Inert-game expansion factor for this pool, if known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expansion: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventBody {
    Swap { q_before: f64, q_after: f64 },
    Mint { position_id: String, is_nft: bool, position: Position },
    Burn { position_id: String, position: Position },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    /// 1-based line in the source file.
    pub line: usize,
    pub timestamp: i64,
    pub sender: String,
    pub body: EventBody,
}

/// A skipped input row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseIssue {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    pub events: Vec<Event>,
    pub issues: Vec<ParseIssue>,
}

impl EventLog {
    /// Events with `start <= timestamp < end`.
    pub fn between(&self, start: i64, end: i64) -> &[Event] {
        let lo = self.events.partition_point(|e| e.timestamp < start);
        let hi = self.events.partition_point(|e| e.timestamp < end);
        &self.events[lo..hi]
    }
}

/// Parses an events file, CSV with a header row or JSON lines.
///
/// Malformed rows are skipped and reported; a timestamp that does not
/// strictly increase is a hard error.
pub fn parse_events(text: &str) -> Result<EventLog> {
    let json = text.trim_start().starts_with('{');
    let rows = if json { json_rows(text)? } else { csv_rows(text)? };
    let mut log = EventLog::default();
    let mut prev: Option<(usize, i64)> = None;
    for (line, fields) in rows {
        let fields = match fields {
            Ok(f) => f,
            Err(message) => {
                log.issues.push(ParseIssue { line, message });
                continue;
            }
        };
        match event_from_fields(line, &fields) {
            Ok(event) => {
                if let Some((prev_line, prev_ts)) = prev {
                    if event.timestamp <= prev_ts {
                        return Err(Error::TimestampRegression {
                            line,
                            timestamp: event.timestamp,
                            prev_line,
                            prev_timestamp: prev_ts,
                        });
                    }
                }
                prev = Some((line, event.timestamp));
                log.events.push(event);
            }
            Err(message) => log.issues.push(ParseIssue { line, message }),
        }
    }
    Ok(log)
}

type Fields = BTreeMap<String, String>;
type Row = (usize, std::result::Result<Fields, String>);

fn csv_rows(text: &str) -> Result<Vec<Row>> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let mut out = Vec::new();
    for record in reader.records() {
        match record {
            Ok(r) => {
                let line = r.position().map_or(0, |p| p.line() as usize);
                let fields = headers
                    .iter()
                    .zip(r.iter())
                    .filter(|(_, v)| !v.is_empty())
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .collect();
                out.push((line, Ok(fields)));
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize);
                out.push((line, Err(e.to_string())));
            }
        }
    }
    Ok(out)
}

fn json_rows(text: &str) -> Result<Vec<Row>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<serde_json::Map<String, serde_json::Value>>(raw)
            .map_err(|e| e.to_string())
            .map(|obj| {
                obj.into_iter()
                    .filter_map(|(k, v)| match v {
                        serde_json::Value::Null => None,
                        serde_json::Value::String(s) => Some((k, s)),
                        other => Some((k, other.to_string())),
                    })
                    .collect()
            });
        out.push((i + 1, parsed));
    }
    Ok(out)
}

fn field<'a>(fields: &'a Fields, key: &str) -> std::result::Result<&'a str, String> {
    fields.get(key).map(String::as_str).ok_or_else(|| format!("missing field `{key}`"))
}

fn number(fields: &Fields, key: &str) -> std::result::Result<f64, String> {
    let raw = field(fields, key)?;
    raw.parse::<f64>().map_err(|_| format!("field `{key}` is not a number: {raw}"))
}

fn price(fields: &Fields, key: &str) -> std::result::Result<f64, String> {
    let v = number(fields, key)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("field `{key}` must be a positive price: {v}"))
    }
}

fn event_from_fields(line: usize, fields: &Fields) -> std::result::Result<Event, String> {
    let raw_ts = field(fields, "timestamp")?;
    let timestamp = raw_ts.parse::<i64>().map_err(|_| format!("timestamp is not an integer: {raw_ts}"))?;
    let sender = fields.get("sender").cloned().unwrap_or_default();
    let position = |fields: &Fields| -> std::result::Result<(String, Position), String> {
        let id = field(fields, "position_id")?.to_string();
        let lower = price(fields, "lower")?;
        let upper = price(fields, "upper")?;
        let liquidity = number(fields, "liquidity")?;
        let pos = Position::new(liquidity, lower, upper).map_err(|e| e.to_string())?;
        Ok((id, pos))
    };
    let body = match field(fields, "kind")? {
        "swap" => EventBody::Swap { q_before: price(fields, "q_before")?, q_after: price(fields, "q_after")? },
        "mint" => {
            let (position_id, position) = position(fields)?;
            let is_nft = match fields.get("is_nft").map(String::as_str) {
                Some("true" | "1") => true,
                Some("false" | "0") | None => false,
                Some(other) => return Err(format!("is_nft is not a flag: {other}")),
            };
            EventBody::Mint { position_id, is_nft, position }
        }
        "burn" => {
            let (position_id, position) = position(fields)?;
            EventBody::Burn { position_id, position }
        }
        other => return Err(format!("unknown event kind `{other}`")),
    };
    Ok(Event { line, timestamp, sender, body })
}

/// One row of the prices file: the pool and dollar prices at a UTC midnight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceRow {
    pub date: NaiveDate,
    pub point: PricePoint,
}

#[derive(Deserialize)]
struct RawPriceRow {
    date: String,
    q: f64,
    p_x: f64,
    p_y: f64,
}

/// Parses `date,q,p_x,p_y` rows with strictly increasing dates.
pub fn parse_prices(text: &str) -> Result<Vec<PriceRow>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out: Vec<PriceRow> = Vec::new();
    for record in reader.deserialize::<RawPriceRow>() {
        let raw = record?;
        let line = out.len() + 2;
        let date = NaiveDate::parse_from_str(&raw.date, "%Y-%m-%d")
            .map_err(|e| Error::Parse { line, message: format!("bad date {}: {e}", raw.date) })?;
        let point = PricePoint::new(raw.q, raw.p_x, raw.p_y)
            .map_err(|e| Error::Parse { line, message: e.to_string() })?;
        if let Some(prev) = out.last() {
            if date <= prev.date {
                return Err(Error::Parse { line, message: format!("date {date} does not follow {}", prev.date) });
            }
        }
        out.push(PriceRow { date, point });
    }
    Ok(out)
}

/// One daily game window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayContext {
    pub index: usize,
    pub date: NaiveDate,
    pub start: i64,
    pub end: i64,
    pub start_price: PricePoint,
    pub end_price: PricePoint,
}

fn midnight(date: NaiveDate) -> i64 {
    date.and_time(NaiveTime::MIN).and_utc().timestamp()
}

/// Consecutive pairs of price rows as day windows.
pub fn day_contexts(prices: &[PriceRow]) -> Vec<DayContext> {
    prices
        .windows(2)
        .enumerate()
        .map(|(index, w)| DayContext {
            index,
            date: w[0].date,
            start: midnight(w[0].date),
            end: midnight(w[1].date),
            start_price: w[0].point,
            end_price: w[1].point,
        })
        .collect()
}

/// Log of `p̄_X / p_X`; the matching error for Y is its negative.
pub fn price_shift_error(p: &PricePoint) -> f64 {
    let (px, _) = shift_prices(p.p_x, p.p_y, p.q);
    px.ln() - p.p_x.ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositionRecord {
    pub owner: String,
    pub position: Position,
    pub is_nft: bool,
    pub minted_at: i64,
}

/// Open positions after replaying a prefix of the log.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PoolState {
    pub positions: BTreeMap<String, PositionRecord>,
}

impl PoolState {
    /// Replays every event strictly before `t`.
    pub fn at(log: &EventLog, t: i64) -> Result<Self> {
        let mut state = Self::default();
        for e in log.between(i64::MIN, t) {
            state.apply(e)?;
        }
        Ok(state)
    }

    pub fn apply(&mut self, e: &Event) -> Result<()> {
        match &e.body {
            EventBody::Swap { .. } => {}
            EventBody::Mint { position_id, is_nft, position } => match self.positions.get_mut(position_id) {
                Some(rec) => {
                    same_range(e.line, &rec.position, position)?;
                    rec.position.liquidity += position.liquidity;
                }
                None => {
                    self.positions.insert(
                        position_id.clone(),
                        PositionRecord {
                            owner: e.sender.clone(),
                            position: *position,
                            is_nft: *is_nft,
                            minted_at: e.timestamp,
                        },
                    );
                }
            },
            EventBody::Burn { position_id, position } => {
                let rec = self.positions.get_mut(position_id).ok_or_else(|| {
                    Error::Inconsistent(format!("line {}: burn of unknown position {position_id}", e.line))
                })?;
                same_range(e.line, &rec.position, position)?;
                let left = rec.position.liquidity - position.liquidity;
                if left < -1e-9 * rec.position.liquidity.max(1.0) {
                    return Err(Error::Inconsistent(format!(
                        "line {}: burn of {} exceeds liquidity {} of {position_id}",
                        e.line, position.liquidity, rec.position.liquidity
                    )));
                }
                if left <= 1e-12 * rec.position.liquidity.max(1.0) {
                    self.positions.remove(position_id);
                } else {
                    rec.position.liquidity = left;
                }
            }
        }
        Ok(())
    }
}

fn same_range(line: usize, a: &Position, b: &Position) -> Result<()> {
    if a.lower != b.lower || a.upper != b.upper {
        return Err(Error::Inconsistent(format!(
            "line {line}: position range ({}, {}) does not match ({}, {})",
            b.lower, b.upper, a.lower, a.upper
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedPlayer {
    pub id: String,
    pub positions: Vec<Position>,
    /// Dollar value at the day-start shifted prices.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlayerSelection {
    pub players: Vec<SelectedPlayer>,
    /// Positions open at the day start that belong to non-players.
    pub excluded: Vec<Position>,
    /// Retained player value over the value of every open position.
    pub retained_fraction: f64,
    pub warnings: Vec<String>,
}

impl PlayerSelection {
    pub fn player_positions(&self) -> Vec<Position> {
        self.players.iter().flat_map(|p| p.positions.iter().copied()).collect()
    }
}

/// Selects the day's players: owners of NFT positions open for the whole
/// day, ranked by value, cut to the top 30 and then to the shortest prefix
/// holding 99% of the top-30 value.
pub fn select_players(log: &EventLog, day: &DayContext) -> Result<PlayerSelection> {
    let state = PoolState::at(log, day.start)?;
    let touched: BTreeSet<&str> = log
        .between(day.start, day.end)
        .iter()
        .filter_map(|e| match &e.body {
            EventBody::Mint { position_id, .. } | EventBody::Burn { position_id, .. } => Some(position_id.as_str()),
            EventBody::Swap { .. } => None,
        })
        .collect();
    let p0 = day.start_price.shifted();
    let mut by_owner: BTreeMap<&str, (Vec<Position>, f64)> = BTreeMap::new();
    let mut excluded = Vec::new();
    let mut total_value = 0.0;
    for (id, rec) in &state.positions {
        let value = rec.position.value(p0.q, p0.p_y);
        total_value += value;
        if rec.is_nft && !touched.contains(id.as_str()) && rec.position.liquidity > 0.0 {
            let slot = by_owner.entry(rec.owner.as_str()).or_default();
            slot.0.push(rec.position);
            slot.1 += value;
        } else {
            excluded.push(rec.position);
        }
    }
    let mut ranked: Vec<SelectedPlayer> = by_owner
        .into_iter()
        .map(|(id, (positions, value))| SelectedPlayer { id: id.to_string(), positions, value })
        .collect();
    ranked.sort_by(|a, b| b.value.total_cmp(&a.value).then_with(|| a.id.cmp(&b.id)));

    let mut keep = ranked.len().min(MAX_PLAYERS);
    let top: f64 = ranked[..keep].iter().map(|p| p.value).sum();
    let mut cum = 0.0;
    for (i, p) in ranked[..keep].iter().enumerate() {
        cum += p.value;
        if cum >= PREFIX_SHARE * top {
            keep = i + 1;
            break;
        }
    }
    for p in ranked.drain(keep..) {
        excluded.extend(p.positions);
    }
    let retained: f64 = ranked.iter().map(|p| p.value).sum();
    let mut warnings = Vec::new();
    if ranked.is_empty() {
        warnings.push(format!("{}: no qualifying player positions", day.date));
    }
    Ok(PlayerSelection {
        players: ranked,
        excluded,
        retained_fraction: if total_value > 0.0 { retained / total_value } else { 0.0 },
        warnings,
    })
}

/// Grid from the union of position endpoints, with both position sets
/// re-bucketed onto it.
#[derive(Debug, Clone, PartialEq)]
pub struct GridBuild {
    pub grid: TickGrid,
    pub player: LiquidityHistogram,
    pub nonplayer: LiquidityHistogram,
}

pub fn build_tick_grid(player: &[Position], nonplayer: &[Position]) -> Result<GridBuild> {
    let grid = grid_from_endpoints(player.iter().chain(nonplayer), &[])?;
    Ok(GridBuild {
        player: LiquidityHistogram::from_positions(grid.clone(), player)?,
        nonplayer: LiquidityHistogram::from_positions(grid.clone(), nonplayer)?,
        grid,
    })
}

fn grid_from_endpoints<'a>(positions: impl Iterator<Item = &'a Position>, extra: &[f64]) -> Result<TickGrid> {
    let mut ticks: Vec<f64> = positions.flat_map(|p| [p.lower, p.upper]).chain(extra.iter().copied()).collect();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup();
    TickGrid::new(ticks)
}

/// Splits `position` at every grid tick strictly inside it.
pub fn split_position(grid: &TickGrid, position: &Position) -> Result<Vec<Position>> {
    let (i, j) = range_indices(grid, position.lower, position.upper)?;
    let t = grid.ticks();
    Ok((i..j).map(|m| Position { liquidity: position.liquidity, lower: t[m], upper: t[m + 1] }).collect())
}

fn range_indices(grid: &TickGrid, lower: f64, upper: f64) -> Result<(usize, usize)> {
    match (grid.index_of(lower), grid.index_of(upper)) {
        (Some(i), Some(j)) if i < j => Ok((i, j)),
        _ => Err(Error::InvalidGrid(format!("range ({lower}, {upper}) does not align with the grid"))),
    }
}

/// Re-expresses an atomic row of `from` on the finer grid `to`.
pub fn refine_row(from: &TickGrid, row: &[f64], to: &TickGrid) -> Result<Vec<f64>> {
    let mut out = vec![0.0; to.num_ranges()];
    for (m, &k) in row.iter().enumerate() {
        let (a, b) = from.atomic_range(m);
        let (i, j) = range_indices(to, a, b)?;
        for slot in &mut out[i..j] {
            *slot += k;
        }
    }
    Ok(out)
}

/// Per-range fees of a set of trades, in dollars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeeAttribution {
    pub fees: Vec<f64>,
    pub player_fees: Vec<f64>,
    /// Fees in Y tokens (Y-input segments).
    pub fees_y: Vec<f64>,
    /// Fees in X tokens (X-input segments).
    pub fees_x: Vec<f64>,
    /// Ranges a trade crossed while no liquidity covered them.
    pub uncovered: Vec<bool>,
}

/// Accumulates fees trade by trade against the liquidity live at each trade.
#[derive(Debug, Clone)]
pub struct FeeLedger {
    grid: TickGrid,
    gamma: f64,
    fees_y: Vec<f64>,
    fees_x: Vec<f64>,
    player_y: Vec<f64>,
    player_x: Vec<f64>,
    uncovered: Vec<bool>,
    trades: usize,
}

impl FeeLedger {
    pub fn new(grid: TickGrid, gamma: f64) -> Self {
        let m = grid.num_ranges();
        Self {
            grid,
            gamma,
            fees_y: vec![0.0; m],
            fees_x: vec![0.0; m],
            player_y: vec![0.0; m],
            player_x: vec![0.0; m],
            uncovered: vec![false; m],
            trades: 0,
        }
    }

    /// Splits the trade `q -> q_new` at interior ticks and charges each
    /// segment `γ` times its input against total liquidity `total`.
    pub fn record(&mut self, q: f64, q_new: f64, total: &[f64], player: &[f64]) -> Result<()> {
        let index = self.trades;
        self.trades += 1;
        let (lo, hi) = (self.grid.lowest(), self.grid.highest());
        if q.min(q_new) < lo || q.max(q_new) > hi {
            return Err(Error::TradeOutsideGrid { index, from: q, to: q_new, lo, hi });
        }
        if q == q_new {
            return Ok(());
        }
        let (from, to) = (q.min(q_new), q.max(q_new));
        let buys_x = q_new > q;
        for m in 0..self.grid.num_ranges() {
            let (a, b) = self.grid.atomic_range(m);
            let seg_lo = from.max(a);
            let seg_hi = to.min(b);
            if seg_hi <= seg_lo {
                continue;
            }
            let j = total[m];
            if j <= 0.0 {
                self.uncovered[m] = true;
                continue;
            }
            let share = player[m] / j;
            if buys_x {
                let fee = self.gamma * j * (seg_hi.sqrt() - seg_lo.sqrt());
                self.fees_y[m] += fee;
                self.player_y[m] += fee * share;
            } else {
                let fee = self.gamma * j * (1.0 / seg_lo.sqrt() - 1.0 / seg_hi.sqrt());
                self.fees_x[m] += fee;
                self.player_x[m] += fee * share;
            }
        }
        Ok(())
    }

    /// Converts token fees to dollars at the shifted prices of `day_end`.
    pub fn finish(self, day_end: &PricePoint) -> FeeAttribution {
        let p = day_end.shifted();
        let usd = |y: &[f64], x: &[f64]| -> Vec<f64> { y.iter().zip(x).map(|(y, x)| y * p.p_y + x * p.p_x).collect() };
        FeeAttribution {
            fees: usd(&self.fees_y, &self.fees_x),
            player_fees: usd(&self.player_y, &self.player_x),
            fees_y: self.fees_y,
            fees_x: self.fees_x,
            uncovered: self.uncovered,
        }
    }
}

/// Fees of `trades` with static liquidity `player_k + nonplayer_k` per range.
pub fn attribute_fees(
    trades: &[(f64, f64)],
    grid: &TickGrid,
    player_k: &[f64],
    nonplayer_k: &[f64],
    gamma: f64,
    day_end: &PricePoint,
) -> Result<FeeAttribution> {
    let total: Vec<f64> = player_k.iter().zip(nonplayer_k).map(|(a, b)| a + b).collect();
    let mut ledger = FeeLedger::new(grid.clone(), gamma);
    for &(q, q_new) in trades {
        ledger.record(q, q_new, &total, player_k)?;
    }
    Ok(ledger.finish(day_end))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChiEstimate {
    Value(f64),
    /// Fees were paid but none reached players, so the weight cannot be inferred.
    Uncovered,
}

/// Non-player weight `κ (f - f^P) / f^P` implied by the players' fee share.
pub fn estimate_chi(kappa: f64, fee: f64, player_fee: f64) -> Result<ChiEstimate> {
    if player_fee > fee * (1.0 + 1e-12) + 1e-300 || player_fee < 0.0 {
        return Err(Error::Inconsistent(format!("player fees {player_fee} exceed total fees {fee}")));
    }
    if fee == 0.0 {
        return Ok(ChiEstimate::Value(0.0));
    }
    if player_fee == 0.0 {
        return Ok(ChiEstimate::Uncovered);
    }
    Ok(ChiEstimate::Value((kappa * (fee - player_fee) / player_fee).max(0.0)))
}

/// Everything needed to build games for a pool.
#[derive(Debug, Clone)]
pub struct PoolData {
    pub header: PoolHeader,
    pub log: EventLog,
    pub prices: Vec<PriceRow>,
}

impl PoolData {
    /// Reads `pool.json`, `prices.csv` and `events.csv` or `events.jsonl` from `dir`.
    pub fn load(dir: &Path) -> Result<Self> {
        let header: PoolHeader = serde_json::from_str(&fs::read_to_string(dir.join("pool.json"))?)?;
        let events = ["events.csv", "events.jsonl"]
            .iter()
            .map(|f| dir.join(f))
            .find(|p| p.exists())
            .ok_or_else(|| Error::Io(std::io::Error::new(std::io::ErrorKind::NotFound, "no events.csv or events.jsonl")))?;
        Self::from_parts(header, &fs::read_to_string(events)?, &fs::read_to_string(dir.join("prices.csv"))?)
    }

    pub fn from_parts(header: PoolHeader, events: &str, prices: &str) -> Result<Self> {
        if !(header.gamma >= 0.0 && header.gamma < 1.0) {
            return Err(Error::InvalidGame(vec![format!("fee rate out of [0,1): {}", header.gamma)]));
        }
        Ok(Self { header, log: parse_events(events)?, prices: parse_prices(prices)? })
    }

    pub fn days(&self) -> Vec<DayContext> {
        day_contexts(&self.prices)
    }
}

/// Knobs of daily game construction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GameOptions {
    /// Fee-share exponent; the pipeline's games use 1 unless overridden.
    pub alpha: Option<f64>,
    /// Ticks added to the grid on top of the position endpoints.
    pub extra_ticks: Vec<f64>,
}

/// A day's game together with the players' actual behaviour.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyGame {
    pub day: DayContext,
    pub spec: GameSpec,
    /// Players' actual liquidity.
    pub gt: AtomicProfile,
    pub player_liquidity: Vec<f64>,
    pub attribution: FeeAttribution,
    /// Ranges whose weight was imputed because players earned none of their fees.
    pub imputed: Vec<bool>,
    pub retained_fraction: f64,
    pub warnings: Vec<String>,
}

/// Builds the day's game. Returns `Ok(None)` (with the selection's warning)
/// when no position qualifies as a player.
pub fn build_daily_game(
    pool: &PoolData,
    day: &DayContext,
    opts: &GameOptions,
) -> Result<std::result::Result<DailyGame, Vec<String>>> {
    let log = &pool.log;
    let selection = select_players(log, day)?;
    if selection.players.is_empty() {
        return Ok(Err(selection.warnings));
    }
    let mut warnings = selection.warnings.clone();
    let day_events = log.between(day.start, day.end);

    let start_state = PoolState::at(log, day.start)?;
    let mut alive: Vec<Position> = start_state.positions.values().map(|r| r.position).collect();
    alive.extend(day_events.iter().filter_map(|e| match &e.body {
        EventBody::Mint { position, .. } => Some(*position),
        _ => None,
    }));
    let grid = grid_from_endpoints(alive.iter(), &opts.extra_ticks)?;

    let p0 = day.start_price.shifted();
    let mut gt_rows = Vec::with_capacity(selection.players.len());
    for p in &selection.players {
        let mut row = vec![0.0; grid.num_ranges()];
        for pos in &p.positions {
            let (i, j) = range_indices(&grid, pos.lower, pos.upper)?;
            for slot in &mut row[i..j] {
                *slot += pos.liquidity;
            }
        }
        gt_rows.push(row);
    }
    let kappa: Vec<f64> = (0..grid.num_ranges()).map(|m| gt_rows.iter().map(|r| r[m]).sum()).collect();

    let mut state = start_state;
    let mut total = live_liquidity(&grid, &state)?;
    let mut ledger = FeeLedger::new(grid.clone(), pool.header.gamma);
    for e in day_events {
        match &e.body {
            EventBody::Swap { q_before, q_after } => ledger.record(*q_before, *q_after, &total, &kappa)?,
            _ => {
                state.apply(e)?;
                total = live_liquidity(&grid, &state)?;
            }
        }
    }
    let attribution = ledger.finish(&day.end_price);

    let m = grid.num_ranges();
    let mut chis = vec![0.0; m];
    let mut imputed = vec![false; m];
    for r in 0..m {
        match estimate_chi(kappa[r], attribution.fees[r], attribution.player_fees[r])? {
            ChiEstimate::Value(v) => chis[r] = v,
            ChiEstimate::Uncovered => imputed[r] = true,
        }
    }
    if imputed.iter().any(|&u| u) {
        let covered: Vec<f64> = (0..m).filter(|&r| !imputed[r] && attribution.fees[r] > 0.0).map(|r| chis[r]).collect();
        let fill = if covered.is_empty() { 0.0 } else { covered.iter().sum::<f64>() / covered.len() as f64 };
        for r in (0..m).filter(|&r| imputed[r]) {
            chis[r] = fill;
        }
        warnings.push(format!(
            "{}: {} uncovered range(s), non-player weight imputed as {fill}",
            day.date,
            imputed.iter().filter(|&&u| u).count()
        ));
    }

    let taus = (0..m)
        .map(|r| {
            let (a, b) = grid.atomic_range(r);
            empirical_il_rate(a, b, &day.start_price, &day.end_price)
        })
        .collect::<Result<Vec<_>>>()?;

    let eps = grid.liquidity_prices(p0.q, p0.p_y);
    let budgets: Vec<f64> = gt_rows.iter().map(|row| row.iter().zip(&eps).map(|(k, e)| k * e).sum()).collect();
    let ids = selection.players.iter().map(|p| p.id.clone()).collect();
    let spec = GameSpec::new(
        grid,
        opts.alpha.unwrap_or(1.0),
        p0.q,
        p0.p_y,
        attribution.fees.clone(),
        taus,
        chis,
        budgets,
        ids,
    )?;
    debug_assert!(gt_rows.iter().enumerate().all(|(n, r)| budget_used(&spec, r) == spec.budgets()[n]));
    Ok(Ok(DailyGame {
        day: *day,
        spec,
        gt: AtomicProfile { k: gt_rows },
        player_liquidity: kappa,
        attribution,
        imputed,
        retained_fraction: selection.retained_fraction,
        warnings,
    }))
}

fn live_liquidity(grid: &TickGrid, state: &PoolState) -> Result<Vec<f64>> {
    let mut out = vec![0.0; grid.num_ranges()];
    for rec in state.positions.values() {
        let (i, j) = range_indices(grid, rec.position.lower, rec.position.upper)?;
        for slot in &mut out[i..j] {
            *slot += rec.position.liquidity;
        }
    }
    Ok(out)
}

/// Today's players facing yesterday's pool: same grid, fees and non-player
/// weights as `prev`, impermanent loss expected under a log-uniform price
/// move of factor `r` around today's opening price.
pub fn build_reactive_game(prev: Option<&DailyGame>, today: &DailyGame, r: f64) -> Result<GameSpec> {
    let prev = prev.ok_or_else(|| Error::MissingHistory(format!("{}: no previous day", today.day.date)))?;
    let q0 = today.spec.q0();
    let p_y0 = today.spec.p_y0();
    let dist = PriceDistribution::LogUniform { r };
    let grid = prev.spec.grid().clone();
    let taus = (0..grid.num_ranges())
        .map(|m| {
            let (a, b) = grid.atomic_range(m);
            expected_il_rate(a, b, q0, &dist, p_y0)
        })
        .collect::<Result<Vec<_>>>()?;
    GameSpec::new(
        grid,
        prev.spec.alpha(),
        q0,
        p_y0,
        prev.spec.fees().to_vec(),
        taus,
        prev.spec.chis().to_vec(),
        today.spec.budgets().to_vec(),
        today.spec.player_ids().to_vec(),
    )
}

/// Grid of the inert game: the extreme ticks of `history` widened by `e`.
pub fn inert_grid(history: &[DailyGame], e: f64) -> Result<TickGrid> {
    if !(e >= 1.0 && e.is_finite()) {
        return Err(Error::InvalidGame(vec![format!("expansion factor must be at least 1: {e}")]));
    }
    if history.is_empty() {
        return Err(Error::MissingHistory("inert game needs at least one prior day".into()));
    }
    let lo = history.iter().map(|d| d.spec.grid().lowest()).fold(f64::INFINITY, f64::min);
    let hi = history.iter().map(|d| d.spec.grid().highest()).fold(0.0, f64::max);
    TickGrid::new(vec![lo / e, e * hi])
}

/// Single-range game built from up to a week of history: average daily fees,
/// average non-player investment, and the average daily price move.
pub fn build_inert_game(history: &[DailyGame], today: &DailyGame, e: f64) -> Result<GameSpec> {
    let grid = inert_grid(history, e)?;
    let days = history.len() as f64;
    let q0 = today.spec.q0();
    let p_y0 = today.spec.p_y0();
    let (a, b) = grid.atomic_range(0);
    let fee = history.iter().map(|d| d.spec.fees().iter().sum::<f64>()).sum::<f64>() / days;
    let invested = history
        .iter()
        .map(|d| d.spec.chis().iter().zip(d.spec.eps()).map(|(c, e)| c * e).sum::<f64>())
        .sum::<f64>()
        / days;
    let chi = invested / liquidity_price(a, b, q0, p_y0);
    let r = history
        .iter()
        .map(|d| {
            let ratio = d.day.end_price.q / d.day.start_price.q;
            ratio.max(1.0 / ratio)
        })
        .sum::<f64>()
        / days;
    let dist = if r > 1.0 { PriceDistribution::LogUniform { r } } else { PriceDistribution::point(q0) };
    let tau = expected_il_rate(a, b, q0, &dist, p_y0)?;
    GameSpec::new(
        grid,
        today.spec.alpha(),
        q0,
        p_y0,
        vec![fee],
        vec![tau],
        vec![chi],
        today.spec.budgets().to_vec(),
        today.spec.player_ids().to_vec(),
    )
}

/// Builds every day's game, skipping days without players.
pub fn build_all_days(pool: &PoolData, opts: &GameOptions) -> Result<(Vec<DailyGame>, Vec<String>)> {
    let mut games = Vec::new();
    let mut warnings = Vec::new();
    for day in pool.days() {
        match build_daily_game(pool, &day, opts)? {
            Ok(g) => {
                warnings.extend(g.warnings.iter().cloned());
                games.push(g);
            }
            Err(w) => warnings.extend(w),
        }
    }
    Ok((games, warnings))
}
