use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid price range: lower {lower} must be positive and below upper {upper}")]
    InvalidRange { lower: f64, upper: f64 },

    #[error("invalid tick grid: {0}")]
    InvalidGrid(String),

    #[error("invalid price: {0}")]
    InvalidPrice(String),

    #[error("invalid price distribution: {0}")]
    InvalidDistribution(String),

    #[error("point {x} is outside the bonding curve domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("invalid game: {}", .0.join("; "))]
    InvalidGame(Vec<String>),

    #[error("player {player} has no maximizer on range {range}: the supremum is approached as liquidity tends to zero")]
    NoMaximizer { player: usize, range: usize },

    #[error("closed form requires {0}")]
    ClosedFormUnavailable(&'static str),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("timestamp regression: line {line} has timestamp {timestamp}, not after line {prev_line} ({prev_timestamp})")]
    TimestampRegression {
        line: usize,
        timestamp: i64,
        prev_line: usize,
        prev_timestamp: i64,
    },

    #[error("trade {index} ({from} -> {to}) leaves the tick grid [{lo}, {hi}]")]
    TradeOutsideGrid {
        index: usize,
        from: f64,
        to: f64,
        lo: f64,
        hi: f64,
    },

    #[error("inconsistent data: {0}")]
    Inconsistent(String),

    #[error("missing history: {0}")]
    MissingHistory(String),

    #[error("infeasible action: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
