use thiserror::Error;

/// Errors raised by the library. Mode and player numbers in messages are
/// 1-based; the fields themselves are 0-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid shape {dims:?}: {reason}")]
    InvalidShape { dims: Vec<usize>, reason: String },

    #[error("data length {actual} does not match shape size {expected}")]
    DataLength { expected: usize, actual: usize },

    #[error("non-finite entry at flat index {0}")]
    NonFinite(usize),

    #[error("mode {} out of range for an order-{order} tensor", .mode + 1)]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("{what}: expected length {expected}, got {actual}")]
    LengthMismatch {
        what: String,
        expected: usize,
        actual: usize,
    },

    #[error("tensor of shape {0:?} is not cubical")]
    NotCubical(Vec<usize>),

    #[error("player {} out of range for a {players}-player game", .player + 1)]
    PlayerOutOfRange { player: usize, players: usize },

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid mixed strategy for player {}: {reason}", .player + 1)]
    InvalidProfile { player: usize, reason: String },

    #[error("big tensor needs {required} entries, budget allows {allowed}")]
    BudgetExceeded { required: u128, allowed: u128 },

    #[error("equilibrium value of player {} is not positive ({value})", .player + 1)]
    NonpositiveValue { player: usize, value: f64 },

    #[error("block {} of y sums to {sum:e}; not a complementarity solution", .player + 1)]
    ZeroBlock { player: usize, sum: f64 },

    #[error("entry {index} of block {} is {value:e}, below the clipping tolerance", .player + 1)]
    NegativeEntry {
        player: usize,
        index: usize,
        value: f64,
    },

    #[error("smoothing parameter must be positive, got {0:e}")]
    NonpositiveMu(f64),

    #[error("Newton system is singular (pivot {pivot:e} in column {column})")]
    Singular { pivot: f64, column: usize },

    #[error("line search failed after {0} backtracking steps")]
    LineSearch(usize),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(what: impl Into<String>, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            what: what.into(),
            expected,
            actual,
        })
    }
}
