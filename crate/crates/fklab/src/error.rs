use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty box: radius {0} on axis {1} admits no lattice vertex")]
    EmptyBox(f64, usize),

    #[error("invalid box corners: lo {0:?} must be strictly below hi {1:?} on both axes")]
    InvalidCorners((i64, i64), (i64, i64)),

    #[error("invalid face index {0}: expected one of -2, -1, 1, 2")]
    InvalidAxis(i8),

    #[error("vertices {0:?} and {1:?} are not nearest neighbours")]
    NotAdjacent((i64, i64), (i64, i64)),

    #[error("edge {0:?}-{1:?} is not in the box edge set")]
    EdgeOutsideBox((i64, i64), (i64, i64)),

    #[error("diameter of an empty vertex set is undefined")]
    EmptySet,

    #[error("configuration has {got} bits but the edge set has {expected}")]
    SupportMismatch { got: usize, expected: usize },

    #[error("invalid parameters: {0}")]
    InvalidParameter(String),

    #[error("invalid boundary partition: {0}")]
    InvalidPartition(String),

    #[error("enumeration refused: {edges} active edges exceeds the cap of {cap}")]
    EnumerationCap { edges: usize, cap: usize },

    #[error("duality needs both box sides >= 2, got {0}x{1}")]
    DegenerateDual(i64, i64),

    #[error("box U is not contained in box V")]
    NotContained,

    #[error("contradictory forcing: edge {0} is forced both open and closed")]
    ContradictoryForcing(u32),

    #[error("zero replicas requested")]
    ZeroReplicas,

    #[error("box sides {0}x{1} are not N-large for N={2} (need both >= 3N)")]
    NotNLarge(i64, i64, i64),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}
