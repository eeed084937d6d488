use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("shape has more than 2^63 - 1 entries")]
    ShapeOverflow,
    #[error("index has {got} coordinates, shape has order {expected}")]
    WrongOrder { expected: usize, got: usize },
    #[error("{}coordinate {coord} in mode {} is out of range (size {size})", row_prefix(*.row), .mode + 1)]
    CoordinateOutOfRange {
        row: Option<usize>,
        mode: usize,
        coord: usize,
        size: usize,
    },
    #[error("row {row}: observation is not finite")]
    NonFiniteValue { row: usize },
    #[error("no observations")]
    EmptySamples,
    #[error("dense materialization needs {required} entries, limit is {limit}")]
    DenseGuard { required: u64, limit: u64 },
    #[error("norm oracle needs rho <= {limit}, got {rho}")]
    NormOracleGuard { rho: usize, limit: usize },
    #[error("shape mismatch")]
    ShapeMismatch,
    #[error("sign vector entries must be -1 or +1")]
    InvalidSign,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("exact separation hit its node budget after {nodes} nodes without a conclusion")]
    OracleInconclusive { nodes: u64 },
}

fn row_prefix(row: Option<usize>) -> String {
    match row {
        Some(r) => alloc::format!("row {r}: "),
        None => String::new(),
    }
}
