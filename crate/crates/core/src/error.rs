use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("W^({layer}) is not skew-symmetric at ({row}, {col}): |w_ij + w_ji| = {deviation:e}")]
    NotSkewSymmetric {
        layer: usize,
        row: usize,
        col: usize,
        deviation: f64,
    },
    #[error("frame and first brackets span rank {rank} < n = {n}")]
    BracketGenerationFails { rank: usize, n: usize },
    #[error("bad dimensions: {0}")]
    BadDimensions(&'static str),
    #[error("frame index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("too few samples: got {got}, need at least {need}")]
    TooFewSamples { got: usize, need: usize },
    #[error("grid mismatch: {0}")]
    GridMismatch(&'static str),
    #[error("non-finite or exploding field value {value:e} at node {node}")]
    NonFiniteField { node: usize, value: f64 },
    #[error("time step {dt:e} exceeds CFL bound {limit:e}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("epsilon schedule needs at least {need} strictly decreasing levels in (0, 1)")]
    ScheduleTooShort { need: usize },
    #[error("negative argument {0}")]
    NegativeArgument(f64),
    #[error("empty sample set")]
    EmptySampleSet,
    #[error("time {t} outside [0, {t_final}]")]
    TimeOutOfRange { t: f64, t_final: f64 },
    #[error("degenerate fit: {usable} usable nodes (need {need})")]
    DegenerateFit { usable: usize, need: usize },
    #[error("bad parameters: {0}")]
    BadParams(&'static str),
    #[error("degenerate pair: d_beta = 0")]
    DegeneratePair,
    #[error("point outside the grid")]
    OutOfGrid,
}
