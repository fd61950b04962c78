use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("stage {stage}: cut count m = {m} is below 2")]
    CutTooSmall { stage: usize, m: i64 },
    #[error("stage {stage}: spacer {column} is negative")]
    NegativeSpacer { stage: usize, column: usize },
    #[error("stage {stage}: expected {expected} spacers, found {found}")]
    SpacerShape {
        stage: usize,
        expected: usize,
        found: usize,
    },
    #[error("construction has no stages and no generator")]
    EmptyConstruction,
    #[error("stage {stage} is not available (have {available})")]
    StageOutOfRange { stage: usize, available: usize },
    #[error("{requested} stages requested, stage cap is {cap}")]
    StageCapExceeded { requested: usize, cap: usize },
    #[error("128-bit overflow at stage {stage}")]
    Overflow { stage: usize },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("bad preset parameters: {0}")]
    BadParams(String),
    #[error("{count} exponent combinations exceed the cap {cap}")]
    CombinatorialCap { count: u128, cap: u128 },
    #[error("grid size {n} must be even and at least 2")]
    InvalidGrid { n: usize },
    #[error("densities live on different grids")]
    GridMismatch,
    #[error("lag {lag} is out of range (|lag| < {limit})")]
    LagOutOfRange { lag: i128, limit: u128 },
    #[error("degree {degree} exceeds the root-finding cap {cap}")]
    DegreeTooLarge { degree: u128, cap: usize },
    #[error("eigenvalue iteration did not converge (degree {degree})")]
    RootFindingDiverged { degree: usize },
    #[error("Toeplitz recursion broke down at order {order}")]
    ToeplitzSingular { order: usize },
    #[error("log of a zero sample at grid index {index}")]
    LogDiverged { index: usize },
    #[error("outer-function series not converged at order {order} (tail ratio {tail_ratio:e})")]
    NotConverged { order: usize, tail_ratio: f64 },
    #[error("witness function vanishes at grid index {index} where tau has mass")]
    WitnessUndefined { index: usize },
    #[error("need at least 2 terms, got {n}")]
    TooFewTerms { n: usize },
    #[error("construction does not have finite total measure")]
    InfiniteMeasure,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;
