use thiserror::Error;

/// Errors raised by the physics layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Hilbert-space dimension {0} (need at least 2 levels)")]
    InvalidDimension(usize),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("shape mismatch: expected {expected}x{expected}, found {rows}x{cols}")]
    ShapeMismatch {
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("matrix is not Hermitian (max |M - M^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("negative decay rate {0}")]
    InvalidRate(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error(
        "steady state is not unique: second-smallest singular value {second:e} \
         is below tolerance {tolerance:e}"
    )]
    NonUniqueSteadyState { second: f64, tolerance: f64 },

    #[error("invalid evolution time {0} (must be finite and >= 0)")]
    InvalidTime(f64),

    #[error(
        "ambiguous line grouping for term <xi_{row}|b|xi_{col}>: Bohr frequency {bohr:e} rad/s \
         is {distance:e} rad/s from the nearest line centre (tolerance {tolerance:e})"
    )]
    AmbiguousGrouping {
        row: usize,
        col: usize,
        bohr: f64,
        distance: f64,
        tolerance: f64,
    },

    #[error("line decomposition needs a 3-level model, got {0} levels")]
    DecompositionLevels(usize),

    #[error("state is not stationary under the Liouvillian (residual {residual:e})")]
    StaleState { residual: f64 },

    #[error("g2 normalization is degenerate: <F^dagger F> = {flux:e}")]
    DegenerateNormalization { flux: f64 },

    #[error("delay grid error: {0}")]
    Grid(String),

    #[error(
        "g1 trace carries a residual field mean {residual:e}; elastic component not subtracted"
    )]
    ElasticContamination { residual: f64 },

    #[error("wrong correlation kind: expected {expected}")]
    WrongTraceKind { expected: &'static str },

    #[error("filter kernel spans {kernel_span:e} s, wider than half the trace ({half_trace:e} s)")]
    KernelTooWide { kernel_span: f64, half_trace: f64 },

    #[error("filter kernel error: {0}")]
    Kernel(String),

    #[error("negative input power {0}")]
    InvalidPower(f64),

    #[error("calibration is underdetermined: {0}")]
    Underdetermined(String),

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
