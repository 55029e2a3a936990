//! Error type shared across the simulator.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The unit-trace constraint cannot be met inside the coefficient box.
    #[error("infeasible bounds: sum of coefficient bounds {bound_sum} < 1")]
    InfeasibleBounds { bound_sum: f64 },

    /// Two grid amplitudes coincide within 1e-12.
    #[error("degenerate grid: amplitudes {first} and {second} coincide")]
    DegenerateGrid { first: f64, second: f64 },

    /// A synthesized pulse does not fit inside the record window.
    #[error("delay {delay_s} s puts the pulse support outside the record")]
    DelayOutOfRange { delay_s: f64 },

    /// SNR is undefined when the source variance is zero.
    #[error("SNR undefined: source variance is zero")]
    UndefinedSnr,

    /// Coupler inputs live on different sample grids.
    #[error("sample grid mismatch between coupler inputs")]
    GridMismatch,

    /// A decomposition with non-positive mean photon number.
    #[error("degenerate state: mean photon number {m2} is not positive")]
    DegenerateState { m2: f64 },

    /// A signed-weighted mean energy came out non-positive.
    #[error("degenerate denominator {value} at delay index {delay_index}")]
    DegenerateDenominator { value: f64, delay_index: usize },

    /// Accumulators from different sweep configurations cannot merge.
    #[error("config digest mismatch: {left} vs {right}")]
    ConfigMismatch { left: String, right: String },

    /// The active-set solver hit its iteration cap.
    #[error("active-set solver failed to converge")]
    SolverStall,

    /// A precondition on an input value failed.
    #[error("invalid {what}: {why}")]
    Invalid { what: &'static str, why: String },

    /// A text record or CSV could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable tag, used by the CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InfeasibleBounds { .. } => "InfeasibleBounds",
            Error::DegenerateGrid { .. } => "DegenerateGrid",
            Error::DelayOutOfRange { .. } => "DelayOutOfRange",
            Error::UndefinedSnr => "UndefinedSNR",
            Error::GridMismatch => "GridMismatch",
            Error::DegenerateState { .. } => "DegenerateState",
            Error::DegenerateDenominator { .. } => "DegenerateDenominator",
            Error::ConfigMismatch { .. } => "ConfigMismatch",
            Error::SolverStall => "SolverStall",
            Error::Invalid { .. } => "Invalid",
            Error::Parse { .. } => "Parse",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(what: &'static str, why: impl Into<String>) -> Error {
    Error::Invalid { what, why: why.into() }
}
