use crate::qcore::QubitLabel;

/// Error type shared by every module in this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("duplicate qubit label {0}")]
    DuplicateLabel(QubitLabel),
    #[error("label {0} is not part of this state")]
    UnknownLabel(QubitLabel),
    #[error("states are defined on different label lists")]
    LabelMismatch,
    #[error("reduction onto an empty label set is not defined; take the trace instead")]
    EmptyKeep,
    #[error("expected a state on {expected} qubit(s), got {got}")]
    WrongQubitCount { expected: usize, got: usize },
    #[error("not a valid state: {0}")]
    InvalidState(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("{0} requires a finite environment register")]
    RequiresFinite(&'static str),
    #[error("{0} is defined only when one collision fully dephases, i.e. cos(theta) = -1")]
    RequiresFullDephasing(&'static str),
    #[error("a dense state on {qubits} qubits exceeds the supported maximum of {max}")]
    Capacity { qubits: usize, max: usize },
    #[error("invalid time grid: {0}")]
    Grid(String),
    #[error("integration failure: {0}")]
    Integration(String),
    #[error("operation requires a pure total state")]
    MixedState,
    #[error("time grid too coarse: {0}")]
    Resolution(String),
    #[error("plateau detection is undefined: system entropy is numerically zero")]
    UndefinedPlateau,
}

pub type Result<T> = std::result::Result<T, Error>;
