use thiserror::Error;

use crate::device::StateId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("amplitude {got} V is not valid here (expected {expected} V)")]
    WrongAmplitude { got: f64, expected: f64 },
    #[error("SET pulse of {width_ns} ns is shorter than the required {min_ns} ns")]
    PulseTooShort { width_ns: f64, min_ns: f64 },
    #[error("invalid pulse: width {width_ns} ns must lie in (0, {frame_ns}] ns")]
    InvalidPulse { width_ns: f64, frame_ns: f64 },
    #[error("cell has never been formed (no SET applied yet)")]
    NeverFormed,
    #[error("invalid state {0}")]
    InvalidState(String),
    #[error("{0} is not a resting state")]
    InvalidTarget(StateId),
    #[error("degenerate state table: {0}")]
    DegenerateTable(String),
    #[error("invalid variation profile: {0}")]
    InvalidProfile(String),
    #[error("invalid ADC configuration: {0}")]
    InvalidAdc(String),
    #[error("cell ({row}, {col}) is outside the {rows}x{cols} crossbar")]
    OutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("shared sense path busy: cell ({row}, {col}) is already selected")]
    AlreadySelected { row: usize, col: usize },
    #[error("no active selection for the requested cell")]
    NotSelected,
    #[error("next-state function returned {0}, outside S1..S6")]
    DeltaRange(StateId),
    #[error("write ended in {actual}, expected {expected}")]
    TransitionMismatch { expected: StateId, actual: StateId },
    #[error("input {0} outside [-1, 1]")]
    InvalidInput(f64),
    #[error("no energy ledger entry for {0}")]
    MissingLedgerEntry(String),
    #[error("need {needed} free cells, crossbar has {available}")]
    InsufficientCells { needed: usize, available: usize },
    #[error("state index {index} out of range for {count} states")]
    StateOutOfRange { index: usize, count: usize },
    #[error("empty workload")]
    EmptyWorkload,
    #[error("invalid automaton: {0}")]
    InvalidFsa(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
