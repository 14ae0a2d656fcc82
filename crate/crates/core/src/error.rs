use thiserror::Error;

use crate::moment::MomentIndex;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid truncation order {0}: must be at least 2")]
    InvalidTruncation(u32),

    #[error("invalid degree-of-freedom count {0}: must be at least 1")]
    InvalidDofCount(usize),

    #[error("moment index {index} does not match a model with {dofs} degrees of freedom")]
    DofMismatch { index: MomentIndex, dofs: usize },

    #[error("incomplete state: {0}")]
    IncompleteState(String),

    #[error("invalid bracket order n = {0}: must be odd and at least 1")]
    InvalidOrder(u32),

    #[error("invalid coefficient configuration: {0}")]
    InvalidConfiguration(String),

    #[error("malformed coefficient configuration: {0}")]
    MalformedConfiguration(String),

    #[error("oracle capacity exceeded: order {order} above cap {cap}")]
    OracleCapacity { order: u32, cap: u32 },

    #[error("oracle produced an imaginary contribution: {0}")]
    OracleImaginary(String),

    #[error("unsupported hamiltonian: {0}")]
    UnsupportedHamiltonian(String),

    #[error("singular evaluation: r = {r} is below r_min = {r_min}")]
    Singularity { r: f64, r_min: f64 },

    #[error("variable sets differ: {0}")]
    VariableMismatch(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("wrong scenario: {0}")]
    WrongScenario(String),

    #[error("rejected initial state: {0}")]
    RejectedInitialState(String),
}
