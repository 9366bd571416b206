//! Crate-wide error type.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A basis table is empty, negative, or decreasing.
    InvalidBasis { index: usize, reason: String },
    /// Coefficient matrix has wrong dimensions or negative entries.
    InvalidCoefficients { reason: String },
    /// A bundle references a resource outside the game.
    InvalidBundle { agent: usize, resource: usize },
    /// An agent has no admissible bundles.
    EmptyActionSet { agent: usize },
    /// More agents than the basis tables support.
    TooManyAgents { agents: usize, basis_max: usize },
    /// Allocation index out of range for an agent's action set.
    InvalidAllocation { agent: usize, choice: usize, available: usize },
    /// Agent index out of range.
    AgentOutOfRange { agent: usize, agents: usize },
    /// Resource index out of range.
    ResourceOutOfRange { resource: usize, resources: usize },
    /// Load exceeds the basis domain.
    LoadOutOfRange { load: usize, max: usize },
    /// Joint-action space exceeds the enumeration cap and the game is not
    /// symmetric, so exhaustive analysis is impossible.
    InstanceTooLarge { joint_actions: f64, cap: usize },
    /// A design or robustness LP failed to reach an optimum.
    DesignLp { stage: &'static str, status: String },
    /// The LP solver broke down numerically.
    Solver(simplex::SolverError),
    /// Worst-case construction received malformed LP data.
    InvalidLpSolution { reason: String },
    /// Game file parsing or validation failure; `field` names the offender.
    GameFile { field: String, message: String },
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidBasis { index, reason } => {
                write!(f, "basis function {index}: {reason}")
            }
            Self::InvalidCoefficients { reason } => write!(f, "coefficients: {reason}"),
            Self::InvalidBundle { agent, resource } => {
                write!(f, "agent {agent} bundle references unknown resource {resource}")
            }
            Self::EmptyActionSet { agent } => write!(f, "agent {agent} has no bundles"),
            Self::TooManyAgents { agents, basis_max } => {
                write!(f, "{agents} agents exceed basis domain [1, {basis_max}]")
            }
            Self::InvalidAllocation { agent, choice, available } => write!(
                f,
                "agent {agent} chose bundle {choice} but has only {available}"
            ),
            Self::AgentOutOfRange { agent, agents } => {
                write!(f, "agent {agent} out of range (game has {agents})")
            }
            Self::ResourceOutOfRange { resource, resources } => {
                write!(f, "resource {resource} out of range (game has {resources})")
            }
            Self::LoadOutOfRange { load, max } => {
                write!(f, "load {load} outside basis domain [0, {max}]")
            }
            Self::InstanceTooLarge { joint_actions, cap } => write!(
                f,
                "instance too large to certify exhaustively: {joint_actions:.3e} joint actions \
                 exceed cap {cap} and the game is not symmetric"
            ),
            Self::DesignLp { stage, status } => {
                write!(f, "toll design LP ({stage}) did not solve: {status}")
            }
            Self::Solver(e) => write!(f, "LP solver: {e}"),
            Self::InvalidLpSolution { reason } => {
                write!(f, "worst-case construction rejected LP data: {reason}")
            }
            Self::GameFile { field, message } => write!(f, "game file: {field}: {message}"),
            Self::Io(msg) => write!(f, "io: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<simplex::SolverError> for Error {
    fn from(e: simplex::SolverError) -> Self {
        Error::Solver(e)
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
