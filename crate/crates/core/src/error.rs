use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("edge ({u}, {v}) references a node outside 0..{num_nodes}")]
    EdgeOutOfRange { u: usize, v: usize, num_nodes: usize },
    #[error("node {node} is outside 0..{num_nodes}")]
    NodeOutOfRange { node: usize, num_nodes: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("shape mismatch in {op}: expected {expected:?}, found {found:?}")]
    Shape {
        op: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("non-finite value produced in {0}")]
    NonFinite(&'static str),
    #[error("node {0} has no non-neighbors to sample from")]
    NoNonNeighbors(usize),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
