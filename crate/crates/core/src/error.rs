use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (wrong dimensions, unknown ids, bad parameters).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Integration produced a non-finite state.
    #[error("simulation diverged at physics substep {substep}")]
    Diverged { substep: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
