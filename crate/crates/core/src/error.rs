use thiserror::Error;

/// Errors raised by the model, the simulator and the scenario parser.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("exhaustive enumeration refused for {nodes} nodes (bound is {max})")]
    EnumerationTooLarge { nodes: usize, max: usize },

    #[error("slot cap of {max_slots} reached after {phases} counted phases")]
    SlotCapExceeded { max_slots: u64, phases: u64 },

    #[error("insufficient run length: node `{node}` delivered no bits")]
    InsufficientRunLength { node: String },

    #[error("protocol invariant violated: {0}")]
    Protocol(String),

    #[error("line {line}: {field}: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    /// Whether the error stems from bad input rather than a failed run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::UnknownNode(_)
                | Error::InvalidParameter { .. }
                | Error::EnumerationTooLarge { .. }
                | Error::Parse { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
