use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("inconsistent policy: {0}")]
    InconsistentPolicy(String),

    #[error("invalid feasible set: {0}")]
    InvalidFeasibleSet(String),

    #[error("instance too large: {0}")]
    InstanceTooLarge(String),

    #[error("infeasible objective: {0}")]
    InfeasibleObjective(String),

    #[error("utility undefined: {0}")]
    UndefinedUtility(String),

    #[error("oracle scale exceeded: {0}")]
    OracleScaleExceeded(String),

    #[error("schedule schema error: {0}")]
    Schema(String),

    #[error("invalid config field `{field}`: {message}")]
    InvalidConfig { field: String, message: String },
}

impl Error {
    /// Stable kebab-case tag used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidTopology(_) => "invalid-topology",
            Error::InvalidParameters(_) => "invalid-parameters",
            Error::InconsistentPolicy(_) => "inconsistent-policy",
            Error::InvalidFeasibleSet(_) => "invalid-feasible-set",
            Error::InstanceTooLarge(_) => "instance-too-large",
            Error::InfeasibleObjective(_) => "infeasible-objective",
            Error::UndefinedUtility(_) => "undefined-utility",
            Error::OracleScaleExceeded(_) => "oracle-scale-exceeded",
            Error::Schema(_) => "schema-error",
            Error::InvalidConfig { .. } => "invalid-config",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
