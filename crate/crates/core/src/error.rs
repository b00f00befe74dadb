use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("simulation diverged: propagated state is not finite")]
    Diverged,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("unknown observation config `{name}`; valid names are: {valid}")]
    UnknownObsConfig { name: String, valid: String },
    #[error("dimension mismatch: observation config `{config}` has {config_dim} inputs but the policy expects {policy_dim}")]
    DimensionMismatch {
        config: String,
        config_dim: usize,
        policy_dim: usize,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SensorError {
    #[error("degenerate direction: deputy coincides with the cluster surface point")]
    DegenerateDirection,
    #[error("observation config requires a UPS vector but none was supplied")]
    MissingUps,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("step called on an episode that already terminated ({0:?})")]
    EpisodeDone(crate::env::DoneReason),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("statistic needs at least {needed} values, got {got}")]
    TooFewValues { needed: usize, got: usize },
    #[error("records mix observation configs: `{0}` and `{1}`")]
    MixedConfigs(String, String),
    #[error("no run records supplied")]
    NoRecords,
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("non-finite loss at iteration {iteration}, epoch {epoch}: {detail}")]
    NonFiniteLoss {
        iteration: usize,
        epoch: usize,
        detail: String,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Io(#[from] IoError),
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed {what} in {path}: {detail}")]
    Malformed {
        what: &'static str,
        path: String,
        detail: String,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

impl IoError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn malformed(what: &'static str, path: &std::path::Path, detail: impl ToString) -> Self {
        IoError::Malformed {
            what,
            path: path.display().to_string(),
            detail: detail.to_string(),
        }
    }
}
