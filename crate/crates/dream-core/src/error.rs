use thiserror::Error;

/// Errors produced by model construction, evaluation and execution.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate instance id {0}")]
    DuplicateInstance(i64),
    #[error("unknown instance {0}")]
    UnknownInstance(i64),
    #[error("unknown component type '{0}'")]
    UnknownType(String),
    #[error("unknown variable '{var}' on instance {instance}")]
    UnknownVariable { instance: i64, var: String },
    #[error("unknown port '{port}' of type '{ty}'")]
    UnknownPort { ty: String, port: String },
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("unknown node attribute '{attr}' on node {node}")]
    UnknownNodeAttr { node: String, attr: String },
    #[error("unknown motif '{0}'")]
    UnknownMotif(String),
    #[error("port '{port}' not enabled at location '{location}' of instance {instance}")]
    PortNotEnabled {
        instance: i64,
        port: String,
        location: String,
    },
    #[error("instance {0} has no address")]
    NoAddress(i64),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("vector length mismatch: {0} vs {1}")]
    VectorLength(usize, usize),
    #[error("unbound component variable '{0}'")]
    UnboundVariable(String),
    #[error("initializer for '{0}' must not reference runtime state")]
    InitializerNotClosed(String),
    #[error("invalid component type '{ty}': {reason}")]
    InvalidType { ty: String, reason: String },
    #[error("port universe too large: {0} ports (bound {1})")]
    UniverseTooLarge(usize, usize),
    #[error("port {0} outside the given universe")]
    PortOutsideUniverse(String),
    #[error("interaction holds several ports of instance {0}")]
    MultiplePortsPerInstance(i64),
    #[error("too many operation outcomes: {0} (bound {1})")]
    TooManyOutcomes(usize, usize),
    #[error("migration term may contain only migrate operations")]
    NonMigrationOperation,
    #[error("coordination term may not contain migrate operations")]
    MigrationInCoordination,
    #[error("torus size must be at least 1")]
    EmptyTorus,
    #[error("node {0} already carries a component or the id is taken")]
    NodeIdTaken(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
