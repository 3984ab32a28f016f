use thiserror::Error;

use crate::data::Instance;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("samples have different lengths ({left} vs {right}); Hamming distance is only defined for equal sizes")]
    LengthMismatch { left: usize, right: usize },

    #[error("instance {instance} does not belong to universe {universe}")]
    UniverseMismatch { instance: String, universe: String },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid concept class: {0}")]
    InvalidClass(String),

    #[error("operation `{op}` is not supported for {what}")]
    Unsupported { op: &'static str, what: String },

    #[error("size limit exceeded in `{op}`: {detail}")]
    LimitExceeded { op: &'static str, detail: String },

    #[error("no shattered set of size {0} exists")]
    NotShattered(usize),

    #[error("sample is not realizable by the class")]
    NotRealizable,

    #[error("sample is not linearly separable")]
    NotSeparable,

    #[error(
        "no hypothesis in the class matches the vote on the projection set at ell = {ell} (witness x = {witness:?})"
    )]
    NoProjection { ell: usize, witness: Option<Instance> },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("base learner failed on block {block}: {source}")]
    Block {
        block: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("orientation could not reach out-degree {target}")]
    Orientation { target: usize },

    #[error("attack replay mismatch: {0}")]
    ReplayMismatch(String),

    #[error("class is trivial: no x1, x2, h1, h2 with h1(x1) = h2(x1) and h1(x2) != h2(x2)")]
    TrivialClass,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sandwich violated: {0}")]
    SandwichViolation(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn limit(op: &'static str, detail: impl Into<String>) -> Self {
        Error::LimitExceeded {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn unsupported(op: &'static str, what: impl Into<String>) -> Self {
        Error::Unsupported { op, what: what.into() }
    }
}
