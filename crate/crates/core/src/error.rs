//! Crate-wide error type.

/// Errors produced by scene validation, geometry, the link model, the
/// selection solver, and dictionary/record I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Structured-text config did not parse.
    #[error("config parse error: {0}")]
    Parse(String),

    /// A field violated a documented invariant.
    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },

    /// Anchor/target pair violates the wall-plane geometry preconditions.
    #[error("geometry domain error: {0}")]
    Geometry(String),

    /// A strictly positive quantity was zero or negative.
    #[error("`{name}` must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    /// Fisher information is singular: the geometry term r has consumed the
    /// coverage term S and the target is unlocalizable.
    #[error("singular Fisher information (r = {r}, s = {s}): unlocalizable geometry")]
    SingularFim { r: f64, s: f64 },

    /// The nuisance block of the delay FIM could not be inverted.
    #[error("singular nuisance block in delay FIM: {0}")]
    SingularNuisance(String),

    /// A weight list that needs at least two entries had fewer.
    #[error("need at least {need} weights, got {got}")]
    TooFewWeights { need: usize, got: usize },

    /// Polygon closure is impossible: one weight exceeds the sum of the rest.
    #[error(
        "polygon closure infeasible: max weight {max} exceeds the sum of the others {rest} \
         (generalized polygon inequality violated)"
    )]
    ClosureInfeasible { max: f64, rest: f64 },

    /// A dictionary entry could not be computed for candidate/target pair.
    #[error("dictionary entry failed for candidate {m}, target {n}: {source}")]
    PairFailure {
        m: usize,
        n: usize,
        #[source]
        source: Box<Error>,
    },

    /// Exhaustive enumeration would exceed the configured budget.
    #[error("exhaustive enumeration refused: C({m}, {k}) = {combinations} exceeds budget {budget}")]
    BudgetExceeded {
        m: usize,
        k: usize,
        combinations: u128,
        budget: u128,
    },

    /// Operation is not defined for the requested objective.
    #[error("unsupported objective for this operation: {0}")]
    UnsupportedObjective(String),

    /// Dictionary or record container failed structural checks.
    #[error("format error: {0}")]
    Format(String),

    /// Dictionary container version is not the one this build writes.
    #[error("dictionary version mismatch: found {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
