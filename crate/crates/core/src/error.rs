//! One error type for the whole crate; the CLI maps variants to exit codes.

/// Errors reported by graph construction, numeric evaluation, and search.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A variable index is out of range for the graph it was used with.
    #[error("unknown variable index {0}")]
    UnknownVariable(usize),
    /// A variable name does not occur in the model.
    #[error("unknown variable `{0}`")]
    UnknownName(String),
    /// Variable names must be unique and non-empty.
    #[error("invalid variable name `{0}`")]
    BadVariableName(String),
    /// The edge-mask representation caps the variable count.
    #[error("too many variables: {got} (limit {limit})")]
    TooManyVariables { got: usize, limit: usize },
    /// Edges may not connect a variable to itself.
    #[error("self edge on `{0}`")]
    SelfEdge(String),
    /// Directed edges must point from earlier to later in the causal order.
    #[error("directed edge {tail} -> {head} violates the causal order")]
    OrderViolation { tail: String, head: String },
    #[error("edge already present: {0}")]
    DuplicateEdge(String),
    #[error("no such edge: {0}")]
    MissingEdge(String),
    /// Separation queries require distinct endpoints outside the conditioning set.
    #[error("separation query arguments overlap")]
    OverlappingQuery,
    /// An instrument/conditioning pair violated its well-formedness rules.
    #[error("invalid instrument pair: {0}")]
    InvalidIvPair(String),
    /// Coefficients or error covariances do not match the graph's edges.
    #[error("invalid instantiation: {0}")]
    InvalidInstantiation(String),
    /// The requested query cannot be posed against this model.
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    /// The conditioning block of a covariance matrix is numerically singular.
    #[error("conditioning block is numerically singular")]
    DegenerateConditioning,
    /// An estimand hit a near-zero denominator during evaluation.
    #[error("estimand evaluation degenerate: |denominator| below {0:e}")]
    DegenerateEvaluation(f64),
    /// Probing could not produce enough well-conditioned draws to compare
    /// two estimands.
    #[error("estimand distinctness inconclusive after {0} probe draws")]
    InconclusiveDistinctness(usize),
    /// Non-finite numbers or an unstable finite-difference stencil.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    /// A lattice search visited more graphs than the configured budget allows.
    #[error("search budget exceeded: limit {0} lattice nodes")]
    BudgetExceeded(u64),
}

pub type Result<T> = std::result::Result<T, Error>;
