//! Numerical toolkit for higher-order invariants of minimal surfaces in
//! round spheres: truncated Taylor (jet) arithmetic, parametrized surface
//! evaluation, osculating flags with curvature ellipses and Hopf data,
//! curvature-condition residuals, and direct-sum constructions of flat tori.

pub mod conditions;
pub mod directsum;
pub mod frames;
pub mod jets;
pub mod surfaces;

/// Errors shared across the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Analytic function applied outside its admissible domain.
    #[error("domain error: {0}")]
    DomainError(String),
    /// Requested derivative order exceeds the jet truncation order.
    #[error("requested partial of order {requested} exceeds jet order {order}")]
    OrderExceeded { requested: usize, order: usize },
    /// Surface name not present in the catalog.
    #[error("unknown catalog surface `{0}`")]
    UnknownCatalogName(String),
    /// Construction data violates a structural constraint.
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),
    /// Parametrization is not conformal at a sampled point.
    #[error("not conformal: {0}")]
    NotConformal(String),
    /// Osculating flag degenerates at the given level.
    #[error("degenerate flag at level {0}")]
    DegenerateFlag(usize),
    /// Normal-curvature denominator vanishes in an intrinsic-curvature formula.
    #[error("division by degenerate normal curvature")]
    DivisionByDegenerateNormalCurvature,
    /// Parallel-transported frame lost continuity along a loop.
    #[error("frame discontinuity during transport")]
    FrameDiscontinuity,
    /// Surface evaluation failed at a grid point.
    #[error("evaluation failure: {0}")]
    EvaluationFailure(String),
    /// Gauss curvature is 1; curvature-condition residuals are inapplicable.
    #[error("Gauss curvature equals 1; condition inapplicable")]
    CurvatureOne,
    /// Requested identity variant does not apply to the given data.
    #[error("variant inapplicable: {0}")]
    VariantInapplicable(String),
    /// A recursion vector vanished at the given step.
    #[error("zero vector at recursion step {0}")]
    ZeroVector(usize),
    /// Base surface fails the pseudoholomorphicity test required here.
    #[error("base surface fails the pseudoholomorphic check: {0}")]
    BaseNotPseudoholomorphic(String),
    /// Surface kind not supported by this operation.
    #[error("unsupported surface kind: {0}")]
    UnsupportedKind(String),
    /// Sign convention could not be propagated continuously over the grid.
    #[error("sign discontinuity while orienting a section")]
    SignDiscontinuity,
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
