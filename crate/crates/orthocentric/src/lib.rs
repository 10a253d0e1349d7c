//! Exact solid angles, conic intrinsic volumes and Gaussian polytope
//! expectations for orthocentric simplices and orthocentric cones.
//!
//! An orthocentric cone `C_d(λ0; λ1..λd; ε1..εd)` is the positive hull of
//! signed vectors whose Gram matrix has entries `1/λ0 + δij/λi`. Tangent and
//! normal cones of orthocentric simplices are cones of this family, so every
//! internal/external angle of such a simplex reduces to the orthant
//! probability `g_d` of a structured Gaussian vector. This crate evaluates
//! `g_d` in every admissible parameter regime by one-dimensional adaptive
//! quadrature of stable, overflow-free integrands, and layers the cone
//! algebra, simplex classification and random-polytope expectations on top.
//!
//! Every closed form has an independent Monte-Carlo counterpart in [`mc`],
//! used throughout the test suite and exposed for external verification.
//!
//! See the `examples/` directory for runnable walkthroughs of each
//! capability, and the `orthocentric` binary for a JSON command-line front
//! end.

pub mod cones;
pub mod gauss;
pub mod gfun;
pub mod gram;
pub mod mc;
pub mod quad;
pub mod simplex;
pub mod specfun;

mod erf;
mod subsets;

pub use cones::{IntrinsicVolumeVector, OrthocentricCone};
pub use gfun::{AngleResult, GBranch};
pub use gram::{CaseLabel, ConeParams};
pub use mc::{McEstimate, RngStream};
pub use quad::QuadratureConfig;
pub use simplex::{CanonicalSimplex, FaceSelector, SimplexClassification, Verdict, VertexSet};

/// Error type shared by all modules of this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parameter must be nonzero and finite: {0}")]
    ZeroParameter(String),
    #[error("invalid cone parameters: {0}")]
    InvalidParams(String),
    #[error("subset of indices must be nonempty")]
    EmptySubset,
    #[error("subset of indices is invalid: {0}")]
    InvalidSubset(String),
    #[error("argument outside the numerically safe domain: {0}")]
    DomainTooLarge(String),
    #[error("argument must be positive, got {0}")]
    NonPositiveArgument(f64),
    #[error("quadrature failed to reach the requested tolerance: {0}")]
    QuadratureFailure(String),
    #[error("all tau parameters must be positive and finite, got {0}")]
    NonPositiveTau(f64),
    #[error("nu = 1 does not define a simplex")]
    NuEqualsOne,
    #[error("vertices are affinely dependent or too few ({0})")]
    DegenerateVertices(String),
    #[error("face selector out of range: {0}")]
    FaceOutOfRange(String),
    #[error("intermediate cone parameters violate the admissibility conditions: {0}")]
    InvalidIntermediateParams(String),
    #[error("covariance matrix is not positive definite")]
    CholeskyFailure,
    #[error("generators are linearly dependent")]
    SingularGenerators,
    #[error("cone projection did not converge within the iteration cap")]
    ProjectionNonConvergence,
    #[error("combinatorial budget exceeded: {0}")]
    CombinatorialBudgetExceeded(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
