//! Sparse signal recovery from one-bit (sign-only) linear measurements.
//!
//! The measurement model keeps only `b = sign(A x)`. Recovery maximizes a
//! sigmoid-based consistency metric between `b` and `sign(A x_hat)` while
//! penalizing non-sparsity, either with the log-sum (Gaussian entropy)
//! penalty or with the l1 norm. Both objectives are minimized by the same
//! bound-optimization scheme: at each outer iteration a convex quadratic
//! surrogate is built from the current estimate and minimized with a damped
//! Newton method, which reduces to an iteratively reweighted procedure.
//!
//! Modules:
//! - [`model`]: instance generation, quantization, and the JSON file format
//! - [`loss`]: consistency metric, penalties, analytic derivatives
//! - [`solver`]: the iteratively reweighted surrogate minimization
//! - [`metrics`]: support extraction and false-alarm / miss scoring
//! - [`bench`]: seeded Monte-Carlo sweeps over sparsity levels, CSV output

pub mod bench;
pub mod error;
mod linalg;
pub mod loss;
pub mod metrics;
pub mod model;
pub mod solver;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use loss::PenaltyMode;
pub use model::ProblemInstance;
pub use solver::{SolveResult, SolverConfig};
