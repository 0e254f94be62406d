//! Once-boosted ridge regression: a single kernel-ridge boosting step on an
//! initial predictor makes plug-in estimates of linear functionals both
//! multiaccurate over an RKHS auditing class and efficient, with valid
//! confidence intervals under covariate shift.
//!
//! Modules:
//! - [`linalg`]: dense SPD factorization and symmetric eigenvalues
//! - [`data`]: datasets with source/target provenance
//! - [`features`]: feature maps and kernels (identity, monomial, RFF)
//! - [`regress`]: primal/dual ridge regression under one canonical objective
//! - [`functionals`]: weighted-anchor linear functionals
//! - [`riesz`]: Riesz regression and the implied-weights equivalence check
//! - [`boost`]: the boosted estimator, variance, and confidence intervals
//! - [`audit`]: multiaccuracy error and the contraction certificate
//! - [`sim`]: the coverage-study data-generating process and harness

pub mod audit;
pub mod boost;
pub mod data;
pub mod error;
pub mod features;
pub mod functionals;
pub mod linalg;
pub mod regress;
pub mod riesz;
pub mod sim;

pub use data::{Dataset, Provenance};
pub use error::{Error, Result};
pub use linalg::DenseMatrix;
