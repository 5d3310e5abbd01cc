//! Generalized permutons: limits of ordered selections.
//!
//! An `(n, m)`-permutation (an ordered choice of `m` distinct values from
//! `[n]`) is embedded as a step measure on `[0, m/n] x [0, 1]`. This crate
//! provides that embedding, pattern densities, the CDF sup-distance and the
//! rectangle distance between such measures, sampling of random
//! subpermutations, and a constructive pipeline approximating any
//! `lambda`-permuton by `(Nk, Mk)`-permutations with a measured certificate.
//!
//! Algorithms are generic over [`Scalar`]: use `f64` for Monte Carlo work and
//! [`Exact`] for zero-tolerance results.

pub mod approx;
pub mod cdf;
pub mod convergence;
pub mod embed;
pub mod error;
pub mod fixtures;
pub mod metrics;
pub mod patterns;
pub mod perm;
pub mod rng;
pub mod sampling;
pub mod scalar;
pub mod step;

pub use cdf::PiecewiseLinearCdf;
pub use embed::{
    embed_permutation, embed_selection, extract_selection, k_subdivision, marginals, mu_sigma, KSubdivision,
};
pub use error::{Error, Result};
pub use metrics::{d_inf, d_square, joint_cdf_eval, DistanceResult, Witness};
pub use patterns::{DensityMethod, PatternDensityResult};
pub use perm::{OrderedSelection, Permutation};
pub use scalar::{Exact, Scalar};
pub use step::{StepPermuton, ValidationReport, Violation};

/// Checks every lambda-permuton property of `mu`.
pub fn validate_lambda_permuton<T: Scalar>(mu: &StepPermuton<T>) -> ValidationReport {
    mu.validate()
}
