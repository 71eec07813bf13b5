//! Two-sample testing of equality of regression coefficients in
//! high-dimensional linear models.
//!
//! Given two samples `(X_A, Y_A)` and `(X_B, Y_B)` from linear models
//! `y = x'beta + u` with `p >> n`, the TIERS test decides whether
//! `beta_A = beta_B` without assuming sparsity of either coefficient
//! vector and without restrictions on the error distribution. The
//! construction convolves the samples into a single regression whose
//! moment condition encodes the null, estimates the nuisance parts with
//! the auto-adaptive Dantzig selector (ADDS), and calibrates the
//! self-normalized max statistic by simulating a Gaussian vector with
//! the plugged-in covariance.
//!
//! Modules:
//! - [`model`]: domain types, the convolution transform, population formulas
//! - [`dantzig`]: the l1-minimization LP solved by a dense dual simplex
//! - [`adds`]: the auto-adaptive scale search on top of the LP path
//! - [`testing`]: the full TIERS / TIERS+ pipelines and the critical-value simulator
//! - [`baselines`]: the naive de-biased test's size curve and the oracle LR power
//! - [`datagen`]: seeded synthetic data for all supported experiment regimes
//! - [`harness`]: experiment runner, reports, CSV ingestion

pub mod adds;
pub mod baselines;
pub mod dantzig;
pub mod datagen;
mod error;
pub mod harness;
mod linalg;
pub mod model;
pub mod rng;
pub mod testing;

pub use error::{Error, Result};
