//! Domain types for the two-sample linear models, the convolution
//! transform, and the population-level quantities used by oracles and
//! tests.
//!
//! The convolution of the two samples, `W = X_A + X_B`, `Z = X_A - X_B`,
//! `Y = Y_A + Y_B`, turns the hypothesis `beta_A = beta_B` into the moment
//! condition `E[(z - Pi'w)(y - w'theta)] = 0`, which the testing pipeline
//! estimates and calibrates. All types here are immutable after
//! construction and all operations are pure.

use ndarray::{Array1, Array2};

use crate::linalg;
use crate::{Error, Result};

/// Paired design/response arrays for samples A and B.
///
/// Both samples must have the same dimensions (equal sample sizes are
/// required; the unequal case is rejected at construction).
#[derive(Debug, Clone)]
pub struct TwoSampleData {
    pub x_a: Array2<f64>,
    pub y_a: Array1<f64>,
    pub x_b: Array2<f64>,
    pub y_b: Array1<f64>,
}

fn check_finite_matrix(m: &Array2<f64>, what: &'static str) -> Result<()> {
    for ((r, c), v) in m.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite { what, row: r, col: c });
        }
    }
    Ok(())
}

fn check_finite_vector(v: &Array1<f64>, what: &'static str) -> Result<()> {
    for (i, x) in v.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFinite { what, row: i, col: 0 });
        }
    }
    Ok(())
}

impl TwoSampleData {
    pub fn new(
        x_a: Array2<f64>,
        y_a: Array1<f64>,
        x_b: Array2<f64>,
        y_b: Array1<f64>,
    ) -> Result<Self> {
        let (n, p) = x_a.dim();
        if n < 2 {
            return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
        }
        if p < 1 {
            return Err(Error::InvalidArgument("need p >= 1".into()));
        }
        if x_b.nrows() != n {
            return Err(Error::DimensionMismatch {
                axis: "rows of x_b (equal sample sizes required)",
                expected: n,
                got: x_b.nrows(),
            });
        }
        if x_b.ncols() != p {
            return Err(Error::DimensionMismatch {
                axis: "columns of x_b",
                expected: p,
                got: x_b.ncols(),
            });
        }
        if y_a.len() != n {
            return Err(Error::DimensionMismatch {
                axis: "length of y_a",
                expected: n,
                got: y_a.len(),
            });
        }
        if y_b.len() != n {
            return Err(Error::DimensionMismatch {
                axis: "length of y_b",
                expected: n,
                got: y_b.len(),
            });
        }
        check_finite_matrix(&x_a, "x_a")?;
        check_finite_matrix(&x_b, "x_b")?;
        check_finite_vector(&y_a, "y_a")?;
        check_finite_vector(&y_b, "y_b")?;
        Ok(Self { x_a, y_a, x_b, y_b })
    }

    pub fn n(&self) -> usize {
        self.x_a.nrows()
    }

    pub fn p(&self) -> usize {
        self.x_a.ncols()
    }
}

/// The derived convolved regression data `(W, Z, Y)`.
#[derive(Debug, Clone)]
pub struct ConvolvedData {
    /// `X_A + X_B`
    pub w: Array2<f64>,
    /// `X_A - X_B`
    pub z: Array2<f64>,
    /// `Y_A + Y_B`
    pub y: Array1<f64>,
}

impl ConvolvedData {
    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    pub fn p(&self) -> usize {
        self.w.ncols()
    }
}

/// Entrywise convolution of the two samples; the input is unmodified.
pub fn convolve(data: &TwoSampleData) -> ConvolvedData {
    ConvolvedData {
        w: &data.x_a + &data.x_b,
        z: &data.x_a - &data.x_b,
        y: &data.y_a + &data.y_b,
    }
}

/// Tail family of a noise distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailKind {
    Gaussian,
    Cauchy,
}

/// Error-distribution tag plus scale.
#[derive(Debug, Clone, Copy)]
pub struct NoiseSpec {
    pub kind: TailKind,
    pub scale: f64,
}

/// Population description of the two samples: feature covariances,
/// coefficients, and noise laws. Covariances are checked SPD at
/// construction via a successful factorization.
#[derive(Debug, Clone)]
pub struct PopulationSpec {
    pub sigma_a: Array2<f64>,
    pub sigma_b: Array2<f64>,
    pub beta_a: Array1<f64>,
    pub beta_b: Array1<f64>,
    pub noise_a: NoiseSpec,
    pub noise_b: NoiseSpec,
}

impl PopulationSpec {
    pub fn new(
        sigma_a: Array2<f64>,
        sigma_b: Array2<f64>,
        beta_a: Array1<f64>,
        beta_b: Array1<f64>,
        noise_a: NoiseSpec,
        noise_b: NoiseSpec,
    ) -> Result<Self> {
        let p = sigma_a.nrows();
        if sigma_b.nrows() != p || sigma_b.ncols() != p || sigma_a.ncols() != p {
            return Err(Error::DimensionMismatch {
                axis: "covariance dimensions",
                expected: p,
                got: sigma_b.nrows(),
            });
        }
        if beta_a.len() != p || beta_b.len() != p {
            return Err(Error::DimensionMismatch {
                axis: "coefficient length",
                expected: p,
                got: beta_a.len(),
            });
        }
        linalg::cholesky(&sigma_a)?;
        linalg::cholesky(&sigma_b)?;
        Ok(Self { sigma_a, sigma_b, beta_a, beta_b, noise_a, noise_b })
    }
}

/// Population regression matrix of `Z` on `W`:
/// the solution of `(Sigma_A + Sigma_B) P = (Sigma_A - Sigma_B)`,
/// computed column-by-column through a Cholesky solve.
pub fn population_pi(sigma_a: &Array2<f64>, sigma_b: &Array2<f64>) -> Result<Array2<f64>> {
    let p = sigma_a.nrows();
    if sigma_b.nrows() != p || sigma_b.ncols() != p || sigma_a.ncols() != p {
        return Err(Error::DimensionMismatch {
            axis: "covariance dimensions",
            expected: p,
            got: sigma_b.nrows(),
        });
    }
    let sum = sigma_a + sigma_b;
    let diff = sigma_a - sigma_b;
    let l = linalg::cholesky(&sum)?;
    let mut pi = Array2::<f64>::zeros((p, p));
    for j in 0..p {
        let col = diff.column(j).to_owned();
        pi.column_mut(j).assign(&linalg::solve_spd(&l, &col));
    }
    Ok(pi)
}

/// Covariance of the decoupled residual `v = z - Pi' w`:
/// `4 (Sigma_A^{-1} + Sigma_B^{-1})^{-1}`, symmetrized.
pub fn population_sigma_v(sigma_a: &Array2<f64>, sigma_b: &Array2<f64>) -> Result<Array2<f64>> {
    let inv_a = linalg::inverse_spd(sigma_a)?;
    let inv_b = linalg::inverse_spd(sigma_b)?;
    let sum = &inv_a + &inv_b;
    let mut v = linalg::inverse_spd(&sum)?;
    v.mapv_inplace(|x| 4.0 * x);
    Ok(v)
}
