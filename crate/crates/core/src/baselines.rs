//! Reference procedures the main test is compared against: the size curve
//! of the naive de-biased two-sample max test under a dense null, and the
//! oracle likelihood-ratio power formula.
//!
//! The naive demonstration never fits the scaled-Lasso pilot estimator: on
//! the dense null `beta_A = beta_B = 1_p c / sqrt(n)` the de-biased
//! difference collapses (with probability tending to one) to the explicit
//! Gaussian vector
//! `zeta = (SigmaHat_A - SigmaHat_B) 1_p c + n^(-1/2)(X_A' g_A - X_B' g_B)`,
//! so the rejection probability of the naive test is simulated directly
//! from that closed form: calibrate the null critical value on the `c = 0`
//! inner sample, then average exceedance fractions over outer design
//! draws.

use ndarray::{Array1, Array2};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::linalg;
use crate::rng::{derive_seed, streams, NormalSource};
use crate::{Error, Result};

/// Configuration of the naive-test size study.
#[derive(Debug, Clone)]
pub struct NaiveDemoConfig {
    pub n: usize,
    pub p: usize,
    /// Coefficient magnitudes `c` in `beta = 1_p c / sqrt(n)`.
    pub c_grid: Vec<f64>,
    pub alpha: f64,
    pub outer_reps: usize,
    pub inner_draws: usize,
    pub seed: u64,
}

impl NaiveDemoConfig {
    pub fn new(
        n: usize,
        p: usize,
        c_grid: Vec<f64>,
        alpha: f64,
        outer_reps: usize,
        inner_draws: usize,
        seed: u64,
    ) -> Result<Self> {
        if outer_reps < 50 {
            return Err(Error::InvalidArgument(format!(
                "need at least 50 outer repetitions, got {outer_reps}"
            )));
        }
        if inner_draws < 2000 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2000 inner draws, got {inner_draws}"
            )));
        }
        if c_grid.is_empty() {
            return Err(Error::InvalidArgument("empty c grid".into()));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("alpha must be in (0,1), got {alpha}")));
        }
        if n < 2 || p < 1 {
            return Err(Error::InvalidArgument(format!("need n >= 2, p >= 1, got n={n}, p={p}")));
        }
        Ok(Self { n, p, c_grid, alpha, outer_reps, inner_draws, seed })
    }
}

/// One outer repetition on explicit designs: rejection fraction per `c`,
/// with the critical value calibrated on the `c = 0` noise sample.
///
/// Exposed so invariance checks (e.g. permuting design columns) can inject
/// the designs directly.
pub fn naive_size_rep(
    x_a: &Array2<f64>,
    x_b: &Array2<f64>,
    c_grid: &[f64],
    alpha: f64,
    inner_draws: usize,
    seed: u64,
) -> Vec<f64> {
    let n = x_a.nrows();
    let p = x_a.ncols();
    let nf = n as f64;
    let sqrt_n = nf.sqrt();

    // Studentization denominators from the diagonal of the Gram matrices.
    let mut denom = Array1::<f64>::zeros(p);
    for j in 0..p {
        let da: f64 = x_a.column(j).iter().map(|v| v * v).sum::<f64>() / nf;
        let db: f64 = x_b.column(j).iter().map(|v| v * v).sum::<f64>() / nf;
        denom[j] = (da + db).sqrt();
    }
    // Mean direction (SigmaHat_A - SigmaHat_B) 1_p without forming p x p.
    let ones = Array1::<f64>::ones(p);
    let m1 = (x_a.t().dot(&x_a.dot(&ones)) - x_b.t().dot(&x_b.dot(&ones))).mapv(|v| v / nf);

    // Inner noise sample zeta_0 = n^(-1/2)(X_A' g_A - X_B' g_B), exact
    // conditional covariance SigmaHat_A + SigmaHat_B.
    let mut noise = Array2::<f64>::zeros((inner_draws, p));
    let mut null_max = vec![0.0f64; inner_draws];
    let mut g_a = Array1::<f64>::zeros(n);
    let mut g_b = Array1::<f64>::zeros(n);
    for r in 0..inner_draws {
        let mut src = NormalSource::from_stream(seed, streams::MC_BASE + r as u64);
        for v in g_a.iter_mut() {
            *v = src.next();
        }
        for v in g_b.iter_mut() {
            *v = src.next();
        }
        let z = (x_a.t().dot(&g_a) - x_b.t().dot(&g_b)).mapv(|v| v / sqrt_n);
        let mut m = 0.0f64;
        for j in 0..p {
            m = m.max((z[j] / denom[j]).abs());
        }
        null_max[r] = m;
        noise.row_mut(r).assign(&z);
    }
    let mut sorted = null_max.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite maxima"));
    let idx = (((1.0 - alpha) * inner_draws as f64).ceil() as usize).clamp(1, inner_draws);
    let crit = sorted[idx - 1];

    c_grid
        .iter()
        .map(|&c| {
            let mut exceed = 0usize;
            for r in 0..inner_draws {
                let mut m = 0.0f64;
                let row = noise.row(r);
                for j in 0..p {
                    m = m.max(((c * m1[j] + row[j]) / denom[j]).abs());
                }
                if m > crit {
                    exceed += 1;
                }
            }
            exceed as f64 / inner_draws as f64
        })
        .collect()
}

/// Simulates the naive test's rejection probability over the `c` grid;
/// returns `(c, M_hat(alpha, c))` pairs.
pub fn naive_size_curve(cfg: &NaiveDemoConfig) -> Result<Vec<(f64, f64)>> {
    let per_outer: Vec<Vec<f64>> = (0..cfg.outer_reps)
        .into_par_iter()
        .map(|o| {
            let rep_seed = derive_seed(cfg.seed, o as u64);
            let mut src_a = NormalSource::from_stream(rep_seed, streams::DESIGN_A);
            let mut src_b = NormalSource::from_stream(rep_seed, streams::DESIGN_B);
            let x_a = Array2::from_shape_fn((cfg.n, cfg.p), |_| src_a.next());
            let x_b = Array2::from_shape_fn((cfg.n, cfg.p), |_| src_b.next());
            naive_size_rep(&x_a, &x_b, &cfg.c_grid, cfg.alpha, cfg.inner_draws, rep_seed)
        })
        .collect();

    let mut out = Vec::with_capacity(cfg.c_grid.len());
    for (k, &c) in cfg.c_grid.iter().enumerate() {
        let mean = per_outer.iter().map(|rep| rep[k]).sum::<f64>() / cfg.outer_reps as f64;
        out.push((c, mean));
    }
    Ok(out)
}

/// Power of the oracle likelihood-ratio test:
/// `Phi(d_n - Phi^-1(1 - alpha))` with noncentrality
/// `d_n = sqrt(n) a / sqrt(a^2/2 + a sigma_u^2)` for `a = gamma' Sigma_B gamma`.
///
/// `gamma = 0` returns `alpha` (the null-continuity limit).
pub fn lr_oracle_power(
    gamma: &Array1<f64>,
    sigma_b: &Array2<f64>,
    sigma_u_b: f64,
    n: usize,
    alpha: f64,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must be in (0,1), got {alpha}")));
    }
    if !(sigma_u_b > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise scale must be positive, got {sigma_u_b}"
        )));
    }
    if sigma_b.nrows() != gamma.len() || sigma_b.ncols() != gamma.len() {
        return Err(Error::DimensionMismatch {
            axis: "covariance vs gamma",
            expected: gamma.len(),
            got: sigma_b.nrows(),
        });
    }
    linalg::cholesky(sigma_b)?;
    let a = gamma.dot(&sigma_b.dot(gamma));
    let norm = Normal::new(0.0, 1.0).expect("unit normal");
    if a == 0.0 {
        return Ok(alpha);
    }
    let d_n = (n as f64).sqrt() * a / (a * a / 2.0 + a * sigma_u_b * sigma_u_b).sqrt();
    Ok(norm.cdf(d_n - norm.inverse_cdf(1.0 - alpha)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_calibration_at_c_zero() {
        // The null critical value comes from the same inner sample, so the
        // exceedance fraction at c = 0 is alpha up to quantile rounding.
        let cfg = NaiveDemoConfig::new(30, 40, vec![0.0], 0.05, 50, 2000, 11).unwrap();
        let curve = naive_size_curve(&cfg).unwrap();
        assert_eq!(curve.len(), 1);
        assert!((curve[0].1 - 0.05).abs() < 1e-9, "m_hat = {}", curve[0].1);
    }

    #[test]
    fn permutation_of_design_columns_is_invariant() {
        let n = 25;
        let p = 20;
        let mut src = NormalSource::from_stream(7, 0);
        let x_a = Array2::from_shape_fn((n, p), |_| src.next());
        let x_b = Array2::from_shape_fn((n, p), |_| src.next());
        let grid = [0.0, 0.5, 2.0];
        let base = naive_size_rep(&x_a, &x_b, &grid, 0.05, 2000, 3);
        // Reverse the coordinate labels of both designs.
        let perm: Vec<usize> = (0..p).rev().collect();
        let permute = |x: &Array2<f64>| {
            let mut out = Array2::<f64>::zeros((n, p));
            for (newj, &oldj) in perm.iter().enumerate() {
                out.column_mut(newj).assign(&x.column(oldj));
            }
            out
        };
        let permuted = naive_size_rep(&permute(&x_a), &permute(&x_b), &grid, 0.05, 2000, 3);
        for (a, b) in base.iter().zip(permuted.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn config_validation() {
        assert!(NaiveDemoConfig::new(30, 40, vec![0.0], 0.05, 10, 2000, 1).is_err());
        assert!(NaiveDemoConfig::new(30, 40, vec![0.0], 0.05, 50, 100, 1).is_err());
        assert!(NaiveDemoConfig::new(30, 40, vec![], 0.05, 50, 2000, 1).is_err());
    }

    #[test]
    fn lr_power_null_continuity() {
        let gamma = Array1::<f64>::zeros(3);
        let sigma = Array2::<f64>::eye(3);
        let power = lr_oracle_power(&gamma, &sigma, 1.0, 100, 0.05).unwrap();
        assert!((power - 0.05).abs() < 1e-12);
    }

    #[test]
    fn lr_power_unit_quadratic_form() {
        // a = 1, sigma_u = 1, n = 100: d_n = 10/sqrt(1.5) ~ 8.165.
        let gamma = Array1::from_vec(vec![1.0, 0.0, 0.0]);
        let sigma = Array2::<f64>::eye(3);
        let power = lr_oracle_power(&gamma, &sigma, 1.0, 100, 0.05).unwrap();
        assert!(power > 0.9999, "power {power}");
    }

    #[test]
    fn lr_power_monotone_in_n_and_signal() {
        let sigma = Array2::<f64>::eye(2);
        let mut last = 0.0;
        for n in [50, 100, 200, 400] {
            let gamma = Array1::from_vec(vec![0.1, 0.0]);
            let power = lr_oracle_power(&gamma, &sigma, 1.0, n, 0.05).unwrap();
            assert!(power > last);
            last = power;
        }
        let mut last = 0.0;
        for g in [0.05, 0.1, 0.2, 0.4] {
            let gamma = Array1::from_vec(vec![g, 0.0]);
            let power = lr_oracle_power(&gamma, &sigma, 1.0, 200, 0.05).unwrap();
            assert!(power > last);
            last = power;
        }
    }

    #[test]
    fn lr_power_rejects_bad_inputs() {
        let gamma = Array1::from_vec(vec![0.1]);
        let sigma = Array2::<f64>::eye(1);
        assert!(lr_oracle_power(&gamma, &sigma, 0.0, 10, 0.05).is_err());
        assert!(lr_oracle_power(&gamma, &sigma, 1.0, 10, 1.5).is_err());
        let bad = Array2::from_shape_vec((1, 1), vec![-1.0]).unwrap();
        assert!(lr_oracle_power(&gamma, &bad, 1.0, 10, 0.05).is_err());
    }
}
