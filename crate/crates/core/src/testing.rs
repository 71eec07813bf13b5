//! The full hypothesis test: estimate the nuisance regressions, form the
//! self-normalized max statistic, simulate its critical value, decide.
//!
//! Two interchangeable strategies sit behind [`TestStrategy`] and are
//! selected by name (`tiers`, `tiers-plus`): the Gaussian-design test fits
//! the location parameter without extra constraints, the sub-Gaussian
//! variant adds a residual sup-norm constraint with
//! `mu = mu_scale * n^(1/9) * (log p)^(1/3)` so the simulated calibration
//! stays valid under non-Gaussian designs.
//!
//! The critical value is the empirical `(1 - alpha)` quantile of
//! `||n^(-1/2) V' g||_inf` over independent standard normal `g`; each draw
//! has the exact conditional law `N(0, Qhat)` with `Qhat = n^-1 V'V`, so
//! no p x p factorization is ever formed.

use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adds::{self, AddsFit};
use crate::dantzig::{tol_feas, SharedDesign, SideConstraint};
use crate::model::{convolve, ConvolvedData, TwoSampleData};
use crate::rng::{streams, NormalSource};
use crate::{Error, Result};

/// Test variant identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Tiers,
    TiersPlus,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Tiers => "tiers",
            Variant::TiersPlus => "tiers-plus",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "tiers" => Ok(Variant::Tiers),
            "tiers-plus" => Ok(Variant::TiersPlus),
            other => Err(Error::InvalidArgument(format!(
                "unknown variant '{other}'; expected tiers or tiers-plus"
            ))),
        }
    }
}

/// Runtime knobs of a single test run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestConfig {
    /// Monte Carlo draws for the critical value.
    pub draws: usize,
    /// Base seed; simulation draws use per-draw child streams.
    pub seed: u64,
    /// Override for the tuning value; `None` selects the adaptive rule.
    pub eta: Option<f64>,
    /// Multiplier on the residual sup-norm rate (tiers-plus only).
    pub mu_scale: f64,
    /// Weight simulation draws by the studentized residuals.
    pub weighted_qhat: bool,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self { draws: 2000, seed: 0, eta: None, mu_scale: 1.0, weighted_qhat: false }
    }
}

/// Column-wise nuisance regression of `Z` on `W`.
#[derive(Debug, Clone)]
pub struct PiEstimate {
    /// Estimated coefficients, one column per response column of `Z`.
    pub pi: Array2<f64>,
    /// Selected scale per column.
    pub sigma_tilde_cols: Array1<f64>,
    /// `Z - W * pi`.
    pub vhat: Array2<f64>,
    /// Columns with an identically zero response, fitted as zero.
    pub degenerate_cols: Vec<usize>,
    /// Total LP solves across columns.
    pub n_path_solves: usize,
}

/// Per-run diagnostics carried in the result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestDiagnostics {
    pub eta: f64,
    pub mu: Option<f64>,
    pub degenerate_columns: usize,
    pub theta_path_solves: usize,
    pub pi_path_solves: usize,
}

/// Decision record of one test run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestResult {
    pub t_n: f64,
    pub critical_value: f64,
    pub alpha: f64,
    pub p_value: f64,
    pub reject: bool,
    pub sigma_hat_u: f64,
    pub variant: Variant,
    pub sim_draws: usize,
    pub seed: u64,
    pub diagnostics: TestDiagnostics,
}

/// One test variant: how the location parameter is estimated.
pub trait TestStrategy: Send + Sync {
    fn variant(&self) -> Variant;
    /// Residual sup-norm multiplier, when the variant uses one.
    fn mu(&self, n: usize, p: usize, config: &TestConfig) -> Option<f64>;
    fn fit_theta(&self, conv: &ConvolvedData, eta: f64, config: &TestConfig) -> Result<AddsFit>;
}

struct GaussianDesign;

impl TestStrategy for GaussianDesign {
    fn variant(&self) -> Variant {
        Variant::Tiers
    }

    fn mu(&self, _n: usize, _p: usize, _config: &TestConfig) -> Option<f64> {
        None
    }

    fn fit_theta(&self, conv: &ConvolvedData, eta: f64, _config: &TestConfig) -> Result<AddsFit> {
        estimate_theta(conv, eta)
    }
}

struct SubGaussianDesign;

impl TestStrategy for SubGaussianDesign {
    fn variant(&self) -> Variant {
        Variant::TiersPlus
    }

    fn mu(&self, n: usize, p: usize, config: &TestConfig) -> Option<f64> {
        Some(config.mu_scale * (n as f64).powf(1.0 / 9.0) * (p as f64).ln().cbrt())
    }

    fn fit_theta(&self, conv: &ConvolvedData, eta: f64, config: &TestConfig) -> Result<AddsFit> {
        let mu = self
            .mu(conv.n(), conv.p(), config)
            .expect("sub-gaussian strategy always defines mu");
        estimate_theta_plus(conv, eta, mu)
    }
}

static STRATEGIES: [&dyn TestStrategy; 2] = [&GaussianDesign, &SubGaussianDesign];

/// All registered variants.
pub fn strategies() -> &'static [&'static dyn TestStrategy] {
    &STRATEGIES
}

/// Strategy lookup by variant.
pub fn strategy_for(variant: Variant) -> &'static dyn TestStrategy {
    STRATEGIES
        .iter()
        .copied()
        .find(|s| s.variant() == variant)
        .expect("every variant is registered")
}

/// Strategy lookup by CLI/config name.
pub fn strategy_by_name(name: &str) -> Result<&'static dyn TestStrategy> {
    Ok(strategy_for(Variant::from_name(name)?))
}

/// Fits the column-wise nuisance regressions of `Z` on `W`.
///
/// Zero columns of `Z` are flagged and fitted as zero; the call fails only
/// when every column is degenerate (e.g. identical designs).
pub fn estimate_pi(conv: &ConvolvedData, eta: f64) -> Result<PiEstimate> {
    let n = conv.n();
    let p = conv.p();
    let design = SharedDesign::new(&conv.w);
    let fits: Vec<Result<Option<AddsFit>>> = (0..p)
        .into_par_iter()
        .map(|j| {
            let zj = conv.z.column(j).to_owned();
            if zj.iter().all(|&v| v == 0.0) {
                return Ok(None);
            }
            adds::fit_shared(&design, zj, eta, SideConstraint::None).map(Some)
        })
        .collect();

    let mut pi = Array2::<f64>::zeros((p, p));
    let mut sigma_tilde_cols = Array1::<f64>::zeros(p);
    let mut vhat = Array2::<f64>::zeros((n, p));
    let mut degenerate_cols = Vec::new();
    let mut n_path_solves = 0;
    for (j, item) in fits.into_iter().enumerate() {
        match item? {
            None => degenerate_cols.push(j),
            Some(f) => {
                pi.column_mut(j).assign(&f.b);
                sigma_tilde_cols[j] = f.sigma_tilde;
                vhat.column_mut(j).assign(&f.residuals);
                n_path_solves += f.n_path_solves;
            }
        }
    }
    if degenerate_cols.len() == p {
        return Err(Error::DegenerateFit {
            stage: "pi estimation",
            detail: "all columns of Z are zero (identical designs?)".into(),
            trace_len: 0,
        });
    }
    Ok(PiEstimate { pi, sigma_tilde_cols, vhat, degenerate_cols, n_path_solves })
}

/// Fits the location parameter of the convolved regression.
pub fn estimate_theta(conv: &ConvolvedData, eta: f64) -> Result<AddsFit> {
    let design = SharedDesign::new(&conv.w);
    let fit = adds::fit_shared(&design, conv.y.clone(), eta, SideConstraint::None)?;
    if fit.sigma_hat == 0.0 {
        return Err(Error::DegenerateFit {
            stage: "theta estimation",
            detail: "zero residual scale (is Y identically zero?)".into(),
            trace_len: fit.search_trace.len(),
        });
    }
    Ok(fit)
}

/// Location fit with the residual sup-norm constraint of the
/// non-Gaussian-design variant.
pub fn estimate_theta_plus(conv: &ConvolvedData, eta: f64, mu: f64) -> Result<AddsFit> {
    let design = SharedDesign::new(&conv.w);
    let fit =
        adds::fit_shared(&design, conv.y.clone(), eta, SideConstraint::ResidualSupNorm { mu })?;
    if fit.sigma_hat == 0.0 {
        return Err(Error::DegenerateFit {
            stage: "theta estimation",
            detail: "zero residual scale (is Y identically zero?)".into(),
            trace_len: fit.search_trace.len(),
        });
    }
    Ok(fit)
}

/// `n^-1 V'V`: the plug-in covariance. Materialized only for diagnostics
/// and tests; the simulator works from `V` directly.
pub fn qhat(pi_est: &PiEstimate) -> Array2<f64> {
    let n = pi_est.vhat.nrows() as f64;
    pi_est.vhat.t().dot(&pi_est.vhat).mapv(|v| v / n)
}

/// The self-normalized max statistic
/// `n^(-1/2) ||V'(Y - W theta)||_inf / sigma_hat_u`.
pub fn test_statistic(pi_est: &PiEstimate, theta_fit: &AddsFit) -> Result<f64> {
    if !(theta_fit.sigma_hat > 0.0) {
        return Err(Error::DegenerateStatistic);
    }
    let n = pi_est.vhat.nrows() as f64;
    let moments = pi_est.vhat.t().dot(&theta_fit.residuals);
    let sup = moments.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(sup / (n.sqrt() * theta_fit.sigma_hat))
}

/// Simulated distribution of the max statistic under the plug-in law.
#[derive(Debug, Clone)]
pub struct MaxSimulation {
    /// Sorted simulated maxima.
    pub maxima: Vec<f64>,
    /// Order statistic at `ceil((1 - alpha) R)`.
    pub critical_value: f64,
}

impl MaxSimulation {
    /// Empirical tail fraction `#{m >= t} / R`.
    pub fn tail_fraction(&self, t: f64) -> f64 {
        let below = self.maxima.partition_point(|&m| m < t);
        (self.maxima.len() - below) as f64 / self.maxima.len() as f64
    }
}

/// Draws `R` samples of `||n^(-1/2) V' g||_inf` (optionally with per-row
/// weights folded into `g`) and returns the empirical `(1 - alpha)`
/// quantile plus the full sorted sample.
///
/// Draws run in parallel with per-draw counter streams, so the result does
/// not depend on the thread schedule.
pub fn simulate_max_quantile(
    vhat: &Array2<f64>,
    alpha: f64,
    draws: usize,
    seed: u64,
    weights: Option<&Array1<f64>>,
) -> Result<MaxSimulation> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must be in (0,1), got {alpha}")));
    }
    if draws < 1000 {
        return Err(Error::InvalidArgument(format!("need at least 1000 draws, got {draws}")));
    }
    let n = vhat.nrows();
    if let Some(w) = weights {
        if w.len() != n {
            return Err(Error::DimensionMismatch {
                axis: "weight length",
                expected: n,
                got: w.len(),
            });
        }
    }
    let scale = 1.0 / (n as f64).sqrt();
    let mut maxima: Vec<f64> = (0..draws)
        .into_par_iter()
        .map(|r| {
            let mut src = NormalSource::from_stream(seed, streams::MC_BASE + r as u64);
            let mut g = Array1::<f64>::zeros(n);
            for v in g.iter_mut() {
                *v = src.next();
            }
            if let Some(w) = weights {
                g *= w;
            }
            let xi = vhat.t().dot(&g);
            xi.iter().fold(0.0f64, |m, v| m.max(v.abs())) * scale
        })
        .collect();
    maxima.sort_by(|a, b| a.partial_cmp(b).expect("maxima are finite"));
    let idx = (((1.0 - alpha) * draws as f64).ceil() as usize).clamp(1, draws);
    let critical_value = maxima[idx - 1];
    Ok(MaxSimulation { maxima, critical_value })
}

/// Runs the full test pipeline under a given strategy.
pub fn run_test(
    data: &TwoSampleData,
    alpha: f64,
    config: &TestConfig,
    variant: Variant,
) -> Result<TestResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must be in (0,1), got {alpha}")));
    }
    let strategy = strategy_for(variant);
    let conv = convolve(data);
    let eta = match config.eta {
        Some(e) if e > 0.0 => e,
        Some(e) => {
            return Err(Error::InvalidArgument(format!("eta override must be positive, got {e}")))
        }
        None => adds::eta_adaptive(&conv.w)?,
    };
    let theta_fit = strategy.fit_theta(&conv, eta, config)?;
    let pi_est = estimate_pi(&conv, eta)?;
    let t_n = test_statistic(&pi_est, &theta_fit)?;
    let weights = if config.weighted_qhat {
        Some(theta_fit.residuals.mapv(|v| v / theta_fit.sigma_hat))
    } else {
        None
    };
    let sim =
        simulate_max_quantile(&pi_est.vhat, alpha, config.draws, config.seed, weights.as_ref())?;
    let p_value = sim.tail_fraction(t_n);
    Ok(TestResult {
        t_n,
        critical_value: sim.critical_value,
        alpha,
        p_value,
        reject: t_n > sim.critical_value,
        sigma_hat_u: theta_fit.sigma_hat,
        variant,
        sim_draws: config.draws,
        seed: config.seed,
        diagnostics: TestDiagnostics {
            eta,
            mu: strategy.mu(conv.n(), conv.p(), config),
            degenerate_columns: pi_est.degenerate_cols.len(),
            theta_path_solves: theta_fit.n_path_solves,
            pi_path_solves: pi_est.n_path_solves,
        },
    })
}

/// Gaussian-design test.
pub fn run_tiers(data: &TwoSampleData, alpha: f64, config: &TestConfig) -> Result<TestResult> {
    run_test(data, alpha, config, Variant::Tiers)
}

/// Sub-Gaussian-design test with the residual sup-norm constraint.
pub fn run_tiers_plus(data: &TwoSampleData, alpha: f64, config: &TestConfig) -> Result<TestResult> {
    run_test(data, alpha, config, Variant::TiersPlus)
}

/// Worst violation of the per-column feasibility contract
/// `||n^-1 W'(Z_j - W pi_j)||_inf <= eta sigma_j + tol` over fitted
/// columns (negative when every column satisfies it). Exposed for tests.
pub fn pi_feasibility_gap(conv: &ConvolvedData, pi_est: &PiEstimate, eta: f64) -> f64 {
    let n = conv.n() as f64;
    let corr = conv.w.t().dot(&pi_est.vhat).mapv(|v| v / n);
    let mut worst = f64::NEG_INFINITY;
    for j in 0..conv.p() {
        if pi_est.degenerate_cols.contains(&j) {
            continue;
        }
        let sup = corr.column(j).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let slack =
            eta * pi_est.sigma_tilde_cols[j] + tol_feas(eta, pi_est.sigma_tilde_cols[j]) - sup;
        worst = worst.max(-slack);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn small_gaussian_data(seed: u64, n: usize, p: usize) -> TwoSampleData {
        let mut a = NormalSource::from_stream(seed, 0);
        let mut b = NormalSource::from_stream(seed, 1);
        let x_a = Array2::from_shape_fn((n, p), |_| a.next());
        let x_b = Array2::from_shape_fn((n, p), |_| b.next());
        let y_a = Array1::from_shape_fn(n, |_| a.next());
        let y_b = Array1::from_shape_fn(n, |_| b.next());
        TwoSampleData::new(x_a, y_a, x_b, y_b).unwrap()
    }

    fn empty_pi(n: usize, p: usize) -> PiEstimate {
        PiEstimate {
            pi: Array2::zeros((p, p)),
            sigma_tilde_cols: Array1::zeros(p),
            vhat: Array2::zeros((n, p)),
            degenerate_cols: vec![],
            n_path_solves: 0,
        }
    }

    #[test]
    fn qhat_zero_and_rank_one() {
        let pi = empty_pi(4, 3);
        assert!(qhat(&pi).iter().all(|&v| v == 0.0));

        let mut vhat = Array2::<f64>::zeros((4, 3));
        vhat[(1, 0)] = 2.0;
        vhat[(1, 1)] = -1.0;
        vhat[(1, 2)] = 0.5;
        let pi = PiEstimate { vhat, ..pi };
        let q = qhat(&pi);
        let r = array![2.0, -1.0, 0.5];
        for i in 0..3 {
            for j in 0..3 {
                assert!((q[(i, j)] - r[i] * r[j] / 4.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn qhat_matches_triple_loop() {
        let mut src = NormalSource::from_stream(21, 0);
        let vhat = Array2::from_shape_fn((5, 3), |_| src.next());
        let pi = PiEstimate { vhat: vhat.clone(), ..empty_pi(5, 3) };
        let q = qhat(&pi);
        for j in 0..3 {
            for k in 0..3 {
                let mut s = 0.0;
                for i in 0..5 {
                    s += vhat[(i, j)] * vhat[(i, k)];
                }
                assert!((q[(j, k)] - s / 5.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn statistic_matches_scalar_loop_on_hand_instance() {
        // n = 3, p = 2 with injected nuisance estimates.
        let vhat = array![[0.3, -1.1], [0.7, 0.2], [-0.4, 0.9]];
        let residuals = array![1.0, -2.0, 0.5];
        let sigma_hat = 0.8;
        let pi = PiEstimate { vhat: vhat.clone(), ..empty_pi(3, 2) };
        let theta = AddsFit {
            b: Array1::zeros(2),
            sigma_tilde: 1.0,
            sigma_hat,
            residuals: residuals.clone(),
            n_path_solves: 0,
            search_trace: vec![],
        };
        let t = test_statistic(&pi, &theta).unwrap();
        let mut best = 0.0f64;
        for j in 0..2 {
            let mut s = 0.0;
            for i in 0..3 {
                s += vhat[(i, j)] * residuals[i];
            }
            best = best.max(s.abs());
        }
        let want = best / (3.0f64.sqrt() * sigma_hat);
        assert!((t - want).abs() < 1e-12);
    }

    #[test]
    fn statistic_rejects_zero_scale() {
        let pi = empty_pi(3, 2);
        let theta = AddsFit {
            b: Array1::zeros(2),
            sigma_tilde: 0.0,
            sigma_hat: 0.0,
            residuals: Array1::zeros(3),
            n_path_solves: 0,
            search_trace: vec![],
        };
        assert!(matches!(test_statistic(&pi, &theta), Err(Error::DegenerateStatistic)));
    }

    #[test]
    fn simulator_zero_vhat_gives_zero_critical_value() {
        let vhat = Array2::<f64>::zeros((5, 3));
        let sim = simulate_max_quantile(&vhat, 0.05, 1000, 1, None).unwrap();
        assert_eq!(sim.critical_value, 0.0);
        assert_eq!(sim.tail_fraction(0.1), 0.0);
        assert_eq!(sim.tail_fraction(0.0), 1.0);
    }

    #[test]
    fn simulator_rejects_bad_arguments() {
        let vhat = Array2::<f64>::zeros((5, 3));
        assert!(simulate_max_quantile(&vhat, 0.0, 1000, 1, None).is_err());
        assert!(simulate_max_quantile(&vhat, 0.05, 10, 1, None).is_err());
    }

    #[test]
    fn critical_value_monotone_in_alpha() {
        let mut src = NormalSource::from_stream(30, 0);
        let vhat = Array2::from_shape_fn((20, 10), |_| src.next());
        let seed = 9;
        let c10 = simulate_max_quantile(&vhat, 0.10, 2000, seed, None).unwrap().critical_value;
        let c05 = simulate_max_quantile(&vhat, 0.05, 2000, seed, None).unwrap().critical_value;
        let c01 = simulate_max_quantile(&vhat, 0.01, 2000, seed, None).unwrap().critical_value;
        assert!(c01 >= c05 && c05 >= c10);
    }

    #[test]
    fn identical_samples_error_not_crash() {
        let n = 12;
        let p = 6;
        let mut src = NormalSource::from_stream(33, 0);
        let x = Array2::from_shape_fn((n, p), |_| src.next());
        let mut ya = Array1::from_shape_fn(n, |_| src.next());
        ya[0] += 1.0;
        let data = TwoSampleData::new(x.clone(), ya.clone(), x, ya).unwrap();
        let err = run_tiers(&data, 0.05, &TestConfig::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateFit { stage: "pi estimation", .. }), "{err}");
    }

    #[test]
    fn degenerate_pi_columns_are_flagged() {
        let n = 10;
        let p = 4;
        let data = small_gaussian_data(40, n, p);
        let mut conv = convolve(&data);
        // Force one zero column of Z.
        conv.z.column_mut(2).fill(0.0);
        let eta = adds::eta_adaptive(&conv.w).unwrap();
        let est = estimate_pi(&conv, eta).unwrap();
        assert_eq!(est.degenerate_cols, vec![2]);
        assert!(est.pi.column(2).iter().all(|&v| v == 0.0));
        assert!(est.vhat.column(2).iter().all(|&v| v == 0.0));
        // Feasibility contract holds on the fitted columns.
        assert!(pi_feasibility_gap(&conv, &est, eta) <= 0.0);
    }

    #[test]
    fn theta_zero_response_errors() {
        let data = small_gaussian_data(41, 8, 3);
        let mut conv = convolve(&data);
        conv.y.fill(0.0);
        let eta = adds::eta_adaptive(&conv.w).unwrap();
        assert!(matches!(
            estimate_theta(&conv, eta),
            Err(Error::DegenerateFit { stage: "theta estimation", .. })
        ));
    }

    #[test]
    fn theta_scale_doubles_with_response() {
        let data = small_gaussian_data(42, 20, 8);
        let conv = convolve(&data);
        let eta = adds::eta_adaptive(&conv.w).unwrap();
        let base = estimate_theta(&conv, eta).unwrap();
        let mut scaled_conv = conv.clone();
        scaled_conv.y.mapv_inplace(|v| 2.0 * v);
        let scaled = estimate_theta(&scaled_conv, eta).unwrap();
        assert!((scaled.sigma_hat - 2.0 * base.sigma_hat).abs() < 1e-9 * (1.0 + base.sigma_hat));
    }

    #[test]
    fn huge_mu_matches_unconstrained_theta() {
        let data = small_gaussian_data(43, 15, 6);
        let conv = convolve(&data);
        let eta = adds::eta_adaptive(&conv.w).unwrap();
        let plain = estimate_theta(&conv, eta).unwrap();
        let plus = estimate_theta_plus(&conv, eta, 1e12).unwrap();
        assert!((plain.sigma_hat - plus.sigma_hat).abs() <= 1e-6 * (1.0 + plain.sigma_hat));
        for (a, b) in plain.b.iter().zip(plus.b.iter()) {
            assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn theta_plus_residual_bound_holds() {
        let data = small_gaussian_data(44, 20, 10);
        let conv = convolve(&data);
        let eta = adds::eta_adaptive(&conv.w).unwrap();
        let mu = 3.0;
        let fit = estimate_theta_plus(&conv, eta, mu).unwrap();
        let sup = fit.residuals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(sup <= mu * fit.sigma_tilde + tol_feas(eta, fit.sigma_tilde).max(1e-9));
    }

    #[test]
    fn run_test_seeded_and_consistent() {
        let data = small_gaussian_data(45, 16, 8);
        let cfg = TestConfig { draws: 1000, seed: 5, ..Default::default() };
        let r1 = run_tiers(&data, 0.05, &cfg).unwrap();
        let r2 = run_tiers(&data, 0.05, &cfg).unwrap();
        assert_eq!(r1.t_n.to_bits(), r2.t_n.to_bits());
        assert_eq!(r1.critical_value.to_bits(), r2.critical_value.to_bits());
        assert_eq!(r1.reject, r2.reject);
        assert_eq!(r1.reject, r1.t_n > r1.critical_value);
        assert!(r1.p_value >= 0.0 && r1.p_value <= 1.0);
        // Reject iff p below alpha, up to the 1/R quantile discretization.
        let slack = 1.0 / cfg.draws as f64 + 1e-12;
        if r1.reject {
            assert!(r1.p_value < r1.alpha + slack);
        } else {
            assert!(r1.p_value >= r1.alpha - slack);
        }
    }

    #[test]
    fn strategy_registry_roundtrip() {
        for s in strategies() {
            let found = strategy_by_name(s.variant().name()).unwrap();
            assert_eq!(found.variant(), s.variant());
        }
        assert!(strategy_by_name("bogus").is_err());
        assert_eq!(Variant::from_name("tiers-plus").unwrap(), Variant::TiersPlus);
    }

    #[test]
    fn constant_weights_scale_the_simulation() {
        let mut src = NormalSource::from_stream(50, 0);
        let vhat = Array2::from_shape_fn((10, 4), |_| src.next());
        let w = Array1::from_elem(10, 2.0);
        let plain = simulate_max_quantile(&vhat, 0.05, 1000, 3, None).unwrap();
        let weighted = simulate_max_quantile(&vhat, 0.05, 1000, 3, Some(&w)).unwrap();
        assert!((weighted.critical_value - 2.0 * plain.critical_value).abs() < 1e-12);
    }
}
