//! The l1-minimization program behind the Dantzig-selector family:
//!
//! ```text
//! minimize ||b||_1
//! subject to ||n^-1 G'(H - G b)||_inf <= eta * sigma          (always)
//!            ||H - G b||_inf          <= mu  * sigma          (optional)
//! ```
//!
//! solved as a linear program for a fixed scale `sigma`. The solver keeps
//! the scale as a parameter so a caller can re-solve along a decreasing
//! sigma path reusing the previous basis (see [`PathSolver`]).
//!
//! Internally the program is written with bounded slacks,
//! `A(b+ - b-) + s = c + eta*sigma, 0 <= s <= 2*eta*sigma`, where
//! `A = n^-1 G'G` and `c = n^-1 G'H`. The all-slack basis is dual feasible
//! for every sigma, so a dual simplex drives the whole path; no phase-1 is
//! ever needed.

mod simplex;

use std::sync::Arc;

use ndarray::{Array1, Array2};

use crate::{Error, Result};
use simplex::{LpData, SolveOutcome, Workspace};

/// Precomputed design quantities shared by many solves on the same `G`:
/// the transposed design and the normalized Gram matrix `n^-1 G'G`.
///
/// Column-wise estimators fit `p` problems against one design; sharing the
/// Gram matrix keeps that linear instead of cubic in `p`.
#[derive(Clone)]
pub struct SharedDesign {
    pub(crate) gt: Arc<Array2<f64>>,
    pub(crate) gram: Arc<Array2<f64>>,
    n: usize,
    p: usize,
}

impl SharedDesign {
    pub fn new(g: &Array2<f64>) -> Self {
        let n = g.nrows();
        let p = g.ncols();
        let gt = g.t().to_owned();
        let gram = gt.dot(g).mapv(|v| v / n as f64);
        Self { gt: Arc::new(gt), gram: Arc::new(gram), n, p }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }
}

/// Additional constraint set placed on the estimator, beyond the
/// correlation bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SideConstraint {
    /// No extra constraint.
    None,
    /// `||H - G b||_inf <= mu * sigma`, the non-Gaussian-design guard.
    ResidualSupNorm { mu: f64 },
}

/// A parameterized l1-minimization instance.
#[derive(Debug, Clone)]
pub struct DantzigProblem {
    pub g: Array2<f64>,
    pub h: Array1<f64>,
    pub eta: f64,
    pub side_constraint: SideConstraint,
}

impl DantzigProblem {
    pub fn new(
        g: Array2<f64>,
        h: Array1<f64>,
        eta: f64,
        side_constraint: SideConstraint,
    ) -> Result<Self> {
        let n = g.nrows();
        if h.len() != n {
            return Err(Error::DimensionMismatch {
                axis: "response length",
                expected: n,
                got: h.len(),
            });
        }
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidArgument(format!("eta must be positive, got {eta}")));
        }
        if let SideConstraint::ResidualSupNorm { mu } = side_constraint {
            if !(mu > 0.0) || !mu.is_finite() {
                return Err(Error::InvalidArgument(format!("mu must be positive, got {mu}")));
            }
        }
        if g.iter().any(|v| !v.is_finite()) || h.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite entries in problem data".into()));
        }
        Ok(Self { g, h, eta, side_constraint })
    }

    pub fn n(&self) -> usize {
        self.g.nrows()
    }

    pub fn p(&self) -> usize {
        self.g.ncols()
    }
}

/// Outcome of one solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
}

/// Feasibility tolerance contract: `1e-7 * max(1, eta * sigma)`.
pub fn tol_feas(eta: f64, sigma: f64) -> f64 {
    1e-7 * (eta * sigma).max(1.0)
}

/// An optimal vertex (or an infeasibility certificate) of the program.
#[derive(Debug, Clone)]
pub struct DantzigSolution {
    /// The coefficient vector `b+ - b-`; zeros when infeasible.
    pub b: Array1<f64>,
    /// l1 objective at the vertex (sum of the split variables).
    pub objective: f64,
    pub status: SolveStatus,
    /// `eta*sigma - ||n^-1 G'(H - G b)||_inf`, recomputed from `b`.
    pub constraint_slack: f64,
    /// Row duals of the equality form; used by [`certify_optimality`].
    pub row_duals: Array1<f64>,
    /// Simplex pivots spent on this solve.
    pub iterations: usize,
}

/// Re-solvable LP with warm starts along a sigma path.
///
/// `solve` may be called with any sequence of scales; the basis of the
/// previous call seeds the next one. A fresh solver per problem gives the
/// deterministic cold-start behaviour of [`solve_at_sigma`].
pub struct PathSolver {
    data: LpData,
    ws: Workspace,
}

impl PathSolver {
    pub fn new(prob: &DantzigProblem) -> Result<Self> {
        Self::from_shared(
            &SharedDesign::new(&prob.g),
            prob.h.clone(),
            prob.eta,
            prob.side_constraint,
        )
    }

    /// Builds a solver against a precomputed design, avoiding the Gram
    /// recomputation when many responses share one `G`.
    pub fn from_shared(
        design: &SharedDesign,
        h: Array1<f64>,
        eta: f64,
        side_constraint: SideConstraint,
    ) -> Result<Self> {
        let n = design.n();
        let p = design.p();
        if n == 0 || p == 0 {
            return Err(Error::InvalidArgument("empty design matrix".into()));
        }
        if h.len() != n {
            return Err(Error::DimensionMismatch {
                axis: "response length",
                expected: n,
                got: h.len(),
            });
        }
        let corr = design.gt.dot(&h).mapv(|v| v / n as f64);
        let (mu, n_side) = match side_constraint {
            SideConstraint::None => (0.0, 0),
            SideConstraint::ResidualSupNorm { mu } => (mu, n),
        };
        let data = LpData {
            p,
            n_side,
            a: Arc::clone(&design.gram),
            gt: Arc::clone(&design.gt),
            corr,
            h,
            eta,
            mu,
        };
        let ws = Workspace::new(&data);
        Ok(Self { data, ws })
    }

    /// Solves at the given scale, warm-starting from the previous basis.
    pub fn solve(&mut self, sigma: f64) -> Result<DantzigSolution> {
        if !(sigma >= 0.0) {
            return Err(Error::InvalidArgument(format!("sigma must be >= 0, got {sigma}")));
        }
        let outcome = self.ws.solve(&self.data, sigma)?;
        let p = self.data.p;
        let mut b = Array1::<f64>::zeros(p);
        for j in 0..p {
            b[j] = self.ws.var_value(j) - self.ws.var_value(p + j);
        }
        let objective: f64 = (0..2 * p).map(|j| self.ws.var_value(j)).sum();
        let corr_res = &self.data.corr - &self.data.a.dot(&b);
        let sup = corr_res.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let status = match outcome {
            SolveOutcome::Optimal => SolveStatus::Optimal,
            SolveOutcome::Infeasible => SolveStatus::Infeasible,
        };
        Ok(DantzigSolution {
            b: if status == SolveStatus::Optimal { b } else { Array1::zeros(p) },
            objective: if status == SolveStatus::Optimal { objective } else { f64::NAN },
            status,
            constraint_slack: self.data.eta * sigma - sup,
            row_duals: self.ws.row_duals(&self.data),
            iterations: self.ws.last_pivots(),
        })
    }

    /// Residuals `H - G b` for a coefficient vector.
    pub fn residuals(&self, b: &Array1<f64>) -> Array1<f64> {
        &self.data.h - &self.data.gt.t().dot(b)
    }
}

/// One-shot solve with a cold start; bit-deterministic in its inputs.
pub fn solve_at_sigma(prob: &DantzigProblem, sigma: f64) -> Result<DantzigSolution> {
    PathSolver::new(prob)?.solve(sigma)
}

/// Checks primal feasibility, dual feasibility and complementary
/// slackness of a returned solution, plus the strong-duality gap.
/// Returns `false` on any violation; meant for the test suite rather than
/// the hot path.
pub fn certify_optimality(prob: &DantzigProblem, sigma: f64, sol: &DantzigSolution) -> bool {
    if sol.status != SolveStatus::Optimal {
        return false;
    }
    let n = prob.n() as f64;
    let p = prob.p();
    let a = prob.g.t().dot(&prob.g).mapv(|v| v / n);
    let corr = prob.g.t().dot(&prob.h).mapv(|v| v / n);
    let corr_res = &corr - &a.dot(&sol.b);
    let bound = prob.eta * sigma;
    let tol = tol_feas(prob.eta, sigma);

    // Primal feasibility.
    if corr_res.iter().any(|v| v.abs() > bound + tol) {
        return false;
    }
    let resid = &prob.h - &prob.g.dot(&sol.b);
    let mut side_bound = None;
    if let SideConstraint::ResidualSupNorm { mu } = prob.side_constraint {
        let sb = mu * sigma;
        if resid.iter().any(|v| v.abs() > sb + 1e-7 * sb.max(1.0)) {
            return false;
        }
        side_bound = Some(sb);
    }

    // Dual feasibility: |A y1 + G y2|_j <= 1 on the coefficient columns.
    let y = &sol.row_duals;
    if y.len() != p + side_bound.map_or(0, |_| prob.n()) {
        return false;
    }
    let y1 = y.slice(ndarray::s![..p]).to_owned();
    let mut t = a.dot(&y1);
    if side_bound.is_some() {
        let y2 = y.slice(ndarray::s![p..]).to_owned();
        t = &t + &prob.g.t().dot(&y2);
    }
    if t.iter().any(|v| v.abs() > 1.0 + 1e-6) {
        return false;
    }

    // Complementary slackness on coefficients: an active coordinate pins
    // its dual constraint.
    let bscale = sol.b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for j in 0..p {
        if sol.b[j] > 1e-7 * bscale && t[j] < 1.0 - 1e-5 {
            return false;
        }
        if sol.b[j] < -1e-7 * bscale && t[j] > -1.0 + 1e-5 {
            return false;
        }
    }
    // Complementary slackness on rows: a priced row must sit at its bound.
    let row_tol = 1e-6 * bound.max(1.0);
    for i in 0..p {
        if y[i] > 1e-7 && corr_res[i] < bound - row_tol {
            return false;
        }
        if y[i] < -1e-7 && corr_res[i] > -bound + row_tol {
            return false;
        }
    }
    if let Some(sb) = side_bound {
        let row_tol = 1e-6 * sb.max(1.0);
        for i in 0..prob.n() {
            let yi = y[p + i];
            if yi > 1e-7 && resid[i] < sb - row_tol {
                return false;
            }
            if yi < -1e-7 && resid[i] > -sb + row_tol {
                return false;
            }
        }
    }

    // Strong duality: q'y - sum_i u_i max(y_i, 0) == objective.
    let mut dual_obj = 0.0;
    for i in 0..p {
        let q = corr[i] + bound;
        dual_obj += q * y[i] - 2.0 * bound * y[i].max(0.0);
    }
    if let Some(sb) = side_bound {
        for i in 0..prob.n() {
            let q = prob.h[i] + sb;
            dual_obj += q * y[p + i] - 2.0 * sb * y[p + i].max(0.0);
        }
    }
    (dual_obj - sol.objective).abs() <= 1e-6 * (1.0 + sol.objective.abs())
}
