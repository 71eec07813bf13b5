//! The Auto-aDaptive Dantzig Selector (ADDS).
//!
//! For a regression `H = G b + e` the estimator couples the solution path
//! `sigma -> b(sigma)` of the l1 program in [`crate::dantzig`] with a
//! search for the largest scale whose residual energy still dominates it:
//!
//! ```text
//! sigma~ = max { sigma >= 0 : ||H - G b(sigma)||_2^2 >= n sigma^2 / 2 }
//! ```
//!
//! The fit returns the path point at `sigma~` together with
//! `sigma^ = ||H - G b~||_2 / sqrt(n)`. The search runs a 32-point
//! geometric grid downward from `sigma_upper = sqrt(2) ||H||_2 / sqrt(n)`
//! (above which even a zero fit violates the energy constraint), then
//! bisects between the largest feasible grid point and its infeasible
//! neighbour to a relative tolerance of 1e-4. Every probe is recorded in
//! `search_trace` so a non-monotone residual path is visible instead of
//! silently mis-returned.

use ndarray::{Array1, Array2};

use crate::dantzig::{DantzigProblem, PathSolver, SharedDesign, SideConstraint, SolveStatus};
use crate::{Error, Result};

const GRID_POINTS: usize = 32;
const BISECT_REL_TOL: f64 = 1e-4;

/// A fitted ADDS triple plus search diagnostics.
#[derive(Debug, Clone)]
pub struct AddsFit {
    /// Coefficients at the selected scale.
    pub b: Array1<f64>,
    /// Selected scale (the argmax of the energy-constrained search).
    pub sigma_tilde: f64,
    /// `||H - G b||_2 / sqrt(n)`.
    pub sigma_hat: f64,
    /// `H - G b`.
    pub residuals: Array1<f64>,
    /// LP solves spent on the path search.
    pub n_path_solves: usize,
    /// `(sigma, feasible)` per probe, in evaluation order.
    pub search_trace: Vec<(f64, bool)>,
}

struct Probe {
    feasible: bool,
    b: Option<Array1<f64>>,
    residuals: Option<Array1<f64>>,
}

fn probe(solver: &mut PathSolver, n: usize, sigma: f64) -> Result<Probe> {
    let sol = solver.solve(sigma)?;
    if sol.status != SolveStatus::Optimal {
        return Ok(Probe { feasible: false, b: None, residuals: None });
    }
    let residuals = solver.residuals(&sol.b);
    let energy = residuals.iter().map(|v| v * v).sum::<f64>();
    let feasible = energy >= n as f64 * sigma * sigma / 2.0;
    Ok(Probe {
        feasible,
        b: Some(sol.b),
        residuals: Some(residuals),
    })
}

/// Fits the estimator on the given problem.
///
/// `H = 0` short-circuits to the all-zero fit with `sigma~ = sigma^ = 0`
/// (the energy constraint holds only at zero there). A search bracket with
/// no feasible scale at all is reported as a degenerate fit carrying the
/// probe trace.
pub fn fit(prob: &DantzigProblem) -> Result<AddsFit> {
    let h_norm = prob.h.iter().map(|v| v * v).sum::<f64>().sqrt();
    if h_norm == 0.0 {
        return Ok(zero_fit(prob.n(), prob.p()));
    }
    fit_inner(PathSolver::new(prob)?, prob.n(), h_norm)
}

/// [`fit`] against a precomputed design, for column-wise estimators that
/// reuse one `G` across many responses.
pub fn fit_shared(
    design: &SharedDesign,
    h: Array1<f64>,
    eta: f64,
    side_constraint: SideConstraint,
) -> Result<AddsFit> {
    let h_norm = h.iter().map(|v| v * v).sum::<f64>().sqrt();
    if h_norm == 0.0 {
        return Ok(zero_fit(design.n(), design.p()));
    }
    let n = design.n();
    fit_inner(PathSolver::from_shared(design, h, eta, side_constraint)?, n, h_norm)
}

fn zero_fit(n: usize, p: usize) -> AddsFit {
    AddsFit {
        b: Array1::zeros(p),
        sigma_tilde: 0.0,
        sigma_hat: 0.0,
        residuals: Array1::zeros(n),
        n_path_solves: 0,
        search_trace: Vec::new(),
    }
}

fn fit_inner(mut solver: PathSolver, n: usize, h_norm: f64) -> Result<AddsFit> {
    let sigma_upper = 2f64.sqrt() * h_norm / (n as f64).sqrt() + 1e-9;
    let sigma_lo = (sigma_upper * 1e-6).max(1e-300);
    let ratio = (sigma_upper / sigma_lo).powf(1.0 / (GRID_POINTS as f64 - 1.0));

    let mut trace: Vec<(f64, bool)> = Vec::new();
    let mut solves = 0usize;

    // Walk the grid from the top; the first feasible point is the largest.
    let mut feasible_at: Option<(f64, Probe)> = None;
    let mut infeasible_above: Option<f64> = None;
    for idx in (0..GRID_POINTS).rev() {
        let sigma = if idx == GRID_POINTS - 1 {
            sigma_upper
        } else {
            sigma_lo * ratio.powi(idx as i32)
        };
        let pr = probe(&mut solver, n, sigma)?;
        solves += 1;
        trace.push((sigma, pr.feasible));
        if pr.feasible {
            feasible_at = Some((sigma, pr));
            break;
        }
        infeasible_above = Some(sigma);
    }

    let Some((mut lo, mut best)) = feasible_at else {
        return Err(Error::DegenerateFit {
            stage: "scale search",
            detail: format!(
                "no feasible scale in [{sigma_lo:.3e}, {sigma_upper:.3e}]"
            ),
            trace_len: trace.len(),
        });
    };

    if let Some(mut hi) = infeasible_above {
        while hi - lo > BISECT_REL_TOL * lo {
            let mid = 0.5 * (lo + hi);
            let pr = probe(&mut solver, n, mid)?;
            solves += 1;
            trace.push((mid, pr.feasible));
            if pr.feasible {
                lo = mid;
                best = pr;
            } else {
                hi = mid;
            }
        }
    }

    let b = best.b.expect("feasible probe retains its solution");
    let residuals = best.residuals.expect("feasible probe retains residuals");
    let sigma_hat = residuals.iter().map(|v| v * v).sum::<f64>().sqrt() / (n as f64).sqrt();
    Ok(AddsFit {
        b,
        sigma_tilde: lo,
        sigma_hat,
        residuals,
        n_path_solves: solves,
        search_trace: trace,
    })
}

/// Scale-free tuning value `sqrt(2 log(p) / n) * max_j ||G_j||_2 / sqrt(n)`.
pub fn eta_adaptive(g: &Array2<f64>) -> Result<f64> {
    let n = g.nrows();
    let p = g.ncols();
    if n == 0 || p == 0 {
        return Err(Error::InvalidArgument("empty design matrix".into()));
    }
    let mut max_norm = 0.0f64;
    for j in 0..p {
        let norm = g.column(j).iter().map(|v| v * v).sum::<f64>().sqrt();
        max_norm = max_norm.max(norm);
    }
    if max_norm == 0.0 {
        return Err(Error::InvalidArgument(
            "all design columns are zero; adaptive eta undefined".into(),
        ));
    }
    Ok((2.0 * (p as f64).ln() / n as f64).sqrt() * max_norm / (n as f64).sqrt())
}
