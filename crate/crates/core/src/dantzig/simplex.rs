//! Dense revised dual simplex on the bounded-slack form of the
//! l1-minimization LP.
//!
//! Standard form solved here:
//!
//! ```text
//! min  sum(b+) + sum(b-)
//! s.t. A (b+ - b-) + s = c + eta*sigma,   0 <= s  <= 2*eta*sigma
//!      G (b+ - b-) + t = H + mu*sigma,    0 <= t  <= 2*mu*sigma   (side rows)
//!      b+, b- >= 0
//! ```
//!
//! Reduced costs do not depend on sigma (only the right-hand side and the
//! slack bounds do), so any optimal basis stays dual feasible when sigma
//! changes; the all-slack start is dual feasible as well. Pivoting is
//! deterministic: leaving row by largest bound violation, entering column
//! by the dual ratio test with lowest-index tie-breaking. After a stall of
//! 50 degenerate pivots the engine switches to Bland-style lowest-index
//! leaving rows until the solve completes.

use std::sync::Arc;

use ndarray::{Array1, Array2};

use crate::linalg::invert_dense;
use crate::{Error, Result};

const STALL_THRESHOLD: usize = 50;
const REFACTOR_EVERY: usize = 64;

pub(crate) struct LpData {
    pub p: usize,
    /// Number of residual sup-norm rows (0 or n).
    pub n_side: usize,
    /// `n^-1 G'G`, symmetric p x p.
    pub a: Arc<Array2<f64>>,
    /// `G'`, p x n; row j is the j-th column of G.
    pub gt: Arc<Array2<f64>>,
    /// `n^-1 G'H`.
    pub corr: Array1<f64>,
    pub h: Array1<f64>,
    pub eta: f64,
    pub mu: f64,
}

impl LpData {
    fn rows(&self) -> usize {
        self.p + self.n_side
    }

    pub fn nvars(&self) -> usize {
        2 * self.p + self.rows()
    }

    /// Column of the constraint matrix for a variable index.
    fn fill_column(&self, var: usize, out: &mut Array1<f64>) {
        let p = self.p;
        out.fill(0.0);
        if var < 2 * p {
            let (j, sign) = if var < p { (var, 1.0) } else { (var - p, -1.0) };
            for (i, v) in self.a.row(j).iter().enumerate() {
                out[i] = sign * v;
            }
            if self.n_side > 0 {
                for (i, v) in self.gt.row(j).iter().enumerate() {
                    out[p + i] = sign * v;
                }
            }
        } else {
            out[var - 2 * p] = 1.0;
        }
    }

    /// Upper bound of a variable at the given scale.
    fn upper(&self, var: usize, sigma: f64) -> f64 {
        let p = self.p;
        if var < 2 * p {
            f64::INFINITY
        } else if var - 2 * p < p {
            2.0 * self.eta * sigma
        } else {
            2.0 * self.mu * sigma
        }
    }

    /// Right-hand side of the equality rows at the given scale.
    fn rhs(&self, sigma: f64) -> Array1<f64> {
        let m = self.rows();
        let mut q = Array1::<f64>::zeros(m);
        for i in 0..self.p {
            q[i] = self.corr[i] + self.eta * sigma;
        }
        for i in 0..self.n_side {
            q[self.p + i] = self.h[i] + self.mu * sigma;
        }
        q
    }
}

pub(crate) enum SolveOutcome {
    Optimal,
    Infeasible,
}

pub(crate) struct Workspace {
    m: usize,
    basis: Vec<usize>,
    /// var -> basis row, or usize::MAX when nonbasic.
    pos: Vec<usize>,
    at_upper: Vec<bool>,
    /// Value of a nonbasic at-upper variable at the current sigma.
    upper_value: Vec<f64>,
    binv: Array2<f64>,
    xb: Array1<f64>,
    /// Reduced costs, meaningful for nonbasic variables.
    d: Vec<f64>,
    sigma: f64,
    last_pivots: usize,
    col: Array1<f64>,
    alpha: Vec<f64>,
}

impl Workspace {
    pub fn new(data: &LpData) -> Self {
        let m = data.rows();
        let nv = data.nvars();
        let basis: Vec<usize> = (0..m).map(|i| 2 * data.p + i).collect();
        let mut pos = vec![usize::MAX; nv];
        for (i, &v) in basis.iter().enumerate() {
            pos[v] = i;
        }
        // All-slack basis: y = 0, so reduced costs equal the objective.
        let mut d = vec![0.0; nv];
        for dj in d.iter_mut().take(2 * data.p) {
            *dj = 1.0;
        }
        Self {
            m,
            basis,
            pos,
            at_upper: vec![false; nv],
            upper_value: vec![0.0; nv],
            binv: Array2::eye(m),
            xb: Array1::zeros(m),
            d,
            sigma: 0.0,
            last_pivots: 0,
            col: Array1::zeros(m),
            alpha: vec![0.0; nv],
        }
    }

    /// Primal value of any variable in the current basis state.
    pub fn var_value(&self, var: usize) -> f64 {
        if self.pos[var] != usize::MAX {
            self.xb[self.pos[var]]
        } else if self.at_upper[var] {
            self.upper_value[var]
        } else {
            0.0
        }
    }

    /// Row duals `y` with sign convention `d_j = c_j - y'M_j`.
    pub fn row_duals(&self, data: &LpData) -> Array1<f64> {
        let mut y = Array1::<f64>::zeros(self.m);
        for (i, &v) in self.basis.iter().enumerate() {
            if v < 2 * data.p {
                // Objective coefficient 1 on split coefficient variables.
                y += &self.binv.row(i);
            }
        }
        y
    }

    pub fn last_pivots(&self) -> usize {
        self.last_pivots
    }

    fn recompute_xb(&mut self, data: &LpData) {
        let mut q = data.rhs(self.sigma);
        for var in 2 * data.p..data.nvars() {
            if self.pos[var] == usize::MAX && self.at_upper[var] {
                q[var - 2 * data.p] -= self.upper_value[var];
            }
        }
        self.xb = self.binv.dot(&q);
    }

    fn refactorize(&mut self, data: &LpData) -> Result<()> {
        let m = self.m;
        let mut bmat = Array2::<f64>::zeros((m, m));
        let mut col = Array1::<f64>::zeros(m);
        for (i, &v) in self.basis.iter().enumerate() {
            data.fill_column(v, &mut col);
            bmat.column_mut(i).assign(&col);
        }
        self.binv = invert_dense(&bmat)?;
        // Rebuild reduced costs from scratch.
        let y = self.row_duals(data);
        let p = data.p;
        let y1 = y.slice(ndarray::s![..p]).to_owned();
        let mut t = data.a.dot(&y1);
        if data.n_side > 0 {
            let y2 = y.slice(ndarray::s![p..]).to_owned();
            t = &t + &data.gt.dot(&y2);
        }
        for j in 0..p {
            self.d[j] = 1.0 - t[j];
            self.d[p + j] = 1.0 + t[j];
        }
        for i in 0..self.m {
            self.d[2 * p + i] = -y[i];
        }
        for &v in &self.basis {
            self.d[v] = 0.0;
        }
        self.recompute_xb(data);
        Ok(())
    }

    pub fn solve(&mut self, data: &LpData, sigma: f64) -> Result<SolveOutcome> {
        self.sigma = sigma;
        for var in 0..data.nvars() {
            self.upper_value[var] = if self.at_upper[var] { data.upper(var, sigma) } else { 0.0 };
        }
        self.recompute_xb(data);
        let feas_scale = (data.eta * sigma).max(data.mu * sigma).max(1.0);
        let eps_p = 1e-9 * feas_scale;
        let max_pivots = 2000 + 60 * self.m + 10 * data.nvars();
        let mut pivots = 0usize;
        let mut since_refactor = 0usize;
        let mut stall = 0usize;
        let mut bland = false;
        let mut retries = 0usize;

        loop {
            let Some((r, below)) = self.choose_leaving(data, sigma, eps_p, bland) else {
                self.last_pivots = pivots;
                return Ok(SolveOutcome::Optimal);
            };
            if pivots >= max_pivots {
                return Err(Error::SolverFailure {
                    iterations: pivots,
                    detail: format!(
                        "pivot limit reached (m={}, sigma={sigma:.3e}, stall={stall})",
                        self.m
                    ),
                });
            }

            // Price the candidate row: alpha_j = (row r of B^-1) . M_j.
            let rho = self.binv.row(r).to_owned();
            let p = data.p;
            let rho1 = rho.slice(ndarray::s![..p]).to_owned();
            let mut t = data.a.dot(&rho1);
            if data.n_side > 0 {
                let rho2 = rho.slice(ndarray::s![p..]).to_owned();
                t = &t + &data.gt.dot(&rho2);
            }
            for j in 0..p {
                self.alpha[j] = t[j];
                self.alpha[p + j] = -t[j];
            }
            for i in 0..self.m {
                self.alpha[2 * p + i] = rho[i];
            }

            // Dual ratio test over nonbasic variables.
            let mut amax = 0.0f64;
            for j in 0..data.nvars() {
                if self.pos[j] == usize::MAX {
                    amax = amax.max(self.alpha[j].abs());
                }
            }
            let eps_a = 1e-11 * amax.max(1.0);
            let mut best: Option<(f64, usize)> = None;
            for j in 0..data.nvars() {
                if self.pos[j] != usize::MAX {
                    continue;
                }
                let aj = self.alpha[j];
                if aj.abs() <= eps_a {
                    continue;
                }
                let lower = !self.at_upper[j];
                let eligible = if below {
                    (lower && aj < 0.0) || (!lower && aj > 0.0)
                } else {
                    (lower && aj > 0.0) || (!lower && aj < 0.0)
                };
                if !eligible {
                    continue;
                }
                let ratio = self.d[j].abs() / aj.abs();
                match best {
                    None => best = Some((ratio, j)),
                    Some((br, _)) if ratio < br * (1.0 - 1e-12) => best = Some((ratio, j)),
                    _ => {}
                }
            }
            let Some((_, entering)) = best else {
                // Dual unbounded: the violated row cannot be repaired.
                self.last_pivots = pivots;
                return Ok(SolveOutcome::Infeasible);
            };

            // FTRAN the entering column.
            data.fill_column(entering, &mut self.col);
            let w = self.binv.dot(&self.col);
            let alpha_e = w[r];
            if alpha_e.abs() <= 1e-11 * (1.0 + amax) {
                // Numerical disagreement with the priced row; refactorize
                // and retry the iteration.
                retries += 1;
                if retries > 3 {
                    return Err(Error::SolverFailure {
                        iterations: pivots,
                        detail: "unstable pivot after refactorization".into(),
                    });
                }
                self.refactorize(data)?;
                continue;
            }
            retries = 0;

            let leaving = self.basis[r];
            let bound_hit = if below { 0.0 } else { data.upper(leaving, sigma) };
            let delta = self.xb[r] - bound_hit;
            let step = delta / alpha_e;
            let entering_start =
                if self.at_upper[entering] { self.upper_value[entering] } else { 0.0 };

            // Primal update.
            for k in 0..self.m {
                if k != r {
                    self.xb[k] -= step * w[k];
                }
            }
            self.xb[r] = entering_start + step;

            // Dual update; alpha is valid for every nonbasic column.
            let dual_step = self.d[entering] / alpha_e;
            if dual_step != 0.0 {
                for j in 0..data.nvars() {
                    if self.pos[j] == usize::MAX {
                        self.d[j] -= dual_step * self.alpha[j];
                    }
                }
            }
            self.d[leaving] = -dual_step;
            self.d[entering] = 0.0;

            // Basis bookkeeping.
            self.pos[leaving] = usize::MAX;
            self.at_upper[leaving] = !below;
            self.upper_value[leaving] = if below { 0.0 } else { data.upper(leaving, sigma) };
            self.basis[r] = entering;
            self.pos[entering] = r;
            self.at_upper[entering] = false;
            self.upper_value[entering] = 0.0;

            // Product-form inverse update.
            let pivval = w[r];
            {
                let mut row_r = self.binv.row_mut(r);
                row_r.mapv_inplace(|v| v / pivval);
            }
            let row_r = self.binv.row(r).to_owned();
            for k in 0..self.m {
                if k == r {
                    continue;
                }
                let f = w[k];
                if f != 0.0 {
                    let mut row_k = self.binv.row_mut(k);
                    for (x, y) in row_k.iter_mut().zip(row_r.iter()) {
                        *x -= f * y;
                    }
                }
            }

            pivots += 1;
            since_refactor += 1;
            if dual_step.abs() <= 1e-12 {
                stall += 1;
                if stall > STALL_THRESHOLD {
                    bland = true;
                }
            } else {
                stall = 0;
            }
            if since_refactor >= REFACTOR_EVERY {
                self.refactorize(data)?;
                since_refactor = 0;
            }
        }
    }

    fn choose_leaving(
        &self,
        data: &LpData,
        sigma: f64,
        eps_p: f64,
        bland: bool,
    ) -> Option<(usize, bool)> {
        let mut pick: Option<(usize, bool)> = None;
        let mut best_metric = eps_p;
        let mut best_var = usize::MAX;
        for i in 0..self.m {
            let var = self.basis[i];
            let v = self.xb[i];
            let hi = data.upper(var, sigma);
            let (viol, below) = if v < -eps_p {
                (-v, true)
            } else if v > hi + eps_p {
                (v - hi, false)
            } else {
                continue;
            };
            if bland {
                if var < best_var {
                    best_var = var;
                    pick = Some((i, below));
                }
            } else if viol > best_metric {
                best_metric = viol;
                pick = Some((i, below));
            }
        }
        pick
    }
}
