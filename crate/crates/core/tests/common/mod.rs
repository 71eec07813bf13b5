//! Shared test support: an exhaustive vertex-enumeration LP oracle that is
//! independent of the simplex implementation, plus small helpers.
//!
//! The oracle rewrites the l1 program in the split variables
//! `x = (b+, b-) in R^{2p}` as a pure inequality system `R x <= r`,
//! enumerates every basic solution (all 2p-subsets of rows solved as
//! linear systems), keeps the feasible ones, and returns the vertex with
//! the least objective `sum(x)`. Feasible only for tiny instances, which
//! is the point: it shares no code path with the production solver.

#![allow(dead_code)]

use ndarray::{Array1, Array2};
use tiers_core::dantzig::{DantzigProblem, SideConstraint};
use tiers_core::rng::NormalSource;

/// Dense Gauss solve with partial pivoting; returns None when singular.
fn gauss_solve(a: &Array2<f64>, b: &Array1<f64>) -> Option<Array1<f64>> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut rhs = b.clone();
    for col in 0..n {
        let mut piv = col;
        let mut best = m[(col, col)].abs();
        for r in (col + 1)..n {
            if m[(r, col)].abs() > best {
                best = m[(r, col)].abs();
                piv = r;
            }
        }
        if best < 1e-10 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap((piv, k), (col, k));
            }
            rhs.swap(piv, col);
        }
        for r in (col + 1)..n {
            let f = m[(r, col)] / m[(col, col)];
            if f != 0.0 {
                for k in col..n {
                    m[(r, k)] -= f * m[(col, k)];
                }
                rhs[r] -= f * rhs[col];
            }
        }
    }
    let mut x = Array1::<f64>::zeros(n);
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for k in (i + 1)..n {
            s -= m[(i, k)] * x[k];
        }
        x[i] = s / m[(i, i)];
    }
    Some(x)
}

/// Inequality system `R x <= r` over the split variables.
pub fn inequality_rows(prob: &DantzigProblem, sigma: f64) -> (Array2<f64>, Array1<f64>) {
    let n = prob.n();
    let p = prob.p();
    let nf = n as f64;
    let a = prob.g.t().dot(&prob.g).mapv(|v| v / nf);
    let c = prob.g.t().dot(&prob.h).mapv(|v| v / nf);
    let side = matches!(prob.side_constraint, SideConstraint::ResidualSupNorm { .. });
    let rows = 4 * p + if side { 2 * n } else { 0 };
    // Layout: correlation rows (+/-), optional residual rows (+/-), nonnegativity.
    let mut rmat = Array2::<f64>::zeros((rows, 2 * p));
    let mut rvec = Array1::<f64>::zeros(rows);
    let mut row = 0;
    for i in 0..p {
        for j in 0..p {
            rmat[(row, j)] = a[(i, j)];
            rmat[(row, p + j)] = -a[(i, j)];
            rmat[(row + 1, j)] = -a[(i, j)];
            rmat[(row + 1, p + j)] = a[(i, j)];
        }
        rvec[row] = prob.eta * sigma + c[i];
        rvec[row + 1] = prob.eta * sigma - c[i];
        row += 2;
    }
    if let SideConstraint::ResidualSupNorm { mu } = prob.side_constraint {
        for i in 0..n {
            for j in 0..p {
                rmat[(row, j)] = prob.g[(i, j)];
                rmat[(row, p + j)] = -prob.g[(i, j)];
                rmat[(row + 1, j)] = -prob.g[(i, j)];
                rmat[(row + 1, p + j)] = prob.g[(i, j)];
            }
            rvec[row] = mu * sigma + prob.h[i];
            rvec[row + 1] = mu * sigma - prob.h[i];
            row += 2;
        }
    }
    for j in 0..2 * p {
        rmat[(row, j)] = -1.0;
        rvec[row] = 0.0;
        row += 1;
    }
    assert_eq!(row, rows);
    (rmat, rvec)
}

/// Exhaustively enumerates basic feasible vertices and returns
/// `(objective, x)` of the best one, or None when the system is infeasible.
pub fn vertex_oracle(prob: &DantzigProblem, sigma: f64) -> Option<(f64, Array1<f64>)> {
    let p = prob.p();
    let dim = 2 * p;
    let (rmat, rvec) = inequality_rows(prob, sigma);
    let rows = rmat.nrows();
    let mut best: Option<(f64, Array1<f64>)> = None;

    let mut subset: Vec<usize> = (0..dim).collect();
    loop {
        // Solve the active set as an equality system.
        let mut asys = Array2::<f64>::zeros((dim, dim));
        let mut bsys = Array1::<f64>::zeros(dim);
        for (k, &ri) in subset.iter().enumerate() {
            for j in 0..dim {
                asys[(k, j)] = rmat[(ri, j)];
            }
            bsys[k] = rvec[ri];
        }
        if let Some(x) = gauss_solve(&asys, &bsys) {
            let feasible = (0..rows).all(|ri| {
                let lhs: f64 = (0..dim).map(|j| rmat[(ri, j)] * x[j]).sum();
                lhs <= rvec[ri] + 1e-9
            });
            if feasible {
                let obj: f64 = x.sum();
                if best.as_ref().is_none_or(|(bo, _)| obj < *bo) {
                    best = Some((obj, x));
                }
            }
        }
        // Next combination in lexicographic order.
        let mut i = dim;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if subset[i] != i + rows - dim {
                subset[i] += 1;
                for k in (i + 1)..dim {
                    subset[k] = subset[k - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Checks `b` against the oracle's own inequality arithmetic.
pub fn feasible_in_oracle_arithmetic(prob: &DantzigProblem, sigma: f64, b: &Array1<f64>) -> bool {
    let p = prob.p();
    let (rmat, rvec) = inequality_rows(prob, sigma);
    let mut x = Array1::<f64>::zeros(2 * p);
    for j in 0..p {
        x[j] = b[j].max(0.0);
        x[p + j] = (-b[j]).max(0.0);
    }
    (0..rmat.nrows()).all(|ri| {
        let lhs: f64 = (0..2 * p).map(|j| rmat[(ri, j)] * x[j]).sum();
        lhs <= rvec[ri] + 1e-8
    })
}

/// Standard normal matrix from a fixed stream.
pub fn gaussian_matrix(seed: u64, stream: u64, n: usize, p: usize) -> Array2<f64> {
    let mut src = NormalSource::from_stream(seed, stream);
    Array2::from_shape_fn((n, p), |_| src.next())
}

/// Standard normal vector from a fixed stream.
pub fn gaussian_vector(seed: u64, stream: u64, n: usize) -> Array1<f64> {
    let mut src = NormalSource::from_stream(seed, stream);
    Array1::from_shape_fn(n, |_| src.next())
}
