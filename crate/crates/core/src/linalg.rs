//! Small dense linear-algebra kernels: Cholesky factorization, triangular
//! and positive-definite solves, and a pivoted Gauss-Jordan inverse.
//!
//! Everything here is plain `f64` on `ndarray` storage; problem sizes stay
//! in the hundreds, so there is no reason to link an external BLAS/LAPACK.

use ndarray::{Array1, Array2};

use crate::{Error, Result};

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
///
/// Fails with [`Error::NotPositiveDefinite`] when a pivot drops below a
/// scale-relative floor, which doubles as the SPD check used by the domain
/// types.
pub fn cholesky(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            axis: "cholesky (square matrix required)",
            expected: n,
            got: a.ncols(),
        });
    }
    let scale = a.diag().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > scale * 1e-14) {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d });
        }
        let dj = d.sqrt();
        l[(j, j)] = dj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / dj;
        }
    }
    Ok(l)
}

/// Solves `L x = b` for lower-triangular `L`.
pub fn solve_lower(l: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut x = b.clone();
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= l[(i, k)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// Solves `L' x = b` for lower-triangular `L`.
pub fn solve_lower_transpose(l: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut x = b.clone();
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// Solves `A x = b` with `A` SPD via its Cholesky factor.
pub fn solve_spd(l: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    solve_lower_transpose(l, &solve_lower(l, b))
}

/// Inverse of an SPD matrix through its Cholesky factor.
pub fn inverse_spd(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    let l = cholesky(a)?;
    let mut inv = Array2::<f64>::zeros((n, n));
    let mut e = Array1::<f64>::zeros(n);
    for j in 0..n {
        e.fill(0.0);
        e[j] = 1.0;
        let col = solve_spd(&l, &e);
        inv.column_mut(j).assign(&col);
    }
    // Clean up rounding asymmetry.
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (inv[(i, j)] + inv[(j, i)]);
            inv[(i, j)] = v;
            inv[(j, i)] = v;
        }
    }
    Ok(inv)
}

/// Dense inverse via Gauss-Jordan with partial pivoting.
///
/// Used by the simplex engine to refactorize the basis; `A` need not be
/// symmetric. Fails when a pivot column is numerically zero.
pub fn invert_dense(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    let mut work = a.clone();
    let mut inv = Array2::<f64>::eye(n);
    for col in 0..n {
        let mut piv = col;
        let mut best = work[(col, col)].abs();
        for r in (col + 1)..n {
            let v = work[(r, col)].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best < 1e-12 {
            return Err(Error::SolverFailure {
                iterations: 0,
                detail: format!("singular basis matrix at column {col}"),
            });
        }
        if piv != col {
            for k in 0..n {
                work.swap((piv, k), (col, k));
                inv.swap((piv, k), (col, k));
            }
        }
        let d = work[(col, col)];
        for k in 0..n {
            work[(col, k)] /= d;
            inv[(col, k)] /= d;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = work[(r, col)];
            if f != 0.0 {
                for k in 0..n {
                    work[(r, k)] -= f * work[(col, k)];
                    inv[(r, k)] -= f * inv[(col, k)];
                }
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn cholesky_reconstructs() {
        let a = array![[4.0, 2.0, 0.6], [2.0, 5.0, 1.0], [0.6, 1.0, 3.0]];
        let l = cholesky(&a).unwrap();
        let back = l.dot(&l.t());
        for i in 0..3 {
            for j in 0..3 {
                assert!((back[(i, j)] - a[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(matches!(cholesky(&a), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn spd_solve_and_inverse_agree() {
        let a = array![[3.0, 1.0], [1.0, 2.0]];
        let l = cholesky(&a).unwrap();
        let b = array![1.0, -4.0];
        let x = solve_spd(&l, &b);
        let inv = inverse_spd(&a).unwrap();
        let x2 = inv.dot(&b);
        assert!((x[0] - x2[0]).abs() < 1e-12 && (x[1] - x2[1]).abs() < 1e-12);
        let r = a.dot(&x);
        assert!((r[0] - b[0]).abs() < 1e-12 && (r[1] - b[1]).abs() < 1e-12);
    }

    #[test]
    fn dense_inverse_roundtrip() {
        let a = array![[0.0, 2.0, 1.0], [1.0, 0.5, -1.0], [3.0, -2.0, 0.2]];
        let inv = invert_dense(&a).unwrap();
        let id = a.dot(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - want).abs() < 1e-10);
            }
        }
    }
}
