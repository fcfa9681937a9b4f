//! Small dense linear algebra helpers: just enough for Newton steps on
//! systems of a few dozen unknowns.

use ndarray::{Array1, Array2, ArrayView1};

pub(crate) fn l2_norm(x: &ArrayView1<f64>) -> f64 {
    x.dot(x).sqrt()
}

/// In-place lower Cholesky factorization. Returns false if the matrix is
/// not positive definite (or numerically indefinite), leaving `a` garbage.
pub(crate) fn cholesky_factor(a: &mut Array2<f64>) -> bool {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= a[[j, k]] * a[[j, k]];
        }
        if !d.is_finite() || d <= 0.0 {
            return false;
        }
        let d = d.sqrt();
        a[[j, j]] = d;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= a[[i, k]] * a[[j, k]];
            }
            a[[i, j]] = s / d;
        }
    }
    true
}

/// Solves `A x = b` for symmetric positive definite `A`, consuming `a`.
/// Returns None when the Cholesky factorization fails.
pub(crate) fn cholesky_solve(mut a: Array2<f64>, b: &ArrayView1<f64>) -> Option<Array1<f64>> {
    if !cholesky_factor(&mut a) {
        return None;
    }
    let n = a.nrows();
    let mut x = b.to_owned();
    // forward substitution with L
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= a[[i, k]] * x[k];
        }
        x[i] = s / a[[i, i]];
    }
    // back substitution with L^T
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in (i + 1)..n {
            s -= a[[k, i]] * x[k];
        }
        x[i] = s / a[[i, i]];
    }
    Some(x)
}
