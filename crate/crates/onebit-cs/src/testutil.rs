//! Shared oracles for unit tests: finite differences and a Jacobi
//! eigenvalue sweep, kept independent of the code paths they check.

use ndarray::{Array1, Array2};

/// Central finite-difference gradient of a scalar function.
pub(crate) fn fd_gradient<F>(f: F, x: &Array1<f64>, h: f64) -> Array1<f64>
where
    F: Fn(&Array1<f64>) -> f64,
{
    let mut g = Array1::zeros(x.len());
    for i in 0..x.len() {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        g[i] = (f(&xp) - f(&xm)) / (2.0 * h);
    }
    g
}

/// Central finite-difference Jacobian of a vector function; applied to a
/// gradient it approximates the Hessian.
pub(crate) fn fd_hessian<F>(grad: F, x: &Array1<f64>, h: f64) -> Array2<f64>
where
    F: Fn(&Array1<f64>) -> Array1<f64>,
{
    let n = x.len();
    let mut hess = Array2::zeros((n, n));
    for j in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        let col = (grad(&xp) - grad(&xm)) / (2.0 * h);
        hess.column_mut(j).assign(&col);
    }
    hess
}

/// Largest element-wise relative error between two vectors, scaled by the
/// overall magnitude of the reference.
pub(crate) fn max_rel_err(reference: &Array1<f64>, candidate: &Array1<f64>) -> f64 {
    let scale = reference
        .iter()
        .fold(0.0f64, |m, &v| m.max(v.abs()))
        .max(1e-12);
    reference
        .iter()
        .zip(candidate.iter())
        .fold(0.0f64, |m, (&a, &b)| m.max((a - b).abs() / scale))
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub(crate) fn jacobi_eigenvalues(a: &Array2<f64>) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut m = a.clone();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[[i, j]] * m[[i, j]];
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[[p, q]].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * m[[p, q]]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[[i, i]]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn jacobi_matches_known_spectrum() {
        // eigenvalues of [[2,1],[1,2]] are 1 and 3
        let a = array![[2.0, 1.0], [1.0, 2.0]];
        let mut eigs = jacobi_eigenvalues(&a);
        eigs.sort_by(f64::total_cmp);
        assert!((eigs[0] - 1.0).abs() < 1e-12);
        assert!((eigs[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn fd_gradient_of_quadratic_is_exact() {
        let f = |x: &Array1<f64>| x[0] * x[0] + 3.0 * x[1];
        let g = fd_gradient(f, &array![2.0, -1.0], 1e-5);
        assert!((g[0] - 4.0).abs() < 1e-8);
        assert!((g[1] - 3.0).abs() < 1e-8);
    }
}
