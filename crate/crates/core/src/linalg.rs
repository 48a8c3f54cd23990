//! Dense symmetric eigensolver (cyclic Jacobi rotations) and inertia counts.

use nalgebra::{DMatrix, DVector};

use crate::error::{CcError, Result};

/// Eigenvalues sorted ascending with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

/// Largest `|a_ij − a_ji|`.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// Cyclic Jacobi sweeps until the off-diagonal mass is at roundoff level.
///
/// The input must be square; it is symmetrized as `(A + Aᵀ)/2` first so a
/// roundoff-level asymmetry does not bias the rotations.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> SymmetricEigen {
    const MAX_SWEEPS: usize = 100;
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "jacobi_eigen needs a square matrix");
    let mut m = (a + a.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);

    let frob = m.norm();
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() <= f64::EPSILON * 1e-2 * frob || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (m[(p, p)], m[(q, q)]);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    SymmetricEigen { values, vectors }
}

/// `(n₋, n₀, n₊)` of a spectrum with the given zero band.
pub fn inertia_of(values: &[f64], zero_tol: f64) -> (usize, usize, usize) {
    values.iter().fold((0, 0, 0), |(neg, zero, pos), &v| {
        if v.abs() <= zero_tol {
            (neg, zero + 1, pos)
        } else if v < 0.0 {
            (neg + 1, zero, pos)
        } else {
            (neg, zero, pos + 1)
        }
    })
}

/// Zero band `1e-7 · max(|λ|_max, 1)`.
pub fn default_zero_tolerance(values: &[f64]) -> f64 {
    1e-7 * values.iter().fold(1.0f64, |acc, v| acc.max(v.abs()))
}

/// Checked symmetric eigen-decomposition.
pub fn symmetric_spectrum(a: &DMatrix<f64>, sym_tol: f64) -> Result<SymmetricEigen> {
    let asym = asymmetry(a);
    let scale = a.amax().max(1.0);
    if asym > sym_tol * scale {
        return Err(CcError::NonSymmetric { asymmetry: asym });
    }
    Ok(jacobi_eigen(a))
}

/// Least-squares solve of `A x = b` by SVD, returning the solution and the
/// ratio of smallest to largest singular value.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let rcond = if smax > 0.0 { smin / smax } else { 0.0 };
    let x = svd.solve(b, f64::EPSILON * smax).unwrap_or_else(|_| DVector::zeros(a.ncols()));
    (x, rcond)
}
