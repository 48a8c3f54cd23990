//! Second derivatives of `U − λI` in a global chart, their restriction to
//! `T_q S_c`, and the inertia of the restricted form.
//!
//! At a central configuration `U − λI` is critical on all of `(H²)^N`, so its
//! chart Hessian restricted to `ker dI` is the Hessian of `U|_{S_c}`. The
//! restriction is taken in a basis that is orthonormal for the mass metric,
//! which makes the eigenvalues (not only the inertia) chart independent.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::configuration::{Configuration, TangentVector};
use crate::error::{CcError, Result};
use crate::geometry::{mdot, ChartTag};
use crate::linalg::{asymmetry, default_zero_tolerance, inertia_of, symmetric_spectrum};
use crate::potential::{cc_residual, chart_gradient_i, lambda_value, pair_geometry};

/// Symmetry tolerance for assembled Hessians, relative to `max(1, |H|_max)`.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Residual below which a configuration is treated as critical.
pub const CRITICAL_RESIDUAL: f64 = 1e-8;
/// Eigenvalues within this factor of the zero band are reported as marginal.
pub const MARGINAL_FACTOR: f64 = 10.0;

/// Chart Hessian of `U − λI` with `λ` frozen at `lambda`.
///
/// Rows and columns follow `(a_1..a_N, b_1..b_N)`.
pub fn hessian_chart_with_lambda(config: &Configuration, tag: ChartTag, lambda: f64) -> Result<DMatrix<f64>> {
    let n = config.len();
    let m = config.masses();
    let jets: Vec<_> = config.points().iter().map(|p| tag.jet(tag.coords(p))).collect();
    let mut h = DMatrix::<f64>::zeros(2 * n, 2 * n);
    let idx = |body: usize, k: usize| k * n + body;

    for i in 0..n {
        for j in (i + 1)..n {
            let g = pair_geometry(&config.points()[i], &config.points()[j])?;
            if g.dist < crate::configuration::COLLISION_DISTANCE {
                return Err(CcError::Collision { i, j, distance: g.dist });
            }
            // coth as a function of s = cosh d: g' = −1/sinh³ d, g'' = 3 cosh d / sinh⁵ d
            let s3 = g.sinh * g.sinh * g.sinh;
            let d1 = -m[i] * m[j] / s3;
            let d2 = 3.0 * m[i] * m[j] * g.cosh / (s3 * g.sinh * g.sinh);
            let (ji, jj) = (&jets[i], &jets[j]);
            let ds_i = [-mdot(&ji.d[0], &jj.point), -mdot(&ji.d[1], &jj.point)];
            let ds_j = [-mdot(&ji.point, &jj.d[0]), -mdot(&ji.point, &jj.d[1])];
            for k in 0..2 {
                for l in 0..2 {
                    let ii = d2 * ds_i[k] * ds_i[l] - d1 * mdot(&ji.dd[k][l], &jj.point);
                    let jjv = d2 * ds_j[k] * ds_j[l] - d1 * mdot(&ji.point, &jj.dd[k][l]);
                    let ij = d2 * ds_i[k] * ds_j[l] - d1 * mdot(&ji.d[k], &jj.d[l]);
                    h[(idx(i, k), idx(i, l))] += ii;
                    h[(idx(j, k), idx(j, l))] += jjv;
                    h[(idx(i, k), idx(j, l))] += ij;
                    h[(idx(j, l), idx(i, k))] += ij;
                }
            }
        }
    }

    // I_i = m_i (x² + y²): ∂² = 2 m_i (∂x ∂x + ∂y ∂y + x ∂²x + y ∂²y)
    for (i, jet) in jets.iter().enumerate() {
        let q = jet.point;
        for k in 0..2 {
            for l in 0..2 {
                let second = jet.d[k][0] * jet.d[l][0]
                    + jet.d[k][1] * jet.d[l][1]
                    + q[0] * jet.dd[k][l][0]
                    + q[1] * jet.dd[k][l][1];
                h[(idx(i, k), idx(i, l))] -= lambda * 2.0 * m[i] * second;
            }
        }
    }
    Ok(h)
}

/// Chart Hessian of `U − λ(q) I` with `λ` frozen at its value at `config`.
pub fn hessian_chart(config: &Configuration, tag: ChartTag) -> Result<DMatrix<f64>> {
    config.ensure_no_collision()?;
    let lambda = lambda_value(config)?;
    hessian_chart_with_lambda(config, tag, lambda)
}

/// Mass metric in chart coordinates: block `m_i (∂q_i/∂a_k · ∂q_i/∂a_l)`.
pub fn chart_metric(config: &Configuration, tag: ChartTag) -> DMatrix<f64> {
    let n = config.len();
    let mut g = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for (i, (p, m)) in config.points().iter().zip(config.masses()).enumerate() {
        let jet = tag.jet(tag.coords(p));
        for k in 0..2 {
            for l in 0..2 {
                g[(k * n + i, l * n + i)] = m * mdot(&jet.d[k], &jet.d[l]);
            }
        }
    }
    g
}

/// Mass-orthonormal basis of `T_q S_c = ker dI` in chart coordinates.
#[derive(Debug, Clone)]
pub struct TangentBasis {
    /// `2N × (2N − 1)`, one basis vector per column.
    pub matrix: DMatrix<f64>,
    pub metric: DMatrix<f64>,
    pub chart_tag: ChartTag,
}

impl TangentBasis {
    /// Coordinates of a chart vector in this basis (the mass-metric projection).
    pub fn coordinates(&self, v: &[f64]) -> DVector<f64> {
        self.matrix.transpose() * (&self.metric * DVector::from_column_slice(v))
    }

    /// Projection of the metric gradient of a function with chart covector
    /// `df` onto `ker dI`, as a chart vector.
    pub fn project_gradient(&self, df: &[f64]) -> DVector<f64> {
        &self.matrix * (self.matrix.transpose() * DVector::from_column_slice(df))
    }
}

/// Orthonormal basis of `ker dI` for the mass metric.
///
/// `c` is the level the configuration is meant to sit on; it is not enforced
/// here, the basis only depends on the point.
pub fn tangent_basis(config: &Configuration, _c: f64, tag: ChartTag) -> Result<TangentBasis> {
    let n2 = 2 * config.len();
    let di = DVector::from_vec(chart_gradient_i(config, tag));
    if di.norm() < 1e-12 {
        return Err(CcError::DegenerateDenominator { value: di.norm() });
    }
    let metric = chart_metric(config, tag);
    let chol = metric
        .clone()
        .cholesky()
        .ok_or_else(|| CcError::InvalidConfiguration("chart metric is not positive definite".into()))?;
    let l = chol.l();
    // with z = Lᵀ v the metric is Euclidean and the constraint is (L⁻¹ dI)·z = 0
    let mut normal = l.solve_lower_triangular(&di).expect("Cholesky factor is invertible");
    normal /= normal.norm();

    // Householder reflector sending `normal` to ±e_0; its other columns span the complement
    let mut u = normal.clone();
    let sign = if normal[0] >= 0.0 { 1.0 } else { -1.0 };
    u[0] += sign;
    let unorm2 = u.norm_squared();
    let reflector = DMatrix::<f64>::identity(n2, n2) - (&u * u.transpose()) * (2.0 / unorm2);
    let z = reflector.columns(1, n2 - 1).into_owned();
    let matrix = l.transpose().solve_upper_triangular(&z).expect("Cholesky factor is invertible");
    Ok(TangentBasis { matrix, metric, chart_tag: tag })
}

/// The Hessian of `U|_{S_c}` in a mass-orthonormal basis of `T_q S_c`.
#[derive(Debug, Clone)]
pub struct ConstrainedHessian {
    /// Symmetric `(2N − 1) × (2N − 1)` matrix.
    pub matrix: DMatrix<f64>,
    pub basis: TangentBasis,
    pub chart_tag: ChartTag,
    pub lambda: f64,
    pub residual: f64,
    /// False when the configuration is not critical; the spectrum is then not
    /// Morse data.
    pub at_critical_point: bool,
}

impl ConstrainedHessian {
    /// `‖H c‖ / (‖H‖ ‖c‖)` for a chart tangent vector; small for kernel vectors.
    pub fn kernel_defect(&self, v_chart: &[f64]) -> f64 {
        let c = self.basis.coordinates(v_chart);
        let hc = &self.matrix * &c;
        let scale = self.matrix.norm() * c.norm();
        if scale == 0.0 {
            0.0
        } else {
            hc.norm() / scale
        }
    }
}

pub fn constrained_hessian(config: &Configuration, tag: ChartTag) -> Result<ConstrainedHessian> {
    let h = hessian_chart(config, tag)?;
    let lambda = lambda_value(config)?;
    let residual = cc_residual(config)?;
    let basis = tangent_basis(config, crate::potential::moment_of_inertia(config), tag)?;
    let mut matrix = basis.matrix.transpose() * &h * &basis.matrix;
    // symmetric by construction up to roundoff in the triple product
    let sym = (&matrix + matrix.transpose()) * 0.5;
    if asymmetry(&matrix) > SYMMETRY_TOL * matrix.amax().max(1.0) {
        return Err(CcError::NonSymmetric { asymmetry: asymmetry(&matrix) });
    }
    matrix = sym;
    Ok(ConstrainedHessian {
        matrix,
        basis,
        chart_tag: tag,
        lambda,
        residual,
        at_critical_point: residual < CRITICAL_RESIDUAL,
    })
}

/// Inertia data of a restricted Hessian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub n_minus: usize,
    pub n_zero: usize,
    pub n_plus: usize,
    pub zero_tolerance: f64,
    /// `n_zero == 1`: only the rotational zero.
    pub nondegenerate: bool,
    /// Nonzero eigenvalues within `10 ×` the zero band.
    pub marginal: Vec<f64>,
}

impl SpectrumReport {
    pub fn inertia(&self) -> (usize, usize, usize) {
        (self.n_minus, self.n_zero, self.n_plus)
    }

    /// Morse index on the `SO(2)` quotient.
    pub fn quotient_index(&self) -> usize {
        self.n_minus
    }
}

/// Spectrum of a symmetric matrix with the default or an explicit zero band.
pub fn spectrum_of_matrix(matrix: &DMatrix<f64>, zero_tol: Option<f64>) -> Result<SpectrumReport> {
    let eig = symmetric_spectrum(matrix, SYMMETRY_TOL)?;
    let zero_tolerance = zero_tol.unwrap_or_else(|| default_zero_tolerance(&eig.values));
    let (n_minus, n_zero, n_plus) = inertia_of(&eig.values, zero_tolerance);
    let marginal = eig
        .values
        .iter()
        .copied()
        .filter(|v| v.abs() > zero_tolerance && v.abs() <= MARGINAL_FACTOR * zero_tolerance)
        .collect();
    Ok(SpectrumReport {
        eigenvalues: eig.values,
        n_minus,
        n_zero,
        n_plus,
        zero_tolerance,
        nondegenerate: n_zero == 1,
        marginal,
    })
}

pub fn spectrum(h: &ConstrainedHessian) -> Result<SpectrumReport> {
    spectrum_of_matrix(&h.matrix, None)
}

pub fn spectrum_with_tolerance(h: &ConstrainedHessian, zero_tol: Option<f64>) -> Result<SpectrumReport> {
    spectrum_of_matrix(&h.matrix, zero_tol)
}

/// Derivative of the `SO(2)` orbit: `(−y_i, x_i, 0)` per body.
pub fn rotation_null_vector(config: &Configuration) -> TangentVector {
    TangentVector { components: config.points().iter().map(|p| [-p.y, p.x, 0.0]).collect() }
}
