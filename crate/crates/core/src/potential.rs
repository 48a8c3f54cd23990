//! Force function, moment of inertia, the multiplier λ and the projected
//! gradient field on the level set `S_c = {I = c}`.
//!
//! Gradients are Riemannian gradients for the Minkowski metric restricted to
//! each sheet, expressed as ambient 3-vectors. The mass metric
//! `⟨u, v⟩ = Σ m_i u_i·v_i` turns `M⁻¹∇U` into the gradient of `U` on
//! `(H²)^N`; `X = M⁻¹∇U − λ M⁻¹∇I` is its tangential part along `S_c`.

use serde::{Deserialize, Serialize};

use crate::configuration::{Configuration, TangentVector, COLLISION_DISTANCE};
use crate::error::{CcError, Result};
use crate::geometry::{mdot, ChartTag, HPoint, ARCOSH_ERROR};

/// Lower bound on `Σ m_i r_i² w_i²` for λ to be defined.
pub const DENOMINATOR_FLOOR: f64 = 1e-14;
/// Relative tolerance of the moment relations at a CC.
pub const MOMENT_RELATIVE_TOL: f64 = 1e-8;

/// The level `c > 0` of the moment of inertia.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeSphereSlice {
    level: f64,
}

impl ShapeSphereSlice {
    pub fn new(level: f64) -> Result<Self> {
        if !(level.is_finite() && level > 0.0) {
            return Err(CcError::Precondition(format!("level c = {level} must be positive")));
        }
        Ok(ShapeSphereSlice { level })
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    /// Exact projection onto the slice by graph-chart dilation.
    pub fn project(&self, config: &Configuration) -> Result<Configuration> {
        rescale_to_level(config, self.level)
    }
}

/// `cosh d`, `sinh d` and `d` for one pair, computed from the Minkowski chord
/// `½|p − q|² = cosh d − 1` to keep precision for close pairs.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PairGeometry {
    pub cosh: f64,
    pub sinh: f64,
    pub dist: f64,
}

pub(crate) fn pair_geometry(p: &HPoint, q: &HPoint) -> Result<PairGeometry> {
    let (dx, dy, dw) = (p.x - q.x, p.y - q.y, p.w - q.w);
    let mut delta = 0.5 * (dx * dx + dy * dy - dw * dw);
    if !delta.is_finite() || delta < -ARCOSH_ERROR {
        return Err(CcError::ArgumentBelowOne { value: 1.0 + delta });
    }
    delta = delta.max(0.0);
    let sinh = (delta * (2.0 + delta)).sqrt();
    Ok(PairGeometry { cosh: 1.0 + delta, sinh, dist: (delta + sinh).ln_1p() })
}

/// Pair geometry for every `i < j`, failing on collisions.
pub(crate) fn pairs(config: &Configuration) -> Result<Vec<(usize, usize, PairGeometry)>> {
    let pts = config.points();
    let n = pts.len();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let g = pair_geometry(&pts[i], &pts[j])?;
            if g.dist < COLLISION_DISTANCE {
                return Err(CcError::Collision { i, j, distance: g.dist });
            }
            out.push((i, j, g));
        }
    }
    Ok(out)
}

/// `U = Σ_{i<j} m_i m_j coth d_ij`.
pub fn force_function(config: &Configuration) -> Result<f64> {
    let m = config.masses();
    Ok(pairs(config)?.iter().map(|(i, j, g)| m[*i] * m[*j] * g.cosh / g.sinh).sum())
}

/// `I = Σ m_i (x_i² + y_i²)`.
pub fn moment_of_inertia(config: &Configuration) -> f64 {
    config.points().iter().zip(config.masses()).map(|(p, m)| m * (p.x * p.x + p.y * p.y)).sum()
}

/// `∇_{q_i} U = Σ_{j≠i} m_i m_j (q_j − cosh d_ij q_i) / sinh³ d_ij`.
pub fn grad_u(config: &Configuration) -> Result<TangentVector> {
    let m = config.masses();
    let pts = config.points();
    let mut out = TangentVector::zeros(config.len());
    for (i, j, g) in pairs(config)? {
        let k = m[i] * m[j] / (g.sinh * g.sinh * g.sinh);
        let (qi, qj) = (pts[i].to_vec3(), pts[j].to_vec3());
        for c in 0..3 {
            out.components[i][c] += k * (qj[c] - g.cosh * qi[c]);
            out.components[j][c] += k * (qi[c] - g.cosh * qj[c]);
        }
    }
    Ok(out)
}

/// `∇_{q_i} I = 2 m_i (x_i w_i², y_i w_i², w_i r_i²)`.
pub fn grad_i(config: &Configuration) -> TangentVector {
    let components = config
        .points()
        .iter()
        .zip(config.masses())
        .map(|(p, m)| {
            let r2 = p.x * p.x + p.y * p.y;
            let w2 = p.w * p.w;
            [2.0 * m * p.x * w2, 2.0 * m * p.y * w2, 2.0 * m * p.w * r2]
        })
        .collect();
    TangentVector { components }
}

/// `⟨u, v⟩ = Σ m_i u_i·v_i` with the Minkowski product per body.
pub fn mass_metric(u: &TangentVector, v: &TangentVector, config: &Configuration) -> f64 {
    u.components.iter().zip(&v.components).zip(config.masses()).map(|((a, b), m)| m * mdot(a, b)).sum()
}

fn mass_inverse(v: &TangentVector, config: &Configuration) -> TangentVector {
    let components = v.components.iter().zip(config.masses()).map(|(c, m)| [c[0] / m, c[1] / m, c[2] / m]).collect();
    TangentVector { components }
}

/// `Σ m_i r_i² w_i²`, a quarter of `⟨M⁻¹∇I, M⁻¹∇I⟩`.
pub fn lambda_denominator(config: &Configuration) -> f64 {
    config.points().iter().zip(config.masses()).map(|(p, m)| m * (p.x * p.x + p.y * p.y) * p.w * p.w).sum()
}

/// Pairwise closed form
/// `Σ_{i<j} m_i m_j [(w_i² + w_j²)(1 − cosh d_ij) − (w_i − w_j)²] / sinh³ d_ij`.
///
/// It equals `½⟨M⁻¹∇U, M⁻¹∇I⟩` and is negative off the collision set.
pub fn lambda_numerator_closed_form(config: &Configuration) -> Result<f64> {
    let m = config.masses();
    let pts = config.points();
    Ok(pairs(config)?
        .iter()
        .map(|(i, j, g)| {
            let (wi, wj) = (pts[*i].w, pts[*j].w);
            // 1 − cosh d = −(cosh d − 1) keeps the chord precision
            let num = (wi * wi + wj * wj) * (1.0 - g.cosh) - (wi - wj) * (wi - wj);
            m[*i] * m[*j] * num / (g.sinh * g.sinh * g.sinh)
        })
        .sum())
}

/// `⟨M⁻¹∇U, M⁻¹∇I⟩` evaluated directly from the gradients.
pub fn lambda_numerator_direct(config: &Configuration) -> Result<f64> {
    let gu = grad_u(config)?;
    let gi = grad_i(config);
    Ok(mass_metric(&mass_inverse(&gu, config), &mass_inverse(&gi, config), config))
}

/// `λ = ⟨M⁻¹∇U, M⁻¹∇I⟩ / ⟨M⁻¹∇I, M⁻¹∇I⟩`.
pub fn lambda_value(config: &Configuration) -> Result<f64> {
    let den = lambda_denominator(config);
    if den < DENOMINATOR_FLOOR {
        return Err(CcError::DegenerateDenominator { value: den });
    }
    Ok(lambda_numerator_direct(config)? / (4.0 * den))
}

/// Projected gradient `X = M⁻¹∇U − λ M⁻¹∇I` together with λ.
pub fn gradient_field_with_lambda(config: &Configuration) -> Result<(TangentVector, f64)> {
    let den = lambda_denominator(config);
    if den < DENOMINATOR_FLOOR {
        return Err(CcError::DegenerateDenominator { value: den });
    }
    let gu = mass_inverse(&grad_u(config)?, config);
    let gi = mass_inverse(&grad_i(config), config);
    let lambda = mass_metric(&gu, &gi, config) / (4.0 * den);
    let components =
        gu.components.iter().zip(&gi.components).map(|(a, b)| std::array::from_fn(|c| a[c] - lambda * b[c])).collect();
    Ok((TangentVector { components }, lambda))
}

pub fn gradient_field_x(config: &Configuration) -> Result<TangentVector> {
    Ok(gradient_field_with_lambda(config)?.0)
}

/// Mass-metric norm of `X`; zero exactly at central configurations.
pub fn cc_residual(config: &Configuration) -> Result<f64> {
    let x = gradient_field_x(config)?;
    Ok(mass_metric(&x, &x, config).max(0.0).sqrt())
}

/// `dU(v) = Σ ∇_{q_i}U · v_i`.
pub fn directional_derivative_u(config: &Configuration, v: &TangentVector) -> Result<f64> {
    let gu = grad_u(config)?;
    Ok(gu.components.iter().zip(&v.components).map(|(a, b)| mdot(a, b)).sum())
}

/// `dI(v) = Σ ∇_{q_i}I · v_i`.
pub fn directional_derivative_i(config: &Configuration, v: &TangentVector) -> f64 {
    grad_i(config).components.iter().zip(&v.components).map(|(a, b)| mdot(a, b)).sum()
}

/// `max(|Σ m_i x_i w_i|, |Σ m_i y_i w_i|)`, which vanishes at every CC.
pub fn moment_relations_check(config: &Configuration) -> f64 {
    let (sx, sy) = moment_vector(config);
    sx.abs().max(sy.abs())
}

/// `(Σ m_i w_i x_i, Σ m_i w_i y_i)`.
pub fn moment_vector(config: &Configuration) -> (f64, f64) {
    config
        .points()
        .iter()
        .zip(config.masses())
        .fold((0.0, 0.0), |(sx, sy), (p, m)| (sx + m * p.x * p.w, sy + m * p.y * p.w))
}

/// Scale-relative threshold `1e-8 · Σ m_i w_i²` for [`moment_relations_check`].
pub fn moment_tolerance(config: &Configuration) -> f64 {
    MOMENT_RELATIVE_TOL * config.points().iter().zip(config.masses()).map(|(p, m)| m * p.w * p.w).sum::<f64>()
}

/// Chart gradient of `U` in the layout `(a_1..a_N, b_1..b_N)`.
pub fn chart_gradient_u(config: &Configuration, tag: ChartTag) -> Result<Vec<f64>> {
    Ok(ambient_to_chart_covector(config, tag, &grad_u(config)?))
}

/// Chart gradient of `I` in the layout `(a_1..a_N, b_1..b_N)`.
pub fn chart_gradient_i(config: &Configuration, tag: ChartTag) -> Vec<f64> {
    ambient_to_chart_covector(config, tag, &grad_i(config))
}

/// Pulls a gradient back through the chart Jacobian: `∂f/∂a = ∇f · ∂q/∂a`.
fn ambient_to_chart_covector(config: &Configuration, tag: ChartTag, g: &TangentVector) -> Vec<f64> {
    let n = config.len();
    let mut out = vec![0.0; 2 * n];
    for (i, (p, gi)) in config.points().iter().zip(&g.components).enumerate() {
        let jet = tag.jet(tag.coords(p));
        out[i] = mdot(gi, &jet.d[0]);
        out[n + i] = mdot(gi, &jet.d[1]);
    }
    out
}

/// Rescales onto `I = c` by the graph-chart dilation `(x, y) ↦ s (x, y)`.
pub fn rescale_to_level(config: &Configuration, c: f64) -> Result<Configuration> {
    let i = moment_of_inertia(config);
    if i <= 0.0 {
        return Err(CcError::DegenerateDenominator { value: i });
    }
    let s = (c / i).sqrt();
    let mut out = config.dilated(s);
    // one correction absorbs the rounding of the square root
    let i2 = moment_of_inertia(&out);
    if i2 > 0.0 {
        out = out.dilated((c / i2).sqrt());
    }
    Ok(out)
}
