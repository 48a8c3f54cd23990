//! Hyperboloid-model primitives for H².
//!
//! Points live on the upper sheet `x² + y² − w² = −1, w > 0` of R^{2,1}. Two
//! global charts are provided: the geodesic chart
//! `(θ, φ) ↦ (sinh θ, cosh θ sinh φ, cosh θ cosh φ)`, whose `φ = 0` line is
//! the x–w geodesic H¹, and the graph chart `(x, y) ↦ (x, y, √(x² + y² + 1))`.

use serde::{Deserialize, Serialize};

use crate::error::{CcError, Result};

/// Ambient 3-vector `(x, y, w)` in R^{2,1}.
pub type Vec3 = [f64; 3];

/// Violations of `−p·q ≥ 1` larger than this are errors; smaller ones are
/// roundoff and get clamped.
pub const ARCOSH_ERROR: f64 = 1e-9;
/// Chart coordinates beyond this magnitude overflow `sinh`/`cosh` products.
pub const CHART_LIMIT: f64 = 30.0;
/// Hyperboloid membership tolerance, relative to `max(1, w²)`.
pub const ON_SHEET_TOL: f64 = 1e-12;

/// Minkowski product `a·b = a_x b_x + a_y b_y − a_w b_w` of ambient vectors.
#[inline]
pub fn mdot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] - a[2] * b[2]
}

/// A point of H² in ambient coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
    pub w: f64,
}

impl HPoint {
    /// The apex `(0, 0, 1)`, fixed by the SO(2) action.
    pub const APEX: HPoint = HPoint { x: 0.0, y: 0.0, w: 1.0 };

    /// Checked constructor.
    pub fn new(x: f64, y: f64, w: f64) -> Result<Self> {
        let p = HPoint { x, y, w };
        if p.is_valid() {
            Ok(p)
        } else {
            Err(CcError::NotOnHyperboloid { x, y, w })
        }
    }

    /// Lift of a planar point through the graph chart; always on the sheet.
    pub fn from_xy(x: f64, y: f64) -> Self {
        HPoint { x, y, w: (x * x + y * y + 1.0).sqrt() }
    }

    pub fn is_valid(&self) -> bool {
        let defect = self.x * self.x + self.y * self.y - self.w * self.w + 1.0;
        self.w > 0.0
            && self.x.is_finite()
            && self.y.is_finite()
            && self.w.is_finite()
            && defect.abs() <= ON_SHEET_TOL * (self.w * self.w).max(1.0)
    }

    #[inline]
    pub fn to_vec3(&self) -> Vec3 {
        [self.x, self.y, self.w]
    }

    /// Distance `r = √(x² + y²)` from the rotation axis.
    #[inline]
    pub fn radius(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Recompute `w` from `(x, y)`, snapping drifted points back onto the sheet.
    pub fn renormalized(&self) -> Self {
        HPoint::from_xy(self.x, self.y)
    }
}

/// Geodesic-chart coordinates `(θ, φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub theta: f64,
    pub phi: f64,
}

/// Graph-chart coordinates `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphPoint {
    pub x: f64,
    pub y: f64,
}

pub fn minkowski_dot(p: &HPoint, q: &HPoint) -> f64 {
    p.x * q.x + p.y * q.y - p.w * q.w
}

/// Geodesic distance `arcosh(−p·q)`.
pub fn geodesic_distance(p: &HPoint, q: &HPoint) -> Result<f64> {
    let arg = -minkowski_dot(p, q);
    if arg < 1.0 - ARCOSH_ERROR || !arg.is_finite() {
        return Err(CcError::ArgumentBelowOne { value: arg });
    }
    Ok(arg.max(1.0).acosh())
}

fn check_range(v: f64) -> Result<()> {
    if !v.is_finite() || v.abs() > CHART_LIMIT {
        return Err(CcError::CoordinateRange { value: v, limit: CHART_LIMIT });
    }
    Ok(())
}

pub fn chart_to_ambient(c: &ChartPoint) -> Result<HPoint> {
    check_range(c.theta)?;
    check_range(c.phi)?;
    let (st, ct) = (c.theta.sinh(), c.theta.cosh());
    let (sp, cp) = (c.phi.sinh(), c.phi.cosh());
    Ok(HPoint { x: st, y: ct * sp, w: ct * cp })
}

pub fn ambient_to_chart(p: &HPoint) -> ChartPoint {
    let theta = p.x.asinh();
    let phi = (p.y / theta.cosh()).asinh();
    ChartPoint { theta, phi }
}

pub fn lift(g: &GraphPoint) -> HPoint {
    HPoint::from_xy(g.x, g.y)
}

pub fn project(p: &HPoint) -> GraphPoint {
    GraphPoint { x: p.x, y: p.y }
}

/// Rotation of `(x, y)` by `angle` about the w-axis.
pub fn rotate_point(p: &HPoint, angle: f64) -> HPoint {
    let (s, c) = angle.sin_cos();
    HPoint { x: c * p.x - s * p.y, y: s * p.x + c * p.y, w: p.w }
}

/// Which global chart a coordinate vector refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartTag {
    /// `(θ, φ)`; mandatory for the block structure at geodesic configurations.
    Geodesic,
    /// `(x, y)`; the default for general Hessians.
    Graph,
}

/// Position, first and second derivatives of a chart map at one point.
///
/// `d[k]` is `∂q/∂a_k` and `dd[k][l]` is `∂²q/∂a_k∂a_l`, with `(a_0, a_1)`
/// equal to `(θ, φ)` or `(x, y)`.
#[derive(Debug, Clone, Copy)]
pub struct ChartJet {
    pub point: Vec3,
    pub d: [Vec3; 2],
    pub dd: [[Vec3; 2]; 2],
}

impl ChartTag {
    /// Chart coordinates of an ambient point.
    pub fn coords(self, p: &HPoint) -> [f64; 2] {
        match self {
            ChartTag::Geodesic => {
                let c = ambient_to_chart(p);
                [c.theta, c.phi]
            }
            ChartTag::Graph => [p.x, p.y],
        }
    }

    /// Ambient point at chart coordinates `a`.
    pub fn point(self, a: [f64; 2]) -> Result<HPoint> {
        match self {
            ChartTag::Geodesic => chart_to_ambient(&ChartPoint { theta: a[0], phi: a[1] }),
            ChartTag::Graph => {
                if !a[0].is_finite() || !a[1].is_finite() {
                    return Err(CcError::InvalidConfiguration("non-finite graph coordinate".into()));
                }
                Ok(HPoint::from_xy(a[0], a[1]))
            }
        }
    }

    /// Second-order jet of the chart map at chart coordinates `a`.
    pub fn jet(self, a: [f64; 2]) -> ChartJet {
        match self {
            ChartTag::Geodesic => {
                let (st, ct) = (a[0].sinh(), a[0].cosh());
                let (sp, cp) = (a[1].sinh(), a[1].cosh());
                let q = [st, ct * sp, ct * cp];
                let q_t = [ct, st * sp, st * cp];
                let q_p = [0.0, ct * cp, ct * sp];
                let q_tp = [0.0, st * cp, st * sp];
                let q_pp = [0.0, ct * sp, ct * cp];
                ChartJet { point: q, d: [q_t, q_p], dd: [[q, q_tp], [q_tp, q_pp]] }
            }
            ChartTag::Graph => {
                let (x, y) = (a[0], a[1]);
                let w = (x * x + y * y + 1.0).sqrt();
                let w3 = w * w * w;
                let w_xx = (1.0 + y * y) / w3;
                let w_xy = -x * y / w3;
                let w_yy = (1.0 + x * x) / w3;
                ChartJet {
                    point: [x, y, w],
                    d: [[1.0, 0.0, x / w], [0.0, 1.0, y / w]],
                    dd: [[[0.0, 0.0, w_xx], [0.0, 0.0, w_xy]], [[0.0, 0.0, w_xy], [0.0, 0.0, w_yy]]],
                }
            }
        }
    }

    /// Chart components of an ambient tangent vector `v` at `p`.
    ///
    /// Solves `J c = v` through the 2×2 induced metric `Jᵀ η J`, which is
    /// exact for tangent `v` and the metric projection otherwise.
    pub fn tangent_components(self, p: &HPoint, v: &Vec3) -> [f64; 2] {
        let jet = self.jet(self.coords(p));
        let g00 = mdot(&jet.d[0], &jet.d[0]);
        let g01 = mdot(&jet.d[0], &jet.d[1]);
        let g11 = mdot(&jet.d[1], &jet.d[1]);
        let b0 = mdot(&jet.d[0], v);
        let b1 = mdot(&jet.d[1], v);
        let det = g00 * g11 - g01 * g01;
        [(g11 * b0 - g01 * b1) / det, (g00 * b1 - g01 * b0) / det]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_examples() {
        let o = HPoint::APEX;
        assert_eq!(minkowski_dot(&o, &o), -1.0);
        let q = HPoint { x: 1f64.sinh(), y: 0.0, w: 1f64.cosh() };
        assert!((minkowski_dot(&o, &q) + 1.5430806348152437).abs() < 1e-15);
        let a: f64 = 0.3;
        let p1 = HPoint { x: a.sinh(), y: 0.0, w: a.cosh() };
        let p2 = HPoint { x: -a.sinh(), y: 0.0, w: a.cosh() };
        assert!((minkowski_dot(&p1, &p2) + (2.0 * a).cosh()).abs() < 1e-14);
    }

    #[test]
    fn distance_examples() {
        let o = HPoint::APEX;
        assert_eq!(geodesic_distance(&o, &o).unwrap(), 0.0);
        let q = chart_to_ambient(&ChartPoint { theta: 1.0, phi: 0.0 }).unwrap();
        assert!((geodesic_distance(&o, &q).unwrap() - 1.0).abs() < 1e-14);
        let a = 0.7;
        let p1 = chart_to_ambient(&ChartPoint { theta: a, phi: 0.0 }).unwrap();
        let p2 = chart_to_ambient(&ChartPoint { theta: -a, phi: 0.0 }).unwrap();
        assert!((geodesic_distance(&p1, &p2).unwrap() - 2.0 * a).abs() < 1e-14);
    }

    #[test]
    fn distance_rejects_off_sheet_points() {
        let bad = HPoint { x: 0.0, y: 0.0, w: 0.5 };
        let err = geodesic_distance(&HPoint::APEX, &bad).unwrap_err();
        assert!(matches!(err, CcError::ArgumentBelowOne { .. }));
    }

    #[test]
    fn chart_examples() {
        let o = chart_to_ambient(&ChartPoint { theta: 0.0, phi: 0.0 }).unwrap();
        assert_eq!(o, HPoint::APEX);
        let t = 0.8;
        let p = chart_to_ambient(&ChartPoint { theta: t, phi: 0.0 }).unwrap();
        assert_eq!((p.x, p.y, p.w), (t.sinh(), 0.0, t.cosh()));
        let back = ambient_to_chart(&p);
        assert!((back.theta - t).abs() < 1e-12 && back.phi.abs() < 1e-12);
    }

    #[test]
    fn chart_range_guard() {
        let err = chart_to_ambient(&ChartPoint { theta: 31.0, phi: 0.0 }).unwrap_err();
        assert!(matches!(err, CcError::CoordinateRange { .. }));
        assert!(chart_to_ambient(&ChartPoint { theta: 0.0, phi: f64::NAN }).is_err());
    }

    #[test]
    fn lift_examples() {
        assert_eq!(lift(&GraphPoint { x: 0.0, y: 0.0 }), HPoint::APEX);
        let p = lift(&GraphPoint { x: 3.0, y: 4.0 });
        assert_eq!(p.w, 26f64.sqrt());
        let back = chart_to_ambient(&ambient_to_chart(&p)).unwrap();
        assert!((back.x - 3.0).abs() < 1e-12 && (back.y - 4.0).abs() < 1e-12);
        assert!((back.w - p.w).abs() < 1e-12);
    }

    #[test]
    fn checked_constructor() {
        assert!(HPoint::new(0.0, 0.0, 1.0).is_ok());
        assert!(HPoint::new(0.0, 0.0, -1.0).is_err());
        assert!(HPoint::new(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn jets_match_finite_differences() {
        let h = 1e-6;
        for tag in [ChartTag::Geodesic, ChartTag::Graph] {
            let a = [0.4, -0.9];
            let jet = tag.jet(a);
            for k in 0..2 {
                let mut ap = a;
                let mut am = a;
                ap[k] += h;
                am[k] -= h;
                let jp = tag.jet(ap);
                let jm = tag.jet(am);
                for c in 0..3 {
                    let fd = (jp.point[c] - jm.point[c]) / (2.0 * h);
                    assert!((fd - jet.d[k][c]).abs() < 1e-8);
                    for l in 0..2 {
                        let fd2 = (jp.d[l][c] - jm.d[l][c]) / (2.0 * h);
                        assert!((fd2 - jet.dd[k][l][c]).abs() < 1e-8, "{tag:?} {k} {l} {c}");
                    }
                }
            }
        }
    }

    #[test]
    fn tangent_components_invert_jacobian() {
        for tag in [ChartTag::Geodesic, ChartTag::Graph] {
            let a = tag.coords(&HPoint::from_xy(0.7, -1.2));
            let jet = tag.jet(a);
            let c = [0.3, -2.0];
            let v: Vec3 = std::array::from_fn(|k| c[0] * jet.d[0][k] + c[1] * jet.d[1][k]);
            let back = tag.tangent_components(&HPoint::from_xy(0.7, -1.2), &v);
            assert!((back[0] - c[0]).abs() < 1e-12 && (back[1] - c[1]).abs() < 1e-12);
        }
    }
}
