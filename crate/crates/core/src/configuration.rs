//! Configurations of N point masses on H² and tangent vectors at them.

use serde::{Deserialize, Serialize};

use crate::error::{CcError, Result};
use crate::geometry::{mdot, rotate_point, ChartTag, HPoint, Vec3};

/// Distances below this are collisions; potential evaluation refuses them.
pub const COLLISION_DISTANCE: f64 = 1e-12;
/// Distances below this raise the near-collision flag on results.
pub const NEAR_COLLISION_DISTANCE: f64 = 1e-4;

/// N bodies on H² with positive masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    points: Vec<HPoint>,
    masses: Vec<f64>,
}

impl Configuration {
    pub fn new(points: Vec<HPoint>, masses: Vec<f64>) -> Result<Self> {
        if points.len() != masses.len() {
            return Err(CcError::InvalidConfiguration(format!("{} points but {} masses", points.len(), masses.len())));
        }
        if masses.is_empty() {
            return Err(CcError::InvalidConfiguration("no bodies".into()));
        }
        if let Some(m) = masses.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(CcError::InvalidConfiguration(format!("mass {m} is not positive")));
        }
        if let Some(p) = points.iter().find(|p| !p.is_valid()) {
            return Err(CcError::NotOnHyperboloid { x: p.x, y: p.y, w: p.w });
        }
        Ok(Configuration { points, masses })
    }

    /// Bodies placed by graph-chart coordinates `(x_i, y_i)`.
    pub fn from_xy(xy: &[[f64; 2]], masses: Vec<f64>) -> Result<Self> {
        Self::new(xy.iter().map(|p| HPoint::from_xy(p[0], p[1])).collect(), masses)
    }

    /// Bodies placed by chart coordinates in the layout `(a_1..a_N, b_1..b_N)`.
    pub fn from_chart_vector(tag: ChartTag, coords: &[f64], masses: Vec<f64>) -> Result<Self> {
        let n = masses.len();
        if coords.len() != 2 * n {
            return Err(CcError::InvalidConfiguration("chart vector length must be 2N".into()));
        }
        let points = (0..n).map(|i| tag.point([coords[i], coords[n + i]])).collect::<Result<Vec<_>>>()?;
        Self::new(points, masses)
    }

    /// Bodies on the x–w geodesic at `θ_i`.
    pub fn from_thetas(thetas: &[f64], masses: Vec<f64>) -> Result<Self> {
        let points = thetas.iter().map(|t| HPoint { x: t.sinh(), y: 0.0, w: t.cosh() }).collect();
        Self::new(points, masses)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[HPoint] {
        &self.points
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Chart coordinates in the layout `(a_1..a_N, b_1..b_N)`.
    pub fn chart_vector(&self, tag: ChartTag) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; 2 * n];
        for (i, p) in self.points.iter().enumerate() {
            let a = tag.coords(p);
            out[i] = a[0];
            out[n + i] = a[1];
        }
        out
    }

    /// Same masses, new points (unchecked beyond length).
    pub(crate) fn with_points(&self, points: Vec<HPoint>) -> Self {
        debug_assert_eq!(points.len(), self.masses.len());
        Configuration { points, masses: self.masses.clone() }
    }

    /// All masses multiplied by `s`.
    pub fn scale_masses(&self, s: f64) -> Result<Self> {
        Self::new(self.points.clone(), self.masses.iter().map(|m| m * s).collect())
    }

    /// Rotation of every body by `angle` about the w-axis.
    pub fn rotated(&self, angle: f64) -> Self {
        self.with_points(self.points.iter().map(|p| rotate_point(p, angle)).collect())
    }

    /// Graph-chart dilation `(x, y) ↦ s (x, y)`; multiplies `I` by `s²`.
    pub fn dilated(&self, s: f64) -> Self {
        self.with_points(self.points.iter().map(|p| HPoint::from_xy(s * p.x, s * p.y)).collect())
    }

    /// Smallest pairwise geodesic distance and the pair attaining it.
    pub fn min_pairwise_distance(&self) -> Result<(f64, usize, usize)> {
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                let d = crate::potential::pair_geometry(&self.points[i], &self.points[j])?.dist;
                if d < best.0 {
                    best = (d, i, j);
                }
            }
        }
        Ok(best)
    }

    /// Errors with [`CcError::Collision`] if any pair is closer than
    /// [`COLLISION_DISTANCE`].
    pub fn ensure_no_collision(&self) -> Result<()> {
        let (d, i, j) = self.min_pairwise_distance()?;
        if d < COLLISION_DISTANCE {
            return Err(CcError::Collision { i, j, distance: d });
        }
        Ok(())
    }

    pub fn near_collision(&self) -> bool {
        self.min_pairwise_distance().map(|(d, _, _)| d < NEAR_COLLISION_DISTANCE).unwrap_or(true)
    }
}

/// `SO(2)` action: every `(x_i, y_i)` rotated by `angle`, `w_i` unchanged.
pub fn so2_rotate(config: &Configuration, angle: f64) -> Configuration {
    config.rotated(angle)
}

/// Tangent vector to `(H²)^N`, one ambient component per body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub components: Vec<Vec3>,
}

impl TangentVector {
    pub fn zeros(n: usize) -> Self {
        TangentVector { components: vec![[0.0; 3]; n] }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Largest `|v_i · q_i|`; zero for genuinely tangent vectors.
    pub fn tangency_defect(&self, config: &Configuration) -> f64 {
        self.components.iter().zip(config.points()).map(|(v, p)| mdot(v, &p.to_vec3()).abs()).fold(0.0, f64::max)
    }

    /// Chart components in the layout `(a_1..a_N, b_1..b_N)`.
    pub fn to_chart(&self, config: &Configuration, tag: ChartTag) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; 2 * n];
        for (i, (v, p)) in self.components.iter().zip(config.points()).enumerate() {
            let c = tag.tangent_components(p, v);
            out[i] = c[0];
            out[n + i] = c[1];
        }
        out
    }

    /// Ambient vector from chart components in the layout `(a_1..a_N, b_1..b_N)`.
    pub fn from_chart(config: &Configuration, tag: ChartTag, c: &[f64]) -> Self {
        let n = config.len();
        let components = config
            .points()
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let jet = tag.jet(tag.coords(p));
                std::array::from_fn(|k| c[i] * jet.d[0][k] + c[n + i] * jet.d[1][k])
            })
            .collect();
        TangentVector { components }
    }

    pub fn scaled(&self, s: f64) -> Self {
        TangentVector { components: self.components.iter().map(|v| [s * v[0], s * v[1], s * v[2]]).collect() }
    }
}
