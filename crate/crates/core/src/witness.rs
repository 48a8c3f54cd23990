//! Tangent vectors along which `U` drops without bound near a collision.

use serde::Serialize;

use crate::configuration::{Configuration, TangentVector};
use crate::error::{CcError, Result};
use crate::geometry::{ChartTag, HPoint};
use crate::potential::{chart_gradient_i, chart_gradient_u};

/// The witness vector and the derivatives of `U` and `I` along it.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    /// Graph-chart components `(v_i1, v_i2)` per body.
    pub chart: Vec<[f64; 2]>,
    pub tangent: TangentVector,
    pub du: f64,
    pub di: f64,
    /// Euclidean norm of the chart components.
    pub norm: f64,
}

/// Builds `v` for an ordered cluster partition.
///
/// On the first cluster `v_i = w_i² (x_i, y_i)`, on the last `v_i = w_i v₀`,
/// and zero in between. `v₀` is the least-norm solution of
/// `v₀ · Σ_last m w (x, y) = −Σ_first m w² r²`, which makes `dI(v) = 0`.
pub fn collision_repulsion_witness(config: &Configuration, clusters: &[Vec<usize>]) -> Result<Witness> {
    let n = config.len();
    if clusters.len() < 2 {
        return Err(CcError::DegenerateCluster("need at least two clusters".into()));
    }
    let mut seen = vec![false; n];
    for &b in clusters.iter().flatten() {
        if b >= n || seen[b] {
            return Err(CcError::DegenerateCluster(format!("body {b} is out of range or repeated")));
        }
        seen[b] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(CcError::DegenerateCluster("clusters do not cover every body".into()));
    }
    let first = &clusters[0];
    let last = &clusters[clusters.len() - 1];
    if first.len() < 2 {
        return Err(CcError::DegenerateCluster("the first cluster needs two bodies".into()));
    }
    let pts = config.points();
    let m = config.masses();

    let s: f64 = first.iter().map(|&i| m[i] * pts[i].w.powi(2) * pts[i].radius().powi(2)).sum();
    let a = last
        .iter()
        .fold([0.0, 0.0], |acc, &i| [acc[0] + m[i] * pts[i].w * pts[i].x, acc[1] + m[i] * pts[i].w * pts[i].y]);
    let a2 = a[0] * a[0] + a[1] * a[1];
    let scale: f64 = last.iter().map(|&i| m[i] * pts[i].w * pts[i].w).sum();
    if a2.sqrt() < 1e-12 * scale {
        return Err(CcError::DegenerateCluster("last cluster has no moment to balance with".into()));
    }
    let v0 = [-s * a[0] / a2, -s * a[1] / a2];

    let mut chart = vec![[0.0; 2]; n];
    for &i in first {
        let w2 = pts[i].w * pts[i].w;
        chart[i] = [w2 * pts[i].x, w2 * pts[i].y];
    }
    for &i in last {
        chart[i] = [pts[i].w * v0[0], pts[i].w * v0[1]];
    }

    let flat: Vec<f64> = (0..2 * n).map(|k| if k < n { chart[k][0] } else { chart[k - n][1] }).collect();
    let gu = chart_gradient_u(config, ChartTag::Graph)?;
    let gi = chart_gradient_i(config, ChartTag::Graph);
    let du = gu.iter().zip(&flat).map(|(g, v)| g * v).sum();
    let di = gi.iter().zip(&flat).map(|(g, v)| g * v).sum();
    Ok(Witness {
        tangent: TangentVector::from_chart(config, ChartTag::Graph, &flat),
        norm: flat.iter().map(|v| v * v).sum::<f64>().sqrt(),
        chart,
        du,
        di,
    })
}

/// Three unit masses: a pair at geodesic distance `eps` about the lift of
/// `(1, 0)`, split along `y`, and a third body at the lift of `(−1.5, 0.3)`.
pub fn two_cluster_example(eps: f64) -> Configuration {
    let p = HPoint::from_xy(1.0, 0.0);
    let (ch, sh) = ((0.5 * eps).cosh(), (0.5 * eps).sinh());
    // (0, 1, 0) is a unit tangent at p
    let a = HPoint { x: ch * p.x, y: -sh, w: ch * p.w };
    let b = HPoint { x: ch * p.x, y: sh, w: ch * p.w };
    Configuration::new(vec![a, b, HPoint::from_xy(-1.5, 0.3)], vec![1.0; 3]).expect("valid example")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{directional_derivative_i, directional_derivative_u};

    #[test]
    fn witness_blows_up() {
        let clusters = vec![vec![0, 1], vec![2]];
        let mut prev = f64::INFINITY;
        let mut norms = Vec::new();
        for eps in [1e-1, 1e-2, 1e-3] {
            let cfg = two_cluster_example(eps);
            assert!((cfg.min_pairwise_distance().unwrap().0 - eps).abs() < 1e-12);
            let w = collision_repulsion_witness(&cfg, &clusters).unwrap();
            assert!(w.di.abs() < 1e-9);
            assert!(w.du < prev);
            prev = w.du;
            norms.push(w.norm);
            // the ambient form gives the same derivatives
            assert!((directional_derivative_u(&cfg, &w.tangent).unwrap() - w.du).abs() < 1e-9 * w.du.abs());
            assert!(directional_derivative_i(&cfg, &w.tangent).abs() < 1e-9);
        }
        assert!(prev < -1e3);
        let ratio = norms.iter().cloned().fold(0.0, f64::max) / norms.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(ratio < 10.0);
    }

    #[test]
    fn bad_partitions() {
        let cfg = two_cluster_example(0.1);
        assert!(collision_repulsion_witness(&cfg, &[vec![0, 1, 2]]).is_err());
        assert!(collision_repulsion_witness(&cfg, &[vec![0], vec![1, 2]]).is_err());
        assert!(collision_repulsion_witness(&cfg, &[vec![0, 1], vec![1]]).is_err());
        let apex =
            Configuration::new(vec![HPoint::from_xy(1.0, 0.0), HPoint::from_xy(1.0, 0.01), HPoint::APEX], vec![1.0; 3])
                .unwrap();
        assert!(matches!(
            collision_repulsion_witness(&apex, &[vec![0, 1], vec![2]]),
            Err(CcError::DegenerateCluster(_))
        ));
    }
}
