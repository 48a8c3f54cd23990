//! Randomized property battery: every check is a proven identity, so a failure means
//! an implementation bug.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::configuration::{so2_rotate, Configuration};
use crate::error::Result;
use crate::geodesic::{
    a_eigen_report, build_spectral_matrices, cone_invariance_probe, distance_inequalities_check, enumerate_orderings,
    geodesic_direction_spectrum, solve_geodesic, verify_inertia_via_sylvester, GeodesicCC,
};
use crate::geometry::{ambient_to_chart, chart_to_ambient, lift, project, ChartPoint, ChartTag, GraphPoint, HPoint};
use crate::hessian::{constrained_hessian, rotation_null_vector, spectrum};
use crate::potential::{
    force_function, grad_i, grad_u, gradient_field_x, lambda_numerator_closed_form, lambda_numerator_direct,
    lambda_value, mass_metric, moment_of_inertia, moment_relations_check, moment_tolerance,
};
use crate::search::trial_rng;
use crate::witness::collision_repulsion_witness;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// First failure, if any.
    pub detail: Option<String>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub n: usize,
    pub cases: usize,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub warnings: Vec<String>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }
}

type Check = fn(usize, &mut ChaCha8Rng) -> std::result::Result<(), String>;

/// Named checks in the order they run.
pub const CHECKS: &[(&str, Check)] = &[
    ("lambda negativity and numerator agreement", check_lambda),
    ("moment relations at geodesic CCs", check_moment_relations),
    ("A-matrix eigenstructure", check_a_matrix),
    ("Sylvester inertia transfer", check_sylvester),
    ("distance inequalities", check_distance_inequalities),
    ("cone invariance", check_cone),
    ("collision witness", check_witness),
    ("SO(2) invariance of U and I", check_so2),
    ("tangency of X", check_tangency),
    ("chart round trips", check_charts),
    ("inertia chart independence", check_chart_inertia),
];

pub fn run_battery(n: usize, cases: usize, seed: u64) -> VerifyReport {
    let mut warnings = Vec::new();
    if cases == 0 {
        warnings.push("zero cases requested: every check passes vacuously".to_string());
    }
    let checks = CHECKS
        .iter()
        .enumerate()
        .map(|(k, (name, f))| {
            let mut failures = 0;
            let mut detail = None;
            for case in 0..cases {
                let mut rng = trial_rng(seed.wrapping_add(k as u64 * 0x9E37_79B9), case);
                if let Err(msg) = f(n, &mut rng) {
                    failures += 1;
                    detail.get_or_insert(format!("case {case}: {msg}"));
                }
            }
            CheckResult { name, cases, failures, detail }
        })
        .collect();
    VerifyReport { n, cases, seed, checks, warnings }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn random_masses(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.2..3.0)).collect()
}

/// Random configuration in the graph chart with a minimum separation.
pub fn random_configuration(n: usize, rng: &mut ChaCha8Rng) -> Configuration {
    let masses = random_masses(n, rng);
    loop {
        let xy: Vec<[f64; 2]> = (0..n).map(|_| [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]).collect();
        if let Ok(c) = Configuration::from_xy(&xy, masses.clone()) {
            if c.min_pairwise_distance().map(|(d, _, _)| d > 0.05).unwrap_or(false) && moment_of_inertia(&c) > 1e-3 {
                return c;
            }
        }
    }
}

fn random_geodesic(n: usize, rng: &mut ChaCha8Rng) -> Result<GeodesicCC> {
    let masses = random_masses(n, rng);
    let orderings = enumerate_orderings(n)?;
    let o = orderings.choose(rng).expect("at least one ordering");
    let c = rng.random_range(0.3..3.0);
    solve_geodesic(&masses, o, c)
}

fn check_lambda(n: usize, rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    let c = random_configuration(n, rng);
    let l = lambda_value(&c).map_err(err)?;
    ensure(l < 0.0, || format!("lambda = {l}"))?;
    let direct = lambda_numerator_direct(&c).map_err(err)?;
    let closed = lambda_numerator_closed_form(&c).map_err(err)?;
    ensure((direct - 2.0 * closed).abs() <= 1e-10 * direct.abs(), || format!("{direct} vs 2 x {closed}"))
}

fn check_moment_relations(n: usize, rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    let g = random_geodesic(n, rng).map_err(err)?;
    let cfg = g.configuration().map_err(err)?;
    let m = moment_relations_check(&cfg);
    ensure(m < moment_tolerance(&cfg), || format!("moment {m:e}"))?;
    ensure(g.lambda < 0.0, || format!("lambda = {}", g.lambda))
}

fn check_a_matrix(n: usize, rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    let g = random_geodesic(n, rng).map_err(err)?;
    let s = build_spectral_matrices(&g);
    let r = a_eigen_report(&g, &s);
    ensure(r.v1_defect < 1e-9, || format!("|A v1| defect {:e}", r.v1_defect))?;
    ensure(r.v2_defect < 1e-8, || format!("|A v2 - 2 lambda v2| defect {:e}", r.v2_defect))?;
    ensure(r.margin.is_none_or(|m| m > 0.0), || format!("margin {:?}", r.margin))
}

fn check_sylvester(n: usize, rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    let g = random_geodesic(n, rng).map_err(err)?;
    let s = build_spectral_matrices(&g);
    ensure(s.factorization_defect() < 1e-9, || format!("factorization defect {:e}", s.factorization_defect()))?;
    let r = verify_inertia_via_sylvester(&g).map_err(err)?;
    ensure(r.matches_expected(n), || format!("inertia {:?}", r.h_phi_inertia))
}

fn check_distance_inequalities(n: usize, rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    let mut t: Vec<f64> = (0..n.max(3)).map(|_| rng.random_range(-3.0..3.0)).collect();
    t.sort_by(f64::total_cmp);
    t.dedup();
    let ok = distance_inequalities_check(&t).map_err(err)?;
    ensure(ok, || format!("{t:?}"))
}

fn check_cone(n: usize, rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    let g = random_geodesic(n, rng).map_err(err)?;
    let seed = rng.random();
    cone_invariance_probe(&g, 20, seed).map(|_| ()).map_err(err)
}

fn check_witness(n: usize, rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    // the construction needs a cluster of two plus a distinct last cluster
    if n < 3 {
        return Ok(());
    }
    // other bodies well away from the colliding pair keep the bounded terms small
    let base = loop {
        let b = random_configuration(n, rng);
        let p = b.points()[0];
        if b.points()[2..].iter().all(|q| crate::geometry::geodesic_distance(&p, q).is_ok_and(|d| d > 0.5)) {
            break b;
        }
    };
    let p = base.points()[0];
    // unit tangent along the φ-direction of the geodesic chart
    let phi = ambient_to_chart(&p).phi;
    let e = [0.0, phi.cosh(), phi.sinh()];
    let clusters = vec![vec![0, 1], (2..n).collect::<Vec<_>>()];
    let mut prev = f64::INFINITY;
    for eps in [1e-1f64, 1e-2, 1e-3] {
        let (ch, sh) = ((0.5 * eps).cosh(), (0.5 * eps).sinh());
        let a = HPoint { x: ch * p.x - sh * e[0], y: ch * p.y - sh * e[1], w: ch * p.w - sh * e[2] };
        let b = HPoint { x: ch * p.x + sh * e[0], y: ch * p.y + sh * e[1], w: ch * p.w + sh * e[2] };
        let mut pts = vec![a.renormalized(), b.renormalized()];
        pts.extend(base.points()[2..].iter().copied());
        let cfg = Configuration::new(pts, base.masses().to_vec()).map_err(err)?;
        let w = collision_repulsion_witness(&cfg, &clusters).map_err(err)?;
        let scale = grad_i(&cfg).components.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs())) * w.norm;
        ensure(w.di.abs() < 1e-9 * scale, || format!("dI(v) = {:e}", w.di))?;
        ensure(w.du < prev, || format!("dU(v) not decreasing at eps = {eps}: {} after {prev}", w.du))?;
        prev = w.du;
    }
    Ok(())
}

fn check_so2(n: usize, rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    let c = random_configuration(n, rng);
    let r = so2_rotate(&c, rng.random_range(-10.0..10.0));
    let (u0, u1) = (force_function(&c).map_err(err)?, force_function(&r).map_err(err)?);
    let (i0, i1) = (moment_of_inertia(&c), moment_of_inertia(&r));
    ensure((u0 - u1).abs() < 1e-12 * u0.abs(), || format!("U {u0} vs {u1}"))?;
    ensure((i0 - i1).abs() < 1e-12 * i0.abs().max(1.0), || format!("I {i0} vs {i1}"))
}

fn check_tangency(n: usize, rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    let c = random_configuration(n, rng);
    let x = gradient_field_x(&c).map_err(err)?;
    let scale = x.components.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    let wmax = c.points().iter().fold(1.0f64, |m, p| m.max(p.w));
    let defect = x.tangency_defect(&c);
    ensure(defect < 1e-12 * scale * wmax, || format!("tangency defect {defect:e}"))?;
    // X is mass-orthogonal to M⁻¹∇I
    let gi = grad_i(&c);
    let mi = crate::configuration::TangentVector {
        components: gi.components.iter().zip(c.masses()).map(|(v, m)| [v[0] / m, v[1] / m, v[2] / m]).collect(),
    };
    let dot = mass_metric(&x, &mi, &c);
    let norm = mass_metric(&x, &x, &c).sqrt() * mass_metric(&mi, &mi, &c).sqrt();
    ensure(dot.abs() <= 1e-10 * norm.max(1e-300), || format!("<X, M^-1 grad I> = {dot:e}"))?;
    let _ = grad_u(&c).map_err(err)?;
    Ok(())
}

fn check_charts(_n: usize, rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    let cp = ChartPoint { theta: rng.random_range(-5.0..5.0), phi: rng.random_range(-5.0..5.0) };
    let p = chart_to_ambient(&cp).map_err(err)?;
    let back = ambient_to_chart(&p);
    ensure((back.theta - cp.theta).abs() < 1e-12 && (back.phi - cp.phi).abs() < 1e-12, || {
        format!("{cp:?} -> {back:?}")
    })?;
    let g = GraphPoint { x: p.x, y: p.y };
    let q = lift(&g);
    let rel = ((q.w - p.w) / p.w).abs();
    ensure(rel < 1e-12, || format!("lift w {} vs {}", q.w, p.w))?;
    let g2 = project(&q);
    ensure(g2.x == g.x && g2.y == g.y, || "projection mismatch".into())
}

fn check_chart_inertia(n: usize, rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    let g = random_geodesic(n, rng).map_err(err)?;
    let cfg = g.configuration().map_err(err)?;
    let a = spectrum(&constrained_hessian(&cfg, ChartTag::Geodesic).map_err(err)?).map_err(err)?;
    let rotated = so2_rotate(&cfg, rng.random_range(0.0..std::f64::consts::TAU));
    let h = constrained_hessian(&rotated, ChartTag::Graph).map_err(err)?;
    let b = spectrum(&h).map_err(err)?;
    ensure(a.inertia() == b.inertia(), || format!("{:?} vs {:?}", a.inertia(), b.inertia()))?;
    ensure(a.inertia() == (n - 2, 1, n), || format!("inertia {:?}", a.inertia()))?;
    let v = rotation_null_vector(&rotated).to_chart(&rotated, ChartTag::Graph);
    let defect = h.kernel_defect(&v);
    ensure(defect < 1e-7, || format!("rotation kernel defect {defect:e}"))?;
    ensure(geodesic_direction_spectrum(&g).iter().all(|&e| e > 0.0), || "H_theta not positive".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_small() {
        for n in [2, 3, 4] {
            let r = run_battery(n, 10, 1);
            for c in &r.checks {
                assert!(c.passed(), "N = {n}, {}: {:?}", c.name, c.detail);
            }
        }
        let r = run_battery(3, 0, 1);
        assert!(r.all_passed());
        assert_eq!(r.warnings.len(), 1);
    }
}
