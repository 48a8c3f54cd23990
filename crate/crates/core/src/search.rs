//! Finding central configurations on the full plane.
//!
//! A trial draws a start on `S_c`, follows `−X` (then `+X` if that fails) to a
//! neighbourhood of a rest point, polishes with a bordered Newton solve, and
//! canonicalizes under `SO(2)`. Trials are independent and run in parallel;
//! each owns the RNG stream `(seed, trial)`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::configuration::Configuration;
use crate::error::{CcError, Result};
use crate::geodesic::Ordering;
use crate::geometry::{ChartTag, HPoint};
use crate::hessian::{chart_metric, constrained_hessian, hessian_chart_with_lambda, spectrum, SpectrumReport};
use crate::linalg::least_squares;
use crate::potential::{
    cc_residual, chart_gradient_i, chart_gradient_u, force_function, gradient_field_x, lambda_value, moment_of_inertia,
    moment_vector, rescale_to_level,
};

/// Records must have a residual below this.
pub const RECORD_RESIDUAL: f64 = 1e-9;
/// Records must sit on the level within this.
pub const LEVEL_TOL: f64 = 1e-10;
/// A canonical CC is geodesic iff `max |y_i| < GEODESIC_TOL · max r_i`.
pub const GEODESIC_TOL: f64 = 1e-8;
/// Moment vectors shorter than this times `Σ m w²` do not fix a direction.
pub const MOMENT_ANCHOR_TOL: f64 = 1e-8;
/// Radii within this relative gap are ties in the fallback anchor.
pub const RADIUS_TIE_TOL: f64 = 1e-9;
/// Relative `U` agreement required to merge two classes.
pub const DEDUPE_U_TOL: f64 = 1e-8;
/// Newton refinement requires this residual to start.
pub const NEWTON_BASIN: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    pub initial_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
    /// Hand over to Newton once `|X|` drops below this.
    pub switch_threshold: f64,
    pub armijo: f64,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams { initial_step: 1e-2, max_step: 10.0, max_steps: 20_000, switch_threshold: 1e-4, armijo: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonParams {
    /// Stop once the residual is below this.
    pub tolerance: f64,
    /// Success requires a final residual below this.
    pub accept: f64,
    pub max_iterations: usize,
    /// Systems with a smaller singular-value ratio are reported singular.
    pub min_rcond: f64,
}

impl Default for NewtonParams {
    fn default() -> Self {
        NewtonParams { tolerance: 1e-12, accept: 1e-10, max_iterations: 50, min_rcond: 1e-14 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    pub trials: usize,
    pub seed: u64,
    pub flow: FlowParams,
    pub newton: NewtonParams,
    pub dedupe_tol: f64,
    pub min_distance_floor: f64,
    /// Half-width of the uniform box for start chart coordinates.
    pub start_box: f64,
    /// Every `k`-th trial starts on the geodesic `φ = 0`; 0 disables.
    pub geodesic_start_period: usize,
    /// Overrides the default zero band when classifying.
    pub zero_tolerance: Option<f64>,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            trials: 1000,
            seed: 0,
            flow: FlowParams::default(),
            newton: NewtonParams::default(),
            dedupe_tol: 1e-6,
            min_distance_floor: 1e-4,
            start_box: 2.0,
            geodesic_start_period: 4,
            zero_tolerance: None,
        }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.flow.initial_step,
            self.flow.max_step,
            self.flow.switch_threshold,
            self.flow.armijo,
            self.newton.tolerance,
            self.newton.accept,
            self.dedupe_tol,
            self.min_distance_floor,
            self.start_box,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) || self.zero_tolerance.is_some_and(|z| z <= 0.0) {
            return Err(CcError::Precondition("search tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowDirection {
    /// Along `−X`, decreasing `U`.
    Descent,
    /// Along `+X`.
    Ascent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowStatus {
    Converged,
    StepBudgetExhausted,
    /// The step size underflowed before `|X|` reached the threshold.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct FlowOutcome {
    pub config: Configuration,
    pub direction: FlowDirection,
    pub status: FlowStatus,
    pub steps: usize,
    pub residual: f64,
    pub u_start: f64,
    pub u_end: f64,
}

/// Step along `±X` in the graph chart followed by exact rescaling onto `I = c`.
fn flow_step(config: &Configuration, x: &[[f64; 3]], h: f64, c: f64) -> Result<Configuration> {
    let pts = config.points().iter().zip(x).map(|(p, v)| HPoint::from_xy(p.x + h * v[0], p.y + h * v[1])).collect();
    rescale_to_level(&Configuration::new(pts, config.masses().to_vec())?, c)
}

/// Integrates one signed flow until `|X|` is below the switch threshold.
pub fn flow_integrate_direction(
    start: &Configuration,
    c: f64,
    params: &SearchParams,
    direction: FlowDirection,
) -> Result<FlowOutcome> {
    let fp = &params.flow;
    let sign = match direction {
        FlowDirection::Descent => -1.0,
        FlowDirection::Ascent => 1.0,
    };
    let check_floor = |cfg: &Configuration| -> Result<()> {
        let (d, _, _) = cfg.min_pairwise_distance()?;
        if d < params.min_distance_floor {
            return Err(CcError::CollisionApproach { distance: d, floor: params.min_distance_floor });
        }
        Ok(())
    };
    check_floor(start)?;
    let mut cfg = start.clone();
    let mut u = force_function(&cfg)?;
    let u_start = u;
    let mut h = fp.initial_step;
    let mut steps = 0;
    let mut status = FlowStatus::StepBudgetExhausted;
    let mut residual = cc_residual(&cfg)?;
    while steps < fp.max_steps {
        if residual < fp.switch_threshold {
            status = FlowStatus::Converged;
            break;
        }
        let x = gradient_field_x(&cfg)?;
        steps += 1;
        let trial = flow_step(&cfg, &x.components, sign * h, c);
        let accepted = match trial {
            Ok(t) => match force_function(&t) {
                Ok(ut) => {
                    let gain = fp.armijo * h * residual * residual;
                    let ok = match direction {
                        FlowDirection::Descent => ut <= u - gain,
                        FlowDirection::Ascent => ut >= u + gain,
                    };
                    ok.then_some((t, ut))
                }
                Err(_) => None,
            },
            Err(_) => None,
        };
        match accepted {
            Some((t, ut)) => {
                check_floor(&t)?;
                cfg = t;
                u = ut;
                residual = cc_residual(&cfg)?;
                h = (h * 1.5).min(fp.max_step);
            }
            None => {
                h *= 0.5;
                if h < 1e-14 {
                    status = FlowStatus::Stalled;
                    break;
                }
            }
        }
    }
    Ok(FlowOutcome { config: cfg, direction, status, steps, residual, u_start, u_end: u })
}

/// Descent first; ascent from the same start if descent does not converge.
pub fn flow_integrate(start: &Configuration, c: f64, params: &SearchParams) -> Result<FlowOutcome> {
    let level = moment_of_inertia(start);
    if (level - c).abs() > 1e-8 * c.max(1.0) {
        return Err(CcError::Precondition(format!("start has I = {level}, expected {c}")));
    }
    let descent = flow_integrate_direction(start, c, params, FlowDirection::Descent);
    if let Ok(out) = &descent {
        if out.status == FlowStatus::Converged {
            return descent;
        }
    }
    match flow_integrate_direction(start, c, params, FlowDirection::Ascent) {
        Ok(out) if out.status == FlowStatus::Converged => Ok(out),
        // report the descent attempt when neither direction converged
        other => match descent {
            Ok(d) => Ok(d),
            Err(e) => other.and(Err(e)),
        },
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub config: Configuration,
    pub lambda: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Residual before each step and after the last.
    pub history: Vec<f64>,
}

/// Bordered Newton solve of `∇U = λ∇I`, `I = c` in the graph chart with an
/// `SO(2)` gauge row.
///
/// Unknowns are `(x_1..x_N, y_1..y_N, λ)`. The rows are
/// `[H(λ), −dI; dIᵀ, 0; (G v_rot)ᵀ, 0]`, solved in the least-squares sense.
pub fn newton_refine(start: &Configuration, c: f64, params: &NewtonParams) -> Result<NewtonOutcome> {
    let n = start.len();
    let mut cfg = start.clone();
    let mut residual = cc_residual(&cfg)?;
    let mut history = vec![residual];
    if residual < params.tolerance {
        let lambda = lambda_value(&cfg)?;
        return Ok(NewtonOutcome { config: cfg, lambda, residual, iterations: 0, history });
    }
    if residual >= NEWTON_BASIN {
        return Err(CcError::Precondition(format!("residual {residual:.3e} outside the Newton basin")));
    }
    let mut lambda = lambda_value(&cfg)?;
    let mut iterations = 0;
    while iterations < params.max_iterations {
        let h = hessian_chart_with_lambda(&cfg, ChartTag::Graph, lambda)?;
        let gu = chart_gradient_u(&cfg, ChartTag::Graph)?;
        let gi = chart_gradient_i(&cfg, ChartTag::Graph);
        let metric = chart_metric(&cfg, ChartTag::Graph);
        let coords = cfg.chart_vector(ChartTag::Graph);
        let rot = DVector::from_iterator(2 * n, (0..2 * n).map(|k| if k < n { -coords[n + k] } else { coords[k - n] }));
        let gauge = &metric * rot;

        let mut jac = DMatrix::<f64>::zeros(2 * n + 2, 2 * n + 1);
        let mut rhs = DVector::<f64>::zeros(2 * n + 2);
        jac.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&h);
        for k in 0..2 * n {
            jac[(k, 2 * n)] = -gi[k];
            jac[(2 * n, k)] = gi[k];
            jac[(2 * n + 1, k)] = gauge[k];
            rhs[k] = -(gu[k] - lambda * gi[k]);
        }
        rhs[2 * n] = -(moment_of_inertia(&cfg) - c);
        let (step, rcond) = least_squares(&jac, &rhs);
        if rcond < params.min_rcond {
            return Err(CcError::SingularSystem { condition: rcond });
        }
        let next: Vec<f64> = (0..2 * n).map(|k| coords[k] + step[k]).collect();
        let trial = Configuration::from_chart_vector(ChartTag::Graph, &next, cfg.masses().to_vec())?;
        let trial_res = cc_residual(&trial)?;
        iterations += 1;
        let stagnated = trial_res >= residual && step.norm() < 1e-10 * (1.0 + DVector::from_vec(coords).norm());
        if trial_res < residual || !stagnated {
            cfg = trial;
            lambda += step[2 * n];
            residual = trial_res;
            history.push(residual);
        }
        if residual < params.tolerance || stagnated {
            break;
        }
    }
    let cfg = rescale_to_level(&cfg, c)?;
    let residual = cc_residual(&cfg)?;
    if residual >= params.accept {
        return Err(CcError::NoConvergence { iterations, residual });
    }
    Ok(NewtonOutcome { lambda: lambda_value(&cfg)?, config: cfg, residual, iterations, history })
}

/// Canonical representative of the `SO(2)` orbit.
///
/// The weighted moment vector `Σ m w (x, y)` is turned to `+x` when it is long
/// enough to fix a direction. It vanishes at every CC, so there the body of
/// largest `r` (lowest index among ties) is turned to the positive x-axis.
pub fn canonicalize(config: &Configuration) -> Result<Configuration> {
    let (sx, sy) = moment_vector(config);
    let scale: f64 = config.points().iter().zip(config.masses()).map(|(p, m)| m * p.w * p.w).sum();
    if sx.hypot(sy) >= MOMENT_ANCHOR_TOL * scale {
        return Ok(config.rotated(-sy.atan2(sx)));
    }
    let rmax = config.points().iter().map(|p| p.radius()).fold(0.0f64, f64::max);
    if rmax < 1e-12 {
        return Err(CcError::NoAnchor);
    }
    let anchor =
        config.points().iter().position(|p| p.radius() >= rmax * (1.0 - RADIUS_TIE_TOL)).expect("maximum is attained");
    let p = config.points()[anchor];
    Ok(config.rotated(-p.y.atan2(p.x)))
}

/// Geodesic test on a canonical configuration.
pub fn is_geodesic_canonical(config: &Configuration) -> bool {
    let rmax = config.points().iter().map(|p| p.radius()).fold(0.0f64, f64::max);
    config.points().iter().all(|p| p.y.abs() < GEODESIC_TOL * rmax)
}

/// Where a record came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub trial: usize,
    pub direction: Option<FlowDirection>,
    pub geodesic_start: bool,
}

/// A classified central configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CCRecord {
    pub configuration: Configuration,
    pub lambda: f64,
    pub u_value: f64,
    pub i_value: f64,
    pub residual: f64,
    pub spectrum: SpectrumReport,
    pub is_geodesic: bool,
    pub ordering: Option<Ordering>,
    pub min_distance: f64,
    pub provenance: Option<Provenance>,
}

impl CCRecord {
    pub fn index(&self) -> usize {
        self.spectrum.n_minus
    }

    pub fn nullity(&self) -> usize {
        self.spectrum.n_zero
    }

    pub fn degenerate(&self) -> bool {
        !self.spectrum.nondegenerate
    }
}

/// Canonicalizes and classifies a configuration (CC or not).
pub fn classify(config: &Configuration, zero_tol: Option<f64>) -> Result<CCRecord> {
    let configuration = canonicalize(config)?;
    let ch = constrained_hessian(&configuration, ChartTag::Graph)?;
    let spectrum = crate::hessian::spectrum_with_tolerance(&ch, zero_tol)?;
    let is_geodesic = is_geodesic_canonical(&configuration);
    let ordering = if is_geodesic {
        let thetas: Vec<f64> = configuration.points().iter().map(|p| p.x.asinh()).collect();
        Some(Ordering::from_positions(&thetas)?)
    } else {
        None
    };
    Ok(CCRecord {
        lambda: ch.lambda,
        u_value: force_function(&configuration)?,
        i_value: moment_of_inertia(&configuration),
        residual: ch.residual,
        spectrum,
        is_geodesic,
        ordering,
        min_distance: configuration.min_pairwise_distance()?.0,
        configuration,
        provenance: None,
    })
}

fn canonical_xy(r: &CCRecord) -> Vec<f64> {
    r.configuration.points().iter().flat_map(|p| [p.x, p.y]).collect()
}

fn max_gap(a: &[f64], b: &[f64], sign: f64) -> f64 {
    a.iter().zip(b).fold(0.0f64, |acc, (x, y)| acc.max((x - sign * y).abs()))
}

/// Same class: coordinates within `tol` (directly or after a half turn) and
/// matching `U`.
fn same_class(a: &CCRecord, b: &CCRecord, tol: f64) -> bool {
    let (xa, xb) = (canonical_xy(a), canonical_xy(b));
    let close = max_gap(&xa, &xb, 1.0) < tol || max_gap(&xa, &xb, -1.0) < tol;
    close && (a.u_value - b.u_value).abs() <= DEDUPE_U_TOL * a.u_value.abs().max(b.u_value.abs())
}

fn record_order(a: &CCRecord, b: &CCRecord) -> std::cmp::Ordering {
    a.u_value
        .total_cmp(&b.u_value)
        .then_with(|| {
            canonical_xy(a)
                .iter()
                .zip(canonical_xy(b))
                .fold(std::cmp::Ordering::Equal, |o, (x, y)| o.then(x.total_cmp(&y)))
        })
        .then(a.residual.total_cmp(&b.residual))
}

/// Merges records of the same class, keeping the lowest-residual member.
/// The output is sorted by `U`, then canonical coordinates.
pub fn dedupe(mut records: Vec<CCRecord>, tol: f64) -> Vec<CCRecord> {
    records.sort_by(record_order);
    let mut classes: Vec<CCRecord> = Vec::new();
    for r in records {
        match classes.iter_mut().find(|k| same_class(k, &r, tol)) {
            Some(k) => {
                if r.residual < k.residual {
                    *k = r;
                }
            }
            None => classes.push(r),
        }
    }
    classes.sort_by(record_order);
    classes
}

/// Start on `S_c`: chart coordinates uniform in the box, then the dilation
/// `(θ, φ) ↦ s (θ, φ)` solved for `I = c`.
pub fn draw_start(
    masses: &[f64],
    c: f64,
    rng: &mut impl Rng,
    box_half: f64,
    on_geodesic: bool,
) -> Result<Configuration> {
    let n = masses.len();
    let mut coords: Vec<f64> = (0..2 * n).map(|_| rng.random_range(-box_half..box_half)).collect();
    if on_geodesic {
        coords[n..].iter_mut().for_each(|v| *v = 0.0);
    }
    let inertia = |s: f64| -> f64 {
        (0..n)
            .map(|i| {
                let (t, p) = (s * coords[i], s * coords[n + i]);
                masses[i] * (t.sinh().powi(2) + t.cosh().powi(2) * p.sinh().powi(2))
            })
            .sum()
    };
    if inertia(1.0) <= 0.0 {
        return Err(CcError::DegenerateDenominator { value: 0.0 });
    }
    let mut hi = 1.0;
    while inertia(hi) < c {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(CcError::Precondition("level not reachable from start".into()));
        }
    }
    let (mut lo, mut hi) = (0.0, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if inertia(mid) < c {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    coords.iter_mut().for_each(|v| *v *= s);
    let cfg = Configuration::from_chart_vector(ChartTag::Geodesic, &coords, masses.to_vec())?;
    rescale_to_level(&cfg, c)
}

/// The stream for trial `t`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// One full trial: start, flow, Newton, classification.
pub fn run_trial(masses: &[f64], c: f64, params: &SearchParams, trial: usize) -> Result<CCRecord> {
    let mut rng = trial_rng(params.seed, trial);
    let geodesic_start = params.geodesic_start_period > 0 && trial.is_multiple_of(params.geodesic_start_period);
    let start = draw_start(masses, c, &mut rng, params.start_box, geodesic_start)?;
    let flow = flow_integrate(&start, c, params)?;
    if flow.status != FlowStatus::Converged {
        return Err(CcError::NoConvergence { iterations: flow.steps, residual: flow.residual });
    }
    let refined = newton_refine(&flow.config, c, &params.newton)?;
    let mut record = classify(&refined.config, params.zero_tolerance)?;
    if record.residual >= RECORD_RESIDUAL {
        return Err(CcError::NoConvergence { iterations: refined.iterations, residual: record.residual });
    }
    if (record.i_value - c).abs() > LEVEL_TOL * c.max(1.0) {
        return Err(CcError::Precondition(format!("refined level {} differs from {c}", record.i_value)));
    }
    if record.lambda >= 0.0 {
        return Err(CcError::InvalidConfiguration(format!("non-negative multiplier {}", record.lambda)));
    }
    if record.min_distance < params.min_distance_floor {
        return Err(CcError::CollisionApproach { distance: record.min_distance, floor: params.min_distance_floor });
    }
    record.provenance = Some(Provenance { seed: params.seed, trial, direction: Some(flow.direction), geodesic_start });
    Ok(record)
}

/// Deduplicated classes plus a tally of failed trials by error kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub records: Vec<CCRecord>,
    pub trials: usize,
    pub converged_trials: usize,
    pub failures: BTreeMap<String, usize>,
}

pub(crate) fn error_kind(e: &CcError) -> String {
    let dbg = format!("{e:?}");
    dbg.split(['(', ' ', '{']).next().unwrap_or("Unknown").to_string()
}

/// Random multistart census at level `c`.
pub fn census(masses: &[f64], c: f64, params: &SearchParams) -> Result<Census> {
    params.validate()?;
    if !(c.is_finite() && c > 0.0) {
        return Err(CcError::Precondition(format!("level c = {c} must be positive")));
    }
    if masses.len() < 2 || masses.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
        return Err(CcError::InvalidConfiguration("need at least two positive masses".into()));
    }
    let outcomes: Vec<Result<CCRecord>> =
        (0..params.trials).into_par_iter().map(|t| run_trial(masses, c, params, t)).collect();
    let mut failures = BTreeMap::new();
    let mut found = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => found.push(r),
            Err(e) => *failures.entry(error_kind(&e)).or_insert(0) += 1,
        }
    }
    let converged_trials = found.len();
    Ok(Census { records: dedupe(found, params.dedupe_tol), trials: params.trials, converged_trials, failures })
}

/// Spectrum of a record's configuration recomputed in another chart.
pub fn spectrum_in_chart(config: &Configuration, tag: ChartTag) -> Result<SpectrumReport> {
    spectrum(&constrained_hessian(config, tag)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configuration::so2_rotate;
    use crate::geodesic::{enumerate_orderings, solve_geodesic};

    fn geodesic_cfg(m: &[f64], perm: Vec<usize>) -> Configuration {
        solve_geodesic(m, &Ordering::new(perm).unwrap(), 1.0).unwrap().configuration().unwrap()
    }

    #[test]
    fn flow_returns_immediately_at_cc() {
        let cfg = geodesic_cfg(&[1.0, 1.0], vec![0, 1]);
        let out = flow_integrate(&cfg, 1.0, &SearchParams::default()).unwrap();
        assert_eq!(out.steps, 0);
        assert_eq!(out.status, FlowStatus::Converged);
    }

    #[test]
    fn flow_recovers_two_body_pair() {
        let cfg = geodesic_cfg(&[1.0, 1.0], vec![0, 1]);
        let pts: Vec<_> = cfg.points().iter().map(|p| HPoint::from_xy(p.x + 0.05, p.y - 0.03)).collect();
        let start = rescale_to_level(&Configuration::new(pts, vec![1.0, 1.0]).unwrap(), 1.0).unwrap();
        let out = flow_integrate(&start, 1.0, &SearchParams::default()).unwrap();
        assert_eq!(out.status, FlowStatus::Converged);
        assert!(out.u_end <= out.u_start);
        let refined = newton_refine(&out.config, 1.0, &NewtonParams::default()).unwrap();
        let a = canonicalize(&refined.config).unwrap();
        let b = canonicalize(&cfg).unwrap();
        for (p, q) in a.points().iter().zip(b.points()) {
            assert!((p.x - q.x).abs() < 1e-8 && (p.y - q.y).abs() < 1e-8);
        }
    }

    #[test]
    fn descent_is_monotone() {
        let mut rng = trial_rng(5, 0);
        let start = draw_start(&[1.0, 1.3, 0.8], 1.0, &mut rng, 2.0, false).unwrap();
        let mut params = SearchParams::default();
        let mut u = force_function(&start).unwrap();
        let mut cfg = start;
        params.flow.max_steps = 25;
        for _ in 0..20 {
            let out = flow_integrate_direction(&cfg, 1.0, &params, FlowDirection::Descent).unwrap();
            assert!(out.u_end <= u + 1e-12);
            u = out.u_end;
            cfg = out.config;
        }
    }

    #[test]
    fn newton_exact_and_perturbed() {
        let m = [1.0, 1.3, 0.8];
        let cfg = geodesic_cfg(&m, vec![0, 1, 2]);
        let np = NewtonParams::default();
        let exact = newton_refine(&cfg, 1.0, &np).unwrap();
        assert!(exact.iterations <= 1);

        let pts: Vec<_> = cfg
            .points()
            .iter()
            .enumerate()
            .map(|(i, p)| HPoint::from_xy(p.x + 1e-3 * (i as f64 - 0.7), p.y + 1e-3))
            .collect();
        let start = rescale_to_level(&Configuration::new(pts, m.to_vec()).unwrap(), 1.0).unwrap();
        let out = newton_refine(&start, 1.0, &np).unwrap();
        assert!(out.residual < 1e-12, "{:?}", out.history);
        let lv = lambda_value(&out.config).unwrap();
        assert!(((out.lambda - lv) / lv).abs() < 1e-9);
        let a = canonicalize(&out.config).unwrap();
        let b = canonicalize(&cfg).unwrap();
        for (p, q) in a.points().iter().zip(b.points()) {
            assert!((p.x - q.x).abs() < 1e-8 && (p.y - q.y).abs() < 1e-8);
        }
        // quadratic phase: each residual at most the square of the previous, up to a constant
        let h = &out.history;
        let k = h.len();
        assert!(k >= 3);
        for w in h[..k].windows(2).filter(|w| w[1] > 1e-14) {
            assert!(w[1] < 10.0 * w[0] * w[0].max(1e-3), "{h:?}");
        }
    }

    #[test]
    fn newton_rejects_far_start() {
        let cfg = Configuration::from_xy(&[[0.9, 0.0], [0.0, 0.2], [-0.1, -0.4]], vec![1.0; 3]).unwrap();
        let cfg = rescale_to_level(&cfg, 1.0).unwrap();
        assert!(matches!(newton_refine(&cfg, 1.0, &NewtonParams::default()), Err(CcError::Precondition(_))));
    }

    #[test]
    fn canonical_form_is_rotation_invariant() {
        let cfg = Configuration::from_xy(&[[0.4, -0.2], [-0.7, 0.5], [0.1, 1.1]], vec![1.0, 1.7, 0.6]).unwrap();
        let c0 = canonicalize(&cfg).unwrap();
        let again = canonicalize(&c0).unwrap();
        for (p, q) in c0.points().iter().zip(again.points()) {
            assert!((p.x - q.x).abs() < 1e-12 && (p.y - q.y).abs() < 1e-12);
        }
        for angle in [0.3, 1.9, -2.7, 3.1] {
            let r = canonicalize(&so2_rotate(&cfg, angle)).unwrap();
            for (p, q) in c0.points().iter().zip(r.points()) {
                assert!((p.x - q.x).abs() < 1e-12 && (p.y - q.y).abs() < 1e-12);
            }
        }
        let apex = Configuration::new(vec![HPoint::APEX; 2], vec![1.0, 1.0]).unwrap();
        assert!(matches!(canonicalize(&apex), Err(CcError::NoAnchor)));
    }

    #[test]
    fn rotated_geodesic_cc_is_recognized() {
        let cfg = geodesic_cfg(&[1.0, 1.3, 0.8], vec![1, 0, 2]);
        let rec = classify(&so2_rotate(&cfg, 0.77), None).unwrap();
        assert!(rec.is_geodesic);
        assert!(rec.configuration.points().iter().all(|p| p.y.abs() < 1e-12));
        assert_eq!(rec.ordering, Some(Ordering::new(vec![1, 0, 2]).unwrap()));
        assert_eq!(rec.spectrum.inertia(), (1, 1, 3));
    }

    #[test]
    fn dedupe_merges_rotations_and_half_turns() {
        let m = [1.0, 1.3, 0.8];
        let cfg = geodesic_cfg(&m, vec![0, 1, 2]);
        let recs: Vec<_> = [0.0, 0.4, std::f64::consts::PI, 2.2]
            .iter()
            .map(|a| classify(&so2_rotate(&cfg, *a), None).unwrap())
            .collect();
        assert_eq!(dedupe(recs, 1e-6).len(), 1);

        let all: Vec<_> = enumerate_orderings(3)
            .unwrap()
            .into_iter()
            .map(|o| classify(&solve_geodesic(&m, &o, 1.0).unwrap().configuration().unwrap(), None).unwrap())
            .collect();
        assert_eq!(dedupe(all, 1e-6).len(), 3);
    }

    #[test]
    fn two_body_census() {
        let params = SearchParams { trials: 40, seed: 7, ..SearchParams::default() };
        let c = census(&[1.0, 1.0], 1.0, &params).unwrap();
        assert_eq!(c.records.len(), 1);
        assert!(c.records[0].is_geodesic);
        assert_eq!(c.records[0].spectrum.inertia(), (0, 1, 2));
        let again = census(&[1.0, 1.0], 1.0, &params).unwrap();
        assert_eq!(c, again);
    }
}
