//! Acceptance criteria. Each prints one `PASS`/`FAIL` line; the process
//! exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use h2cc::geodesic::{
    a_eigen_report, build_spectral_matrices, enumerate_orderings, solve_geodesic, verify_inertia_via_sylvester,
    GeodesicCC,
};
use h2cc::geometry::geodesic_distance;
use h2cc::hessian::{constrained_hessian, hessian_chart_with_lambda, spectrum};
use h2cc::morse::{census_report, morse_inequality_audit, morse_polynomial_from_indices, poincare_polynomial};
use h2cc::potential::{
    chart_gradient_i, chart_gradient_u, force_function, lambda_numerator_closed_form, lambda_numerator_direct,
    lambda_value, moment_of_inertia, moment_relations_check, moment_tolerance,
};
use h2cc::search::{census, SearchParams};
use h2cc::verify::{random_configuration, run_battery};
use h2cc::witness::{collision_repulsion_witness, two_cluster_example};
use h2cc::{ChartTag, Configuration};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_masses(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.3..3.0)).collect()
}

fn mass_sets() -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (2..=4).flat_map(|n| [vec![1.0; n], random_masses(n, &mut rng)]).collect()
}

fn solve_all(masses: &[f64]) -> Result<Vec<GeodesicCC>, String> {
    let orderings = enumerate_orderings(masses.len()).map_err(|e| e.to_string())?;
    orderings.iter().map(|o| solve_geodesic(masses, o, 1.0).map_err(|e| format!("{masses:?} {o}: {e}"))).collect()
}

fn geodesic_counts_and_inertia() -> Outcome {
    let start = Instant::now();
    let mut records = 0;
    for masses in mass_sets() {
        let n = masses.len();
        let solved = solve_all(&masses)?;
        let expected = [1, 3, 12][n - 2];
        ensure(solved.len() == expected, || format!("N={n}: {} records, expected {expected}", solved.len()))?;
        for g in &solved {
            ensure(g.residual < 1e-10, || format!("{}: residual {:e}", g.ordering, g.residual))?;
            ensure(g.lambda < 0.0, || format!("{}: lambda {}", g.ordering, g.lambda))?;
            let cfg = g.configuration().map_err(|e| e.to_string())?;
            for tag in [ChartTag::Geodesic, ChartTag::Graph] {
                let h = constrained_hessian(&cfg, tag).map_err(|e| e.to_string())?;
                let s = spectrum(&h).map_err(|e| e.to_string())?;
                ensure(s.inertia() == (n - 2, 1, n), || {
                    format!("{masses:?} {} {tag:?}: inertia {:?}", g.ordering, s.inertia())
                })?;
            }
            records += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("{records} records, inertia (N-2, 1, N), {elapsed:.2?}"))
}

fn a_matrix_eigenstructure() -> Outcome {
    let (mut worst1, mut worst2, mut min_margin) = (0.0f64, 0.0f64, f64::INFINITY);
    for masses in mass_sets() {
        for g in solve_all(&masses)? {
            let r = a_eigen_report(&g, &build_spectral_matrices(&g));
            ensure(r.v1_defect < 1e-9, || format!("{}: |A v1| defect {:e}", g.ordering, r.v1_defect))?;
            ensure(r.v2_defect < 1e-8, || format!("{}: |A v2 - 2λ v2| defect {:e}", g.ordering, r.v2_defect))?;
            if let Some(m) = r.margin {
                ensure(m > 0.0, || format!("{}: eigenvalue above 2λ by {:e}", g.ordering, -m))?;
                min_margin = min_margin.min(m);
            }
            worst1 = worst1.max(r.v1_defect);
            worst2 = worst2.max(r.v2_defect);
        }
    }
    Ok(format!("max defects {worst1:.1e} / {worst2:.1e}, min margin below 2λ {min_margin:.3e}"))
}

fn factorization_and_sylvester() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    let mut count = 0;
    for n in 2..=6 {
        let orderings = enumerate_orderings(n).map_err(|e| e.to_string())?;
        for masses in [vec![1.0; n], random_masses(n, &mut rng)] {
            // all orderings up to N = 4, a fixed sample beyond
            let step = if n <= 4 { 1 } else { orderings.len() / 7 };
            for o in orderings.iter().step_by(step) {
                let g = solve_geodesic(&masses, o, 1.0).map_err(|e| format!("{masses:?} {o}: {e}"))?;
                let s = build_spectral_matrices(&g);
                let d = s.factorization_defect();
                ensure(d < 1e-9, || format!("N={n} {o}: factorization defect {d:e}"))?;
                worst = worst.max(d);
                let r = verify_inertia_via_sylvester(&g).map_err(|e| format!("N={n} {o}: {e}"))?;
                ensure(r.h_phi_inertia == r.shifted_a_inertia && r.matches_expected(n), || {
                    format!("N={n} {o}: H_phi {:?}, A-2λ {:?}", r.h_phi_inertia, r.shifted_a_inertia)
                })?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} CCs for N=2..6, max entrywise defect {worst:.1e}, inertia (N-2, 1, 1)"))
}

fn two_body_closed_form() -> Outcome {
    let mut worst = 0.0f64;
    for c in [0.1, 0.5, 1.0, 2.0, 5.0] {
        let o = &enumerate_orderings(2).map_err(|e| e.to_string())?[0];
        let g = solve_geodesic(&[1.0, 1.0], o, c).map_err(|e| e.to_string())?;
        let cfg = g.configuration().map_err(|e| e.to_string())?;
        let d = geodesic_distance(&cfg.points()[0], &cfg.points()[1]).map_err(|e| e.to_string())?;
        let oracle = -1.0 / d.sinh().powi(3);
        let rel = (g.lambda - oracle).abs() / oracle.abs();
        ensure(rel < 1e-10, || format!("c={c}: λ {} vs {oracle}, rel {rel:e}", g.lambda))?;
        worst = worst.max(rel);
    }
    Ok(format!("λ = -1/sinh³d at 5 levels, max rel err {worst:.1e}"))
}

fn chart_fn(cfg: &Configuration, tag: ChartTag, f: impl Fn(&Configuration) -> f64) -> impl Fn(&[f64]) -> f64 {
    let masses = cfg.masses().to_vec();
    move |v: &[f64]| f(&Configuration::from_chart_vector(tag, v, masses.clone()).expect("valid chart point"))
}

fn fd_gradient(f: &impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|k| {
            let (mut p, mut m) = (x.to_vec(), x.to_vec());
            p[k] += h;
            m[k] -= h;
            (f(&p) - f(&m)) / (2.0 * h)
        })
        .collect()
}

fn fd_hessian(f: &impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> DMatrix<f64> {
    DMatrix::from_fn(x.len(), x.len(), |a, b| {
        let eval = |da: f64, db: f64| {
            let mut v = x.to_vec();
            v[a] += da;
            v[b] += db;
            f(&v)
        };
        (eval(h, h) - eval(h, -h) - eval(-h, h) + eval(-h, -h)) / (4.0 * h * h)
    })
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    diff / a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn derivative_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut gu_err, mut gi_err, mut h_err) = (0.0f64, 0.0f64, 0.0f64);
    let mut configs = 0;
    for n in [2, 3, 4] {
        for _ in 0..8 {
            let cfg = random_configuration(n, &mut rng);
            let lambda = lambda_value(&cfg).map_err(|e| e.to_string())?;
            for tag in [ChartTag::Graph, ChartTag::Geodesic] {
                let x = cfg.chart_vector(tag);
                let u = chart_fn(&cfg, tag, |c| force_function(c).unwrap());
                let i = chart_fn(&cfg, tag, moment_of_inertia);
                let l = chart_fn(&cfg, tag, |c| force_function(c).unwrap() - lambda * moment_of_inertia(c));
                let gu = chart_gradient_u(&cfg, tag).map_err(|e| e.to_string())?;
                let gi = chart_gradient_i(&cfg, tag);
                gu_err = gu_err.max(rel_err(&gu, &fd_gradient(&u, &x, 1e-6)));
                gi_err = gi_err.max(rel_err(&gi, &fd_gradient(&i, &x, 1e-6)));
                let h = hessian_chart_with_lambda(&cfg, tag, lambda).map_err(|e| e.to_string())?;
                let fd = fd_hessian(&l, &x, 1e-4);
                h_err = h_err.max((&h - &fd).amax() / h.amax());
            }
            configs += 1;
        }
    }
    ensure(gu_err < 1e-6 && gi_err < 1e-6 && h_err < 1e-5, || {
        format!("rel errors grad U {gu_err:.1e}, grad I {gi_err:.1e}, Hessian {h_err:.1e}")
    })?;
    Ok(format!("{configs} configs x 2 charts: grad U {gu_err:.1e}, grad I {gi_err:.1e}, Hessian {h_err:.1e}"))
}

fn lambda_and_moments() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for k in 0..1000 {
        let n = 2 + k % 4;
        let cfg = random_configuration(n, &mut rng);
        let lambda = lambda_value(&cfg).map_err(|e| e.to_string())?;
        ensure(lambda < 0.0, || format!("λ = {lambda} at case {k}"))?;
        let direct = lambda_numerator_direct(&cfg).map_err(|e| e.to_string())?;
        let closed = 2.0 * lambda_numerator_closed_form(&cfg).map_err(|e| e.to_string())?;
        let rel = (direct - closed).abs() / direct.abs();
        ensure(rel < 1e-10, || format!("numerators {direct} vs {closed} at case {k}"))?;
        worst = worst.max(rel);
    }
    let mut ccs: Vec<Configuration> = Vec::new();
    for masses in mass_sets() {
        for g in solve_all(&masses)? {
            ccs.push(g.configuration().map_err(|e| e.to_string())?);
        }
    }
    let params = SearchParams { trials: 200, seed: 3, ..SearchParams::default() };
    let found = census(&[1.0, 1.3, 0.8], 1.0, &params).map_err(|e| e.to_string())?;
    ccs.extend(found.records.into_iter().map(|r| r.configuration));
    for cfg in &ccs {
        let m = moment_relations_check(cfg);
        ensure(m < moment_tolerance(cfg), || format!("moment {m:e} at a converged CC"))?;
    }
    Ok(format!("1000 configs λ < 0, numerator rel gap {worst:.1e}; moments vanish at {} CCs", ccs.len()))
}

fn n3_census() -> Result<h2cc::morse::CensusReport, String> {
    let params = SearchParams { trials: 5000, seed: 20240601, ..SearchParams::default() };
    let result = census(&[1.0, 1.3, 0.8], 1.0, &params).map_err(|e| e.to_string())?;
    census_report(result.records, &[1.0, 1.3, 0.8], 1.0).map_err(|e| e.to_string())
}

fn census_bounds(report: &h2cc::morse::CensusReport, elapsed: Duration) -> Outcome {
    ensure(report.found_total >= 5, || format!("{} classes", report.found_total))?;
    ensure(report.found_non_geodesic >= 2, || format!("{} non-geodesic", report.found_non_geodesic))?;
    ensure(report.found_geodesic == 3, || format!("{} geodesic", report.found_geodesic))?;
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} classes ({} geodesic, {} non-geodesic) vs bounds 5 / 2, {elapsed:.2?}",
        report.found_total, report.found_geodesic, report.found_non_geodesic
    ))
}

fn morse_audit(report: &h2cc::morse::CensusReport) -> Outcome {
    let a = &report.audit;
    let r = a.r.as_ref().map(|r| r.to_string()).unwrap_or_default();
    ensure(a.division_exact && a.r_nonnegative && a.consistent(), || {
        format!("M = {}, P = {}: {}", a.m, a.p, a.verdict())
    })?;
    let p = poincare_polynomial(3).map_err(|e| e.to_string())?;
    let geodesic_only = morse_polynomial_from_indices([1, 1, 1]);
    let bad = morse_inequality_audit(&geodesic_only, &p).map_err(|e| e.to_string())?;
    ensure(!bad.census_complete_hypothesis, || "geodesic-only 3t passed the audit".to_string())?;
    Ok(format!("M = {}, P = {}, R = {r}; 3t rejected", a.m, a.p))
}

fn collision_witness() -> Outcome {
    let clusters = vec![vec![0, 1], vec![2]];
    let mut dus = Vec::new();
    let mut norms = Vec::new();
    for eps in [1e-1, 1e-2, 1e-3] {
        let w = collision_repulsion_witness(&two_cluster_example(eps), &clusters).map_err(|e| e.to_string())?;
        ensure(w.di.abs() < 1e-9, || format!("ε={eps}: dI = {:e}", w.di))?;
        dus.push(w.du);
        norms.push(w.norm);
    }
    let ratio = norms.iter().cloned().fold(0.0, f64::max) / norms.iter().cloned().fold(f64::INFINITY, f64::min);
    ensure(ratio < 10.0, || format!("norm ratio {ratio}"))?;
    ensure(dus.windows(2).all(|p| p[1] < p[0]), || format!("dU not decreasing: {dus:?}"))?;
    ensure(dus[2] < -1e3, || format!("dU = {} at ε = 1e-3", dus[2]))?;
    Ok(format!("dU = {:.3e}, {:.3e}, {:.3e}; norm ratio {ratio:.3}", dus[0], dus[1], dus[2]))
}

fn property_battery() -> Outcome {
    let start = Instant::now();
    let report = run_battery(4, 200, 1);
    let elapsed = start.elapsed();
    let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
    ensure(failed.is_empty(), || format!("failed checks: {failed:?}"))?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{} checks x 200 cases, {elapsed:.2?}", report.checks.len()))
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = vec![
        ("geodesic count and indices", geodesic_counts_and_inertia()),
        ("A-matrix eigenstructure", a_matrix_eigenstructure()),
        ("factorization identity and Sylvester", factorization_and_sylvester()),
        ("two-body closed form", two_body_closed_form()),
        ("derivative oracles", derivative_oracles()),
        ("lambda negativity and moment relations", lambda_and_moments()),
    ];
    let start = Instant::now();
    let census = n3_census();
    let elapsed = start.elapsed();
    match &census {
        Ok(report) => {
            results.push(("census vs lower bounds", census_bounds(report, elapsed)));
            results.push(("Morse audit", morse_audit(report)));
        }
        Err(e) => {
            results.push(("census vs lower bounds", Err(e.clone())));
            results.push(("Morse audit", Err(format!("no census: {e}"))));
        }
    }
    results.push(("collision exclusion witness", collision_witness()));
    results.push(("property battery", property_battery()));

    let mut failed = 0;
    for (k, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", k + 1);
            }
        }
    }
    println!("{} of {} acceptance criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
