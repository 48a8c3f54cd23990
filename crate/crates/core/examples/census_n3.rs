//! Multistart census for three bodies, checked against the Morse lower bounds.

use h2cc::morse::census_report;
use h2cc::search::{census, SearchParams};

fn main() -> h2cc::Result<()> {
    let masses = [1.0, 1.3, 0.8];
    let params = SearchParams { trials: 5000, seed: 7, ..SearchParams::default() };
    let t = std::time::Instant::now();
    let c = census(&masses, 1.0, &params)?;
    println!("{} classes from {} converged trials in {:.1?}", c.records.len(), c.converged_trials, t.elapsed());
    for (kind, count) in &c.failures {
        println!("  {count} trials failed: {kind}");
    }
    let report = census_report(c.records, &masses, 1.0)?;
    for r in &report.classes {
        let kind = r.ordering.as_ref().map_or("non-geodesic".to_string(), |o| format!("geodesic {o}"));
        println!(
            "U = {:.12}  lambda = {:+.6}  index {}  nullity {}  {kind}",
            r.u_value,
            r.lambda,
            r.index(),
            r.nullity()
        );
    }
    println!(
        "bounds: total {} (found {}), non-geodesic {} (found {})",
        report.bound_total, report.found_total, report.bound_non_geodesic, report.found_non_geodesic
    );
    println!("M(t) = {}, P(t) = {}: {}", report.audit.m, report.audit.p, report.verdict);
    Ok(())
}
