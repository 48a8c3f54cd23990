//! Lower bounds and Poincaré polynomials, and the audit on a hand-made census.

use h2cc::morse::{
    geodesic_count, lower_bounds, morse_inequality_audit, morse_polynomial_from_indices, poincare_polynomial,
};

fn main() -> h2cc::Result<()> {
    for n in 2..=8 {
        let (total, non_geodesic) = lower_bounds(n)?;
        println!(
            "N = {n}: total >= {total}, non-geodesic >= {non_geodesic}, geodesic = {}, P(t) = {}",
            geodesic_count(n)?,
            poincare_polynomial(n)?
        );
    }
    let p = poincare_polynomial(3)?;
    for (label, indices) in [("two minima, three saddles", vec![0, 0, 1, 1, 1]), ("geodesic only", vec![1, 1, 1])] {
        let audit = morse_inequality_audit(&morse_polynomial_from_indices(indices), &p)?;
        println!("{label}: M(t) = {}, {}", audit.m, audit.verdict());
    }
    Ok(())
}
