//! Two equal masses: the multiplier against `-1/sinh³ d` across levels.

use h2cc::geodesic::{solve_geodesic, Ordering};
use h2cc::geometry::geodesic_distance;

fn main() -> h2cc::Result<()> {
    let ordering = Ordering::new(vec![0, 1])?;
    println!("{:>6} {:>12} {:>20} {:>20}", "c", "d", "lambda", "-1/sinh^3 d");
    for c in [0.01, 0.1, 1.0, 10.0, 100.0] {
        let g = solve_geodesic(&[1.0, 1.0], &ordering, c)?;
        let cfg = g.configuration()?;
        let d = geodesic_distance(&cfg.points()[0], &cfg.points()[1])?;
        println!("{c:>6} {d:>12.8} {:>20.12e} {:>20.12e}", g.lambda, -1.0 / d.sinh().powi(3));
    }
    Ok(())
}
