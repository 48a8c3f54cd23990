//! All geodesic central configurations for four bodies, one per ordering.

use h2cc::geodesic::{enumerate_orderings, solve_geodesic};
use h2cc::hessian::{constrained_hessian, spectrum};
use h2cc::ChartTag;

fn main() -> h2cc::Result<()> {
    let masses = [1.0, 2.0, 0.5, 1.5];
    for o in enumerate_orderings(masses.len())? {
        let g = solve_geodesic(&masses, &o, 1.0)?;
        let s = spectrum(&constrained_hessian(&g.configuration()?, ChartTag::Geodesic)?)?;
        let thetas: Vec<String> = g.sorted_thetas().iter().map(|t| format!("{t:+.6}")).collect();
        println!(
            "{o}  theta [{}]  lambda {:+.8}  inertia {:?}  ({} Newton steps)",
            thetas.join(" "),
            g.lambda,
            s.inertia(),
            g.iterations
        );
    }
    Ok(())
}
