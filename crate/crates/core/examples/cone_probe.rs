//! Samples the boundary of the invariant cone at a geodesic CC and reports
//! how strictly the linear flow points inward.

use h2cc::geodesic::{cone_invariance_probe, distance_inequalities_check, enumerate_orderings, solve_geodesic};

fn main() -> h2cc::Result<()> {
    let masses = [1.0, 3.0, 0.5, 2.0];
    for o in enumerate_orderings(masses.len())?.into_iter().take(4) {
        let g = solve_geodesic(&masses, &o, 2.0)?;
        let r = cone_invariance_probe(&g, 500, 1)?;
        println!(
            "{o}: distance inequalities {}, {} boundary samples, {} equal pairs, min inward rate {:.3e}",
            distance_inequalities_check(&g.sorted_thetas())?,
            r.samples,
            r.pairs_checked,
            r.min_relative_derivative
        );
    }
    Ok(())
}
