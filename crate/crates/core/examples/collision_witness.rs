//! The collision witness: `dU` along it diverges while `dI` stays zero.

use h2cc::witness::{collision_repulsion_witness, two_cluster_example};

fn main() -> h2cc::Result<()> {
    let clusters = vec![vec![0, 1], vec![2]];
    println!("{:>8} {:>16} {:>12} {:>10}", "eps", "dU(v)", "dI(v)", "|v|");
    for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
        let w = collision_repulsion_witness(&two_cluster_example(eps), &clusters)?;
        println!("{eps:>8.0e} {:>16.6e} {:>12.1e} {:>10.6}", w.du, w.di, w.norm);
    }
    Ok(())
}
