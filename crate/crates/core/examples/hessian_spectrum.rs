//! Constrained Hessian at a geodesic CC in both charts, plus the spectral
//! matrices behind the index count.

use h2cc::geodesic::{a_eigen_report, build_spectral_matrices, solve_geodesic, verify_inertia_via_sylvester, Ordering};
use h2cc::hessian::{constrained_hessian, rotation_null_vector, spectrum};
use h2cc::ChartTag;

fn main() -> h2cc::Result<()> {
    let g = solve_geodesic(&[1.0, 0.7, 1.4, 0.9, 1.1], &Ordering::new(vec![0, 1, 2, 3, 4])?, 1.0)?;
    let cfg = g.configuration()?;
    for tag in [ChartTag::Geodesic, ChartTag::Graph] {
        let h = constrained_hessian(&cfg, tag)?;
        let s = spectrum(&h)?;
        let rot = rotation_null_vector(&cfg).to_chart(&cfg, tag);
        println!("{tag:?} chart: inertia {:?}, rotation kernel defect {:.1e}", s.inertia(), h.kernel_defect(&rot));
        println!("  eigenvalues {:?}", s.eigenvalues.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>());
    }
    let m = build_spectral_matrices(&g);
    println!("H_phi = C M (A - 2 lambda) C up to {:.1e}", m.factorization_defect());
    let a = a_eigen_report(&g, &m);
    println!(
        "A eigenvalues {:?}, 2 lambda = {:.4}",
        a.eigenvalues.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>(),
        2.0 * g.lambda
    );
    let syl = verify_inertia_via_sylvester(&g)?;
    println!("inertia of H_phi {:?} = inertia of A - 2 lambda {:?}", syl.h_phi_inertia, syl.shifted_a_inertia);
    Ok(())
}
