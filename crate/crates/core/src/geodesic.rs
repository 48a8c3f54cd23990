//! Geodesic central configurations: all bodies on the hyperbola `y = 0`.
//!
//! On H¹ the distance is `|θ_i − θ_j|`, so the reduced problem is a smooth
//! system in `(θ, λ)` on each ordering cell. There is
//! exactly one solution per ordering (up to reversal), so a damped Newton
//! iteration from an evenly spaced start is all that is needed.
//!
//! The spectral part builds the matrices `C`, `M̄`, `A` and the normal block
//! `H_φ = C M̄ (A − 2λ) C`, and checks the eigenstructure of `A`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::configuration::Configuration;
use crate::error::{CcError, Result};
use crate::linalg::{default_zero_tolerance, inertia_of, jacobi_eigen};

/// Guard on `N!/2` for [`enumerate_orderings`].
pub const MAX_ORDERINGS: u64 = 1_000_000;
pub const NEWTON_BUDGET: usize = 200;
pub const STEP_TOL: f64 = 1e-12;
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Bodies listed in increasing `θ`, identified with the reversed list.
///
/// Stored zero-based; the canonical representative is the lexicographically
/// smaller of the list and its reversal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Ordering(Vec<usize>);

impl Ordering {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(CcError::InvalidConfiguration(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        let rev: Vec<usize> = perm.iter().rev().copied().collect();
        Ok(Ordering(if rev < perm { rev } else { perm }))
    }

    /// Ordering read off from positions along the geodesic.
    pub fn from_positions(thetas: &[f64]) -> Result<Self> {
        let mut idx: Vec<usize> = (0..thetas.len()).collect();
        idx.sort_by(|&a, &b| thetas[a].total_cmp(&thetas[b]));
        Self::new(idx)
    }

    pub fn bodies(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// One-based, dash separated: `1-3-2`.
impl fmt::Display for Ordering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|b| (b + 1).to_string()).collect();
        f.write_str(&parts.join("-"))
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// The `N!/2` canonical orderings in lexicographic order.
pub fn enumerate_orderings(n: usize) -> Result<Vec<Ordering>> {
    if n < 2 {
        return Err(CcError::Precondition(format!("need N >= 2, got {n}")));
    }
    let mut count: u64 = 1;
    for k in 3..=n as u64 {
        count = count.saturating_mul(k);
        if count > MAX_ORDERINGS {
            return Err(CcError::SizeLimit(format!("N = {n} gives more than {MAX_ORDERINGS} orderings")));
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(count as usize);
    loop {
        // a permutation is canonical iff its first entry is below its last
        if perm[0] < perm[n - 1] {
            out.push(Ordering(perm.clone()));
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(out)
}

/// A solved geodesic CC. `thetas` is indexed by body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicCC {
    pub ordering: Ordering,
    pub thetas: Vec<f64>,
    pub masses: Vec<f64>,
    pub level: f64,
    pub lambda: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl GeodesicCC {
    pub fn configuration(&self) -> Result<Configuration> {
        Configuration::from_thetas(&self.thetas, self.masses.clone())
    }

    /// `θ` in increasing order along the geodesic.
    pub fn sorted_thetas(&self) -> Vec<f64> {
        self.ordering.bodies().iter().map(|&b| self.thetas[b]).collect()
    }
}

/// Reduced quantities on H¹.
struct Reduced {
    grad_u: Vec<f64>,
    hess_u: DMatrix<f64>,
    inertia: f64,
    grad_i: Vec<f64>,
    hess_i: Vec<f64>,
}

fn reduced(thetas: &[f64], m: &[f64]) -> Reduced {
    let n = thetas.len();
    let mut grad_u = vec![0.0; n];
    let mut hess_u = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = thetas[i] - thetas[j];
            let s = diff.abs().sinh();
            let csch2 = 1.0 / (s * s);
            let coth = diff.abs().cosh() / s;
            let g = m[i] * m[j] * csch2 * diff.signum();
            grad_u[i] -= g;
            grad_u[j] += g;
            let h = 2.0 * m[i] * m[j] * coth * csch2;
            hess_u[(i, j)] -= h;
            hess_u[(j, i)] -= h;
            hess_u[(i, i)] += h;
            hess_u[(j, j)] += h;
        }
    }
    Reduced {
        grad_u,
        hess_u,
        inertia: thetas.iter().zip(m).map(|(t, mi)| mi * t.sinh().powi(2)).sum(),
        grad_i: thetas.iter().zip(m).map(|(t, mi)| mi * (2.0 * t).sinh()).collect(),
        hess_i: thetas.iter().zip(m).map(|(t, mi)| 2.0 * mi * (2.0 * t).cosh()).collect(),
    }
}

/// Multiplier minimizing `|∇U − λ∇I|` in the metric `diag(m)`.
fn reduced_lambda(r: &Reduced, m: &[f64]) -> f64 {
    let num: f64 = (0..m.len()).map(|i| r.grad_u[i] * r.grad_i[i] / m[i]).sum();
    let den: f64 = (0..m.len()).map(|i| r.grad_i[i] * r.grad_i[i] / m[i]).sum();
    num / den
}

/// `|M⁻¹(∇U − λ∇I)|` in the mass metric plus `|I − c|`.
fn reduced_residual(r: &Reduced, m: &[f64], lambda: f64, c: f64) -> f64 {
    let s: f64 = (0..m.len()).map(|i| (r.grad_u[i] - lambda * r.grad_i[i]).powi(2) / m[i]).sum();
    s.sqrt() + (r.inertia - c).abs()
}

fn ordered(thetas: &[f64], ordering: &Ordering) -> bool {
    ordering.bodies().windows(2).all(|w| thetas[w[0]] < thetas[w[1]])
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Evenly spaced start with `Σ m sinh 2θ = 0` and `I = c`.
fn initial_guess(m: &[f64], ordering: &Ordering, c: f64) -> Vec<f64> {
    let n = m.len();
    let at = |spacing: f64| {
        let grid: Vec<f64> = (0..n).map(|k| spacing * (k as f64 - 0.5 * (n - 1) as f64)).collect();
        let place = |shift: f64| {
            let mut t = vec![0.0; n];
            for (k, &b) in ordering.bodies().iter().enumerate() {
                t[b] = grid[k] + shift;
            }
            t
        };
        let span = spacing * n as f64 + 1.0;
        let shift = bisect(-span, span, |s| place(s).iter().zip(m).map(|(t, mi)| mi * (2.0 * t).sinh()).sum());
        place(shift)
    };
    let inertia = |t: &[f64]| -> f64 { t.iter().zip(m).map(|(t, mi)| mi * t.sinh().powi(2)).sum() };
    let mut hi = 1.0;
    while inertia(&at(hi)) < c && hi < 50.0 {
        hi *= 2.0;
    }
    let spacing = bisect(0.0, hi, |s| inertia(&at(s)) - c);
    at(spacing)
}

/// Geodesic CC for one ordering at level `c`.
pub fn solve_geodesic(masses: &[f64], ordering: &Ordering, c: f64) -> Result<GeodesicCC> {
    let n = masses.len();
    if n < 2 || ordering.len() != n {
        return Err(CcError::Precondition("ordering length must equal N >= 2".into()));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(CcError::Precondition(format!("level c = {c} must be positive")));
    }
    if masses.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
        return Err(CcError::InvalidConfiguration("masses must be positive".into()));
    }
    let start = initial_guess(masses, ordering, c);
    solve_geodesic_from(masses, ordering, c, start)
}

/// Newton iteration from a caller-supplied start (for example a rescaled
/// solution at another level).
pub fn solve_geodesic_from(masses: &[f64], ordering: &Ordering, c: f64, start: Vec<f64>) -> Result<GeodesicCC> {
    let n = masses.len();
    if !ordered(&start, ordering) {
        return Err(CcError::OrderViolation);
    }
    let mut theta = start;
    let mut r = reduced(&theta, masses);
    let mut lambda = reduced_lambda(&r, masses);
    let mut res = reduced_residual(&r, masses, lambda, c);

    for iter in 0..NEWTON_BUDGET {
        // bordered system [H_θ − λ D²I, −∇I; ∇Iᵀ, 0] (δθ, δλ) = −(F, I − c)
        let mut jac = DMatrix::<f64>::zeros(n + 1, n + 1);
        let mut rhs = DVector::<f64>::zeros(n + 1);
        for i in 0..n {
            for j in 0..n {
                jac[(i, j)] = r.hess_u[(i, j)];
            }
            jac[(i, i)] -= lambda * r.hess_i[i];
            jac[(i, n)] = -r.grad_i[i];
            jac[(n, i)] = r.grad_i[i];
            rhs[i] = -(r.grad_u[i] - lambda * r.grad_i[i]);
        }
        rhs[n] = -(r.inertia - c);
        let Some(step) = jac.lu().solve(&rhs) else {
            return Err(CcError::SingularSystem { condition: 0.0 });
        };

        let mut alpha = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = (0..n).map(|i| theta[i] + alpha * step[i]).collect();
            if ordered(&trial, ordering) {
                let rt = reduced(&trial, masses);
                let lt = lambda + alpha * step[n];
                let res_t = reduced_residual(&rt, masses, lt, c);
                if res_t < res {
                    break Some((trial, rt, lt, res_t));
                }
            }
            alpha *= 0.5;
            if alpha < 1e-12 {
                break None;
            }
        };
        let step_norm = alpha * step.norm();
        match accepted {
            Some((t, rt, lt, res_t)) => {
                theta = t;
                r = rt;
                lambda = lt;
                res = res_t;
            }
            None if res < RESIDUAL_TOL => {
                // roundoff floor reached
                return finish(masses, ordering, c, theta, lambda, res, iter);
            }
            None if !ordered(&theta, ordering) || step.norm() > 1.0 => return Err(CcError::OrderViolation),
            None => return Err(CcError::NoConvergence { iterations: iter, residual: res }),
        }
        if res < RESIDUAL_TOL && step_norm < STEP_TOL {
            return finish(masses, ordering, c, theta, lambda, res, iter + 1);
        }
    }
    if res < RESIDUAL_TOL {
        return finish(masses, ordering, c, theta, lambda, res, NEWTON_BUDGET);
    }
    Err(CcError::NoConvergence { iterations: NEWTON_BUDGET, residual: res })
}

fn finish(
    masses: &[f64],
    ordering: &Ordering,
    c: f64,
    thetas: Vec<f64>,
    lambda: f64,
    residual: f64,
    iterations: usize,
) -> Result<GeodesicCC> {
    Ok(GeodesicCC {
        ordering: ordering.clone(),
        thetas,
        masses: masses.to_vec(),
        level: c,
        lambda,
        residual,
        iterations,
    })
}

/// All `N!/2` geodesic CCs.
pub fn solve_all_geodesic(masses: &[f64], c: f64) -> Result<Vec<Result<GeodesicCC>>> {
    Ok(enumerate_orderings(masses.len())?.iter().map(|o| solve_geodesic(masses, o, c)).collect())
}

/// `C = diag(cosh θ)`, `M̄ = diag(m)`, `A`, and `H_φ` from its explicit form.
#[derive(Debug, Clone)]
pub struct SpectralMatrices {
    pub c: DMatrix<f64>,
    pub mbar: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub h_phi: DMatrix<f64>,
    pub lambda: f64,
}

impl SpectralMatrices {
    /// `C M̄ (A − 2λ) C`.
    pub fn factorized(&self) -> DMatrix<f64> {
        let n = self.a.nrows();
        let shifted = &self.a - DMatrix::<f64>::identity(n, n) * (2.0 * self.lambda);
        &self.c * &self.mbar * shifted * &self.c
    }

    /// Largest entrywise gap between `H_φ` and its factorization, relative to `|H_φ|_max`.
    pub fn factorization_defect(&self) -> f64 {
        (&self.h_phi - self.factorized()).amax() / self.h_phi.amax()
    }

    /// `M̄^{1/2} A M̄^{-1/2}`: symmetric and similar to `A`.
    pub fn symmetrized_a(&self) -> DMatrix<f64> {
        let n = self.a.nrows();
        let s = DMatrix::from_fn(n, n, |i, j| self.a[(i, j)] * (self.mbar[(i, i)] / self.mbar[(j, j)]).sqrt());
        (&s + s.transpose()) * 0.5
    }
}

pub fn build_spectral_matrices(g: &GeodesicCC) -> SpectralMatrices {
    let n = g.thetas.len();
    let (t, m) = (&g.thetas, &g.masses);
    let s3 = |i: usize, j: usize| (t[i] - t[j]).abs().sinh().powi(3);
    let cosh: Vec<f64> = t.iter().map(|x| x.cosh()).collect();

    let a = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            -(0..n).filter(|&k| k != i).map(|k| m[k] * cosh[k] / (cosh[i] * s3(i, k))).sum::<f64>()
        } else {
            m[j] / s3(i, j)
        }
    });
    let h_phi = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            let u: f64 = (0..n).filter(|&k| k != i).map(|k| -m[i] * m[k] * cosh[i] * cosh[k] / s3(i, k)).sum();
            u - 2.0 * g.lambda * m[i] * cosh[i] * cosh[i]
        } else {
            m[i] * m[j] * cosh[i] * cosh[j] / s3(i, j)
        }
    });
    SpectralMatrices {
        c: DMatrix::from_diagonal(&DVector::from_vec(cosh)),
        mbar: DMatrix::from_diagonal(&DVector::from_column_slice(m)),
        a,
        h_phi,
        lambda: g.lambda,
    }
}

/// Eigenstructure of `A`: the two explicit eigenvectors and the gap below `2λ`.
#[derive(Debug, Clone, Serialize)]
pub struct AEigenReport {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// `|A v₁| / (|A| |v₁|)`, `v₁ = (cosh θ_i)`.
    pub v1_defect: f64,
    /// `|A v₂ − 2λ v₂| / (|A| |v₂|)`, `v₂ = (sinh θ_i)`.
    pub v2_defect: f64,
    /// `2λ − max(remaining eigenvalues)`; positive when the rest lie below `2λ`.
    /// `None` for N = 2.
    pub margin: Option<f64>,
}

pub fn a_eigen_report(g: &GeodesicCC, s: &SpectralMatrices) -> AEigenReport {
    let v1 = DVector::from_iterator(g.thetas.len(), g.thetas.iter().map(|t| t.cosh()));
    let v2 = DVector::from_iterator(g.thetas.len(), g.thetas.iter().map(|t| t.sinh()));
    let an = s.a.norm();
    let v1_defect = (&s.a * &v1).norm() / (an * v1.norm());
    let v2_defect = (&s.a * &v2 - &v2 * (2.0 * g.lambda)).norm() / (an * v2.norm());

    let mut eigenvalues = jacobi_eigen(&s.symmetrized_a()).values;
    eigenvalues.reverse();
    // the top two are 0 and 2λ; the rest should sit strictly below 2λ
    let margin = eigenvalues.get(2).map(|e| 2.0 * g.lambda - e);
    AEigenReport { eigenvalues, v1_defect, v2_defect, margin }
}

/// Inertia of `H_φ` and of `A − 2λ`, computed separately.
#[derive(Debug, Clone, Serialize)]
pub struct SylvesterReport {
    pub h_phi_inertia: (usize, usize, usize),
    pub shifted_a_inertia: (usize, usize, usize),
    pub h_phi_eigenvalues: Vec<f64>,
    pub shifted_a_eigenvalues: Vec<f64>,
}

impl SylvesterReport {
    /// `(N − 2, 1, 1)`.
    pub fn matches_expected(&self, n: usize) -> bool {
        self.h_phi_inertia == (n - 2, 1, 1)
    }
}

pub fn verify_inertia_via_sylvester(g: &GeodesicCC) -> Result<SylvesterReport> {
    let s = build_spectral_matrices(g);
    let n = g.thetas.len();
    let h = jacobi_eigen(&s.h_phi).values;
    let shifted = s.symmetrized_a() - DMatrix::<f64>::identity(n, n) * (2.0 * g.lambda);
    let a = jacobi_eigen(&shifted).values;
    let report = SylvesterReport {
        h_phi_inertia: inertia_of(&h, default_zero_tolerance(&h)),
        shifted_a_inertia: inertia_of(&a, default_zero_tolerance(&a)),
        h_phi_eigenvalues: h,
        shifted_a_eigenvalues: a,
    };
    if report.h_phi_inertia != report.shifted_a_inertia {
        return Err(CcError::InertiaMismatch(format!(
            "H_phi {:?} vs A - 2 lambda {:?}",
            report.h_phi_inertia, report.shifted_a_inertia
        )));
    }
    Ok(report)
}

/// Eigenvalues of `H_θ` restricted to the geodesic directions tangent to
/// `S_c`, in a basis orthonormal for `diag(m)`. Ascending.
pub fn geodesic_direction_spectrum(g: &GeodesicCC) -> Vec<f64> {
    let n = g.thetas.len();
    let m = &g.masses;
    let r = reduced(&g.thetas, m);
    let scale = DVector::from_iterator(n, m.iter().map(|x| 1.0 / x.sqrt()));
    let h = DMatrix::from_fn(n, n, |i, j| {
        let mut v = r.hess_u[(i, j)];
        if i == j {
            v -= g.lambda * r.hess_i[i];
        }
        v * scale[i] * scale[j]
    });
    let mut normal = DVector::from_iterator(n, (0..n).map(|i| r.grad_i[i] * scale[i]));
    normal /= normal.norm();
    let complement = orthogonal_complement(&normal);
    jacobi_eigen(&(complement.transpose() * h * &complement)).values
}

/// Columns spanning the orthogonal complement of a unit vector.
pub(crate) fn orthogonal_complement(unit: &DVector<f64>) -> DMatrix<f64> {
    let n = unit.len();
    let mut u = unit.clone();
    u[0] += if unit[0] >= 0.0 { 1.0 } else { -1.0 };
    let reflector = DMatrix::<f64>::identity(n, n) - (&u * u.transpose()) * (2.0 / u.norm_squared());
    reflector.columns(1, n - 1).into_owned()
}

fn check_increasing(thetas: &[f64]) -> Result<()> {
    if thetas.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(CcError::Precondition("positions must be strictly increasing".into()));
    }
    Ok(())
}

/// Both distance inequalities over every index triple.
///
/// With `f(i, k) = sinh³|θ_i − θ_k| cosh θ_i` they read `f(j, k) > f(i, k)`
/// for `k < i < j`, and `f(i, k) > f(j, k)` for `i < j < k`.
pub fn distance_inequalities_check(thetas: &[f64]) -> Result<bool> {
    check_increasing(thetas)?;
    let n = thetas.len();
    let f = |i: usize, k: usize| (thetas[i] - thetas[k]).abs().sinh().powi(3) * thetas[i].cosh();
    for k in 0..n {
        for i in 0..n {
            for j in (i + 1)..n {
                let ok = if k < i {
                    f(j, k) > f(i, k)
                } else if j < k {
                    f(i, k) > f(j, k)
                } else {
                    true
                };
                if !ok {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Result of sampling the boundary of the cone around `v₂`.
#[derive(Debug, Clone, Serialize)]
pub struct ConeReport {
    pub samples: usize,
    pub pairs_checked: usize,
    /// Smallest `d/dt (u_j / cosh θ_j − u_i / cosh θ_i)` over equal pairs,
    /// relative to `|A| |u|`.
    pub min_relative_derivative: f64,
}

/// True if `u` lies on the boundary of the cone: in the hyperplane
/// `Σ m cosh θ u = 0`, monotone in the ratios `u / cosh θ` along the
/// ordering, with at least one equality and one strict step.
pub fn is_cone_boundary(g: &GeodesicCC, u: &[f64], tol: f64) -> bool {
    let order = g.ordering.bodies();
    let z: Vec<f64> = order.iter().map(|&b| u[b] / g.thetas[b].cosh()).collect();
    let scale = z.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let plane: f64 = (0..u.len()).map(|i| g.masses[i] * g.thetas[i].cosh() * u[i]).sum();
    let gaps: Vec<f64> = z.windows(2).map(|w| (w[1] - w[0]) / scale).collect();
    plane.abs() <= tol * scale
        && gaps.iter().all(|&d| d >= -tol)
        && gaps.iter().any(|&d| d.abs() <= tol)
        && gaps.iter().any(|&d| d > tol)
}

/// Samples boundary points of the cone and checks that `u̇ = A u` pushes each
/// equal pair apart.
pub fn cone_invariance_probe(g: &GeodesicCC, samples: usize, seed: u64) -> Result<ConeReport> {
    let n = g.thetas.len();
    let s = build_spectral_matrices(g);
    let an = s.a.norm();
    let order = g.ordering.bodies().to_vec();
    let cosh: Vec<f64> = g.thetas.iter().map(|t| t.cosh()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ConeReport { samples: 0, pairs_checked: 0, min_relative_derivative: f64::INFINITY };
    // for N = 2 the cone is a ray and its boundary is the origin
    if n < 3 {
        return Ok(report);
    }
    while report.samples < samples {
        let mut z: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        z.sort_by(f64::total_cmp);
        let len = rng.random_range(2..n);
        let start = rng.random_range(0..=n - len);
        let mean = z[start..start + len].iter().sum::<f64>() / len as f64;
        z[start..start + len].iter_mut().for_each(|v| *v = mean);
        // z is indexed by position; shift into the hyperplane Σ m cosh² z = 0
        let w: Vec<f64> = order.iter().map(|&b| g.masses[b] * cosh[b] * cosh[b]).collect();
        let k = z.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / w.iter().sum::<f64>();
        z.iter_mut().for_each(|v| *v -= k);
        if z.windows(2).all(|p| p[0] == p[1]) {
            continue;
        }
        let mut u = DVector::<f64>::zeros(n);
        for (pos, &b) in order.iter().enumerate() {
            u[b] = cosh[b] * z[pos];
        }
        let du = &s.a * &u;
        let un = u.norm();
        for pos in start..start + len - 1 {
            let (i, j) = (order[pos], order[pos + 1]);
            let deriv = du[j] / cosh[j] - du[i] / cosh[i];
            report.pairs_checked += 1;
            report.min_relative_derivative = report.min_relative_derivative.min(deriv / (an * un));
            if deriv <= 0.0 {
                return Err(CcError::ConeViolation { sample: report.samples, derivative: deriv });
            }
        }
        report.samples += 1;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ChartTag;
    use crate::hessian::{constrained_hessian, hessian_chart, spectrum};
    use crate::potential::{cc_residual, moment_relations_check};

    #[test]
    fn ordering_counts() {
        assert_eq!(enumerate_orderings(2).unwrap().len(), 1);
        assert_eq!(enumerate_orderings(3).unwrap().len(), 3);
        assert_eq!(enumerate_orderings(4).unwrap().len(), 12);
        assert_eq!(enumerate_orderings(9).unwrap().len(), 181_440);
        assert!(matches!(enumerate_orderings(10), Err(CcError::SizeLimit(_))));
        assert!(enumerate_orderings(1).is_err());
        let o = Ordering::new(vec![2, 0, 1]).unwrap();
        assert_eq!(o.bodies(), &[1, 0, 2]);
        assert_eq!(o.to_string(), "2-1-3");
    }

    #[test]
    fn two_body_closed_form() {
        let o = Ordering::new(vec![0, 1]).unwrap();
        let g = solve_geodesic(&[1.0, 1.0], &o, 1.0).unwrap();
        let a = (0.5f64).sqrt().asinh();
        assert!((g.thetas[0] + a).abs() < 1e-12 && (g.thetas[1] - a).abs() < 1e-12);
        let d = g.thetas[1] - g.thetas[0];
        let expected = -1.0 / d.sinh().powi(3);
        assert!(((g.lambda - expected) / expected).abs() < 1e-10);
        assert!(g.residual < RESIDUAL_TOL);
    }

    #[test]
    fn equal_three_body_middle_at_origin() {
        let o = Ordering::new(vec![0, 1, 2]).unwrap();
        let g = solve_geodesic(&[1.0; 3], &o, 1.0).unwrap();
        assert!(g.thetas[1].abs() < 1e-12);
        let balance: f64 = g.thetas.iter().map(|t| t.sinh() * t.cosh()).sum();
        assert!(balance.abs() < 1e-8);
    }

    #[test]
    fn embedded_solution_is_planar_cc() {
        let m = [0.7, 1.9, 1.2];
        for o in enumerate_orderings(3).unwrap() {
            let g = solve_geodesic(&m, &o, 1.0).unwrap();
            assert!(g.lambda < 0.0);
            let cfg = g.configuration().unwrap();
            assert!(cc_residual(&cfg).unwrap() < 1e-9);
            assert!(moment_relations_check(&cfg) < 1e-8);
            let rel = ((crate::potential::lambda_value(&cfg).unwrap() - g.lambda) / g.lambda).abs();
            assert!(rel < 1e-9);
            assert_eq!(Ordering::from_positions(&g.thetas).unwrap(), o);
        }
    }

    #[test]
    fn warm_start_at_other_level() {
        let m = [1.0, 2.0, 0.5, 1.5];
        let o = Ordering::new(vec![1, 3, 0, 2]).unwrap();
        let g1 = solve_geodesic(&m, &o, 1.0).unwrap();
        let start: Vec<f64> = g1.thetas.iter().map(|t| t * 1.2).collect();
        let g2 = solve_geodesic_from(&m, &o, 2.0, start).unwrap();
        let fresh = solve_geodesic(&m, &o, 2.0).unwrap();
        for (a, b) in g2.thetas.iter().zip(&fresh.thetas) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn a_matrix_eigenvectors() {
        let m = [1.0, 1.3, 0.8, 2.1];
        for o in enumerate_orderings(4).unwrap() {
            let g = solve_geodesic(&m, &o, 1.0).unwrap();
            let s = build_spectral_matrices(&g);
            let r = a_eigen_report(&g, &s);
            assert!(r.v1_defect < 1e-9, "{}", r.v1_defect);
            assert!(r.v2_defect < 1e-8, "{}", r.v2_defect);
            assert!(r.margin.unwrap() > 0.0);
            assert!(s.factorization_defect() < 1e-9);
        }
    }

    #[test]
    fn symmetric_pair_a_entries() {
        let g = solve_geodesic(&[1.0, 1.0], &Ordering::new(vec![0, 1]).unwrap(), 1.0).unwrap();
        let s = build_spectral_matrices(&g);
        let d = g.thetas[1] - g.thetas[0];
        assert!((s.a[(0, 1)] - 1.0 / d.sinh().powi(3)).abs() < 1e-12);
        assert!((s.a[(1, 0)] - s.a[(0, 1)]).abs() < 1e-15);
    }

    #[test]
    fn sylvester_inertia() {
        let cases: [&[f64]; 3] = [&[1.0, 1.0], &[1.0, 1.0, 1.0], &[0.4, 1.1, 2.0, 0.9, 1.6]];
        for m in cases {
            let n = m.len();
            let o = Ordering::new((0..n).collect()).unwrap();
            let g = solve_geodesic(m, &o, 1.0).unwrap();
            let r = verify_inertia_via_sylvester(&g).unwrap();
            assert_eq!(r.h_phi_inertia, (n - 2, 1, 1));
        }
    }

    #[test]
    fn chart_hessian_blocks_at_geodesic_cc() {
        let m = [1.0, 1.3, 0.8, 2.1];
        let g = solve_geodesic(&m, &Ordering::new(vec![0, 2, 1, 3]).unwrap(), 1.0).unwrap();
        let cfg = g.configuration().unwrap();
        let h = hessian_chart(&cfg, ChartTag::Geodesic).unwrap();
        let n = m.len();
        let off = h.view((0, n), (n, n)).amax();
        assert!(off < 1e-9 * h.amax());
        let s = build_spectral_matrices(&g);
        let phi = h.view((n, n), (n, n)).into_owned();
        assert!((&phi - &s.h_phi).amax() < 1e-9 * s.h_phi.amax());
        let lam_part = crate::hessian::hessian_chart_with_lambda(&cfg, ChartTag::Geodesic, 0.0).unwrap() - &h;
        for i in 0..n {
            let expected = 2.0 * g.lambda * m[i] * g.thetas[i].cosh().powi(2);
            assert!((lam_part[(n + i, n + i)] - expected).abs() < 1e-10 * expected.abs());
        }
        assert!(geodesic_direction_spectrum(&g).iter().all(|&e| e > 0.0));
        let spec = spectrum(&constrained_hessian(&cfg, ChartTag::Geodesic).unwrap()).unwrap();
        assert_eq!(spec.inertia(), (n - 2, 1, n));
    }

    #[test]
    fn distance_inequalities() {
        assert!(distance_inequalities_check(&[-1.0, 0.0, 1.0]).unwrap());
        assert!(distance_inequalities_check(&[1.0, 0.0, -1.0]).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let n = rng.random_range(2..=6);
            let mut t: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            t.sort_by(f64::total_cmp);
            if t.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
            assert!(distance_inequalities_check(&t).unwrap(), "{t:?}");
        }
    }

    #[test]
    fn cone_probe() {
        let g = solve_geodesic(&[1.0; 3], &Ordering::new(vec![0, 1, 2]).unwrap(), 1.0).unwrap();
        let r = cone_invariance_probe(&g, 100, 3).unwrap();
        assert_eq!(r.samples, 100);
        assert!(r.min_relative_derivative > 0.0);
        let v2: Vec<f64> = g.thetas.iter().map(|t| t.sinh()).collect();
        assert!(!is_cone_boundary(&g, &v2, 1e-9));

        let m = [0.6, 1.4, 1.0, 2.2, 0.9];
        let g = solve_geodesic(&m, &Ordering::new(vec![3, 0, 4, 1, 2]).unwrap(), 1.0).unwrap();
        assert_eq!(cone_invariance_probe(&g, 500, 5).unwrap().samples, 500);
    }
}
