//! Exact Morse accounting for a census on `S_c / SO(2)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CcError, Result};
use crate::search::CCRecord;

/// Integer polynomial, coefficients by degree, trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IntPolynomial {
    coeffs: Vec<i128>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<i128>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        IntPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::new(vec![1])
    }

    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> i128 {
        self.coeffs.get(k).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, t: i128) -> Result<i128> {
        self.coeffs.iter().rev().try_fold(0i128, |acc, &c| {
            acc.checked_mul(t).and_then(|v| v.checked_add(c)).ok_or_else(|| overflow("evaluation"))
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n)
            .map(|k| self.coeff(k).checked_add(other.coeff(k)).ok_or_else(|| overflow("addition")))
            .collect::<Result<_>>()?;
        Ok(Self::new(c))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n)
            .map(|k| self.coeff(k).checked_sub(other.coeff(k)).ok_or_else(|| overflow("subtraction")))
            .collect::<Result<_>>()?;
        Ok(Self::new(c))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero());
        }
        let mut c = vec![0i128; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                let term = a.checked_mul(*b).ok_or_else(|| overflow("multiplication"))?;
                c[i + j] = c[i + j].checked_add(term).ok_or_else(|| overflow("multiplication"))?;
            }
        }
        Ok(Self::new(c))
    }

    /// Synthetic division by `1 + t`: `(quotient, remainder)` with
    /// `self = (1 + t)·quotient + remainder`.
    pub fn div_one_plus_t(&self) -> Result<(Self, i128)> {
        let d = &self.coeffs;
        if d.is_empty() {
            return Ok((Self::zero(), 0));
        }
        let n = d.len() - 1;
        let mut q = vec![0i128; n];
        if n > 0 {
            q[n - 1] = d[n];
            for k in (1..n).rev() {
                q[k - 1] = d[k].checked_sub(q[k]).ok_or_else(|| overflow("division"))?;
            }
        }
        let rem = if n > 0 { d[0].checked_sub(q[0]).ok_or_else(|| overflow("division"))? } else { d[0] };
        Ok((Self::new(q), rem))
    }
}

fn overflow(what: &str) -> CcError {
    CcError::Overflow(format!("integer overflow in polynomial {what}"))
}

/// `1 + 5t + 6t²`; the zero polynomial prints as `0`.
impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else { "+" };
            if first {
                if c < 0 {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.unsigned_abs();
            match (k, a) {
                (0, _) => write!(f, "{a}")?,
                (1, 1) => f.write_str("t")?,
                (1, _) => write!(f, "{a}t")?,
                (_, 1) => write!(f, "t^{k}")?,
                _ => write!(f, "{a}t^{k}")?,
            }
        }
        Ok(())
    }
}

/// Count of classes by quotient index. Degenerate classes are an error.
pub fn morse_polynomial(records: &[CCRecord]) -> Result<IntPolynomial> {
    if let Some(r) = records.iter().find(|r| r.degenerate()) {
        return Err(CcError::DegenerateInput(format!("class with nullity {} is not Morse", r.nullity())));
    }
    Ok(morse_polynomial_from_indices(records.iter().map(|r| r.index())))
}

pub fn morse_polynomial_from_indices(indices: impl IntoIterator<Item = usize>) -> IntPolynomial {
    let mut c: Vec<i128> = Vec::new();
    for k in indices {
        if c.len() <= k {
            c.resize(k + 1, 0);
        }
        c[k] += 1;
    }
    IntPolynomial::new(c)
}

/// `Π_{k=2}^{N−1} (1 + k t)`.
pub fn poincare_polynomial(n: usize) -> Result<IntPolynomial> {
    if n < 2 {
        return Err(CcError::Precondition(format!("need N >= 2, got {n}")));
    }
    (2..n).try_fold(IntPolynomial::one(), |p, k| p.checked_mul(&IntPolynomial::new(vec![1, k as i128])))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseAudit {
    pub m: IntPolynomial,
    pub p: IntPolynomial,
    /// `(M − P)/(1 + t)` when the division is exact.
    pub r: Option<IntPolynomial>,
    pub division_exact: bool,
    pub r_nonnegative: bool,
    /// Exact division with a nonnegative quotient.
    pub census_complete_hypothesis: bool,
    pub degenerate_classes: usize,
}

impl MorseAudit {
    /// Exactness and nonnegativity hold, and every class was nondegenerate.
    pub fn consistent(&self) -> bool {
        self.census_complete_hypothesis && self.degenerate_classes == 0
    }

    pub fn verdict(&self) -> &'static str {
        if self.degenerate_classes > 0 {
            "invalid: degenerate classes present"
        } else if self.census_complete_hypothesis {
            "consistent with a complete census"
        } else {
            "census provably incomplete"
        }
    }
}

/// Checks `M(t) = P(t) + (1 + t) R(t)` with `R ≥ 0`.
pub fn morse_inequality_audit(m: &IntPolynomial, p: &IntPolynomial) -> Result<MorseAudit> {
    let (q, rem) = m.checked_sub(p)?.div_one_plus_t()?;
    let division_exact = rem == 0;
    let r_nonnegative = division_exact && q.coeffs().iter().all(|&c| c >= 0);
    Ok(MorseAudit {
        m: m.clone(),
        p: p.clone(),
        r: division_exact.then_some(q),
        division_exact,
        r_nonnegative,
        census_complete_hypothesis: division_exact && r_nonnegative,
        degenerate_classes: 0,
    })
}

/// `((3N−4)(N−1)!/2, (2N−4)(N−1)!/2)`.
pub fn lower_bounds(n: usize) -> Result<(u128, u128)> {
    if n < 2 {
        return Err(CcError::Precondition(format!("need N >= 2, got {n}")));
    }
    let n = n as u128;
    let fact = (1..n).try_fold(1u128, |acc, k| acc.checked_mul(k)).ok_or_else(|| overflow("factorial"))?;
    let half = |k: u128| k.checked_mul(fact).map(|v| v / 2).ok_or_else(|| overflow("bound"));
    Ok((half(3 * n - 4)?, half(2 * n - 4)?))
}

/// `N!/2`.
pub fn geodesic_count(n: usize) -> Result<u128> {
    if n < 2 {
        return Err(CcError::Precondition(format!("need N >= 2, got {n}")));
    }
    let f = (1..=n as u128).try_fold(1u128, |acc, k| acc.checked_mul(k)).ok_or_else(|| overflow("factorial"))?;
    Ok(f / 2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub n: usize,
    pub masses: Vec<f64>,
    pub level: f64,
    pub classes: Vec<CCRecord>,
    pub found_total: usize,
    pub found_geodesic: usize,
    pub found_non_geodesic: usize,
    pub expected_geodesic: u128,
    pub bound_total: u128,
    pub bound_non_geodesic: u128,
    pub total_bound_met: bool,
    pub non_geodesic_bound_met: bool,
    pub audit: MorseAudit,
    pub verdict: String,
}

impl CensusReport {
    pub fn bounds_met(&self) -> bool {
        self.total_bound_met && self.non_geodesic_bound_met
    }
}

pub fn census_report(records: Vec<CCRecord>, masses: &[f64], c: f64) -> Result<CensusReport> {
    let n = masses.len();
    let degenerate = records.iter().filter(|r| r.degenerate()).count();
    let m = morse_polynomial_from_indices(records.iter().filter(|r| !r.degenerate()).map(|r| r.index()));
    let mut audit = morse_inequality_audit(&m, &poincare_polynomial(n)?)?;
    audit.degenerate_classes = degenerate;
    let (bound_total, bound_non_geodesic) = lower_bounds(n)?;
    let found_geodesic = records.iter().filter(|r| r.is_geodesic).count();
    let found_total = records.len();
    let found_non_geodesic = found_total - found_geodesic;
    Ok(CensusReport {
        n,
        masses: masses.to_vec(),
        level: c,
        found_total,
        found_geodesic,
        found_non_geodesic,
        expected_geodesic: geodesic_count(n)?,
        bound_total,
        bound_non_geodesic,
        total_bound_met: found_total as u128 >= bound_total,
        non_geodesic_bound_met: found_non_geodesic as u128 >= bound_non_geodesic,
        verdict: audit.verdict().to_string(),
        audit,
        classes: records,
    })
}
