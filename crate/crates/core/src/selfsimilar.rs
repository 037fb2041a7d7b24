//! Arithmetic of homogeneous self-similar sets: perfect powers, similarity
//! dimension, exact power sums and the Lipschitz-onto compatibility test.

use num_bigint::BigUint;
use num_integer::{Integer, Roots};
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

/// Decimal digits carried by [`power_sum_check`].
pub const POWER_SUM_DIGITS: u32 = 50;
/// Distance from one below which a power sum counts as equal to one.
pub const POWER_SUM_TOLERANCE_DIGITS: u32 = 20;
/// Largest exponent denominator accepted by [`power_sum_check`].
pub const MAX_DENOMINATOR: i64 = 4096;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SelfSimilarError {
    #[error("base must be an integer >= 2, got {0}")]
    InvalidBase(u64),
    #[error("ratio must lie in (0, 1), got {0}")]
    InvalidRatio(f64),
    #[error("no ratios given")]
    NoRatios,
    #[error("exponent {0} is not usable here")]
    InvalidExponent(String),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
}

/// Largest `k` such that `q` is a perfect `k`-th power.
pub fn max_integer_root(q: u64) -> Result<u32, SelfSimilarError> {
    if q < 2 {
        return Err(SelfSimilarError::InvalidBase(q));
    }
    let top = 63 - q.leading_zeros();
    Ok((1..=top.max(1))
        .rev()
        .find(|&k| q.nth_root(k).checked_pow(k) == Some(q))
        .unwrap_or(1))
}

/// Root of `sum beta_j^s = 1` by bisection down to adjacent floats.
///
/// A single ratio gives `s = 0`.
pub fn moran_dimension(ratios: &[f64]) -> Result<f64, SelfSimilarError> {
    if ratios.is_empty() {
        return Err(SelfSimilarError::NoRatios);
    }
    if let Some(&bad) = ratios.iter().find(|&&b| !(b > 0.0 && b < 1.0)) {
        return Err(SelfSimilarError::InvalidRatio(bad));
    }
    if ratios.len() == 1 {
        return Ok(0.0);
    }
    let excess = |s: f64| ratios.iter().map(|b| b.powf(s)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while excess(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if excess(lo).abs() <= excess(hi).abs() { lo } else { hi })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerSumCheck {
    pub sums_to_one: bool,
    pub all_integer: bool,
    /// Double-precision value of the sum, for display.
    pub value: f64,
}

/// Decides whether `sum_i q^(e_i) = 1` using fixed-point integer arithmetic
/// with 50 decimal digits: each term `q^(k + f/n)` is `q^k` times the floor
/// of an integer `n`-th root. Terms below `10^-55` are dropped.
pub fn power_sum_check(q: u64, exponents: &[Ratio<i64>]) -> Result<PowerSumCheck, SelfSimilarError> {
    if q < 2 {
        return Err(SelfSimilarError::InvalidBase(q));
    }
    let all_integer = exponents.iter().all(|e| e.is_integer());
    let value = exponents.iter().map(|e| (q as f64).powf(e.to_f64().unwrap_or(f64::NAN))).sum();
    let big_q = BigUint::from(q);
    let ten = BigUint::from(10u32);
    let one = ten.pow(POWER_SUM_DIGITS);
    let log10_q = (q as f64).log10();

    let mut sum = BigUint::zero();
    for e in exponents {
        let (p, n) = (*e.numer(), *e.denom());
        if n > MAX_DENOMINATOR {
            return Err(SelfSimilarError::InvalidExponent(e.to_string()));
        }
        let (k, f) = p.div_mod_floor(&n);
        if k >= 1 {
            // a term of at least q: the sum exceeds one
            return Ok(PowerSumCheck { sums_to_one: false, all_integer, value });
        }
        if ((k + 1) as f64) * log10_q < -((POWER_SUM_DIGITS + 5) as f64) {
            continue;
        }
        let n = n as u32;
        let root = (big_q.pow(f as u32) * ten.pow(POWER_SUM_DIGITS * n)).nth_root(n);
        sum += root / big_q.pow((-k) as u32);
    }
    let slack = ten.pow(POWER_SUM_DIGITS - POWER_SUM_TOLERANCE_DIGITS);
    let gap = if sum > one { &sum - &one } else { &one - &sum };
    Ok(PowerSumCheck { sums_to_one: gap <= slack, all_integer, value })
}

/// `q` pieces, each scaled by `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomogeneousSpec {
    pub q: u64,
    pub r: f64,
}

impl HomogeneousSpec {
    pub fn new(q: u64, r: f64) -> Result<Self, SelfSimilarError> {
        if q < 2 {
            return Err(SelfSimilarError::InvalidBase(q));
        }
        if !(r > 0.0 && r < 1.0) {
            return Err(SelfSimilarError::InvalidRatio(r));
        }
        Ok(HomogeneousSpec { q, r })
    }

    pub fn dimension(&self) -> f64 {
        (self.q as f64).ln() / (1.0 / self.r).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    DimensionMismatch,
    Compatible,
    Incompatible,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompatibilityReport {
    pub s_a: f64,
    pub s_b: f64,
    pub k: u32,
    /// `log beta_j / log r`.
    pub alphas: Vec<f64>,
    /// `k * alpha_j`; compatibility asks for positive integers here.
    pub multiplicities: Vec<f64>,
    pub verdict: Verdict,
    pub tolerance: f64,
    pub exact: bool,
}

/// Whether an `(q, r)` homogeneous set can be mapped onto a self-similar set
/// with ratios `b_ratios` by a Lipschitz map, decided in floating point with
/// one tolerance for both the dimension match and the integrality test.
pub fn lipschitz_onto_compatibility(
    a: HomogeneousSpec,
    b_ratios: &[f64],
    tol: f64,
) -> Result<CompatibilityReport, SelfSimilarError> {
    let a = HomogeneousSpec::new(a.q, a.r)?;
    if !(tol > 0.0) {
        return Err(SelfSimilarError::InvalidTolerance(tol));
    }
    let s_b = moran_dimension(b_ratios)?;
    let s_a = a.dimension();
    let k = max_integer_root(a.q)?;
    let alphas: Vec<f64> = b_ratios.iter().map(|b| b.ln() / a.r.ln()).collect();
    let multiplicities: Vec<f64> = alphas.iter().map(|x| k as f64 * x).collect();
    let verdict = if (s_a - s_b).abs() > tol {
        Verdict::DimensionMismatch
    } else if multiplicities.iter().all(|&m| m.round() >= 1.0 && (m - m.round()).abs() <= tol) {
        Verdict::Compatible
    } else {
        Verdict::Incompatible
    };
    Ok(CompatibilityReport { s_a, s_b, k, alphas, multiplicities, verdict, tolerance: tol, exact: false })
}

/// Exact variant with ratios given as `beta_j = r^(e_j)` for positive
/// rationals `e_j`. Dimensions agree iff `sum q^(-e_j) = 1`, checked by
/// [`power_sum_check`]; integrality of `k e_j` is exact.
pub fn lipschitz_onto_compatibility_exact(
    a: HomogeneousSpec,
    exponents: &[Ratio<i64>],
) -> Result<CompatibilityReport, SelfSimilarError> {
    let a = HomogeneousSpec::new(a.q, a.r)?;
    if exponents.is_empty() {
        return Err(SelfSimilarError::NoRatios);
    }
    if let Some(e) = exponents.iter().find(|e| **e <= Ratio::zero()) {
        return Err(SelfSimilarError::InvalidExponent(e.to_string()));
    }
    let k = max_integer_root(a.q)?;
    let alphas: Vec<f64> = exponents.iter().map(|e| e.to_f64().unwrap_or(f64::NAN)).collect();
    let ratios: Vec<f64> = alphas.iter().map(|x| a.r.powf(*x)).collect();
    let s_b = moran_dimension(&ratios)?;
    let negated: Vec<Ratio<i64>> = exponents.iter().map(|e| -e).collect();
    let sums = power_sum_check(a.q, &negated)?;
    let scale = Ratio::from_integer(k as i64);
    let verdict = if !sums.sums_to_one {
        Verdict::DimensionMismatch
    } else if exponents.iter().all(|e| (e * scale).is_integer()) {
        Verdict::Compatible
    } else {
        Verdict::Incompatible
    };
    Ok(CompatibilityReport {
        s_a: a.dimension(),
        s_b,
        k,
        multiplicities: alphas.iter().map(|x| k as f64 * x).collect(),
        alphas,
        verdict,
        tolerance: 10f64.powi(-(POWER_SUM_TOLERANCE_DIGITS as i32)),
        exact: true,
    })
}

/// `q^(1/k)` as an integer when it is one.
pub fn integer_root(q: u64, k: u32) -> Option<u64> {
    let n = q.nth_root(k);
    (n.checked_pow(k) == Some(q)).then_some(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Ratio<i64> {
        Ratio::new(p, q)
    }

    #[test]
    fn perfect_powers() {
        assert_eq!(max_integer_root(2).unwrap(), 1);
        assert_eq!(max_integer_root(8).unwrap(), 3);
        assert_eq!(max_integer_root(36).unwrap(), 2);
        assert_eq!(max_integer_root(64).unwrap(), 6);
        assert_eq!(max_integer_root(1 << 62).unwrap(), 62);
        assert_eq!(max_integer_root(u64::MAX).unwrap(), 1);
        assert!(max_integer_root(1).is_err());
        for q in 2..5000u64 {
            let k = max_integer_root(q).unwrap();
            assert!(integer_root(q, k).is_some());
            assert!((k + 1..=13).all(|j| integer_root(q, j).is_none()));
        }
    }

    #[test]
    fn moran_closed_forms() {
        assert!((moran_dimension(&[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-13);
        let c = moran_dimension(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((c - 2f64.ln() / 3f64.ln()).abs() < 1e-13);
        let s = moran_dimension(&[0.5, 0.25]).unwrap();
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        assert!((2f64.powf(-s) - golden).abs() < 1e-13);
        assert_eq!(moran_dimension(&[0.3]).unwrap(), 0.0);
        assert_eq!(moran_dimension(&[]), Err(SelfSimilarError::NoRatios));
        assert_eq!(moran_dimension(&[0.5, 1.0]), Err(SelfSimilarError::InvalidRatio(1.0)));
    }

    #[test]
    fn moran_residual_and_monotonicity() {
        let betas = [0.3, 0.2, 0.05, 1e-6];
        let s = moran_dimension(&betas).unwrap();
        let residual: f64 = betas.iter().map(|b| b.powf(s)).sum::<f64>() - 1.0;
        assert!(residual.abs() <= 1e-12);
        let bumped = moran_dimension(&[0.31, 0.2, 0.05, 1e-6]).unwrap();
        assert!(bumped > s);
    }

    #[test]
    fn power_sums() {
        let c = power_sum_check(2, &[r(-1, 1), r(-2, 1), r(-2, 1)]).unwrap();
        assert!(c.sums_to_one && c.all_integer);
        let c = power_sum_check(2, &[r(-1, 2), r(-1, 2)]).unwrap();
        assert!(!c.sums_to_one && !c.all_integer);
        assert!((c.value - 2f64.sqrt()).abs() < 1e-15);
        // 4^(-1/2) + 4^(-1/2) = 1 with fractional exponents: 4 is a square
        let c = power_sum_check(4, &[r(-1, 2), r(-1, 2)]).unwrap();
        assert!(c.sums_to_one && !c.all_integer);
        // three thirds at q = 3
        let c = power_sum_check(3, &[r(-1, 1); 3]).unwrap();
        assert!(c.sums_to_one);
        assert!(!power_sum_check(3, &[r(-1, 1); 2]).unwrap().sums_to_one);
        assert!(!power_sum_check(2, &[r(1, 1)]).unwrap().sums_to_one);
        assert!(power_sum_check(2, &[r(0, 1)]).unwrap().sums_to_one);
        // negligible terms do not disturb a true identity beyond tolerance
        let c = power_sum_check(10, &[r(-1, 1); 10].iter().copied().chain([r(-400, 1)]).collect::<Vec<_>>()).unwrap();
        assert!(c.sums_to_one);
        // close but not equal: 2^-1 + 2^-1 + 2^-60
        let c = power_sum_check(2, &[r(-1, 1), r(-1, 1), r(-60, 1)]).unwrap();
        assert!(!c.sums_to_one);
        // an extra 2^-70 is inside the tolerance
        let c = power_sum_check(2, &[r(-1, 1), r(-1, 1), r(-70, 1)]).unwrap();
        assert!(c.sums_to_one);
    }

    #[test]
    fn compatibility_examples() {
        let a = HomogeneousSpec::new(2, 1.0 / 3.0).unwrap();
        let rep = lipschitz_onto_compatibility(a, &[1.0 / 3.0, 1.0 / 9.0, 1.0 / 9.0], DEFAULT_TOLERANCE).unwrap();
        assert_eq!(rep.verdict, Verdict::Compatible);
        assert_eq!(rep.k, 1);

        let beta = 3f64.powf(-(3f64.ln() / 2f64.ln()));
        let rep = lipschitz_onto_compatibility(a, &[beta; 3], DEFAULT_TOLERANCE).unwrap();
        assert_eq!(rep.verdict, Verdict::Incompatible);
        assert!((rep.s_b - rep.s_a).abs() < 1e-12);

        let rep = lipschitz_onto_compatibility(a, &[1.0 / 3.0, 0.25], DEFAULT_TOLERANCE).unwrap();
        assert_eq!(rep.verdict, Verdict::DimensionMismatch);
        assert!((rep.s_b - 0.56).abs() < 0.01);
    }

    #[test]
    fn refinement_agrees() {
        let coarse = HomogeneousSpec::new(2, 1.0 / 3.0).unwrap();
        let fine = HomogeneousSpec::new(4, 1.0 / 9.0).unwrap();
        for b in [vec![1.0 / 3.0, 1.0 / 3.0], vec![1.0 / 3.0, 1.0 / 9.0, 1.0 / 9.0], vec![0.2, 0.3]] {
            let x = lipschitz_onto_compatibility(coarse, &b, DEFAULT_TOLERANCE).unwrap();
            let y = lipschitz_onto_compatibility(fine, &b, DEFAULT_TOLERANCE).unwrap();
            assert_eq!(x.verdict, y.verdict);
            assert_eq!(y.k, 2);
            for (m, n) in x.multiplicities.iter().zip(&y.multiplicities) {
                assert!((m - n).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exact_mode() {
        let a = HomogeneousSpec::new(2, 1.0 / 3.0).unwrap();
        let rep = lipschitz_onto_compatibility_exact(a, &[r(1, 1), r(2, 1), r(2, 1)]).unwrap();
        assert_eq!(rep.verdict, Verdict::Compatible);
        assert!(rep.exact);
        let rep = lipschitz_onto_compatibility_exact(a, &[r(1, 2), r(1, 2)]).unwrap();
        assert_eq!(rep.verdict, Verdict::DimensionMismatch);
        // q = 4 with half-integer exponents: 4^(-1/2) * 2 = 1 and k = 2
        let b = HomogeneousSpec::new(4, 1.0 / 9.0).unwrap();
        let rep = lipschitz_onto_compatibility_exact(b, &[r(1, 2), r(1, 2)]).unwrap();
        assert_eq!(rep.verdict, Verdict::Compatible);
        let rep = lipschitz_onto_compatibility_exact(b, &[r(1, 3), r(1, 3), r(1, 3)]);
        assert_eq!(rep.unwrap().verdict, Verdict::DimensionMismatch);
        assert!(lipschitz_onto_compatibility_exact(a, &[r(-1, 1)]).is_err());
    }
}
