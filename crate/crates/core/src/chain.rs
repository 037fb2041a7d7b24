//! Chain energy of an ordered point sequence: the largest sum of s-th powers
//! of consecutive gaps along any index chain from the first point to the last.

use thiserror::Error;

use crate::metric::Metric;

/// Point count above which [`z_bruteforce`] refuses to enumerate chains.
pub const BRUTEFORCE_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("the order is empty")]
    EmptyOrder,
    #[error("exponent must be positive and finite, got {0}")]
    InvalidExponent(f64),
    #[error("index {index} is out of range for a space of {n} points")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("index {index} appears twice in the order")]
    RepeatedIndex { index: usize },
    #[error("order has {len} entries but the space has {n} points")]
    NotAPermutation { len: usize, n: usize },
    #[error("{n} points exceed the brute-force cap of {cap}")]
    TooManyPoints { n: usize, cap: usize },
}

/// `d^s` evaluated as `exp(s ln d)`; zero for `d = 0`.
#[inline]
pub fn pow_s(d: f64, s: f64) -> f64 {
    if d == 0.0 {
        0.0
    } else {
        (s * d.ln()).exp()
    }
}

pub(crate) fn check_exponent(s: f64) -> Result<(), ChainError> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(ChainError::InvalidExponent(s))
    }
}

/// Checks that `seq` lists distinct valid indices of a space with `n` points.
pub fn check_sequence(seq: &[usize], n: usize) -> Result<(), ChainError> {
    if seq.is_empty() {
        return Err(ChainError::EmptyOrder);
    }
    let mut seen = vec![false; n];
    for &index in seq {
        if index >= n {
            return Err(ChainError::IndexOutOfRange { index, n });
        }
        if std::mem::replace(&mut seen[index], true) {
            return Err(ChainError::RepeatedIndex { index });
        }
    }
    Ok(())
}

/// Longest-chain values for every prefix: `out[j]` is the chain energy of
/// `seq[0..=j]`. Quadratic time.
pub fn prefix_energies<M: Metric + ?Sized>(space: &M, seq: &[usize], s: f64) -> Vec<f64> {
    let mut best = vec![0.0; seq.len()];
    for j in 1..seq.len() {
        let xj = seq[j];
        best[j] = (0..j)
            .map(|i| best[i] + pow_s(space.dist(seq[i], xj), s))
            .fold(f64::NEG_INFINITY, f64::max);
    }
    best
}

/// Chain energy by dynamic programming over the sequence.
pub fn z_dp<M: Metric + ?Sized>(space: &M, seq: &[usize], s: f64) -> Result<f64, ChainError> {
    check_sequence(seq, space.len())?;
    check_exponent(s)?;
    Ok(*prefix_energies(space, seq, s).last().expect("nonempty"))
}

/// Chain energy by enumerating every chain from the first element to the last.
pub fn z_bruteforce<M: Metric + ?Sized>(space: &M, seq: &[usize], s: f64) -> Result<f64, ChainError> {
    check_sequence(seq, space.len())?;
    check_exponent(s)?;
    let n = seq.len();
    if n > BRUTEFORCE_CAP {
        return Err(ChainError::TooManyPoints { n, cap: BRUTEFORCE_CAP });
    }
    if n == 1 {
        return Ok(0.0);
    }
    let interior = n - 2;
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1u32 << interior) {
        let mut prev = seq[0];
        let mut total = 0.0;
        for (bit, &x) in seq[1..n - 1].iter().enumerate() {
            if mask & (1 << bit) != 0 {
                total += pow_s(space.dist(prev, x), s);
                prev = x;
            }
        }
        total += pow_s(space.dist(prev, seq[n - 1]), s);
        best = best.max(total);
    }
    Ok(best)
}

/// A full ordering of a space together with its chain energy.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedChain {
    order: Vec<usize>,
    s: f64,
    value: f64,
}

impl OrderedChain {
    pub fn new<M: Metric + ?Sized>(space: &M, order: Vec<usize>, s: f64) -> Result<Self, ChainError> {
        if order.len() != space.len() {
            return Err(ChainError::NotAPermutation { len: order.len(), n: space.len() });
        }
        let value = z_dp(space, &order, s)?;
        Ok(OrderedChain { order, s, value })
    }

    /// Sorted order of a point set on the line (ties broken by index).
    pub fn sorted_line(coords: &[f64], s: f64) -> Result<(Vec<usize>, f64), ChainError> {
        let mut order: Vec<usize> = (0..coords.len()).collect();
        order.sort_by(|&a, &b| coords[a].total_cmp(&coords[b]).then(a.cmp(&b)));
        let cloud = LineView(coords);
        let value = z_dp(&cloud, &order, s)?;
        Ok((order, value))
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn exponent(&self) -> f64 {
        self.s
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

struct LineView<'a>(&'a [f64]);

impl Metric for LineView<'_> {
    fn len(&self) -> usize {
        self.0.len()
    }
    fn dist(&self, i: usize, j: usize) -> f64 {
        (self.0[i] - self.0[j]).abs()
    }
}
