//! Covering numbers by closed balls centered at points of the space.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::metric::Metric;
use crate::setcover::{min_set_cover, BitSet};

pub const EXACT_COVER_CAP: usize = 64;
pub const MAX_CANTOR_TEST_DEPTH: u32 = 20;

/// Relative part of the ball-membership slack.
pub const BALL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoverError {
    #[error("radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("{n} points exceed the exact cover cap of {cap}")]
    TooManyPoints { n: usize, cap: usize },
    #[error("radii must be at least 3 distinct positive values")]
    DegenerateRadii,
    #[error("depth must be between 1 and {max}, got {depth}")]
    DepthOutOfRange { depth: u32, max: u32 },
    #[error("cover of radius {r} misses point {point}")]
    NotACover { r: f64, point: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverReport {
    pub r: f64,
    pub count: usize,
    pub centers: Vec<usize>,
    pub exact: bool,
}

/// Closed-ball membership test with a small allowance for rounding in
/// computed distances: `d <= r (1 + 1e-9) + 64 eps R`, where `R` bounds the
/// scale of the coordinates.
#[derive(Debug, Clone, Copy)]
struct Ball {
    limit: f64,
}

impl Ball {
    fn new<M: Metric + ?Sized>(space: &M, r: f64) -> Self {
        let scale = (0..space.len()).map(|j| space.dist(0, j)).fold(0.0, f64::max);
        Ball { limit: r * (1.0 + BALL_SLACK) + 64.0 * f64::EPSILON * scale }
    }

    fn contains(self, d: f64) -> bool {
        d <= self.limit
    }
}

fn check_radius(r: f64) -> Result<(), CoverError> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(CoverError::InvalidRadius(r))
    }
}

fn verify_cover<M: Metric + ?Sized>(space: &M, ball: Ball, r: f64, centers: &[usize]) -> Result<(), CoverError> {
    match (0..space.len()).find(|&x| !centers.iter().any(|&c| ball.contains(space.dist(c, x)))) {
        Some(point) => Err(CoverError::NotACover { r, point }),
        None => Ok(()),
    }
}

/// Upper bound on `N(X, r)`: take the lowest-index uncovered point as a
/// center until everything is covered.
pub fn covering_number_greedy<M: Metric + ?Sized>(space: &M, r: f64) -> Result<CoverReport, CoverError> {
    check_radius(r)?;
    let n = space.len();
    if n == 0 {
        return Ok(CoverReport { r, count: 0, centers: Vec::new(), exact: true });
    }
    let ball = Ball::new(space, r);
    let mut covered = vec![false; n];
    let mut centers = Vec::new();
    for i in 0..n {
        if covered[i] {
            continue;
        }
        centers.push(i);
        for (j, c) in covered.iter_mut().enumerate() {
            if !*c && ball.contains(space.dist(i, j)) {
                *c = true;
            }
        }
    }
    verify_cover(space, ball, r, &centers)?;
    Ok(CoverReport { r, count: centers.len(), centers, exact: false })
}

/// Minimum number of closed `r`-balls centered at points of the space.
pub fn covering_number_exact<M: Metric + ?Sized>(space: &M, r: f64, size_cap: usize) -> Result<CoverReport, CoverError> {
    check_radius(r)?;
    let n = space.len();
    if n > size_cap {
        return Err(CoverError::TooManyPoints { n, cap: size_cap });
    }
    if n == 0 {
        return Ok(CoverReport { r, count: 0, centers: Vec::new(), exact: true });
    }
    let ball = Ball::new(space, r);
    let balls: Vec<BitSet> = (0..n)
        .map(|c| {
            let mut b = BitSet::new(n);
            for x in 0..n {
                if ball.contains(space.dist(c, x)) {
                    b.insert(x);
                }
            }
            b
        })
        .collect();
    let centers = min_set_cover(n, &balls).expect("every point covers itself");
    verify_cover(space, ball, r, &centers)?;
    Ok(CoverReport { r, count: centers.len(), centers, exact: true })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxDimEstimate {
    pub radii: Vec<f64>,
    pub counts: Vec<usize>,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
}

impl BoxDimEstimate {
    /// `(log 1/r, log count)` pairs used by the fit.
    pub fn log_pairs(&self) -> Vec<(f64, f64)> {
        self.radii.iter().zip(&self.counts).map(|(r, &c)| (-r.ln(), (c as f64).ln())).collect()
    }
}

/// Ordinary least-squares slope of `log N(X, r)` against `log 1/r` with
/// greedy counts.
pub fn box_dimension_estimate<M: Metric + ?Sized>(space: &M, radii: &[f64]) -> Result<BoxDimEstimate, CoverError> {
    if radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(CoverError::DegenerateRadii);
    }
    let mut radii = radii.to_vec();
    radii.sort_by(|a, b| b.total_cmp(a));
    radii.dedup();
    if radii.len() < 3 {
        return Err(CoverError::DegenerateRadii);
    }
    let counts = radii
        .par_iter()
        .map(|&r| covering_number_greedy(space, r).map(|c| c.count))
        .collect::<Result<Vec<_>, _>>()?;
    let mut est = BoxDimEstimate { radii, counts, slope: 0.0, intercept: 0.0, residual: 0.0 };
    let pairs = est.log_pairs();
    let m = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    est.slope = sxy / sxx;
    est.intercept = my - est.slope * mx;
    let sse: f64 = pairs.iter().map(|p| (p.1 - est.intercept - est.slope * p.0).powi(2)).sum();
    est.residual = (sse / m).sqrt();
    Ok(est)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CantorVerdict {
    SufficientConditionPasses,
    NecessaryConditionFails,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CantorTerm {
    pub n: u32,
    pub b_n: usize,
    pub exact: bool,
    pub ratio: f64,
    pub partial_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CantorImageReport {
    pub terms: Vec<CantorTerm>,
    pub sup_ratio: f64,
    pub verdict: CantorVerdict,
}

/// Growth factor that counts as a rising step.
pub const VERDICT_FACTOR: f64 = 1.1;
/// Consecutive steps needed for a trend.
pub const VERDICT_RUN: usize = 3;

/// Tabulates `b_n = N(X, 3^-n)` and `b_n / 2^n` for `n = 1..=depth_max`.
///
/// Counts are exact when the space has at most 64 points, greedy otherwise.
/// The verdict reports failure if the ratio grows by more than a factor 1.1
/// at each of 3 consecutive steps anywhere, passing if it shrinks by that
/// factor at each of the final 3 steps, and inconclusive otherwise.
pub fn cantor_image_test<M: Metric + ?Sized>(space: &M, depth_max: u32) -> Result<CantorImageReport, CoverError> {
    if depth_max == 0 || depth_max > MAX_CANTOR_TEST_DEPTH {
        return Err(CoverError::DepthOutOfRange { depth: depth_max, max: MAX_CANTOR_TEST_DEPTH });
    }
    let exact = space.len() <= EXACT_COVER_CAP;
    let counts = (1..=depth_max)
        .into_par_iter()
        .map(|n| {
            let r = 3f64.powi(-(n as i32));
            let report = if exact {
                covering_number_exact(space, r, EXACT_COVER_CAP)?
            } else {
                covering_number_greedy(space, r)?
            };
            Ok((n, report.count))
        })
        .collect::<Result<Vec<_>, CoverError>>()?;

    let mut terms = Vec::with_capacity(counts.len());
    let mut partial_sum = 0.0;
    for (n, b_n) in counts {
        let ratio = b_n as f64 / 2f64.powi(n as i32);
        partial_sum += ratio;
        terms.push(CantorTerm { n, b_n, exact, ratio, partial_sum });
    }
    let sup_ratio = terms.iter().map(|t| t.ratio).fold(0.0, f64::max);
    let ratios: Vec<f64> = terms.iter().map(|t| t.ratio).collect();
    Ok(CantorImageReport { terms, sup_ratio, verdict: verdict(&ratios) })
}

fn verdict(ratios: &[f64]) -> CantorVerdict {
    let rising: Vec<bool> = ratios.windows(2).map(|w| w[1] > VERDICT_FACTOR * w[0]).collect();
    let falling: Vec<bool> = ratios.windows(2).map(|w| w[1] * VERDICT_FACTOR < w[0]).collect();
    if rising.windows(VERDICT_RUN).any(|w| w.iter().all(|&x| x)) {
        CantorVerdict::NecessaryConditionFails
    } else if falling.len() >= VERDICT_RUN && falling[falling.len() - VERDICT_RUN..].iter().all(|&x| x) {
        CantorVerdict::SufficientConditionPasses
    } else {
        CantorVerdict::Inconclusive
    }
}
