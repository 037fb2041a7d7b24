//! Deterministic fixtures with known dimensions: Cantor sets, homogeneous
//! and general IFS attractors under strong separation, Bedford-McMullen
//! carpets and ultrametric trees.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{FiniteMetricSpace, MetricKind, PointCloud, DENSE_CAP};

pub const MAX_CANTOR_DEPTH: u32 = 20;
pub const DEFAULT_MAX_POINTS: usize = 1_000_000;
pub const MAX_TREE_LEAVES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FractalError {
    #[error("depth {depth} exceeds the limit {max}")]
    DepthTooLarge { depth: u32, max: u32 },
    #[error("hole ratio must lie strictly between 0 and 1")]
    InvalidHole,
    #[error("contraction ratio {0} is not in (0, 1)")]
    InvalidRatio(f64),
    #[error("translation of map {index} has arity {arity}, expected {expected}")]
    ArityMismatch { index: usize, arity: usize, expected: usize },
    #[error("maps {i} and {j} have overlapping bounding-box images")]
    SscViolation { i: usize, j: usize },
    #[error("{count} points requested, limit is {limit}")]
    TooManyPoints { count: u128, limit: usize },
    #[error("invalid carpet: {0}")]
    InvalidCarpet(String),
    #[error("level diameters must be positive and strictly decreasing (level {level})")]
    NonDecreasingDiameters { level: usize },
    #[error("{arities} arities but {diams} level diameters")]
    LevelCountMismatch { arities: usize, diams: usize },
    #[error("arity at level {level} must be at least 1")]
    ZeroArity { level: usize },
    #[error("an IFS needs at least one map")]
    NoMaps,
}

/// Endpoints of the depth-`depth` stage of the middle-`hole` Cantor set in [0, 1].
///
/// Returns `2^(depth+1)` sorted points. For rational holes whose scaled
/// endpoints fit in 128 bits every endpoint is a single correctly rounded
/// quotient.
pub fn cantor_endpoints(depth: u32, hole: Ratio<u64>) -> Result<PointCloud, FractalError> {
    if depth > MAX_CANTOR_DEPTH {
        return Err(FractalError::DepthTooLarge { depth, max: MAX_CANTOR_DEPTH });
    }
    let (p, q) = (*hole.numer(), *hole.denom());
    if p == 0 || p >= q {
        return Err(FractalError::InvalidHole);
    }
    let values = cantor_integer(depth, p as u128, q as u128).unwrap_or_else(|| cantor_float(depth, p as f64 / q as f64));
    Ok(PointCloud::line(values).expect("finite coordinates"))
}

fn cantor_integer(depth: u32, p: u128, q: u128) -> Option<Vec<f64>> {
    let unit = (2 * q).checked_pow(depth)?;
    if unit > 1u128 << 53 {
        return None;
    }
    // intervals as (left, length) in multiples of 1/unit
    let mut intervals = vec![(0u128, unit)];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(intervals.len() * 2);
        for &(a, len) in &intervals {
            let piece = len / (2 * q) * (q - p);
            let offset = len / (2 * q) * (q + p);
            next.push((a, piece));
            next.push((a + offset, piece));
        }
        intervals = next;
    }
    let unit = unit as f64;
    Some(
        intervals
            .iter()
            .flat_map(|&(a, len)| [a as f64 / unit, (a + len) as f64 / unit])
            .collect(),
    )
}

fn cantor_float(depth: u32, c: f64) -> Vec<f64> {
    let mut intervals = vec![(0.0f64, 1.0f64)];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(intervals.len() * 2);
        for &(a, len) in &intervals {
            let piece = len * (1.0 - c) / 2.0;
            next.push((a, piece));
            next.push((a + len - piece, piece));
        }
        intervals = next;
    }
    intervals.iter().flat_map(|&(a, len)| [a, a + len]).collect()
}

/// `count + 1` equally spaced points covering [0, 1].
pub fn uniform_grid(count: usize) -> PointCloud {
    let count = count.max(1);
    PointCloud::line((0..=count).map(|k| k as f64 / count as f64).collect()).expect("finite")
}

/// Similarity `x -> ratio * x + translation`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMap {
    pub ratio: f64,
    pub translation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IfsSpec {
    maps: Vec<SimilarityMap>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl IfsSpec {
    /// Validates ratios and arities and checks strong separation on the
    /// images of the attractor's bounding box.
    pub fn new(maps: Vec<SimilarityMap>) -> Result<Self, FractalError> {
        let dim = maps.first().ok_or(FractalError::NoMaps)?.translation.len();
        for (index, m) in maps.iter().enumerate() {
            if !(m.ratio > 0.0 && m.ratio < 1.0) {
                return Err(FractalError::InvalidRatio(m.ratio));
            }
            if m.translation.len() != dim || dim == 0 {
                return Err(FractalError::ArityMismatch { index, arity: m.translation.len(), expected: dim.max(1) });
            }
        }
        let (lower, upper) = attractor_box(&maps, dim);
        let spec = IfsSpec { maps, lower, upper };
        for i in 0..spec.maps.len() {
            for j in i + 1..spec.maps.len() {
                let (lo_i, hi_i) = spec.image_box(i);
                let (lo_j, hi_j) = spec.image_box(j);
                let separated = (0..dim).any(|c| hi_i[c] < lo_j[c] || hi_j[c] < lo_i[c]);
                if !separated {
                    return Err(FractalError::SscViolation { i, j });
                }
            }
        }
        Ok(spec)
    }

    /// `q` maps of common ratio `ratio` at the given 1-D offsets.
    pub fn homogeneous_line(ratio: f64, offsets: &[f64]) -> Result<Self, FractalError> {
        Self::new(
            offsets
                .iter()
                .map(|&t| SimilarityMap { ratio, translation: vec![t] })
                .collect(),
        )
    }

    pub fn maps(&self) -> &[SimilarityMap] {
        &self.maps
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.maps.iter().map(|m| m.ratio).collect()
    }

    pub fn bounding_box(&self) -> (&[f64], &[f64]) {
        (&self.lower, &self.upper)
    }

    fn image_box(&self, i: usize) -> (Vec<f64>, Vec<f64>) {
        let m = &self.maps[i];
        let lo = self.lower.iter().zip(&m.translation).map(|(l, t)| m.ratio * l + t).collect();
        let hi = self.upper.iter().zip(&m.translation).map(|(u, t)| m.ratio * u + t).collect();
        (lo, hi)
    }
}

// Per coordinate, the attractor's extent is the fixed point of
// x -> min_i (r_i x + t_i) (resp. max); all ratios are positive.
fn attractor_box(maps: &[SimilarityMap], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let mut lower = vec![0.0; dim];
    let mut upper = vec![0.0; dim];
    for c in 0..dim {
        let (mut lo, mut hi) = (maps[0].translation[c], maps[0].translation[c]);
        for _ in 0..10_000 {
            let nlo = maps.iter().map(|m| m.ratio * lo + m.translation[c]).fold(f64::INFINITY, f64::min);
            let nhi = maps.iter().map(|m| m.ratio * hi + m.translation[c]).fold(f64::NEG_INFINITY, f64::max);
            if nlo == lo && nhi == hi {
                break;
            }
            lo = nlo;
            hi = nhi;
        }
        lower[c] = lo;
        upper[c] = hi;
    }
    (lower, upper)
}

/// One point per depth-`depth` cylinder: the image of the bounding box's
/// lower corner under the cylinder's composed map, in lexicographic word order.
pub fn ifs_sample(spec: &IfsSpec, depth: u32, max_points: usize) -> Result<PointCloud, FractalError> {
    let count = (spec.maps.len() as u128).checked_pow(depth).unwrap_or(u128::MAX);
    if count > max_points as u128 {
        return Err(FractalError::TooManyPoints { count, limit: max_points });
    }
    let mut points = vec![spec.lower.clone()];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(points.len() * spec.maps.len());
        for m in &spec.maps {
            for p in &points {
                next.push(p.iter().zip(&m.translation).map(|(x, t)| m.ratio * x + t).collect());
            }
        }
        points = next;
    }
    Ok(PointCloud::new(points, MetricKind::Euclidean).expect("finite"))
}

/// Bedford-McMullen carpet: `rows` horizontal and `cols` vertical divisions of
/// the unit square (`rows <= cols`), keeping the cells in `pattern`, each given
/// as `(column, row)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarpetSpec {
    rows: u64,
    cols: u64,
    pattern: Vec<(u64, u64)>,
}

impl CarpetSpec {
    pub fn new(rows: u64, cols: u64, pattern: Vec<(u64, u64)>) -> Result<Self, FractalError> {
        if rows < 2 || cols < 2 {
            return Err(FractalError::InvalidCarpet("rows and columns must be at least 2".into()));
        }
        if rows > cols {
            return Err(FractalError::InvalidCarpet(format!("rows ({rows}) exceed columns ({cols})")));
        }
        if pattern.is_empty() {
            return Err(FractalError::InvalidCarpet("empty pattern".into()));
        }
        let mut pattern = pattern;
        pattern.sort_unstable();
        pattern.dedup();
        if let Some(&(c, r)) = pattern.iter().find(|&&(c, r)| c >= cols || r >= rows) {
            return Err(FractalError::InvalidCarpet(format!("cell ({c}, {r}) outside the grid")));
        }
        Ok(CarpetSpec { rows, cols, pattern })
    }

    pub fn rows(&self) -> u64 {
        self.rows
    }

    pub fn cols(&self) -> u64 {
        self.cols
    }

    pub fn pattern(&self) -> &[(u64, u64)] {
        &self.pattern
    }

    /// Number of distinct rows hit by the pattern.
    pub fn occupied_rows(&self) -> usize {
        let mut rows: Vec<u64> = self.pattern.iter().map(|&(_, r)| r).collect();
        rows.sort_unstable();
        rows.dedup();
        rows.len()
    }

    /// `log_rows |pi(D)| + log_cols (|D| / |pi(D)|)`.
    pub fn upper_box_dimension(&self) -> f64 {
        let occupied = self.occupied_rows() as f64;
        let total = self.pattern.len() as f64;
        occupied.ln() / (self.rows as f64).ln() + (total / occupied).ln() / (self.cols as f64).ln()
    }
}

/// Lower-left corners of the depth-`depth` carpet cylinders.
pub fn carpet_sample(spec: &CarpetSpec, depth: u32, metric: MetricKind, max_points: usize) -> Result<PointCloud, FractalError> {
    let count = (spec.pattern.len() as u128).checked_pow(depth).unwrap_or(u128::MAX);
    if count > max_points as u128 {
        return Err(FractalError::TooManyPoints { count, limit: max_points });
    }
    let (xu, yu) = (
        (spec.cols as u128).checked_pow(depth),
        (spec.rows as u128).checked_pow(depth),
    );
    let points = match (xu, yu) {
        (Some(xu), Some(yu)) if xu <= 1u128 << 53 => {
            let mut cells = vec![(0u128, 0u128)];
            for _ in 0..depth {
                let mut next = Vec::with_capacity(cells.len() * spec.pattern.len());
                for &(x, y) in &cells {
                    for &(c, r) in &spec.pattern {
                        next.push((x * spec.cols as u128 + c as u128, y * spec.rows as u128 + r as u128));
                    }
                }
                cells = next;
            }
            cells
                .into_iter()
                .map(|(x, y)| vec![x as f64 / xu as f64, y as f64 / yu as f64])
                .collect()
        }
        _ => {
            let mut pts = vec![(0.0f64, 0.0f64, 1.0f64, 1.0f64)];
            for _ in 0..depth {
                let mut next = Vec::with_capacity(pts.len() * spec.pattern.len());
                for &(x, y, w, h) in &pts {
                    let (w, h) = (w / spec.cols as f64, h / spec.rows as f64);
                    for &(c, r) in &spec.pattern {
                        next.push((x + c as f64 * w, y + r as f64 * h, w, h));
                    }
                }
                pts = next;
            }
            pts.into_iter().map(|(x, y, _, _)| vec![x, y]).collect()
        }
    };
    Ok(PointCloud::new(points, metric).expect("finite"))
}

/// Leaves of a rooted tree with the given per-level arities; two leaves are at
/// distance `level_diams[l]` where `l` is the depth of their lowest common
/// ancestor (root at depth 0).
pub fn ultrametric_tree_space(arities: &[usize], level_diams: &[f64]) -> Result<FiniteMetricSpace, FractalError> {
    if arities.len() != level_diams.len() {
        return Err(FractalError::LevelCountMismatch { arities: arities.len(), diams: level_diams.len() });
    }
    if let Some(level) = arities.iter().position(|&a| a == 0) {
        return Err(FractalError::ZeroArity { level });
    }
    for (level, &d) in level_diams.iter().enumerate() {
        let ok = d > 0.0 && d.is_finite() && (level == 0 || d < level_diams[level - 1]);
        if !ok {
            return Err(FractalError::NonDecreasingDiameters { level });
        }
    }
    let leaves = arities.iter().try_fold(1usize, |acc, &a| acc.checked_mul(a)).unwrap_or(usize::MAX);
    let limit = MAX_TREE_LEAVES.min(DENSE_CAP);
    if leaves > limit {
        return Err(FractalError::TooManyPoints { count: leaves as u128, limit });
    }
    let digits: Vec<Vec<usize>> = (0..leaves)
        .map(|mut idx| {
            let mut ds = vec![0; arities.len()];
            for (slot, &a) in ds.iter_mut().zip(arities).rev() {
                *slot = idx % a;
                idx /= a;
            }
            ds
        })
        .collect();
    let mut dist = vec![0.0; leaves * leaves];
    for a in 0..leaves {
        for b in a + 1..leaves {
            let level = digits[a].iter().zip(&digits[b]).position(|(x, y)| x != y).expect("distinct leaves");
            dist[a * leaves + b] = level_diams[level];
            dist[b * leaves + a] = level_diams[level];
        }
    }
    let labels = digits
        .iter()
        .map(|ds| ds.iter().map(usize::to_string).collect::<Vec<_>>().join("."))
        .collect();
    Ok(FiniteMetricSpace::from_exact_parts(dist, leaves, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Metric;

    fn third() -> Ratio<u64> {
        Ratio::new(1, 3)
    }

    #[test]
    fn cantor_small_depths() {
        assert_eq!(cantor_endpoints(0, third()).unwrap().line_coordinates().unwrap(), vec![0.0, 1.0]);
        assert_eq!(
            cantor_endpoints(1, third()).unwrap().line_coordinates().unwrap(),
            vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]
        );
        let d2 = cantor_endpoints(2, third()).unwrap().line_coordinates().unwrap();
        assert_eq!(d2.len(), 8);
        let min_gap = d2.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        assert!((min_gap - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn cantor_limits() {
        assert_eq!(
            cantor_endpoints(21, third()),
            Err(FractalError::DepthTooLarge { depth: 21, max: 20 })
        );
        assert_eq!(cantor_endpoints(2, Ratio::new(0, 1)), Err(FractalError::InvalidHole));
        assert_eq!(cantor_endpoints(20, third()).unwrap().len(), 1 << 21);
    }

    #[test]
    fn cantor_points_lie_in_level_intervals() {
        let depth = 6u32;
        let scale = 3f64.powi(depth as i32);
        let xs = cantor_endpoints(depth, third()).unwrap().line_coordinates().unwrap();
        let ints: Vec<u64> = xs.iter().map(|x| (x * scale).round() as u64).collect();
        let no_ones = |mut j: u64| {
            while j > 0 {
                if j % 3 == 1 {
                    return false;
                }
                j /= 3;
            }
            true
        };
        for m in 0..=depth {
            let width = 3u64.pow(depth - m);
            let mut hit: Vec<u64> = ints
                .iter()
                .map(|&n| {
                    let j = n / width;
                    let candidates = [Some(j), (n % width == 0 && j > 0).then(|| j - 1)];
                    candidates.into_iter().flatten().find(|&c| no_ones(c) && c < 3u64.pow(m)).expect("inside a level interval")
                })
                .collect();
            hit.sort_unstable();
            hit.dedup();
            assert_eq!(hit.len(), 1 << m, "level {m}");
        }
    }

    #[test]
    fn general_hole() {
        let xs = cantor_endpoints(1, Ratio::new(1, 2)).unwrap().line_coordinates().unwrap();
        assert_eq!(xs, vec![0.0, 0.25, 0.75, 1.0]);
        let deep = cantor_endpoints(12, Ratio::new(7, 11)).unwrap();
        assert_eq!(deep.len(), 1 << 13);
    }

    #[test]
    fn ifs_examples() {
        let spec = IfsSpec::homogeneous_line(1.0 / 3.0, &[0.0, 2.0 / 3.0]).unwrap();
        let pts = ifs_sample(&spec, 1, DEFAULT_MAX_POINTS).unwrap();
        assert_eq!(pts.line_coordinates().unwrap(), vec![0.0, 2.0 / 3.0]);

        let three = IfsSpec::homogeneous_line(0.2, &[0.0, 0.4, 0.8]).unwrap();
        let pts = ifs_sample(&three, 2, DEFAULT_MAX_POINTS).unwrap();
        assert_eq!(pts.len(), 9);
        assert!(pts.find_duplicate().is_none());

        assert_eq!(
            IfsSpec::homogeneous_line(0.6, &[0.0, 0.2]),
            Err(FractalError::SscViolation { i: 0, j: 1 })
        );
        assert!(matches!(
            ifs_sample(&three, 13, DEFAULT_MAX_POINTS),
            Err(FractalError::TooManyPoints { .. })
        ));
    }

    #[test]
    fn ifs_bounding_box_is_attractor_hull() {
        let spec = IfsSpec::homogeneous_line(1.0 / 3.0, &[0.0, 2.0 / 3.0]).unwrap();
        let (lo, hi) = spec.bounding_box();
        assert_eq!(lo, &[0.0]);
        assert!((hi[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ifs_distances_are_self_similar() {
        let spec = IfsSpec::homogeneous_line(0.25, &[0.0, 0.75]).unwrap();
        let prev = ifs_sample(&spec, 2, 100).unwrap();
        let cur = ifs_sample(&spec, 3, 100).unwrap();
        // first cylinder block of depth 3 is the 0.25-scaled depth-2 sample
        let half = cur.len() / 2;
        for i in 0..half {
            for j in 0..half {
                assert!((cur.dist(i, j) - 0.25 * prev.dist(i, j)).abs() < 1e-15);
                assert!((cur.dist(half + i, half + j) - 0.25 * prev.dist(i, j)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn mcmullen_examples() {
        let mut pattern: Vec<(u64, u64)> = (0..3).map(|c| (c, 0)).collect();
        pattern.extend((0..5).map(|c| (10 * c, 4)));
        let spec = CarpetSpec::new(9, 81, pattern).unwrap();
        assert!((spec.upper_box_dimension() - 2f64.ln() / 3f64.ln()).abs() < 1e-14);

        let full: Vec<(u64, u64)> = (0..4).flat_map(|c| (0..3).map(move |r| (c, r))).collect();
        let spec = CarpetSpec::new(3, 4, full).unwrap();
        assert!((spec.upper_box_dimension() - 2.0).abs() < 1e-14);

        let one = CarpetSpec::new(3, 3, vec![(1, 1)]).unwrap();
        assert_eq!(one.upper_box_dimension(), 0.0);

        assert!(CarpetSpec::new(4, 3, vec![(0, 0)]).is_err());
        assert!(CarpetSpec::new(3, 3, vec![]).is_err());
    }

    #[test]
    fn carpet_sample_counts() {
        let spec = CarpetSpec::new(2, 3, vec![(0, 0), (2, 1)]).unwrap();
        let pts = carpet_sample(&spec, 3, MetricKind::Chebyshev, DEFAULT_MAX_POINTS).unwrap();
        assert_eq!(pts.len(), 8);
        assert!(pts.find_duplicate().is_none());
        assert_eq!(pts.points[7], vec![26.0 / 27.0, 0.875]);
    }

    #[test]
    fn tree_examples() {
        let s = ultrametric_tree_space(&[2], &[1.0]).unwrap();
        assert_eq!(s.to_rows(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);

        let s = ultrametric_tree_space(&[2, 2], &[1.0, 1.0 / 3.0]).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.dist(0, 1), 1.0 / 3.0);
        assert_eq!(s.dist(2, 3), 1.0 / 3.0);
        assert_eq!(s.dist(0, 2), 1.0);
        assert_eq!(s.dist(1, 3), 1.0);
        assert!(FiniteMetricSpace::validate(s.to_rows(), None).is_ok());

        assert_eq!(
            ultrametric_tree_space(&[2, 2], &[1.0, 1.0]),
            Err(FractalError::NonDecreasingDiameters { level: 1 })
        );
        assert!(ultrametric_tree_space(&[2], &[1.0, 0.5]).is_err());
    }
}
