//! Finite metric spaces: validated distance matrices and coordinate clouds.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest point count materialized as a dense matrix.
pub const DENSE_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("empty space: at least one point is required")]
    Empty,
    #[error("matrix row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("{labels} labels supplied for {n} points")]
    LabelCount { labels: usize, n: usize },
    #[error("distance ({i}, {j}) is not a finite number")]
    NonFinite { i: usize, j: usize },
    #[error("diagonal entry ({i}, {i}) is not zero")]
    NonZeroDiagonal { i: usize },
    #[error("asymmetric matrix: d({i},{j}) != d({j},{i})")]
    AsymmetricMatrix { i: usize, j: usize },
    #[error("negative distance at ({i}, {j})")]
    NegativeDistance { i: usize, j: usize },
    #[error("points {i} and {j} coincide")]
    DuplicatePoint { i: usize, j: usize },
    #[error("triangle inequality violated: d({i},{j}) > d({i},{k}) + d({k},{j})")]
    TriangleViolation { i: usize, j: usize, k: usize },
    #[error("scale factor must be positive and finite, got {0}")]
    NonPositiveScale(f64),
    #[error("gap {gap} is smaller than the largest part diameter {required}")]
    GapTooSmall { gap: f64, required: f64 },
    #[error("{n} points exceed the cap of {cap}")]
    TooManyPoints { n: usize, cap: usize },
    #[error("point {index} has arity {arity}, expected {expected}")]
    ArityMismatch { index: usize, arity: usize, expected: usize },
    #[error("coordinates of point {index} are not finite")]
    NonFiniteCoordinate { index: usize },
}

/// Read access to the distances of a finite metric space.
pub trait Metric: Sync {
    fn len(&self) -> usize;

    fn dist(&self, i: usize, j: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn diameter(&self) -> f64 {
        let n = self.len();
        let mut diam = 0.0_f64;
        for i in 0..n {
            for j in i + 1..n {
                diam = diam.max(self.dist(i, j));
            }
        }
        diam
    }

    /// Smallest positive pairwise distance, `+inf` for fewer than two points.
    fn min_distance(&self) -> f64 {
        let n = self.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                let d = self.dist(i, j);
                if d > 0.0 && d < best {
                    best = d;
                }
            }
        }
        best
    }

    /// Coordinates when the space is a subset of the real line.
    fn line_coordinates(&self) -> Option<Vec<f64>> {
        None
    }
}

impl<M: Metric + ?Sized> Metric for &M {
    fn len(&self) -> usize {
        (**self).len()
    }
    fn dist(&self, i: usize, j: usize) -> f64 {
        (**self).dist(i, j)
    }
    fn diameter(&self) -> f64 {
        (**self).diameter()
    }
    fn min_distance(&self) -> f64 {
        (**self).min_distance()
    }
    fn line_coordinates(&self) -> Option<Vec<f64>> {
        (**self).line_coordinates()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    #[default]
    Euclidean,
    Chebyshev,
}

/// Points in R^d with a choice of norm. Distances are computed on demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub metric: MetricKind,
    pub points: Vec<Vec<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>, metric: MetricKind) -> Result<Self, MetricError> {
        let expected = match points.first() {
            Some(p) => p.len(),
            None => return Err(MetricError::Empty),
        };
        for (index, p) in points.iter().enumerate() {
            if p.len() != expected || p.is_empty() {
                return Err(MetricError::ArityMismatch {
                    index,
                    arity: p.len(),
                    expected: expected.max(1),
                });
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(MetricError::NonFiniteCoordinate { index });
            }
        }
        Ok(PointCloud { metric, points })
    }

    pub fn line(values: Vec<f64>) -> Result<Self, MetricError> {
        Self::new(values.into_iter().map(|v| vec![v]).collect(), MetricKind::Euclidean)
    }

    pub fn arity(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    /// First pair of coinciding points, if any.
    pub fn find_duplicate(&self) -> Option<(usize, usize)> {
        let mut idx: Vec<usize> = (0..self.points.len()).collect();
        idx.sort_by(|&a, &b| {
            self.points[a]
                .iter()
                .zip(&self.points[b])
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        idx.windows(2)
            .filter(|w| self.points[w[0]] == self.points[w[1]])
            .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
            .min()
    }
}

impl Metric for PointCloud {
    fn len(&self) -> usize {
        self.points.len()
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (&self.points[i], &self.points[j]);
        match self.metric {
            MetricKind::Euclidean => {
                if a.len() == 1 {
                    (a[0] - b[0]).abs()
                } else {
                    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
                }
            }
            MetricKind::Chebyshev => a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max),
        }
    }

    fn diameter(&self) -> f64 {
        if let Some(xs) = self.line_coordinates() {
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            return hi - lo;
        }
        let n = self.len();
        let mut diam = 0.0_f64;
        for i in 0..n {
            for j in i + 1..n {
                diam = diam.max(self.dist(i, j));
            }
        }
        diam
    }

    fn line_coordinates(&self) -> Option<Vec<f64>> {
        (self.arity() == 1).then(|| self.points.iter().map(|p| p[0]).collect())
    }
}

/// A validated finite metric space stored as a dense distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    n: usize,
    dist: Vec<f64>,
    points: Option<Vec<Vec<f64>>>,
}

impl FiniteMetricSpace {
    /// Checks every metric axiom on the given matrix.
    ///
    /// The triangle inequality is tested with exact `<=` on the stored values,
    /// so matrices produced by floating point arithmetic must already satisfy
    /// it bit for bit.
    pub fn validate(matrix: Vec<Vec<f64>>, labels: Option<Vec<String>>) -> Result<Self, MetricError> {
        let n = matrix.len();
        if n == 0 {
            return Err(MetricError::Empty);
        }
        for (row, r) in matrix.iter().enumerate() {
            if r.len() != n {
                return Err(MetricError::NotSquare { row, len: r.len(), expected: n });
            }
        }
        let dist: Vec<f64> = matrix.into_iter().flatten().collect();
        let labels = resolve_labels(labels, n)?;
        check_axioms(&dist, n)?;
        Ok(FiniteMetricSpace { labels, n, dist, points: None })
    }

    /// Builds the space from a point cloud. Distinctness is required.
    ///
    /// Rounding can leave a computed triangle a few ulps short of closing; such
    /// entries are lowered to the offending two-step sum before validation.
    pub fn from_points(cloud: &PointCloud) -> Result<Self, MetricError> {
        let n = cloud.len();
        if n > DENSE_CAP {
            return Err(MetricError::TooManyPoints { n, cap: DENSE_CAP });
        }
        if let Some((i, j)) = cloud.find_duplicate() {
            return Err(MetricError::DuplicatePoint { i, j });
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = cloud.dist(i, j);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        close_triangles(&mut dist, n);
        check_axioms(&dist, n)?;
        Ok(FiniteMetricSpace {
            labels: (0..n).map(|i| i.to_string()).collect(),
            n,
            dist,
            points: Some(cloud.points.clone()),
        })
    }

    /// Constructor for matrices that are metric by construction (up to rounding).
    pub(crate) fn from_trusted(dist: Vec<f64>, n: usize, labels: Vec<String>) -> Result<Self, MetricError> {
        let mut dist = dist;
        close_triangles(&mut dist, n);
        check_axioms(&dist, n)?;
        Ok(FiniteMetricSpace { labels, n, dist, points: None })
    }

    /// Constructor that skips the cubic triangle check. Only for matrices whose
    /// stored values satisfy the axioms exactly (ultrametric trees).
    pub(crate) fn from_exact_parts(dist: Vec<f64>, n: usize, labels: Vec<String>) -> Self {
        debug_assert_eq!(dist.len(), n * n);
        FiniteMetricSpace { labels, n, dist, points: None }
    }

    pub fn with_points(mut self, points: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        if points.len() != self.n {
            return Err(MetricError::LabelCount { labels: points.len(), n: self.n });
        }
        PointCloud::new(points.clone(), MetricKind::Euclidean)?;
        self.points = Some(points);
        Ok(self)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn points(&self) -> Option<&[Vec<f64>]> {
        self.points.as_deref()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// The same points with every distance multiplied by `r`.
    pub fn scale(&self, r: f64) -> Result<Self, MetricError> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(MetricError::NonPositiveScale(r));
        }
        let dist = self.dist.iter().map(|d| d * r).collect();
        let mut out = Self::from_trusted(dist, self.n, self.labels.clone())?;
        out.points = self
            .points
            .as_ref()
            .map(|ps| ps.iter().map(|p| p.iter().map(|c| c * r).collect()).collect());
        Ok(out)
    }

    /// Induced subspace on `indices`, in the given order.
    pub fn subspace(&self, indices: &[usize]) -> Result<Self, MetricError> {
        if indices.is_empty() {
            return Err(MetricError::Empty);
        }
        let m = indices.len();
        for (a, &i) in indices.iter().enumerate() {
            for &j in &indices[a + 1..] {
                if i == j {
                    return Err(MetricError::DuplicatePoint { i, j });
                }
            }
        }
        let mut dist = Vec::with_capacity(m * m);
        for &i in indices {
            for &j in indices {
                dist.push(self.dist[i * self.n + j]);
            }
        }
        Ok(FiniteMetricSpace {
            labels: indices.iter().map(|&i| self.labels[i].clone()).collect(),
            n: m,
            dist,
            points: self
                .points
                .as_ref()
                .map(|ps| indices.iter().map(|&i| ps[i].clone()).collect()),
        })
    }

    /// Disjoint union with every cross-part distance equal to `gap`.
    ///
    /// Returns the union and, for each point, the index of its part.
    pub fn gapped_union(parts: &[FiniteMetricSpace], gap: f64) -> Result<(Self, Vec<usize>), MetricError> {
        if parts.is_empty() {
            return Err(MetricError::Empty);
        }
        let required = parts.iter().map(|p| p.diameter()).fold(0.0, f64::max);
        if !(gap > 0.0 && gap.is_finite() && gap >= required) {
            return Err(MetricError::GapTooSmall { gap, required });
        }
        let n: usize = parts.iter().map(|p| p.n).sum();
        if n > DENSE_CAP {
            return Err(MetricError::TooManyPoints { n, cap: DENSE_CAP });
        }
        let mut part_of = Vec::with_capacity(n);
        let mut offset = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for (p, part) in parts.iter().enumerate() {
            for (i, label) in part.labels.iter().enumerate() {
                part_of.push(p);
                offset.push(i);
                labels.push(format!("{p}.{label}"));
            }
        }
        let mut dist = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                dist[a * n + b] = if part_of[a] == part_of[b] {
                    parts[part_of[a]].dist(offset[a], offset[b])
                } else {
                    gap
                };
            }
        }
        check_axioms(&dist, n)?;
        Ok((FiniteMetricSpace { labels, n, dist, points: None }, part_of))
    }
}

impl Metric for FiniteMetricSpace {
    fn len(&self) -> usize {
        self.n
    }

    #[inline]
    fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    fn line_coordinates(&self) -> Option<Vec<f64>> {
        let ps = self.points.as_ref()?;
        ps.iter().all(|p| p.len() == 1).then(|| ps.iter().map(|p| p[0]).collect())
    }
}

fn resolve_labels(labels: Option<Vec<String>>, n: usize) -> Result<Vec<String>, MetricError> {
    match labels {
        Some(l) if l.len() != n => Err(MetricError::LabelCount { labels: l.len(), n }),
        Some(l) => Ok(l),
        None => Ok((0..n).map(|i| i.to_string()).collect()),
    }
}

fn check_axioms(dist: &[f64], n: usize) -> Result<(), MetricError> {
    let d = |i: usize, j: usize| dist[i * n + j];
    for i in 0..n {
        for j in 0..n {
            if !d(i, j).is_finite() {
                return Err(MetricError::NonFinite { i, j });
            }
        }
    }
    for i in 0..n {
        if d(i, i) != 0.0 {
            return Err(MetricError::NonZeroDiagonal { i });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if d(i, j) != d(j, i) {
                return Err(MetricError::AsymmetricMatrix { i, j });
            }
            if d(i, j) < 0.0 {
                return Err(MetricError::NegativeDistance { i, j });
            }
            if d(i, j) == 0.0 {
                return Err(MetricError::DuplicatePoint { i, j });
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let dij = d(i, j);
            for k in 0..n {
                if dij > d(i, k) + d(k, j) {
                    return Err(MetricError::TriangleViolation { i, j, k });
                }
            }
        }
    }
    Ok(())
}

/// Lowers entries that exceed a two-step path sum until none does.
///
/// Every change lowers an entry by at least one ulp, so the passes terminate.
fn close_triangles(dist: &mut [f64], n: usize) {
    loop {
        let mut changed = false;
        for k in 0..n {
            for i in 0..n {
                for j in i + 1..n {
                    let via = dist[i * n + k] + dist[k * n + j];
                    if dist[i * n + j] > via {
                        dist[i * n + j] = via;
                        dist[j * n + i] = via;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(rows: Vec<Vec<f64>>) -> Result<FiniteMetricSpace, MetricError> {
        FiniteMetricSpace::validate(rows, None)
    }

    #[test]
    fn smallest_space() {
        let s = space(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.dist(0, 1), 1.0);
    }

    #[test]
    fn validation_errors_carry_witnesses() {
        assert_eq!(
            space(vec![vec![0.0, 1.0], vec![2.0, 0.0]]),
            Err(MetricError::AsymmetricMatrix { i: 0, j: 1 })
        );
        assert_eq!(
            space(vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]]),
            Err(MetricError::TriangleViolation { i: 0, j: 2, k: 1 })
        );
        assert_eq!(
            space(vec![vec![0.0, -1.0], vec![-1.0, 0.0]]),
            Err(MetricError::NegativeDistance { i: 0, j: 1 })
        );
        assert_eq!(
            space(vec![vec![0.0, 0.0], vec![0.0, 0.0]]),
            Err(MetricError::DuplicatePoint { i: 0, j: 1 })
        );
        assert_eq!(
            space(vec![vec![0.0, 1.0], vec![1.0]]),
            Err(MetricError::NotSquare { row: 1, len: 1, expected: 2 })
        );
        assert_eq!(space(vec![]), Err(MetricError::Empty));
    }

    #[test]
    fn from_points_metrics() {
        let line = PointCloud::line(vec![0.0, 1.0 / 3.0, 1.0]).unwrap();
        let s = FiniteMetricSpace::from_points(&line).unwrap();
        assert_eq!(s.dist(0, 2), 1.0);
        assert_eq!(s.dist(0, 1), 1.0 / 3.0);

        let pts = vec![vec![0.0, 0.0], vec![3.0, 4.0]];
        let e = FiniteMetricSpace::from_points(&PointCloud::new(pts.clone(), MetricKind::Euclidean).unwrap()).unwrap();
        assert_eq!(e.dist(0, 1), 5.0);
        let c = FiniteMetricSpace::from_points(&PointCloud::new(pts, MetricKind::Chebyshev).unwrap()).unwrap();
        assert_eq!(c.dist(0, 1), 4.0);
    }

    #[test]
    fn from_points_rejects_duplicates() {
        let cloud = PointCloud::line(vec![0.5, 0.1, 0.5]).unwrap();
        assert_eq!(
            FiniteMetricSpace::from_points(&cloud),
            Err(MetricError::DuplicatePoint { i: 0, j: 2 })
        );
    }

    #[test]
    fn scale_and_identity() {
        let s = space(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(s.scale(3.0).unwrap().dist(0, 1), 3.0);
        assert_eq!(s.scale(1.0).unwrap(), s);
        assert_eq!(s.scale(0.0), Err(MetricError::NonPositiveScale(0.0)));
        assert!(s.scale(-2.0).is_err());
    }

    #[test]
    fn gapped_union_examples() {
        let one = space(vec![vec![0.0]]).unwrap();
        let (u, parts) = FiniteMetricSpace::gapped_union(&[one.clone(), one], 1.0).unwrap();
        assert_eq!(u.to_rows(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(parts, vec![0, 1]);

        let pair = space(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let (u, parts) = FiniteMetricSpace::gapped_union(&[pair.clone(), pair.clone()], 2.0).unwrap();
        assert_eq!(u.len(), 4);
        for a in 0..4 {
            for b in 0..4 {
                if parts[a] != parts[b] {
                    assert_eq!(u.dist(a, b), 2.0);
                }
            }
        }
        let rows = u.to_rows();
        assert!(FiniteMetricSpace::validate(rows, None).is_ok());

        assert_eq!(
            FiniteMetricSpace::gapped_union(&[pair.clone(), pair], 0.4),
            Err(MetricError::GapTooSmall { gap: 0.4, required: 1.0 })
        );
    }

    #[test]
    fn subspace_keeps_distances() {
        let s = space(vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.5],
            vec![2.0, 1.5, 0.0],
        ])
        .unwrap();
        let sub = s.subspace(&[2, 0]).unwrap();
        assert_eq!(sub.dist(0, 1), 2.0);
        assert_eq!(sub.labels(), &["2".to_string(), "0".to_string()]);
    }
}
