//! Ultrametric recognition, the nearest-sphere retraction onto a subset and
//! Lipschitz extension through it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::Metric;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UltraError {
    #[error("not an ultrametric: d({0}, {1}) > max(d({0}, {2}), d({1}, {2}))", .witness.0, .witness.1, .witness.2)]
    NotUltrametric { witness: (usize, usize, usize) },
    #[error("subset is empty")]
    EmptySubset,
    #[error("index {index} is outside a space of {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("map has {got} entries, expected {expected}")]
    WrongLength { got: usize, expected: usize },
    #[error("map is not {constant}-Lipschitz on the subset: ratio {ratio} at ({i}, {j})")]
    NotLipschitzOnA { constant: f64, ratio: f64, i: usize, j: usize },
    #[error("Lipschitz constant must be nonnegative, got {0}")]
    InvalidConstant(f64),
}

/// A total map between finite spaces, stored as the image index of each point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MapTable {
    pub image: Vec<usize>,
}

impl MapTable {
    pub fn new(image: Vec<usize>, codomain_len: usize) -> Result<Self, UltraError> {
        if let Some(&index) = image.iter().find(|&&i| i >= codomain_len) {
            return Err(UltraError::IndexOutOfRange { index, len: codomain_len });
        }
        Ok(MapTable { image })
    }

    pub fn identity(n: usize) -> Self {
        MapTable { image: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn compose(&self, inner: &MapTable) -> MapTable {
        MapTable { image: inner.image.iter().map(|&i| self.image[i]).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct UltrametricCheck {
    pub ultrametric: bool,
    /// `(x, y, z)` with `d(x,y) > max(d(x,z), d(y,z))`.
    pub witness: Option<(usize, usize, usize)>,
}

/// Exhaustive strong-triangle check over all triples, `x < y`, any `z`.
pub fn is_ultrametric<M: Metric + ?Sized>(space: &M) -> UltrametricCheck {
    let n = space.len();
    for x in 0..n {
        for y in x + 1..n {
            let dxy = space.dist(x, y);
            for z in 0..n {
                if z != x && z != y && dxy > space.dist(x, z).max(space.dist(y, z)) {
                    return UltrametricCheck { ultrametric: false, witness: Some((x, y, z)) };
                }
            }
        }
    }
    UltrametricCheck { ultrametric: true, witness: None }
}

fn require_ultrametric<M: Metric + ?Sized>(space: &M) -> Result<(), UltraError> {
    match is_ultrametric(space).witness {
        Some(witness) => Err(UltraError::NotUltrametric { witness }),
        None => Ok(()),
    }
}

fn subset_mask(subset: &[usize], n: usize) -> Result<Vec<bool>, UltraError> {
    if subset.is_empty() {
        return Err(UltraError::EmptySubset);
    }
    let mut mask = vec![false; n];
    for &a in subset {
        if a >= n {
            return Err(UltraError::IndexOutOfRange { index: a, len: n });
        }
        mask[a] = true;
    }
    Ok(mask)
}

/// Lipschitz-1 retraction of an ultrametric space onto `subset`.
///
/// A point outside the subset goes to the lowest-index subset point on the
/// sphere `{y : d(x,y) = dist(x, A)}`. Since the representative depends only
/// on the sphere's member set, points sharing a sphere share an image.
pub fn retraction<M: Metric + ?Sized>(space: &M, subset: &[usize]) -> Result<MapTable, UltraError> {
    let n = space.len();
    let in_a = subset_mask(subset, n)?;
    require_ultrametric(space)?;
    let image = (0..n)
        .into_par_iter()
        .map(|x| {
            if in_a[x] {
                return x;
            }
            let r = (0..n).filter(|&a| in_a[a]).map(|a| space.dist(x, a)).fold(f64::INFINITY, f64::min);
            (0..n).find(|&a| in_a[a] && space.dist(x, a) == r).expect("nearest point lies on the sphere")
        })
        .collect();
    Ok(MapTable { image })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzCheck {
    pub holds: bool,
    pub worst_ratio: f64,
    pub witness: Option<(usize, usize)>,
}

/// Checks `d_Y(f x, f y) <= L d_X(x, y)` for every pair and reports the
/// pair with the largest ratio.
pub fn verify_lipschitz<X: Metric + ?Sized, Y: Metric + ?Sized>(
    domain: &X,
    codomain: &Y,
    map: &MapTable,
    constant: f64,
) -> Result<LipschitzCheck, UltraError> {
    if map.len() != domain.len() {
        return Err(UltraError::WrongLength { got: map.len(), expected: domain.len() });
    }
    if let Some(&index) = map.image.iter().find(|&&i| i >= codomain.len()) {
        return Err(UltraError::IndexOutOfRange { index, len: codomain.len() });
    }
    if !(constant >= 0.0) {
        return Err(UltraError::InvalidConstant(constant));
    }
    let mut check = LipschitzCheck { holds: true, worst_ratio: 0.0, witness: None };
    for i in 0..map.len() {
        for j in i + 1..map.len() {
            let (fi, fj) = (map.image[i], map.image[j]);
            let dy = if fi == fj { 0.0 } else { codomain.dist(fi, fj) };
            let dx = domain.dist(i, j);
            if dy > constant * dx {
                check.holds = false;
            }
            if dx == 0.0 && dy == 0.0 {
                continue;
            }
            let ratio = dy / dx;
            if check.witness.is_none() || ratio > check.worst_ratio {
                check.worst_ratio = ratio;
                check.witness = Some((i, j));
            }
        }
    }
    Ok(check)
}

/// Distances among the subset points, in subset order.
struct Restricted<'a, M: ?Sized> {
    space: &'a M,
    points: &'a [usize],
}

impl<M: Metric + ?Sized> Metric for Restricted<'_, M> {
    fn len(&self) -> usize {
        self.points.len()
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        self.space.dist(self.points[i], self.points[j])
    }
}

/// Extends `f`, given on `subset` (entry `k` is the image of `subset[k]`),
/// to the whole ultrametric space `x` by precomposing with the retraction.
pub fn extend_lipschitz<X: Metric + ?Sized, Y: Metric + ?Sized>(
    x: &X,
    subset: &[usize],
    f: &MapTable,
    y: &Y,
    constant: f64,
) -> Result<MapTable, UltraError> {
    if f.len() != subset.len() {
        return Err(UltraError::WrongLength { got: f.len(), expected: subset.len() });
    }
    subset_mask(subset, x.len())?;
    let on_a = Restricted { space: x, points: subset };
    let check = verify_lipschitz(&on_a, y, f, constant)?;
    if !check.holds {
        let (i, j) = check.witness.expect("a failing pair exists");
        return Err(UltraError::NotLipschitzOnA { constant, ratio: check.worst_ratio, i: subset[i], j: subset[j] });
    }
    let g = retraction(x, subset)?;
    let mut position = vec![usize::MAX; x.len()];
    for (k, &a) in subset.iter().enumerate() {
        if position[a] == usize::MAX {
            position[a] = k;
        }
    }
    Ok(MapTable { image: g.image.iter().map(|&a| f.image[position[a]]).collect() })
}

/// Whether any two closed `r`-balls are either disjoint or equal.
pub fn ball_partition_check<M: Metric + ?Sized>(space: &M, r: f64) -> Result<bool, UltraError> {
    require_ultrametric(space)?;
    let n = space.len();
    let balls: Vec<Vec<bool>> = (0..n).map(|c| (0..n).map(|x| space.dist(c, x) <= r).collect()).collect();
    for a in 0..n {
        for b in a + 1..n {
            let meet = (0..n).any(|x| balls[a][x] && balls[b][x]);
            if meet && balls[a] != balls[b] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractal::ultrametric_tree_space;
    use crate::metric::{FiniteMetricSpace, PointCloud};

    fn abc() -> FiniteMetricSpace {
        FiniteMetricSpace::validate(vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 0.5], vec![1.0, 0.5, 0.0]], None).unwrap()
    }

    #[test]
    fn recognition() {
        let t = ultrametric_tree_space(&[2, 3], &[1.0, 0.25]).unwrap();
        assert!(is_ultrametric(&t).ultrametric);
        let line = PointCloud::line(vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(is_ultrametric(&line).witness, Some((0, 2, 1)));
        assert!(is_ultrametric(&PointCloud::line(vec![0.0, 3.0]).unwrap()).ultrametric);
    }

    #[test]
    fn retraction_examples() {
        let x = abc();
        assert_eq!(retraction(&x, &[0, 1, 2]).unwrap(), MapTable::identity(3));
        let g = retraction(&x, &[0, 1]).unwrap();
        assert_eq!(g.image, vec![0, 1, 1]);
        assert!(verify_lipschitz(&x, &x, &g, 1.0).unwrap().holds);
        assert_eq!(retraction(&x, &[]), Err(UltraError::EmptySubset));
        let line = PointCloud::line(vec![0.0, 0.5, 1.0]).unwrap();
        assert!(matches!(retraction(&line, &[0]), Err(UltraError::NotUltrametric { .. })));
    }

    #[test]
    fn retraction_on_tree_is_idempotent_lipschitz() {
        let t = ultrametric_tree_space(&[3, 2, 2], &[1.0, 0.5, 0.2]).unwrap();
        let subset = [1, 4, 9];
        let g = retraction(&t, &subset).unwrap();
        for &a in &subset {
            assert_eq!(g.image[a], a);
        }
        assert_eq!(g.compose(&g), g);
        assert!(verify_lipschitz(&t, &t, &g, 1.0).unwrap().holds);
    }

    #[test]
    fn lipschitz_verifier() {
        let p = PointCloud::line(vec![0.0, 1.0, 3.0]).unwrap();
        let q = PointCloud::line(vec![0.0, 2.0, 6.0]).unwrap();
        assert!(verify_lipschitz(&p, &p, &MapTable::identity(3), 1.0).unwrap().holds);
        let c = verify_lipschitz(&p, &q, &MapTable::identity(3), 1.0).unwrap();
        assert!(!c.holds);
        assert_eq!(c.worst_ratio, 2.0);
        assert_eq!(c.witness, Some((0, 1)));
        assert!(verify_lipschitz(&p, &q, &MapTable::identity(3), 2.0).unwrap().holds);
    }

    #[test]
    fn extension() {
        let x = abc();
        let y = PointCloud::line(vec![0.0, 1.0, 5.0]).unwrap();
        let f = MapTable { image: vec![0, 1] };
        let ext = extend_lipschitz(&x, &[0, 1], &f, &y, 1.0).unwrap();
        assert_eq!(ext.image, vec![0, 1, 1]);
        assert!(verify_lipschitz(&x, &y, &ext, 1.0).unwrap().holds);

        let constant = MapTable { image: vec![2, 2] };
        assert_eq!(extend_lipschitz(&x, &[0, 1], &constant, &y, 0.0).unwrap().image, vec![2, 2, 2]);

        let far = MapTable { image: vec![0, 2] };
        assert!(matches!(
            extend_lipschitz(&x, &[0, 1], &far, &y, 1.0),
            Err(UltraError::NotLipschitzOnA { .. })
        ));
    }

    #[test]
    fn balls_partition_tree() {
        let t = ultrametric_tree_space(&[2, 3], &[1.0, 0.3]).unwrap();
        for r in [0.0, 0.3, 0.5, 1.0, 2.0] {
            assert!(ball_partition_check(&t, r).unwrap());
        }
        let line = PointCloud::line(vec![0.0, 0.5, 1.0]).unwrap();
        assert!(ball_partition_check(&line, 0.5).is_err());
    }
}
