use serde::Serialize;

use crate::chain::pow_s;
use crate::metric::Metric;

use super::DeltaError;

/// Nested covers `H_0, ..., H_N` at radii `diam * u^k` with parent links.
///
/// Every level is a greedy cover: repeatedly take the lowest-index uncovered
/// point as a center. Level order is selection order. A center at level
/// `k + 1` hangs below the nearest level-`k` center within `diam * u^k`
/// (earlier in level order on ties). `N` is the first level whose radius
/// drops below the smallest pairwise distance, so `H_N` holds every point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetTree {
    pub u: f64,
    pub diameter: f64,
    /// Center indices per level, in level order.
    pub levels: Vec<Vec<usize>>,
    /// `parents[k][i]`: position in `levels[k]` of the parent of `levels[k + 1][i]`.
    pub parents: Vec<Vec<usize>>,
}

impl NetTree {
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn radius(&self, level: usize) -> f64 {
        self.diameter * self.u.powi(level as i32)
    }

    pub fn level_sizes(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.len() as f64).collect()
    }

    /// Covering-tree bound on the chain energy of any increasing sequence in
    /// the tree's order.
    pub fn bound(&self, s: f64) -> f64 {
        bound_from_levels(&self.level_sizes(), s, self.u, self.diameter)
    }
}

/// `(2 diam / (u (1 - u)))^s * sum_{k >= 1} a_k u^(k s)`, where `a_k` are the
/// given level sizes for `k <= N` and `a_k = a_N` beyond the last level (the
/// tail is summed as a geometric series).
pub fn bound_from_levels(sizes: &[f64], s: f64, u: f64, diameter: f64) -> f64 {
    if sizes.is_empty() || diameter == 0.0 {
        return 0.0;
    }
    let prefactor = pow_s(2.0 * diameter / (u * (1.0 - u)), s);
    let q = pow_s(u, s);
    let last = sizes.len() - 1;
    let mut sum = 0.0;
    let mut qk = 1.0;
    for &a in &sizes[1..] {
        qk *= q;
        sum += a * qk;
    }
    let tail = sizes[last] * qk * q / (1.0 - q);
    prefactor * (sum + tail)
}

/// Builds the net tree and orders the points lexicographically by the level
/// ranks along their root-to-leaf paths.
pub fn net_tree_order<M: Metric + ?Sized>(space: &M, u: f64) -> Result<(Vec<usize>, NetTree), DeltaError> {
    if !(u > 0.0 && u < 1.0) {
        return Err(DeltaError::InvalidRatio(u));
    }
    let n = space.len();
    let diameter = space.diameter();
    let min_d = space.min_distance();
    let mut tree = NetTree { u, diameter, levels: vec![(0..n.min(1)).collect()], parents: Vec::new() };
    if n <= 1 {
        return Ok(((0..n).collect(), tree));
    }
    let mut level = 0;
    loop {
        level += 1;
        let radius = tree.radius(level);
        let centers = greedy_cover(space, radius);
        let prev = &tree.levels[level - 1];
        let parent_radius = tree.radius(level - 1);
        let parents = centers
            .iter()
            .map(|&c| {
                let mut best = usize::MAX;
                let mut best_d = f64::INFINITY;
                for (pos, &h) in prev.iter().enumerate() {
                    let d = space.dist(h, c);
                    if d <= parent_radius && d < best_d {
                        best_d = d;
                        best = pos;
                    }
                }
                debug_assert!(best != usize::MAX, "previous level covers every point");
                best
            })
            .collect();
        tree.parents.push(parents);
        tree.levels.push(centers);
        if radius < min_d {
            break;
        }
    }

    // rank path of each point, read from its leaf upwards
    let depth = tree.depth();
    let mut keys: Vec<Vec<usize>> = vec![vec![0; depth]; n];
    for (pos, &x) in tree.levels[depth].iter().enumerate() {
        let mut p = pos;
        for k in (1..=depth).rev() {
            keys[x][k - 1] = p;
            p = tree.parents[k - 1][p];
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    Ok((order, tree))
}

fn greedy_cover<M: Metric + ?Sized>(space: &M, radius: f64) -> Vec<usize> {
    let n = space.len();
    let mut covered = vec![false; n];
    let mut centers = Vec::new();
    for i in 0..n {
        if covered[i] {
            continue;
        }
        centers.push(i);
        for (j, c) in covered.iter_mut().enumerate() {
            if !*c && space.dist(i, j) <= radius {
                *c = true;
            }
        }
    }
    centers
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::z_dp;
    use crate::fractal::{cantor_endpoints, ultrametric_tree_space};
    use crate::metric::PointCloud;
    use num_rational::Ratio;

    #[test]
    fn two_point_space() {
        let p = PointCloud::line(vec![0.0, 1.0]).unwrap();
        let (order, tree) = net_tree_order(&p, 0.5).unwrap();
        assert_eq!(order, vec![0, 1]);
        assert_eq!(tree.levels, vec![vec![0], vec![0, 1]]);
    }

    #[test]
    fn tree_levels_match_ultrametric_levels() {
        let t = ultrametric_tree_space(&[2, 2], &[1.0, 1.0 / 3.0]).unwrap();
        let (order, tree) = net_tree_order(&t, 1.0 / 3.0).unwrap();
        assert_eq!(tree.level_sizes(), vec![1.0, 2.0, 4.0]);
        assert_eq!(tree.depth(), 2);
        // siblings stay adjacent
        assert_eq!(order, vec![0, 1, 2, 3]);
    }

    #[test]
    fn cover_invariants_hold() {
        let c = cantor_endpoints(3, Ratio::new(1, 3)).unwrap();
        for u in [0.25, 1.0 / 3.0, 0.5] {
            let (_, tree) = net_tree_order(&c, u).unwrap();
            assert_eq!(tree.levels[0].len(), 1);
            for (k, centers) in tree.levels.iter().enumerate() {
                let r = tree.radius(k);
                for x in 0..c.len() {
                    assert!(centers.iter().any(|&h| c.dist(h, x) <= r));
                }
                if k > 0 {
                    for (i, &h) in centers.iter().enumerate() {
                        let parent = tree.levels[k - 1][tree.parents[k - 1][i]];
                        assert!(c.dist(parent, h) <= tree.radius(k - 1));
                    }
                }
            }
            assert_eq!(tree.levels.last().unwrap().len(), c.len());
            assert!(tree.radius(tree.depth()) < c.min_distance());
        }
    }

    #[test]
    fn cantor_order_is_monotone_across_cylinders() {
        let c = cantor_endpoints(3, Ratio::new(1, 3)).unwrap();
        let xs = c.line_coordinates().unwrap();
        let s = 0.7;
        let (order, tree) = net_tree_order(&c, 1.0 / 3.0).unwrap();
        // each level-1 cylinder ([0,1/3] and [2/3,1]) is contiguous in the order
        let sides: Vec<bool> = order.iter().map(|&i| xs[i] > 0.5).collect();
        assert_eq!(sides.windows(2).filter(|w| w[0] != w[1]).count(), 1);
        assert!(z_dp(&c, &order, s).unwrap() <= tree.bound(s));
    }

    #[test]
    fn geometric_levels_closed_form() {
        let (u, s) = (1.0 / 3.0, 0.7);
        let x = 2.0 * 3f64.powf(-0.7);
        let expected = 9f64.powf(0.7) * x / (1.0 - x);
        let sizes: Vec<f64> = (0..=800).map(|k| 2f64.powi(k)).collect();
        let got = bound_from_levels(&sizes, s, u, 1.0);
        assert!((got - expected).abs() < 1e-9 * expected, "{got} vs {expected}");
    }

    #[test]
    fn single_point_bound_is_zero() {
        let p = PointCloud::line(vec![0.5]).unwrap();
        let (order, tree) = net_tree_order(&p, 0.5).unwrap();
        assert_eq!(order, vec![0]);
        assert_eq!(tree.bound(1.0), 0.0);
    }

    #[test]
    fn rejects_bad_ratio() {
        let p = PointCloud::line(vec![0.0, 1.0]).unwrap();
        assert_eq!(net_tree_order(&p, 1.0).unwrap_err(), DeltaError::InvalidRatio(1.0));
    }
}
