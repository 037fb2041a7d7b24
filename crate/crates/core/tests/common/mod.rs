#![allow(dead_code)]

use fractal_chains::fractal::ultrametric_tree_space;
use fractal_chains::{FiniteMetricSpace, MetricKind, PointCloud};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Distinct random points in the unit cube.
pub fn random_cloud(rng: &mut ChaCha8Rng, n: usize, dim: usize, metric: MetricKind) -> PointCloud {
    loop {
        let points = (0..n).map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect()).collect();
        let cloud = PointCloud::new(points, metric).unwrap();
        if cloud.find_duplicate().is_none() {
            return cloud;
        }
    }
}

pub fn random_line(rng: &mut ChaCha8Rng, n: usize) -> PointCloud {
    random_cloud(rng, n, 1, MetricKind::Euclidean)
}

/// Integer distances in `{3, ..., 6}`; any such matrix is a metric.
pub fn random_integer_metric(rng: &mut ChaCha8Rng, n: usize) -> FiniteMetricSpace {
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = rng.gen_range(3..=6) as f64;
            m[i][j] = d;
            m[j][i] = d;
        }
    }
    FiniteMetricSpace::validate(m, None).unwrap()
}

/// Small integer points on the line, as a dense space.
pub fn random_integer_line(rng: &mut ChaCha8Rng, n: usize, span: u32) -> FiniteMetricSpace {
    let mut xs: Vec<u32> = (0..=span).collect();
    xs.shuffle(rng);
    let pts: Vec<f64> = xs[..n].iter().map(|&x| x as f64).collect();
    FiniteMetricSpace::from_points(&PointCloud::line(pts).unwrap()).unwrap()
}

/// One of several small metric families, chosen at random.
pub fn random_space(rng: &mut ChaCha8Rng, n: usize) -> FiniteMetricSpace {
    match rng.gen_range(0..4) {
        0 => FiniteMetricSpace::from_points(&random_line(rng, n)).unwrap(),
        1 => FiniteMetricSpace::from_points(&random_cloud(rng, n, 2, MetricKind::Euclidean)).unwrap(),
        2 => FiniteMetricSpace::from_points(&random_cloud(rng, n, 3, MetricKind::Chebyshev)).unwrap(),
        _ => random_integer_metric(rng, n),
    }
}

/// Random tree space with at most `max_leaves` leaves and strictly
/// decreasing level diameters.
pub fn random_tree(rng: &mut ChaCha8Rng, max_leaves: usize) -> (FiniteMetricSpace, Vec<f64>) {
    loop {
        let levels = rng.gen_range(1..=4);
        let arities: Vec<usize> = (0..levels).map(|_| rng.gen_range(1..=4)).collect();
        let leaves: usize = arities.iter().product();
        if leaves < 2 || leaves > max_leaves {
            continue;
        }
        let mut diams = Vec::with_capacity(levels);
        let mut d = rng.gen_range(0.5..2.0);
        for _ in 0..levels {
            diams.push(d);
            d *= rng.gen_range(0.1..0.9);
        }
        return (ultrametric_tree_space(&arities, &diams).unwrap(), diams);
    }
}

pub fn random_subset(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    loop {
        let s: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
        if !s.is_empty() {
            return s;
        }
    }
}

pub fn random_order(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}
