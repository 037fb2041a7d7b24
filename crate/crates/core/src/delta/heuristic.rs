use crate::chain::{check_exponent, z_dp};
use crate::metric::Metric;

use super::nettree::net_tree_order;
use super::{DeltaError, DeltaResult, Method};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    /// Greedy nearest neighbour. Without an explicit start the walk begins at
    /// the point farthest from point 0.
    NearestNeighbor { start: Option<usize> },
    /// First-improvement segment reversals applied to the nearest-neighbour order.
    TwoOpt,
    /// Lexicographic order of a net tree with ratio `u`.
    NetTree { u: f64 },
}

/// Upper bound on the minimal chain energy from a constructed ordering.
pub fn min_chain_heuristic<M: Metric + ?Sized>(space: &M, s: f64, strategy: Strategy) -> Result<DeltaResult, DeltaError> {
    check_exponent(s)?;
    let (order, method) = match strategy {
        Strategy::NearestNeighbor { start } => (nearest_neighbor_order(space, start), Method::NearestNeighbor),
        Strategy::TwoOpt => {
            let start = nearest_neighbor_order(space, None);
            (two_opt(space, s, start)?, Method::TwoOpt)
        }
        Strategy::NetTree { u } => (net_tree_order(space, u)?.0, Method::NetTree),
    };
    let value = if order.is_empty() { 0.0 } else { z_dp(space, &order, s)? };
    Ok(DeltaResult { value, order, exact: false, method, nodes_explored: 0 })
}

/// Greedy walk to the closest unvisited point, ties to the lower index.
pub fn nearest_neighbor_order<M: Metric + ?Sized>(space: &M, start: Option<usize>) -> Vec<usize> {
    let n = space.len();
    if n == 0 {
        return Vec::new();
    }
    let start = start.filter(|&i| i < n).unwrap_or_else(|| {
        (0..n).fold(0, |best, j| if space.dist(0, j) > space.dist(0, best) { j } else { best })
    });
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut cur = start;
    visited[cur] = true;
    order.push(cur);
    for _ in 1..n {
        let mut next = usize::MAX;
        let mut best = f64::INFINITY;
        for j in 0..n {
            if !visited[j] {
                let d = space.dist(cur, j);
                if d < best {
                    best = d;
                    next = j;
                }
            }
        }
        visited[next] = true;
        order.push(next);
        cur = next;
    }
    order
}

/// Repeated passes over all segment reversals, accepting any strict
/// improvement immediately, until a pass changes nothing.
pub fn two_opt<M: Metric + ?Sized>(space: &M, s: f64, mut order: Vec<usize>) -> Result<Vec<usize>, DeltaError> {
    let n = order.len();
    if n < 3 {
        return Ok(order);
    }
    let mut current = z_dp(space, &order, s)?;
    loop {
        let mut improved = false;
        for i in 0..n - 1 {
            for j in i + 1..n {
                order[i..=j].reverse();
                let candidate = z_dp(space, &order, s)?;
                if candidate < current {
                    current = candidate;
                    improved = true;
                } else {
                    order[i..=j].reverse();
                }
            }
        }
        if !improved {
            return Ok(order);
        }
    }
}
