use crate::chain::{check_exponent, pow_s, OrderedChain};
use crate::metric::Metric;

use super::heuristic::{min_chain_heuristic, Strategy};
use super::{DeltaError, DeltaResult, Method};

pub const DEFAULT_EXACT_CAP: usize = 12;
pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactOptions {
    pub node_budget: u64,
    pub max_points: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions { node_budget: DEFAULT_NODE_BUDGET, max_points: DEFAULT_EXACT_CAP }
    }
}

/// Exact minimum of the chain energy over all orderings, by depth-first
/// branch-and-bound over prefixes.
///
/// For a placed prefix we keep `L[v]`, the longest chain from the first
/// element to each placed `v`. Each unplaced `u` will eventually receive
/// `L[u] >= max_v L[v] + d(v,u)^s`, and the final energy dominates every
/// `L`, so the largest of these tentative values is a lower bound. Only
/// orderings whose first index is below their last are visited; reversal
/// leaves the energy unchanged.
///
/// Children are explored in index order and the incumbent is only replaced
/// by strictly better leaves, so the reported order is the lexicographically
/// least optimal one.
pub fn min_chain_exact<M: Metric + ?Sized>(space: &M, s: f64, opts: ExactOptions) -> Result<DeltaResult, DeltaError> {
    check_exponent(s)?;
    let n = space.len();
    if n > opts.max_points {
        return Err(DeltaError::TooManyPoints { n, cap: opts.max_points });
    }
    if n <= 1 {
        return Ok(DeltaResult { value: 0.0, order: (0..n).collect(), exact: true, method: Method::Exact, nodes_explored: 0 });
    }
    let weights: Vec<f64> = (0..n * n).map(|k| pow_s(space.dist(k / n, k % n), s)).collect();
    let seed = min_chain_heuristic(space, s, Strategy::NearestNeighbor { start: None })?;

    let mut search = Search {
        n,
        weights,
        budget: opts.node_budget,
        nodes: 0,
        best_value: seed.value,
        best_order: seed.order.clone(),
        found: false,
        order: Vec::with_capacity(n),
        placed: vec![false; n],
        tentative: vec![vec![0.0; n]; n + 1],
        aborted: false,
    };
    for first in 0..n - 1 {
        search.nodes += 1;
        if search.nodes > search.budget {
            search.aborted = true;
            break;
        }
        search.order.push(first);
        search.placed[first] = true;
        for u in 0..n {
            search.tentative[1][u] = search.weights[first * n + u];
        }
        let lb = (0..n).filter(|&u| u != first).map(|u| search.tentative[1][u]).fold(0.0, f64::max);
        if !search.prune(lb) {
            search.descend(1);
        }
        search.placed[first] = false;
        search.order.pop();
        if search.aborted {
            break;
        }
    }

    let result = DeltaResult {
        value: search.best_value,
        order: search.best_order,
        exact: !search.aborted,
        method: Method::Exact,
        nodes_explored: search.nodes,
    };
    if search.aborted {
        Err(DeltaError::BudgetExceeded { budget: opts.node_budget, best: Box::new(result) })
    } else {
        Ok(result)
    }
}

struct Search {
    n: usize,
    weights: Vec<f64>,
    budget: u64,
    nodes: u64,
    best_value: f64,
    best_order: Vec<usize>,
    /// Whether the incumbent came from the search itself (rather than the seed).
    found: bool,
    order: Vec<usize>,
    placed: Vec<bool>,
    /// `tentative[depth][u]`: max over the first `depth` placed `v` of `L[v] + w(v,u)`.
    tentative: Vec<Vec<f64>>,
    aborted: bool,
}

impl Search {
    fn prune(&self, lower_bound: f64) -> bool {
        lower_bound > self.best_value || (self.found && lower_bound >= self.best_value)
    }

    fn descend(&mut self, depth: usize) {
        let n = self.n;
        let first = self.order[0];
        for u in 0..n {
            if self.placed[u] {
                continue;
            }
            let remaining = n - depth - 1;
            if remaining == 0 && u < first {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                self.aborted = true;
                return;
            }
            let chain_to_u = self.tentative[depth][u];
            if remaining == 0 {
                if chain_to_u < self.best_value || (!self.found && chain_to_u <= self.best_value) {
                    self.best_value = chain_to_u;
                    self.best_order.clone_from(&self.order);
                    self.best_order.push(u);
                    self.found = true;
                }
                continue;
            }
            // the last element must still be able to exceed `first`
            let tail_ok = (first + 1..n).any(|v| v != u && !self.placed[v]);
            if !tail_ok {
                continue;
            }
            let (done, rest) = self.tentative.split_at_mut(depth + 1);
            let (prev, next) = (&done[depth], &mut rest[0]);
            let row = &self.weights[u * n..(u + 1) * n];
            let mut lb = chain_to_u;
            for v in 0..n {
                if self.placed[v] || v == u {
                    continue;
                }
                let t = prev[v].max(chain_to_u + row[v]);
                next[v] = t;
                lb = lb.max(t);
            }
            if self.prune(lb) {
                continue;
            }
            self.placed[u] = true;
            self.order.push(u);
            self.descend(depth + 1);
            self.order.pop();
            self.placed[u] = false;
            if self.aborted {
                return;
            }
        }
    }
}

/// Sorted-order chain energy of a subset of the line.
///
/// The result is flagged exact only when `cross_validate` is set, the set is
/// within the exact solver's default cap, and branch-and-bound agrees with
/// the sorted value. If the exact solver finds a strictly smaller value its
/// result is returned instead.
pub fn min_chain_line(coords: &[f64], s: f64, cross_validate: bool) -> Result<DeltaResult, DeltaError> {
    let (order, value) = OrderedChain::sorted_line(coords, s)?;
    let mut result = DeltaResult { value, order, exact: false, method: Method::Sorted, nodes_explored: 0 };
    if cross_validate && coords.len() <= DEFAULT_EXACT_CAP {
        let line = crate::metric::PointCloud::line(coords.to_vec()).map_err(|_| DeltaError::NotOnLine)?;
        let exact = min_chain_exact(&line, s, ExactOptions::default())?;
        let tol = 1e-12 * value.abs().max(1.0);
        if exact.value < value - tol {
            return Ok(exact);
        }
        result.exact = true;
        result.nodes_explored = exact.nodes_explored;
    }
    Ok(result)
}
