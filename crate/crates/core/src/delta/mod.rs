//! Minimizing the chain energy over all orderings of a finite space.

mod exact;
mod heuristic;
mod nettree;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::chain::ChainError;
use crate::metric::Metric;

pub use exact::{min_chain_exact, min_chain_line, ExactOptions, DEFAULT_EXACT_CAP, DEFAULT_NODE_BUDGET};
pub use heuristic::{min_chain_heuristic, nearest_neighbor_order, two_opt, Strategy};
pub use nettree::{bound_from_levels, net_tree_order, NetTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Sorted,
    NearestNeighbor,
    TwoOpt,
    NetTree,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaResult {
    pub value: f64,
    pub order: Vec<usize>,
    pub exact: bool,
    pub method: Method,
    pub nodes_explored: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeltaError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("{n} points exceed the exact-solver cap of {cap}")]
    TooManyPoints { n: usize, cap: usize },
    #[error("node budget of {budget} exhausted; best order found has value {}", best.value)]
    BudgetExceeded { budget: u64, best: Box<DeltaResult> },
    #[error("net-tree ratio u must lie in (0, 1), got {0}")]
    InvalidRatio(f64),
    #[error("the space is not a subset of the real line")]
    NotOnLine,
    #[error("the exponent grid is empty")]
    EmptyGrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaMode {
    Exact(ExactOptions),
    Heuristic(Strategy),
}

/// Minimal chain energy of the whole space, exactly or as an upper bound.
///
/// For a finite space the supremum over finite configurations is attained by
/// the full point set, since removing points never raises the minimum.
pub fn delta_finite<M: Metric + ?Sized>(space: &M, s: f64, mode: DeltaMode) -> Result<DeltaResult, DeltaError> {
    match mode {
        DeltaMode::Exact(opts) => min_chain_exact(space, s, opts),
        DeltaMode::Heuristic(strategy) => min_chain_heuristic(space, s, strategy),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub s: f64,
    pub delta: f64,
    pub exact: bool,
    pub method: Method,
    pub bound: f64,
}

/// One row per exponent: the best available minimal chain energy and the
/// covering-tree bound computed from a single net tree with ratio `u`.
///
/// Line subsets use the sorted order (cross-checked against the exact solver
/// when small), other spaces up to the exact cap use branch-and-bound, and
/// larger spaces the better of the nearest-neighbour and net-tree orders.
pub fn dimension_profile<M: Metric + ?Sized>(space: &M, s_grid: &[f64], u: f64) -> Result<Vec<ProfileRow>, DeltaError> {
    if s_grid.is_empty() {
        return Err(DeltaError::EmptyGrid);
    }
    let (tree_order, tree) = net_tree_order(space, u)?;
    let line = space.line_coordinates();
    s_grid
        .par_iter()
        .map(|&s| {
            let best = if let Some(xs) = &line {
                min_chain_line(xs, s, true)?
            } else if space.len() <= DEFAULT_EXACT_CAP {
                min_chain_exact(space, s, ExactOptions::default())?
            } else {
                let nn = min_chain_heuristic(space, s, Strategy::NearestNeighbor { start: None })?;
                let value = crate::chain::z_dp(space, &tree_order, s)?;
                if value < nn.value {
                    DeltaResult { value, order: tree_order.clone(), exact: false, method: Method::NetTree, nodes_explored: 0 }
                } else {
                    nn
                }
            };
            Ok(ProfileRow { s, delta: best.value, exact: best.exact, method: best.method, bound: tree.bound(s) })
        })
        .collect()
}
