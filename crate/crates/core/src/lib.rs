//! Chain energies, Hölder parametrizations and covering tools for finite
//! metric spaces, with generators for fractal samples.

pub mod chain;
pub mod cover;
pub mod delta;
pub mod fractal;
pub mod holder;
pub mod io;
pub mod lipcover;
pub mod metric;
pub mod selfsimilar;
mod setcover;
pub mod ultra;

pub use metric::{FiniteMetricSpace, Metric, MetricError, MetricKind, PointCloud};
