//! Lloyd's k-means with k-means++ seeding, silhouette scoring and a
//! silhouette-driven sweep over the number of clusters.
//!
//! Points are rows of an `n x d` matrix; distances are Euclidean. Only the
//! two-dimensional ⟨volatility, return⟩ space is used by the pipeline, but
//! nothing here depends on `d == 2`.

mod lloyd;
mod select;
mod silhouette;

use thiserror::Error;

pub use lloyd::{assign, kmeans_fit, squared_distance, KMeansConfig, KMeansModel};
pub use select::{select_k, KSelection};
pub use silhouette::silhouette;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KMeansError {
    #[error("k = {k} is outside 1..={n}")]
    BadK { k: usize, n: usize },
    #[error("point {index} has a non-finite coordinate")]
    NonFinitePoint { index: usize },
    #[error("no centroids given")]
    EmptyCentroids,
    #[error("silhouette needs at least 2 distinct clusters")]
    SingleCluster,
    #[error("k range {k_min}..={k_max} must satisfy 2 <= k_min <= k_max <= {max}")]
    BadRange { k_min: usize, k_max: usize, max: usize },
    #[error("{what}: expected {expected}, found {found}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
}
