use ndarray::ArrayView2;

use super::{kmeans_fit, KMeansConfig, KMeansError, KMeansModel};
use crate::Scalar;

/// Outcome of a silhouette sweep over `k_min..=k_max`.
#[derive(Debug, Clone)]
pub struct KSelection<T> {
    pub best_k: usize,
    /// `(k, silhouette)` for every k in the range, ascending.
    pub scores: Vec<(usize, T)>,
    pub best_model: KMeansModel<T>,
}

impl<T: Scalar> KSelection<T> {
    /// Score table as `k,silhouette` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,silhouette\n");
        for (k, s) in &self.scores {
            out.push_str(&format!("{k},{s:.16e}\n"));
        }
        out
    }
}

/// Fits every k in the range with the seed and restart count of `base`
/// and keeps the one with the highest silhouette (smallest k on ties).
pub fn select_k<T: Scalar>(
    points: ArrayView2<T>,
    k_min: usize,
    k_max: usize,
    base: &KMeansConfig,
) -> Result<KSelection<T>, KMeansError> {
    let n = points.nrows();
    let max = n.saturating_sub(1);
    if k_min < 2 || k_min > k_max || k_max > max {
        return Err(KMeansError::BadRange { k_min, k_max, max });
    }

    let mut scores = Vec::with_capacity(k_max - k_min + 1);
    let mut best: Option<KMeansModel<T>> = None;
    for k in k_min..=k_max {
        let config = KMeansConfig { k, ..base.clone() };
        let model = kmeans_fit(points, &config)?;
        let score = model.silhouette.expect("k >= 2");
        scores.push((k, score));
        if best.as_ref().is_none_or(|b| score > b.silhouette.expect("k >= 2")) {
            best = Some(model);
        }
    }
    let best_model = best.expect("non-empty range");
    Ok(KSelection {
        best_k: best_model.k,
        scores,
        best_model,
    })
}
