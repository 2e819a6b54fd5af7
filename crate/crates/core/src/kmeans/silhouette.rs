use ndarray::ArrayView2;

use super::{squared_distance, KMeansError};
use crate::Scalar;

/// Mean silhouette coefficient under Euclidean distance.
///
/// For each point, `a` is the mean distance to the other members of its
/// cluster and `b` the smallest mean distance to any other cluster; the
/// point scores `(b - a) / max(a, b)`. Members of singleton clusters score 0.
pub fn silhouette<T: Scalar>(points: ArrayView2<T>, labels: &[usize]) -> Result<T, KMeansError> {
    let n = points.nrows();
    if labels.len() != n {
        return Err(KMeansError::ShapeMismatch {
            what: "labels",
            expected: n,
            found: labels.len(),
        });
    }
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut counts = vec![0usize; k];
    for &l in labels {
        counts[l] += 1;
    }
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(KMeansError::SingleCluster);
    }

    let mut total = T::zero();
    let mut sums = vec![T::zero(); k];
    for i in 0..n {
        sums.iter_mut().for_each(|s| *s = T::zero());
        for j in 0..n {
            if j != i {
                sums[labels[j]] += squared_distance(points.row(i), points.row(j)).sqrt();
            }
        }
        let own = labels[i];
        if counts[own] < 2 {
            continue;
        }
        let a = sums[own] / T::from_usize_lossy(counts[own] - 1);
        let b = (0..k)
            .filter(|&c| c != own && counts[c] > 0)
            .map(|c| sums[c] / T::from_usize_lossy(counts[c]))
            .fold(T::infinity(), T::min);
        let denom = a.max(b);
        if denom > T::zero() {
            total += (b - a) / denom;
        }
    }
    let score = total / T::from_usize_lossy(n);
    Ok(score.max(-T::one()).min(T::one()))
}
