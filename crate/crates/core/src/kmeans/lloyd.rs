use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;

use super::{silhouette, KMeansError};
use crate::rng::{derive_seed, XorShift64Star};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    /// Independent k-means++ initializations; the lowest-WCSS fit wins.
    pub restarts: usize,
    pub max_iter: usize,
    /// Maximum centroid displacement treated as converged.
    pub tol: f64,
}

impl KMeansConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            seed: 0,
            restarts: 10,
            max_iter: 300,
            tol: 1e-4,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts.max(1);
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter.max(1);
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansModel<T> {
    pub k: usize,
    /// `k x d`, row `c` is the mean of the points labelled `c`.
    pub centroids: Array2<T>,
    pub assignments: Vec<usize>,
    pub wcss: T,
    /// `None` when fewer than two clusters exist.
    pub silhouette: Option<T>,
    pub seed: u64,
    pub iterations_run: usize,
    /// WCSS after every assign/update pass of the winning restart.
    pub wcss_history: Vec<T>,
}

impl<T: Scalar> KMeansModel<T> {
    pub fn predict(&self, point: ArrayView1<T>) -> Result<usize, KMeansError> {
        assign(point, self.centroids.view())
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.assignments {
            sizes[l] += 1;
        }
        sizes
    }

    /// Renumbers clusters so that `order[new] == old`.
    pub fn relabel(&mut self, order: &[usize]) {
        assert_eq!(order.len(), self.k, "relabel order must cover every cluster");
        let mut old_to_new = vec![0; self.k];
        for (new, &old) in order.iter().enumerate() {
            old_to_new[old] = new;
        }
        self.centroids = self.centroids.select(Axis(0), order);
        for l in &mut self.assignments {
            *l = old_to_new[*l];
        }
    }

    /// Renumbers clusters by descending centroid coordinate `dim`
    /// (ties keep the original order).
    pub fn canonicalize_by_descending(&mut self, dim: usize) {
        let mut order: Vec<usize> = (0..self.k).collect();
        order.sort_by(|&a, &b| {
            self.centroids[[b, dim]]
                .partial_cmp(&self.centroids[[a, dim]])
                .expect("finite centroids")
        });
        self.relabel(&order);
    }
}

pub fn squared_distance<T: Scalar>(a: ArrayView1<T>, b: ArrayView1<T>) -> T {
    a.iter().zip(b.iter()).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid; ties go to the lowest index.
pub fn assign<T: Scalar>(point: ArrayView1<T>, centroids: ArrayView2<T>) -> Result<usize, KMeansError> {
    if centroids.nrows() == 0 {
        return Err(KMeansError::EmptyCentroids);
    }
    if centroids.ncols() != point.len() {
        return Err(KMeansError::ShapeMismatch {
            what: "point dimension",
            expected: centroids.ncols(),
            found: point.len(),
        });
    }
    Ok(nearest(point, centroids).0)
}

fn nearest<T: Scalar>(point: ArrayView1<T>, centroids: ArrayView2<T>) -> (usize, T) {
    let mut best = (0, squared_distance(point, centroids.row(0)));
    for (c, row) in centroids.outer_iter().enumerate().skip(1) {
        let d = squared_distance(point, row);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

pub fn kmeans_fit<T: Scalar>(points: ArrayView2<T>, config: &KMeansConfig) -> Result<KMeansModel<T>, KMeansError> {
    let n = points.nrows();
    if config.k < 1 || config.k > n {
        return Err(KMeansError::BadK { k: config.k, n });
    }
    if let Some(index) = points.outer_iter().position(|row| row.iter().any(|v| !v.is_finite())) {
        return Err(KMeansError::NonFinitePoint { index });
    }

    let restarts = config.restarts.max(1);
    let fits: Vec<Restart<T>> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = XorShift64Star::new(derive_seed(config.seed, r as u64));
            run_lloyd(points, config.k, config.max_iter.max(1), T::lit(config.tol), &mut rng)
        })
        .collect();

    // Lowest WCSS; earliest restart on ties, matching a sequential scan.
    let best = fits
        .into_iter()
        .reduce(|best, next| if next.wcss < best.wcss { next } else { best })
        .expect("at least one restart");

    let silhouette = if config.k >= 2 {
        Some(silhouette(points, &best.labels)?)
    } else {
        None
    };

    Ok(KMeansModel {
        k: config.k,
        centroids: best.centroids,
        assignments: best.labels,
        wcss: best.wcss,
        silhouette,
        seed: config.seed,
        iterations_run: best.iterations,
        wcss_history: best.history,
    })
}

struct Restart<T> {
    centroids: Array2<T>,
    labels: Vec<usize>,
    wcss: T,
    iterations: usize,
    history: Vec<T>,
}

/// Distance-weighted seeding: each new centre is drawn with probability
/// proportional to its squared distance from the nearest chosen centre.
fn plus_plus_init<T: Scalar>(points: ArrayView2<T>, k: usize, rng: &mut XorShift64Star) -> Array2<T> {
    let n = points.nrows();
    let mut centroids = Array2::zeros((k, points.ncols()));
    let first = rng.below(n);
    centroids.row_mut(0).assign(&points.row(first));

    let mut d2: Vec<T> = points
        .outer_iter()
        .map(|p| squared_distance(p, points.row(first)))
        .collect();

    for c in 1..k {
        let total: T = d2.iter().copied().sum();
        let chosen = if total > T::zero() {
            let target = T::lit(rng.unit()) * total;
            let mut acc = T::zero();
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w <= T::zero() {
                    continue;
                }
                acc += w;
                pick = Some(i);
                if acc > target {
                    break;
                }
            }
            pick.expect("positive total weight")
        } else {
            rng.below(n)
        };
        centroids.row_mut(c).assign(&points.row(chosen));
        for (i, p) in points.outer_iter().enumerate() {
            let d = squared_distance(p, points.row(chosen));
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    centroids
}

fn assign_all<T: Scalar>(points: ArrayView2<T>, centroids: &Array2<T>) -> Vec<usize> {
    points.outer_iter().map(|p| nearest(p, centroids.view()).0).collect()
}

/// Moves the point farthest from its centroid into each empty cluster.
fn repair_empty<T: Scalar>(points: ArrayView2<T>, centroids: &mut Array2<T>, labels: &mut [usize]) {
    let k = centroids.nrows();
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    for c in 0..k {
        if sizes[c] > 0 {
            continue;
        }
        let mut far: Option<(usize, T)> = None;
        for (i, p) in points.outer_iter().enumerate() {
            if sizes[labels[i]] < 2 {
                continue;
            }
            let d = squared_distance(p, centroids.row(labels[i]));
            if far.is_none_or(|(_, best)| d > best) {
                far = Some((i, d));
            }
        }
        let (i, _) = far.expect("k <= n leaves a cluster with two or more points");
        sizes[labels[i]] -= 1;
        labels[i] = c;
        sizes[c] = 1;
        centroids.row_mut(c).assign(&points.row(i));
    }
}

fn update_means<T: Scalar>(points: ArrayView2<T>, labels: &[usize], k: usize) -> Array2<T> {
    let mut sums = Array2::<T>::zeros((k, points.ncols()));
    let mut counts = vec![0usize; k];
    for (p, &l) in points.outer_iter().zip(labels) {
        let mut row = sums.row_mut(l);
        row += &p;
        counts[l] += 1;
    }
    for (mut row, &count) in sums.outer_iter_mut().zip(&counts) {
        row /= T::from_usize_lossy(count);
    }
    sums
}

fn wcss<T: Scalar>(points: ArrayView2<T>, centroids: &Array2<T>, labels: &[usize]) -> T {
    points
        .outer_iter()
        .zip(labels)
        .map(|(p, &l)| squared_distance(p, centroids.row(l)))
        .sum()
}

fn run_lloyd<T: Scalar>(
    points: ArrayView2<T>,
    k: usize,
    max_iter: usize,
    tol: T,
    rng: &mut XorShift64Star,
) -> Restart<T> {
    let mut centroids = plus_plus_init(points, k, rng);
    let mut labels = vec![usize::MAX; points.nrows()];
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut pending: Option<Vec<usize>> = None;

    while iterations < max_iter {
        iterations += 1;
        let mut next = pending.take().unwrap_or_else(|| assign_all(points, &centroids));
        repair_empty(points, &mut centroids, &mut next);
        let stable = next == labels;
        labels = next;

        let updated = update_means(points, &labels, k);
        let shift = centroids
            .outer_iter()
            .zip(updated.outer_iter())
            .map(|(a, b)| squared_distance(a, b).sqrt())
            .fold(T::zero(), T::max);
        centroids = updated;
        history.push(wcss(points, &centroids, &labels));

        if stable {
            break;
        }
        if shift < tol {
            // Small move: stop only if it leaves every point on its nearest centroid.
            let check = assign_all(points, &centroids);
            if check == labels {
                break;
            }
            pending = Some(check);
        }
    }

    Restart {
        wcss: *history.last().expect("max_iter >= 1"),
        centroids,
        labels,
        iterations,
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn assign_exact_and_tie() {
        let c = array![[0.0, 0.0], [2.0, 0.0], [5.0, 5.0]];
        assert_eq!(assign(array![5.0, 5.0].view(), c.view()).unwrap(), 2);
        assert_eq!(assign(array![1.0, 0.0].view(), c.view()).unwrap(), 0);
        let empty = Array2::<f64>::zeros((0, 2));
        assert_eq!(
            assign(array![1.0, 0.0].view(), empty.view()),
            Err(KMeansError::EmptyCentroids)
        );
    }

    #[test]
    fn k_equals_n() {
        let p = array![[0.0, 0.0], [1.0, 3.0], [4.0, 1.0], [2.0, 2.0]];
        let m = kmeans_fit(p.view(), &KMeansConfig::new(4).with_seed(3)).unwrap();
        assert_eq!(m.wcss, 0.0);
        let mut labels = m.assignments.clone();
        labels.sort_unstable();
        assert_eq!(labels, [0, 1, 2, 3]);
        assert_eq!(m.silhouette, Some(0.0));
    }

    #[test]
    fn k_one_is_global_mean() {
        let p = array![[0.0f64, 0.0], [2.0, 0.0], [4.0, 6.0]];
        let m = kmeans_fit(p.view(), &KMeansConfig::new(1)).unwrap();
        assert_eq!(m.centroids, array![[2.0, 2.0]]);
        // Squared deviations from the mean: 8 + 4 + 20.
        assert!((m.wcss - 32.0).abs() < 1e-12);
        assert_eq!(m.silhouette, None);
    }

    #[test]
    fn bad_inputs() {
        let p = array![[0.0, 0.0], [1.0, 1.0]];
        assert_eq!(
            kmeans_fit(p.view(), &KMeansConfig::new(0)).unwrap_err(),
            KMeansError::BadK { k: 0, n: 2 }
        );
        assert_eq!(
            kmeans_fit(p.view(), &KMeansConfig::new(3)).unwrap_err(),
            KMeansError::BadK { k: 3, n: 2 }
        );
        let q = array![[0.0, 0.0], [f64::NAN, 1.0]];
        assert_eq!(
            kmeans_fit(q.view(), &KMeansConfig::new(1)).unwrap_err(),
            KMeansError::NonFinitePoint { index: 1 }
        );
    }

    #[test]
    fn duplicate_points_keep_clusters_non_empty() {
        let p = array![[1.0, 1.0], [1.0, 1.0], [1.0, 1.0], [2.0, 2.0]];
        let m = kmeans_fit(p.view(), &KMeansConfig::new(3).with_seed(1)).unwrap();
        assert!(m.cluster_sizes().iter().all(|&s| s > 0));
    }

    #[test]
    fn relabel_round_trip() {
        let p = array![[0.0, 0.0], [0.1, 0.0], [10.0, 10.0], [10.1, 10.0], [5.0, -5.0]];
        let mut m = kmeans_fit(p.view(), &KMeansConfig::new(3).with_seed(9)).unwrap();
        m.canonicalize_by_descending(1);
        let cols: Vec<f64> = m.centroids.column(1).to_vec();
        assert!(cols.windows(2).all(|w| w[0] >= w[1]), "{cols:?}");
        for (i, p) in p.outer_iter().enumerate() {
            assert_eq!(m.predict(p).unwrap(), m.assignments[i]);
        }
    }

    #[test]
    fn single_precision_fit() {
        let p = array![[0.0f32, 0.0], [0.1, 0.0], [10.0, 10.0], [10.1, 10.0]];
        let m = kmeans_fit(p.view(), &KMeansConfig::new(2).with_seed(2)).unwrap();
        assert_eq!(m.assignments[0], m.assignments[1]);
        assert_ne!(m.assignments[0], m.assignments[2]);
    }
}
