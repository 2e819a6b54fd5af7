use super::{LabeledRecord, PipelineError, Stage};
use crate::rng::XorShift64Star;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
    /// Allocate the test set per cluster in proportion to cluster sizes.
    pub stratify: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            test_fraction: 0.33,
            seed: 7,
            stratify: false,
        }
    }
}

/// Test-set size: `ceil(fraction * n)`, kept within `1..n`.
///
/// The small slack absorbs products such as `0.3 * 10 = 3.0000000000000004`.
pub fn test_count(n: usize, fraction: f64) -> usize {
    let raw = (fraction * n as f64 - 1e-9).ceil().max(1.0) as usize;
    raw.min(n.saturating_sub(1))
}

/// `(train, test)`.
pub type Halves<T> = (Vec<LabeledRecord<T>>, Vec<LabeledRecord<T>>);

/// Seeded shuffle partition into `(train, test)`. Both halves keep the
/// input order of their records.
pub fn split<T: Scalar>(records: &[LabeledRecord<T>], spec: &SplitSpec) -> Result<Halves<T>, PipelineError> {
    let n = records.len();
    if n < 2 {
        return Err(PipelineError::EmptyDataset { stage: Stage::Split });
    }
    if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) {
        return Err(PipelineError::Split(format!(
            "test fraction must lie in (0, 1), got {}",
            spec.test_fraction
        )));
    }
    let n_test = test_count(n, spec.test_fraction);
    let mut rng = XorShift64Star::new(spec.seed);

    let mut is_test = vec![false; n];
    if spec.stratify {
        for i in stratified_test_indices(records, n_test, &mut rng) {
            is_test[i] = true;
        }
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut order);
        for &i in &order[..n_test] {
            is_test[i] = true;
        }
    }

    let (test, train): (Vec<_>, Vec<_>) = records.iter().cloned().zip(is_test).partition(|(_, t)| *t);
    Ok((
        train.into_iter().map(|(r, _)| r).collect(),
        test.into_iter().map(|(r, _)| r).collect(),
    ))
}

/// Largest-remainder allocation of `n_test` slots across clusters, then a
/// seeded shuffle within each cluster.
fn stratified_test_indices<T>(records: &[LabeledRecord<T>], n_test: usize, rng: &mut XorShift64Star) -> Vec<usize> {
    let k = records.iter().map(|r| r.cluster).max().unwrap_or(0) + 1;
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, r) in records.iter().enumerate() {
        groups[r.cluster].push(i);
    }
    let n = records.len() as f64;
    let quotas: Vec<f64> = groups.iter().map(|g| g.len() as f64 * n_test as f64 / n).collect();
    let mut alloc: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut remaining = n_test - alloc.iter().sum::<usize>();
    let mut by_remainder: Vec<usize> = (0..k).collect();
    by_remainder.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.partial_cmp(&ra).expect("finite").then(a.cmp(&b))
    });
    for c in by_remainder.into_iter().cycle() {
        if remaining == 0 {
            break;
        }
        if alloc[c] < groups[c].len() {
            alloc[c] += 1;
            remaining -= 1;
        }
    }

    let mut chosen = Vec::with_capacity(n_test);
    for (group, take) in groups.iter_mut().zip(alloc) {
        rng.shuffle(group);
        chosen.extend_from_slice(&group[..take]);
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records(n: usize, k: usize) -> Vec<LabeledRecord<f64>> {
        (0..n)
            .map(|i| LabeledRecord {
                ticker: format!("T{i:03}"),
                volatility: i as f64,
                ret: 0.0,
                cluster: i % k,
            })
            .collect()
    }

    #[test]
    fn seventy_records_split_24_46() {
        let (train, test) = split(&records(70, 4), &SplitSpec::default()).unwrap();
        assert_eq!((train.len(), test.len()), (46, 24));
    }

    #[test]
    fn half_of_four() {
        let spec = SplitSpec {
            test_fraction: 0.5,
            ..SplitSpec::default()
        };
        let (train, test) = split(&records(4, 2), &spec).unwrap();
        assert_eq!((train.len(), test.len()), (2, 2));
    }

    #[test]
    fn counts() {
        assert_eq!(test_count(70, 0.33), 24);
        assert_eq!(test_count(10, 0.3), 3);
        assert_eq!(test_count(2, 0.99), 1);
        assert_eq!(test_count(3, 0.01), 1);
    }

    #[test]
    fn deterministic() {
        let r = records(30, 3);
        assert_eq!(
            split(&r, &SplitSpec::default()).unwrap(),
            split(&r, &SplitSpec::default()).unwrap()
        );
    }

    #[test]
    fn stratified_keeps_proportions() {
        let spec = SplitSpec {
            stratify: true,
            test_fraction: 0.5,
            seed: 3,
        };
        let (_, test) = split(&records(40, 4), &spec).unwrap();
        for c in 0..4 {
            assert_eq!(test.iter().filter(|r| r.cluster == c).count(), 5);
        }
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(matches!(
            split(&records(1, 1), &SplitSpec::default()),
            Err(PipelineError::EmptyDataset { .. })
        ));
        let spec = SplitSpec {
            test_fraction: 1.0,
            ..SplitSpec::default()
        };
        assert!(matches!(split(&records(5, 1), &spec), Err(PipelineError::Split(_))));
    }
}
