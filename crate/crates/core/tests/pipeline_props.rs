use std::collections::BTreeSet;

use proptest::prelude::*;
use tsclust::pipeline::{accuracy, split, test_count, LabeledRecord, SplitSpec};

fn records(n: usize, k: usize) -> Vec<LabeledRecord<f64>> {
    (0..n)
        .map(|i| LabeledRecord {
            ticker: format!("T{i:03}"),
            volatility: 0.1 + i as f64 * 0.01,
            ret: (i as f64).sin(),
            cluster: (i * 7) % k,
        })
        .collect()
}

proptest! {
    #[test]
    fn split_is_a_partition(
        n in 2usize..120,
        k in 1usize..6,
        fraction in 0.01f64..0.99,
        seed in any::<u64>(),
        stratify in any::<bool>(),
    ) {
        let all = records(n, k);
        let (train, test) = split(&all, &SplitSpec { test_fraction: fraction, seed, stratify }).unwrap();
        prop_assert_eq!(test.len(), test_count(n, fraction));
        prop_assert!(!train.is_empty() && !test.is_empty());
        let a: BTreeSet<&str> = train.iter().map(|r| r.ticker.as_str()).collect();
        let b: BTreeSet<&str> = test.iter().map(|r| r.ticker.as_str()).collect();
        prop_assert!(a.is_disjoint(&b));
        let union: BTreeSet<&str> = a.union(&b).copied().collect();
        let everything: BTreeSet<&str> = all.iter().map(|r| r.ticker.as_str()).collect();
        prop_assert_eq!(union, everything);
    }

    #[test]
    fn test_size_is_the_rounded_up_share(n in 2usize..500, fraction in 0.01f64..0.99) {
        let t = test_count(n, fraction);
        prop_assert!(t >= 1 && t < n);
        let share = fraction * n as f64;
        prop_assert!(t as f64 >= share.min((n - 1) as f64) - 1e-6);
        prop_assert!((t as f64) < share.max(1.0) + 1.0);
    }

    #[test]
    fn accuracy_bounded_and_integral(pairs in prop::collection::vec((0usize..5, 0usize..5), 1..60)) {
        let (p, r): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
        let (correct, total, acc) = accuracy(&p, &r).unwrap();
        prop_assert!((0.0..=1.0).contains(&acc));
        prop_assert!((acc * total as f64 - correct as f64).abs() < 1e-9);
        prop_assert_eq!(correct, p.iter().zip(&r).filter(|(a, b)| a == b).count());
    }

    #[test]
    fn accuracy_invariant_under_shared_relabelling(
        pairs in prop::collection::vec((0usize..5, 0usize..5), 1..60),
        perm in Just((0usize..5).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let (p, r): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
        let p2: Vec<usize> = p.iter().map(|&l| perm[l]).collect();
        let r2: Vec<usize> = r.iter().map(|&l| perm[l]).collect();
        prop_assert_eq!(accuracy(&p, &r).unwrap(), accuracy(&p2, &r2).unwrap());
    }
}
