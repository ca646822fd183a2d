mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{brute_force, random_rows, score, Row};
use roleinduce::evaluation::harmonic_mean;

#[test]
fn matches_brute_force_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..2000 {
        let rows = random_rows(&mut rng);
        let e = score(&rows);
        let (pu, co) = brute_force(&rows);
        assert_eq!(e.purity, pu, "{:?}", rows);
        assert_eq!(e.collocation, co, "{:?}", rows);
        assert!((e.f1 - harmonic_mean(pu, co)).abs() < 1e-9);
    }
}

#[test]
fn perfect_and_single_cluster() {
    let perfect: Vec<Row> = (0..12).map(|i| (i % 2, i % 3, i % 3)).collect();
    let e = score(&perfect);
    assert_eq!((e.purity, e.collocation, e.f1), (100.0, 100.0, 100.0));

    let lumped: Vec<Row> = (0..10).map(|i| (0, i % 2, 0)).collect();
    let e = score(&lumped);
    assert_eq!((e.purity, e.collocation), (50.0, 100.0));
    assert!((e.f1 - 200.0 / 3.0).abs() < 1e-9);
}

#[test]
fn harmonic_mean_of_reported_scores() {
    assert_eq!(format!("{:.1}", harmonic_mean(79.7, 86.2)), "82.8");
    assert_eq!(format!("{:.1}", harmonic_mean(81.6, 77.5)), "79.5");
}

fn rows_strategy() -> impl Strategy<Value = Vec<Row>> {
    prop::collection::vec((0..3usize, 0..4usize, 0..4usize), 1..=8)
}

proptest! {
    #[test]
    fn merging_clusters_never_raises_purity_or_lowers_collocation(
        rows in rows_strategy(),
        a in 0..4usize,
        b in 0..4usize,
    ) {
        let before = score(&rows);
        let merged: Vec<Row> = rows
            .iter()
            .map(|&(p, g, c)| (p, g, if c == b { a } else { c }))
            .collect();
        let after = score(&merged);
        prop_assert!(after.purity <= before.purity);
        prop_assert!(after.collocation >= before.collocation);
    }

    #[test]
    fn cluster_ids_are_exchangeable(
        rows in rows_strategy(),
        perm in Just((0..4usize).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let renamed: Vec<Row> = rows.iter().map(|&(p, g, c)| (p, g, perm[c])).collect();
        prop_assert_eq!(score(&rows), score(&renamed));
    }

    #[test]
    fn scores_stay_in_range(rows in rows_strategy()) {
        let e = score(&rows);
        prop_assert!((0.0..=100.0).contains(&e.purity));
        prop_assert!((0.0..=100.0).contains(&e.collocation));
        prop_assert!((e.f1 - harmonic_mean(e.purity, e.collocation)).abs() < 1e-9);
    }
}
