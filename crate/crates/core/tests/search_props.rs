use emq_core::search::{kendall, pearson, spearman, spearman_at_topk, tournament_select};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pairs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (3usize..40)
        .prop_flat_map(|n| (prop::collection::vec(-100.0f64..100.0, n), prop::collection::vec(-100.0f64..100.0, n)))
}

proptest! {
    #[test]
    fn rank_metrics_ignore_monotone_transforms((gt, est) in pairs(), t in 0.5f64..=1.0) {
        let warped: Vec<f64> = est.iter().map(|x| (x / 50.0).exp() * 3.0 + 1.0).collect();
        prop_assert_eq!(spearman(&gt, &est).unwrap().value, spearman(&gt, &warped).unwrap().value);
        prop_assert_eq!(kendall(&gt, &est).unwrap().value, kendall(&gt, &warped).unwrap().value);
        prop_assert_eq!(
            spearman_at_topk(&gt, &est, t).unwrap().value,
            spearman_at_topk(&gt, &warped, t).unwrap().value
        );
    }

    #[test]
    fn full_fraction_is_plain_spearman((gt, est) in pairs()) {
        prop_assert_eq!(spearman_at_topk(&gt, &est, 1.0).unwrap(), spearman(&gt, &est).unwrap());
    }

    #[test]
    fn correlations_are_bounded_and_symmetric((x, y) in pairs()) {
        for f in [spearman, kendall, pearson] {
            let a = f(&x, &y).unwrap().value;
            prop_assert!((-1.0..=1.0).contains(&a));
            prop_assert!((a - f(&y, &x).unwrap().value).abs() < 1e-12);
        }
    }

    #[test]
    fn parents_are_distinct_members(n in 2usize..40, seed in any::<u64>()) {
        let fitness: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let (a, b) = tournament_select(&fitness, 0.25, 2, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(a != b && a < n && b < n);
    }
}

#[test]
fn hand_computed_examples() {
    let x = [1.0, 2.0, 3.0];
    let y = [2.0, 1.0, 3.0];
    assert!((kendall(&x, &y).unwrap().value - 1.0 / 3.0).abs() < 1e-12);
    assert!((spearman(&x, &y).unwrap().value - 0.5).abs() < 1e-12);
    // Pearson of raw values: cov 0.5 over variance 1.
    assert!((pearson(&x, &y).unwrap().value - 0.5).abs() < 1e-12);
    let gt = [4.0, 3.0, 2.0, 1.0];
    let est = [3.0, 4.0, 2.0, 1.0];
    assert!((spearman_at_topk(&gt, &est, 0.5).unwrap().value + 1.0).abs() < 1e-12);
}

#[test]
fn fitter_individuals_are_selected_more_often() {
    let n = 20;
    let fitness: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
    let mut counts = vec![0usize; n];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..40_000 {
        let (a, b) = tournament_select(&fitness, 0.25, 2, &mut rng).unwrap();
        counts[a] += 1;
        counts[b] += 1;
    }
    // Compare quartiles of the fitness ladder.
    let q: Vec<usize> = counts.chunks(5).map(|c| c.iter().sum()).collect();
    assert!(q.windows(2).all(|w| w[0] < w[1]), "{q:?}");
}
