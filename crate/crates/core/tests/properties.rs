//! Algebraic and statistical invariants, checked on random inputs.

use ndarray::Array2;
use proptest::prelude::*;

use itgaze::classifier::{loss_and_gradient, softmax_prediction};
use itgaze::evaluation::{cohen_kappa, significance, stratified_kfold, weighted_prf, ConfusionMatrix};
use itgaze::Label;

fn label() -> impl Strategy<Value = Label> {
    prop::sample::select(Label::ALL.to_vec())
}

fn matrix() -> impl Strategy<Value = [[u64; 3]; 3]> {
    prop::array::uniform3(prop::array::uniform3(0u64..200))
        .prop_filter("needs at least one instance", |m| m.iter().flatten().sum::<u64>() > 0)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn weighted_recall_is_accuracy(m in matrix()) {
        let r = weighted_prf(&ConfusionMatrix::new(m)).unwrap();
        prop_assert!(close(r.weighted_recall, r.accuracy, 1e-12), "{} vs {}", r.weighted_recall, r.accuracy);
    }

    #[test]
    fn weighted_scores_ignore_class_order(m in matrix(), perm in Just([0usize, 1, 2]).prop_shuffle()) {
        let mut p = [[0u64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                p[perm[i]][perm[j]] = m[i][j];
            }
        }
        let a = weighted_prf(&ConfusionMatrix::new(m)).unwrap();
        let b = weighted_prf(&ConfusionMatrix::new(p)).unwrap();
        prop_assert!(close(a.weighted_precision, b.weighted_precision, 1e-12));
        prop_assert!(close(a.weighted_recall, b.weighted_recall, 1e-12));
        prop_assert!(close(a.weighted_f1, b.weighted_f1, 1e-12));
    }

    #[test]
    fn probabilities_sum_to_one(s in prop::array::uniform3(-700.0f64..700.0)) {
        let p = softmax_prediction(&s);
        prop_assert!(close(p.probabilities.iter().sum::<f64>(), 1.0, 1e-12));
        prop_assert!(p.probabilities.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn identical_varied_sequences_have_kappa_one(a in prop::collection::vec(label(), 2..60)) {
        prop_assume!(a.iter().any(|l| *l != a[0]));
        prop_assert_eq!(cohen_kappa(&a, &a).unwrap().kappa, 1.0);
    }

    #[test]
    fn kappa_one_only_for_identical(a in prop::collection::vec(label(), 1..40), b in prop::collection::vec(label(), 1..40)) {
        let n = a.len().min(b.len());
        let r = cohen_kappa(&a[..n], &b[..n]).unwrap();
        if a[..n] != b[..n] {
            prop_assert!(r.kappa < 1.0);
        }
        prop_assert!(r.kappa <= 1.0 + 1e-12);
    }

    #[test]
    fn constant_annotator_gives_zero_kappa(a in prop::collection::vec(label(), 1..40), c in label()) {
        let b = vec![c; a.len()];
        prop_assert_eq!(cohen_kappa(&a, &b).unwrap().kappa, 0.0);
    }

    #[test]
    fn stratified_folds_balance_every_class(
        labels in prop::collection::vec(label(), 10..300),
        k in 2usize..11,
        seed in any::<u64>(),
    ) {
        prop_assume!(labels.len() >= k);
        let folds = stratified_kfold(&labels, k, seed).unwrap();
        let mut seen = vec![0usize; labels.len()];
        for f in 0..k {
            for i in folds.test(f) {
                seen[i] += 1;
            }
        }
        prop_assert!(seen.iter().all(|c| *c == 1), "not a partition");
        for l in Label::ALL {
            let per_fold: Vec<usize> = (0..k)
                .map(|f| folds.test(f).into_iter().filter(|&i| labels[i] == l).count())
                .collect();
            let (lo, hi) = (per_fold.iter().min().unwrap(), per_fold.iter().max().unwrap());
            prop_assert!(hi - lo <= 1, "{l}: {per_fold:?}");
        }
    }

    #[test]
    fn gradient_matches_central_differences(seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        // 5 instances × 8 columns, the last being the bias.
        let xb = Array2::from_shape_fn((5, 8), |(_, j)| if j == 7 { 1.0 } else { rng.random_range(-2.0..2.0) });
        let y: Vec<Label> = (0..5).map(|_| Label::ALL[rng.random_range(0..3)]).collect();
        let w = Array2::from_shape_fn((3, 8), |_| rng.random_range(-1.0..1.0));
        let lambda = rng.random_range(0.0..2.0);
        let (_, g) = loss_and_gradient(&w, xb.view(), &y, lambda);
        let h = 1e-5;
        for k in 0..3 {
            for j in 0..8 {
                let mut up = w.clone();
                up[(k, j)] += h;
                let mut down = w.clone();
                down[(k, j)] -= h;
                let numeric = (loss_and_gradient(&up, xb.view(), &y, lambda).0
                    - loss_and_gradient(&down, xb.view(), &y, lambda).0)
                    / (2.0 * h);
                let rel = (numeric - g[(k, j)]).abs() / numeric.abs().max(g[(k, j)].abs()).max(1e-8);
                prop_assert!(rel < 1e-5, "({k},{j}): analytic {} numeric {numeric}", g[(k, j)]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn self_comparison_never_differs(
        pairs in prop::collection::vec((label(), label()), 5..80),
        seed in any::<u64>(),
    ) {
        let gold: Vec<Label> = pairs.iter().map(|p| p.0).collect();
        let pred: Vec<Label> = pairs.iter().map(|p| p.1).collect();
        let s = significance(&pred, &pred, &gold, 300, seed).unwrap();
        prop_assert_eq!((s.delta, s.ci_low, s.ci_high, s.p_value), (0.0, 0.0, 0.0, 1.0));
    }

    #[test]
    fn bootstrap_interval_is_ordered(
        triples in prop::collection::vec((label(), label(), label()), 5..80),
        seed in any::<u64>(),
    ) {
        let gold: Vec<Label> = triples.iter().map(|t| t.0).collect();
        let a: Vec<Label> = triples.iter().map(|t| t.1).collect();
        let b: Vec<Label> = triples.iter().map(|t| t.2).collect();
        let s = significance(&a, &b, &gold, 300, seed).unwrap();
        prop_assert!(s.ci_low <= s.ci_high);
        prop_assert!((0.0..=1.0).contains(&s.p_value));
    }
}
