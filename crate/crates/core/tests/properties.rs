use emgmix::classifier::{build_basis, classify, kl_divergence, DEFAULT_EPSILON};
use emgmix::dataset::MotionVocabulary;
use emgmix::harness::average_pattern;
use emgmix::mixer::mix_at_layer;
use emgmix::network::{cross_entropy, softmax_rows};
use emgmix::signal::{normalize, Envelope, NormalizationParams};
use ndarray::Array2;
use proptest::prelude::*;

fn prob_vec(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, k).prop_filter_map("nonzero", |v| {
        let s: f64 = v.iter().sum();
        (s > 1e-6).then(|| v.iter().map(|x| x / s).collect())
    })
}

proptest! {
    #[test]
    fn normalized_frames_are_on_simplex(
        rows in prop::collection::vec(prop::collection::vec(-0.1f64..3.0, 5), 1..40),
        maxima in prop::collection::vec(0.1f64..4.0, 5),
    ) {
        let values = Array2::from_shape_fn((rows.len(), 5), |(i, j)| rows[i][j]);
        let env = Envelope { motion: 0, trial: 0, values };
        // All-zero frames may be dropped; the rest must be on the simplex.
        if let Ok(patterns) = normalize(&env, &NormalizationParams { channel_max: maxima }) {
            for p in patterns {
                prop_assert!(p.x.iter().all(|&v| v >= 0.0));
                prop_assert!((p.x.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn kl_is_nonnegative(u in prob_vec(6), y in prob_vec(6)) {
        prop_assert!(kl_divergence(&u, &y, DEFAULT_EPSILON).unwrap() >= -1e-12);
        prop_assert_eq!(kl_divergence(&u, &u, DEFAULT_EPSILON).unwrap(), 0.0);
    }

    #[test]
    fn classify_is_argmin(y in prob_vec(6)) {
        let vocab = MotionVocabulary::upper_limb();
        let basis = build_basis(&vocab);
        let got = classify(&y, &basis).unwrap();
        let scores: Vec<f64> = basis
            .vectors
            .iter()
            .map(|u| kl_divergence(u, &y, DEFAULT_EPSILON).unwrap())
            .collect();
        prop_assert!(scores.iter().all(|&s| scores[got] <= s));
    }

    #[test]
    fn softmax_rows_sum_to_one(logits in prop::collection::vec(-50.0f64..50.0, 6), shift in -100.0f64..100.0) {
        let a = softmax_rows(Array2::from_shape_vec((1, 6), logits.clone()).unwrap());
        let b = softmax_rows(Array2::from_shape_vec((1, 6), logits.iter().map(|v| v + shift).collect()).unwrap());
        prop_assert!((a.sum() - 1.0).abs() < 1e-12);
        for (x, y) in a.iter().zip(b.iter()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn cross_entropy_floor_is_entropy(t in prob_vec(4), y in prob_vec(4)) {
        let floor = cross_entropy(&t, &t).unwrap();
        prop_assert!(cross_entropy(&y, &t).unwrap() >= floor - 1e-9);
    }

    #[test]
    fn mixing_simplex_points_stays_on_simplex(a in prob_vec(8), b in prob_vec(8), l in 0.0f64..=1.0) {
        let z = mix_at_layer(&[&a, &b], &[l, 1.0 - l]).unwrap();
        prop_assert!(z.iter().all(|&v| v >= 0.0));
        prop_assert!((z.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn averaged_pattern_on_simplex(ps in prop::collection::vec(prob_vec(8), 1..20)) {
        let refs: Vec<&[f64]> = ps.iter().map(Vec::as_slice).collect();
        let m = average_pattern(&refs).unwrap();
        prop_assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}
