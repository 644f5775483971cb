//! Property tests for the model, solver, and metric invariants.

use llsp_core::classifiers::{predict, train, ClassifierKind, Dataset, TrainOptions};
use llsp_core::data_ingest::{split_train_test, SplitMode};
use llsp_core::evaluation::{metrics, ConfusionMatrix};
use llsp_core::feature_extraction::{read_features_csv, write_features_csv, FeatureVector};
use llsp_core::label::ClassLabel;
use llsp_core::signal_model::{
    build_design_matrix, eval_polynomial, eval_spline, predict_series, truncated_power,
    AmplitudeSpec, KnotVector, LlspVariant, TimeGrid, WaveModelSpec,
};
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = f64> {
    prop_oneof![(-1.0..1.0f64), (-100.0..100.0f64)]
}

proptest! {
    #[test]
    fn truncated_power_is_zero_left_of_knot_and_positive_right(
        t in -10.0..10.0f64,
        theta in -10.0..10.0f64,
        j in 1u32..6,
    ) {
        let v = truncated_power(t, theta, j);
        if t <= theta {
            prop_assert_eq!(v, 0.0);
        } else {
            prop_assert!(v > 0.0);
            prop_assert!((v - (t - theta).powi(j as i32)).abs() <= 1e-12 * v.abs());
        }
    }

    #[test]
    fn spline_without_knots_equals_polynomial(
        x in prop::collection::vec(coeff(), 4),
        t in 0.0..1.0f64,
    ) {
        let spec = AmplitudeSpec::spline(3, KnotVector::empty((0.0, 1.0)).unwrap()).unwrap();
        let s = eval_spline(&x, &spec, t).unwrap();
        let p = eval_polynomial(&x, t).unwrap();
        prop_assert!((s - p).abs() <= 1e-12 * (1.0 + p.abs()));
    }

    #[test]
    fn evaluation_matches_design_matrix_route(
        omega in 0.0..40.0f64,
        tau in 0.0..3.2f64,
        x in prop::collection::vec(-1.0..1.0f64, 7),
    ) {
        let grid = TimeGrid::new(173.61, 48).unwrap();
        let spec = WaveModelSpec::new(
            LlspVariant::Llsp3,
            AmplitudeSpec::spline(2, KnotVector::equidistant((0.0, 1.0), 3).unwrap()).unwrap(),
            omega,
            tau,
        )
        .unwrap();
        let dm = build_design_matrix(&spec, &grid).unwrap();
        let through_matrix = &dm.data * nalgebra::DVector::from_vec(x.clone());
        let through_eval = predict_series(&spec, &x, &grid).unwrap();
        for i in 0..grid.len() {
            let scale = 1.0 + through_matrix[i].abs();
            prop_assert!((through_eval[i] - through_matrix[i]).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn metrics_are_scale_invariant(
        a in 0u64..50, b in 0u64..50, c in 0u64..50, d in 1u64..50,
        factor in 1u64..20,
    ) {
        let base = metrics(&ConfusionMatrix::new(a, b, c, d)).unwrap();
        let scaled = metrics(&ConfusionMatrix::new(
            a * factor, b * factor, c * factor, d * factor,
        )).unwrap();
        prop_assert_eq!(base, scaled);
    }

    #[test]
    fn class_swap_exchanges_rates(
        a in 0u64..50, b in 0u64..50, c in 0u64..50, d in 1u64..50,
    ) {
        let r = metrics(&ConfusionMatrix::new(a, b, c, d)).unwrap();
        let s = metrics(&ConfusionMatrix::new(d, c, b, a)).unwrap();
        prop_assert_eq!(r.tpr, s.tnr);
        prop_assert_eq!(r.fpr, s.fnr);
        prop_assert_eq!(r.tnr, s.tpr);
        prop_assert_eq!(r.fnr, s.fpr);
    }

    #[test]
    fn feature_csv_round_trips(
        objective in 0.0..1e12f64,
        omega in 0.0..40.0f64,
        tau in 0.0..3.2f64,
        params in prop::collection::vec(prop_oneof![(-1e6..1e6f64), (-1e-6..1e-6f64)], 1..8),
    ) {
        let features = vec![FeatureVector {
            segment_id: "A001".into(),
            label: ClassLabel::NonSeizure,
            objective,
            omega_hz: omega,
            tau,
            amplitude_params: params,
        }];
        let mut buf = Vec::new();
        write_features_csv(&mut buf, &features).unwrap();
        let parsed = read_features_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(parsed, features);
    }

    #[test]
    fn stratified_split_preserves_class_ratio_within_one(
        nonseizure in 4usize..60,
        seizure in 4usize..60,
        seed in 0u64..1000,
    ) {
        let mut labels = vec![ClassLabel::NonSeizure; nonseizure];
        labels.extend(vec![ClassLabel::Seizure; seizure]);
        let total = labels.len();
        let (train, test) =
            split_train_test(&labels, 0.9, SplitMode::Random { seed }, None).unwrap();
        prop_assert_eq!(train.len() + test.len(), total);
        let test_seizure = test.iter().filter(|&&i| labels[i] == ClassLabel::Seizure).count();
        let expected = test.len() as f64 * seizure as f64 / total as f64;
        prop_assert!((test_seizure as f64 - expected).abs() <= 1.0);
    }

    #[test]
    fn knn_prediction_survives_affine_rescaling(
        scale in 0.1..50.0f64,
        offset in -20.0..20.0f64,
        seed in 0u64..100,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|_| vec![rng.random::<f64>() * 10.0, rng.random::<f64>() * 10.0])
            .collect();
        let labels: Vec<ClassLabel> = (0..20)
            .map(|i| if i % 2 == 0 { ClassLabel::NonSeizure } else { ClassLabel::Seizure })
            .collect();
        let names = vec!["f0".to_string(), "f1".to_string()];
        let scaled_rows: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| vec![r[0], r[1] * scale + offset])
            .collect();
        let base = train(
            ClassifierKind::Knn(1),
            &Dataset::new(names.clone(), rows, labels.clone()).unwrap(),
            &TrainOptions::default(),
        )
        .unwrap();
        let rescaled = train(
            ClassifierKind::Knn(1),
            &Dataset::new(names, scaled_rows, labels).unwrap(),
            &TrainOptions::default(),
        )
        .unwrap();
        for _ in 0..10 {
            let q = vec![rng.random::<f64>() * 10.0, rng.random::<f64>() * 10.0];
            let q_scaled = vec![q[0], q[1] * scale + offset];
            prop_assert_eq!(
                predict(&base, &q).unwrap(),
                predict(&rescaled, &q_scaled).unwrap()
            );
        }
    }
}
