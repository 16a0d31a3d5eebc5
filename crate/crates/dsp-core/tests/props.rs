//! Property tests for the crate's structural invariants.

use proptest::prelude::*;

use dsp_core::dataset::{
    euclidean_distance, split_train_test, standardize_coords, Dataset, Point, Sample,
};
use dsp_core::eval::{compute_metrics, measure_convergence, trailing_moving_average};
use dsp_core::idw::{idw_predict, idw_weights, IdwConfig};
use dsp_core::nn::{HeadMode, HeadOutput, MlpParams, TrainStepConfig};
use dsp_core::rl::{rsv_shape_rewards, zscore, ReplayBuffer, Transition};
use dsp_core::rng::seeded_rng;

fn sample_strategy() -> impl Strategy<Value = Sample> {
    (
        -100.0..100.0f64,
        -100.0..100.0f64,
        -50.0..50.0f64,
    )
        .prop_map(|(x, y, v)| Sample::new(x, y, v))
}

fn dataset_strategy(min: usize, max: usize) -> impl Strategy<Value = Dataset> {
    proptest::collection::vec(sample_strategy(), min..=max).prop_filter_map(
        "unique coordinates",
        |samples| Dataset::new("prop", samples).ok(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn standardize_roundtrip(d in dataset_strategy(2, 40)) {
        prop_assume!(standardize_coords(&d).is_ok());
        let (std_d, params) = standardize_coords(&d).unwrap();
        for (orig, std) in d.samples().iter().zip(std_d.samples()) {
            let back = params.invert(std.position());
            let tol_x = 1e-9 * orig.x.abs().max(1.0);
            let tol_y = 1e-9 * orig.y.abs().max(1.0);
            prop_assert!((back.x - orig.x).abs() <= tol_x);
            prop_assert!((back.y - orig.y).abs() <= tol_y);
        }
        // Standardized columns really are zero-mean unit-variance.
        let n = std_d.len() as f64;
        let mean_x: f64 = std_d.samples().iter().map(|s| s.x).sum::<f64>() / n;
        let var_x: f64 = std_d.samples().iter().map(|s| s.x * s.x).sum::<f64>() / n;
        prop_assert!(mean_x.abs() < 1e-9);
        prop_assert!((var_x - 1.0).abs() < 1e-9);
    }

    #[test]
    fn split_partitions_input(d in dataset_strategy(3, 50), frac in 0.2..0.8f64, seed in any::<u64>()) {
        prop_assume!(split_train_test(&d, frac, seed).is_ok());
        let (train, test) = split_train_test(&d, frac, seed).unwrap();
        prop_assert_eq!(train.len() + test.len(), d.len());

        let key = |s: &Sample| (s.x.to_bits(), s.y.to_bits(), s.value.to_bits());
        let mut combined: Vec<_> = train.samples().iter().map(key).collect();
        combined.extend(test.samples().iter().map(key));
        combined.sort_unstable();
        let mut original: Vec<_> = d.samples().iter().map(key).collect();
        original.sort_unstable();
        prop_assert_eq!(combined, original);
    }

    #[test]
    fn triangle_inequality(
        ax in -1e3..1e3f64, ay in -1e3..1e3f64,
        bx in -1e3..1e3f64, by in -1e3..1e3f64,
        cx in -1e3..1e3f64, cy in -1e3..1e3f64,
    ) {
        let a = Point::new(ax, ay);
        let b = Point::new(bx, by);
        let c = Point::new(cx, cy);
        let slack = 1e-9;
        prop_assert!(euclidean_distance(a, c) <= euclidean_distance(a, b) + euclidean_distance(b, c) + slack);
        prop_assert!((euclidean_distance(a, b) - euclidean_distance(b, a)).abs() == 0.0);
    }

    #[test]
    fn idw_convexity_normalization_exactness(
        d in dataset_strategy(2, 25),
        qx in -120.0..120.0f64,
        qy in -120.0..120.0f64,
        p in 0.2..8.0f64,
        pick in any::<prop::sample::Index>(),
    ) {
        let q = Point::new(qx, qy);
        let cfg = IdwConfig::with_power(p);
        let v = idw_predict(&d, q, &cfg).unwrap();
        let lo = d.values().fold(f64::INFINITY, f64::min);
        let hi = d.values().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(v >= lo && v <= hi, "{v} outside [{lo}, {hi}]");

        // Exactness at a sample point.
        let s = d.samples()[pick.index(d.len())];
        prop_assert_eq!(idw_predict(&d, s.position(), &cfg).unwrap(), s.value);

        // Normalized weights (only defined away from the samples).
        let min_d = d
            .samples()
            .iter()
            .map(|s| euclidean_distance(q, s.position()))
            .fold(f64::INFINITY, f64::min);
        if min_d > 1e-9 {
            let w = idw_weights(&d, q, p).unwrap();
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(w.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn idw_rigid_motion_invariance(
        d in dataset_strategy(2, 15),
        qx in -50.0..50.0f64,
        qy in -50.0..50.0f64,
        theta in 0.0..std::f64::consts::TAU,
        tx in -200.0..200.0f64,
        ty in -200.0..200.0f64,
        p in 0.5..6.0f64,
    ) {
        let q = Point::new(qx, qy);
        let cfg = IdwConfig::with_power(p);
        let before = idw_predict(&d, q, &cfg).unwrap();

        let (sin, cos) = theta.sin_cos();
        let rot = |pt: Point| Point::new(
            cos * pt.x - sin * pt.y + tx,
            sin * pt.x + cos * pt.y + ty,
        );
        let moved = Dataset::new(
            "moved",
            d.samples()
                .iter()
                .map(|s| {
                    let r = rot(s.position());
                    Sample::new(r.x, r.y, s.value)
                })
                .collect(),
        ).unwrap();
        let after = idw_predict(&moved, rot(q), &cfg).unwrap();
        prop_assert!((before - after).abs() <= 1e-9 * before.abs().max(1.0), "{before} vs {after}");
    }

    #[test]
    fn sgd_small_step_never_increases_loss(seed in any::<u64>(), sx in -2.0..2.0f64, sy in -2.0..2.0f64) {
        let mut rng = seeded_rng(seed, "sgd-prop");
        let head = if seed % 2 == 0 { HeadMode::Single } else { HeadMode::Dueling };
        let mut net = MlpParams::new(2, &[6], 3, head, &mut rng).unwrap();
        let state = [sx, sy];
        let arity = net.output_arity();
        let target: Vec<f64> = (0..arity).map(|i| (i as f64 * 0.7).sin()).collect();

        let flatten = |o: HeadOutput| -> Vec<f64> {
            match o {
                HeadOutput::Single(q) => q,
                HeadOutput::Dueling { value, advantage } => {
                    let mut v = vec![value];
                    v.extend(advantage);
                    v
                }
            }
        };
        let loss = |net: &MlpParams| -> f64 {
            flatten(net.forward(&state).unwrap())
                .iter()
                .zip(&target)
                .map(|(o, t)| (o - t) * (o - t))
                .sum()
        };
        let before = loss(&net);
        let out = flatten(net.forward(&state).unwrap());
        let out_grad: Vec<f64> = out.iter().zip(&target).map(|(o, t)| 2.0 * (o - t)).collect();
        let grads = net.backward(&state, &out_grad).unwrap();
        net.sgd_step(&grads, &TrainStepConfig::new(1e-6)).unwrap();
        let after = loss(&net);
        prop_assert!(after <= before + 1e-12 * before.abs().max(1.0), "{before} -> {after}");
    }

    #[test]
    fn replay_holds_exactly_last_capacity(capacity in 1usize..40, extra in 0usize..60) {
        let mut buf = ReplayBuffer::new(capacity).unwrap();
        let total = capacity + extra;
        for k in 0..total {
            buf.push(Transition {
                state: vec![k as f64],
                action: 0,
                reward: k as f64,
                next_state: vec![],
                terminal: false,
            });
        }
        prop_assert_eq!(buf.len(), capacity);
        let rewards: Vec<f64> = buf.iter().map(|t| t.reward).collect();
        let expect: Vec<f64> = ((total - capacity)..total).map(|k| k as f64).collect();
        prop_assert_eq!(rewards, expect);
    }

    #[test]
    fn rsv_standardization_is_zero_mean_unit_std(
        rewards in proptest::collection::vec(-100.0..100.0f64, 2..40),
        seed in any::<u64>(),
    ) {
        let spread = rewards.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - rewards.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assume!(spread > 1e-6);
        let mut rng = seeded_rng(seed, "rsv-prop");
        let net = MlpParams::new(3, &[5], 4, HeadMode::Dueling, &mut rng).unwrap();
        let batch: Vec<Transition> = rewards
            .iter()
            .enumerate()
            .map(|(k, &r)| Transition {
                state: vec![0.1 * k as f64, -0.2, 0.3],
                action: 0,
                reward: r,
                next_state: vec![0.0; 3],
                terminal: false,
            })
            .collect();
        // λ = 0 exposes the standardized rewards directly.
        let shaped = rsv_shape_rewards(&batch, &net, 0.0).unwrap();
        let n = shaped.len() as f64;
        let mean = shaped.iter().sum::<f64>() / n;
        let var = shaped.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        prop_assert!(mean.abs() < 1e-9, "mean {mean}");
        prop_assert!((var.sqrt() - 1.0).abs() < 1e-9, "std {}", var.sqrt());
        prop_assert_eq!(shaped, zscore(&rewards));
    }

    #[test]
    fn metric_inequalities(
        pairs in proptest::collection::vec((-100.0..100.0f64, -100.0..100.0f64), 1..60),
    ) {
        let predicted: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let actual: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let r = compute_metrics(&predicted, &actual).unwrap();
        prop_assert!((r.rmse * r.rmse - r.mse).abs() <= 1e-12 * r.mse.max(1.0));
        prop_assert!(r.mae <= r.rmse + 1e-12);
        prop_assert!(r.mse >= 0.0 && r.mae >= 0.0 && r.mape_percent >= 0.0);
    }

    #[test]
    fn convergence_append_rules(
        curve in proptest::collection::vec(0.0..10.0f64, 12..80),
        window in 1usize..10,
        precision in 0.001..0.5f64,
    ) {
        let before = measure_convergence(&curve, window, precision).unwrap();

        // Re-appending the value that slides out of the trailing window
        // reproduces the last smoothed value, so a converged verdict and
        // its episode are preserved.
        if before.converged {
            let mut same = curve.clone();
            same.push(curve[curve.len() - window]);
            let after = measure_convergence(&same, window, precision).unwrap();
            prop_assert!(after.converged);
            prop_assert_eq!(after.episode_of_convergence, before.episode_of_convergence);
        }

        // Appending a value that drags the smoothed tail above m + precision
        // always revokes convergence.
        let smoothed = trailing_moving_average(&curve, window);
        let m = smoothed.iter().cloned().fold(f64::INFINITY, f64::min);
        let tail_sum: f64 = curve[curve.len().saturating_sub(window - 1)..].iter().sum();
        let spike = (m + precision + 1.0) * window as f64 - tail_sum;
        let mut spiked = curve.clone();
        spiked.push(spike);
        let after = measure_convergence(&spiked, window, precision).unwrap();
        prop_assert!(!after.converged);
    }
}
