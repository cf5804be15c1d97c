//! Randomized invariants over the metric and container layers.

use proptest::prelude::*;

use dereverb::evaluation::{
    dereverberation_ratio, local_mse, remainder_reverberation_time, sabine_absorptivity,
    schroeder_curve, EvalConfig, Horizon,
};
use dereverb::signal::ImpulseResponse;

fn signal(len: core::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schroeder_curve_starts_at_zero_and_never_rises(samples in signal(8..256)) {
        prop_assume!(samples.iter().any(|s| *s != 0.0));
        let g = ImpulseResponse::new(samples, 1000.0).unwrap();
        let curve = schroeder_curve(&g).unwrap();
        prop_assert_eq!(curve[0], 0.0);
        for w in curve.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn dr_is_invariant_under_common_scaling(
        samples in signal(64..200),
        scale in 0.01f64..100.0,
    ) {
        let fs = 1000.0;
        let cfg = EvalConfig { t_min: 0.004, early_window: 0.05, modeling_delay: 0.02, mse_interval: 0.02 };
        prop_assume!(samples.iter().skip(5).any(|s| s.abs() > 1e-6));
        let g = ImpulseResponse::new(samples.clone(), fs).unwrap();
        let x = ImpulseResponse::new(samples.iter().map(|s| 0.5 * s + 0.01).collect(), fs).unwrap();
        let base = dereverberation_ratio(&g, &x, &cfg, Horizon::Infinite).unwrap();
        let g2 = ImpulseResponse::new(g.samples.iter().map(|s| scale * s).collect(), fs).unwrap();
        let x2 = ImpulseResponse::new(x.samples.iter().map(|s| scale * s).collect(), fs).unwrap();
        let scaled = dereverberation_ratio(&g2, &x2, &cfg, Horizon::Infinite).unwrap();
        prop_assert!((base - scaled).abs() < 1e-9, "{base} vs {scaled}");
    }

    #[test]
    fn local_mse_ignores_per_interval_scale(
        samples in signal(128..256),
        scale in 0.05f64..20.0,
    ) {
        prop_assume!(samples.chunks(32).all(|c| c.iter().any(|s| s.abs() > 1e-9)));
        let a = ImpulseResponse::new(samples.clone(), 1000.0).unwrap();
        let b = ImpulseResponse::new(samples.iter().map(|s| scale * s).collect(), 1000.0).unwrap();
        for (_, e) in local_mse(&a, &b, 32).unwrap() {
            prop_assert!(e < 1e-20);
        }
    }

    #[test]
    fn remainder_times_are_monotone_in_level(samples in signal(64..256)) {
        prop_assume!(samples.iter().map(|s| s * s).sum::<f64>() > 1e-6);
        let g = ImpulseResponse::new(samples, 1000.0).unwrap();
        let t10 = remainder_reverberation_time(&g, &g, 10.0).unwrap().seconds();
        let t20 = remainder_reverberation_time(&g, &g, 20.0).unwrap().seconds();
        let t60 = remainder_reverberation_time(&g, &g, 60.0).unwrap().seconds();
        prop_assert!(t10 <= t20 && t20 <= t60);
    }

    #[test]
    fn sabine_scales_linearly_with_the_room(
        dims in prop::array::uniform3(0.5f64..10.0),
        t60 in 0.05f64..5.0,
        s in 0.1f64..10.0,
    ) {
        let base = sabine_absorptivity(dims, t60);
        let scaled = sabine_absorptivity([s * dims[0], s * dims[1], s * dims[2]], t60);
        prop_assert!((scaled - s * base).abs() <= 1e-9 * scaled.abs().max(1.0));
    }

    #[test]
    fn wav_round_trip_preserves_f32_samples(samples in signal(1..512)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.wav");
        let as_f32: Vec<f64> = samples.iter().map(|&s| s as f32 as f64).collect();
        dereverb::wav::write_mono_f32(&path, &as_f32, 8000).unwrap();
        let back = dereverb::wav::read_mono_f32(&path).unwrap();
        prop_assert_eq!(back.samples, as_f32);
    }
}
