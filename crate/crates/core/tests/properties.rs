use proptest::prelude::*;

use astrocyte_cpg::config::RunConfig;
use astrocyte_cpg::cpg::InterLimbWeights;
use astrocyte_cpg::energy::{p_policy, p_snn_cpg, FanOut, Frequencies, OpCosts, POLICY_LAYERS};
use astrocyte_cpg::io::{parse_weights_csv, weights_csv};
use astrocyte_cpg::metrics::trot_index;
use astrocyte_cpg::physics::{alive_indicator, ScriptedBackend, StubScript};
use astrocyte_cpg::trainer::{Trainer, TrainerParams};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn snn_power_is_linear(
        f in prop::array::uniform4(0.0f64..1e4),
        g in prop::array::uniform4(0.0f64..1e4),
        k in 0.0f64..10.0,
    ) {
        let fan = FanOut::default();
        let c = OpCosts::default();
        let fr = |a: [f64; 4]| Frequencies { inhibitory: a[0], calf: a[1], thigh: a[2], limit: a[3] };
        let sum = std::array::from_fn(|i| f[i] + k * g[i]);
        let lhs = p_snn_cpg(&fr(sum), &fan, &c);
        let rhs = p_snn_cpg(&fr(f), &fan, &c) + k * p_snn_cpg(&fr(g), &fan, &c);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1e-12));
    }

    #[test]
    fn policy_power_is_linear_in_rate(f in 0.0f64..1e4) {
        let c = OpCosts::default();
        let one = p_policy(&POLICY_LAYERS, 1.0, &c);
        prop_assert!((p_policy(&POLICY_LAYERS, f, &c) - f * one).abs() <= 1e-12 * f * one + 1e-30);
    }

    #[test]
    fn trot_index_bounded(series in prop::collection::vec(prop::array::uniform4(0u32..20), 60..300)) {
        let t = trot_index(&series, 50);
        prop_assert!(t.is_finite());
        prop_assert!((-3.0 - 1e-9..=3.0 + 1e-9).contains(&t));
    }

    #[test]
    fn weight_table_round_trips(values in prop::collection::vec(-0.05f64..0.05, 48)) {
        let mut w = InterLimbWeights::zeros(-0.05, 0.05);
        for ((x, y), v) in InterLimbWeights::trainable_pairs().zip(values) {
            w.set(x, y, v);
        }
        prop_assert_eq!(&parse_weights_csv(&weights_csv(&w)).unwrap(), w.as_rows());
    }

    #[test]
    fn config_overrides_round_trip(seed in any::<u64>(), eta in 0.0f64..1e-6, k in 100.0f64..1e5) {
        let mut c = RunConfig::default();
        c.apply_override(&format!("run.seed={seed}")).unwrap();
        c.apply_override(&format!("plasticity.eta={eta}")).unwrap();
        c.apply_override(&format!("physics.contact_stiffness={k}")).unwrap();
        prop_assert_eq!(c.run.seed, seed);
        prop_assert_eq!(c.plasticity.eta, eta);
        prop_assert_eq!(RunConfig::from_text(&c.to_text()).unwrap(), c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// The tipped-over count only grows within a session, ends the session
    /// exactly at the threshold, and the session's schedule values are the
    /// ones computed from the history beforehand.
    #[test]
    fn non_alive_accumulator_and_frozen_schedule(topple in 0.0f64..2.0, seed in 0u64..100) {
        let p = TrainerParams::default();
        let stub = ScriptedBackend::new(
            StubScript::Steady { vel_x: 0.5, omega: [0.0; 3], topple_after: Some(topple) },
            &p.cpg.limits, 0.1, 1e-3,
        );
        let mut t = Trainer::new(p, seed, stub);
        t.run_session();
        let (progress, start) = (t.history.progress(10.0), t.history.learning_start());
        let mut count = 0u64;
        let mut prev = 0u64;
        let rec = t.session(true, &mut |e| {
            if !alive_indicator(e.obs, 0.5) {
                count += 1;
            }
            assert!(count >= prev);
            prev = count;
        });
        prop_assert_eq!(count, 500);
        prop_assert_eq!(rec.progress, progress);
        prop_assert_eq!(rec.learning_start_s, start);
    }
}
