use maser_tur::config::{parse_config, Command, RunConfig};
use maser_tur::fcs::{fano, mean_and_variance};
use maser_tur::generator::build_generator;
use maser_tur::steady::{steady_state_closed_form, steady_state_numeric};
use maser_tur::tur::thermodynamic_uncertainty;
use maser_tur::{EngineParams, Model};
use proptest::prelude::*;

fn driven() -> impl Strategy<Value = EngineParams> {
    (
        0.1f64..5.0,
        0.05f64..5.0,
        0.01f64..3.0,
        0.05f64..3.0,
        0.01f64..2.0,
        -2.0f64..2.0,
        any::<bool>(),
    )
        .prop_filter_map("too close to equilibrium", |(gu, gl, nu, dn, eps, delta, flip)| {
            let (nu, nl) = if flip { (nu + dn, nu) } else { (nu, nu + dn) };
            EngineParams::new(gu, gl, nu, nl, eps, delta).ok()
        })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn generator_preserves_trace(p in driven(), model in prop_oneof![Just(Model::Quantum), Just(Model::Classical)]) {
        let g = build_generator(&p, model, 0.0).unwrap();
        let t = g.trace_covector();
        let scale = g.entries.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for j in 0..g.dim() {
            let col: f64 = (0..g.dim()).map(|i| t[i] * g.entries[(i, j)].re).sum();
            prop_assert!(col.abs() <= 1e-14 * scale, "column {j} sums to {col}");
        }
    }

    #[test]
    fn closed_form_steady_state_is_the_null_vector(p in driven()) {
        let closed = steady_state_closed_form(&p).unwrap();
        let numeric = steady_state_numeric(&build_generator(&p, Model::Quantum, 0.0).unwrap()).unwrap();
        prop_assert!(closed.is_physical(1e-12));
        for (a, b) in closed.to_array().iter().zip(numeric.to_array()) {
            prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn models_share_the_mean_rate(p in driven()) {
        let (mq, _) = mean_and_variance(&p, Model::Quantum).unwrap();
        let (mc, _) = mean_and_variance(&p, Model::Classical).unwrap();
        prop_assert!(rel(mq, mc) <= 1e-12, "{mq} vs {mc}");
    }

    #[test]
    fn current_follows_the_population_bias(p in driven()) {
        let (mean, variance) = mean_and_variance(&p, Model::Quantum).unwrap();
        prop_assert_eq!(mean > 0.0, p.n_l() > p.n_u());
        prop_assert!(variance > 0.0);
    }

    #[test]
    fn fano_splits_into_population_and_transport(p in driven(), model in prop_oneof![Just(Model::Quantum), Just(Model::Classical)]) {
        let c = fano(&p, model).unwrap();
        prop_assert!(rel(c.fano, c.fano_pop + c.fano_tr) <= 1e-10, "{c:?}");
    }

    #[test]
    fn classical_twin_obeys_the_tur(p in driven()) {
        let r = thermodynamic_uncertainty(&p, Model::Classical).unwrap();
        prop_assert!(r.q >= 2.0 - 1e-9, "Q_cl = {}", r.q);
        prop_assert!(r.q_pop >= 2.0 - 1e-12, "Q_pop = {}", r.q_pop);
        prop_assert!(r.q <= r.q_pop + 1e-10, "Q_cl {} above Q_pop {}", r.q, r.q_pop);
    }

    #[test]
    fn config_text_round_trips(
        eps in 0.0f64..10.0,
        delta in -10.0f64..10.0,
        seed in any::<u64>(),
        points in 1usize..1000,
        log in any::<bool>(),
        command in prop_oneof![Just(Command::Sweep), Just(Command::Heatmap), Just(Command::Montecarlo), Just(Command::Verify)],
    ) {
        let mut cfg = RunConfig::new(command);
        cfg.params.epsilon = eps;
        cfg.params.delta = delta;
        cfg.seed = seed;
        cfg.points = points;
        cfg.log = log;
        let back = parse_config(&cfg.to_text(), Command::Point).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Extreme magnitudes may fail, but must fail with an error, not a hang
    // or panic, and any success must be finite.
    #[test]
    fn extreme_points_fail_cleanly(exps in prop::collection::vec(-300.0f64..300.0, 6), with_bound in any::<bool>()) {
        let v: Vec<f64> = exps.iter().map(|e| 10f64.powf(*e)).collect();
        if let Ok(p) = EngineParams::new(v[0], v[1], v[2], v[3], v[4], v[5]) {
            if let Ok(r) = maser_tur::pipeline::evaluate_point(&p, with_bound) {
                prop_assert!(r.tur.q.is_finite());
            }
        }
    }
}
