use proptest::prelude::*;

use fluidq::csvio::{fmt_f64, parse_f64};
use fluidq::excursion_laws::{brownian, ExcursionLaws};
use fluidq::mc_oracle::{simulate_cycles, trace_cycle, SimConfig};
use fluidq::scale_fn::{ln_w_brownian, w_brownian, ConvolutionPowers, Engine, ScaleFunction};
use fluidq::special_fns::erf::{erfc, erfcx};
use fluidq::special_fns::mittag_leffler::mittag_leffler;
use fluidq::special_fns::quadrature::{integrate, QuadratureSpec};
use fluidq::LevyModel;

fn model_strategy() -> impl Strategy<Value = LevyModel> {
    prop_oneof![
        (0.05f64..0.95).prop_map(LevyModel::brownian),
        (0.2f64..3.0, 0.5f64..4.0, 0.1f64..0.9).prop_map(|(p, g, n)| LevyModel::tempered_stable(p, g, n)),
    ]
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn psi_is_convex(m in model_strategy(), t1 in 0.0f64..20.0, t2 in 0.0f64..20.0, t in 0.0f64..1.0) {
        let mid = m.psi(t * t1 + (1.0 - t) * t2).unwrap();
        let chord = t * m.psi(t1).unwrap() + (1.0 - t) * m.psi(t2).unwrap();
        prop_assert!(mid <= chord + 1e-12 * (1.0 + chord.abs()));
    }

    #[test]
    fn phi_inverts_psi(m in model_strategy(), q in 0.0f64..10.0, dt in 0.0f64..10.0) {
        let th = m.phi_inverse(q).unwrap();
        prop_assert!(rel(m.psi(th).unwrap(), q) <= 1e-10 || (q == 0.0 && m.psi(th).unwrap().abs() < 1e-12));
        let theta = m.phi_inverse(0.0).unwrap() + dt;
        let back = m.phi_inverse(m.psi(theta).unwrap()).unwrap();
        prop_assert!(rel(back, theta) <= 1e-10 || (back - theta).abs() < 1e-12);
    }

    #[test]
    fn brownian_phi0_closed_form(c in 0.01f64..0.99) {
        let m = LevyModel::brownian(c);
        prop_assert!((m.phi_inverse(0.0).unwrap() - 2.0 * (1.0 - c)).abs() <= 1e-12);
        prop_assert!((m.phi_inverse_numeric(0.0).unwrap() - 2.0 * (1.0 - c)).abs() <= 1e-12);
    }

    #[test]
    fn erfc_reflection(x in -30.0f64..30.0) {
        prop_assert!((erfc(x) + erfc(-x) - 2.0).abs() <= 1e-14);
    }

    #[test]
    fn erfcx_matches_erfc(x in -5.0f64..25.0) {
        let v = erfcx(x).unwrap() * (-x * x).exp();
        prop_assert!(rel(v, erfc(x)) <= 1e-13);
    }

    #[test]
    fn mittag_leffler_unit_order_is_exp(z in 0.0f64..20.0) {
        prop_assert!(rel(mittag_leffler(1.0, 1.0, z).unwrap(), z.exp()) <= 1e-10);
    }

    #[test]
    fn integrate_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, k in 0.5f64..4.0) {
        let spec = QuadratureSpec::default();
        let f = |x: f64| (k * x).sin();
        let g = |x: f64| (-x).exp() * x * x;
        let lhs = integrate(|x| a * f(x) + b * g(x), 0.0, 2.0, &spec).unwrap();
        let rhs = a * integrate(f, 0.0, 2.0, &spec).unwrap() + b * integrate(g, 0.0, 2.0, &spec).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn scale_function_is_monotone(m in model_strategy(), mut xs in prop::collection::vec(0.0f64..6.0, 2..12), q in prop::sample::select(vec![0.0, 0.3])) {
        xs.sort_by(f64::total_cmp);
        let w = ScaleFunction::new(&m, q).unwrap();
        let vals: Vec<f64> = xs.iter().map(|&x| w.eval(x).unwrap()).collect();
        for k in 1..vals.len() {
            prop_assert!(vals[k] >= vals[k - 1] * (1.0 - 1e-12));
        }
    }

    #[test]
    fn triple_law_monotone(c in 0.1f64..0.9, a in 0.0f64..2.0, b in 0.0f64..2.0, x in 0.05f64..4.0, d in 0.01f64..1.0) {
        let laws = ExcursionLaws::new(&LevyModel::brownian(c)).unwrap();
        let base = laws.triple_law(a, b, x).unwrap();
        let tol = 1e-10;
        prop_assert!(laws.triple_law(a, b, x + d).unwrap() >= base - tol);
        prop_assert!(laws.triple_law(a + d, b, x).unwrap() <= base + tol);
        prop_assert!(laws.triple_law(a, b + d, x).unwrap() <= base + tol);
    }

    #[test]
    fn qstar_cdf_rearrangement(m in model_strategy(), x in 0.0f64..8.0) {
        let laws = ExcursionLaws::new(&m).unwrap();
        let w = laws.scale_function(0.0).unwrap().eval(x).unwrap();
        let dw = m.drift() * w;
        let f = laws.qstar_cdf(x).unwrap();
        prop_assert!((f * dw - (dw - 1.0)).abs() <= 1e-12 * dw);
        prop_assert_eq!(laws.triple_law(0.0, 0.0, x).unwrap(), f);
    }

    #[test]
    fn one_argument_specialisations(c in 0.05f64..0.95, theta in 0.0f64..5.0) {
        let laws = ExcursionLaws::new(&LevyModel::brownian(c)).unwrap();
        let busy = laws.busy_endpoints_transform(theta, theta).unwrap();
        prop_assert!(rel(busy, brownian::busy_length_transform(theta, c)) <= 1e-8);
        let idle = laws.idle_endpoints_transform(theta, theta).unwrap();
        prop_assert!(rel(idle, brownian::idle_length_transform(theta, c)) <= 1e-8);
    }

    #[test]
    fn csv_round_trip(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(parse_f64(&fmt_f64(v)).unwrap().to_bits(), v.to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn inversion_reproduces_closed_form(x in 0.1f64..5.0, alpha in prop::sample::select(vec![0.0, 0.1, 1.0])) {
        let m = LevyModel::brownian(0.5);
        let numeric = ScaleFunction::with_engine(&m, alpha, Engine::NumericInversion).unwrap().eval(x).unwrap();
        prop_assert!(rel(numeric, w_brownian(x, alpha, 0.5).unwrap()) <= 1e-5);
    }

    #[test]
    fn traced_cycle_maximum(seed in any::<u64>(), k in 0usize..50, level in 0.01f64..2.0) {
        let cfg = SimConfig::new(LevyModel::brownian(0.5), 50, seed).with_epsilon(1e-3).with_workers(1);
        let stats = simulate_cycles(&cfg).unwrap();
        let (cycle, path) = trace_cycle(&cfg, k).unwrap().unwrap();
        prop_assert_eq!(cycle, stats.samples[k]);
        let peak = path.iter().fold(0.0_f64, |m, e| m.max(e.pre));
        prop_assert_eq!(peak, cycle.q_star);
        // Q* < x exactly when no pre-jump level reached x
        prop_assert_eq!(cycle.q_star < level, path.iter().all(|e| e.pre < level));
        // only the last jump ends below zero
        prop_assert!(path[..path.len() - 1].iter().all(|e| e.post >= 0.0));
        let last = path.last().unwrap();
        prop_assert_eq!(last.t, cycle.b);
        prop_assert_eq!(-last.post, cycle.i);
    }
}

#[test]
fn series_identity_for_small_alpha() {
    let c = 0.5;
    let m = LevyModel::brownian(c);
    let w = ScaleFunction::new(&m, 0.0).unwrap();
    let powers = ConvolutionPowers::new(&w, 2.0, 9, 200).unwrap();
    for alpha in [0.1, 0.3, 0.5] {
        for x in [0.5, 1.0, 2.0] {
            let series = powers.series(alpha, x, 8).unwrap();
            let exact = w_brownian(x, alpha, c).unwrap();
            assert!(rel(series, exact) <= 1e-4, "alpha {alpha} x {x}: {series} vs {exact}");
        }
    }
}

#[test]
fn unit_drift_limit_is_continuous() {
    for x in [0.1, 1.0, 3.0] {
        let near = ln_w_brownian(x, 0.0, 1.0 - 1e-4).unwrap().exp();
        let at = ln_w_brownian(x, 0.0, 1.0).unwrap().exp();
        assert!(rel(near, at) <= 1e-3);
    }
}

#[test]
fn triple_law_tends_to_joint_transform() {
    let laws = ExcursionLaws::new(&LevyModel::brownian(0.5)).unwrap();
    for (a, b) in [(0.2, 0.1), (1.0, 0.0), (0.0, 0.7)] {
        let far = laws.triple_law(a, b, 40.0).unwrap();
        assert!(rel(far, laws.joint_bi_transform(a, b).unwrap()) <= 1e-4);
        assert_eq!(laws.triple_law(a, b, f64::INFINITY).unwrap(), laws.joint_bi_transform(a, b).unwrap());
    }
}

#[test]
fn means_are_transform_slopes() {
    for m in [LevyModel::brownian(0.5), LevyModel::brownian(0.2), LevyModel::tempered_stable(1.0, 2.0, 0.5)] {
        let laws = ExcursionLaws::new(&m).unwrap();
        let h = 1e-6;
        let db = (1.0 - laws.joint_bi_transform(h, 0.0).unwrap()) / h;
        assert!(rel(db, laws.busy_mean()) <= 1e-4, "{db} vs {}", laws.busy_mean());
        let di = (1.0 - laws.joint_bi_transform(0.0, h).unwrap()) / h;
        assert!(rel(di, laws.idle_mean()) <= 1e-4, "{di} vs {}", laws.idle_mean());
    }
}

#[test]
fn brownian_tail_constant() {
    let laws = ExcursionLaws::new(&LevyModel::brownian(0.5)).unwrap();
    let ratio = (laws.phi0() * 20.0).exp() * (1.0 - laws.qstar_cdf(20.0).unwrap());
    assert!(rel(ratio, 1.0 / 3.0) <= 1e-3);
}

#[test]
fn same_seed_same_stats() {
    let cfg = SimConfig::new(LevyModel::tempered_stable(1.0, 2.0, 0.5), 3000, 77).with_epsilon(1e-4).with_workers(2);
    assert_eq!(simulate_cycles(&cfg).unwrap(), simulate_cycles(&cfg).unwrap());
    let other = simulate_cycles(&cfg.clone().with_workers(5)).unwrap();
    assert_eq!(simulate_cycles(&cfg).unwrap().samples, other.samples);
}

#[test]
fn halving_epsilon_moves_mean_within_noise() {
    let run = |eps: f64, seed: u64| {
        let cfg = SimConfig::new(LevyModel::brownian(0.5), 100_000, seed).with_epsilon(eps);
        simulate_cycles(&cfg).unwrap().mean_b().unwrap()
    };
    let coarse = run(1e-6, 101);
    let fine = run(5e-7, 202);
    let diff = (coarse.value - fine.value).abs();
    assert!(diff < coarse.std_error + fine.std_error, "{coarse:?} vs {fine:?}");
}
