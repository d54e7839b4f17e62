use proptest::prelude::*;
use serde_json::json;
use steinlab::special::hermite_he;
use steinlab::transport::w1_dual_lower_bound;
use steinlab::{
    berry_esseen_bound, builtin, c1, check_holder, gaussian_norm_moment, opnorm, w1_exact, BoundKind,
    EmpiricalSample, Estimate, Stream, TestFunction,
};

fn sample(m: usize, d: usize) -> impl Strategy<Value = EmpiricalSample> {
    prop::collection::vec(-5.0..5.0f64, m * d).prop_map(move |v| EmpiricalSample::new(v, d).unwrap())
}

fn triple() -> impl Strategy<Value = (EmpiricalSample, EmpiricalSample, EmpiricalSample)> {
    (1usize..=3, 1usize..=64).prop_flat_map(|(d, m)| (sample(m, d), sample(m, d), sample(m, d)))
}

fn symmetric(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, d * d).prop_map(move |mut a| {
        for i in 0..d {
            for j in 0..i {
                a[i * d + j] = a[j * d + i];
            }
        }
        a
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hermite_three_term_recurrence(n in 1usize..12, x in -6.0..6.0f64) {
        let lhs = hermite_he(n + 1, x);
        let rhs = x * hermite_he(n, x) - n as f64 * hermite_he(n - 1, x);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn opnorm_is_homogeneous_and_bounded((d, a) in (1usize..=4).prop_flat_map(|d| (Just(d), symmetric(d))), c in -5.0..5.0f64) {
        let n = opnorm(&a, d).unwrap();
        let scaled: Vec<f64> = a.iter().map(|v| c * v).collect();
        prop_assert!((opnorm(&scaled, d).unwrap() - c.abs() * n).abs() <= 1e-9 * (1.0 + n));
        let frob = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        let max_entry = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(n <= frob + 1e-9);
        prop_assert!(n >= max_entry - 1e-9);
    }

    #[test]
    fn transport_is_a_metric((a, b, c) in triple()) {
        let ab = w1_exact(&a, &b).unwrap();
        let ba = w1_exact(&b, &a).unwrap();
        let bc = w1_exact(&b, &c).unwrap();
        let ac = w1_exact(&a, &c).unwrap();
        prop_assert!((ab - ba).abs() < 1e-9);
        prop_assert!(ac <= ab + bc + 1e-9);
        prop_assert!(w1_exact(&a, &a).unwrap() == 0.0);
    }

    #[test]
    fn transport_is_translation_invariant(((a, b), v) in (1usize..=3, 1usize..=32).prop_flat_map(|(d, m)| {
        ((sample(m, d), sample(m, d)), prop::collection::vec(-3.0..3.0f64, d))
    })) {
        let moved = w1_exact(&a.translated(&v).unwrap(), &b.translated(&v).unwrap()).unwrap();
        prop_assert!((moved - w1_exact(&a, &b).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_witness_is_dual_lower_bound(
        (a, b) in (1usize..=3, 1usize..=32).prop_flat_map(|(d, m)| (sample(m, d), sample(m, d))),
        seed in any::<u64>(),
    ) {
        let d = a.d();
        let mut rng = Stream::new(seed, 0).rng();
        let dir: Vec<f64> = (0..d).map(|_| steinlab::rng::polar_normal(&mut rng)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        let unit: Vec<f64> = dir.iter().map(|v| v / norm).collect();
        for witness in [
            builtin("linear", d, &json!({"a": unit})).unwrap(),
            builtin("cosine", d, &json!({"a": unit})).unwrap(),
            builtin("radial_holder", d, &json!({"alpha": 1.0})).unwrap(),
        ] {
            let lower = w1_dual_lower_bound(&a, &b, &witness).unwrap();
            prop_assert!(lower <= w1_exact(&a, &b).unwrap() + 1e-9, "{}", witness.id());
        }
    }

    #[test]
    fn second_bound_decreasing_in_n(d in 1usize..=6, alpha in 0.1..=1.0f64, frac in 0.05..0.95f64, n in 1u64..10_000) {
        let delta = frac * alpha;
        let moment = |p: f64| Ok(Estimate::exact(1.0 + p));
        let a = berry_esseen_bound(BoundKind::ThmMain2, alpha, delta, d, n, moment).unwrap();
        let b = berry_esseen_bound(BoundKind::ThmMain2, alpha, delta, d, n + 1, moment).unwrap();
        prop_assert!(b.bound_value < a.bound_value);
    }

    #[test]
    fn norm_moment_increasing_in_dimension(beta in 1.0..4.0f64, d in 1usize..40) {
        prop_assert!(gaussian_norm_moment(beta, d + 1).unwrap() > gaussian_norm_moment(beta, d).unwrap());
    }

    #[test]
    fn c1_is_scaled_centered_moment(alpha in 0.05..=1.0f64, d in 1usize..=20) {
        // c1 = (2/α)(1/d) E[(|Z|² + d)|Z|^α], expanded through norm moments.
        let df = d as f64;
        let centered = (gaussian_norm_moment(alpha + 2.0, d).unwrap() + df * gaussian_norm_moment(alpha, d).unwrap()) / df;
        let c = c1(alpha, d).unwrap();
        prop_assert!((c - 2.0 / alpha * centered).abs() <= 1e-10 * c);
    }

    #[test]
    fn declared_holder_seminorm_is_an_upper_bound(d in 1usize..=3, alpha in 0.1..=1.0f64, seed in any::<u64>()) {
        let funcs: Vec<TestFunction> = vec![
            builtin("radial_holder", d, &json!({"alpha": alpha})).unwrap(),
            builtin("cosine", d, &json!(null)).unwrap(),
            builtin("linear", d, &json!(null)).unwrap(),
        ];
        for h in funcs {
            let observed = check_holder(&h, 200, 3.0, Stream::new(seed, 1)).unwrap();
            prop_assert!(observed <= h.holder_seminorm() * (1.0 + 1e-9), "{}: {observed}", h.id());
        }
    }
}
