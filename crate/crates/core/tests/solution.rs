use serde_json::json;
use steinlab::regularity::{log_factor_fit, probe_modulus, PairPlan};
use steinlab::rng::polar_normal;
use steinlab::{builtin, opnorm, ExpectationSpec, MultiIndex, SteinConfig, SteinSolution, Stream};

fn points(d: usize, count: usize, id: u64) -> Vec<Vec<f64>> {
    let mut rng = Stream::new(11, id).rng();
    (0..count).map(|_| (0..d).map(|_| polar_normal(&mut rng)).collect()).collect()
}

fn solution(id: &str, d: usize, params: serde_json::Value) -> SteinSolution {
    SteinSolution::with_defaults(builtin(id, d, &params).unwrap()).unwrap()
}

#[test]
fn gradient_and_hessian_match_finite_differences() {
    let step = 1e-3;
    for d in 1..=3 {
        let s = solution("cosine", d, json!(null));
        for x in points(d, 20, d as u64) {
            let grad = s.eval_gradient(&x).unwrap().value;
            let hess = s.eval_hessian(&x).unwrap().value;
            for i in 0..d {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += step;
                xm[i] -= step;
                let fd = (s.eval_f(&xp).unwrap().value - s.eval_f(&xm).unwrap().value) / (2.0 * step);
                let gp = s.eval_gradient(&xp).unwrap().value;
                let gm = s.eval_gradient(&xm).unwrap().value;
                let scale = grad.iter().fold(1e-2_f64, |m, v| m.max(v.abs()));
                assert!((fd - grad[i]).abs() < 1e-3 * scale, "d={d} x={x:?} i={i}: {fd} vs {}", grad[i]);
                let hscale = hess.iter().fold(1e-2_f64, |m, v| m.max(v.abs()));
                for j in 0..d {
                    let fdh = (gp[j] - gm[j]) / (2.0 * step);
                    assert!(
                        (fdh - hess[i * d + j]).abs() < 1e-3 * hscale,
                        "d={d} x={x:?} ({i},{j}): {fdh} vs {}",
                        hess[i * d + j]
                    );
                }
            }
        }
    }
}

/// Composite Simpson on [a, b] with n (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn univariate_gradient_solves_first_order_equation() {
    // g = f′ solves g′ − x g = h − E h, so g(x) = e^{x²/2} ∫_{−∞}^x (h(t) − E h) e^{−t²/2} dt.
    let s = solution("cosine", 1, json!({"a": [1.0]}));
    let mean = (-0.5f64).exp();
    for x in [-2.5, -1.0, -0.3, 0.0, 0.7, 1.9] {
        let integral = simpson(|t| (t.cos() - mean) * (-0.5 * t * t).exp(), -14.0, x, 40_000);
        let oracle = (0.5 * x * x).exp() * integral;
        let got = s.eval_gradient(&[x]).unwrap().value[0];
        assert!((got - oracle).abs() < 1e-6, "x={x}: {got} vs {oracle}");
    }
}

#[test]
fn derivatives_bounded_by_scaled_target_derivatives() {
    for d in 1..=2 {
        let s = solution("cosine", d, json!(null));
        let h = s.h().clone();
        let indices: Vec<MultiIndex> = (0..d)
            .flat_map(|i| (i..d).map(move |j| (i, j)))
            .map(|(i, j)| MultiIndex::pair(d, i, j))
            .chain((0..d).map(|i| MultiIndex::unit(d, i)))
            .collect();
        for x in points(d, 50, 40 + d as u64) {
            for idx in &indices {
                let v = s.eval_derivative(idx, &x).unwrap();
                let bound = h.partial_sup(idx).unwrap() / idx.order() as f64;
                assert!(v.value.abs() <= bound + 1e-9 + v.error, "{idx:?} at {x:?}: {} > {bound}", v.value);
            }
        }
    }
}

#[test]
fn hessian_hilbert_schmidt_bounded_by_lipschitz_constant() {
    for (id, d, params) in [
        ("cosine", 2, json!(null)),
        ("cosine", 3, json!({"a": [0.2, -0.5, 0.8]})),
        ("linear", 2, json!({"a": [0.6, 0.8]})),
    ] {
        let s = solution(id, d, params);
        let lip = s.h().lipschitz_sup().unwrap();
        for x in points(d, 50, 60 + d as u64) {
            let hess = s.eval_hessian(&x).unwrap();
            let hs = hess.value.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(hs <= lip + 1e-9 + hess.error, "{id} d={d} at {x:?}: {hs} > {lip}");
            assert!(opnorm(&hess.value, d).unwrap() <= hs + 1e-12);
        }
    }
}

#[test]
fn residual_shrinks_under_refinement() {
    for d in 1..=2 {
        let h = builtin("cosine", d, &json!(null)).unwrap();
        let mut coarse = SteinConfig::default_for(&h);
        coarse.t_step = 0.5;
        coarse.t_extent = 3.0;
        let fine = coarse.refined();
        let a = SteinSolution::new(h.clone(), coarse).unwrap();
        let b = SteinSolution::new(h, fine).unwrap();
        let worst = |s: &SteinSolution| {
            points(d, 10, 80 + d as u64)
                .iter()
                .map(|x| s.residual(x).unwrap().value.abs())
                .fold(0.0, f64::max)
        };
        let (ra, rb) = (worst(&a), worst(&b));
        assert!(rb <= ra / 2.0, "d={d}: coarse {ra:e}, refined {rb:e}");
    }
}

#[test]
fn closed_form_builtins_have_small_residual() {
    for (id, d) in [("constant", 2), ("linear", 3), ("quadratic", 2)] {
        let s = solution(id, d, json!(null));
        for x in points(d, 10, 90) {
            let (f, grad, _) = s.h().closed_form_solution(&x).unwrap();
            assert!((s.eval_f(&x).unwrap().value - f).abs() < 1e-8);
            let g = s.eval_gradient(&x).unwrap().value;
            assert!(g.iter().zip(&grad).all(|(a, b)| (a - b).abs() < 1e-8));
            assert!(s.residual(&x).unwrap().value.abs() < 1e-8);
        }
    }
}

#[test]
fn max_min_cross_partial_needs_log_factor() {
    let h = builtin("raic", 2, &json!(null)).unwrap();
    let mut config = SteinConfig::default_for(&h);
    config.expectation = ExpectationSpec::adaptive(2, 1e-9);
    let s = SteinSolution::new(h, config).unwrap();
    let plan = PairPlan {
        random_pairs: 0,
        diagonal_pairs: 12,
        min_dist: 1e-4,
        max_dist: 0.1 * 2f64.sqrt(),
        ..PairPlan::default()
    };
    let samples = probe_modulus(&s, &plan, Stream::new(3, 0)).unwrap();
    let us: Vec<f64> = samples.iter().map(|m| m.x[0]).collect();
    let moduli: Vec<f64> = samples.iter().map(|m| m.cross_diff).collect();
    let fit = log_factor_fit(&us, &moduli).unwrap();
    assert!(fit.t_stat_b.abs() > 5.0, "{fit:?}");
    assert!(samples.iter().all(|m| !m.violated()));
}
