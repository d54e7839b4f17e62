//! One-dimensional quadrature building blocks.
//!
//! * Gauss–Hermite rules for the standard normal weight (probabilists'
//!   convention, weights summing to one).
//! * Globally adaptive Gauss–Kronrod (7/15) integration of scalar and
//!   vector-valued integrands.
//! * A double-exponential (tanh-sinh) rule on (0, 1) that stores `t` and
//!   `1 - t` separately, so integrands singular at either endpoint can be
//!   evaluated without cancellation.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Nodes and probability weights of an n-point Gauss–Hermite rule for N(0, 1).
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Computes the rule by Newton iteration on the orthonormal recurrence.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("Gauss-Hermite rule needs at least one node".into()));
        }
        let pim4 = std::f64::consts::PI.powf(-0.25);
        let nf = n as f64;
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let m = (n + 1) / 2;
        let mut z = 0.0f64;
        for i in 0..m {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            };
            let mut pp = 0.0;
            let mut converged = false;
            for _ in 0..100 {
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::Quadrature(format!("Gauss-Hermite root {i} of {n}")));
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        // Physicists' rule -> standard normal weight.
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let nodes: Vec<f64> = x.iter().rev().map(|v| v * std::f64::consts::SQRT_2).collect();
        let weights: Vec<f64> = w.iter().rev().map(|v| v / sqrt_pi).collect();
        Ok(Self { nodes, weights })
    }

    /// Shared, lazily built rule.
    pub fn cached(n: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussHermite>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("Gauss-Hermite cache poisoned");
        if let Some(rule) = guard.get(&n) {
            return Ok(Arc::clone(rule));
        }
        let rule = Arc::new(Self::new(n)?);
        guard.insert(n, Arc::clone(&rule));
        Ok(rule)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances for [`adaptive_vec`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_intervals: 2000,
        }
    }
}

/// Result of an adaptive integration of a vector-valued integrand.
#[derive(Debug, Clone, PartialEq)]
pub struct VecEstimate {
    pub values: Vec<f64>,
    /// Error bound shared by all components (max-norm), including errors
    /// propagated from the integrand.
    pub error: f64,
    /// max_k ∫|f_k|, the scale the relative tolerance refers to.
    pub scale: f64,
    pub converged: bool,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    values: Vec<f64>,
    /// Gauss–Kronrod discrepancy on this panel.
    error: f64,
    /// Error propagated from the integrand's own evaluations.
    inner_error: f64,
    resabs: f64,
}

fn gk15<F>(f: &mut F, a: f64, b: f64, nout: usize, buf: &mut [f64]) -> Panel
where
    F: FnMut(f64, &mut [f64]) -> f64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kron = vec![0.0; nout];
    let mut gauss = vec![0.0; nout];
    let mut abs = vec![0.0; nout];
    let mut inner_err = 0.0;
    for j in 0..15 {
        // j = 7 is the center node; j < 7 on the left, j > 7 on the right.
        let (k, sign) = if j < 7 { (j, -1.0) } else if j == 7 { (7, 0.0) } else { (14 - j, 1.0) };
        let x = center + sign * half * XGK[k];
        let e = f(x, buf);
        let wk = WGK[k];
        inner_err += wk * e;
        let gauss_weight = if k % 2 == 1 { Some(WG[k / 2]) } else { None };
        for i in 0..nout {
            kron[i] += wk * buf[i];
            abs[i] += wk * buf[i].abs();
            if let Some(wg) = gauss_weight {
                gauss[i] += wg * buf[i];
            }
        }
    }
    let scale = half.abs();
    let mut err: f64 = 0.0;
    let mut resabs: f64 = 0.0;
    for i in 0..nout {
        kron[i] *= half;
        err = err.max((kron[i] - gauss[i] * half).abs());
        resabs = resabs.max(abs[i] * scale);
    }
    Panel {
        a,
        b,
        values: kron,
        error: err,
        inner_error: inner_err * scale,
        resabs,
    }
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]` split
/// initially at `breaks` (sorted, strictly inside the interval).
///
/// The integrand writes `nout` values into its buffer and returns an absolute
/// error bound for them (zero for exact evaluations), which lets nested
/// integrals propagate their own errors. Propagated errors are added to the
/// reported bound but do not drive refinement, since splitting panels cannot
/// reduce them.
///
/// Derivative jumps must be passed in `breaks`: a kink lying between a
/// panel end and the outermost Kronrod node is invisible to the estimate.
pub fn adaptive_vec<F>(
    mut f: F,
    nout: usize,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: AdaptiveOptions,
) -> VecEstimate
where
    F: FnMut(f64, &mut [f64]) -> f64,
{
    let mut buf = vec![0.0; nout];
    let mut edges = Vec::with_capacity(breaks.len() + 2);
    edges.push(a);
    edges.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    edges.push(b);
    let mut panels: Vec<Panel> = edges
        .windows(2)
        .map(|w| gk15(&mut f, w[0], w[1], nout, &mut buf))
        .collect();
    let mut evaluations = 15 * panels.len();
    let mut converged = false;
    loop {
        let total_err: f64 = panels.iter().map(|p| p.error).sum();
        let total_abs: f64 = panels.iter().map(|p| p.resabs).sum();
        if total_err <= opts.abs_tol.max(opts.rel_tol * total_abs) {
            converged = true;
            break;
        }
        if panels.len() >= opts.max_intervals {
            break;
        }
        // Worst splittable panel, ties to the lowest index.
        let mut worst: Option<usize> = None;
        for (i, p) in panels.iter().enumerate() {
            let mid = 0.5 * (p.a + p.b);
            if !(mid > p.a && mid < p.b) {
                continue;
            }
            match worst {
                Some(w) if panels[w].error >= p.error => {}
                _ => worst = Some(i),
            }
        }
        let Some(w) = worst else { break };
        let p = panels.swap_remove(w);
        let mid = 0.5 * (p.a + p.b);
        let left = gk15(&mut f, p.a, mid, nout, &mut buf);
        let right = gk15(&mut f, mid, p.b, nout, &mut buf);
        evaluations += 30;
        panels.push(left);
        panels.push(right);
    }
    // Sum in left-to-right order so the result does not depend on the
    // refinement history.
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut values = vec![0.0; nout];
    let mut error = 0.0;
    let mut scale = 0.0;
    for p in &panels {
        for (v, pv) in values.iter_mut().zip(&p.values) {
            *v += pv;
        }
        error += p.error + p.inner_error;
        scale += p.resabs;
    }
    VecEstimate {
        values,
        error,
        scale,
        converged,
        evaluations,
    }
}

/// Scalar convenience wrapper around [`adaptive_vec`].
pub fn adaptive<F>(mut f: F, a: f64, b: f64, opts: AdaptiveOptions) -> VecEstimate
where
    F: FnMut(f64) -> f64,
{
    adaptive_vec(
        |x, out| {
            out[0] = f(x);
            0.0
        },
        1,
        a,
        b,
        &[],
        opts,
    )
}

/// One node of the double-exponential rule on (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeNode {
    pub t: f64,
    /// 1 - t, computed without cancellation.
    pub t_comp: f64,
    pub weight: f64,
    /// Node also belongs to the rule with twice the step.
    pub coarse: bool,
}

/// Tanh-sinh rule t = (1 + tanh(π/2 · sinh v)) / 2 sampled at v = k·step,
/// |v| ≤ extent.
#[derive(Debug, Clone, PartialEq)]
pub struct TanhSinh {
    pub step: f64,
    pub extent: f64,
    pub nodes: Vec<DeNode>,
}

impl TanhSinh {
    pub fn new(step: f64, extent: f64) -> Result<Self> {
        if !(step > 0.0 && step <= 1.0) {
            return Err(Error::Config(format!("tanh-sinh step must lie in (0, 1], got {step}")));
        }
        if !(extent >= 1.0 && extent <= 7.0) {
            return Err(Error::Config(format!("tanh-sinh extent must lie in [1, 7], got {extent}")));
        }
        let kmax = (extent / step).floor() as i64;
        let kmax_even = kmax - kmax.rem_euclid(2);
        let mut nodes = Vec::with_capacity((2 * kmax + 1) as usize);
        let half_pi = std::f64::consts::FRAC_PI_2;
        for k in -kmax..=kmax {
            let v = k as f64 * step;
            let u = half_pi * v.sinh();
            // t = 1/(1 + e^{-2u}), 1 - t = 1/(1 + e^{2u}).
            let t = 1.0 / (1.0 + (-2.0 * u).exp());
            let t_comp = 1.0 / (1.0 + (2.0 * u).exp());
            let weight = step * 2.0 * half_pi * v.cosh() * t * t_comp;
            if weight == 0.0 || t == 0.0 || t_comp == 0.0 {
                continue;
            }
            nodes.push(DeNode {
                t,
                t_comp,
                weight,
                coarse: k % 2 == 0 && k.abs() <= kmax_even,
            });
        }
        Ok(Self { step, extent, nodes })
    }

    /// Integrates values already sampled at `self.nodes`, returning the fine
    /// estimate and the estimate from the coarse sub-rule.
    pub fn combine(&self, samples: &[f64]) -> (f64, f64) {
        let mut fine = 0.0;
        let mut coarse = 0.0;
        for (node, s) in self.nodes.iter().zip(samples) {
            fine += node.weight * s;
            if node.coarse {
                coarse += 2.0 * node.weight * s;
            }
        }
        (fine, coarse)
    }

    pub fn integrate<F: FnMut(f64, f64) -> f64>(&self, mut f: F) -> (f64, f64) {
        let samples: Vec<f64> = self.nodes.iter().map(|n| f(n.t, n.t_comp)).collect();
        self.combine(&samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_hermite_moments() {
        for &n in &[1usize, 2, 5, 16, 64, 100] {
            let rule = GaussHermite::new(n).unwrap();
            let total: f64 = rule.weights.iter().sum();
            assert!((total - 1.0).abs() < 1e-13, "n={n}");
            // E Z^{2k} = (2k-1)!! exact for 2k <= 2n-1.
            let mut double_fact = 1.0;
            for k in 1..=n.min(12) {
                if 2 * k > 2 * n - 1 {
                    break;
                }
                double_fact *= (2 * k - 1) as f64;
                let m: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| w * x.powi(2 * k as i32))
                    .sum();
                assert!((m - double_fact).abs() < 1e-10 * double_fact, "n={n} k={k}: {m}");
            }
        }
    }

    #[test]
    fn gauss_hermite_nodes_sorted_and_symmetric() {
        let rule = GaussHermite::new(64).unwrap();
        for w in rule.nodes.windows(2) {
            assert!(w[0] < w[1]);
        }
        for i in 0..32 {
            assert!((rule.nodes[i] + rule.nodes[63 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn adaptive_handles_kinks_and_singularities() {
        let opts = AdaptiveOptions::default();
        let r = adaptive(|x: f64| (x - 0.3).abs(), -1.0, 1.0, opts);
        assert!(r.converged);
        assert!((r.values[0] - (1.3f64.powi(2) + 0.7f64.powi(2)) / 2.0).abs() < 1e-10);
        let r = adaptive(|x: f64| x.sqrt(), 0.0, 1.0, opts);
        assert!((r.values[0] - 2.0 / 3.0).abs() < 1e-9);
        let r = adaptive(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, opts);
        assert!((r.values[0] - 2.0).abs() < 1e-8, "{:?}", r);
    }

    #[test]
    fn adaptive_vector_components_share_panels() {
        let r = adaptive_vec(
            |x, out| {
                out[0] = x.sin();
                out[1] = x.exp();
                0.0
            },
            2,
            0.0,
            std::f64::consts::PI,
            &[1.0],
            AdaptiveOptions::default(),
        );
        assert!((r.values[0] - 2.0).abs() < 1e-12);
        assert!((r.values[1] - (std::f64::consts::PI.exp() - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn tanh_sinh_endpoint_singularities() {
        let rule = TanhSinh::new(1.0 / 16.0, 4.5).unwrap();
        // ∫ t^{-3/4} (1-t)^{-1/2} dt = B(1/4, 1/2)
        let exact = crate::special::gamma(0.25).unwrap() * crate::special::gamma(0.5).unwrap()
            / crate::special::gamma(0.75).unwrap();
        let (fine, coarse) = rule.integrate(|t, tc| t.powf(-0.75) * tc.powf(-0.5));
        assert!((fine - exact).abs() < 1e-9 * exact, "{fine} vs {exact}");
        assert!((coarse - exact).abs() < 1e-4 * exact);
        let (fine, _) = rule.integrate(|t, _| t.ln());
        assert!((fine + 1.0).abs() < 1e-12);
    }

    #[test]
    fn tanh_sinh_rejects_bad_parameters() {
        assert!(TanhSinh::new(0.0, 4.0).is_err());
        assert!(TanhSinh::new(0.1, 0.5).is_err());
    }
}
