//! Expectations under the standard Gaussian N(0, I_d).
//!
//! Four integration back-ends share one interface:
//!
//! | method              | dims  | error report                         |
//! |---------------------|-------|--------------------------------------|
//! | tensor Gauss–Hermite| ≤ 3   | zero (deterministic rule)            |
//! | adaptive Kronrod    | ≤ 3   | a-posteriori quadrature bound        |
//! | randomized Sobol    | ≤ 10  | std error across digital shifts      |
//! | Monte Carlo         | any   | sample std error                     |
//!
//! The adaptive back-end integrates coordinate by coordinate with nested
//! Gauss–Kronrod panels on [-10, 10]; it is the one to use for integrands with
//! kinks or cusps, where fixed Gauss–Hermite rules stall at ~1e-3 accuracy.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{config, domain, Result};
use crate::quadrature::{adaptive_vec, AdaptiveOptions, GaussHermite};
use crate::rng::{polar_normal, Stream};
use crate::special::gamma_ratio;
use crate::transport::EmpiricalSample;

const TRUNCATION: f64 = 10.0;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const MAX_TENSOR_DIM: usize = 3;
const MAX_QMC_DIM: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectationMethod {
    TensorQuadrature,
    Adaptive,
    RandomizedQmc,
    MonteCarlo,
}

/// How to evaluate E[g(Z)].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationSpec {
    pub dim: usize,
    pub method: ExpectationMethod,
    pub nodes_per_axis: usize,
    pub sample_count: usize,
    pub randomizations: usize,
    pub seed: u64,
    /// Relative tolerance of the adaptive back-end.
    pub rel_tol: f64,
}

impl ExpectationSpec {
    /// Tensor Gauss–Hermite up to d = 3 (64 nodes per axis, 32 for d = 3),
    /// randomized QMC up to d = 10, Monte Carlo beyond.
    pub fn default_for(dim: usize) -> Self {
        let method = if dim <= MAX_TENSOR_DIM {
            ExpectationMethod::TensorQuadrature
        } else if dim <= MAX_QMC_DIM {
            ExpectationMethod::RandomizedQmc
        } else {
            ExpectationMethod::MonteCarlo
        };
        Self {
            dim,
            method,
            nodes_per_axis: if dim <= 2 { 64 } else { 32 },
            sample_count: 1 << 14,
            randomizations: 8,
            seed: 0x5eed,
            rel_tol: 1e-10,
        }
    }

    pub fn tensor(dim: usize, nodes_per_axis: usize) -> Self {
        Self {
            method: ExpectationMethod::TensorQuadrature,
            nodes_per_axis,
            ..Self::default_for(dim)
        }
    }

    pub fn adaptive(dim: usize, rel_tol: f64) -> Self {
        Self {
            method: ExpectationMethod::Adaptive,
            rel_tol,
            ..Self::default_for(dim)
        }
    }

    pub fn qmc(dim: usize, sample_count: usize, randomizations: usize, seed: u64) -> Self {
        Self {
            method: ExpectationMethod::RandomizedQmc,
            sample_count,
            randomizations,
            seed,
            ..Self::default_for(dim)
        }
    }

    pub fn monte_carlo(dim: usize, sample_count: usize, seed: u64) -> Self {
        Self {
            method: ExpectationMethod::MonteCarlo,
            sample_count,
            seed,
            ..Self::default_for(dim)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(config("expectation dimension must be positive"));
        }
        match self.method {
            ExpectationMethod::TensorQuadrature => {
                if self.dim > MAX_TENSOR_DIM {
                    return Err(config(format!(
                        "tensor quadrature is limited to d <= {MAX_TENSOR_DIM}, got d = {}",
                        self.dim
                    )));
                }
                if self.nodes_per_axis == 0 || self.nodes_per_axis > 200 {
                    return Err(config("nodes_per_axis must lie in 1..=200"));
                }
            }
            ExpectationMethod::Adaptive => {
                if self.dim > MAX_TENSOR_DIM {
                    return Err(config(format!(
                        "adaptive quadrature is limited to d <= {MAX_TENSOR_DIM}, got d = {}",
                        self.dim
                    )));
                }
                if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
                    return Err(config("rel_tol must lie in (0, 1)"));
                }
            }
            ExpectationMethod::RandomizedQmc => {
                if self.dim > MAX_QMC_DIM {
                    return Err(config(format!(
                        "randomized QMC is limited to d <= {MAX_QMC_DIM}, got d = {}",
                        self.dim
                    )));
                }
                if !self.sample_count.is_power_of_two() || self.sample_count > 1 << 30 {
                    return Err(config("QMC sample_count must be a power of two (at most 2^30)"));
                }
                if self.randomizations < 2 {
                    return Err(config("QMC needs at least two randomizations"));
                }
            }
            ExpectationMethod::MonteCarlo => {
                if self.sample_count < 2 {
                    return Err(config("Monte Carlo needs at least two samples"));
                }
            }
        }
        Ok(())
    }
}

/// Affine set {z : normal·z = offset} across which an integrand may kink.
/// The adaptive back-end places panel breaks on these sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// A value with its error report (see the module table for its meaning).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, std_error: 0.0 }
    }
}

/// Prepared integrator for a fixed [`ExpectationSpec`].
#[derive(Debug, Clone)]
pub struct GaussianEngine {
    spec: ExpectationSpec,
    rule: Option<std::sync::Arc<GaussHermite>>,
}

impl GaussianEngine {
    pub fn new(spec: ExpectationSpec) -> Result<Self> {
        spec.validate()?;
        let rule = match spec.method {
            ExpectationMethod::TensorQuadrature => Some(GaussHermite::cached(spec.nodes_per_axis)?),
            _ => None,
        };
        Ok(Self { spec, rule })
    }

    pub fn spec(&self) -> &ExpectationSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    /// E[g(Z)].
    pub fn expect<G: Fn(&[f64]) -> f64>(&self, g: G) -> Estimate {
        let est = self.expect_vec(1, |z, out| out[0] = g(z));
        est[0]
    }

    /// Component-wise E[g(Z)] for a vector-valued integrand writing `nout`
    /// values.
    pub fn expect_vec<G: Fn(&[f64], &mut [f64])>(&self, nout: usize, g: G) -> Vec<Estimate> {
        self.expect_vec_kinked(nout, &[], 0.0, g)
    }

    /// As [`expect_vec`](Self::expect_vec), with the hyperplanes on which `g`
    /// is not smooth and an absolute accuracy below which refinement is
    /// pointless (the rounding level of `g`). Only the adaptive back-end uses
    /// them.
    pub fn expect_vec_kinked<G: Fn(&[f64], &mut [f64])>(
        &self,
        nout: usize,
        kinks: &[Hyperplane],
        abs_tol: f64,
        g: G,
    ) -> Vec<Estimate> {
        match self.spec.method {
            ExpectationMethod::TensorQuadrature => self.tensor(nout, &g),
            ExpectationMethod::Adaptive => self.adaptive(nout, kinks, abs_tol, &g),
            ExpectationMethod::RandomizedQmc => self.qmc(nout, &g),
            ExpectationMethod::MonteCarlo => self.monte_carlo(nout, &g),
        }
    }

    fn tensor<G: Fn(&[f64], &mut [f64])>(&self, nout: usize, g: &G) -> Vec<Estimate> {
        let rule = self.rule.as_ref().expect("tensor rule prepared");
        let d = self.spec.dim;
        let n = rule.len();
        let mut idx = vec![0usize; d];
        let mut z = vec![0.0; d];
        let mut buf = vec![0.0; nout];
        let mut acc = vec![0.0; nout];
        loop {
            let mut w = 1.0;
            for k in 0..d {
                z[k] = rule.nodes[idx[k]];
                w *= rule.weights[idx[k]];
            }
            g(&z, &mut buf);
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += w * b;
            }
            // Odometer increment.
            let mut k = 0;
            loop {
                if k == d {
                    return acc.into_iter().map(Estimate::exact).collect();
                }
                idx[k] += 1;
                if idx[k] < n {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    fn adaptive<G: Fn(&[f64], &mut [f64])>(
        &self,
        nout: usize,
        kinks: &[Hyperplane],
        abs_tol: f64,
        g: &G,
    ) -> Vec<Estimate> {
        let opts = AdaptiveOptions {
            rel_tol: self.spec.rel_tol,
            abs_tol: abs_tol.max(1e-300),
            max_intervals: 400,
        };
        let mut z = vec![0.0; self.spec.dim];
        let (values, err) = nested_gauss(0, &mut z, nout, kinks, g, opts);
        values
            .into_iter()
            .map(|value| Estimate { value, std_error: err })
            .collect()
    }

    fn qmc<G: Fn(&[f64], &mut [f64])>(&self, nout: usize, g: &G) -> Vec<Estimate> {
        let d = self.spec.dim;
        let normal = Normal::standard();
        let directions = sobol_directions(d);
        let mut shifts_rng = Stream::new(self.spec.seed, 0x51ab_01).rng();
        let mut means = vec![vec![0.0; nout]; self.spec.randomizations];
        let mut z = vec![0.0; d];
        let mut buf = vec![0.0; nout];
        let n = self.spec.sample_count;
        for mean in means.iter_mut() {
            let shift: Vec<u32> = (0..d).map(|_| shifts_rng.gen::<u32>()).collect();
            let mut state = vec![0u32; d];
            for i in 0..n {
                if i > 0 {
                    let c = (i - 1).trailing_ones() as usize;
                    for k in 0..d {
                        state[k] ^= directions[k][c];
                    }
                }
                for k in 0..d {
                    let u = ((state[k] ^ shift[k]) as f64 + 0.5) / 4_294_967_296.0;
                    z[k] = normal.inverse_cdf(u);
                }
                g(&z, &mut buf);
                for (m, b) in mean.iter_mut().zip(&buf) {
                    *m += b;
                }
            }
            for m in mean.iter_mut() {
                *m /= n as f64;
            }
        }
        let r = self.spec.randomizations as f64;
        (0..nout)
            .map(|j| {
                let avg = means.iter().map(|m| m[j]).sum::<f64>() / r;
                let var = means.iter().map(|m| (m[j] - avg).powi(2)).sum::<f64>() / (r - 1.0);
                Estimate {
                    value: avg,
                    std_error: (var / r).sqrt(),
                }
            })
            .collect()
    }

    fn monte_carlo<G: Fn(&[f64], &mut [f64])>(&self, nout: usize, g: &G) -> Vec<Estimate> {
        let d = self.spec.dim;
        let mut rng = Stream::new(self.spec.seed, 0x3c_0001).rng();
        let mut z = vec![0.0; d];
        let mut buf = vec![0.0; nout];
        let mut mean = vec![0.0; nout];
        let mut m2 = vec![0.0; nout];
        for i in 0..self.spec.sample_count {
            for zk in z.iter_mut() {
                *zk = polar_normal(&mut rng);
            }
            g(&z, &mut buf);
            let count = (i + 1) as f64;
            for j in 0..nout {
                let delta = buf[j] - mean[j];
                mean[j] += delta / count;
                m2[j] += delta * (buf[j] - mean[j]);
            }
        }
        let n = self.spec.sample_count as f64;
        mean.into_iter()
            .zip(m2)
            .map(|(value, m2)| Estimate {
                value,
                std_error: (m2 / (n - 1.0) / n).sqrt(),
            })
            .collect()
    }
}

/// Break points for coordinate `level` given the fixed coordinates before it:
/// hyperplanes whose normal vanishes beyond `level` but not at it.
fn level_breaks(level: usize, z: &[f64], kinks: &[Hyperplane]) -> Vec<f64> {
    let mut breaks = vec![-5.0, -2.5, 0.0, 2.5, 5.0];
    for k in kinks {
        let a = k.normal[level];
        if a == 0.0 || k.normal[level + 1..].iter().any(|&v| v != 0.0) {
            continue;
        }
        let rest: f64 = k.normal[..level].iter().zip(z).map(|(n, v)| n * v).sum();
        let x = (k.offset - rest) / a;
        if x.is_finite() && x.abs() < TRUNCATION {
            breaks.push(x);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks
}

fn nested_gauss<G: Fn(&[f64], &mut [f64])>(
    level: usize,
    z: &mut [f64],
    nout: usize,
    kinks: &[Hyperplane],
    g: &G,
    opts: AdaptiveOptions,
) -> (Vec<f64>, f64) {
    let d = z.len();
    let breaks = level_breaks(level, z, kinks);
    let prefix = z.to_vec();
    let est = adaptive_vec(
        |x, out| {
            let weight = INV_SQRT_2PI * (-0.5 * x * x).exp();
            let mut zz = prefix.clone();
            zz[level] = x;
            if level + 1 == d {
                g(&zz, out);
                for o in out.iter_mut() {
                    *o *= weight;
                }
                0.0
            } else {
                let (vals, err) = nested_gauss(level + 1, &mut zz, nout, kinks, g, opts);
                for (o, v) in out.iter_mut().zip(vals) {
                    *o = v * weight;
                }
                err * weight
            }
        },
        nout,
        -TRUNCATION,
        TRUNCATION,
        &breaks,
        opts,
    );
    (est.values, est.error)
}

/// Joe–Kuo direction numbers for the first ten Sobol coordinates:
/// (degree s, coefficient bits a, initial m_1..m_s).
const SOBOL_PARAMS: [(u32, u32, &[u32]); 9] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
];

fn sobol_directions(dim: usize) -> Vec<[u32; 32]> {
    let mut out = Vec::with_capacity(dim);
    for k in 0..dim {
        let mut v = [0u32; 32];
        if k == 0 {
            for (i, vi) in v.iter_mut().enumerate() {
                *vi = 1u32 << (31 - i);
            }
        } else {
            let (s, a, m) = SOBOL_PARAMS[k - 1];
            let s = s as usize;
            for i in 0..s.min(32) {
                v[i] = m[i] << (31 - i);
            }
            for i in s..32 {
                let mut vi = v[i - s] ^ (v[i - s] >> s);
                for j in 1..s {
                    if (a >> (s - 1 - j)) & 1 == 1 {
                        vi ^= v[i - j];
                    }
                }
                v[i] = vi;
            }
        }
        out.push(v);
    }
    out
}

/// E|Z|^β = 2^{β/2} Γ((β + d)/2) / Γ(d/2) for Z ~ N(0, I_d).
pub fn gaussian_norm_moment(beta: f64, d: usize) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(domain(format!("norm moment order must be positive, got {beta}")));
    }
    if d == 0 {
        return Err(domain("dimension must be positive"));
    }
    let d = d as f64;
    Ok(2f64.powf(beta / 2.0) * gamma_ratio((beta + d) / 2.0, d / 2.0)?)
}

/// m i.i.d. draws from N(0, I_d) on the given stream (polar method).
pub fn sample_gaussian(d: usize, m: usize, stream: Stream) -> Result<EmpiricalSample> {
    if d == 0 || m == 0 {
        return Err(domain("sample_gaussian needs d >= 1 and m >= 1"));
    }
    let mut rng = stream.rng();
    let data: Vec<f64> = (0..d * m).map(|_| polar_normal(&mut rng)).collect();
    EmpiricalSample::new(data, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{hermite_he, hermite, MultiIndex};

    fn norm(z: &[f64]) -> f64 {
        z.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[test]
    fn normalization_and_second_moment() {
        let e = GaussianEngine::new(ExpectationSpec::default_for(2)).unwrap();
        let one = e.expect(|_| 1.0);
        assert!((one.value - 1.0).abs() < 1e-13);
        assert_eq!(one.std_error, 0.0);
        let e3 = GaussianEngine::new(ExpectationSpec::default_for(3)).unwrap();
        let r = e3.expect(|z| z.iter().map(|v| v * v).sum());
        assert!((r.value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn norm_expectation_matches_closed_form() {
        let e = GaussianEngine::new(ExpectationSpec::adaptive(2, 1e-11)).unwrap();
        let r = e.expect(norm);
        assert!((r.value - 1.253_314_137_315_500_3).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn closed_form_norm_moments() {
        assert!((gaussian_norm_moment(2.0, 5).unwrap() - 5.0).abs() < 1e-12);
        assert!((gaussian_norm_moment(1.0, 2).unwrap() - 1.253_314_137_315_500_3).abs() < 1e-13);
        assert!((gaussian_norm_moment(1.0, 1).unwrap() - 0.797_884_560_802_865_4).abs() < 1e-13);
        assert!(gaussian_norm_moment(0.0, 2).is_err());
        assert!(gaussian_norm_moment(-1.0, 2).is_err());
    }

    #[test]
    fn norm_moment_increasing_in_dimension() {
        for &beta in &[1.0, 1.5, 2.0, 3.0] {
            let mut prev = 0.0;
            for d in 1..200 {
                let m = gaussian_norm_moment(beta, d).unwrap();
                assert!(m > prev, "beta={beta} d={d}");
                prev = m;
            }
        }
    }

    #[test]
    fn closed_form_agrees_with_numerical_expectation() {
        for &beta in &[0.5, 1.0, 1.7] {
            for d in 1..=3 {
                let exact = gaussian_norm_moment(beta, d).unwrap();
                let spec = ExpectationSpec::qmc(d, 1 << 14, 8, 11);
                let est = GaussianEngine::new(spec).unwrap().expect(|z| norm(z).powf(beta));
                assert!(
                    (est.value - exact).abs() <= 3.0 * est.std_error + 1e-12,
                    "beta={beta} d={d}: {est:?} vs {exact}"
                );
                let adaptive = GaussianEngine::new(ExpectationSpec::adaptive(d.min(2), 1e-10)).unwrap();
                if d <= 2 {
                    let a = adaptive.expect(|z| norm(z).powf(beta));
                    assert!((a.value - exact).abs() < 1e-7, "beta={beta} d={d}: {a:?}");
                }
            }
        }
    }

    #[test]
    fn tensor_rule_exact_on_polynomials() {
        let n = 8;
        let e = GaussianEngine::new(ExpectationSpec::tensor(2, n)).unwrap();
        // Degree 2n-1 = 15 per axis; E[Z1^6 Z2^8] = 15 * 105.
        let r = e.expect(|z| z[0].powi(6) * z[1].powi(8) + z[0].powi(15) * z[1]);
        assert!((r.value - 15.0 * 105.0).abs() < 1e-10 * 1575.0);
    }

    #[test]
    fn hermite_orthogonality_d1() {
        let e = GaussianEngine::new(ExpectationSpec::tensor(1, 64)).unwrap();
        let mut fact = 1.0;
        for m in 0..=4usize {
            if m > 0 {
                fact *= m as f64;
            }
            for n in 0..=4usize {
                let v = e.expect(|z| hermite_he(m, z[0]) * hermite_he(n, z[0])).value;
                let expected = if m == n { fact } else { 0.0 };
                assert!((v - expected).abs() < 1e-8, "m={m} n={n}: {v}");
            }
        }
    }

    #[test]
    fn hermite_mean_zero() {
        let e = GaussianEngine::new(ExpectationSpec::tensor(3, 16)).unwrap();
        for idx in [vec![1, 0, 0], vec![0, 2, 0], vec![1, 1, 1], vec![2, 0, 2], vec![0, 0, 4]] {
            let mi = MultiIndex::new(idx).unwrap();
            let v = e.expect(|z| hermite(&mi, z).unwrap()).value;
            assert!(v.abs() < 1e-8, "{mi}: {v}");
        }
    }

    #[test]
    fn adaptive_resolves_kinked_integrands() {
        // E[max(0, Z1 - c)] = φ(c) - c Φ̄(c).
        let c: f64 = 0.37;
        let normal = Normal::standard();
        let exact = INV_SQRT_2PI * (-0.5 * c * c).exp() - c * (1.0 - normal.cdf(c));
        let e = GaussianEngine::new(ExpectationSpec::adaptive(2, 1e-11)).unwrap();
        let r = e.expect(|z| (z[0] - c).max(0.0) * (1.0 + 0.0 * z[1]));
        assert!((r.value - exact).abs() < 1e-10, "{r:?} vs {exact}");
        assert!(r.std_error < 1e-8);
    }

    #[test]
    fn kink_breaks_follow_fixed_coordinates() {
        let kinks = [
            Hyperplane { normal: vec![1.0, -1.0], offset: 0.5 },
            Hyperplane { normal: vec![2.0, 0.0], offset: 1.0 },
        ];
        let outer = level_breaks(0, &[], &kinks);
        assert!(outer.contains(&0.5));
        assert_eq!(outer.len(), 6);
        let inner = level_breaks(1, &[1.5], &kinks);
        assert!(inner.contains(&1.0));
        let e = GaussianEngine::new(ExpectationSpec::adaptive(2, 1e-12)).unwrap();
        let with = e.expect_vec_kinked(1, &kinks, 0.0, |z, out| out[0] = (z[0] - z[1] - 0.5).max(0.0));
        // z₀ − z₁ ~ N(0, 2): E(W − c)⁺ = σφ(c/σ) − c(1 − Φ(c/σ)), value from mpmath.
        assert!((with[0].value - 0.349_088_662_230_116).abs() < 1e-12, "{with:?}");
    }

    #[test]
    fn tensor_rejected_above_three_dims() {
        let spec = ExpectationSpec::tensor(4, 10);
        assert!(GaussianEngine::new(spec).is_err());
        let mut qmc = ExpectationSpec::qmc(3, 1000, 8, 1);
        assert!(qmc.validate().is_err());
        qmc.sample_count = 1024;
        assert!(qmc.validate().is_ok());
        assert!(ExpectationSpec::qmc(11, 1024, 8, 1).validate().is_err());
    }

    #[test]
    fn default_methods_by_dimension() {
        assert_eq!(ExpectationSpec::default_for(3).method, ExpectationMethod::TensorQuadrature);
        assert_eq!(ExpectationSpec::default_for(7).method, ExpectationMethod::RandomizedQmc);
        assert_eq!(ExpectationSpec::default_for(12).method, ExpectationMethod::MonteCarlo);
    }

    #[test]
    fn sobol_one_dimensional_projections_are_stratified() {
        let dirs = sobol_directions(10);
        let n = 1usize << 10;
        for k in 0..10 {
            let mut state = 0u32;
            let mut seen = vec![false; n];
            for i in 0..n {
                if i > 0 {
                    state ^= dirs[k][(i - 1).trailing_ones() as usize];
                }
                let cell = (state >> 22) as usize;
                assert!(!seen[cell], "coordinate {k} repeats cell {cell}");
                seen[cell] = true;
            }
        }
    }

    #[test]
    fn qmc_and_mc_cover_higher_dimensions() {
        let d = 6;
        let qmc = GaussianEngine::new(ExpectationSpec::default_for(d)).unwrap();
        let r = qmc.expect(|z| z.iter().map(|v| v * v).sum());
        assert!((r.value - 6.0).abs() < 5.0 * r.std_error.max(1e-6), "{r:?}");
        let mc = GaussianEngine::new(ExpectationSpec::monte_carlo(12, 50_000, 5)).unwrap();
        let r = mc.expect(|z| z.iter().map(|v| v * v).sum());
        assert!((r.value - 12.0).abs() < 5.0 * r.std_error, "{r:?}");
    }

    #[test]
    fn sampling_is_deterministic_and_isotropic() {
        let s = Stream::new(9, 1);
        let a = sample_gaussian(2, 1000, s).unwrap();
        let b = sample_gaussian(2, 1000, s).unwrap();
        assert_eq!(a, b);
        let m = 1_000_000;
        let big = sample_gaussian(2, m, Stream::new(9, 2)).unwrap();
        let mut cov = [[0.0; 2]; 2];
        for i in 0..m {
            let p = big.point(i);
            for r in 0..2 {
                for c in 0..2 {
                    cov[r][c] += p[r] * p[c];
                }
            }
        }
        for r in 0..2 {
            for c in 0..2 {
                let v = cov[r][c] / m as f64;
                let target = if r == c { 1.0 } else { 0.0 };
                assert!((v - target).abs() < 5e-3, "cov[{r}][{c}] = {v}");
            }
        }
    }

    #[test]
    fn disjoint_streams_are_uncorrelated() {
        let m = 20_000;
        let a = sample_gaussian(1, m, Stream::new(4, 1)).unwrap();
        let b = sample_gaussian(1, m, Stream::new(4, 2)).unwrap();
        let corr: f64 = (0..m).map(|i| a.point(i)[0] * b.point(i)[0]).sum::<f64>() / m as f64;
        assert!(corr.abs() < 3.0 / (m as f64).sqrt(), "corr = {corr}");
    }
}
