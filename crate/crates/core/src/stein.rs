//! The Gaussian Stein equation Δf − x·∇f = h − E h(Z) and its solution
//!
//!   f_h(x) = −∫₀¹ (1/2t) E h̄(Z_{x,t}) dt,   Z_{x,t} = √t x + √(1−t) Z,
//!
//! with h̄ = h − E h(Z). Derivatives of order k = |i| follow from Gaussian
//! integration by parts:
//!
//!   ∂^i f_h(x) = −∫₀¹ t^{k/2−1} / (2(1−t)^{k/2}) E[H_i(Z) h̄(Z_{x,t})] dt.
//!
//! Since E H_i(Z) = 0 for k ≥ 1, the constant h̄(√t x) may be subtracted
//! inside the expectation. Above `split_point` this is done, which turns the
//! (1−t)^{−k/2} endpoint singularity into (1−t)^{α/2 − 1} for k = 2.
//!
//! For smooth h, derivatives of order p + 2 use p derivatives of h and two
//! integrations by parts:
//!
//!   ∂^{i} f_h(x) = −∫₀¹ t^{p/2} / (2(1−t)) E[(Z_a Z_b − δ_ab) ∂^{i'} h̄(Z_{x,t})] dt,
//!
//! where a, b are the last two coordinates of i and i' the remaining p.
//!
//! The t-integral uses a tanh-sinh rule; every node needs one Gaussian
//! expectation, and all requested quantities at a point share these
//! expectations.

use std::cell::RefCell;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error, Result};
use crate::gaussian::{Estimate, ExpectationMethod, ExpectationSpec, GaussianEngine, Hyperplane};
use crate::quadrature::TanhSinh;
use crate::special::{hermite_he_all, MultiIndex};
use crate::test_functions::TestFunction;

/// Highest derivative order accepted by [`SteinSolution::eval_higher_derivative`].
pub const MAX_DERIVATIVE_ORDER: u32 = 8;

/// Discretization parameters for the t-integral and the inner expectations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteinConfig {
    /// Step of the tanh-sinh rule in the transformed variable.
    pub t_step: f64,
    /// Half-width of the transformed interval; nodes reach t ≈ exp(−π e^{extent}/2).
    pub t_extent: f64,
    /// Derivative integrands are centered for t above this point.
    pub split_point: f64,
    pub expectation: ExpectationSpec,
}

impl SteinConfig {
    /// Defaults for `h`: adaptive expectations for non-smooth h in d ≤ 2,
    /// otherwise the dimension default of the Gaussian engine.
    pub fn default_for(h: &TestFunction) -> Self {
        let d = h.dim();
        let expectation = if !h.is_smooth() && d <= 2 {
            ExpectationSpec::adaptive(d, 1e-8)
        } else {
            ExpectationSpec::default_for(d)
        };
        Self {
            t_step: 1.0 / 16.0,
            t_extent: 4.5,
            split_point: 0.5,
            expectation,
        }
    }

    /// Same configuration with the t-step halved.
    pub fn refined(&self) -> Self {
        Self {
            t_step: self.t_step / 2.0,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.split_point > 0.0 && self.split_point < 1.0) {
            return Err(config(format!("split_point must lie in (0, 1), got {}", self.split_point)));
        }
        if !(self.t_step > 0.0 && self.t_step <= 0.5) {
            return Err(config(format!("t_step must lie in (0, 0.5], got {}", self.t_step)));
        }
        if !(self.t_extent >= 3.0 && self.t_extent <= 6.0) {
            return Err(config(format!("t_extent must lie in [3, 6], got {}", self.t_extent)));
        }
        self.expectation.validate()
    }
}

/// A value with an a-posteriori error estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Approx<T> {
    pub value: T,
    pub error: f64,
}

#[derive(Debug, Clone)]
enum Kernel {
    One,
    Hermite(MultiIndex),
    /// Σ_i (Z_i² − 1).
    Laplacian,
    /// (Z_a Z_b − δ_ab) against ∂^inner h.
    Smooth { a: usize, b: usize, inner: MultiIndex },
}

#[derive(Debug, Clone, Copy)]
enum Weight {
    /// −1/(2t).
    Solution,
    /// −t^{k/2−1} / (2(1−t)^{k/2}).
    Hermite(u32),
    /// −t^{p/2} / (2(1−t)).
    Smooth(u32),
}

impl Weight {
    fn at(self, t: f64, tc: f64) -> f64 {
        match self {
            Weight::Solution => -0.5 / t,
            Weight::Hermite(1) => -0.5 / (t * tc).sqrt(),
            Weight::Hermite(2) => -0.5 / tc,
            Weight::Hermite(k) => {
                let h = k as f64 / 2.0;
                -0.5 * t.powf(h - 1.0) / tc.powf(h)
            }
            Weight::Smooth(0) => -0.5 / tc,
            Weight::Smooth(p) => -0.5 * t.powf(p as f64 / 2.0) / tc,
        }
    }
}

#[derive(Debug, Clone)]
struct Channel {
    kernel: Kernel,
    weight: Weight,
}

impl Channel {
    fn centered(&self) -> bool {
        !matches!(self.kernel, Kernel::One)
    }
}

/// Barbour's solution f_h for a fixed target function and discretization.
#[derive(Debug, Clone)]
pub struct SteinSolution {
    h: TestFunction,
    config: SteinConfig,
    mean: Estimate,
    rule: TanhSinh,
    engine: GaussianEngine,
}

impl SteinSolution {
    pub fn new(h: TestFunction, config: SteinConfig) -> Result<Self> {
        config.validate()?;
        if config.expectation.dim != h.dim() {
            return Err(Error::DimensionMismatch {
                expected: h.dim(),
                got: config.expectation.dim,
            });
        }
        let engine = GaussianEngine::new(config.expectation.clone())?;
        let mean = match h.gaussian_mean() {
            Some(m) => Estimate::exact(m),
            None => engine.expect(|z| h.eval(z)),
        };
        let rule = TanhSinh::new(config.t_step, config.t_extent)?;
        Ok(Self {
            h,
            config,
            mean,
            rule,
            engine,
        })
    }

    /// Solution with [`SteinConfig::default_for`].
    pub fn with_defaults(h: TestFunction) -> Result<Self> {
        let config = SteinConfig::default_for(&h);
        Self::new(h, config)
    }

    pub fn h(&self) -> &TestFunction {
        &self.h
    }

    pub fn config(&self) -> &SteinConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    /// E h(Z) as used in h̄.
    pub fn mean(&self) -> Estimate {
        self.mean
    }

    /// Number of t-nodes per evaluation.
    pub fn t_nodes(&self) -> usize {
        self.rule.nodes.len()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(domain("evaluation point must be finite"));
        }
        Ok(())
    }

    /// Integrates every channel over t, returning values and error estimates.
    fn integrate(&self, x: &[f64], channels: &[Channel]) -> Vec<Approx<f64>> {
        let d = self.dim();
        let nch = channels.len();
        let mean = self.mean.value;
        let max_deg = channels
            .iter()
            .map(|c| match &c.kernel {
                Kernel::Hermite(i) => i.max_exponent() as usize,
                _ => 2,
            })
            .max()
            .unwrap_or(2);
        let split = self.config.split_point;
        let base_kinks = self.h.kinks();

        let per_node: Vec<(Vec<f64>, Vec<f64>)> = self
            .rule
            .nodes
            .par_iter()
            .map(|node| {
                let (t, tc) = (node.t, node.t_comp);
                let (st, sc) = (t.sqrt(), tc.sqrt());
                let center: Vec<f64> = x.iter().map(|v| st * v).collect();
                let centered = t > split;
                let offsets: Vec<f64> = channels
                    .iter()
                    .map(|c| {
                        if !centered || !c.centered() {
                            return match c.kernel {
                                Kernel::Smooth { .. } => 0.0,
                                _ => mean,
                            };
                        }
                        match &c.kernel {
                            Kernel::Smooth { inner, .. } => smooth_partial(&self.h, inner, &center, mean),
                            _ => self.h.eval(&center),
                        }
                    })
                    .collect();
                let scratch = RefCell::new((vec![0.0; d], vec![0.0; d * (max_deg + 1)]));
                let kinks: Vec<Hyperplane> = base_kinks
                    .iter()
                    .map(|k| Hyperplane {
                        normal: k.normal.iter().map(|n| n * sc).collect(),
                        offset: k.offset - k.normal.iter().zip(&center).map(|(n, c)| n * c).sum::<f64>(),
                    })
                    .collect();
                let noise = 64.0 * f64::EPSILON * (1.0 + self.h.eval(&center).abs() + mean.abs());
                let est = self.engine.expect_vec_kinked(nch, &kinks, noise, |z, out| {
                    let mut guard = scratch.borrow_mut();
                    let (y, he) = &mut *guard;
                    for k in 0..d {
                        y[k] = center[k] + sc * z[k];
                    }
                    let hy = self.h.eval(y);
                    for k in 0..d {
                        hermite_he_all(z[k], &mut he[k * (max_deg + 1)..(k + 1) * (max_deg + 1)]);
                    }
                    for (c, ch) in channels.iter().enumerate() {
                        out[c] = match &ch.kernel {
                            Kernel::One => hy - offsets[c],
                            Kernel::Hermite(idx) => {
                                let mut kv = 1.0;
                                for (k, &n) in idx.exponents().iter().enumerate() {
                                    kv *= he[k * (max_deg + 1) + n as usize];
                                }
                                kv * (hy - offsets[c])
                            }
                            Kernel::Laplacian => {
                                let kv: f64 = z.iter().map(|v| v * v - 1.0).sum();
                                kv * (hy - offsets[c])
                            }
                            Kernel::Smooth { a, b, inner } => {
                                let kv = z[*a] * z[*b] - if a == b { 1.0 } else { 0.0 };
                                kv * (smooth_partial(&self.h, inner, y, mean) - offsets[c])
                            }
                        };
                    }
                });
                let w: Vec<f64> = channels.iter().map(|c| c.weight.at(t, tc)).collect();
                let vals = est.iter().zip(&w).map(|(e, w)| w * e.value).collect();
                let errs = est.iter().zip(&w).map(|(e, w)| (w * e.std_error).abs()).collect();
                (vals, errs)
            })
            .collect();

        (0..nch)
            .map(|c| {
                let samples: Vec<f64> = per_node.iter().map(|(v, _)| v[c]).collect();
                let (fine, coarse) = self.rule.combine(&samples);
                let inner_err: f64 = self
                    .rule
                    .nodes
                    .iter()
                    .zip(&per_node)
                    .map(|(n, (_, e))| n.weight * e[c])
                    .sum();
                Approx {
                    value: fine,
                    error: (fine - coarse).abs() + inner_err,
                }
            })
            .collect()
    }

    /// f_h(x).
    pub fn eval_f(&self, x: &[f64]) -> Result<Approx<f64>> {
        self.check_point(x)?;
        let ch = [Channel {
            kernel: Kernel::One,
            weight: Weight::Solution,
        }];
        Ok(self.integrate(x, &ch).remove(0))
    }

    /// ∂^idx f_h(x) for 1 ≤ |idx| ≤ 2 through the Hermite representation.
    pub fn eval_derivative(&self, idx: &MultiIndex, x: &[f64]) -> Result<Approx<f64>> {
        self.check_point(x)?;
        self.check_index(idx)?;
        let k = idx.order();
        if k == 0 {
            return Err(domain("order-0 index: use eval_f"));
        }
        if k > 2 {
            return Err(domain(format!("order {k} index: use eval_higher_derivative")));
        }
        let ch = [Channel {
            kernel: Kernel::Hermite(idx.clone()),
            weight: Weight::Hermite(k),
        }];
        Ok(self.integrate(x, &ch).remove(0))
    }

    fn check_index(&self, idx: &MultiIndex) -> Result<()> {
        if idx.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: idx.dim(),
            });
        }
        Ok(())
    }

    pub fn eval_gradient(&self, x: &[f64]) -> Result<Approx<Vec<f64>>> {
        self.check_point(x)?;
        let d = self.dim();
        let ch: Vec<Channel> = (0..d)
            .map(|i| Channel {
                kernel: Kernel::Hermite(MultiIndex::unit(d, i)),
                weight: Weight::Hermite(1),
            })
            .collect();
        Ok(collect_vector(self.integrate(x, &ch)))
    }

    fn hessian_channels(&self) -> (Vec<Channel>, Vec<(usize, usize)>) {
        let d = self.dim();
        let mut ch = Vec::new();
        let mut pos = Vec::new();
        for i in 0..d {
            for j in i..d {
                ch.push(Channel {
                    kernel: Kernel::Hermite(MultiIndex::pair(d, i, j)),
                    weight: Weight::Hermite(2),
                });
                pos.push((i, j));
            }
        }
        (ch, pos)
    }

    fn assemble_hessian(&self, parts: &[Approx<f64>], pos: &[(usize, usize)]) -> Approx<Vec<f64>> {
        let d = self.dim();
        let mut m = vec![0.0; d * d];
        let mut err2 = 0.0;
        for (p, &(i, j)) in parts.iter().zip(pos) {
            m[i * d + j] = p.value;
            m[j * d + i] = p.value;
            let mult = if i == j { 1.0 } else { 2.0 };
            err2 += mult * p.error * p.error;
        }
        Approx {
            value: m,
            error: err2.sqrt(),
        }
    }

    /// Row-major d×d Hessian; the error is a Frobenius-norm estimate.
    pub fn eval_hessian(&self, x: &[f64]) -> Result<Approx<Vec<f64>>> {
        self.check_point(x)?;
        let (ch, pos) = self.hessian_channels();
        let parts = self.integrate(x, &ch);
        Ok(self.assemble_hessian(&parts, &pos))
    }

    pub fn eval_laplacian(&self, x: &[f64]) -> Result<Approx<f64>> {
        self.check_point(x)?;
        let ch = [Channel {
            kernel: Kernel::Laplacian,
            weight: Weight::Hermite(2),
        }];
        Ok(self.integrate(x, &ch).remove(0))
    }

    /// Hessian and Laplacian from one shared set of expectations.
    pub fn eval_hessian_and_laplacian(&self, x: &[f64]) -> Result<(Approx<Vec<f64>>, Approx<f64>)> {
        self.check_point(x)?;
        let (mut ch, pos) = self.hessian_channels();
        ch.push(Channel {
            kernel: Kernel::Laplacian,
            weight: Weight::Hermite(2),
        });
        let mut parts = self.integrate(x, &ch);
        let lap = parts.pop().expect("laplacian channel");
        Ok((self.assemble_hessian(&parts, &pos), lap))
    }

    /// ∂^idx f_h(x) for any order up to [`MAX_DERIVATIVE_ORDER`].
    ///
    /// Smooth h with analytic partials use the two-integration-by-parts form;
    /// otherwise the Hermite form of order |idx| is used, which converges only
    /// if h has enough regularity for the centered integrand to be integrable
    /// at t = 1.
    pub fn eval_higher_derivative(&self, idx: &MultiIndex, x: &[f64]) -> Result<Approx<f64>> {
        self.check_point(x)?;
        self.check_index(idx)?;
        let k = idx.order();
        if k > MAX_DERIVATIVE_ORDER {
            return Err(domain(format!(
                "derivative order {k} exceeds the cap of {MAX_DERIVATIVE_ORDER}"
            )));
        }
        if k == 0 {
            return self.eval_f(x);
        }
        let smooth = self.h.is_smooth() && k >= 2 && self.h.partial(idx, x).is_some();
        let channel = if smooth {
            let coords = idx.coordinates();
            let a = coords[coords.len() - 2];
            let b = coords[coords.len() - 1];
            let inner = idx.lowered(b).and_then(|i| i.lowered(a)).expect("two coordinates present");
            Channel {
                kernel: Kernel::Smooth { a, b, inner },
                weight: Weight::Smooth(k - 2),
            }
        } else {
            Channel {
                kernel: Kernel::Hermite(idx.clone()),
                weight: Weight::Hermite(k),
            }
        };
        Ok(self.integrate(x, &[channel]).remove(0))
    }

    /// Δf_h(x) − x·∇f_h(x) − h̄(x), which vanishes for the exact solution.
    pub fn residual(&self, x: &[f64]) -> Result<Approx<f64>> {
        self.check_point(x)?;
        let d = self.dim();
        let mut ch: Vec<Channel> = (0..d)
            .map(|i| Channel {
                kernel: Kernel::Hermite(MultiIndex::unit(d, i)),
                weight: Weight::Hermite(1),
            })
            .collect();
        ch.push(Channel {
            kernel: Kernel::Laplacian,
            weight: Weight::Hermite(2),
        });
        let parts = self.integrate(x, &ch);
        let lap = &parts[d];
        let mut value = lap.value - (self.h.eval(x) - self.mean.value);
        let mut error = lap.error + self.mean.std_error;
        for i in 0..d {
            value -= x[i] * parts[i].value;
            error += x[i].abs() * parts[i].error;
        }
        Ok(Approx { value, error })
    }

    /// Which expectation back-end is in use.
    pub fn expectation_method(&self) -> ExpectationMethod {
        self.config.expectation.method
    }
}

fn smooth_partial(h: &TestFunction, inner: &MultiIndex, y: &[f64], mean: f64) -> f64 {
    let v = h.partial(inner, y).expect("smooth family has analytic partials");
    if inner.order() == 0 {
        v - mean
    } else {
        v
    }
}

fn collect_vector(parts: Vec<Approx<f64>>) -> Approx<Vec<f64>> {
    let error = parts.iter().map(|p| p.error * p.error).sum::<f64>().sqrt();
    Approx {
        value: parts.into_iter().map(|p| p.value).collect(),
        error,
    }
}
