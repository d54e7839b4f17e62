//! Target functions h for the Stein equation.
//!
//! Each function carries its Hölder exponent α and an analytic semi-norm
//! bound [h]_α = sup |h(x) − h(y)| / |x − y|^α. Every builtin has at most
//! polynomial growth; custom functions must guarantee this themselves, since
//! the heat-semigroup representation of the solution relies on it.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::gaussian::{gaussian_norm_moment, Hyperplane};
use crate::rng::{polar_normal, Stream};
use crate::special::MultiIndex;

/// Serializable description of a builtin function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant {
        #[serde(default = "one")]
        c: f64,
    },
    /// h(x) = a·x; `a` defaults to e₁.
    Linear {
        #[serde(default)]
        a: Option<Vec<f64>>,
    },
    /// h(x) = |x|².
    Quadratic {},
    /// h(x) = cos(a·x); `a` defaults to (1, …, 1)/√d.
    Cosine {
        #[serde(default)]
        a: Option<Vec<f64>>,
    },
    /// h(x, y) = max(0, min(x, y)), d = 2 only.
    Raic {},
    /// h(x) = |x|^α.
    RadialHolder { alpha: f64 },
}

fn one() -> f64 {
    1.0
}

pub const BUILTIN_IDS: [&str; 6] = ["constant", "linear", "quadratic", "cosine", "raic", "radial_holder"];

type CustomFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Constant(f64),
    Linear(Vec<f64>),
    Quadratic,
    Cosine(Vec<f64>),
    Raic,
    RadialHolder(f64),
    Custom(CustomFn),
}

/// A target function with its declared regularity.
#[derive(Clone)]
pub struct TestFunction {
    id: String,
    dim: usize,
    alpha: f64,
    holder_seminorm: f64,
    gaussian_mean: Option<f64>,
    kind: Kind,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .field("alpha", &self.alpha)
            .field("holder_seminorm", &self.holder_seminorm)
            .field("gaussian_mean", &self.gaussian_mean)
            .finish()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn coefficient_vector(a: Option<Vec<f64>>, d: usize, default: impl FnOnce() -> Vec<f64>) -> Result<Vec<f64>> {
    let a = a.unwrap_or_else(default);
    if a.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: a.len(),
        });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(domain("coefficient vector must be finite"));
    }
    Ok(a)
}

impl FunctionSpec {
    pub fn id(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::Linear { .. } => "linear",
            Self::Quadratic {} => "quadratic",
            Self::Cosine { .. } => "cosine",
            Self::Raic {} => "raic",
            Self::RadialHolder { .. } => "radial_holder",
        }
    }

    pub fn build(&self, d: usize) -> Result<TestFunction> {
        if d == 0 {
            return Err(domain("dimension must be positive"));
        }
        let id = self.id().to_string();
        let f = match self.clone() {
            Self::Constant { c } => {
                if !c.is_finite() {
                    return Err(domain("constant must be finite"));
                }
                TestFunction {
                    id,
                    dim: d,
                    alpha: 1.0,
                    holder_seminorm: 0.0,
                    gaussian_mean: Some(c),
                    kind: Kind::Constant(c),
                }
            }
            Self::Linear { a } => {
                let a = coefficient_vector(a, d, || {
                    let mut e = vec![0.0; d];
                    e[0] = 1.0;
                    e
                })?;
                TestFunction {
                    id,
                    dim: d,
                    alpha: 1.0,
                    holder_seminorm: norm(&a),
                    gaussian_mean: Some(0.0),
                    kind: Kind::Linear(a),
                }
            }
            Self::Quadratic {} => TestFunction {
                id,
                dim: d,
                alpha: 1.0,
                holder_seminorm: f64::INFINITY,
                gaussian_mean: Some(d as f64),
                kind: Kind::Quadratic,
            },
            Self::Cosine { a } => {
                let a = coefficient_vector(a, d, || vec![1.0 / (d as f64).sqrt(); d])?;
                let n = norm(&a);
                TestFunction {
                    id,
                    dim: d,
                    alpha: 1.0,
                    holder_seminorm: n,
                    gaussian_mean: Some((-0.5 * n * n).exp()),
                    kind: Kind::Cosine(a),
                }
            }
            Self::Raic {} => {
                if d != 2 {
                    return Err(domain(format!("raic is defined for d = 2 only, got d = {d}")));
                }
                let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
                TestFunction {
                    id,
                    dim: 2,
                    alpha: 1.0,
                    holder_seminorm: 1.0,
                    gaussian_mean: Some(inv_sqrt_pi / std::f64::consts::SQRT_2 - 0.5 * inv_sqrt_pi),
                    kind: Kind::Raic,
                }
            }
            Self::RadialHolder { alpha } => {
                if !(alpha > 0.0 && alpha <= 1.0) {
                    return Err(domain(format!("Hölder exponent must lie in (0, 1], got {alpha}")));
                }
                TestFunction {
                    id,
                    dim: d,
                    alpha,
                    holder_seminorm: 1.0,
                    gaussian_mean: Some(gaussian_norm_moment(alpha, d)?),
                    kind: Kind::RadialHolder(alpha),
                }
            }
        };
        Ok(f)
    }
}

/// Looks up a builtin by name; `params` holds the family parameters as a JSON
/// object (may be `null` for parameter-free families).
pub fn builtin(id: &str, d: usize, params: &serde_json::Value) -> Result<TestFunction> {
    if !BUILTIN_IDS.contains(&id) {
        return Err(Error::UnknownFunction(id.to_string()));
    }
    let mut obj = match params {
        serde_json::Value::Null => serde_json::Map::new(),
        serde_json::Value::Object(m) => m.clone(),
        other => return Err(domain(format!("parameters for `{id}` must be an object, got {other}"))),
    };
    obj.insert("id".into(), serde_json::Value::String(id.to_string()));
    let spec: FunctionSpec = serde_json::from_value(serde_json::Value::Object(obj))
        .map_err(|e| domain(format!("parameters for `{id}`: {e}")))?;
    spec.build(d)
}

impl TestFunction {
    /// Compiled-in extension point. `holder_seminorm` must be a valid bound
    /// for exponent `alpha`, and `f` must grow at most polynomially.
    pub fn custom<F>(id: &str, dim: usize, alpha: f64, holder_seminorm: f64, gaussian_mean: Option<f64>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(domain("dimension must be positive"));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(domain(format!("Hölder exponent must lie in (0, 1], got {alpha}")));
        }
        if !(holder_seminorm >= 0.0) {
            return Err(domain("Hölder semi-norm must be non-negative"));
        }
        Ok(Self {
            id: id.to_string(),
            dim,
            alpha,
            holder_seminorm,
            gaussian_mean,
            kind: Kind::Custom(Arc::new(f)),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Analytic bound on [h]_α; infinite for functions that are not globally
    /// Hölder (the quadratic).
    pub fn holder_seminorm(&self) -> f64 {
        self.holder_seminorm
    }

    pub fn gaussian_mean(&self) -> Option<f64> {
        self.gaussian_mean
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            Kind::Constant(c) => *c,
            Kind::Linear(a) => dot(a, x),
            Kind::Quadratic => x.iter().map(|v| v * v).sum(),
            Kind::Cosine(a) => dot(a, x).cos(),
            Kind::Raic => x[0].min(x[1]).max(0.0),
            Kind::RadialHolder(alpha) => norm(x).powf(*alpha),
            Kind::Custom(f) => f(x),
        }
    }

    /// Hyperplanes containing the points where h is not smooth.
    pub fn kinks(&self) -> Vec<Hyperplane> {
        let axis = |k: usize| {
            let mut normal = vec![0.0; self.dim];
            normal[k] = 1.0;
            Hyperplane { normal, offset: 0.0 }
        };
        match &self.kind {
            Kind::Raic => vec![
                axis(0),
                axis(1),
                Hyperplane {
                    normal: vec![1.0, -1.0],
                    offset: 0.0,
                },
            ],
            Kind::RadialHolder(_) => (0..self.dim).map(axis).collect(),
            _ => Vec::new(),
        }
    }

    /// Infinitely differentiable (derivatives of h may be used directly).
    pub fn is_smooth(&self) -> bool {
        matches!(
            self.kind,
            Kind::Constant(_) | Kind::Linear(_) | Kind::Quadratic | Kind::Cosine(_)
        )
    }

    /// sup |∇h| where finite and known.
    pub fn lipschitz_sup(&self) -> Option<f64> {
        match &self.kind {
            Kind::Constant(_) => Some(0.0),
            Kind::Linear(a) | Kind::Cosine(a) => Some(norm(a)),
            Kind::Raic => Some(1.0),
            Kind::RadialHolder(alpha) if *alpha == 1.0 => Some(1.0),
            _ => None,
        }
    }

    /// Analytic ∂^idx h(x) for the smooth families.
    pub fn partial(&self, idx: &MultiIndex, x: &[f64]) -> Option<f64> {
        let k = idx.order();
        let e = idx.exponents();
        match &self.kind {
            Kind::Constant(c) => Some(if k == 0 { *c } else { 0.0 }),
            Kind::Linear(a) => Some(match k {
                0 => dot(a, x),
                1 => a[idx.coordinates()[0]],
                _ => 0.0,
            }),
            Kind::Quadratic => Some(match k {
                0 => x.iter().map(|v| v * v).sum(),
                1 => 2.0 * x[idx.coordinates()[0]],
                2 if idx.max_exponent() == 2 => 2.0,
                _ => 0.0,
            }),
            Kind::Cosine(a) => {
                let coef: f64 = e.iter().zip(a).map(|(&n, &ak)| ak.powi(n as i32)).product();
                let phase = dot(a, x) + k as f64 * std::f64::consts::FRAC_PI_2;
                Some(coef * phase.cos())
            }
            _ => None,
        }
    }

    /// sup_x |∂^idx h(x)| for families where it is finite and known.
    pub fn partial_sup(&self, idx: &MultiIndex) -> Option<f64> {
        let k = idx.order();
        match &self.kind {
            Kind::Constant(c) => Some(if k == 0 { c.abs() } else { 0.0 }),
            Kind::Linear(a) => match k {
                0 => None,
                1 => Some(a[idx.coordinates()[0]].abs()),
                _ => Some(0.0),
            },
            Kind::Cosine(a) => Some(
                idx.exponents()
                    .iter()
                    .zip(a)
                    .map(|(&n, &ak)| ak.abs().powi(n as i32))
                    .product(),
            ),
            _ => None,
        }
    }

    /// Closed-form f_h where one is known: (value, gradient, row-major Hessian).
    pub fn closed_form_solution(&self, x: &[f64]) -> Option<(f64, Vec<f64>, Vec<f64>)> {
        let d = self.dim;
        match &self.kind {
            Kind::Constant(_) => Some((0.0, vec![0.0; d], vec![0.0; d * d])),
            Kind::Linear(a) => Some((-dot(a, x), a.iter().map(|v| -v).collect(), vec![0.0; d * d])),
            Kind::Quadratic => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let mut hess = vec![0.0; d * d];
                for i in 0..d {
                    hess[i * d + i] = -1.0;
                }
                Some((-(r2 - d as f64) / 2.0, x.iter().map(|v| -v).collect(), hess))
            }
            _ => None,
        }
    }
}

/// Largest observed |h(x) − h(y)| / |x − y|^α over sampled pairs.
///
/// Base points are uniform in [−radius, radius]^d. Half of the partners are
/// independent uniform points; the other half sit at a log-uniform distance in
/// [1e-3, 1]·radius along a coordinate axis.
pub fn check_holder(h: &TestFunction, pair_count: usize, radius: f64, stream: Stream) -> Result<f64> {
    if pair_count == 0 {
        return Err(domain("pair_count must be at least 1"));
    }
    if !(radius > 0.0) {
        return Err(domain("radius must be positive"));
    }
    let d = h.dim();
    let mut rng = stream.rng();
    let mut worst: f64 = 0.0;
    let mut x = vec![0.0; d];
    let mut y = vec![0.0; d];
    for k in 0..pair_count {
        for v in x.iter_mut() {
            *v = radius * (2.0 * rng.gen::<f64>() - 1.0);
        }
        if k % 2 == 0 {
            for v in y.iter_mut() {
                *v = radius * (2.0 * rng.gen::<f64>() - 1.0);
            }
        } else {
            let r = radius * 10f64.powf(-3.0 * rng.gen::<f64>());
            let sign = if polar_normal(&mut rng) < 0.0 { -1.0 } else { 1.0 };
            y.copy_from_slice(&x);
            y[(k / 2) % d] += sign * r;
        }
        let dist = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if dist == 0.0 {
            continue;
        }
        let ratio = (h.eval(&x) - h.eval(&y)).abs() / dist.powf(h.alpha());
        worst = worst.max(ratio);
    }
    Ok(worst)
}
