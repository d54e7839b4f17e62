//! Normalized sums W = n^{−1/2} Σ Xᵢ of isotropic i.i.d. vectors, measured
//! against N(0, I_d) by exact empirical transport and compared with the
//! Berry–Esseen bounds.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{berry_esseen_bound, BoundKind};
use crate::error::{config, domain, Error, Result};
use crate::gaussian::{sample_gaussian, Estimate};
use crate::rng::{open_uniform, Stream};
use crate::transport::{w_alpha_exact, EmpiricalSample};

/// Draws used for moments without a closed form.
pub const MOMENT_DRAWS: usize = 1_000_000;
const MOMENT_SEED: u64 = 0x6d6f_6d65_6e74;

/// Source registry entry as it appears in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    /// Independent ±1 coordinates.
    Rademacher {},
    /// Uniform on [−√3, √3]^d.
    Cube {},
    /// Independent symmetric Pareto coordinates with tail index a ∈ (2, 3],
    /// scaled to unit variance.
    ParetoTail { a: f64 },
}

pub const BUILTIN_SOURCES: &[&str] = &["rademacher", "cube", "pareto_tail"];

/// An isotropic source distribution: E X = 0, E XXᵀ = I_d.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceDistribution {
    spec: SourceSpec,
    d: usize,
}

/// Looks up a registered source; `params` holds the family parameters.
pub fn builtin_source(id: &str, d: usize, params: &serde_json::Value) -> Result<SourceDistribution> {
    if !BUILTIN_SOURCES.contains(&id) {
        return Err(Error::UnknownSource(id.to_string()));
    }
    let mut obj = match params {
        serde_json::Value::Null => serde_json::Map::new(),
        serde_json::Value::Object(m) => m.clone(),
        _ => return Err(config("source parameters must be a JSON object")),
    };
    obj.insert("id".into(), serde_json::Value::String(id.into()));
    let spec: SourceSpec =
        serde_json::from_value(serde_json::Value::Object(obj)).map_err(|e| config(format!("source `{id}`: {e}")))?;
    SourceDistribution::new(spec, d)
}

impl SourceDistribution {
    pub fn new(spec: SourceSpec, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(domain("source dimension must be at least 1"));
        }
        if let SourceSpec::ParetoTail { a } = spec {
            if !(a > 2.0) {
                return Err(domain(format!(
                    "pareto_tail needs tail index a > 2: a = {a} gives infinite variance"
                )));
            }
            if a > 3.0 {
                return Err(domain(format!("pareto_tail tail index must lie in (2, 3], got a = {a}")));
            }
        }
        Ok(Self { spec, d })
    }

    pub fn spec(&self) -> &SourceSpec {
        &self.spec
    }

    pub fn id(&self) -> &'static str {
        match self.spec {
            SourceSpec::Rademacher {} => "rademacher",
            SourceSpec::Cube {} => "cube",
            SourceSpec::ParetoTail { .. } => "pareto_tail",
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Supremum of the p with E|X|^p finite.
    pub fn max_finite_moment(&self) -> f64 {
        match self.spec {
            SourceSpec::ParetoTail { a } => a,
            _ => f64::INFINITY,
        }
    }

    fn pareto_scale(a: f64) -> f64 {
        ((a - 2.0) / a).sqrt()
    }

    /// Writes one draw of X into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self.spec {
            SourceSpec::Rademacher {} => out.iter_mut().for_each(|v| *v = if rng.gen::<bool>() { 1.0 } else { -1.0 }),
            SourceSpec::Cube {} => {
                let r = 3f64.sqrt();
                out.iter_mut().for_each(|v| *v = r * (2.0 * rng.gen::<f64>() - 1.0));
            }
            SourceSpec::ParetoTail { a } => {
                let xm = Self::pareto_scale(a);
                for v in out.iter_mut() {
                    let mag = xm * open_uniform(rng).powf(-1.0 / a);
                    *v = if rng.gen::<bool>() { mag } else { -mag };
                }
            }
        }
    }

    /// E|X|^p, closed form where available and Monte Carlo otherwise.
    pub fn moment(&self, p: f64) -> Result<Estimate> {
        if !(p >= 0.0) {
            return Err(domain(format!("moment order must be non-negative, got {p}")));
        }
        let limit = self.max_finite_moment();
        if p >= limit {
            return Err(Error::InfiniteMoment {
                source_id: self.id().to_string(),
                order: p,
                limit,
            });
        }
        let d = self.d as f64;
        if p == 0.0 {
            return Ok(Estimate::exact(1.0));
        }
        if p == 2.0 {
            return Ok(Estimate::exact(d));
        }
        match self.spec {
            SourceSpec::Rademacher {} => Ok(Estimate::exact(d.powf(p / 2.0))),
            SourceSpec::Cube {} if self.d == 1 => Ok(Estimate::exact(3f64.powf(p / 2.0) / (p + 1.0))),
            SourceSpec::ParetoTail { a } if self.d == 1 => {
                Ok(Estimate::exact(a * Self::pareto_scale(a).powf(p) / (a - p)))
            }
            _ => Ok(self.moment_mc(p)),
        }
    }

    fn moment_mc(&self, p: f64) -> Estimate {
        let mut rng = Stream::new(MOMENT_SEED, self.d as u64).rng();
        let mut x = vec![0.0; self.d];
        let (mut mean, mut m2) = (0.0, 0.0);
        for k in 0..MOMENT_DRAWS {
            self.sample_into(&mut rng, &mut x);
            let v = x.iter().map(|t| t * t).sum::<f64>().powf(p / 2.0);
            let delta = v - mean;
            mean += delta / (k + 1) as f64;
            m2 += delta * (v - mean);
        }
        let n = MOMENT_DRAWS as f64;
        Estimate {
            value: mean,
            std_error: (m2 / (n - 1.0) / n).sqrt(),
        }
    }
}

/// m independent realizations of n^{−1/2} Σᵢ₌₁ⁿ Xᵢ.
pub fn simulate_sum(source: &SourceDistribution, n: usize, m: usize, stream: Stream) -> Result<EmpiricalSample> {
    if n == 0 || m == 0 {
        return Err(domain("simulate_sum needs n >= 1 and m >= 1"));
    }
    let d = source.dim();
    let mut rng = stream.rng();
    let mut data = vec![0.0; m * d];
    let mut x = vec![0.0; d];
    let scale = 1.0 / (n as f64).sqrt();
    for row in data.chunks_exact_mut(d) {
        for _ in 0..n {
            source.sample_into(&mut rng, &mut x);
            row.iter_mut().zip(&x).for_each(|(r, v)| *r += v);
        }
        row.iter_mut().for_each(|r| *r *= scale);
    }
    EmpiricalSample::new(data, d)
}

/// One bound to evaluate alongside the measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRequest {
    pub kind: BoundKind,
    #[serde(default)]
    pub delta: f64,
}

fn default_alpha() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CltExperiment {
    pub source: SourceSpec,
    pub d: usize,
    pub n_grid: Vec<usize>,
    pub m: usize,
    pub replications: usize,
    /// Hölder exponent of the test class; distances use the ground cost
    /// |x − y|^alpha (W₁ for alpha = 1).
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub bounds: Vec<BoundRequest>,
    pub seed: u64,
}

impl CltExperiment {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.n_grid[0] == 0 {
            return Err(config("n_grid must be non-empty with entries >= 1"));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config("n_grid must be strictly increasing"));
        }
        if self.replications < 3 {
            return Err(config("replications must be at least 3"));
        }
        if self.m < 2 {
            return Err(config("m must be at least 2"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(domain(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if self.bounds.is_empty() {
            return Err(config("at least one bound must be requested"));
        }
        Ok(())
    }
}

/// One CSV row: a single replication at one n against one bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub source: String,
    pub d: usize,
    pub n: usize,
    pub rep: usize,
    pub m: usize,
    pub w1_hat: f64,
    pub floor: f64,
    pub bound_kind: String,
    pub delta: f64,
    pub bound_value: f64,
    pub satisfied: bool,
}

/// Replication summary at one n for one bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub n: usize,
    pub bound_kind: String,
    pub delta: f64,
    pub mean_w: f64,
    pub std_error: f64,
    pub floor: f64,
    pub bound_value: f64,
    pub bound_std_error: f64,
    /// mean ŵ − 2·SE ≤ bound.
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    pub source: String,
    pub d: usize,
    pub m: usize,
    pub alpha: f64,
    pub rows: Vec<RateRow>,
    pub summary: Vec<RateSummary>,
    /// Mean ŵ per n, in grid order.
    pub mean_w: Vec<f64>,
    pub std_error_w: Vec<f64>,
    /// Self-distance of two independent Gaussian samples, per replication.
    pub floors: Vec<f64>,
    /// Log-log slope of mean ŵ − mean floor against n.
    pub slope_linear: Option<f64>,
    /// Log-log slope of the mean of √(max(ŵ² − floor², 0)) against n.
    pub slope_quadrature: Option<f64>,
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Least-squares slope of log y against log x, over the points with y > 0.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, &y)| y > 0.0)
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Runs all (n, replication) measurements and assembles the rate table.
pub fn run_experiment(e: &CltExperiment) -> Result<RateTable> {
    e.validate()?;
    let source = SourceDistribution::new(e.source.clone(), e.d)?;

    // Resolve every bound before any transport work so moment-domain errors
    // surface immediately.
    let mut bounds = Vec::with_capacity(e.bounds.len() * e.n_grid.len());
    for req in &e.bounds {
        for &n in &e.n_grid {
            bounds.push(berry_esseen_bound(req.kind, e.alpha, req.delta, e.d, n as u64, |p| source.moment(p))?);
        }
    }

    let root = Stream::new(e.seed, 0);
    let floors: Vec<f64> = (0..e.replications)
        .into_par_iter()
        .map(|rep| {
            let s = root.child(1, rep as u32);
            let a = sample_gaussian(e.d, e.m, s.child(0, 0))?;
            let b = sample_gaussian(e.d, e.m, s.child(0, 1))?;
            w_alpha_exact(&a, &b, e.alpha)
        })
        .collect::<Result<_>>()?;

    let tasks: Vec<(usize, usize)> = (0..e.n_grid.len())
        .flat_map(|i| (0..e.replications).map(move |r| (i, r)))
        .collect();
    let w: Vec<f64> = tasks
        .par_iter()
        .map(|&(i, rep)| {
            let s = root.child(2, (i * e.replications + rep) as u32);
            let sums = simulate_sum(&source, e.n_grid[i], e.m, s.child(0, 0))?;
            let z = sample_gaussian(e.d, e.m, s.child(0, 1))?;
            w_alpha_exact(&sums, &z, e.alpha)
        })
        .collect::<Result<_>>()?;

    let (floor_mean, _) = mean_se(&floors);
    let mut mean_w = Vec::with_capacity(e.n_grid.len());
    let mut std_error_w = Vec::with_capacity(e.n_grid.len());
    let mut quad = Vec::with_capacity(e.n_grid.len());
    for i in 0..e.n_grid.len() {
        let ws = &w[i * e.replications..(i + 1) * e.replications];
        let (mu, se) = mean_se(ws);
        mean_w.push(mu);
        std_error_w.push(se);
        let corrected: Vec<f64> = ws
            .iter()
            .zip(&floors)
            .map(|(wv, f)| (wv * wv - f * f).max(0.0).sqrt())
            .collect();
        quad.push(corrected.iter().sum::<f64>() / corrected.len() as f64);
    }

    let mut rows = Vec::with_capacity(bounds.len() * e.replications);
    let mut summary = Vec::with_capacity(bounds.len());
    for (b_idx, report) in bounds.iter().enumerate() {
        let i = b_idx % e.n_grid.len();
        let n = e.n_grid[i];
        let name = report.kind.name().to_string();
        for rep in 0..e.replications {
            let wv = w[i * e.replications + rep];
            rows.push(RateRow {
                source: source.id().to_string(),
                d: e.d,
                n,
                rep,
                m: e.m,
                w1_hat: wv,
                floor: floors[rep],
                bound_kind: name.clone(),
                delta: report.delta,
                bound_value: report.bound_value,
                satisfied: wv <= report.bound_value,
            });
        }
        summary.push(RateSummary {
            n,
            bound_kind: name,
            delta: report.delta,
            mean_w: mean_w[i],
            std_error: std_error_w[i],
            floor: floor_mean,
            bound_value: report.bound_value,
            bound_std_error: report.bound_std_error,
            satisfied: mean_w[i] - 2.0 * std_error_w[i] <= report.bound_value,
        });
    }
    // Rows ordered by (n, replication), then bound.
    rows.sort_by_key(|r| (r.n, r.rep));

    let ns: Vec<f64> = e.n_grid.iter().map(|&n| n as f64).collect();
    let linear: Vec<f64> = mean_w.iter().map(|m| m - floor_mean).collect();
    Ok(RateTable {
        source: source.id().to_string(),
        d: e.d,
        m: e.m,
        alpha: e.alpha,
        rows,
        summary,
        slope_linear: log_log_slope(&ns, &linear),
        slope_quadrature: log_log_slope(&ns, &quad),
        mean_w,
        std_error_w,
        floors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_and_errors() {
        let s = builtin_source("pareto_tail", 1, &serde_json::json!({"a": 2.5})).unwrap();
        assert_eq!(s.max_finite_moment(), 2.5);
        assert!(matches!(builtin_source("gauss", 1, &serde_json::Value::Null), Err(Error::UnknownSource(_))));
        let err = builtin_source("pareto_tail", 1, &serde_json::json!({"a": 1.5})).unwrap_err();
        assert!(err.to_string().contains("infinite variance"), "{err}");
        assert!(builtin_source("cube", 1, &serde_json::json!({"b": 1})).is_err());
        assert!(builtin_source("cube", 0, &serde_json::Value::Null).is_err());
    }

    #[test]
    fn analytic_moments() {
        let r = builtin_source("rademacher", 2, &serde_json::Value::Null).unwrap();
        assert!((r.moment(3.0).unwrap().value - 2f64.powf(1.5)).abs() < 1e-14);
        let c = builtin_source("cube", 1, &serde_json::Value::Null).unwrap();
        assert!((c.moment(2.0).unwrap().value - 1.0).abs() < 1e-15);
        // E|U|⁴ for U uniform on [−√3, √3] is 9/5.
        assert!((c.moment(4.0).unwrap().value - 1.8).abs() < 1e-14);
        let p = builtin_source("pareto_tail", 1, &serde_json::json!({"a": 2.5})).unwrap();
        assert!(matches!(p.moment(2.6), Err(Error::InfiniteMoment { .. })));
        assert!(p.moment(2.4).unwrap().value.is_finite());
    }

    #[test]
    fn pareto_moment_formula_matches_mc_tail_free_order() {
        // E|X| is finite with finite variance, so MC is a fair check.
        let p = SourceDistribution::new(SourceSpec::ParetoTail { a: 2.5 }, 1).unwrap();
        let exact = p.moment(1.0).unwrap().value;
        let mc = p.moment_mc(1.0);
        assert!((exact - mc.value).abs() < 5.0 * mc.std_error, "{exact} vs {mc:?}");
    }

    #[test]
    fn simulated_sums_are_isotropic() {
        for spec in [SourceSpec::Rademacher {}, SourceSpec::Cube {}, SourceSpec::ParetoTail { a: 3.0 }] {
            let s = SourceDistribution::new(spec, 2).unwrap();
            let m = 100_000;
            let w = simulate_sum(&s, 4, m, Stream::new(3, 3)).unwrap();
            let mean = w.mean();
            let cov = w.second_moment();
            let tol = 5.0 / (m as f64).sqrt();
            assert!(mean.iter().all(|v| v.abs() < tol), "{mean:?}");
            assert!((cov[0] - 1.0).abs() < 10.0 * tol && (cov[3] - 1.0).abs() < 10.0 * tol, "{cov:?}");
            assert!(cov[1].abs() < 10.0 * tol);
        }
    }

    #[test]
    fn n_equal_one_returns_raw_draws() {
        let s = SourceDistribution::new(SourceSpec::Rademacher {}, 3).unwrap();
        let w = simulate_sum(&s, 1, 50, Stream::new(1, 1)).unwrap();
        assert!(w.as_slice().iter().all(|v| v.abs() == 1.0));
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [4.0, 16.0, 64.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.5)).collect();
        assert!((log_log_slope(&xs, &ys).unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(log_log_slope(&xs, &[1.0, -1.0, -1.0]), None);
    }

    #[test]
    fn experiment_validation() {
        let mut e = CltExperiment {
            source: SourceSpec::Rademacher {},
            d: 1,
            n_grid: vec![4, 16],
            m: 50,
            replications: 3,
            alpha: 1.0,
            bounds: vec![BoundRequest { kind: BoundKind::ThmMain, delta: 0.9 }],
            seed: 1,
        };
        assert!(e.validate().is_ok());
        e.n_grid = vec![16, 4];
        assert!(e.validate().is_err());
        e.n_grid = vec![4, 16];
        e.replications = 2;
        assert!(e.validate().is_err());
    }

    #[test]
    fn small_experiment_is_deterministic() {
        let e = CltExperiment {
            source: SourceSpec::Cube {},
            d: 1,
            n_grid: vec![4, 16],
            m: 200,
            replications: 3,
            alpha: 1.0,
            bounds: vec![
                BoundRequest { kind: BoundKind::ThmMain, delta: 0.5 },
                BoundRequest { kind: BoundKind::CorMain, delta: 0.0 },
            ],
            seed: 11,
        };
        let a = run_experiment(&e).unwrap();
        let b = run_experiment(&e).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 2 * 2 * 3);
        assert_eq!(a.summary.len(), 4);
        assert!(a.summary.iter().all(|s| s.satisfied));
    }

    #[test]
    fn infinite_moment_request_fails_before_sampling() {
        let e = CltExperiment {
            source: SourceSpec::ParetoTail { a: 2.5 },
            d: 1,
            n_grid: vec![4],
            m: 10,
            replications: 3,
            alpha: 1.0,
            bounds: vec![BoundRequest { kind: BoundKind::ThmMain2, delta: 0.6 }],
            seed: 0,
        };
        assert!(matches!(run_experiment(&e), Err(Error::InfiniteMoment { .. })));
    }
}
