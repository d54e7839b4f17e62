//! Argument types shared by the flag parser and JSON run configs.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use steinlab::clt::BoundRequest;
use steinlab::BoundKind;

#[derive(Debug, Parser)]
#[command(name = "steinlab", version, about = "Numerical experiments for the multivariate Gaussian Stein equation")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Seed for every random stream (required by stochastic subcommands).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long = "out", global = true)]
    pub out: Option<PathBuf>,
    /// Output format; inferred from the --out extension, else csv.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (default: STEINLAB_THREADS, else all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regularity constants C1, C2 and the third-moment constant C(d): the
    /// explicit constants in the Hessian/Laplacian Hölder estimates and the
    /// Berry–Esseen bounds.
    Constants(ConstantsArgs),
    /// Evaluate the Stein solution f_h, its gradient and Laplacian at points.
    Solve(SolveArgs),
    /// Residual Δf − x·∇f − (h − E h(Z)) of the Stein equation at points.
    Residual(ResidualArgs),
    /// Probe the Hölder moduli of ∇²f_h (operator norm) and Δf_h against the
    /// log-corrected, β-Hölder and (1 + log) bounds. Exits 3 on a violation
    /// beyond quadrature slack.
    HolderProbe(HolderProbeArgs),
    /// Cross-partial gap of the solution for h(x, y) = max(0, min(x, y)),
    /// which shows the logarithmic factor in the Hessian modulus is needed.
    Raic(RaicArgs),
    /// Exact W₁ (or |x − y|^α cost) between two equal-size point files.
    W1(W1Args),
    /// Normalized-sum simulations measured by exact transport against the
    /// Berry–Esseen bounds (2 + δ moments, third moments, 2 + α moments).
    /// Exits 3 if a bound is beaten beyond two standard errors.
    Clt(CltArgs),
    /// Run a JSON config {subcommand, params, seed, output_path, format}.
    Run(RunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Constants(_) => "constants",
            Self::Solve(_) => "solve",
            Self::Residual(_) => "residual",
            Self::HolderProbe(_) => "holder-probe",
            Self::Raic(_) => "raic",
            Self::W1(_) => "w1",
            Self::Clt(_) => "clt",
            Self::Run(_) => "run",
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Path to the JSON run config.
    pub config: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: String,
    #[serde(default)]
    pub params: serde_json::Value,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

/// Integers given as a list `1,2,4` or an inclusive range `1..8`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct IntList(pub Vec<usize>);

impl FromStr for IntList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once("..") {
            let b = b.trim_start_matches('=');
            let lo: usize = a.trim().parse().map_err(|e| format!("bad range start `{a}`: {e}"))?;
            let hi: usize = b.trim().parse().map_err(|e| format!("bad range end `{b}`: {e}"))?;
            if lo > hi {
                return Err(format!("empty range `{s}`"));
            }
            return Ok(Self((lo..=hi).collect()));
        }
        s.split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|e| format!("bad integer `{t}`: {e}")))
            .collect::<Result<_, _>>()
            .map(Self)
    }
}

impl<'de> Deserialize<'de> for IntList {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            One(usize),
            Many(Vec<usize>),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::One(v) => Ok(Self(vec![v])),
            Raw::Many(v) => Ok(Self(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Comma-separated floats.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct FloatList(pub Vec<f64>);

impl FromStr for FloatList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad number `{t}`: {e}")))
            .collect::<Result<_, _>>()
            .map(Self)
    }
}

impl<'de> Deserialize<'de> for FloatList {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            One(f64),
            Many(Vec<f64>),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::One(v) => Ok(Self(vec![v])),
            Raw::Many(v) => Ok(Self(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Points as `x1,x2;y1,y2` or a JSON array of arrays.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PointList(pub Vec<Vec<f64>>);

impl FromStr for PointList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(';')
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.parse::<FloatList>().map(|f| f.0))
            .collect::<Result<_, _>>()
            .map(Self)
    }
}

impl<'de> Deserialize<'de> for PointList {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Many(Vec<Vec<f64>>),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::Many(v) => Ok(Self(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// A JSON object given inline on the command line.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JsonArg(pub serde_json::Value);

impl FromStr for JsonArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        serde_json::from_str(s).map(Self).map_err(|e| format!("invalid JSON: {e}"))
    }
}

/// `kind` or `kind:delta`, e.g. `thm_main:0.9`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct BoundArg(pub BoundRequest);

impl FromStr for BoundArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, delta) = match s.split_once(':') {
            Some((k, d)) => (k, d.trim().parse::<f64>().map_err(|e| format!("bad delta `{d}`: {e}"))?),
            None => (s, 0.0),
        };
        let kind: BoundKind = kind.trim().parse().map_err(|e: steinlab::Error| e.to_string())?;
        Ok(Self(BoundRequest { kind, delta }))
    }
}

impl<'de> Deserialize<'de> for BoundArg {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Full(BoundRequest),
        }
        match Raw::deserialize(de)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Full(b) => Ok(Self(b)),
        }
    }
}

fn one() -> f64 {
    1.0
}

fn dims_1_to_8() -> IntList {
    IntList((1..=8).collect())
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsArgs {
    /// Hölder exponent α ∈ (0, 1].
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub alpha: f64,
    /// Dimensions, as `1..8` or `1,2,4`.
    #[arg(long, default_value = "1..8")]
    #[serde(default = "dims_1_to_8")]
    pub d: IntList,
}


#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveArgs {
    /// Test function: constant, linear, quadratic, cosine, raic, radial_holder.
    #[arg(long)]
    pub function: String,
    /// Function parameters as a JSON object, e.g. '{"alpha": 0.5}'.
    #[arg(long, default_value = "null")]
    #[serde(default)]
    pub params: JsonArg,
    /// Dimension.
    #[arg(long)]
    pub d: usize,
    /// Relative tolerance of the adaptive Gaussian expectation (non-smooth h).
    #[arg(long)]
    #[serde(default)]
    pub rel_tol: Option<f64>,
    /// Points as `x1,x2;y1,y2`.
    #[arg(long)]
    pub points: PointList,
}

fn twenty() -> usize {
    20
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualArgs {
    /// Test function: constant, linear, quadratic, cosine, raic, radial_holder.
    #[arg(long)]
    pub function: String,
    /// Function parameters as a JSON object, e.g. '{"alpha": 0.5}'.
    #[arg(long, default_value = "null")]
    #[serde(default)]
    pub params: JsonArg,
    /// Dimension.
    #[arg(long)]
    pub d: usize,
    /// Relative tolerance of the adaptive Gaussian expectation (non-smooth h).
    #[arg(long)]
    #[serde(default)]
    pub rel_tol: Option<f64>,
    /// Explicit points; otherwise `count` draws from N(0, I_d) (needs --seed).
    #[arg(long)]
    #[serde(default)]
    pub points: Option<PointList>,
    #[arg(long, default_value_t = 20)]
    #[serde(default = "twenty")]
    pub count: usize,
    /// Exit 3 when any |residual| exceeds this tolerance.
    #[arg(long)]
    #[serde(default)]
    pub tol: Option<f64>,
}

fn pairs_default() -> usize {
    200
}
fn min_dist_default() -> f64 {
    1e-3
}
fn max_dist_default() -> f64 {
    2.0
}
fn half() -> f64 {
    0.5
}
fn probe_tol() -> f64 {
    1e-7
}
fn slack_default() -> f64 {
    10.0
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolderProbeArgs {
    /// Test function: constant, linear, quadratic, cosine, raic, radial_holder.
    #[arg(long)]
    pub function: String,
    /// Function parameters as a JSON object, e.g. '{"alpha": 0.5}'.
    #[arg(long, default_value = "null")]
    #[serde(default)]
    pub params: JsonArg,
    /// Dimension.
    #[arg(long)]
    pub d: usize,
    /// Relative tolerance of the adaptive Gaussian expectation (non-smooth h).
    #[arg(long)]
    #[serde(default)]
    pub rel_tol: Option<f64>,
    /// Random pairs with log-uniform distance.
    #[arg(long, default_value_t = 200)]
    #[serde(default = "pairs_default")]
    pub pairs: usize,
    /// Extra pairs ((u, …, u), 0) with log-spaced u.
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub diagonal: usize,
    #[arg(long, default_value_t = 1e-3)]
    #[serde(default = "min_dist_default")]
    pub min_dist: f64,
    #[arg(long, default_value_t = 2.0)]
    #[serde(default = "max_dist_default")]
    pub max_dist: f64,
    /// β/α for the β-Hölder bound.
    #[arg(long, default_value_t = 0.5)]
    #[serde(default = "half")]
    pub beta_fraction: f64,
    /// Violations count only beyond slack_factor × estimated quadrature error.
    #[arg(long, default_value_t = 10.0)]
    #[serde(default = "slack_default")]
    pub slack_factor: f64,
    /// Adaptive expectation tolerance used by the probe.
    #[arg(long, default_value_t = 1e-7)]
    #[serde(default = "probe_tol")]
    pub probe_tol: f64,
}

fn u_grid_default() -> FloatList {
    FloatList(vec![1e-2, 1e-3, 1e-4])
}
fn raic_tol() -> f64 {
    1e-12
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaicArgs {
    /// Distances u for the reduced integrals, each in (0, 0.5].
    #[arg(long, default_value = "1e-2,1e-3,1e-4")]
    #[serde(default = "u_grid_default")]
    pub u_grid: FloatList,
    /// Relative tolerance of the reduced integrals.
    #[arg(long, default_value_t = 1e-12)]
    #[serde(default = "raic_tol")]
    pub tol: f64,
    /// Also evaluate the gap with the full two-dimensional solver at these u.
    #[arg(long)]
    #[serde(default)]
    pub pipeline_u: Option<FloatList>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct W1Args {
    /// CSV of points, one per row (optional header).
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    /// Ground cost |x − y|^alpha.
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub alpha: f64,
}

fn n_grid_default() -> IntList {
    IntList(vec![4, 16, 64, 256])
}
fn m_default() -> usize {
    2000
}
fn reps_default() -> usize {
    8
}
fn bounds_default() -> Vec<BoundArg> {
    vec![BoundArg(BoundRequest {
        kind: BoundKind::ThmMain,
        delta: 0.9,
    })]
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CltArgs {
    /// Source: rademacher, cube, pareto_tail.
    #[arg(long)]
    pub source: String,
    /// Tail index for pareto_tail.
    #[arg(long)]
    #[serde(default)]
    pub a: Option<f64>,
    #[arg(long, default_value_t = 1)]
    #[serde(default = "default_d")]
    pub d: usize,
    #[arg(long, default_value = "4,16,64,256")]
    #[serde(default = "n_grid_default")]
    pub n_grid: IntList,
    /// Sample size of each empirical measure.
    #[arg(long, default_value_t = 2000)]
    #[serde(default = "m_default")]
    pub m: usize,
    #[arg(long, default_value_t = 8)]
    #[serde(default = "reps_default")]
    pub reps: usize,
    /// Hölder exponent of the test class (transport cost |x − y|^alpha).
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub alpha: f64,
    /// Bound as `kind[:delta]`: thm_main, thm_main2, cor_main, cor_1. Repeatable.
    #[arg(long = "bound", default_value = "thm_main:0.9")]
    #[serde(default = "bounds_default")]
    pub bound: Vec<BoundArg>,
}

fn default_d() -> usize {
    1
}
