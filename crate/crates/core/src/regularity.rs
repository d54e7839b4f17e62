//! Empirical checks of the Hölder-type moduli of ∇²f_h and Δf_h, and the
//! max-min example showing that the logarithmic factor cannot be dropped.
//!
//! For u = |x − y| and an α-Hölder h, the checked bounds are
//!
//! * Hessian, operator norm: [h]_α u^α (C₁ − 2 log u) for u ≤ 1 and
//!   [h]_α C₁ beyond; [h]_α (C₁ + 2/(α − β)) u^β; [h]_α u^α (C₁ + |log u|).
//! * Laplacian: the same with C₂ in place of C₁, a factor d on the log terms
//!   and 2d/(α − β).

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{c1, c2};
use crate::error::{domain, Error, Result};
use crate::quadrature::{adaptive_vec, AdaptiveOptions};
use crate::rng::{polar_normal, Stream};
use crate::special::MultiIndex;
use crate::stein::SteinSolution;

const JACOBI_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-10;

/// Eigenvalues of a symmetric row-major d×d matrix by cyclic Jacobi sweeps.
pub fn symmetric_eigenvalues(m: &[f64], d: usize) -> Result<Vec<f64>> {
    if m.len() != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            got: m.len(),
        });
    }
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    let mut asym: f64 = 0.0;
    for i in 0..d {
        for j in 0..i {
            asym = asym.max((m[i * d + j] - m[j * d + i]).abs());
        }
    }
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::Asymmetric(asym));
    }
    let mut a = m.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * d + j] * a[i * d + j])
            .sum::<f64>()
            .sqrt();
        let diag: f64 = (0..d).map(|i| a[i * d + i] * a[i * d + i]).sum::<f64>().sqrt();
        if off <= JACOBI_TOL * diag.max(f64::MIN_POSITIVE) || off == 0.0 {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * d + q] - a[p * d + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
            }
        }
    }
    Ok((0..d).map(|i| a[i * d + i]).collect())
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn opnorm(m: &[f64], d: usize) -> Result<f64> {
    Ok(symmetric_eigenvalues(m, d)?.into_iter().fold(0.0, |acc, v| acc.max(v.abs())))
}

/// The three right-hand sides checked for one pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderBounds {
    /// Log-corrected α-Hölder bound, capped beyond unit distance.
    pub log_holder: f64,
    /// β-Hölder bound, β < α.
    pub beta_holder: f64,
    /// (1 + log) form with unit coefficient on |log u|.
    pub one_plus_log: f64,
}

fn bounds_with(constant: f64, log_factor: f64, alpha: f64, beta: f64, seminorm: f64, u: f64) -> Result<HolderBounds> {
    if !(u > 0.0) {
        return Err(domain("distance must be positive"));
    }
    if !(beta > 0.0 && beta < alpha) {
        return Err(domain(format!("requires 0 < beta < alpha (got beta = {beta}, alpha = {alpha})")));
    }
    let log_holder = if u <= 1.0 {
        seminorm * u.powf(alpha) * (constant - 2.0 * log_factor * u.ln())
    } else {
        seminorm * constant
    };
    Ok(HolderBounds {
        log_holder,
        beta_holder: seminorm * (constant + 2.0 * log_factor / (alpha - beta)) * u.powf(beta),
        one_plus_log: seminorm * u.powf(alpha) * (constant + log_factor * u.ln().abs()),
    })
}

/// Bounds on ‖∇²f(x) − ∇²f(y)‖_op at distance u.
pub fn hessian_bounds(alpha: f64, beta: f64, d: usize, seminorm: f64, u: f64) -> Result<HolderBounds> {
    bounds_with(c1(alpha, d)?, 1.0, alpha, beta, seminorm, u)
}

/// Bounds on |Δf(x) − Δf(y)| at distance u.
pub fn laplacian_bounds(alpha: f64, beta: f64, d: usize, seminorm: f64, u: f64) -> Result<HolderBounds> {
    bounds_with(c2(alpha, d)?, d as f64, alpha, beta, seminorm, u)
}

/// Which pairs to probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairPlan {
    /// Random pairs: base point from N(0, base_variance·I), partner at a
    /// log-uniform distance in [min_dist, max_dist] in a uniform direction.
    pub random_pairs: usize,
    pub min_dist: f64,
    pub max_dist: f64,
    pub base_variance: f64,
    /// Diagonal pairs ((u, …, u), 0) with u log-spaced in [min_dist, max_dist/√d].
    pub diagonal_pairs: usize,
    /// β for the β-Hölder bound, as a fraction of α.
    pub beta_fraction: f64,
    /// Slack multiplier on the estimated quadrature error.
    pub slack_factor: f64,
}

impl Default for PairPlan {
    fn default() -> Self {
        Self {
            random_pairs: 200,
            min_dist: 1e-3,
            max_dist: 2.0,
            base_variance: 2.0,
            diagonal_pairs: 0,
            beta_fraction: 0.5,
            slack_factor: 10.0,
        }
    }
}

impl PairPlan {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_dist > 0.0 && self.min_dist < self.max_dist) {
            return Err(domain("requires 0 < min_dist < max_dist"));
        }
        if !(self.base_variance > 0.0) {
            return Err(domain("base_variance must be positive"));
        }
        if !(self.beta_fraction > 0.0 && self.beta_fraction < 1.0) {
            return Err(domain("beta_fraction must lie in (0, 1)"));
        }
        if self.random_pairs + self.diagonal_pairs == 0 {
            return Err(domain("pair plan is empty"));
        }
        Ok(())
    }

    /// The probe points, deterministic in `stream`.
    pub fn pairs(&self, d: usize, stream: Stream) -> Vec<(Vec<f64>, Vec<f64>)> {
        let mut out = Vec::with_capacity(self.random_pairs + self.diagonal_pairs);
        let (lo, hi) = (self.min_dist.ln(), self.max_dist.ln());
        let sd = self.base_variance.sqrt();
        for i in 0..self.random_pairs {
            let mut rng = stream.child(1, i as u32).rng();
            let x: Vec<f64> = (0..d).map(|_| sd * polar_normal(&mut rng)).collect();
            let mut dir: Vec<f64> = (0..d).map(|_| polar_normal(&mut rng)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            dir.iter_mut().for_each(|v| *v /= norm);
            let u = (lo + (hi - lo) * rng.gen::<f64>()).exp();
            let y = x.iter().zip(&dir).map(|(a, b)| a + u * b).collect();
            out.push((x, y));
        }
        let hi_diag = (self.max_dist / (d as f64).sqrt()).ln();
        for k in 0..self.diagonal_pairs {
            let frac = if self.diagonal_pairs == 1 { 0.0 } else { k as f64 / (self.diagonal_pairs - 1) as f64 };
            let u = (lo + (hi_diag - lo) * frac).exp();
            out.push((vec![u; d], vec![0.0; d]));
        }
        out
    }
}

/// One probed pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub dist: f64,
    pub hess_opnorm_diff: f64,
    pub lap_diff: f64,
    /// Difference of the (0, 1) Hessian entries (zero in d = 1).
    pub cross_diff: f64,
    pub bound_hess: HolderBounds,
    pub bound_lap: HolderBounds,
    pub slack_hess: f64,
    pub slack_lap: f64,
}

impl ModulusSample {
    pub fn hess_violations(&self) -> [bool; 3] {
        let b = &self.bound_hess;
        let m = self.hess_opnorm_diff - self.slack_hess;
        [m > b.log_holder, m > b.beta_holder, m > b.one_plus_log]
    }

    pub fn lap_violations(&self) -> [bool; 3] {
        let b = &self.bound_lap;
        let m = self.lap_diff - self.slack_lap;
        [m > b.log_holder, m > b.beta_holder, m > b.one_plus_log]
    }

    pub fn violated(&self) -> bool {
        self.hess_violations().iter().chain(self.lap_violations().iter()).any(|&v| v)
    }
}

/// Evaluates Hessian and Laplacian moduli on every planned pair.
pub fn probe_modulus(s: &SteinSolution, plan: &PairPlan, stream: Stream) -> Result<Vec<ModulusSample>> {
    plan.validate()?;
    let h = s.h();
    let (alpha, seminorm, d) = (h.alpha(), h.holder_seminorm(), h.dim());
    if !seminorm.is_finite() {
        return Err(domain(format!("`{}` has no finite Hölder semi-norm", h.id())));
    }
    let beta = plan.beta_fraction * alpha;
    plan.pairs(d, stream)
        .into_par_iter()
        .map(|(x, y)| {
            let (hx, lx) = s.eval_hessian_and_laplacian(&x)?;
            let (hy, ly) = s.eval_hessian_and_laplacian(&y)?;
            let diff: Vec<f64> = hx.value.iter().zip(&hy.value).map(|(a, b)| a - b).collect();
            let dist = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let cross_diff = if d > 1 { diff[1] } else { 0.0 };
            Ok(ModulusSample {
                hess_opnorm_diff: opnorm(&diff, d)?,
                lap_diff: (lx.value - ly.value).abs(),
                cross_diff,
                bound_hess: hessian_bounds(alpha, beta, d, seminorm, dist)?,
                bound_lap: laplacian_bounds(alpha, beta, d, seminorm, dist)?,
                slack_hess: plan.slack_factor * (hx.error + hy.error),
                slack_lap: plan.slack_factor * (lx.error + ly.error),
                x,
                y,
                dist,
            })
        })
        .collect()
}

/// Hessian-modulus probe (the Laplacian fields are filled as well).
pub fn probe_hessian_modulus(s: &SteinSolution, plan: &PairPlan, stream: Stream) -> Result<Vec<ModulusSample>> {
    probe_modulus(s, plan, stream)
}

/// Laplacian-modulus probe (the Hessian fields are filled as well).
pub fn probe_laplacian_modulus(s: &SteinSolution, plan: &PairPlan, stream: Stream) -> Result<Vec<ModulusSample>> {
    probe_modulus(s, plan, stream)
}

/// Least-squares fit m(u) ≈ a·u + b·u|log u| with the t-statistic of b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFactorFit {
    pub a: f64,
    pub b: f64,
    pub se_b: f64,
    pub t_stat_b: f64,
}

pub fn log_factor_fit(us: &[f64], moduli: &[f64]) -> Result<LogFactorFit> {
    if us.len() != moduli.len() {
        return Err(Error::SizeMismatch(us.len(), moduli.len()));
    }
    if us.len() < 3 {
        return Err(domain("log-factor fit needs at least three points"));
    }
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&u, &m) in us.iter().zip(moduli) {
        let (f1, f2) = (u, u * u.ln().abs());
        s11 += f1 * f1;
        s12 += f1 * f2;
        s22 += f2 * f2;
        r1 += f1 * m;
        r2 += f2 * m;
    }
    let det = s11 * s22 - s12 * s12;
    if !(det.abs() > 0.0) {
        return Err(domain("degenerate design in log-factor fit"));
    }
    let a = (s22 * r1 - s12 * r2) / det;
    let b = (s11 * r2 - s12 * r1) / det;
    let rss: f64 = us
        .iter()
        .zip(moduli)
        .map(|(&u, &m)| {
            let r = m - a * u - b * u * u.ln().abs();
            r * r
        })
        .sum();
    let sigma2 = rss / (us.len() - 2) as f64;
    let se_b = (sigma2 * s11 / det).sqrt();
    Ok(LogFactorFit {
        a,
        b,
        se_b,
        t_stat_b: if se_b > 0.0 { b / se_b } else { f64::INFINITY * b.signum() },
    })
}

/// Pieces of ∂²f/∂x∂y(u, u) − ∂²f/∂x∂y(0, 0) for h(x, y) = max(0, min(x, y)).
///
/// With
///   I₁(u) = ∫₀^{1/u²} √(1 − u²s)/s · e^{−1/s} ds   (≈ −2 log u),
///   I₂(u) = ∫₀^∞ z²/√(u² + z²) · e^{−z²} dz       (→ 1/2),
/// the pieces are first = (e^{u²} u/2)·I₁ and second = (u/2)·I₂, and
///   gap = −(first + 4·second)/(2π) ∼ u log u/(2π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RaicGap {
    pub u: f64,
    pub first: f64,
    pub second: f64,
    pub gap: f64,
    /// Quadrature error bound on `gap`.
    pub error: f64,
}

fn quad_opts(tol: f64) -> AdaptiveOptions {
    AdaptiveOptions {
        rel_tol: tol,
        abs_tol: 1e-300,
        max_intervals: 4000,
    }
}

/// I₁(u) in the variable s = e^v, v ∈ [−6, −2 log u].
fn raic_i1(u: f64, tol: f64) -> Result<(f64, f64)> {
    let vmax = -2.0 * u.ln();
    let breaks: Vec<f64> = (-5..(vmax.ceil() as i64)).map(|k| k as f64).collect();
    let est = adaptive_vec(
        |v, out| {
            let s = v.exp();
            let arg = (1.0 - u * u * s).max(0.0);
            out[0] = arg.sqrt() * (-1.0 / s).exp();
            0.0
        },
        1,
        -6.0,
        vmax,
        &breaks,
        quad_opts(tol),
    );
    if !est.converged {
        return Err(Error::Quadrature(format!("first max-min integral at u = {u}")));
    }
    Ok((est.values[0], est.error))
}

fn raic_i2(u: f64, tol: f64) -> Result<(f64, f64)> {
    let mut breaks = Vec::new();
    let mut b = u;
    while b < 8.0 {
        breaks.push(b);
        b *= 10.0;
    }
    breaks.extend([1.0, 2.0, 4.0]);
    breaks.sort_by(f64::total_cmp);
    let est = adaptive_vec(
        |z, out| {
            out[0] = z * z / (u * u + z * z).sqrt() * (-z * z).exp();
            0.0
        },
        1,
        0.0,
        9.0,
        &breaks,
        quad_opts(tol),
    );
    if !est.converged {
        return Err(Error::Quadrature(format!("second max-min integral at u = {u}")));
    }
    Ok((est.values[0], est.error))
}

/// Cross-partial gap of the max-min example at (u, u) versus the origin,
/// from one-dimensional reduced integrals.
pub fn raic_cross_partial_gap(u: f64, quad_tol: f64) -> Result<RaicGap> {
    if !(u > 0.0 && u <= 0.5) {
        return Err(domain(format!("requires 0 < u <= 0.5, got u = {u}")));
    }
    if !(quad_tol > 0.0 && quad_tol < 1e-2) {
        return Err(domain("quad_tol must lie in (0, 1e-2)"));
    }
    let (i1, e1) = raic_i1(u, quad_tol)?;
    let (i2, e2) = raic_i2(u, quad_tol)?;
    let pref = (u * u).exp() * u / 2.0;
    let first = pref * i1;
    let second = u / 2.0 * i2;
    let two_pi = 2.0 * std::f64::consts::PI;
    Ok(RaicGap {
        u,
        first,
        second,
        gap: -(first + 4.0 * second) / two_pi,
        error: (pref * e1 + 2.0 * u * e2) / two_pi,
    })
}

/// gap(u) against the two candidate leading terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RaicRatio {
    pub u: f64,
    pub gap: f64,
    /// gap / (u log u / √(2π)).
    pub ratio_sqrt_2pi: f64,
    /// gap / (u log u / (2π)).
    pub ratio_2pi: f64,
}

pub fn raic_asymptotic_ratio(u_grid: &[f64], quad_tol: f64) -> Result<Vec<RaicRatio>> {
    u_grid
        .iter()
        .map(|&u| {
            let g = raic_cross_partial_gap(u, quad_tol)?;
            let lead = u * u.ln();
            let two_pi = 2.0 * std::f64::consts::PI;
            Ok(RaicRatio {
                u,
                gap: g.gap,
                ratio_sqrt_2pi: g.gap / (lead / two_pi.sqrt()),
                ratio_2pi: g.gap / (lead / two_pi),
            })
        })
        .collect()
}

/// The same gap from the full two-dimensional solver.
pub fn raic_pipeline_gap(s: &SteinSolution, u: f64) -> Result<(f64, f64)> {
    if s.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: s.dim() });
    }
    let idx = MultiIndex::pair(2, 0, 1);
    let a = s.eval_derivative(&idx, &[u, u])?;
    let b = s.eval_derivative(&idx, &[0.0, 0.0])?;
    Ok((a.value - b.value, a.error + b.error))
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(domain("rank correlation needs at least two points"));
    }
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        let mut k = 0;
        while k < idx.len() {
            let mut end = k;
            while end + 1 < idx.len() && v[idx[end + 1]] == v[idx[k]] {
                end += 1;
            }
            let avg = (k + end) as f64 / 2.0 + 1.0;
            for &i in &idx[k..=end] {
                r[i] = avg;
            }
            k = end + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma) * (x - ma)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb) * (y - mb)).sum();
    Ok(cov / (va * vb).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Largest |root| of the characteristic cubic by the trigonometric method.
    fn cubic_oracle(m: &[f64]) -> f64 {
        let (a, b, c) = (m[0], m[4], m[8]);
        let (d, e, f) = (m[1], m[5], m[2]);
        let p1 = d * d + e * e + f * f;
        let q = (a + b + c) / 3.0;
        let p2 = (a - q).powi(2) + (b - q).powi(2) + (c - q).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let bm = [
            (a - q) / p, d / p, f / p,
            d / p, (b - q) / p, e / p,
            f / p, e / p, (c - q) / p,
        ];
        let det = bm[0] * (bm[4] * bm[8] - bm[5] * bm[7]) - bm[1] * (bm[3] * bm[8] - bm[5] * bm[6])
            + bm[2] * (bm[3] * bm[7] - bm[4] * bm[6]);
        let r = (det / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        let e2 = 3.0 * q - e1 - e3;
        e1.abs().max(e2.abs()).max(e3.abs())
    }

    #[test]
    fn opnorm_examples() {
        let id = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        assert!((opnorm(&id, 3).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(opnorm(&[2.0, 0.0, 0.0, -5.0], 2).unwrap(), 5.0);
        assert!(matches!(opnorm(&[1.0, 2.0, 0.0, 1.0], 2), Err(Error::Asymmetric(_))));
    }

    #[test]
    fn opnorm_matches_cubic_roots() {
        let mut rng = Stream::new(5, 0).rng();
        for _ in 0..200 {
            let v: Vec<f64> = (0..6).map(|_| 4.0 * rng.gen::<f64>() - 2.0).collect();
            let m = [v[0], v[1], v[2], v[1], v[3], v[4], v[2], v[4], v[5]];
            let ours = opnorm(&m, 3).unwrap();
            let oracle = cubic_oracle(&m);
            assert!((ours - oracle).abs() < 1e-9, "{ours} vs {oracle}");
        }
    }

    #[test]
    fn bound_arithmetic() {
        let b = hessian_bounds(1.0, 0.5, 2, 1.0, 0.1).unwrap();
        let expected = 0.1 * (c1(1.0, 2).unwrap() - 2.0 * 0.1f64.ln());
        assert!((b.log_holder - expected).abs() < 1e-12);
        assert!((b.log_holder - 1.087).abs() < 1e-3);
        let far = hessian_bounds(1.0, 0.5, 2, 1.0, 3.0).unwrap();
        assert_eq!(far.log_holder, c1(1.0, 2).unwrap());
        let lap = laplacian_bounds(0.5, 0.25, 2, 1.0, 0.01).unwrap();
        let expected = 0.1 * (c2(0.5, 2).unwrap() - 4.0 * 0.01f64.ln());
        assert!((lap.log_holder - expected).abs() < 1e-12);
        assert!(hessian_bounds(1.0, 1.0, 2, 1.0, 0.1).is_err());
    }

    #[test]
    fn pair_plan_is_deterministic() {
        let plan = PairPlan {
            random_pairs: 20,
            diagonal_pairs: 5,
            ..PairPlan::default()
        };
        let a = plan.pairs(2, Stream::new(1, 9));
        let b = plan.pairs(2, Stream::new(1, 9));
        assert_eq!(a, b);
        for (x, y) in &a[..20] {
            let u = x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
            assert!(u >= 1e-3 * (1.0 - 1e-12) && u <= 2.0 * (1.0 + 1e-12));
        }
        assert_eq!(a[20].1, vec![0.0, 0.0]);
    }

    #[test]
    fn log_fit_recovers_coefficients() {
        let us: Vec<f64> = (0..20).map(|k| 10f64.powf(-3.0 + 2.5 * k as f64 / 19.0)).collect();
        let m: Vec<f64> = us
            .iter()
            .enumerate()
            .map(|(k, &u)| 0.3 * u + 0.16 * u * u.ln().abs() + 1e-7 * if k % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let fit = log_factor_fit(&us, &m).unwrap();
        assert!((fit.a - 0.3).abs() < 1e-3 && (fit.b - 0.16).abs() < 1e-3);
        assert!(fit.t_stat_b > 100.0);
    }

    #[test]
    fn raic_pieces() {
        let g = raic_cross_partial_gap(1e-4, 1e-12).unwrap();
        assert!((g.second / 1e-4 - 0.25).abs() < 1e-3);
        // I₁ ≈ −2 log u − γ + 2 log 2 − 2 for small u.
        let i1 = g.first / ((1e-8f64).exp() * 1e-4 / 2.0);
        let approx = -2.0 * 1e-4f64.ln() - 0.577_215_664_901_532_9 + 2.0 * 2f64.ln() - 2.0;
        assert!((i1 - approx).abs() < 1e-3, "{i1}");
        assert!(raic_cross_partial_gap(0.0, 1e-10).is_err());
        assert!(raic_cross_partial_gap(0.6, 1e-10).is_err());
    }

    #[test]
    fn spearman_basics() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
    }
}
