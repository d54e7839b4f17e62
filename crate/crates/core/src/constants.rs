//! Explicit regularity constants and Wasserstein Berry–Esseen bounds.
//!
//! With G(α, d) = Γ((α + d)/2) / Γ(d/2):
//!
//! | constant | value |
//! |---|---|
//! | C₁(α, d) | 2^{α/2+1} (α + 2d)/(α d) · G |
//! | C₂(α, d), α < 1 | 2^{α/2+1} (α + 2d)/α · G |
//! | C₂(1, d) | 2 √(2/π) √d |
//! | C(d) | C₁(1, d) + C₂(1, d) |
//! | A(α, d) | 2^{α/2+1} (α + d + 1)/α · G |
//! | centered C(α, d) | 2^{α/2} (α + 2d)/d · G = (1/d) E[(|Z|² + d)|Z|^α] |

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::gaussian::Estimate;
use crate::special::gamma_ratio;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(domain(format!("requires 0 < alpha <= 1, got alpha = {alpha}")));
    }
    Ok(())
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(domain("requires d >= 1"));
    }
    Ok(())
}

fn g_ratio(alpha: f64, d: usize) -> Result<f64> {
    let d = d as f64;
    gamma_ratio((alpha + d) / 2.0, d / 2.0)
}

/// Hölder constant of the Hessian of the Stein solution.
pub fn c1(alpha: f64, d: usize) -> Result<f64> {
    check_alpha(alpha)?;
    check_dim(d)?;
    let df = d as f64;
    Ok(2f64.powf(alpha / 2.0 + 1.0) * (alpha + 2.0 * df) / (alpha * df) * g_ratio(alpha, d)?)
}

/// Hölder constant of the Laplacian of the Stein solution; the Lipschitz
/// case has the sharper value 2√(2/π)√d.
pub fn c2(alpha: f64, d: usize) -> Result<f64> {
    check_alpha(alpha)?;
    check_dim(d)?;
    if alpha == 1.0 {
        return Ok(2.0 * (2.0 / std::f64::consts::PI).sqrt() * (d as f64).sqrt());
    }
    let df = d as f64;
    Ok(2f64.powf(alpha / 2.0 + 1.0) * (alpha + 2.0 * df) / alpha * g_ratio(alpha, d)?)
}

/// C(d) = C₁(1, d) + C₂(1, d), the constant of the third-moment bound.
pub fn cor_constant(d: usize) -> Result<f64> {
    Ok(c1(1.0, d)? + c2(1.0, d)?)
}

/// Constant A(α, d) for derivatives of order ≥ 3 of the solution of a
/// smoother target.
pub fn higher_order_constant(alpha: f64, d: usize) -> Result<f64> {
    check_alpha(alpha)?;
    check_dim(d)?;
    let df = d as f64;
    Ok(2f64.powf(alpha / 2.0 + 1.0) * (alpha + df + 1.0) / alpha * g_ratio(alpha, d)?)
}

/// (1/d) E[(|Z|² + d)|Z|^α]; C₁ = 2C/α.
pub fn centered_moment_constant(alpha: f64, d: usize) -> Result<f64> {
    check_alpha(alpha)?;
    check_dim(d)?;
    let df = d as f64;
    Ok(2f64.powf(alpha / 2.0) * (alpha + 2.0 * df) / df * g_ratio(alpha, d)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Lipschitz test functions, 2 + δ moments:
    /// n^{−δ/2}[(K₁ + 2/(1−δ)) E|X|^{2+δ} + (K₂ + 2d/(1−δ)) E|X|^δ].
    ThmMain,
    /// α-Hölder test functions, 2 + δ moments with δ < α:
    /// n^{−δ/2}[(C₁ + 2/(α−δ)) E|X|^{2+δ} + (C₂ + 2d/(α−δ)) E|X|^δ].
    ThmMain2,
    /// Third moments: e(C(d) + 2(1+d) log n)/√n · E|X|³, stated for n ≥ 3.
    CorMain,
    /// 2 + α moments: e(C₁ + C₂ + 2(1+d) log n)/n^{α/2} · E|X|^{2+α}, n > e^{2/α}.
    Cor1,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::ThmMain => "thm_main",
            Self::ThmMain2 => "thm_main2",
            Self::CorMain => "cor_main",
            Self::Cor1 => "cor_1",
        }
    }

    /// Moment orders p for which E|X|^p enters the bound.
    pub fn moment_orders(self, alpha: f64, delta: f64) -> Vec<f64> {
        match self {
            Self::ThmMain | Self::ThmMain2 => vec![2.0 + delta, delta],
            Self::CorMain => vec![3.0],
            Self::Cor1 => vec![2.0 + alpha],
        }
    }
}

impl std::str::FromStr for BoundKind {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thm_main" => Ok(Self::ThmMain),
            "thm_main2" => Ok(Self::ThmMain2),
            "cor_main" => Ok(Self::CorMain),
            "cor_1" => Ok(Self::Cor1),
            other => Err(domain(format!("unknown bound kind `{other}`"))),
        }
    }
}

/// Evaluated constants and bound for one (kind, α, δ, d, n, moments) tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub alpha: f64,
    pub delta: f64,
    pub d: usize,
    pub n: u64,
    pub c1: f64,
    pub c2: f64,
    pub c_cor: f64,
    pub a_const: f64,
    pub moment_2_plus_delta: Option<Estimate>,
    pub moment_delta: Option<Estimate>,
    pub moment_3: Option<Estimate>,
    pub bound_value: f64,
    /// Standard error of the bound induced by estimated moments.
    pub bound_std_error: f64,
    /// False when n satisfies the stated hypothesis but not the one the
    /// proof route needs (third-moment bound with n < e²).
    pub within_proof_domain: bool,
}

/// Assembles the bound of the given kind. `moment(p)` supplies E|X|^p.
pub fn berry_esseen_bound<M>(kind: BoundKind, alpha: f64, delta: f64, d: usize, n: u64, mut moment: M) -> Result<BoundReport>
where
    M: FnMut(f64) -> Result<Estimate>,
{
    check_dim(d)?;
    if n == 0 {
        return Err(domain("requires n >= 1"));
    }
    let nf = n as f64;
    let df = d as f64;
    let e = std::f64::consts::E;
    let alpha = match kind {
        BoundKind::ThmMain | BoundKind::CorMain => {
            if alpha != 1.0 {
                return Err(domain(format!("{} requires alpha = 1, got alpha = {alpha}", kind.name())));
            }
            1.0
        }
        _ => {
            check_alpha(alpha)?;
            alpha
        }
    };
    let c1v = c1(alpha, d)?;
    let c2v = c2(alpha, d)?;
    let mut report = BoundReport {
        kind,
        alpha,
        delta,
        d,
        n,
        c1: c1v,
        c2: c2v,
        c_cor: cor_constant(d)?,
        a_const: higher_order_constant(alpha, d)?,
        moment_2_plus_delta: None,
        moment_delta: None,
        moment_3: None,
        bound_value: 0.0,
        bound_std_error: 0.0,
        within_proof_domain: true,
    };
    match kind {
        BoundKind::ThmMain | BoundKind::ThmMain2 => {
            if !(delta > 0.0) {
                return Err(domain(format!("requires delta > 0, got delta = {delta}")));
            }
            if !(delta < alpha) {
                return Err(domain(format!(
                    "requires delta < alpha (got delta = {delta}, alpha = {alpha})"
                )));
            }
            let gap = alpha - delta;
            let m_hi = moment(2.0 + delta)?;
            let m_lo = moment(delta)?;
            let scale = nf.powf(-delta / 2.0);
            let a = c1v + 2.0 / gap;
            let b = c2v + 2.0 * df / gap;
            report.bound_value = scale * (a * m_hi.value + b * m_lo.value);
            report.bound_std_error = scale * (a * m_hi.std_error + b * m_lo.std_error);
            report.moment_2_plus_delta = Some(m_hi);
            report.moment_delta = Some(m_lo);
        }
        BoundKind::CorMain => {
            if n < 3 {
                return Err(domain(format!("requires n >= 3, got n = {n}")));
            }
            report.within_proof_domain = nf > e * e;
            let m3 = moment(3.0)?;
            let coef = e * (report.c_cor + 2.0 * (1.0 + df) * nf.ln()) / nf.sqrt();
            report.bound_value = coef * m3.value;
            report.bound_std_error = coef * m3.std_error;
            report.moment_3 = Some(m3);
        }
        BoundKind::Cor1 => {
            let threshold = (2.0 / alpha).exp();
            if !(nf > threshold) {
                return Err(domain(format!(
                    "requires n > exp(2/alpha) = {threshold:.4} (got n = {n})"
                )));
            }
            let m = moment(2.0 + alpha)?;
            let coef = e * (c1v + c2v + 2.0 * (1.0 + df) * nf.ln()) / nf.powf(alpha / 2.0);
            report.delta = alpha;
            report.bound_value = coef * m.value;
            report.bound_std_error = coef * m.std_error;
            report.moment_2_plus_delta = Some(m);
        }
    }
    if !report.bound_value.is_finite() {
        return Err(domain("bound is not finite"));
    }
    Ok(report)
}
