//! Gamma function, probabilists' Hermite polynomials and multi-indices.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Largest argument for which `gamma` is evaluated directly before switching
/// to the logarithmic form in ratios.
const DIRECT_GAMMA_LIMIT: f64 = 150.0;

fn lanczos_sum(z: f64) -> f64 {
    let mut acc = LANCZOS_COEFFS[0];
    for (k, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + k as f64);
    }
    acc
}

/// Γ(x) for x > 0 (Lanczos approximation, g = 7).
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("gamma requires a positive finite argument, got {x}")));
    }
    if x < 0.5 {
        // Γ(x) = Γ(x + 1) / x keeps the series in its accurate range.
        return Ok(gamma(x + 1.0)? / x);
    }
    if x.fract() == 0.0 && x <= 24.0 {
        // (x-1)! is exactly representable here.
        return Ok((1..x as u64).map(|k| k as f64).product());
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok((2.0 * std::f64::consts::PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z))
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("ln_gamma requires a positive finite argument, got {x}")));
    }
    if x < 0.5 {
        return Ok(ln_gamma(x + 1.0)? - x.ln());
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(LN_SQRT_2PI + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

/// Γ(a) / Γ(b) without overflow for large arguments.
pub fn gamma_ratio(a: f64, b: f64) -> Result<f64> {
    if a < DIRECT_GAMMA_LIMIT && b < DIRECT_GAMMA_LIMIT {
        Ok(gamma(a)? / gamma(b)?)
    } else {
        Ok((ln_gamma(a)? - ln_gamma(b)?).exp())
    }
}

/// He_n(x) by the three-term recurrence.
pub fn hermite_he(n: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = x;
    for k in 1..n {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Fills `out[k] = He_k(x)` for `k < out.len()`.
pub fn hermite_he_all(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for k in 2..out.len() {
        out[k] = x * out[k - 1] - (k - 1) as f64 * out[k - 2];
    }
}

/// Exponent vector indexing multivariate Hermite polynomials and partial
/// derivatives.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(domain("multi-index must have length at least 1"));
        }
        Ok(Self(exponents))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0; dim.max(1)])
    }

    /// e_i.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] += 1;
        Self(e)
    }

    /// e_i + e_j.
    pub fn pair(dim: usize, i: usize, j: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] += 1;
        e[j] += 1;
        Self(e)
    }

    /// Builds the index of ∂_{i_1} ⋯ ∂_{i_k} from a list of coordinates.
    pub fn from_coordinates(dim: usize, coords: &[usize]) -> Result<Self> {
        let mut e = vec![0; dim];
        for &c in coords {
            if c >= dim {
                return Err(domain(format!("coordinate {c} out of range for dimension {dim}")));
            }
            e[c] += 1;
        }
        Self::new(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// |i| = i_1 + … + i_d.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn max_exponent(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// Coordinates repeated by multiplicity, e.g. (2,0,1) -> [0,0,2].
    pub fn coordinates(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(i, &k)| std::iter::repeat(i).take(k as usize))
            .collect()
    }

    /// Index with one unit removed from coordinate `i`.
    pub fn lowered(&self, i: usize) -> Option<Self> {
        if self.0.get(i).copied().unwrap_or(0) == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[i] -= 1;
        Some(Self(e))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// H_i(z) = ∏_k He_{i_k}(z_k).
pub fn hermite(idx: &MultiIndex, z: &[f64]) -> Result<f64> {
    if idx.dim() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: idx.dim(),
            got: z.len(),
        });
    }
    Ok(idx
        .exponents()
        .iter()
        .zip(z)
        .map(|(&n, &x)| hermite_he(n as usize, x))
        .product())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_reference_values() {
        assert_eq!(gamma(1.0).unwrap(), 1.0);
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((gamma(0.5).unwrap() - 1.772_453_850_905_516).abs() < 1e-13 * sqrt_pi);
        assert!((gamma(2.5).unwrap() - 1.329_340_388_179_137).abs() < 1e-13 * 1.33);
        assert!((gamma(5.0).unwrap() - 24.0).abs() < 24.0 * 1e-13);
    }

    #[test]
    fn gamma_rejects_non_positive() {
        assert!(gamma(0.0).is_err());
        assert!(gamma(-1.5).is_err());
        assert!(gamma(f64::NAN).is_err());
        assert!(ln_gamma(0.0).is_err());
    }

    #[test]
    fn gamma_recurrence_holds() {
        for k in 1..200 {
            let x = 0.013 + k as f64 * 0.071;
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs(), "x={x}");
        }
    }

    // Reference values from a 30-digit evaluation.
    const GAMMA_TABLE: [(f64, f64); 18] = [
        (0.01, 99.4325851191506016),
        (0.1, 9.51350769866873129),
        (0.25, 3.62560990822190831),
        (0.3, 2.99156898768759074),
        (0.5, 1.77245385090551603),
        (0.75, 1.22541670246517765),
        (1.25, 0.906402477055477078),
        (1.5, 0.886226925452758014),
        (2.15, 1.07299707077360384),
        (3.3, 2.6834373819557683),
        (4.5, 11.6317283965674489),
        (7.77, 3181.54353098902494),
        (10.5, 1133278.38894878557),
        (12.15, 57637302.3360397952),
        (25.25, 1.38215491383739691e+24),
        (50.5, 4.29046291235195981e+63),
        (101.3, 3.72261631278422463e+158),
        (140.7, 3.05454137932459423e+240),
    ];

    #[test]
    fn gamma_matches_high_precision_table() {
        for &(x, want) in &GAMMA_TABLE {
            let got = gamma(x).unwrap();
            assert!((got - want).abs() <= 1e-13 * want, "x={x}: {got} vs {want}");
            let lg = ln_gamma(x).unwrap();
            assert!((lg - want.ln()).abs() <= 1e-13 * want.ln().abs().max(1.0), "x={x}");
        }
    }

    #[test]
    fn gamma_agrees_with_statrs() {
        // statrs is only accurate to ~1e-12 relative at moderate arguments.
        for k in 1..400 {
            let x = k as f64 * 0.05;
            let ours = gamma(x).unwrap();
            let theirs = statrs::function::gamma::gamma(x);
            assert!((ours - theirs).abs() <= 1e-11 * theirs.abs(), "x={x}: {ours} vs {theirs}");
        }
    }

    #[test]
    fn gamma_ratio_large_arguments() {
        // Γ(n + 1/2)/Γ(n) ~ √n (1 - 1/(8n)).
        let n = 512.0;
        let r = gamma_ratio(n + 0.5, n).unwrap();
        let approx = n.sqrt() * (1.0 - 1.0 / (8.0 * n) + 1.0 / (128.0 * n * n));
        assert!((r - approx).abs() / approx < 1e-9);
        assert!((gamma_ratio(3.5, 2.0).unwrap() - gamma(3.5).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn hermite_low_orders() {
        let z = [3.7, -1.2];
        assert_eq!(hermite(&MultiIndex::zeros(2), &z).unwrap(), 1.0);
        let x = [0.8, -1.3];
        let h20 = hermite(&MultiIndex::new(vec![2, 0]).unwrap(), &x).unwrap();
        assert!((h20 - (0.8f64 * 0.8 - 1.0)).abs() < 1e-15);
        let h11 = hermite(&MultiIndex::new(vec![1, 1]).unwrap(), &x).unwrap();
        assert!((h11 - 0.8 * -1.3).abs() < 1e-15);
        assert!(hermite(&MultiIndex::zeros(3), &x).is_err());
    }

    #[test]
    fn hermite_recurrence_consistency() {
        let mut buf = [0.0; 12];
        for k in 0..=200 {
            let x = -5.0 + k as f64 * 0.05;
            hermite_he_all(x, &mut buf);
            for n in 1..11 {
                let lhs = buf[n + 1];
                let rhs = x * buf[n] - n as f64 * buf[n - 1];
                assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
                assert!((hermite_he(n, x) - buf[n]).abs() <= 1e-12 * (1.0 + buf[n].abs()));
            }
        }
    }

    #[test]
    fn hermite_matches_explicit_polynomials() {
        for &x in &[-2.0, -0.3, 0.0, 1.1, 2.5] {
            let x: f64 = x;
            assert!((hermite_he(3, x) - (x.powi(3) - 3.0 * x)).abs() < 1e-12);
            assert!((hermite_he(4, x) - (x.powi(4) - 6.0 * x * x + 3.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn multi_index_helpers() {
        let idx = MultiIndex::new(vec![2, 0, 1]).unwrap();
        assert_eq!(idx.order(), 3);
        assert_eq!(idx.coordinates(), vec![0, 0, 2]);
        assert_eq!(idx.lowered(2).unwrap().exponents(), &[2, 0, 0]);
        assert!(idx.lowered(1).is_none());
        assert_eq!(MultiIndex::pair(2, 0, 0).exponents(), &[2, 0]);
        assert_eq!(MultiIndex::from_coordinates(3, &[2, 0, 2]).unwrap().exponents(), &[1, 0, 2]);
        assert!(MultiIndex::from_coordinates(2, &[2]).is_err());
        assert!(MultiIndex::new(vec![]).is_err());
        assert_eq!(idx.to_string(), "(2,0,1)");
    }
}
