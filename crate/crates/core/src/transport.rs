//! Exact transport distances between equal-size empirical measures.
//!
//! For two uniform empirical measures with m atoms each, W₁ is the mean cost
//! of a minimum-cost perfect matching. The general solver is a dense
//! shortest-augmenting-path assignment (Jonker–Volgenant family) that keeps
//! dual potentials, so each of the m augmentations is one Dijkstra-like sweep
//! over the columns. In one dimension with a convex cost the sorted matching
//! is optimal and is used instead.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::test_functions::TestFunction;

/// Largest sample size accepted by the exact solvers.
pub const MAX_ATOMS: usize = 10_000;

/// Above this size the cost matrix is evaluated on the fly instead of stored.
const DENSE_LIMIT: usize = 5_000;

/// m points in ℝ^d stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSample {
    data: Vec<f64>,
    d: usize,
}

impl EmpiricalSample {
    pub fn new(data: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(domain("sample dimension must be positive"));
        }
        if data.is_empty() || data.len() % d != 0 {
            return Err(domain(format!(
                "sample buffer of length {} is not a positive multiple of d = {d}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(domain(format!("non-finite entry at point {}", pos / d)));
        }
        Ok(Self { data, d })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: bad.len(),
            });
        }
        Self::new(rows.concat(), d)
    }

    pub fn m(&self) -> usize {
        self.data.len() / self.d
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn translated(&self, v: &[f64]) -> Result<Self> {
        if v.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: v.len(),
            });
        }
        let data = self
            .data
            .chunks_exact(self.d)
            .flat_map(|p| p.iter().zip(v).map(|(a, b)| a + b))
            .collect();
        Self::new(data, self.d)
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.d];
        for p in self.points() {
            for (m, x) in mean.iter_mut().zip(p) {
                *m += x;
            }
        }
        let m = self.m() as f64;
        mean.iter_mut().for_each(|v| *v /= m);
        mean
    }

    /// Second-moment matrix (1/m) Σ x xᵀ, row-major.
    pub fn second_moment(&self) -> Vec<f64> {
        let d = self.d;
        let mut out = vec![0.0; d * d];
        for p in self.points() {
            for r in 0..d {
                for c in 0..d {
                    out[r * d + c] += p[r] * p[c];
                }
            }
        }
        let m = self.m() as f64;
        out.iter_mut().for_each(|v| *v /= m);
        out
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Optimal matching `row -> column` and its total cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub col_for_row: Vec<usize>,
    pub total_cost: f64,
}

/// Minimum-cost perfect matching for the dense m×m cost `cost(i, j)`.
///
/// Ties in the column search are broken by (reduced cost, assigned columns
/// after free ones, column index), so the returned matching is a function of
/// the cost values alone.
pub fn solve_assignment<C: Fn(usize, usize) -> f64>(m: usize, cost: C) -> Result<Assignment> {
    if m == 0 {
        return Err(domain("assignment needs at least one row"));
    }
    const NONE: usize = usize::MAX;
    let mut u = vec![0.0; m];
    let mut v = vec![0.0; m];
    let mut col_for_row = vec![NONE; m];
    let mut row_for_col = vec![NONE; m];
    let mut path = vec![NONE; m];
    let mut spc = vec![f64::INFINITY; m];
    let mut sr = vec![false; m];
    let mut sc = vec![false; m];
    let mut remaining: Vec<usize> = Vec::with_capacity(m);

    for cur_row in 0..m {
        spc.iter_mut().for_each(|s| *s = f64::INFINITY);
        sr.iter_mut().for_each(|s| *s = false);
        sc.iter_mut().for_each(|s| *s = false);
        remaining.clear();
        remaining.extend(0..m);

        let mut min_val = 0.0;
        let mut i = cur_row;
        let sink = loop {
            sr[i] = true;
            let mut best = NONE;
            let mut best_pos = 0;
            let mut lowest = f64::INFINITY;
            for (pos, &j) in remaining.iter().enumerate() {
                let r = min_val + cost(i, j) - u[i] - v[j];
                if r < spc[j] {
                    path[j] = i;
                    spc[j] = r;
                }
                let better = if best == NONE {
                    true
                } else if spc[j] != lowest {
                    spc[j] < lowest
                } else {
                    let free_j = row_for_col[j] == NONE;
                    let free_b = row_for_col[best] == NONE;
                    (free_j && !free_b) || (free_j == free_b && j < best)
                };
                if better {
                    lowest = spc[j];
                    best = j;
                    best_pos = pos;
                }
            }
            if !lowest.is_finite() {
                return Err(Error::Quadrature("assignment cost matrix is not finite".into()));
            }
            min_val = lowest;
            sc[best] = true;
            remaining.swap_remove(best_pos);
            if row_for_col[best] == NONE {
                break best;
            }
            i = row_for_col[best];
        };

        u[cur_row] += min_val;
        for r in 0..m {
            if sr[r] && r != cur_row {
                u[r] += min_val - spc[col_for_row[r]];
            }
        }
        for c in 0..m {
            if sc[c] {
                v[c] -= min_val - spc[c];
            }
        }

        let mut j = sink;
        loop {
            let r = path[j];
            row_for_col[j] = r;
            std::mem::swap(&mut col_for_row[r], &mut j);
            if r == cur_row {
                break;
            }
        }
    }

    let total_cost = col_for_row
        .iter()
        .enumerate()
        .map(|(i, &j)| cost(i, j))
        .sum();
    Ok(Assignment {
        col_for_row,
        total_cost,
    })
}

fn check_pair(a: &EmpiricalSample, b: &EmpiricalSample) -> Result<()> {
    if a.d() != b.d() {
        return Err(Error::DimensionMismatch {
            expected: a.d(),
            got: b.d(),
        });
    }
    if a.m() != b.m() {
        return Err(Error::SizeMismatch(a.m(), b.m()));
    }
    if a.m() > MAX_ATOMS {
        return Err(Error::GuardExceeded {
            size: a.m(),
            limit: MAX_ATOMS,
        });
    }
    Ok(())
}

/// Optimal matching between `a` and `b` for the ground cost |x − y|^p.
pub fn optimal_matching(a: &EmpiricalSample, b: &EmpiricalSample, p: f64) -> Result<Assignment> {
    check_pair(a, b)?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(domain(format!("cost exponent must lie in (0, 1], got {p}")));
    }
    let m = a.m();
    let ground = |x: &[f64], y: &[f64]| {
        let r = euclid(x, y);
        if p == 1.0 {
            r
        } else {
            r.powf(p)
        }
    };
    if m <= DENSE_LIMIT {
        let mut c = Vec::with_capacity(m * m);
        for i in 0..m {
            let x = a.point(i);
            c.extend((0..m).map(|j| ground(x, b.point(j))));
        }
        solve_assignment(m, |i, j| c[i * m + j])
    } else {
        solve_assignment(m, |i, j| ground(a.point(i), b.point(j)))
    }
}

/// Sorted matching, optimal in one dimension for |x − y|.
fn w1_sorted(a: &EmpiricalSample, b: &EmpiricalSample) -> f64 {
    let mut xs = a.as_slice().to_vec();
    let mut ys = b.as_slice().to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    xs.iter().zip(&ys).map(|(x, y)| (x - y).abs()).sum::<f64>() / xs.len() as f64
}

/// W₁ between two equal-size uniform empirical measures.
pub fn w1_exact(a: &EmpiricalSample, b: &EmpiricalSample) -> Result<f64> {
    check_pair(a, b)?;
    if a.d() == 1 {
        return Ok(w1_sorted(a, b));
    }
    Ok(optimal_matching(a, b, 1.0)?.total_cost / a.m() as f64)
}

/// Optimal mean cost for the ground cost |x − y|^α, α ∈ (0, 1]; the
/// transport distance dual to α-Hölder test functions.
pub fn w_alpha_exact(a: &EmpiricalSample, b: &EmpiricalSample, alpha: f64) -> Result<f64> {
    if alpha == 1.0 {
        return w1_exact(a, b);
    }
    Ok(optimal_matching(a, b, alpha)?.total_cost / a.m() as f64)
}

/// Mean of a 1-Lipschitz witness over `a` minus its mean over `b`, a lower
/// bound on W₁(a, b) by duality.
pub fn w1_dual_lower_bound(
    a: &EmpiricalSample,
    b: &EmpiricalSample,
    witness: &TestFunction,
) -> Result<f64> {
    if a.d() != b.d() {
        return Err(Error::DimensionMismatch {
            expected: a.d(),
            got: b.d(),
        });
    }
    if witness.dim() != a.d() {
        return Err(Error::DimensionMismatch {
            expected: a.d(),
            got: witness.dim(),
        });
    }
    if witness.alpha() != 1.0 || witness.holder_seminorm() > 1.0 + 1e-12 {
        return Err(domain(format!(
            "witness `{}` is not certified 1-Lipschitz (alpha = {}, seminorm = {})",
            witness.id(),
            witness.alpha(),
            witness.holder_seminorm()
        )));
    }
    let mean = |s: &EmpiricalSample| s.points().map(|p| witness.eval(p)).sum::<f64>() / s.m() as f64;
    Ok(mean(a) - mean(b))
}
