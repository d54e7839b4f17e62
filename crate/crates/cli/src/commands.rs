use std::path::Path;

use serde_json::json;
use steinlab::clt::{run_experiment, CltExperiment};
use steinlab::constants::{centered_moment_constant, higher_order_constant};
use steinlab::regularity::{probe_modulus, raic_asymptotic_ratio, raic_pipeline_gap, PairPlan};
use steinlab::transport::w_alpha_exact;
use steinlab::{
    builtin, builtin_source, c1, c2, cor_constant, EmpiricalSample, ExpectationMethod, ExpectationSpec, SteinConfig,
    SteinSolution, Stream,
};

use crate::args::{
    CltArgs, ConstantsArgs, HolderProbeArgs, JsonArg, PointList, RaicArgs, ResidualArgs, SolveArgs, W1Args,
};
use crate::error::CliError;
use crate::output::{Cell, Outcome};

fn require_seed(seed: Option<u64>, cmd: &str) -> Result<u64, CliError> {
    seed.ok_or_else(|| CliError::Validation(format!("`{cmd}` is stochastic and needs --seed")))
}

fn solution(function: &str, params: &JsonArg, d: usize, rel_tol: Option<f64>) -> Result<SteinSolution, CliError> {
    let h = builtin(function, d, &params.0)?;
    let mut config = SteinConfig::default_for(&h);
    if let Some(tol) = rel_tol {
        if config.expectation.method != ExpectationMethod::Adaptive {
            return Err(CliError::Validation(format!(
                "rel_tol applies to the adaptive expectation only; `{function}` in d = {d} uses {:?}",
                config.expectation.method
            )));
        }
        config.expectation = ExpectationSpec::adaptive(d, tol);
    }
    Ok(SteinSolution::new(h, config)?)
}

fn check_points(points: &PointList, d: usize) -> Result<(), CliError> {
    if points.0.is_empty() {
        return Err(CliError::Validation("points: at least one point is required".into()));
    }
    for (i, p) in points.0.iter().enumerate() {
        if p.len() != d {
            return Err(CliError::Validation(format!("points[{i}]: expected {d} coordinates, got {}", p.len())));
        }
    }
    Ok(())
}

fn coord_columns(prefix: &str, d: usize) -> Vec<String> {
    (0..d).map(|i| format!("{prefix}{i}")).collect()
}

pub fn constants(a: &ConstantsArgs) -> Result<Outcome, CliError> {
    if a.d.0.is_empty() {
        return Err(CliError::Validation("d: empty dimension list".into()));
    }
    let mut out = Outcome::new(&["d", "alpha", "c1", "c2", "cor_constant", "higher_order_constant", "centered_moment_constant"]);
    for &d in &a.d.0 {
        out.push(vec![
            d.into(),
            a.alpha.into(),
            c1(a.alpha, d)?.into(),
            c2(a.alpha, d)?.into(),
            cor_constant(d)?.into(),
            higher_order_constant(a.alpha, d)?.into(),
            centered_moment_constant(a.alpha, d)?.into(),
        ]);
    }
    out.summary = format!("constants: {} dimensions at alpha = {}", a.d.0.len(), a.alpha);
    Ok(out)
}

pub fn solve(a: &SolveArgs) -> Result<Outcome, CliError> {
    check_points(&a.points, a.d)?;
    let s = solution(&a.function, &a.params, a.d, a.rel_tol)?;
    let mut cols = coord_columns("x", a.d);
    cols.extend(["f".into(), "f_error".into()]);
    cols.extend(coord_columns("grad", a.d));
    cols.extend(["grad_error".into(), "laplacian".into(), "laplacian_error".into()]);
    let mut out = Outcome::with_columns(cols);
    for x in &a.points.0 {
        let f = s.eval_f(x)?;
        let g = s.eval_gradient(x)?;
        let l = s.eval_laplacian(x)?;
        let mut row: Vec<Cell> = x.iter().map(|&v| v.into()).collect();
        row.extend([f.value.into(), f.error.into()]);
        row.extend(g.value.iter().map(|&v| Cell::from(v)));
        row.extend([g.error.into(), l.value.into(), l.error.into()]);
        out.push(row);
    }
    out.summary = format!("solve: {} points for `{}` in d = {}", a.points.0.len(), a.function, a.d);
    Ok(out)
}

pub fn residual(a: &ResidualArgs, seed: Option<u64>) -> Result<Outcome, CliError> {
    let points = match &a.points {
        Some(p) => p.clone(),
        None => {
            let seed = require_seed(seed, "residual")?;
            if a.count == 0 {
                return Err(CliError::Validation("count: must be at least 1".into()));
            }
            let root = Stream::new(seed, 0);
            PointList(
                (0..a.count)
                    .map(|k| {
                        let mut rng = root.child(1, k as u32).rng();
                        (0..a.d).map(|_| steinlab::rng::polar_normal(&mut rng)).collect()
                    })
                    .collect(),
            )
        }
    };
    check_points(&points, a.d)?;
    if let Some(tol) = a.tol {
        if !(tol > 0.0) {
            return Err(CliError::Validation("tol: must be positive".into()));
        }
    }
    let s = solution(&a.function, &a.params, a.d, a.rel_tol)?;
    let mut cols = coord_columns("x", a.d);
    cols.extend(["residual".into(), "error".into()]);
    let mut out = Outcome::with_columns(cols);
    let mut worst: f64 = 0.0;
    for x in &points.0 {
        let r = s.residual(x)?;
        worst = worst.max(r.value.abs());
        let mut row: Vec<Cell> = x.iter().map(|&v| v.into()).collect();
        row.extend([r.value.into(), r.error.into()]);
        out.push(row);
    }
    out.violation = a.tol.is_some_and(|t| worst > t);
    out.extra = json!({ "max_abs_residual": worst, "tol": a.tol });
    out.summary = format!("residual: {} points, max |residual| = {worst:e}", points.0.len());
    Ok(out)
}

pub fn holder_probe(a: &HolderProbeArgs, seed: Option<u64>) -> Result<Outcome, CliError> {
    let seed = require_seed(seed, "holder-probe")?;
    let tol = a.rel_tol.unwrap_or(a.probe_tol);
    let h = builtin(&a.function, a.d, &a.params.0)?;
    let mut config = SteinConfig::default_for(&h);
    if config.expectation.method == ExpectationMethod::Adaptive {
        config.expectation = ExpectationSpec::adaptive(a.d, tol);
    }
    let s = SteinSolution::new(h, config)?;
    let plan = PairPlan {
        random_pairs: a.pairs,
        min_dist: a.min_dist,
        max_dist: a.max_dist,
        base_variance: 2.0,
        diagonal_pairs: a.diagonal,
        beta_fraction: a.beta_fraction,
        slack_factor: a.slack_factor,
    };
    let samples = probe_modulus(&s, &plan, Stream::new(seed, 0))?;
    let mut cols = coord_columns("x", a.d);
    cols.extend(coord_columns("y", a.d));
    for c in [
        "dist",
        "hess_opnorm_diff",
        "hess_bound_log",
        "hess_bound_beta",
        "hess_bound_one_plus_log",
        "slack_hess",
        "lap_diff",
        "lap_bound_log",
        "lap_bound_beta",
        "lap_bound_one_plus_log",
        "slack_lap",
        "violated",
    ] {
        cols.push(c.into());
    }
    let mut out = Outcome::with_columns(cols);
    let mut violations = [0usize; 6];
    for m in &samples {
        for (k, v) in m.hess_violations().iter().chain(m.lap_violations().iter()).enumerate() {
            violations[k] += *v as usize;
        }
        let mut row: Vec<Cell> = m.x.iter().chain(&m.y).map(|&v| v.into()).collect();
        row.extend([
            m.dist.into(),
            m.hess_opnorm_diff.into(),
            m.bound_hess.log_holder.into(),
            m.bound_hess.beta_holder.into(),
            m.bound_hess.one_plus_log.into(),
            m.slack_hess.into(),
            m.lap_diff.into(),
            m.bound_lap.log_holder.into(),
            m.bound_lap.beta_holder.into(),
            m.bound_lap.one_plus_log.into(),
            m.slack_lap.into(),
            m.violated().into(),
        ]);
        out.push(row);
    }
    let total: usize = violations.iter().sum();
    out.violation = total > 0;
    out.extra = json!({
        "pairs": samples.len(),
        "violations": {
            "hess_log": violations[0], "hess_beta": violations[1], "hess_one_plus_log": violations[2],
            "lap_log": violations[3], "lap_beta": violations[4], "lap_one_plus_log": violations[5],
        },
    });
    out.summary = format!("holder-probe: {} pairs for `{}`, {total} bound violations", samples.len(), a.function);
    Ok(out)
}

pub fn raic(a: &RaicArgs) -> Result<Outcome, CliError> {
    if a.u_grid.0.is_empty() {
        return Err(CliError::Validation("u_grid: empty".into()));
    }
    let mut out = Outcome::new(&["method", "u", "gap", "error", "ratio_sqrt_2pi", "ratio_2pi"]);
    let ratios = raic_asymptotic_ratio(&a.u_grid.0, a.tol)?;
    for r in &ratios {
        let g = steinlab::raic_cross_partial_gap(r.u, a.tol)?;
        out.push(vec![
            "reduced".into(),
            r.u.into(),
            r.gap.into(),
            g.error.into(),
            r.ratio_sqrt_2pi.into(),
            r.ratio_2pi.into(),
        ]);
    }
    if let Some(us) = &a.pipeline_u {
        let h = builtin("raic", 2, &serde_json::Value::Null)?;
        let s = SteinSolution::with_defaults(h)?;
        for &u in &us.0 {
            if !(u > 0.0) {
                return Err(CliError::Validation(format!("pipeline_u: {u} is not positive")));
            }
            let (gap, err) = raic_pipeline_gap(&s, u)?;
            let lead = u * u.ln();
            let two_pi = 2.0 * std::f64::consts::PI;
            out.push(vec![
                "pipeline".into(),
                u.into(),
                gap.into(),
                err.into(),
                (gap / (lead / two_pi.sqrt())).into(),
                (gap / (lead / two_pi)).into(),
            ]);
        }
    }
    let last = ratios.last().expect("non-empty grid");
    out.summary = format!(
        "raic: u = {:e}: gap/(u log u/sqrt(2pi)) = {:.4}, gap/(u log u/(2pi)) = {:.4}",
        last.u, last.ratio_sqrt_2pi, last.ratio_2pi
    );
    Ok(out)
}

fn read_points(path: &Path) -> Result<EmpiricalSample, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let parsed: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => rows.push(v),
            // A non-numeric first line is a header.
            Err(_) if i == 0 => continue,
            Err(e) => {
                return Err(CliError::Validation(format!("{} line {}: {e}", path.display(), i + 1)));
            }
        }
    }
    if rows.is_empty() {
        return Err(CliError::Validation(format!("{}: no points", path.display())));
    }
    Ok(EmpiricalSample::from_rows(&rows)?)
}

pub fn w1(a: &W1Args) -> Result<Outcome, CliError> {
    let x = read_points(&a.a)?;
    let y = read_points(&a.b)?;
    let w = w_alpha_exact(&x, &y, a.alpha)?;
    let mut out = Outcome::new(&["m", "d", "alpha", "distance"]);
    out.push(vec![x.m().into(), x.d().into(), a.alpha.into(), w.into()]);
    out.summary = format!("w1: m = {}, d = {}, distance = {w}", x.m(), x.d());
    Ok(out)
}

pub fn clt(a: &CltArgs, seed: Option<u64>) -> Result<Outcome, CliError> {
    let params = match a.a {
        Some(v) => json!({ "a": v }),
        None => serde_json::Value::Null,
    };
    let source = builtin_source(&a.source, a.d, &params)?;
    let seed = require_seed(seed, "clt")?;
    let e = CltExperiment {
        source: source.spec().clone(),
        d: a.d,
        n_grid: a.n_grid.0.clone(),
        m: a.m,
        replications: a.reps,
        alpha: a.alpha,
        bounds: a.bound.iter().map(|b| b.0).collect(),
        seed,
    };
    let table = run_experiment(&e)?;
    let mut out = Outcome::new(&[
        "source", "d", "n", "rep", "m", "w1_hat", "floor", "bound_kind", "delta", "bound_value", "satisfied",
    ]);
    for r in &table.rows {
        out.push(vec![
            r.source.clone().into(),
            r.d.into(),
            r.n.into(),
            r.rep.into(),
            r.m.into(),
            r.w1_hat.into(),
            r.floor.into(),
            r.bound_kind.clone().into(),
            r.delta.into(),
            r.bound_value.into(),
            r.satisfied.into(),
        ]);
    }
    let failed = table.summary.iter().filter(|s| !s.satisfied).count();
    out.violation = failed > 0;
    out.extra = json!({
        "rate_table": table.summary,
        "mean_w": table.mean_w,
        "std_error_w": table.std_error_w,
        "floors": table.floors,
        "slope_linear": table.slope_linear,
        "slope_quadrature": table.slope_quadrature,
    });
    out.summary = format!(
        "clt: {} d = {}, {} rows, {} of {} summary rows violate the bound, slope (quadrature floor correction) = {}",
        table.source,
        table.d,
        table.rows.len(),
        failed,
        table.summary.len(),
        table.slope_quadrature.map_or("n/a".to_string(), |s| format!("{s:.3}")),
    );
    Ok(out)
}
