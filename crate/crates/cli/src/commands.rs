use std::io::Write;
use std::path::Path;
use std::time::Instant;

use point_stability_core::kernels::{
    analytic_bound, analytic_bound_beta, analytic_bound_threshold, energy_lower_bound,
};
use point_stability_core::optimize::{self, critical_mass, lambda_beta, LambdaResult};
use point_stability_core::validate::{
    angular_consistency, argmax_neighbourhood_probe, mc_unreduced_probe, orientation_check, trial_inequality_thm1,
    trial_inequality_thm2, ANGULAR_TOL, ORIENTATION_TOL, PROBE_ABS_TOL, PROBE_REL_TOL, TRIAL_TOL,
};
use point_stability_core::{Beta, MassRatio, ProbeReport, QuadratureSpec};
use serde::Serialize;
use serde_json::json;

use crate::args::{Cli, Command, Format, Suite, Tolerances};
use crate::output::{self, linear_grid, log_grid, to_value, OutputRecord};
use crate::{CliError, CliResult};

type Sink<'a> = &'a mut (dyn Write + Send);

/// Gaussian widths of the trial-function suites.
pub const TRIAL_WIDTHS: [f64; 5] = [0.1, 0.3, 1.0, 3.0, 10.0];
/// Spectral parameters of the trial-function suites.
pub const TRIAL_MUS: [f64; 3] = [0.1, 1.0, 10.0];
/// Samples of the maximizer-neighbourhood probe.
const NEIGHBOURHOOD_SAMPLES: usize = 10;

pub fn dispatch(cli: &Cli, stdout: Sink, stderr: Sink) -> CliResult<()> {
    let start = Instant::now();
    let mut ctx = Ctx { format: cli.format, stdout, stderr, start };
    match &cli.command {
        Command::Lambda { m, beta, tol, quad } => lambda(&mut ctx, *m, *beta, *tol, quad),
        Command::CriticalMass { beta, m_tol, quad } => critical(&mut ctx, *beta, *m_tol, quad),
        Command::Scan { m_min, m_max, points, betas, out, quad } => {
            scan(&mut ctx, *m_min, *m_max, *points, betas, out.as_deref(), quad)
        }
        Command::Landscape { m, beta, grid, q_max, b_max, out, quad } => {
            landscape(&mut ctx, *m, *beta, *grid, *q_max, *b_max, out.as_deref(), quad)
        }
        Command::Bounds { m, beta, alpha, lambda } => bounds(&mut ctx, *m, *beta, *alpha, *lambda),
        Command::Verify { suite, seed, masses, betas, angular_points, orientation_points, probe_samples, out } => {
            let plan = VerifyPlan {
                suite: *suite,
                seed: *seed,
                masses: masses.clone(),
                betas: betas.clone(),
                angular_points: *angular_points,
                orientation_points: *orientation_points,
                probe_samples: *probe_samples,
            };
            verify(&mut ctx, &plan, out.as_deref())
        }
    }
}

struct Ctx<'a> {
    format: Format,
    stdout: Sink<'a>,
    stderr: Sink<'a>,
    start: Instant,
}

impl Ctx<'_> {
    fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    fn emit(&mut self, text: &str) -> CliResult<()> {
        self.stdout
            .write_all(text.as_bytes())
            .and_then(|_| self.stdout.flush())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
    }

    fn note(&mut self, text: &str) {
        let _ = writeln!(self.stderr, "{text}");
    }

    fn emit_record(&mut self, mut record: OutputRecord, text: impl FnOnce() -> String) -> CliResult<()> {
        match self.format {
            Format::Json => {
                record.timing = Some(self.elapsed());
                self.emit(&record.to_json())
            }
            Format::Text => self.emit(&text()),
        }
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn spec(quad: &Tolerances) -> CliResult<QuadratureSpec> {
    let spec = QuadratureSpec::default().with_rel_tol(quad.rel_tol);
    spec.validate()?;
    Ok(spec)
}

fn label(beta: Beta) -> String {
    if beta.is_zero() {
        "Lambda".to_string()
    } else {
        format!("Lambda_{}", beta.value())
    }
}

fn lambda_json(r: &LambdaResult) -> serde_json::Value {
    json!({
        "value": r.stability_constant(),
        "error": r.stability_error(),
        "supremum": r.value,
        "quad_err": r.quad_err,
        "opt_err": r.opt_err,
        "argmax": {"Q": r.argmax.q(), "b": r.argmax.b(), "kappa": r.argmax.kappa()},
        "evals": r.evals,
        "stalled": r.stalled,
    })
}

fn lambda(ctx: &mut Ctx, m: f64, beta: f64, tol: f64, quad: &Tolerances) -> CliResult<()> {
    let (mass, beta) = (MassRatio::new(m)?, Beta::new(beta)?);
    if !(tol > 0.0) {
        return Err(CliError::Usage(format!("--tol must be positive, got {tol}")));
    }
    let spec = spec(quad)?;
    let r = lambda_beta(mass, beta, &spec, tol)?;
    if r.stalled {
        ctx.note("note: the refinement did not improve on the best grid point");
    }
    let mut record = OutputRecord::new("lambda")
        .param("m", m)
        .param("beta", beta.value())
        .tolerance("rel_tol", spec.rel_tol)
        .tolerance("opt_tol", tol);
    record.results = lambda_json(&r);
    ctx.emit_record(record, || {
        let mut s = format!(
            "{}({m}) = {:.6} ± {:.1e}\nargmax: Q = {:.4}, b = {:.4}\n",
            label(beta),
            r.stability_constant(),
            r.stability_error(),
            r.argmax.q(),
            r.argmax.b()
        );
        if beta.is_zero() {
            s.push_str(&format!("supremum of the radial integral: {:.6} (= 2 Lambda)\n", r.value));
        }
        s
    })
}

fn critical(ctx: &mut Ctx, beta: f64, m_tol: f64, quad: &Tolerances) -> CliResult<()> {
    let beta = Beta::new(beta)?;
    let spec = spec(quad)?;
    let r = critical_mass(beta, &spec, m_tol)?;
    for (m, v) in &r.monotonicity_violations {
        ctx.note(&format!("warning: {}({m}) = {v} breaks monotone decrease", label(beta)));
    }
    let error = 0.5 * (r.bracket.1 - r.bracket.0);
    let mut record = OutputRecord::new("critical-mass")
        .param("beta", beta.value())
        .tolerance("m_tol", m_tol)
        .tolerance("rel_tol", spec.rel_tol.min(m_tol / 10.0));
    record.results = json!({
        "m_star": r.m_star,
        "error": error,
        "bracket": [r.bracket.0, r.bracket.1],
        "evaluations": r.evaluations,
        "monotonicity_violations": r.monotonicity_violations,
    });
    ctx.emit_record(record, || {
        format!(
            "m*(beta = {}) = {:.4} ± {:.1e}  ({} evaluations of {})\n",
            beta.value(),
            r.m_star,
            error,
            r.evaluations.len(),
            label(beta)
        )
    })
}

fn parse_betas(betas: &[f64]) -> CliResult<Vec<Beta>> {
    betas.iter().map(|&b| Beta::new(b).map_err(CliError::from)).collect()
}

fn scan(
    ctx: &mut Ctx,
    m_min: f64,
    m_max: f64,
    points: usize,
    betas: &[f64],
    out: Option<&Path>,
    quad: &Tolerances,
) -> CliResult<()> {
    if !(m_min > 0.0 && m_max > m_min && points >= 2) {
        return Err(CliError::Usage(format!(
            "scan needs 0 < m-min < m-max and at least two points, got [{m_min}, {m_max}] with {points}"
        )));
    }
    let spec = spec(quad)?;
    let betas = parse_betas(betas)?;
    let masses = log_grid(m_min, m_max, points);
    let rows = optimize::scan(&masses, &betas, &spec)?;
    let failed = rows.iter().filter(|r| !r.converged()).count();
    for r in rows.iter().filter(|r| !r.converged()) {
        ctx.note(&format!("m = {}: {}", r.m, r.failures.join("; ")));
    }
    let csv = output::scan_csv(&rows);
    if let Some(path) = out {
        write_file(path, &csv)?;
    }
    match ctx.format {
        Format::Text if out.is_none() => ctx.emit(&csv)?,
        Format::Text => ctx.note(&format!("wrote {} rows to {}", rows.len(), out.unwrap().display())),
        Format::Json => {
            let mut record = OutputRecord::new("scan")
                .param("m_min", m_min)
                .param("m_max", m_max)
                .param("points", points)
                .param("betas", betas.iter().map(Beta::value).collect::<Vec<_>>())
                .tolerance("rel_tol", spec.rel_tol);
            let rows: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    let mut v = to_value(r);
                    v["asym"] = json!(output::asymptote(r.m));
                    v
                })
                .collect();
            record.results = json!({ "rows": rows });
            ctx.emit_record(record, String::new)?;
        }
    }
    if failed > 0 {
        return Err(CliError::Incomplete(failed));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn landscape(
    ctx: &mut Ctx,
    m: f64,
    beta: f64,
    grid: usize,
    q_max: f64,
    b_max: Option<f64>,
    out: Option<&Path>,
    quad: &Tolerances,
) -> CliResult<()> {
    let (mass, beta) = (MassRatio::new(m)?, Beta::new(beta)?);
    let b_max = b_max.unwrap_or(mass.b_max().min(3.0));
    if !(grid >= 2 && q_max > 0.0 && b_max > 0.0 && b_max <= mass.b_max()) {
        return Err(CliError::Usage(format!(
            "landscape needs grid >= 2, q-max > 0 and 0 < b-max <= 2 + m, got {grid}, {q_max}, {b_max}"
        )));
    }
    let spec = spec(quad)?;
    let grid_q = linear_grid(0.0, q_max, grid);
    let grid_b = linear_grid(0.0, b_max, grid);
    let values = optimize::landscape(mass, beta, &grid_q, &grid_b, &spec)?;
    let csv = output::landscape_csv(&grid_q, &grid_b, &values);
    if let Some(path) = out {
        write_file(path, &csv)?;
    }
    let (mut peak, mut at) = (f64::NEG_INFINITY, (0.0, 0.0));
    for (q, row) in grid_q.iter().zip(&values) {
        for (b, v) in grid_b.iter().zip(row) {
            if *v > peak {
                (peak, at) = (*v, (*q, *b));
            }
        }
    }
    match ctx.format {
        Format::Text if out.is_none() => ctx.emit(&csv),
        Format::Text => {
            ctx.note(&format!("peak {peak:.6} at Q = {}, b = {}; wrote {}", at.0, at.1, out.unwrap().display()));
            Ok(())
        }
        Format::Json => {
            let mut record = OutputRecord::new("landscape")
                .param("m", m)
                .param("beta", beta.value())
                .param("grid", grid)
                .param("q_max", q_max)
                .param("b_max", b_max)
                .tolerance("rel_tol", spec.rel_tol);
            record.results = json!({
                "Q": grid_q,
                "b": grid_b,
                "values": values,
                // Cell values carry the radial quadrature's relative tolerance.
                "error": spec.rel_tol * peak,
                "peak": {"Q": at.0, "b": at.1, "value": peak},
            });
            ctx.emit_record(record, String::new)
        }
    }
}

fn bounds(ctx: &mut Ctx, m: f64, beta: Option<f64>, alpha: Option<f64>, lambda_m: Option<f64>) -> CliResult<()> {
    let mass = MassRatio::new(m)?;
    let beta = beta.map(Beta::new).transpose()?;
    let bound = analytic_bound(mass);
    let threshold = analytic_bound_threshold();
    let mut results = json!({
        "analytic_bound": {"value": bound, "error": 0.0},
        "analytic_bound_threshold": {"value": threshold, "error": 1e-14 * threshold},
    });
    let mut text = format!("analytic bound on Lambda({m}): {bound:.6}\nanalytic bound < 1 for m > {threshold:.6}\n");
    if let Some(beta) = beta {
        let v = analytic_bound_beta(mass, beta);
        results["analytic_bound_beta"] = json!({"beta": beta.value(), "value": v, "error": 0.0});
        text.push_str(&format!("analytic bound on Lambda_{}({m}): {v:.6}\n", beta.value()));
    }
    if let Some(alpha) = alpha {
        let (lam, lam_err) = match lambda_m {
            Some(l) => (l, 0.0),
            None => {
                let r = lambda_beta(mass, Beta::ZERO, &QuadratureSpec::default(), 1e-5)?;
                (r.stability_constant(), r.stability_error())
            }
        };
        match energy_lower_bound(alpha, mass, lam) {
            Ok(e) => {
                // d/dΛ of −(α/(2π²(1−Λ)))² is 2e/(1−Λ).
                let err = (2.0 * e / (1.0 - lam)).abs() * lam_err;
                results["energy_lower_bound"] =
                    json!({"alpha": alpha, "lambda": lam, "lambda_error": lam_err, "value": e, "error": err});
                text.push_str(&format!("energy lower bound at alpha = {alpha} (Lambda = {lam:.6}): {e:.10}\n"));
            }
            Err(e) => {
                ctx.note(&format!("no energy bound: {e}"));
                results["energy_lower_bound"] =
                    json!({"alpha": alpha, "lambda": lam, "lambda_error": lam_err, "value": null, "error": null});
                text.push_str(&format!("no energy lower bound at alpha = {alpha}: Lambda({m}) = {lam:.6} >= 1\n"));
            }
        }
    }
    let mut record = OutputRecord::new("bounds").param("m", m);
    if let Some(b) = beta {
        record = record.param("beta", b.value());
    }
    if let Some(a) = alpha {
        record = record.param("alpha", a);
    }
    record.results = results;
    ctx.emit_record(record, || text)
}

struct VerifyPlan {
    suite: Suite,
    seed: u64,
    masses: Vec<f64>,
    betas: Vec<f64>,
    angular_points: usize,
    orientation_points: usize,
    probe_samples: usize,
}

/// One report of `verify`, with the parameters it was produced at.
#[derive(Debug, Serialize)]
struct Entry {
    suite: &'static str,
    m: f64,
    beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    /// Computed constant the report was checked against, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    reference: Option<f64>,
    report: ProbeReport,
}

fn verify(ctx: &mut Ctx, plan: &VerifyPlan, out: Option<&Path>) -> CliResult<()> {
    let masses: Vec<MassRatio> = plan.masses.iter().map(|&m| MassRatio::new(m)).collect::<Result<_, _>>()?;
    let betas = parse_betas(&plan.betas)?;
    let spec = QuadratureSpec::default();
    let suite = plan.suite;
    let mut entries = Vec::new();

    for &mass in &masses {
        let m = mass.m();
        for &beta in &betas {
            let b = beta.value();
            if suite.includes(Suite::Angular) {
                let report = angular_consistency(mass, beta, plan.angular_points, plan.seed)?;
                entries.push(Entry { suite: "angular", m, beta: b, mu: None, reference: None, report });
            }
            if suite.includes(Suite::Orientation) {
                let report = orientation_check(mass, beta, plan.orientation_points, plan.seed)?;
                entries.push(Entry { suite: "orientation", m, beta: b, mu: None, reference: None, report });
            }
            let needs_sup = suite.includes(Suite::Probe) || (suite.includes(Suite::Thm2) && b <= 2.0);
            let sup = if needs_sup { Some(lambda_beta(mass, beta, &spec, 1e-5)?) } else { None };
            if suite.includes(Suite::Probe) {
                let sup = sup.as_ref().expect("computed above");
                let report = mc_unreduced_probe(mass, beta, plan.probe_samples, plan.seed, sup.value)?;
                entries.push(Entry { suite: "probe", m, beta: b, mu: None, reference: Some(sup.value), report });
                let report =
                    argmax_neighbourhood_probe(mass, beta, sup.argmax, NEIGHBOURHOOD_SAMPLES, plan.seed, sup.value)?;
                entries.push(Entry { suite: "probe", m, beta: b, mu: None, reference: Some(sup.value), report });
            }
            if suite.includes(Suite::Thm2) && b <= 2.0 {
                let sup = sup.as_ref().expect("computed above");
                for mu in TRIAL_MUS {
                    let report = trial_inequality_thm2(mass, beta, &TRIAL_WIDTHS, mu, sup.value)?;
                    entries.push(Entry { suite: "thm2", m, beta: b, mu: Some(mu), reference: Some(sup.value), report });
                }
            }
        }
        if suite.includes(Suite::Thm1) {
            let lam = lambda_beta(mass, Beta::ZERO, &spec, 1e-5)?.stability_constant();
            for mu in TRIAL_MUS {
                let report = trial_inequality_thm1(mass, &TRIAL_WIDTHS, mu, lam)?;
                entries.push(Entry { suite: "thm1", m, beta: 0.0, mu: Some(mu), reference: Some(lam), report });
            }
        }
    }

    let failed = entries.iter().filter(|e| !e.report.passed).count();
    let body = match ctx.format {
        Format::Json => {
            let mut record = OutputRecord::new("verify")
                .param("suite", format!("{suite:?}").to_lowercase())
                .param("seed", plan.seed)
                .param("masses", &plan.masses)
                .param("betas", &plan.betas)
                .param("angular_points", plan.angular_points)
                .param("orientation_points", plan.orientation_points)
                .param("probe_samples", plan.probe_samples)
                .tolerance("angular", ANGULAR_TOL)
                .tolerance("orientation", ORIENTATION_TOL)
                .tolerance("probe_rel", PROBE_REL_TOL)
                .tolerance("probe_abs", PROBE_ABS_TOL)
                .tolerance("trial", TRIAL_TOL);
            record.results = json!({ "passed": failed == 0, "entries": entries });
            // No timing: the report must be reproducible byte for byte.
            record.to_json()
        }
        Format::Text => verify_text(&entries),
    };
    match out {
        Some(path) => write_file(path, &body)?,
        None => ctx.emit(&body)?,
    }
    ctx.note(&format!("verify: {} report(s), {failed} failed, {:.1} s", entries.len(), ctx.elapsed()));
    if failed > 0 {
        return Err(CliError::ValidationFailed(failed));
    }
    Ok(())
}

fn verify_text(entries: &[Entry]) -> String {
    let mut s = String::new();
    for e in entries {
        let r = &e.report;
        let mu = e.mu.map(|mu| format!(" mu={mu}")).unwrap_or_default();
        s.push_str(&format!(
            "{} {:<28} m={} beta={}{mu} n={} max_violation={:.3e} tol={:.0e} observed={:.6e}{}\n",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            e.m,
            e.beta,
            r.n_samples,
            r.max_violation,
            r.tolerance,
            r.observed,
            if r.out_of_regime > 0 { format!(" out_of_regime={}", r.out_of_regime) } else { String::new() },
        ));
    }
    s
}
