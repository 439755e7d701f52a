//! Supremum of the reduced functional over `(Q, b)`, mass scans, landscapes
//! and critical masses.
//!
//! The search runs on the compact box `q ∈ [0, Q_MAP_MAX] × b ∈ [0, 2+m)`
//! with `Q = q/(1−q)`: a coarse grid first, then box-constrained
//! Nelder–Mead from the best grid cells.

pub mod simplex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::kernels::{analytic_bound, Beta, MassRatio, ReducedPoint};
use crate::quadrature::{integrate_radial, Integral, QuadratureSpec};

/// Upper end of the mapped `q` coordinate (`Q ≈ 999`); the objective has
/// decayed to nothing long before.
pub const Q_MAP_MAX: f64 = 0.999;

/// Maps `q ∈ [0,1)` to `Q = q/(1−q)`.
pub fn q_from_mapped(q: f64) -> f64 {
    q / (1.0 - q)
}

/// Inverse of [`q_from_mapped`].
pub fn mapped_from_q(big_q: f64) -> f64 {
    big_q / (1.0 + big_q)
}

/// Settings of the grid + simplex search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub grid_q: usize,
    pub grid_b: usize,
    /// Number of best grid cells refined by Nelder–Mead.
    pub starts: usize,
    /// Simplex-diameter threshold in mapped coordinates.
    pub opt_tol: f64,
    pub max_iter: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { grid_q: 33, grid_b: 33, starts: 3, opt_tol: 1e-5, max_iter: 400 }
    }
}

impl SearchOptions {
    pub fn with_opt_tol(self, opt_tol: f64) -> Self {
        Self { opt_tol, ..self }
    }

    fn validate(&self) -> Result<()> {
        if self.grid_q < 2 || self.grid_b < 2 || self.starts == 0 || self.max_iter == 0 {
            return Err(domain("search grid needs at least 2x2 cells and one start"));
        }
        if !(self.opt_tol > 0.0) {
            return Err(domain(format!("opt_tol must be positive, got {}", self.opt_tol)));
        }
        Ok(())
    }
}

/// Maximum of an arbitrary objective over the reduced domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainMaximum {
    pub value: f64,
    pub q: f64,
    pub b: f64,
    pub quad_err: f64,
    /// Gain found by stepping `max(opt_tol, simplex diameter)` away from the
    /// refined point along each axis (plus the simplex spread if the run hit
    /// its iteration budget).
    pub opt_err: f64,
    pub evals: usize,
    /// Refinement did not beat the grid by more than the quadrature error.
    pub stalled: bool,
}

/// Grid + multistart Nelder–Mead maximization of `objective(Q, b)` over
/// `[0, ∞) × [0, b_max)`. The objective returns an [`Integral`] so that the
/// quadrature error and work are carried into the result.
pub fn maximize_over_domain<F>(b_max: f64, objective: F, opts: &SearchOptions) -> Result<DomainMaximum>
where
    F: Fn(f64, f64) -> Result<Integral> + Sync,
{
    opts.validate()?;
    let (nq, nb) = (opts.grid_q, opts.grid_b);
    let dq = 1.0 / nq as f64;
    let db = b_max / nb as f64;
    // Cells at q = i/nq, b = j·b_max/nb with the κ = ∞ edge left out.
    let cells: Vec<(usize, usize)> = (0..nq).flat_map(|i| (0..nb).map(move |j| (i, j))).collect();
    let grid: Vec<Integral> = cells
        .par_iter()
        .map(|&(i, j)| objective(q_from_mapped(i as f64 * dq), j as f64 * db))
        .collect::<Result<_>>()?;
    let grid_evals: usize = grid.iter().map(|r| r.evals).sum();

    let mut ranked: Vec<usize> = (0..cells.len()).collect();
    ranked.sort_by(|&x, &y| grid[y].value.total_cmp(&grid[x].value).then(x.cmp(&y)));
    let grid_best = grid[ranked[0]];

    let hi = [Q_MAP_MAX, b_max * (1.0 - 1e-9)];
    let runs: Vec<(simplex::SimplexOutcome, Integral, usize)> = ranked
        .iter()
        .take(opts.starts)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&&idx| {
            let (i, j) = cells[idx];
            let mut evals = 0usize;
            let out = simplex::maximize(
                |x| {
                    let r = objective(q_from_mapped(x[0]), x[1])?;
                    evals += r.evals;
                    Ok(r.value)
                },
                [i as f64 * dq, j as f64 * db],
                [0.5 * dq, 0.5 * db],
                [0.0, 0.0],
                hi,
                opts.opt_tol,
                opts.max_iter,
            )?;
            let at = objective(q_from_mapped(out.x[0]), out.x[1])?;
            Ok((out, at, evals + at.evals))
        })
        .collect::<Result<_>>()?;

    let refine_evals: usize = runs.iter().map(|r| r.2).sum();
    let (best, at, _) =
        runs.iter().copied().max_by(|x, y| x.1.value.total_cmp(&y.1.value)).expect("at least one start");
    let check = local_ascent(&objective, best, at, [0.0, 0.0], hi, opts.opt_tol)?;
    Ok(DomainMaximum {
        value: check.at.value,
        q: q_from_mapped(check.x[0]),
        b: check.x[1],
        quad_err: check.at.error,
        opt_err: check.gap,
        evals: grid_evals + refine_evals + check.evals,
        stalled: at.value - grid_best.value <= at.error,
    })
}

struct AscentCheck {
    x: [f64; 2],
    at: Integral,
    gap: f64,
    evals: usize,
}

// Optimization error of a simplex outcome: the objective is probed one step
// `h = max(tol, diameter)` away from the best vertex along each axis
// (clamped to the box) and the largest gain found is the error estimate;
// the best probe replaces the vertex if it wins. A maximum on a face or
// corner, where the objective may have a cusp, gets no spurious error
// from the steep inward slope, unlike the simplex spread. A run that hit
// its iteration budget also keeps its spread.
fn local_ascent<F>(
    objective: &F,
    out: simplex::SimplexOutcome,
    at: Integral,
    lo: [f64; 2],
    hi: [f64; 2],
    tol: f64,
) -> Result<AscentCheck>
where
    F: Fn(f64, f64) -> Result<Integral> + Sync,
{
    let h = tol.max(out.diameter);
    let probes: Vec<[f64; 2]> = (0..2)
        .flat_map(|k| {
            [-h, h].into_iter().map(move |step| {
                let mut p = out.x;
                p[k] = (p[k] + step).clamp(lo[k], hi[k]);
                p
            })
        })
        .filter(|p| *p != out.x)
        .collect();
    let values: Vec<Integral> =
        probes.par_iter().map(|p| objective(q_from_mapped(p[0]), p[1])).collect::<Result<_>>()?;
    let evals = values.iter().map(|v| v.evals).sum();
    let mut check = AscentCheck { x: out.x, at, gap: 0.0, evals };
    for (p, v) in probes.iter().zip(&values) {
        if v.value > check.at.value {
            check.x = *p;
            check.at = *v;
        }
    }
    check.gap = check.at.value - at.value;
    if !out.converged {
        check.gap = check.gap.max(out.spread);
    }
    Ok(check)
}

/// Computed supremum `Λ_β(m)` (or `2Λ(m)` at `β = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaResult {
    /// Supremum of the radial integral over the reduced domain.
    pub value: f64,
    pub argmax: ReducedPoint,
    pub m: MassRatio,
    pub beta: Beta,
    pub quad_err: f64,
    pub opt_err: f64,
    pub evals: usize,
    /// See [`DomainMaximum::stalled`]; informative, not an error.
    pub stalled: bool,
}

impl LambdaResult {
    /// The constant compared against 1 for stability: `Λ(m) = value/2` at
    /// `β = 0`, `Λ_β(m) = value` otherwise.
    pub fn stability_constant(&self) -> f64 {
        if self.beta.is_zero() {
            0.5 * self.value
        } else {
            self.value
        }
    }

    /// Error estimate on [`Self::stability_constant`].
    pub fn stability_error(&self) -> f64 {
        let e = self.quad_err + self.opt_err;
        if self.beta.is_zero() {
            0.5 * e
        } else {
            e
        }
    }
}

fn objective(mass: MassRatio, beta: Beta, spec: &QuadratureSpec) -> impl Fn(f64, f64) -> Result<Integral> + Sync + '_ {
    move |q, b| {
        let p = ReducedPoint::from_b(mass, q, b)?;
        integrate_radial(mass, beta, &p, spec)
    }
}

/// `Λ_β(m)` by the default grid + simplex search with simplex tolerance
/// `opt_tol`.
pub fn lambda_beta(mass: MassRatio, beta: Beta, spec: &QuadratureSpec, opt_tol: f64) -> Result<LambdaResult> {
    lambda_beta_with(mass, beta, spec, &SearchOptions::default().with_opt_tol(opt_tol))
}

/// [`lambda_beta`] with explicit search settings.
pub fn lambda_beta_with(
    mass: MassRatio,
    beta: Beta,
    spec: &QuadratureSpec,
    opts: &SearchOptions,
) -> Result<LambdaResult> {
    spec.validate()?;
    let best = maximize_over_domain(mass.b_max(), objective(mass, beta, spec), opts)?;
    Ok(LambdaResult {
        value: best.value,
        argmax: ReducedPoint::from_b(mass, best.q, best.b)?,
        m: mass,
        beta,
        quad_err: best.quad_err,
        opt_err: best.opt_err,
        evals: best.evals,
        stalled: best.stalled,
    })
}

/// Single Nelder–Mead refinement from `start`, without the grid stage.
/// Used to audit the multistart coverage of [`lambda_beta`].
pub fn refine_from(
    mass: MassRatio,
    beta: Beta,
    spec: &QuadratureSpec,
    start: ReducedPoint,
    opts: &SearchOptions,
) -> Result<LambdaResult> {
    let f = objective(mass, beta, spec);
    let b_max = mass.b_max();
    let mut evals = 0;
    let out = simplex::maximize(
        |x| {
            let r = f(q_from_mapped(x[0]), x[1])?;
            evals += r.evals;
            Ok(r.value)
        },
        [mapped_from_q(start.q()).min(Q_MAP_MAX), start.b().min(b_max * (1.0 - 1e-9))],
        [0.5 / opts.grid_q as f64, 0.5 * b_max / opts.grid_b as f64],
        [0.0, 0.0],
        [Q_MAP_MAX, b_max * (1.0 - 1e-9)],
        opts.opt_tol,
        opts.max_iter,
    )?;
    let at = f(q_from_mapped(out.x[0]), out.x[1])?;
    let check = local_ascent(&f, out, at, [0.0, 0.0], [Q_MAP_MAX, b_max * (1.0 - 1e-9)], opts.opt_tol)?;
    Ok(LambdaResult {
        value: check.at.value,
        argmax: ReducedPoint::from_b(mass, q_from_mapped(check.x[0]), check.x[1])?,
        m: mass,
        beta,
        quad_err: check.at.error,
        opt_err: check.gap,
        evals: evals + at.evals + check.evals,
        stalled: false,
    })
}

/// Outcome of a critical-mass search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalMass {
    /// Midpoint of the final bracket.
    pub m_star: f64,
    pub beta: Beta,
    pub bracket: (f64, f64),
    /// Every `(m, Λ_β(m))` evaluated, in evaluation order.
    pub evaluations: Vec<(f64, f64)>,
    /// Evaluations that contradicted monotone decrease in `m`, as
    /// `(m, Λ_β(m))`. Reported, never corrected.
    pub monotonicity_violations: Vec<(f64, f64)>,
}

/// Lower and upper end of the coarse bracketing scan.
pub const CRITICAL_SCAN: (f64, f64) = (0.01, 100.0);

/// Locates `m*` with `Λ_β(m*) = 1` to within `m_tol` by a descending
/// logarithmic scan from `m = 100` followed by bisection.
pub fn critical_mass(beta: Beta, spec: &QuadratureSpec, m_tol: f64) -> Result<CriticalMass> {
    critical_mass_with(beta, spec, m_tol, &SearchOptions::default())
}

/// [`critical_mass`] with explicit search settings.
pub fn critical_mass_with(beta: Beta, spec: &QuadratureSpec, m_tol: f64, opts: &SearchOptions) -> Result<CriticalMass> {
    if !(m_tol > 0.0) {
        return Err(domain(format!("m_tol must be positive, got {m_tol}")));
    }
    let spec = spec.with_rel_tol(spec.rel_tol.min(m_tol / 10.0));
    let eval =
        |m: f64| -> Result<f64> { Ok(lambda_beta_with(MassRatio::new(m)?, beta, &spec, opts)?.stability_constant()) };

    let mut evaluations = Vec::new();
    let mut violations = Vec::new();
    let (lo_end, hi_end) = CRITICAL_SCAN;
    let ratio: f64 = 0.5;
    let mut hi = hi_end;
    let mut lam_hi = eval(hi)?;
    evaluations.push((hi, lam_hi));
    if lam_hi > 1.0 {
        return Err(Error::NoBracket { beta: beta.value(), lo: lo_end, hi: hi_end });
    }
    let mut lo = hi;
    let mut lam_lo = lam_hi;
    while lam_lo <= 1.0 {
        if lo <= lo_end {
            return Err(Error::NoBracket { beta: beta.value(), lo: lo_end, hi: hi_end });
        }
        hi = lo;
        lam_hi = lam_lo;
        lo = (lo * ratio).max(lo_end);
        lam_lo = eval(lo)?;
        evaluations.push((lo, lam_lo));
        if lam_lo < lam_hi {
            violations.push((lo, lam_lo));
        }
    }

    while hi - lo > m_tol {
        let mid = 0.5 * (lo + hi);
        let lam = eval(mid)?;
        evaluations.push((mid, lam));
        if lam > lam_lo || lam < lam_hi {
            violations.push((mid, lam));
        }
        if lam > 1.0 {
            lo = mid;
            lam_lo = lam;
        } else {
            hi = mid;
            lam_hi = lam;
        }
    }
    Ok(CriticalMass {
        m_star: 0.5 * (lo + hi),
        beta,
        bracket: (lo, hi),
        evaluations,
        monotonicity_violations: violations,
    })
}

/// One mass of a scan: `Λ(m)`, `Λ₁(m)`, `Λ₂(m)` (those requested) and the
/// analytic bound on `Λ(m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub m: f64,
    pub lambda0_half: Option<f64>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub bound: f64,
    /// Maximizer of the lowest requested `β`.
    pub argmax_q: f64,
    pub argmax_b: f64,
    /// Largest `quad_err + opt_err` among the requested `β`, on the scale of
    /// the stability constant.
    pub error: f64,
    /// Failure messages; an empty list means every `β` converged.
    pub failures: Vec<String>,
}

impl ScanRow {
    pub fn converged(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `β` values a [`ScanRow`] has columns for.
pub const SCAN_BETAS: [f64; 3] = [0.0, 1.0, 2.0];

/// Computes one [`ScanRow`] per mass; rows (and `β` within rows) run in
/// parallel, output order follows `m_values`.
pub fn scan(m_values: &[f64], betas: &[Beta], spec: &QuadratureSpec) -> Result<Vec<ScanRow>> {
    scan_with(m_values, betas, spec, &SearchOptions::default())
}

/// [`scan`] with explicit search settings.
pub fn scan_with(
    m_values: &[f64],
    betas: &[Beta],
    spec: &QuadratureSpec,
    opts: &SearchOptions,
) -> Result<Vec<ScanRow>> {
    if m_values.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(domain("scan masses must be strictly ascending"));
    }
    if let Some(b) = betas.iter().find(|b| !SCAN_BETAS.contains(&b.value())) {
        return Err(domain(format!("scan supports beta in {{0, 1, 2}}, got {}", b.value())));
    }
    let masses: Vec<MassRatio> = m_values.iter().map(|&m| MassRatio::new(m)).collect::<Result<_>>()?;
    let mut sorted: Vec<Beta> = betas.to_vec();
    sorted.sort_by(|a, b| a.value().total_cmp(&b.value()));
    sorted.dedup();

    Ok(masses
        .par_iter()
        .map(|&mass| {
            let results: Vec<(Beta, Result<LambdaResult>)> =
                sorted.par_iter().map(|&beta| (beta, lambda_beta_with(mass, beta, spec, opts))).collect();
            let mut row = ScanRow {
                m: mass.m(),
                lambda0_half: None,
                lambda1: None,
                lambda2: None,
                bound: analytic_bound(mass),
                argmax_q: f64::NAN,
                argmax_b: f64::NAN,
                error: 0.0,
                failures: Vec::new(),
            };
            for (beta, res) in results {
                match res {
                    Ok(r) => {
                        let v = Some(r.stability_constant());
                        match beta.value() as u8 {
                            0 => row.lambda0_half = v,
                            1 => row.lambda1 = v,
                            _ => row.lambda2 = v,
                        }
                        if row.argmax_q.is_nan() {
                            row.argmax_q = r.argmax.q();
                            row.argmax_b = r.argmax.b();
                        }
                        row.error = row.error.max(r.stability_error());
                    }
                    Err(e) => row.failures.push(format!("beta {}: {e}", beta.value())),
                }
            }
            row
        })
        .collect())
}

/// Objective on a `grid_q × grid_b` lattice, halved at `β = 0` so the peak
/// is `Λ(m)`. Indexed `[i_q][i_b]`. Cells whose quadrature misses the
/// tolerance carry the best available estimate.
pub fn landscape(
    mass: MassRatio,
    beta: Beta,
    grid_q: &[f64],
    grid_b: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    let scale = if beta.is_zero() { 0.5 } else { 1.0 };
    let points: Vec<ReducedPoint> = grid_q
        .iter()
        .flat_map(|&q| grid_b.iter().map(move |&b| (q, b)))
        .map(|(q, b)| ReducedPoint::from_b(mass, q, b))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = points
        .par_iter()
        .map(|p| match integrate_radial(mass, beta, p, spec) {
            Ok(r) => Ok(scale * r.value),
            Err(Error::NonConvergence { value, .. }) => Ok(scale * value),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    Ok(values.chunks(grid_b.len().max(1)).map(<[f64]>::to_vec).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mr(m: f64) -> MassRatio {
        MassRatio::new(m).unwrap()
    }

    fn coarse() -> SearchOptions {
        SearchOptions { grid_q: 9, grid_b: 9, starts: 2, opt_tol: 1e-5, max_iter: 300 }
    }

    #[test]
    fn mapping_round_trip() {
        for q in [0.0, 0.3, 2.0, 100.0] {
            assert!((q_from_mapped(mapped_from_q(q)) - q).abs() <= 1e-12 * (1.0 + q));
        }
    }

    #[test]
    fn maximizes_synthetic_objective() {
        let f = |q: f64, b: f64| {
            Ok(Integral { value: (-(q - 0.5).powi(2) - (b - 1.2).powi(2)).exp(), error: 0.0, evals: 1 })
        };
        let r = maximize_over_domain(3.0, f, &coarse()).unwrap();
        assert!((r.q - 0.5).abs() < 1e-4 && (r.b - 1.2).abs() < 1e-4, "{r:?}");
        assert!((r.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lambda_at_unit_mass() {
        let r = lambda_beta(mr(1.0), Beta::ZERO, &QuadratureSpec::default(), 1e-5).unwrap();
        let lam = r.stability_constant();
        assert!((lam - 0.3409).abs() < 5e-4, "{lam}");
        assert!(r.argmax.q() < 1e-3, "{:?}", r.argmax);
        assert!((r.argmax.b() - 0.8126).abs() < 5e-3, "{:?}", r.argmax);
        assert!(lam <= analytic_bound(mr(1.0)));
    }

    #[test]
    fn random_restarts_do_not_beat_supremum() {
        use rand::{Rng, SeedableRng};
        let m = mr(1.0);
        let spec = QuadratureSpec::default();
        let opts = SearchOptions::default();
        let best = lambda_beta_with(m, Beta::ZERO, &spec, &opts).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let start = ReducedPoint::from_b(m, rng.random_range(0.0..3.0), rng.random_range(0.0..2.9)).unwrap();
            let r = refine_from(m, Beta::ZERO, &spec, start, &opts).unwrap();
            assert!(r.value <= best.value + best.opt_err + best.quad_err + 1e-9, "{} > {}", r.value, best.value);
        }
    }

    #[test]
    fn beta_two_corner_maximum() {
        let r = lambda_beta_with(mr(0.8), Beta::new(2.0).unwrap(), &QuadratureSpec::default(), &coarse()).unwrap();
        assert!(r.argmax.q() < 1e-6 && r.argmax.b() < 1e-6, "{:?}", r.argmax);
        assert!((r.value - 1.010).abs() < 5e-3, "{}", r.value);
    }

    #[test]
    fn scan_rows_follow_input_order() {
        let spec = QuadratureSpec::default();
        let rows = scan_with(&[1.0, 3.0], &[Beta::ZERO, Beta::new(1.0).unwrap()], &spec, &coarse()).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].m == 1.0 && rows[1].m == 3.0);
        for r in &rows {
            assert!(r.converged());
            assert!(r.lambda2.is_none());
            assert!(r.lambda1.unwrap() >= r.lambda0_half.unwrap());
            assert!(r.lambda0_half.unwrap() <= r.bound);
        }
        assert!(rows[0].lambda0_half > rows[1].lambda0_half);
        assert!(scan(&[2.0, 1.0], &[Beta::ZERO], &spec).is_err());
        assert!(scan(&[1.0], &[Beta::new(0.5).unwrap()], &spec).is_err());
    }

    #[test]
    fn landscape_shape_and_sign() {
        let m = mr(1.0);
        let qs = [0.0, 0.5, 1.0];
        let bs = [0.0, 0.82, 2.0];
        let l = landscape(m, Beta::ZERO, &qs, &bs, &QuadratureSpec::default()).unwrap();
        assert_eq!(l.len(), 3);
        assert!(l.iter().all(|row| row.len() == 3 && row.iter().all(|&v| v >= 0.0)));
        assert!(l[0][1] > l[1][1] && l[1][1] > l[2][1]);
        assert!((l[0][1] - 0.3409).abs() < 1e-3);
    }

    #[test]
    fn critical_mass_rejects_bad_tolerance() {
        assert!(critical_mass(Beta::ZERO, &QuadratureSpec::default(), 0.0).is_err());
    }
}
