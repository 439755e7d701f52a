//! The semi-infinite radial integral of the reduced functional and the
//! one-dimensional angular oracle that certifies the closed-form angular
//! integration.

pub mod rules;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use rules::Integral;
use rules::{gauss_kronrod, tanh_sinh};

use crate::error::{domain, Error, Result};
use crate::kernels::{ell_shifted, reduced_integrand, weight_beta, Beta, MassRatio, ReducedPoint};

/// Tolerances and segmentation parameters for the radial integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Target relative error.
    pub rel_tol: f64,
    /// Absolute error floor.
    pub abs_tol: f64,
    /// Half-width factor `δ` of the singular window `[Aκ(1−δ), Aκ(1+δ)]`.
    pub split_delta: f64,
    /// Start of the mapped tail as a multiple of `max(1, Aκ, √S)`.
    pub tail_start_factor: f64,
    /// Panel budget per adaptive segment.
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rel_tol: 1e-9, abs_tol: 1e-14, split_delta: 0.25, tail_start_factor: 50.0, max_subdivisions: 60 }
    }
}

impl QuadratureSpec {
    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        Self { rel_tol, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(domain("quadrature tolerances must be positive"));
        }
        if !(self.split_delta > 0.0 && self.split_delta < 1.0) {
            return Err(domain(format!("split_delta must lie in (0,1), got {}", self.split_delta)));
        }
        if !(self.tail_start_factor > 0.0) || self.max_subdivisions == 0 {
            return Err(domain("tail_start_factor and max_subdivisions must be positive"));
        }
        Ok(())
    }

    fn ts_levels(&self) -> usize {
        // Tanh-sinh converges quadratically in the level; ten halvings are far
        // past double precision for the integrands at hand.
        10
    }
}

/// How a segment of the radial axis is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentRule {
    /// Adaptive Gauss–Kronrod on a smooth stretch.
    Adaptive,
    /// Tanh-sinh on a stretch with an integrable endpoint singularity.
    Singular,
    /// Tanh-sinh after the map `t = T/(1−v)` of `[T, ∞)` onto `[0, 1)`.
    Tail,
}

/// One piece of the radial partition: `[lo, hi]`, with `hi = ∞` for the tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub rule: SegmentRule,
}

/// Partition of `[0, ∞)` around an optional interior singular point.
///
/// With singular point `c > 0`:
/// `[0, c(1−δ)]`, `[c(1−δ), c]`, `[c, c(1+δ)]`, `[c(1+δ), T]`, `[T, ∞)`.
/// Without: `[0, L]` (tanh-sinh, the origin may be singular), `[L, T]`, `[T, ∞)`,
/// where `L` is the natural scale and `T = tail_start_factor · L`.
pub fn radial_segments(singular: Option<f64>, scale: f64, spec: &QuadratureSpec) -> Vec<Segment> {
    let tail = spec.tail_start_factor * scale;
    let mut segs = Vec::with_capacity(5);
    match singular.filter(|&c| c > 0.0) {
        Some(c) => {
            let d = spec.split_delta;
            segs.push(Segment { lo: 0.0, hi: c * (1.0 - d), rule: SegmentRule::Adaptive });
            segs.push(Segment { lo: c * (1.0 - d), hi: c, rule: SegmentRule::Singular });
            segs.push(Segment { lo: c, hi: c * (1.0 + d), rule: SegmentRule::Singular });
            let start = c * (1.0 + d);
            if start < tail {
                segs.push(Segment { lo: start, hi: tail, rule: SegmentRule::Adaptive });
                segs.push(Segment { lo: tail, hi: f64::INFINITY, rule: SegmentRule::Tail });
            } else {
                segs.push(Segment { lo: start, hi: f64::INFINITY, rule: SegmentRule::Tail });
            }
        }
        None => {
            segs.push(Segment { lo: 0.0, hi: scale, rule: SegmentRule::Singular });
            segs.push(Segment { lo: scale, hi: tail, rule: SegmentRule::Adaptive });
            segs.push(Segment { lo: tail, hi: f64::INFINITY, rule: SegmentRule::Tail });
        }
    }
    segs
}

// Breakpoints at every decade between lo and hi (lo > 0), so multi-scale
// integrands start from a sensible partition.
fn decade_points(lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = vec![lo];
    if lo > 0.0 {
        let mut x = lo * 10.0;
        while x < hi * 0.5 {
            pts.push(x);
            x *= 10.0;
        }
    } else {
        pts.push(0.5 * (lo + hi));
    }
    pts.push(hi);
    pts
}

/// Integrates one segment of the radial partition to `spec`'s relative
/// tolerance and a share `abs_share` of the absolute floor.
pub fn integrate_segment<F: FnMut(f64) -> f64>(
    mut f: F,
    seg: &Segment,
    spec: &QuadratureSpec,
    abs_share: f64,
) -> Result<Integral> {
    match seg.rule {
        SegmentRule::Adaptive => {
            gauss_kronrod(f, &decade_points(seg.lo, seg.hi), spec.rel_tol, abs_share, spec.max_subdivisions)
        }
        SegmentRule::Singular => tanh_sinh(f, seg.lo, seg.hi, spec.rel_tol, abs_share, spec.ts_levels()),
        SegmentRule::Tail => {
            let t0 = seg.lo;
            tanh_sinh(
                |v: f64| {
                    let w = 1.0 - v;
                    let t = t0 / w;
                    f(t) * t0 / (w * w)
                },
                0.0,
                1.0,
                spec.rel_tol,
                abs_share,
                spec.ts_levels(),
            )
        }
    }
}

/// Integrates `f` over `[0, ∞)` on the partition of [`radial_segments`].
/// Errors from individual segments are summed; the call fails with
/// [`Error::NonConvergence`] (carrying the best estimate) if any segment
/// misses its tolerance.
pub fn integrate_half_line<F: FnMut(f64) -> f64>(
    mut f: F,
    singular: Option<f64>,
    scale: f64,
    spec: &QuadratureSpec,
) -> Result<Integral> {
    let segs = radial_segments(singular, scale, spec);
    let abs_share = spec.abs_tol / segs.len() as f64;
    let mut total = Integral::default();
    let mut failed = false;
    for seg in &segs {
        match integrate_segment(&mut f, seg, spec, abs_share) {
            Ok(r) => total.accumulate(r),
            Err(Error::NonConvergence { value, error, evals }) => {
                failed = true;
                total.accumulate(Integral { value, error, evals });
            }
            Err(e) => return Err(e),
        }
    }
    if failed || !total.value.is_finite() {
        return Err(Error::NonConvergence { value: total.value, error: total.error, evals: total.evals });
    }
    Ok(total)
}

/// Natural length scale `max(1, Aκ, √S)` of the reduced radial integrand.
pub fn radial_scale(mass: MassRatio, p: &ReducedPoint) -> f64 {
    1f64.max(p.singular_point(mass)).max(p.s_param(mass).sqrt())
}

/// `∫₀^∞ reduced_integrand(m, β, p, t) dt`.
pub fn integrate_radial(mass: MassRatio, beta: Beta, p: &ReducedPoint, spec: &QuadratureSpec) -> Result<Integral> {
    spec.validate()?;
    let c = p.singular_point(mass);
    let singular = (c > 0.0).then_some(c);
    integrate_half_line(|t| reduced_integrand(mass, beta, p, t), singular, radial_scale(mass, p), spec)
}

/// Reduced integrand at radius `t` obtained by integrating the symmetrized
/// pre-angular form over `u = cos θ ∈ [−1, 1]` numerically, with all radial
/// factors attached. `n_panels` equal panels seed each half of the `u`
/// interval.
pub fn integrate_angular_oracle(
    mass: MassRatio,
    beta: Beta,
    q: f64,
    kappa: f64,
    t: f64,
    n_panels: usize,
) -> Result<f64> {
    let p = ReducedPoint::from_kappa(mass, q, kappa)?;
    let c = p.singular_point(mass);
    if !(t >= 0.0) || (c > 0.0 && t == c) {
        return Err(domain(format!("angular oracle needs t >= 0 and t != A kappa, got {t}")));
    }
    let s_param = p.s_param(mass);
    let d = 1.0 + t * t + mass.reduced() * s_param;
    let lam = mass.lam();
    let t2c2 = t * t + c * c;
    let angular = |u: f64| {
        // (t²+c²)² − 4c²t²u² factored as (t²+c²−2ctu)(t²+c²+2ctu),
        // with t²+c²∓2ctu = (t∓c)² + 2ct(1∓u) to keep the peak at |u| = 1 exact.
        let minus = (t - c) * (t - c) + 2.0 * c * t * (1.0 - u);
        let plus = (t - c) * (t - c) + 2.0 * c * t * (1.0 + u);
        let shift = t2c2 / (minus * plus);
        let x = lam * t * u;
        shift * t * u.abs() / ((d - x) * (d + x))
    };
    let n = n_panels.max(1);
    let half = |lo: f64, hi: f64| -> Vec<f64> { (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect() };
    let tol = 1e-13;
    let neg = gauss_kronrod(angular, &half(-1.0, 0.0), tol, 0.0, 400 + n)?;
    let pos = gauss_kronrod(angular, &half(0.0, 1.0), tol, 0.0, 400 + n)?;
    let w = weight_beta(beta, ell_shifted(mass, 1.0, s_param), ell_shifted(mass, t, s_param));
    let pre = ((1.0 + c) * (1.0 + c) + q * q) / (PI * PI * (1.0 + mass.m()));
    Ok(pre * w * t * t * 2.0 * PI * (neg.value + pos.value))
}
