//! Direct three-dimensional integration of the unreduced objective
//! `∫_{ℝ³} unreduced_integrand(s, K, Q; t) dt`, independent of the
//! antiparallel reduction and of the closed-form angular integral.
//!
//! Coordinates: `t̃ = t + A K = r ω` in a frame whose pole is `K̂`, so that
//! the only point singularity (`t = 0`) sits on the pole at `r = A|K|`. The
//! radial integral is taken in the offset `d = r − A|K|`, which keeps `|t|`
//! accurate arbitrarily close to the singular shell. Around the pole the
//! polar variable is replaced by `w = ln |t|²`, which turns the `1/|t|²`
//! peak into a smooth integrand. The azimuth is done with fixed
//! Gauss–Legendre panels split at the zero of `s̃ · t̃`.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::kernels::{unreduced_integrand_unchecked, Beta, MassRatio, UnreducedPoint, Vec3};
use crate::quadrature::rules::{gauss_legendre, tanh_sinh};
use crate::quadrature::{integrate_segment, radial_segments, Integral, QuadratureSpec};

/// Tolerances of the spherical product rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereSpec {
    pub radial: QuadratureSpec,
    /// Relative tolerance of the polar integral at each radius.
    pub polar_rel_tol: f64,
    /// Gauss–Legendre nodes per azimuthal panel.
    pub azimuth_nodes: usize,
}

impl Default for SphereSpec {
    fn default() -> Self {
        Self {
            radial: QuadratureSpec { rel_tol: 1e-9, abs_tol: 1e-15, ..QuadratureSpec::default() },
            polar_rel_tol: 1e-10,
            azimuth_nodes: 10,
        }
    }
}

struct Frame {
    mass: MassRatio,
    beta: Beta,
    mu: f64,
    point: UnreducedPoint,
    /// `A |K|`, radius of the singular shell.
    shell: f64,
    sin_g: f64,
    cos_g: f64,
    gl: (Vec<f64>, Vec<f64>),
    polar_rel_tol: f64,
}

impl Frame {
    // Integrand at t̃ = r ω with ω = (√(1−x²) cos φ, √(1−x²) sin φ, x),
    // with one_minus_x = 1 − x passed exactly and d = r − A|K|.
    fn eval(&self, r: f64, d: f64, x: f64, one_minus_x: f64, cos_phi: f64, sin_phi: f64) -> f64 {
        let rho = r * (one_minus_x * (1.0 + x)).max(0.0).sqrt();
        let t = Vec3::new(rho * cos_phi, rho * sin_phi, d * x - self.shell * one_minus_x);
        unreduced_integrand_unchecked(self.mass, self.beta, &self.point, t, self.mu)
    }

    // Azimuthal integral over [0, 2π) (even in φ, so twice [0, π]).
    fn azimuth(&self, r: f64, d: f64, x: f64, one_minus_x: f64) -> f64 {
        let sx = (one_minus_x * (1.0 + x)).max(0.0).sqrt();
        let alpha = self.sin_g * sx;
        if alpha < 1e-14 {
            return 2.0 * PI * self.eval(r, d, x, one_minus_x, 1.0, 0.0);
        }
        let c = -x * self.cos_g / alpha;
        let mut cuts = vec![0.0];
        if c > -1.0 && c < 1.0 {
            cuts.push(c.acos());
        }
        cuts.push(PI);
        let (nodes, weights) = &self.gl;
        let mut sum = 0.0;
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let half = 0.5 * (hi - lo);
            if half <= 0.0 {
                continue;
            }
            let mid = 0.5 * (hi + lo);
            for (z, wt) in nodes.iter().zip(weights) {
                let phi = mid + half * z;
                sum += wt * half * self.eval(r, d, x, one_minus_x, phi.cos(), phi.sin());
            }
        }
        2.0 * sum
    }

    // Tanh-sinh on every piece between breakpoints: the polar integrand has
    // square-root type kinks at x = ±sin γ, where the azimuthal zero of
    // s̃ · t̃ enters or leaves [0, π]. Double-exponential clustering absorbs
    // them without bisection.
    // A piece that misses its tolerance (typically a sliver next to a
    // near-axial kink, where the integrand is at roundoff level) still
    // contributes its estimate; the sum is only rejected if one is not finite.
    fn pieces<F: FnMut(f64) -> f64>(&self, mut f: F, pts: &[f64]) -> f64 {
        let mut total = 0.0;
        for w in pts.windows(2) {
            total += match tanh_sinh(&mut f, w[0], w[1], self.polar_rel_tol, 0.0, 12) {
                Ok(i) => i.value,
                Err(crate::error::Error::NonConvergence { value, .. }) => value,
                Err(_) => f64::NAN,
            };
        }
        total
    }

    // Angular integral ∫ dΩ at radius r (offset d), times r².
    fn shell_integral(&self, d: f64) -> f64 {
        let r = self.shell + d;
        if r <= 0.0 {
            return 0.0;
        }
        let s = self.sin_g.abs();
        let kinks = [-s, 0.0, s];
        let spread = 2.0 * r * self.shell;
        let peak_width = if spread > 0.0 { d * d / spread } else { f64::INFINITY };
        let value = if peak_width > 0.05 {
            let mut pts = vec![-1.0];
            pts.extend(kinks.iter().copied().filter(|&k| k > -1.0 && k < 1.0));
            pts.push(1.0);
            pts.dedup();
            self.pieces(|x| self.azimuth(r, d, x, 1.0 - x), &pts)
        } else {
            // |t|² = d² + 2 r A|K| (1 − x); integrate in w = ln |t|².
            let d2 = d * d;
            let w_of = |one_minus_x: f64| (d2 + spread * one_minus_x).ln();
            let mut pts = vec![w_of(0.0)];
            for k in kinks.iter().rev() {
                if *k > -1.0 && *k < 1.0 {
                    pts.push(w_of(1.0 - k));
                }
            }
            pts.push(w_of(2.0));
            pts.dedup();
            self.pieces(
                |w| {
                    let t2 = w.exp();
                    let one_minus_x = ((t2 - d2) / spread).clamp(0.0, 2.0);
                    let x = 1.0 - one_minus_x;
                    self.azimuth(r, d, x, one_minus_x) * t2 / spread
                },
                &pts,
            )
        };
        r * r * value
    }
}

/// `∫_{ℝ³} unreduced_integrand(m, β, up, t, μ) dt` by spherical product
/// quadrature. The objective is invariant under joint rescaling of
/// `(s, K, Q)` when `μ = 0`; the integration is done at `|s + A K| = 1` in
/// that case.
pub fn sphere_objective(
    mass: MassRatio,
    beta: Beta,
    up: &UnreducedPoint,
    mu: f64,
    spec: &SphereSpec,
) -> Result<Integral> {
    if !(mu >= 0.0) {
        return Err(domain(format!("mu must be nonnegative, got {mu}")));
    }
    let a = mass.a();
    let s_tilde = up.s + a * up.k;
    let norm = s_tilde.norm();
    if norm == 0.0 {
        // s̃ · t̃ ≡ 0: the integrand vanishes identically.
        return Ok(Integral::default());
    }
    let scale = if mu == 0.0 { norm } else { 1.0 };
    let (s_tilde, k, q) = ((1.0 / scale) * s_tilde, (1.0 / scale) * up.k, up.q / scale);
    let k_norm = k.norm();
    let pole = if k_norm > 0.0 { (1.0 / k_norm) * k } else { (1.0 / s_tilde.norm()) * s_tilde };
    // sin γ from the cross product stays exactly zero for axial s̃.
    let cos_g = (s_tilde.dot(pole) / s_tilde.norm()).clamp(-1.0, 1.0);
    let sin_g = (s_tilde.cross(pole).norm() / s_tilde.norm()).min(1.0);
    let st = s_tilde.norm();
    let k_vec = Vec3::new(0.0, 0.0, k_norm);
    let s_frame = Vec3::new(st * sin_g, 0.0, st * cos_g) - a * k_vec;
    let frame = Frame {
        mass,
        beta,
        mu,
        point: UnreducedPoint { s: s_frame, k: k_vec, q },
        shell: a * k_norm,
        sin_g,
        cos_g,
        gl: gauss_legendre(spec.azimuth_nodes),
        polar_rel_tol: spec.polar_rel_tol,
    };

    let c = frame.shell;
    let natural = 1f64.max(c).max((q * q + a * k_norm * k_norm + mu).sqrt()).max(st);
    let segs = radial_segments((c > 0.0).then_some(c), natural, &spec.radial);
    let abs_share = spec.radial.abs_tol / segs.len() as f64;
    let mut total = Integral::default();
    for seg in &segs {
        // Integrate in d = r − c; the segment endpoints at c map to d = 0 exactly.
        let mut shifted = *seg;
        shifted.lo = if seg.lo == c { 0.0 } else { seg.lo - c };
        shifted.hi = if seg.hi == c { 0.0 } else { seg.hi - c };
        total.accumulate(integrate_segment(|d| frame.shell_integral(d), &shifted, &spec.radial, abs_share)?);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::ReducedPoint;
    use crate::quadrature::integrate_radial;
    use approx::assert_relative_eq;

    fn mr(m: f64) -> MassRatio {
        MassRatio::new(m).unwrap()
    }

    // s̃ = ŝ, K = −κ ŝ  ⇒  s = s̃ − A K = (1 + Aκ) ŝ.
    fn antiparallel(mass: MassRatio, q: f64, kappa: f64, dir: Vec3) -> UnreducedPoint {
        let k = -kappa * dir;
        UnreducedPoint { s: dir - mass.a() * k, k, q }
    }

    #[test]
    fn matches_reduced_pipeline() {
        for (m, beta, q, b) in [(1.0, 0.0, 0.0, 0.82), (0.5, 1.0, 0.3, 1.2), (5.0, 2.0, 1.5, 0.4)] {
            let mass = mr(m);
            let beta = Beta::new(beta).unwrap();
            let p = ReducedPoint::from_b(mass, q, b).unwrap();
            let reduced = integrate_radial(mass, beta, &p, &QuadratureSpec::default()).unwrap().value;
            let up = antiparallel(mass, q, p.kappa(), Vec3::new(0.6, 0.0, 0.8));
            let direct = sphere_objective(mass, beta, &up, 0.0, &SphereSpec::default()).unwrap().value;
            assert_relative_eq!(direct, reduced, max_relative = 1e-7);
        }
    }

    #[test]
    fn scale_invariance() {
        let mass = mr(1.0);
        let up = UnreducedPoint { s: Vec3::new(0.3, -0.2, 0.9), k: Vec3::new(-0.5, 0.1, 0.2), q: 0.4 };
        let scaled = UnreducedPoint { s: 3.0 * up.s, k: 3.0 * up.k, q: 1.2 };
        let spec = SphereSpec::default();
        let a = sphere_objective(mass, Beta::ZERO, &up, 0.0, &spec).unwrap().value;
        let b = sphere_objective(mass, Beta::ZERO, &scaled, 0.0, &spec).unwrap().value;
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn zero_k_is_isotropic() {
        let mass = mr(1.0);
        let spec = SphereSpec::default();
        let v: Vec<f64> = [Vec3::new(0.0, 0.0, 1.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.6, 0.0, -0.8)]
            .iter()
            .map(|&s| {
                let up = UnreducedPoint { s, k: Vec3::ZERO, q: 0.5 };
                sphere_objective(mass, Beta::ZERO, &up, 0.0, &spec).unwrap().value
            })
            .collect();
        assert!((v[0] - v[1]).abs() < 1e-10 * v[0] && (v[0] - v[2]).abs() < 1e-10 * v[0]);
    }

    #[test]
    fn positive_mu_lowers_the_objective() {
        let mass = mr(1.0);
        let up = antiparallel(mass, 0.2, 1.0, Vec3::new(0.0, 0.0, 1.0));
        let spec = SphereSpec::default();
        let v0 = sphere_objective(mass, Beta::ZERO, &up, 0.0, &spec).unwrap().value;
        let v1 = sphere_objective(mass, Beta::ZERO, &up, 1.0, &spec).unwrap().value;
        assert!(v1 < v0);
    }

    #[test]
    fn vanishing_shifted_momentum() {
        let mass = mr(1.0);
        let k = Vec3::new(0.0, 0.0, 1.0);
        let up = UnreducedPoint { s: -mass.a() * k, k, q: 0.3 };
        let r = sphere_objective(mass, Beta::ZERO, &up, 0.0, &SphereSpec::default()).unwrap();
        assert_eq!(r.value, 0.0);
    }
}
