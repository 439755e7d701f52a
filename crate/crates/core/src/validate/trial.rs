//! p-wave Gaussian trial functions `ξ̂(s) = s_z e^{−a s²}` at `N = 2` and
//! the quadratic forms they produce, reduced to one-dimensional integrals
//! through the Schwinger representation
//! `G(s,t) = ∫₀^∞ exp(−r (s² + t² + λ s·t + μ)) dr`.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::kernels::{g_func, l_func, MassRatio, Vec3};
use crate::quadrature::{integrate_half_line, Integral, QuadratureSpec};

/// `ξ̂(s) = s_z e^{−a s²}` with spectral parameter `μ` of the forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialFunction {
    pub a: f64,
    pub mu: f64,
}

// ∫ dΩ cos²θ
const P_WAVE_ANGULAR: f64 = 4.0 * PI / 3.0;

impl TrialFunction {
    pub fn new(a: f64, mu: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && mu > 0.0 && mu.is_finite()) {
            return Err(domain(format!("trial function needs a > 0, mu > 0, got a = {a}, mu = {mu}")));
        }
        Ok(Self { a, mu })
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec { rel_tol: 1e-12, abs_tol: 1e-300, ..QuadratureSpec::default() }
    }

    /// `L(ρ)` for a single momentum of magnitude `ρ`.
    pub fn l_radial(&self, mass: MassRatio, rho: f64) -> f64 {
        2.0 * PI * PI * (mass.radial_coeff() * rho * rho + self.mu).sqrt()
    }

    /// `T_diag(ξ) = ∫ L(s) |ξ̂(s)|² ds = (4π/3) ∫₀^∞ ρ⁴ e^{−2aρ²} L(ρ) dρ`.
    pub fn t_diag(&self, mass: MassRatio) -> Result<Integral> {
        self.radial_moment(|rho| rho.powi(4) * (-2.0 * self.a * rho * rho).exp() * self.l_radial(mass, rho))
    }

    /// `T_off(ξ) = ∫∫ ξ̂(s) G(s,t) ξ̂(t) ds dt
    ///          = −∫₀^∞ e^{−rμ} π³ λ r / (4 det^{5/2}) dr`,
    /// `det = (a+r)² − r²λ²/4`.
    pub fn t_off(&self, mass: MassRatio) -> Result<Integral> {
        let lam = mass.lam();
        let a = self.a;
        let mut r = integrate_half_line(
            |r| {
                let alpha = a + r;
                let det = alpha * alpha - 0.25 * r * r * lam * lam;
                (-r * self.mu).exp() * PI.powi(3) * lam * r / (4.0 * det.powf(2.5))
            },
            None,
            a.max(1.0 / self.mu).min(1e6),
            &Self::spec(),
        )?;
        r.value = -r.value;
        Ok(r)
    }

    /// Radial profile `j(ρ)` of `(Jξ)(s) = ∫ G(s,t) ξ̂(t) dt = s_z j(|s|)`:
    /// `j(ρ) = −∫₀^∞ (rλ/(2α)) (π/α)^{3/2} exp(−r(ρ² + μ) + r²λ²ρ²/(4α)) dr`,
    /// `α = a + r`.
    pub fn j_profile(&self, mass: MassRatio, rho: f64) -> Result<f64> {
        let lam = mass.lam();
        let (a, mu) = (self.a, self.mu);
        let rho2 = rho * rho;
        let r = integrate_half_line(
            |r| {
                let alpha = a + r;
                let expo = -r * (rho2 + mu) + r * r * lam * lam * rho2 / (4.0 * alpha);
                r * lam / (2.0 * alpha) * (PI / alpha).powf(1.5) * expo.exp()
            },
            None,
            a.max(1.0 / (rho2 + mu)).min(1e6),
            &Self::spec(),
        )?;
        Ok(-r.value)
    }

    /// `‖L^{(β−1)/2} Γξ‖²` with `Γξ = Lξ + Jξ`.
    pub fn gamma_form(&self, mass: MassRatio, beta: f64) -> Result<Integral> {
        let mut failure = None;
        let out = self.radial_moment(|rho| {
            let l = self.l_radial(mass, rho);
            let j = match self.j_profile(mass, rho) {
                Ok(j) => j,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            };
            let g = l * (-self.a * rho * rho).exp() + j;
            rho.powi(4) * l.powf(beta - 1.0) * g * g
        });
        match failure {
            Some(e) => Err(e),
            None => out,
        }
    }

    /// `‖L^{(β+1)/2} ξ‖²`.
    pub fn l_form(&self, mass: MassRatio, beta: f64) -> Result<Integral> {
        self.radial_moment(|rho| {
            rho.powi(4) * (-2.0 * self.a * rho * rho).exp() * self.l_radial(mass, rho).powf(beta + 1.0)
        })
    }

    /// `T_off` recomputed from the radial profile, `∫ ξ̂ (Jξ) ds`.
    pub fn t_off_from_profile(&self, mass: MassRatio) -> Result<Integral> {
        let mut failure = None;
        let out = self.radial_moment(|rho| {
            let j = self.j_profile(mass, rho).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                f64::NAN
            });
            rho.powi(4) * (-self.a * rho * rho).exp() * j
        });
        match failure {
            Some(e) => Err(e),
            None => out,
        }
    }

    // (4π/3) ∫₀^∞ f(ρ) dρ for p-wave radial integrands.
    fn radial_moment<F: FnMut(f64) -> f64>(&self, f: F) -> Result<Integral> {
        let mut r = integrate_half_line(f, None, 1.0 / self.a.sqrt(), &Self::spec())?;
        r.value *= P_WAVE_ANGULAR;
        r.error *= P_WAVE_ANGULAR;
        Ok(r)
    }

    /// Plain Monte Carlo estimate of `T_off` straight from the six-dimensional
    /// definition: with `s, t ~ N(0, 1/(2a))³`,
    /// `T_off = (π/a)³ E[s_z t_z G(s, t)]`. Returns `(mean, standard error)`.
    pub fn t_off_monte_carlo(&self, mass: MassRatio, n_samples: usize, seed: u64) -> Result<(f64, f64)> {
        if n_samples < 2 {
            return Err(domain("Monte Carlo check needs at least two samples"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, (0.5 / self.a).sqrt()).expect("positive width");
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..n_samples {
            let mut draw = || Vec3::new(normal.sample(&mut rng), normal.sample(&mut rng), normal.sample(&mut rng));
            let s = draw();
            let t = draw();
            let v = s.0[2] * t.0[2] * g_func(mass, &[s, t], self.mu)?;
            sum += v;
            sum2 += v * v;
        }
        let n = n_samples as f64;
        let mean = sum / n;
        let var = (sum2 / n - mean * mean).max(0.0) * n / (n - 1.0);
        let norm = (PI / self.a).powi(3);
        Ok((norm * mean, norm * (var / n).sqrt()))
    }

    /// Checks [`Self::t_off`] against [`Self::t_off_monte_carlo`]; fails with
    /// [`Error::DerivationMismatch`] beyond three standard errors.
    pub fn self_check(&self, mass: MassRatio, n_samples: usize, seed: u64) -> Result<(f64, f64, f64)> {
        let closed = self.t_off(mass)?.value;
        let (mc, se) = self.t_off_monte_carlo(mass, n_samples, seed)?;
        if (closed - mc).abs() > 3.0 * se {
            return Err(Error::DerivationMismatch { closed_form: closed, monte_carlo: mc, std_err: se });
        }
        Ok((closed, mc, se))
    }
}

/// `L(s)` through the library's multi-momentum definition, for cross-checks.
pub fn l_single(mass: MassRatio, s: Vec3, mu: f64) -> Result<f64> {
    l_func(mass, &[s], mu)
}
