//! Closed-form scalar kernels: the `ℓ` factors, the partial-fraction
//! parameters of the angular integral, the `β`-weight and the radial and
//! full three-dimensional integrands of the stability functional.
//!
//! Everything here is a pure function of its arguments.

mod bounds;

pub use bounds::{analytic_bound, analytic_bound_beta, analytic_bound_threshold, energy_lower_bound, g_func, l_func};
pub use statrs::function::gamma::gamma;

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Largest `κ` used in numerical work. `κ = b/(1 − A b)` diverges at the
/// boundary `b = 2 + m`, where the integrand vanishes.
pub const KAPPA_CAP: f64 = 1e8;

/// Mass of the distinguished particle in units of the fermion mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassRatio {
    m: f64,
    a: f64,
    lam: f64,
}

impl MassRatio {
    pub fn new(m: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(domain(format!("mass ratio must be positive and finite, got {m}")));
        }
        Ok(Self { m, a: 1.0 / (m + 2.0), lam: 2.0 / (m + 1.0) })
    }

    #[inline]
    pub fn m(&self) -> f64 {
        self.m
    }

    /// `A = 1/(m+2)`, the shift coefficient of the collective momentum.
    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    /// `λ = 2/(m+1)`, the cross-coupling in the kinetic quadratic form.
    #[inline]
    pub fn lam(&self) -> f64 {
        self.lam
    }

    /// Upper end `1/A = 2 + m` of the `b` interval.
    #[inline]
    pub fn b_max(&self) -> f64 {
        self.m + 2.0
    }

    /// `m/(m+1)`
    #[inline]
    pub(crate) fn reduced(&self) -> f64 {
        self.m / (self.m + 1.0)
    }

    /// `m(m+2)/(m+1)²`
    #[inline]
    pub(crate) fn radial_coeff(&self) -> f64 {
        self.m * (self.m + 2.0) / ((self.m + 1.0) * (self.m + 1.0))
    }
}

/// Weight exponent of the generalized functional, `0 ≤ β < 3`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Beta(f64);

impl Beta {
    pub const ZERO: Beta = Beta(0.0);

    pub fn new(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && (0.0..3.0).contains(&beta)) {
            return Err(domain(format!("beta must lie in [0, 3), got {beta}")));
        }
        Ok(Self(beta))
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.0 == 0.0
    }
}

/// A point `(Q, b)` of the reduced supremum domain (with `|s̃| = 1` and
/// `K = −b s`). `κ = b/(1 − A b)` is carried along, `+∞` at `b = 2 + m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedPoint {
    q: f64,
    b: f64,
    kappa: f64,
}

impl ReducedPoint {
    pub fn from_b(mass: MassRatio, q: f64, b: f64) -> Result<Self> {
        check_q(q)?;
        let b_max = mass.b_max();
        if !(b.is_finite() && (0.0..=b_max).contains(&b)) {
            return Err(domain(format!("b must lie in [0, {b_max}], got {b}")));
        }
        let kappa = if b >= b_max { f64::INFINITY } else { b / (1.0 - mass.a() * b) };
        Ok(Self { q, b, kappa })
    }

    pub fn from_kappa(mass: MassRatio, q: f64, kappa: f64) -> Result<Self> {
        check_q(q)?;
        if !(kappa >= 0.0) {
            return Err(domain(format!("kappa must be nonnegative, got {kappa}")));
        }
        let b = if kappa.is_infinite() { mass.b_max() } else { kappa / (1.0 + kappa * mass.a()) };
        Ok(Self { q, b, kappa })
    }

    #[inline]
    pub fn q(&self) -> f64 {
        self.q
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }

    #[inline]
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `κ` clipped to [`KAPPA_CAP`] for numerical evaluation.
    #[inline]
    pub fn kappa_eff(&self) -> f64 {
        self.kappa.min(KAPPA_CAP)
    }

    /// `S = Q² + A κ²`, the combined transverse scale entering `ℓ`.
    #[inline]
    pub fn s_param(&self, mass: MassRatio) -> f64 {
        let k = self.kappa_eff();
        self.q * self.q + mass.a() * k * k
    }

    /// Location `t = A κ` of the logarithmic singularity of the radial integrand.
    #[inline]
    pub fn singular_point(&self, mass: MassRatio) -> f64 {
        mass.a() * self.kappa_eff()
    }
}

fn check_q(q: f64) -> Result<()> {
    if !(q.is_finite() && q >= 0.0) {
        return Err(domain(format!("Q must be finite and nonnegative, got {q}")));
    }
    Ok(())
}

/// Plain 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    #[inline]
    pub fn dot(self, other: Vec3) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    #[inline]
    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        let [a, b, c] = self.0;
        let [x, y, z] = o.0;
        Vec3([b * z - c * y, c * x - a * z, a * y - b * x])
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        Vec3([self * v.0[0], self * v.0[1], self * v.0[2]])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

/// A point `(s, K, Q)` of the unreduced supremum domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnreducedPoint {
    pub s: Vec3,
    pub k: Vec3,
    pub q: f64,
}

impl UnreducedPoint {
    pub fn new(s: Vec3, k: Vec3, q: f64) -> Result<Self> {
        check_q(q)?;
        Ok(Self { s, k, q })
    }
}

/// `ℓ_m(s, K, Q) = ( m/(m+1)² (s+K)² + m/(m+1) (s² + Q²) )^{1/2}`.
pub fn ell_unshifted(mass: MassRatio, s: Vec3, k: Vec3, q: f64) -> f64 {
    ell_unshifted_sq(mass, s, k, q).sqrt()
}

#[inline]
fn ell_unshifted_sq(mass: MassRatio, s: Vec3, k: Vec3, q: f64) -> f64 {
    let m = mass.m();
    m / ((m + 1.0) * (m + 1.0)) * (s + k).norm2() + mass.reduced() * (s.norm2() + q * q)
}

/// `ℓ` after the shift by `A K`, depending on the radius `r = |s̃|` and
/// `S = Q² + A K²` only: `( m(m+2)/(m+1)² r² + m/(m+1) S )^{1/2}`.
#[inline]
pub fn ell_shifted(mass: MassRatio, r: f64, s_param: f64) -> f64 {
    (mass.radial_coeff() * r * r + mass.reduced() * s_param).sqrt()
}

/// Partial-fraction parameters `(λ₁, λ₂)` of the angular integral at
/// `|s̃| = 1`:
///
/// `λ₁ = 4A²κ²t²/(t² + A²κ²)²`, `λ₂ = 4/(m+1)² · t²/(t² + 1 + m/(m+1) S)²`.
pub fn lambda_pair(mass: MassRatio, kappa: f64, t: f64, s_param: f64) -> (f64, f64) {
    let c = mass.a() * kappa;
    let lambda1 = if c == 0.0 {
        0.0
    } else {
        let den = t * t + c * c;
        4.0 * c * c * t * t / (den * den)
    };
    (lambda1, lambda2(mass, t, s_param))
}

#[inline]
fn lambda2(mass: MassRatio, t: f64, s_param: f64) -> f64 {
    let d = 1.0 + t * t + mass.reduced() * s_param;
    let m1 = mass.m() + 1.0;
    4.0 * t * t / (m1 * m1 * d * d)
}

/// `ln(1 − λ₁)` computed from the factorization
/// `1 − λ₁ = (t² − c²)²/(t² + c²)²`, `c = Aκ`; exact cancellation-free
/// near `t = c`, `−∞` at `t = c`.
#[inline]
fn ln_one_minus_lambda1(t: f64, c: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    2.0 * ((t - c).abs().ln() + (t + c).ln() - (t * t + c * c).ln())
}

/// `Φ(λ₁, λ₂) = ∫₀¹ dv / ((1 − λ₁ v)(1 − λ₂ v)) = (ln(1−λ₁) − ln(1−λ₂))/(λ₂ − λ₁)`.
///
/// The confluent case uses the exact rewriting
/// `Φ = −ln(1 − x) / (x (1 − λ₁))`, `x = (λ₂ − λ₁)/(1 − λ₁)`, expanded in `x`.
pub fn phi_log_quotient(lambda1: f64, lambda2: f64) -> Result<f64> {
    if !(lambda2 < 1.0) {
        return Err(domain(format!("lambda2 must be < 1, got {lambda2}")));
    }
    if !(lambda1 <= 1.0) {
        return Err(domain(format!("lambda1 must be <= 1, got {lambda1}")));
    }
    if lambda1 == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(phi_with_log(lambda1, (-lambda1).ln_1p(), lambda2))
}

/// [`phi_log_quotient`] with a caller-supplied `ln(1 − λ₁)`.
#[inline]
pub(crate) fn phi_with_log(lambda1: f64, ln_1m_l1: f64, lambda2: f64) -> f64 {
    if ln_1m_l1 == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    let one_m_l1 = ln_1m_l1.exp();
    let x = (lambda2 - lambda1) / one_m_l1;
    if x.abs() <= 1e-3 {
        // -ln(1-x)/x = 1 + x/2 + x²/3 + ...
        let series = 1.0 + x * (0.5 + x * (1.0 / 3.0 + x * (0.25 + x * (0.2 + x / 6.0))));
        series / one_m_l1
    } else if x.abs() < 0.5 {
        -(-x).ln_1p() / (x * one_m_l1)
    } else {
        (ln_1m_l1 - (-lambda2).ln_1p()) / (lambda2 - lambda1)
    }
}

/// `ℓ_s^{(β−1)/2}/ℓ_t^{(β+1)/2} + ℓ_t^{(β−1)/2}/ℓ_s^{(β+1)/2}`.
pub fn weight_beta(beta: Beta, l_s: f64, l_t: f64) -> f64 {
    let b = beta.value();
    if b == 0.0 {
        return 2.0 / (l_s * l_t).sqrt();
    }
    if b == 1.0 {
        return 1.0 / l_t + 1.0 / l_s;
    }
    let (ln_s, ln_t) = (l_s.ln(), l_t.ln());
    let lo = 0.5 * (b - 1.0);
    let hi = 0.5 * (b + 1.0);
    (lo * ln_s - hi * ln_t).exp() + (lo * ln_t - hi * ln_s).exp()
}

/// Radial integrand of the reduced functional at `|s̃| = 1`, after the
/// closed-form angular integration:
///
/// `2/(π(1+m)) · ((1+Aκ)² + Q²) · w_β(ℓ̃(1,S), ℓ̃(t,S)) · t²/(t² + A²κ²)
///  · t/(1 + t² + m/(1+m) S)² · Φ(λ₁, λ₂)`
///
/// At `β = 0` this is twice the integrand whose supremum is `Λ(m)`.
/// Returns `+∞` at `t = Aκ` (integrable logarithmic singularity).
pub fn reduced_integrand(mass: MassRatio, beta: Beta, p: &ReducedPoint, t: f64) -> f64 {
    let kappa = p.kappa_eff();
    let q = p.q();
    let c = mass.a() * kappa;
    let s_param = p.s_param(mass);
    if t == 0.0 {
        return reduced_integrand_at_origin(mass, beta, p);
    }
    let l_s = ell_shifted(mass, 1.0, s_param);
    let l_t = ell_shifted(mass, t, s_param);
    let d = 1.0 + t * t + mass.reduced() * s_param;
    let t2 = t * t;
    let ratio = if c == 0.0 { 1.0 } else { t2 / (t2 + c * c) };
    let (lambda1, lambda2) = lambda_pair(mass, kappa, t, s_param);
    let phi = phi_with_log(lambda1, ln_one_minus_lambda1(t, c), lambda2);
    let pre = 2.0 / (PI * (1.0 + mass.m())) * ((1.0 + c) * (1.0 + c) + q * q);
    pre * weight_beta(beta, l_s, l_t) * ratio * t / (d * d) * phi
}

// Limit t -> 0. Only the Q = κ = 0 corner with β ≥ 1 is nonzero: there
// ℓ̃(t, 0) ∝ t and the integrand behaves like t^{(1-β)/2}.
fn reduced_integrand_at_origin(mass: MassRatio, beta: Beta, p: &ReducedPoint) -> f64 {
    if p.s_param(mass) > 0.0 || beta.value() < 1.0 {
        return 0.0;
    }
    if beta.value() > 1.0 {
        return f64::INFINITY;
    }
    // β = 1: w ~ 1/ℓ̃(t,0) = (m+1)/(sqrt(m(m+2)) t); all other factors are 1 or t.
    let pre = 2.0 / (PI * (1.0 + mass.m()));
    pre / mass.radial_coeff().sqrt()
}

/// Full three-dimensional integrand of the generalized functional at the
/// unreduced point `(s, K, Q)` and integration variable `t`:
///
/// `(s² + Q²)/(π²(1+m)) · t⁻² · w_β(ℓ_s, ℓ_t) · |(s+AK)·(t+AK)| /
///  ( [(s+AK)² + (t+AK)² + m/(1+m)(Q² + AK²) + μ]² − [2/(1+m) (s+AK)·(t+AK)]² )`
///
/// with `μ` added to both `ℓ²` factors. At `β = 0` this is twice
/// `(s²+Q²) t⁻² |τ⁰₋(s,t)|`.
pub fn unreduced_integrand(mass: MassRatio, beta: Beta, up: &UnreducedPoint, t: Vec3, mu: f64) -> Result<f64> {
    let t2 = t.norm2();
    if t2 == 0.0 {
        return Err(domain("unreduced integrand evaluated at t = 0"));
    }
    if !(mu >= 0.0) {
        return Err(domain(format!("mu must be nonnegative, got {mu}")));
    }
    Ok(unreduced_integrand_unchecked(mass, beta, up, t, mu))
}

#[inline]
pub(crate) fn unreduced_integrand_unchecked(mass: MassRatio, beta: Beta, up: &UnreducedPoint, t: Vec3, mu: f64) -> f64 {
    let m = mass.m();
    let a = mass.a();
    let (s, k, q) = (up.s, up.k, up.q);
    let l_s = (ell_unshifted_sq(mass, s, k, q) + mu).sqrt();
    let l_t = (ell_unshifted_sq(mass, t, k, q) + mu).sqrt();
    let sa = s + a * k;
    let ta = t + a * k;
    let dot = sa.dot(ta);
    let e = sa.norm2() + ta.norm2() + mass.reduced() * (q * q + a * k.norm2()) + mu;
    let cross = mass.lam() * dot;
    let den = (e - cross) * (e + cross);
    let pre = (s.norm2() + q * q) / (PI * PI * (1.0 + m));
    pre / t.norm2() * weight_beta(beta, l_s, l_t) * dot.abs() / den
}
