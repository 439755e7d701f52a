//! Analytic upper bounds on the functional, the resulting energy lower
//! bound, and the `L`/`G` symbols of the boundary quadratic form.

use std::f64::consts::{PI, SQRT_2};

use super::{gamma, Beta, MassRatio, Vec3};
use crate::error::{domain, Result};

fn common_factor(m: f64) -> f64 {
    let mm2 = m * (m + 2.0);
    (1.0 + m).powi(2) * (2.0 + 4.0 * m + m * m).powf(1.5) / (mm2 * mm2 * mm2)
}

/// `4(1+m)²(2+4m+m²)^{3/2} / (√2 π (m(m+2))³)`, an upper bound on `Λ(m)`.
pub fn analytic_bound(mass: MassRatio) -> f64 {
    4.0 / (SQRT_2 * PI) * common_factor(mass.m())
}

/// Upper bound on `Λ_β(m)`.
///
/// For `β ≤ 1` this is exactly twice [`analytic_bound`]; for `1 < β < 3`
/// it carries the factor `2/(3−β) + (√π/2) Γ((5−β)/4)/Γ((7−β)/4)`, which
/// diverges as `β → 3`.
pub fn analytic_bound_beta(mass: MassRatio, beta: Beta) -> f64 {
    let m = mass.m();
    let b = beta.value();
    if b <= 1.0 {
        return 4.0 * SQRT_2 / PI * common_factor(m);
    }
    let shape = 2.0 / (3.0 - b) + 0.5 * PI.sqrt() * gamma((5.0 - b) / 4.0) / gamma((7.0 - b) / 4.0);
    4.0 / PI * (m + 1.0).powf((b + 7.0) / 4.0) / (m.powi(3) * (2.0 + m).powf((13.0 - b) / 4.0))
        * (2.0 + 4.0 * m + m * m).powf((7.0 - b) / 4.0)
        * shape
}

/// The mass ratio above which [`analytic_bound`] drops below one.
pub fn analytic_bound_threshold() -> f64 {
    let f = |m: f64| analytic_bound(MassRatio::new(m).expect("positive")) - 1.0;
    let (mut lo, mut hi) = (0.5, 10.0);
    // The bound is decreasing in m on this bracket.
    while hi - lo > 1e-14 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Lower bound on the energy form given `Λ(m) < 1`: zero for `α ≥ 0`,
/// `−(α/(2π²(1−Λ)))²` for `α < 0`.
pub fn energy_lower_bound(alpha: f64, _mass: MassRatio, lambda_m: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&lambda_m) {
        return Err(domain(format!("energy bound needs 0 <= Lambda(m) < 1, got {lambda_m}")));
    }
    if !alpha.is_finite() {
        return Err(domain(format!("alpha must be finite, got {alpha}")));
    }
    if alpha >= 0.0 {
        return Ok(0.0);
    }
    let x = alpha / (2.0 * PI * PI * (1.0 - lambda_m));
    Ok(-x * x)
}

fn pair_sums(q: &[Vec3]) -> (f64, f64) {
    let diag = q.iter().map(|v| v.norm2()).sum();
    let mut off = 0.0;
    for (i, a) in q.iter().enumerate() {
        for b in &q[i + 1..] {
            off += a.dot(*b);
        }
    }
    (diag, off)
}

/// `L(q₁…) = 2π² ( m(m+2)/(m+1)² Σq² + 2m/(m+1)² Σ_{i<j} qᵢ·qⱼ + μ )^{1/2}`.
pub fn l_func(mass: MassRatio, q: &[Vec3], mu: f64) -> Result<f64> {
    if q.is_empty() {
        return Err(domain("L needs at least one momentum"));
    }
    if !(mu > 0.0) {
        return Err(domain(format!("mu must be positive, got {mu}")));
    }
    let m = mass.m();
    let (diag, off) = pair_sums(q);
    let rad = mass.radial_coeff() * diag + 2.0 * m / ((m + 1.0) * (m + 1.0)) * off + mu;
    if !(rad > 0.0) {
        return Err(domain(format!("L radicand not positive: {rad}")));
    }
    Ok(2.0 * PI * PI * rad.sqrt())
}

/// `G(q₁…) = ( Σq² + 2/(m+1) Σ_{i<j} qᵢ·qⱼ + μ )⁻¹`.
pub fn g_func(mass: MassRatio, q: &[Vec3], mu: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(domain(format!("mu must be positive, got {mu}")));
    }
    let (diag, off) = pair_sums(q);
    let den = diag + mass.lam() * off + mu;
    if !(den > 0.0) {
        return Err(domain(format!("G denominator not positive: {den}")));
    }
    Ok(1.0 / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mr(m: f64) -> MassRatio {
        MassRatio::new(m).unwrap()
    }

    #[test]
    fn gamma_at_the_bound_arguments() {
        // The bound needs Γ on (1/4, 7/4]; reference values from mpmath.
        for (x, want) in [
            (0.25, 3.6256099082219083119),
            (0.5, 1.7724538509055160273),
            (0.75, 1.2254167024651776451),
            (1.25, 0.90640247705547707798),
            (1.5, 0.88622692545275801365),
            (1.75, 0.91906252684888323385),
        ] {
            assert_relative_eq!(gamma(x), want, max_relative = 1e-13);
        }
    }

    #[test]
    fn bound_at_unit_mass() {
        // 50-digit reference 2.4702357802842282661
        assert_relative_eq!(analytic_bound(mr(1.0)), 2.4702357802842282661, max_relative = 1e-14);
        assert!((analytic_bound(mr(1.0)) - 2.47).abs() < 0.01);
    }

    #[test]
    fn bound_threshold() {
        let root = analytic_bound_threshold();
        assert_relative_eq!(root, 1.760844216141154689, max_relative = 1e-12);
    }

    #[test]
    fn bound_vanishes_for_heavy_particle() {
        assert!(analytic_bound(mr(1e4)) < 1e-3);
    }

    #[test]
    fn beta_bound_low_branch_doubles() {
        for m in [0.3, 1.0, 7.0] {
            for b in [0.0, 0.4, 1.0] {
                assert_relative_eq!(
                    analytic_bound_beta(mr(m), Beta::new(b).unwrap()),
                    2.0 * analytic_bound(mr(m)),
                    max_relative = 1e-14
                );
            }
        }
        assert_relative_eq!(analytic_bound_beta(mr(1.0), Beta::ZERO), 4.9404715605684565, max_relative = 1e-14);
    }

    #[test]
    fn beta_bound_high_branch_reference() {
        // mpmath, 50 digits
        assert_relative_eq!(
            analytic_bound_beta(mr(1.0), Beta::new(2.0).unwrap()),
            10.750142262683986084,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            analytic_bound_beta(mr(1.0), Beta::new(1.5).unwrap()),
            8.2917310339313971516,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            analytic_bound_beta(mr(0.5), Beta::new(2.5).unwrap()),
            65.6012189249467859,
            max_relative = 1e-12
        );
    }

    #[test]
    fn beta_bound_nondecreasing_in_beta() {
        for m in [0.05, 0.3, 1.0, 5.0, 50.0] {
            let mut prev = 0.0;
            for i in 0..=290 {
                let b = i as f64 * 0.01;
                let v = analytic_bound_beta(mr(m), Beta::new(b).unwrap());
                assert!(v >= prev * (1.0 - 1e-14), "m {m} beta {b}");
                prev = v;
            }
        }
    }

    #[test]
    fn beta_bound_decays_like_inverse_mass() {
        for b in [0.0, 1.0, 2.0] {
            let beta = Beta::new(b).unwrap();
            let scaled: Vec<f64> =
                [10.0, 100.0, 1000.0].iter().map(|&m| m * analytic_bound_beta(mr(m), beta)).collect();
            assert!(scaled[1] <= scaled[0] && scaled[2] <= scaled[1], "{scaled:?}");
        }
    }

    #[test]
    fn energy_bound() {
        let m = mr(1.0);
        assert_eq!(energy_lower_bound(0.0, m, 0.34).unwrap(), 0.0);
        assert_eq!(energy_lower_bound(3.0, m, 0.34).unwrap(), 0.0);
        for lam in [0.0, 0.34, 0.9] {
            let alpha = -2.0 * PI * PI * (1.0 - lam);
            assert_relative_eq!(energy_lower_bound(alpha, m, lam).unwrap(), -1.0, max_relative = 1e-15);
        }
        // mpmath: -0.0058918630938270977899
        assert_relative_eq!(
            energy_lower_bound(-1.0, m, 0.34).unwrap(),
            -0.0058918630938270977899,
            max_relative = 1e-14
        );
        assert!(energy_lower_bound(-1.0, m, 1.0).is_err());
    }

    #[test]
    fn l_func_examples() {
        let m = mr(1.0);
        let q = Vec3::new(0.3, -1.1, 0.4);
        let two_pi2 = 2.0 * PI * PI;
        assert_relative_eq!(
            l_func(m, &[q], 1.0).unwrap(),
            two_pi2 * (0.75 * q.norm2() + 1.0).sqrt(),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            l_func(mr(3.0), &[Vec3::ZERO, Vec3::ZERO], 2.5).unwrap(),
            two_pi2 * 2.5f64.sqrt(),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            l_func(m, &[q, q], 0.7).unwrap(),
            two_pi2 * (1.5 * q.norm2() + 0.5 * q.norm2() + 0.7).sqrt(),
            max_relative = 1e-15
        );
        assert!(l_func(m, &[], 1.0).is_err());
        assert!(l_func(m, &[q], 0.0).is_err());
    }

    #[test]
    fn g_func_examples() {
        assert_relative_eq!(
            g_func(mr(2.0), &[Vec3::ZERO, Vec3::ZERO, Vec3::ZERO], 0.4).unwrap(),
            2.5,
            max_relative = 1e-15
        );
        let s = Vec3::new(1.0, 2.0, 0.0);
        let t = Vec3::new(-2.0, 1.0, 3.0);
        assert_relative_eq!(
            g_func(mr(0.37), &[s, t], 1.3).unwrap(),
            1.0 / (s.norm2() + t.norm2() + 1.3),
            max_relative = 1e-15
        );
        assert_relative_eq!(g_func(mr(1.0), &[-t, t], 0.5).unwrap(), 1.0 / (t.norm2() + 0.5), max_relative = 1e-15);
        assert!(g_func(mr(1.0), &[s], -1.0).is_err());
    }
}
