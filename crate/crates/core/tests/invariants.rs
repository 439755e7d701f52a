//! Cross-module invariants of the supremum and of the validation reports.

use std::f64::consts::PI;

use point_stability_core::kernels::{analytic_bound, analytic_bound_beta, reduced_integrand};
use point_stability_core::optimize::{lambda_beta, refine_from, SearchOptions};
use point_stability_core::quadrature::{integrate_half_line, integrate_radial};
use point_stability_core::validate::{angular_consistency, trial_inequality_thm2};
use point_stability_core::{Beta, MassRatio, ProbeReport, QuadratureSpec, ReducedPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mr(m: f64) -> MassRatio {
    MassRatio::new(m).unwrap()
}

fn beta(b: f64) -> Beta {
    Beta::new(b).unwrap()
}

// The β = 0 radial integrand transcribed directly at |s̃| = 1, without the
// weight generalization: half of `reduced_integrand` at β = 0.
fn direct_integrand(m: f64, q: f64, kappa: f64, t: f64) -> f64 {
    let a = 1.0 / (m + 2.0);
    let c2 = (a * kappa).powi(2);
    let transverse = m / (m + 1.0) * (q * q + a * kappa * kappa);
    let ell = |x2: f64| m * (m + 2.0) / (m + 1.0).powi(2) * x2 + transverse;
    let t2 = t * t;
    let denom = 1.0 + t2 + transverse;
    let l1 = 4.0 * c2 * t2 / (t2 + c2).powi(2);
    let one_minus_l1 = ((t2 - c2) / (t2 + c2)).powi(2);
    let l2 = 4.0 / (m + 1.0).powi(2) * t2 / denom.powi(2);
    let phi = if (l2 - l1).abs() > 1e-8 * one_minus_l1 {
        (one_minus_l1.ln() - (-l2).ln_1p()) / (l2 - l1)
    } else {
        1.0 / one_minus_l1
    };
    2.0 * ((1.0 + kappa * a).powi(2) + q * q) / (PI * (1.0 + m)) * ell(1.0).powf(-0.25) * t2 / (t2 + c2)
        * ell(t2).powf(-0.25)
        * t
        / denom.powi(2)
        * phi
}

#[test]
fn beta_zero_is_twice_the_direct_transcription() {
    let spec = QuadratureSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let m = 10f64.powf(rng.random_range(-1.0..1.3));
        let mass = mr(m);
        let q = rng.random_range(0.0..3.0);
        let b = rng.random_range(0.0..0.98) * mass.b_max();
        let p = ReducedPoint::from_b(mass, q, b).unwrap();
        let c = mass.a() * p.kappa();
        for t in [0.05, 0.7 * c + 0.01, 1.3 * c + 0.02, 4.0] {
            let lib = reduced_integrand(mass, Beta::ZERO, &p, t);
            let direct = direct_integrand(m, q, p.kappa(), t);
            // The transcription's log-difference quotient loses a few digits
            // when both λ are tiny (small t); the library switches to a series.
            assert!((lib - 2.0 * direct).abs() <= 1e-10 * lib, "m={m} q={q} b={b} t={t}: {lib} vs {direct}");
        }
        let lib = integrate_radial(mass, Beta::ZERO, &p, &spec).unwrap().value;
        let direct = integrate_half_line(
            |t| direct_integrand(m, q, p.kappa(), t),
            (c > 0.0).then_some(c),
            1f64.max(c).max(p.s_param(mass).sqrt()),
            &spec,
        )
        .unwrap()
        .value;
        assert!((lib - 2.0 * direct).abs() <= 1e-8 * lib, "m={m}: {lib} vs 2 x {direct}");
    }
}

#[test]
fn supremum_grows_with_beta_and_is_midpoint_convex() {
    let spec = QuadratureSpec::default();
    for m in [0.5, 1.0, 3.0] {
        let mass = mr(m);
        let r: Vec<_> =
            [0.0, 0.5, 1.0, 1.5, 2.0].iter().map(|&b| lambda_beta(mass, beta(b), &spec, 1e-5).unwrap()).collect();
        let err = |i: usize| r[i].quad_err + r[i].opt_err;
        for i in 0..4 {
            assert!(r[i].value <= r[i + 1].value + err(i) + err(i + 1), "m={m}: beta step {i}");
        }
        for i in 1..4 {
            let slack = 2.0 * (err(i - 1) + err(i) + err(i + 1));
            assert!(
                r[i].value <= 0.5 * (r[i - 1].value + r[i + 1].value) + slack,
                "m={m}: not convex at beta = {}",
                0.5 * i as f64
            );
        }
    }
}

#[test]
fn supremum_below_analytic_bounds() {
    let spec = QuadratureSpec::default();
    for m in [0.2, 0.7, 1.5, 6.0, 30.0] {
        let mass = mr(m);
        let l0 = lambda_beta(mass, Beta::ZERO, &spec, 1e-5).unwrap();
        assert!(l0.stability_constant() <= analytic_bound(mass) + l0.stability_error());
        for b in [0.5, 1.0, 1.5, 2.0] {
            let r = lambda_beta(mass, beta(b), &spec, 1e-5).unwrap();
            assert!(r.value <= analytic_bound_beta(mass, beta(b)) + r.quad_err + r.opt_err, "m={m}, beta={b}");
        }
    }
}

#[test]
fn random_restarts_never_beat_the_reported_supremum() {
    let spec = QuadratureSpec::default();
    let opts = SearchOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (m, b) in [(1.0, 0.0), (0.5, 1.0), (4.0, 2.0)] {
        let mass = mr(m);
        let best = lambda_beta(mass, beta(b), &spec, 1e-5).unwrap();
        for _ in 0..10 {
            let q = rng.random_range(0.0..5.0);
            let bb = rng.random_range(0.0..0.95) * mass.b_max();
            let start = ReducedPoint::from_b(mass, q, bb).unwrap();
            let r = refine_from(mass, beta(b), &spec, start, &opts).unwrap();
            assert!(
                r.value <= best.value + best.opt_err + best.quad_err + r.quad_err,
                "m={m} beta={b}: restart {} > {}",
                r.value,
                best.value
            );
        }
    }
}

#[test]
fn reports_are_reproducible_across_thread_counts() {
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| angular_consistency(mr(0.8), beta(1.0), 60, 21).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn reports_round_trip_through_json() {
    let passed = angular_consistency(mr(1.0), Beta::ZERO, 10, 1).unwrap();
    let back: ProbeReport = serde_json::from_str(&serde_json::to_string(&passed).unwrap()).unwrap();
    assert_eq!(back, passed);
    // No samples in regime: infinite and NaN statistics survive the trip.
    let skipped = trial_inequality_thm2(mr(0.5), beta(2.0), &[1.0], 1.0, 1.5).unwrap();
    let text = serde_json::to_string(&skipped).unwrap();
    let back: ProbeReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back.max_violation, f64::NEG_INFINITY);
    assert!(back.observed.is_nan());
    assert_eq!(back.out_of_regime, 1);
}
