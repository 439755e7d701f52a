//! One-dimensional quadrature rules: globally adaptive 21-point
//! Gauss–Kronrod, tanh-sinh for endpoint singularities, and fixed
//! Gauss–Legendre panels.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Value of a definite integral with its error estimate and the number of
/// integrand evaluations spent.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

impl Integral {
    pub fn accumulate(&mut self, other: Integral) {
        self.value += other.value;
        self.error += other.error;
        self.evals += other.evals;
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_767_098_738,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ...
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    // Roundoff floor 50·ε·∫|f| of this panel.
    noise: f64,
}

fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    let noise = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(noise);
    }
    Panel { a, b, value, error, noise }
}

/// Globally adaptive Gauss–Kronrod (G10/K21) over `[points[0], points[last]]`,
/// with the interior `points` as initial breakpoints. The panel with the
/// largest error is bisected until the total error meets
/// `max(rel_tol |I|, abs_tol)` or `max_panels` panels exist. A total error
/// within twice the roundoff floor `50 ε ∫|f|` is accepted as converged.
pub fn gauss_kronrod<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<Integral> {
    assert!(points.len() >= 2, "need at least one interval");
    let mut panels: Vec<Panel> = points.windows(2).filter(|w| w[1] > w[0]).map(|w| gk21(&mut f, w[0], w[1])).collect();
    let mut evals = 21 * panels.len();
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let noise: f64 = panels.iter().map(|p| p.noise).sum();
        let target = (rel_tol * value.abs()).max(abs_tol).max(2.0 * noise);
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::NonConvergence { value, error, evals });
        }
        if error <= target {
            return Ok(Integral { value, error, evals });
        }
        if panels.len() >= max_panels.max(points.len()) {
            return Err(Error::NonConvergence { value, error, evals });
        }
        let (idx, _) = panels.iter().enumerate().max_by(|x, y| x.1.error.total_cmp(&y.1.error)).expect("nonempty");
        let worst = panels.swap_remove(idx);
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Panel can no longer be split in floating point.
            return Err(Error::NonConvergence { value, error, evals });
        }
        panels.push(gk21(&mut f, worst.a, mid));
        panels.push(gk21(&mut f, mid, worst.b));
        evals += 42;
    }
}

const TS_TAU_MAX: f64 = 4.5;

/// Tanh-sinh quadrature on `[a, b]`, robust to integrable singularities at
/// either endpoint. The step is halved until two successive levels agree
/// within `max(rel_tol |I|, abs_tol)`; that difference is the error estimate.
/// Nodes that round onto an endpoint are dropped, so the integrand is never
/// evaluated at `a` or `b`.
pub fn tanh_sinh<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_level: usize,
) -> Result<Integral> {
    if b <= a {
        return Ok(Integral::default());
    }
    let width = b - a;
    let mut evals = 0usize;
    // Sum of w(τ) f(x(τ)) over the nodes τ = k h at the current level.
    let mut node_sum = |tau: f64, evals: &mut usize| -> f64 {
        let u = FRAC_PI_2 * tau.sinh();
        let e = (-2.0 * u.abs()).exp();
        // distance to the nearer endpoint: width / (1 + e^{2|u|})
        let d = width * e / (1.0 + e);
        let x = if u >= 0.0 { b - d } else { a + d };
        if !(x > a && x < b) {
            return 0.0;
        }
        // w = width/2 · (π/2) cosh τ / cosh² u
        let w = width * FRAC_PI_2 * tau.cosh() * 2.0 * e / ((1.0 + e) * (1.0 + e));
        *evals += 1;
        w * f(x)
    };
    let mut h = 1.0;
    let mut sum = node_sum(0.0, &mut evals);
    let mut k = 1;
    while k as f64 * h <= TS_TAU_MAX {
        let tau = k as f64 * h;
        sum += node_sum(tau, &mut evals) + node_sum(-tau, &mut evals);
        k += 1;
    }
    let mut estimate = sum * h;
    let mut error = f64::INFINITY;
    for level in 1..=max_level {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= TS_TAU_MAX {
            let tau = k as f64 * h;
            sum += node_sum(tau, &mut evals) + node_sum(-tau, &mut evals);
            k += 2;
        }
        let next = sum * h;
        error = (next - estimate).abs();
        estimate = next;
        if !estimate.is_finite() {
            break;
        }
        if level >= 3 && error <= (rel_tol * estimate.abs()).max(abs_tol) {
            return Ok(Integral { value: estimate, error, evals });
        }
    }
    Err(Error::NonConvergence { value: estimate, error, evals })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton iteration on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
