//! Python bindings: `import point_stability`.
//!
//! Masses and weight exponents are plain floats on the Python side; the
//! results come back as small frozen classes. Domain errors raise
//! `ValueError`; failed quadratures and root searches raise
//! `NonConvergenceError`, a failed Monte Carlo self-check raises
//! `DerivationMismatchError` (both subclasses of `RuntimeError`).

use std::collections::BTreeMap;

use point_stability_core::kernels::{self, ReducedPoint};
use point_stability_core::optimize;
use point_stability_core::validate::{self, SphereSpec};
use point_stability_core::{Beta, Error, MassRatio, QuadratureSpec};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(point_stability, NonConvergenceError, PyRuntimeError);
create_exception!(point_stability, DerivationMismatchError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Domain(_) => PyValueError::new_err(msg),
        Error::NonConvergence { .. } | Error::NoBracket { .. } => NonConvergenceError::new_err(msg),
        Error::DerivationMismatch { .. } => DerivationMismatchError::new_err(msg),
    }
}

fn mass(m: f64) -> PyResult<MassRatio> {
    MassRatio::new(m).map_err(to_py)
}

fn beta(b: f64) -> PyResult<Beta> {
    Beta::new(b).map_err(to_py)
}

fn spec(rel_tol: f64) -> PyResult<QuadratureSpec> {
    let s = QuadratureSpec::default().with_rel_tol(rel_tol);
    s.validate().map_err(to_py)?;
    Ok(s)
}

/// Supremum of the reduced objective. `value` is the raw supremum;
/// `stability_constant` is the number compared with 1 (half the supremum at
/// `beta = 0`) and `error` its error estimate.
#[pyclass(frozen, get_all, skip_from_py_object, module = "point_stability")]
#[derive(Clone)]
pub struct LambdaResult {
    m: f64,
    beta: f64,
    value: f64,
    stability_constant: f64,
    error: f64,
    q: f64,
    b: f64,
    kappa: f64,
    quad_err: f64,
    opt_err: f64,
    evals: usize,
}

#[pymethods]
impl LambdaResult {
    fn __repr__(&self) -> String {
        format!(
            "LambdaResult(m={}, beta={}, stability_constant={:.6}, error={:.1e}, Q={:.4}, b={:.4})",
            self.m, self.beta, self.stability_constant, self.error, self.q, self.b
        )
    }
}

impl From<optimize::LambdaResult> for LambdaResult {
    fn from(r: optimize::LambdaResult) -> Self {
        Self {
            m: r.m.m(),
            beta: r.beta.value(),
            value: r.value,
            stability_constant: r.stability_constant(),
            error: r.stability_error(),
            q: r.argmax.q(),
            b: r.argmax.b(),
            kappa: r.argmax.kappa(),
            quad_err: r.quad_err,
            opt_err: r.opt_err,
            evals: r.evals,
        }
    }
}

#[pyclass(frozen, get_all, skip_from_py_object, module = "point_stability")]
#[derive(Clone)]
pub struct CriticalMass {
    beta: f64,
    m_star: f64,
    bracket: (f64, f64),
    evaluations: Vec<(f64, f64)>,
    monotonicity_violations: Vec<(f64, f64)>,
}

#[pymethods]
impl CriticalMass {
    fn __repr__(&self) -> String {
        format!("CriticalMass(beta={}, m_star={:.5}, bracket={:?})", self.beta, self.m_star, self.bracket)
    }
}

/// One row of a mass scan; missing `beta` columns are `None`.
#[pyclass(frozen, get_all, skip_from_py_object, module = "point_stability")]
#[derive(Clone)]
pub struct ScanRow {
    m: f64,
    lambda0_half: Option<f64>,
    lambda1: Option<f64>,
    lambda2: Option<f64>,
    bound: f64,
    argmax_q: f64,
    argmax_b: f64,
    error: f64,
    failures: Vec<String>,
}

#[pymethods]
impl ScanRow {
    fn __repr__(&self) -> String {
        format!(
            "ScanRow(m={}, lambda={:?}, lambda1={:?}, lambda2={:?}, bound={})",
            self.m, self.lambda0_half, self.lambda1, self.lambda2, self.bound
        )
    }
}

impl From<optimize::ScanRow> for ScanRow {
    fn from(r: optimize::ScanRow) -> Self {
        Self {
            m: r.m,
            lambda0_half: r.lambda0_half,
            lambda1: r.lambda1,
            lambda2: r.lambda2,
            bound: r.bound,
            argmax_q: r.argmax_q,
            argmax_b: r.argmax_b,
            error: r.error,
            failures: r.failures,
        }
    }
}

#[pyclass(frozen, get_all, skip_from_py_object, module = "point_stability")]
#[derive(Clone)]
pub struct ProbeReport {
    name: String,
    n_samples: usize,
    max_violation: f64,
    worst_point: BTreeMap<String, f64>,
    tolerance: f64,
    passed: bool,
    observed: f64,
    out_of_regime: usize,
}

#[pymethods]
impl ProbeReport {
    fn __repr__(&self) -> String {
        format!(
            "ProbeReport(name={:?}, passed={}, n_samples={}, max_violation={:e}, observed={:e})",
            self.name, self.passed, self.n_samples, self.max_violation, self.observed
        )
    }
}

impl From<validate::ProbeReport> for ProbeReport {
    fn from(r: validate::ProbeReport) -> Self {
        Self {
            name: r.name,
            n_samples: r.n_samples,
            max_violation: r.max_violation,
            worst_point: r.worst_point,
            tolerance: r.tolerance,
            passed: r.passed,
            observed: r.observed,
            out_of_regime: r.out_of_regime,
        }
    }
}

/// p-wave Gaussian trial function `s_z exp(-a s^2)` with spectral parameter `mu`.
#[pyclass(frozen, module = "point_stability")]
pub struct TrialFunction(validate::TrialFunction);

#[pymethods]
impl TrialFunction {
    #[new]
    fn new(a: f64, mu: f64) -> PyResult<Self> {
        validate::TrialFunction::new(a, mu).map(Self).map_err(to_py)
    }

    #[getter]
    fn a(&self) -> f64 {
        self.0.a
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.0.mu
    }

    fn t_diag(&self, m: f64) -> PyResult<f64> {
        Ok(self.0.t_diag(mass(m)?).map_err(to_py)?.value)
    }

    fn t_off(&self, m: f64) -> PyResult<f64> {
        Ok(self.0.t_off(mass(m)?).map_err(to_py)?.value)
    }

    fn gamma_form(&self, m: f64, beta: f64) -> PyResult<f64> {
        Ok(self.0.gamma_form(mass(m)?, beta).map_err(to_py)?.value)
    }

    fn l_form(&self, m: f64, beta: f64) -> PyResult<f64> {
        Ok(self.0.l_form(mass(m)?, beta).map_err(to_py)?.value)
    }

    fn __repr__(&self) -> String {
        format!("TrialFunction(a={}, mu={})", self.0.a, self.0.mu)
    }
}

#[pyfunction]
fn analytic_bound(m: f64) -> PyResult<f64> {
    Ok(kernels::analytic_bound(mass(m)?))
}

#[pyfunction]
fn analytic_bound_beta(m: f64, beta_: f64) -> PyResult<f64> {
    Ok(kernels::analytic_bound_beta(mass(m)?, beta(beta_)?))
}

#[pyfunction]
fn analytic_bound_threshold() -> f64 {
    kernels::analytic_bound_threshold()
}

#[pyfunction]
fn energy_lower_bound(alpha: f64, m: f64, lambda_m: f64) -> PyResult<f64> {
    kernels::energy_lower_bound(alpha, mass(m)?, lambda_m).map_err(to_py)
}

/// Radial integrand at the reduced point `(q, b)` and radius `t`.
#[pyfunction]
#[pyo3(name = "reduced_integrand")]
fn reduced_integrand_py(m: f64, beta_: f64, q: f64, b: f64, t: f64) -> PyResult<f64> {
    let mass = mass(m)?;
    let p = ReducedPoint::from_b(mass, q, b).map_err(to_py)?;
    Ok(kernels::reduced_integrand(mass, beta(beta_)?, &p, t))
}

/// `(value, error)` of the radial integral at the reduced point `(q, b)`.
#[pyfunction]
#[pyo3(signature = (m, beta_, q, b, rel_tol = 1e-9))]
fn integrate_radial(m: f64, beta_: f64, q: f64, b: f64, rel_tol: f64) -> PyResult<(f64, f64)> {
    let mass = mass(m)?;
    let p = ReducedPoint::from_b(mass, q, b).map_err(to_py)?;
    let r =
        point_stability_core::quadrature::integrate_radial(mass, beta(beta_)?, &p, &spec(rel_tol)?).map_err(to_py)?;
    Ok((r.value, r.error))
}

#[pyfunction]
#[pyo3(signature = (m, beta_ = 0.0, rel_tol = 1e-9, opt_tol = 1e-5))]
fn lambda_beta(py: Python<'_>, m: f64, beta_: f64, rel_tol: f64, opt_tol: f64) -> PyResult<LambdaResult> {
    let (mass, beta, spec) = (mass(m)?, beta(beta_)?, spec(rel_tol)?);
    py.detach(|| optimize::lambda_beta(mass, beta, &spec, opt_tol)).map(Into::into).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (beta_ = 0.0, m_tol = 1e-3, rel_tol = 1e-9))]
fn critical_mass(py: Python<'_>, beta_: f64, m_tol: f64, rel_tol: f64) -> PyResult<CriticalMass> {
    let (beta, spec) = (beta(beta_)?, spec(rel_tol)?);
    let r = py.detach(|| optimize::critical_mass(beta, &spec, m_tol)).map_err(to_py)?;
    Ok(CriticalMass {
        beta: r.beta.value(),
        m_star: r.m_star,
        bracket: r.bracket,
        evaluations: r.evaluations,
        monotonicity_violations: r.monotonicity_violations,
    })
}

#[pyfunction]
#[pyo3(signature = (m_values, betas = vec![0.0, 1.0, 2.0], rel_tol = 1e-9))]
fn scan(py: Python<'_>, m_values: Vec<f64>, betas: Vec<f64>, rel_tol: f64) -> PyResult<Vec<ScanRow>> {
    let betas: Vec<Beta> = betas.into_iter().map(beta).collect::<PyResult<_>>()?;
    let spec = spec(rel_tol)?;
    let rows = py.detach(|| optimize::scan(&m_values, &betas, &spec)).map_err(to_py)?;
    Ok(rows.into_iter().map(Into::into).collect())
}

/// Objective on the grid `grid_q × grid_b`, as a list of rows (one per `Q`).
#[pyfunction]
#[pyo3(signature = (m, beta_, grid_q, grid_b, rel_tol = 1e-9))]
fn landscape(
    py: Python<'_>,
    m: f64,
    beta_: f64,
    grid_q: Vec<f64>,
    grid_b: Vec<f64>,
    rel_tol: f64,
) -> PyResult<Vec<Vec<f64>>> {
    let (mass, beta, spec) = (mass(m)?, beta(beta_)?, spec(rel_tol)?);
    py.detach(|| optimize::landscape(mass, beta, &grid_q, &grid_b, &spec)).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (m, beta_, n_points = 200, seed = 7))]
fn angular_consistency(py: Python<'_>, m: f64, beta_: f64, n_points: usize, seed: u64) -> PyResult<ProbeReport> {
    let (mass, beta) = (mass(m)?, beta(beta_)?);
    py.detach(|| validate::angular_consistency(mass, beta, n_points, seed)).map(Into::into).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (m, beta_, n_points = 6, seed = 7, orientations = validate::ORIENTATIONS_PER_POINT))]
fn orientation_check(
    py: Python<'_>,
    m: f64,
    beta_: f64,
    n_points: usize,
    seed: u64,
    orientations: usize,
) -> PyResult<ProbeReport> {
    let (mass, beta) = (mass(m)?, beta(beta_)?);
    py.detach(|| validate::orientation_check_with(mass, beta, n_points, orientations, seed, &SphereSpec::default()))
        .map(Into::into)
        .map_err(to_py)
}

/// `sup_hat` is the raw supremum, `LambdaResult.value`.
#[pyfunction]
#[pyo3(signature = (m, beta_, sup_hat, n_samples = 50, seed = 7))]
fn mc_unreduced_probe(
    py: Python<'_>,
    m: f64,
    beta_: f64,
    sup_hat: f64,
    n_samples: usize,
    seed: u64,
) -> PyResult<ProbeReport> {
    let (mass, beta) = (mass(m)?, beta(beta_)?);
    py.detach(|| validate::mc_unreduced_probe(mass, beta, n_samples, seed, sup_hat)).map(Into::into).map_err(to_py)
}

#[pyfunction]
fn trial_inequality_thm1(py: Python<'_>, m: f64, widths: Vec<f64>, mu: f64, lambda_hat: f64) -> PyResult<ProbeReport> {
    let mass = mass(m)?;
    py.detach(|| validate::trial_inequality_thm1(mass, &widths, mu, lambda_hat)).map(Into::into).map_err(to_py)
}

#[pyfunction]
fn trial_inequality_thm2(
    py: Python<'_>,
    m: f64,
    beta_: f64,
    widths: Vec<f64>,
    mu: f64,
    lambda_beta_hat: f64,
) -> PyResult<ProbeReport> {
    let (mass, beta) = (mass(m)?, beta(beta_)?);
    py.detach(|| validate::trial_inequality_thm2(mass, beta, &widths, mu, lambda_beta_hat))
        .map(Into::into)
        .map_err(to_py)
}

#[pymodule]
fn point_stability(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NonConvergenceError", m.py().get_type::<NonConvergenceError>())?;
    m.add("DerivationMismatchError", m.py().get_type::<DerivationMismatchError>())?;
    m.add_class::<LambdaResult>()?;
    m.add_class::<CriticalMass>()?;
    m.add_class::<ScanRow>()?;
    m.add_class::<ProbeReport>()?;
    m.add_class::<TrialFunction>()?;
    m.add_function(wrap_pyfunction!(analytic_bound, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_bound_beta, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_bound_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(energy_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(reduced_integrand_py, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_radial, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_beta, m)?)?;
    m.add_function(wrap_pyfunction!(critical_mass, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    m.add_function(wrap_pyfunction!(landscape, m)?)?;
    m.add_function(wrap_pyfunction!(angular_consistency, m)?)?;
    m.add_function(wrap_pyfunction!(orientation_check, m)?)?;
    m.add_function(wrap_pyfunction!(mc_unreduced_probe, m)?)?;
    m.add_function(wrap_pyfunction!(trial_inequality_thm1, m)?)?;
    m.add_function(wrap_pyfunction!(trial_inequality_thm2, m)?)?;
    Ok(())
}
