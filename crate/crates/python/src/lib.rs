use fkdv_core::bloch::{
    assemble_bloch, default_xi_grid, dispersion_omega, slice_spectrum, stability_sweep_with, Classification,
    SweepOptions,
};
use fkdv_core::reduction::{
    critical_power, critical_power_max, cubic_at, delta_constant_state, gamma_coefficient,
    predicted_classification,
};
use fkdv_core::sweep::{boundary_check, run_sweep, Range, SweepConfig, SweepRecord};
use fkdv_core::validate::{run_validation, Suite, ValidateConfig};
use fkdv_core::wave::{solve_wave_with, ModelParams, WaveOptions, WaveSolution};
use fkdv_core::Error;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_) | Error::ZeroBlochFrequency => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn params(alpha: f64, p: f64) -> PyResult<ModelParams> {
    ModelParams::new(alpha, p).map_err(to_py)
}

/// A periodic traveling wave with first cosine coefficient a/2.
#[pyclass(frozen, module = "fkdv")]
struct Wave {
    inner: WaveSolution,
}

#[pymethods]
impl Wave {
    #[new]
    #[pyo3(signature = (alpha, p, a, b = 0.0, n_modes = 32))]
    fn new(py: Python<'_>, alpha: f64, p: f64, a: f64, b: f64, n_modes: usize) -> PyResult<Self> {
        let pr = params(alpha, p)?;
        let inner = py
            .detach(|| solve_wave_with(pr, a, b, None, &WaveOptions::with_truncation(n_modes)))
            .map_err(to_py)?;
        Ok(Wave { inner })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.params.alpha()
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.params.p()
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }

    #[getter]
    fn n_modes(&self) -> usize {
        self.inner.truncation()
    }

    /// k^alpha.
    #[getter]
    fn k_alpha(&self) -> f64 {
        self.inner.wavenumber_alpha
    }

    #[getter]
    fn wavenumber(&self) -> f64 {
        self.inner.wavenumber()
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual_norm
    }

    #[getter]
    fn newton_iterations(&self) -> usize {
        self.inner.newton_iterations
    }

    /// Fourier coefficients for modes -N..=N.
    fn coefficients(&self) -> Vec<Complex64> {
        self.inner.profile.coeffs().to_vec()
    }

    fn coefficient(&self, n: i64) -> Complex64 {
        self.inner.profile.coeff(n)
    }

    fn __call__(&self, z: f64) -> f64 {
        self.inner.profile.evaluate(z)
    }

    /// Profile values at m equally spaced points of [0, 2π); m must exceed 2N.
    fn samples(&self, m: usize) -> PyResult<Vec<f64>> {
        let n = self.inner.truncation();
        if m <= 2 * n {
            return Err(PyValueError::new_err(format!("need more than {} sample points (got {m})", 2 * n)));
        }
        Ok(self.inner.profile.samples(m))
    }

    /// Eigenvalues of the Bloch operator at frequency xi.
    #[pyo3(signature = (xi, n_modes = None))]
    fn spectrum(&self, py: Python<'_>, xi: f64, n_modes: Option<usize>) -> PyResult<Vec<Complex64>> {
        let n = n_modes.unwrap_or(self.inner.truncation());
        py.detach(|| slice_spectrum(&assemble_bloch(&self.inner, xi, n)?, false))
            .map(|s| s.eigenvalues)
            .map_err(to_py)
    }

    #[pyo3(signature = (xi_count = 64, n_modes = None, convergence_check = true))]
    fn stability(
        &self,
        py: Python<'_>,
        xi_count: usize,
        n_modes: Option<usize>,
        convergence_check: bool,
    ) -> PyResult<Verdict> {
        let n = n_modes.unwrap_or(self.inner.truncation());
        let opts = SweepOptions {
            convergence_truncation: convergence_check.then_some(n + 16),
            ..SweepOptions::default()
        };
        let (v, _) = py
            .detach(|| stability_sweep_with(&self.inner, &default_xi_grid(xi_count), n, &opts))
            .map_err(to_py)?;
        Ok(Verdict {
            classification: v.classification.as_str().to_string(),
            growth_rate: v.growth_rate,
            worst_xi: v.worst_xi,
            converged: v.convergence.map(|c| c.agreed),
        })
    }

    /// Characteristic cubic of the three critical eigenvalues at small xi.
    /// Returns (d2, d1, d0, discriminant, verdict).
    #[pyo3(signature = (xi, n_modes = None))]
    fn cubic(&self, xi: f64, n_modes: Option<usize>) -> PyResult<(f64, f64, f64, f64, String)> {
        let c = cubic_at(&self.inner, xi, n_modes.unwrap_or(self.inner.truncation())).map_err(to_py)?;
        let verdict = serde_json::to_value(c.verdict).expect("verdict serializes");
        Ok((c.d2, c.d1, c.d0, c.discriminant, verdict.as_str().unwrap_or_default().to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "Wave(alpha={}, p={}, a={}, b={}, k_alpha={:.12})",
            self.alpha(),
            self.p(),
            self.inner.a,
            self.inner.b,
            self.inner.wavenumber_alpha
        )
    }
}

#[pyclass(frozen, get_all, module = "fkdv")]
struct Verdict {
    classification: String,
    growth_rate: f64,
    worst_xi: f64,
    converged: Option<bool>,
}

#[pymethods]
impl Verdict {
    fn __repr__(&self) -> String {
        format!(
            "Verdict({}, growth_rate={:.3e}, worst_xi={})",
            self.classification, self.growth_rate, self.worst_xi
        )
    }
}

#[pyclass(frozen, get_all, module = "fkdv")]
struct Record {
    alpha: f64,
    p: f64,
    a: f64,
    b: f64,
    k_alpha: f64,
    growth_rate: f64,
    worst_xi: f64,
    verdict: String,
    predicted: String,
    gamma_sign: i8,
    p_star_at_alpha: f64,
}

impl From<&SweepRecord> for Record {
    fn from(r: &SweepRecord) -> Self {
        Record {
            alpha: r.alpha,
            p: r.p,
            a: r.a,
            b: r.b,
            k_alpha: r.k_alpha,
            growth_rate: r.growth_rate,
            worst_xi: r.worst_xi,
            verdict: r.verdict.as_str().to_string(),
            predicted: r.predicted().as_str().to_string(),
            gamma_sign: r.gamma_sign,
            p_star_at_alpha: r.p_star_at_alpha,
        }
    }
}

#[pymethods]
impl Record {
    fn __repr__(&self) -> String {
        format!("Record(alpha={}, p={}, a={}, verdict={})", self.alpha, self.p, self.a, self.verdict)
    }
}

#[pyfunction(name = "critical_power")]
fn py_critical_power(alpha: f64) -> f64 {
    critical_power(alpha)
}

/// (alpha*, p_max) at the maximum of the critical curve.
#[pyfunction(name = "critical_power_max")]
fn py_critical_power_max() -> (f64, f64) {
    critical_power_max()
}

#[pyfunction(name = "gamma_coefficient")]
fn py_gamma_coefficient(alpha: f64, p: f64) -> f64 {
    gamma_coefficient(alpha, p)
}

#[pyfunction(name = "predicted_classification")]
fn py_predicted_classification(alpha: f64, p: f64) -> &'static str {
    predicted_classification(alpha, p).as_str()
}

#[pyfunction(name = "dispersion_omega")]
fn py_dispersion_omega(alpha: f64, p: f64, k: f64) -> PyResult<f64> {
    Ok(dispersion_omega(&params(alpha, p)?, k))
}

#[pyfunction(name = "delta_constant_state")]
fn py_delta_constant_state(alpha: f64, p: f64, b: f64, xi: f64) -> PyResult<f64> {
    delta_constant_state(&params(alpha, p)?, b, xi).map_err(to_py)
}

/// Stability verdicts over an (alpha, p) grid. Ranges are (min, max, count).
/// Returns (records, boundary_passed).
#[pyfunction]
#[pyo3(signature = (
    alpha_range, p_range, amplitudes = vec![0.05], b = 0.0, xi_count = 64, n_modes = 32,
    xi_refine = true, convergence_check = false
))]
#[allow(clippy::too_many_arguments)]
fn sweep(
    py: Python<'_>,
    alpha_range: (f64, f64, usize),
    p_range: (f64, f64, usize),
    amplitudes: Vec<f64>,
    b: f64,
    xi_count: usize,
    n_modes: usize,
    xi_refine: bool,
    convergence_check: bool,
) -> PyResult<(Vec<Record>, bool)> {
    let config = SweepConfig {
        alpha_range: Range::new(alpha_range.0, alpha_range.1, alpha_range.2).map_err(to_py)?,
        p_range: Range::new(p_range.0, p_range.1, p_range.2).map_err(to_py)?,
        amplitudes,
        b,
        xi_count,
        xi_refine,
        truncation: n_modes,
        check_convergence: convergence_check,
    };
    let records = py.detach(|| run_sweep(&config, |_, _| Ok(()))).map_err(to_py)?;
    let passed = boundary_check(&config, &records).passed;
    Ok((records.iter().map(Record::from).collect(), passed))
}

/// Runs validation suites by name (all when omitted). Returns (passed, report_json).
#[pyfunction]
#[pyo3(signature = (suites = None))]
fn validate(py: Python<'_>, suites: Option<Vec<String>>) -> PyResult<(bool, String)> {
    let mut config = ValidateConfig::default();
    if let Some(names) = suites {
        config.suites = names
            .iter()
            .map(|s| s.parse::<Suite>())
            .collect::<Result<_, _>>()
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
    }
    let report = py.detach(|| run_validation(&config)).map_err(to_py)?;
    let json = serde_json::to_string(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok((report.passed, json))
}

#[pymodule]
fn fkdv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Wave>()?;
    m.add_class::<Verdict>()?;
    m.add_class::<Record>()?;
    m.add_function(wrap_pyfunction!(py_critical_power, m)?)?;
    m.add_function(wrap_pyfunction!(py_critical_power_max, m)?)?;
    m.add_function(wrap_pyfunction!(py_gamma_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(py_predicted_classification, m)?)?;
    m.add_function(wrap_pyfunction!(py_dispersion_omega, m)?)?;
    m.add_function(wrap_pyfunction!(py_delta_constant_state, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add("STABLE", Classification::Stable.as_str())?;
    m.add("UNSTABLE", Classification::Unstable.as_str())?;
    m.add("INDETERMINATE", Classification::Indeterminate.as_str())?;
    Ok(())
}
