//! Python bindings. Kernels and noises are small value classes; reports come
//! back as plain dicts.

use intermittency::diagrams;
use intermittency::exponents::{parse_rational, table, TableParams};
use intermittency::hls;
use intermittency::kernels::{self, BallMassQuery, KernelSpec};
use intermittency::moments::{self, ChaosKernelSpec};
use intermittency::noise::{NoiseSpec, SpaceCovariance, TimeCovariance};
use intermittency::smallball;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: intermittency::Error) -> PyErr {
    PyValueError::new_err(format!("{}: {e}", e.code()))
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

#[pyclass(name = "Kernel", frozen, from_py_object)]
#[derive(Clone)]
struct PyKernel(KernelSpec);

#[pymethods]
impl PyKernel {
    #[staticmethod]
    #[pyo3(signature = (d=1))]
    fn heat(d: usize) -> PyResult<Self> {
        Self::checked(KernelSpec::Heat { d })
    }

    #[staticmethod]
    #[pyo3(signature = (d=1))]
    fn wave(d: usize) -> PyResult<Self> {
        Self::checked(KernelSpec::Wave { d })
    }

    #[staticmethod]
    fn alpha_heat(d: usize, alpha: f64) -> PyResult<Self> {
        Self::checked(KernelSpec::AlphaHeat { d, alpha })
    }

    #[staticmethod]
    fn frac(d: usize, alpha: f64, beta: f64) -> PyResult<Self> {
        Self::checked(KernelSpec::FracDiff { d, alpha, beta })
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        KernelSpec::from_json(s).map(PyKernel).map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn small_ball_exponents(&self) -> (f64, f64) {
        self.0.small_ball_exponents()
    }

    fn hbar(&self, lambda: f64) -> f64 {
        self.0.hbar(lambda)
    }

    fn total_mass(&self, t: f64) -> f64 {
        self.0.total_mass(t)
    }

    fn density(&self, t: f64, x: Vec<f64>) -> PyResult<f64> {
        kernels::density(&self.0, t, &x).map_err(err)
    }

    fn fourier(&self, t: f64, xi: Vec<f64>) -> PyResult<f64> {
        kernels::kernel_fourier(&self.0, t, &xi).map_err(err)
    }

    /// Mass of `G_t(. - y)` on the ball of radius `eps` around `x`.
    #[pyo3(signature = (t, eps, y=None, x=None))]
    fn ball_mass(&self, t: f64, eps: f64, y: Option<Vec<f64>>, x: Option<Vec<f64>>) -> PyResult<f64> {
        let d = self.0.dim();
        let q = BallMassQuery::new(t, y.unwrap_or(vec![0.0; d]), x.unwrap_or(vec![0.0; d]), eps);
        kernels::ball_mass(&self.0, &q).map_err(err)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).unwrap_or_default()
    }

    fn __repr__(&self) -> String {
        format!("Kernel({})", self.0.label())
    }
}

impl PyKernel {
    fn checked(k: KernelSpec) -> PyResult<Self> {
        k.validate().map_err(err)?;
        Ok(PyKernel(k))
    }
}

#[pyclass(name = "Noise", frozen, from_py_object)]
#[derive(Clone)]
struct PyNoise(NoiseSpec);

fn time_cov(gamma: Option<f64>) -> TimeCovariance {
    gamma.map_or(TimeCovariance::WhiteInTime, TimeCovariance::power)
}

#[pymethods]
impl PyNoise {
    #[staticmethod]
    fn white_white() -> Self {
        PyNoise(NoiseSpec::white_white())
    }

    #[staticmethod]
    #[pyo3(signature = (lam, d=1, gamma=None))]
    fn riesz(lam: f64, d: usize, gamma: Option<f64>) -> PyResult<Self> {
        NoiseSpec::new(time_cov(gamma), SpaceCovariance::riesz(lam, d)).map(PyNoise).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (lambdas, gamma=None))]
    fn product(lambdas: Vec<f64>, gamma: Option<f64>) -> PyResult<Self> {
        NoiseSpec::new(time_cov(gamma), SpaceCovariance::ProductRL { lambdas }).map(PyNoise).map_err(err)
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        NoiseSpec::from_json(s).map(PyNoise).map_err(err)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).unwrap_or_default()
    }

    fn __repr__(&self) -> String {
        format!("Noise({})", self.to_json())
    }
}

#[pyfunction]
fn mittag_leffler(beta: f64, beta2: f64, z: f64) -> PyResult<f64> {
    kernels::mittag_leffler(beta, beta2, z).map_err(err)
}

#[pyfunction]
fn count_admissible(row_sizes: Vec<usize>) -> PyResult<u128> {
    diagrams::count_admissible(&row_sizes).map_err(err)
}

/// Edges of each admissible diagram as `((row, col), (row, col))` pairs.
#[pyfunction]
#[pyo3(signature = (row_sizes, limit=1000))]
fn enumerate_admissible(row_sizes: Vec<usize>, limit: usize) -> PyResult<Vec<Vec<((usize, usize), (usize, usize))>>> {
    let it = diagrams::enumerate_admissible(&row_sizes).map_err(err)?;
    Ok(it.take(limit).map(|d| d.edge_factors()).collect())
}

#[pyfunction]
#[pyo3(signature = (lam="1/2", hurst="3/4", alpha="3/2", beta="5/4"))]
fn exponent_table<'py>(py: Python<'py>, lam: &str, hurst: &str, alpha: &str, beta: &str) -> PyResult<Bound<'py, PyAny>> {
    let p = TableParams {
        lambda: parse_rational(lam).map_err(err)?,
        hurst: parse_rational(hurst).map_err(err)?,
        alpha: parse_rational(alpha).map_err(err)?,
        beta: parse_rational(beta).map_err(err)?,
    };
    let rows: Vec<serde_json::Value> = table(&p).map_err(err)?.iter().map(|r| r.to_json()).collect();
    to_py(py, &rows)
}

/// `(value, std_error)` of the n-th chaos second moment.
#[pyfunction]
#[pyo3(signature = (kernel, noise, n, t, samples=100_000, seed=0))]
fn phi_n(kernel: &PyKernel, noise: &PyNoise, n: usize, t: f64, samples: u64, seed: u64) -> PyResult<(f64, f64)> {
    let spec = ChaosKernelSpec::new(kernel.0, n, t);
    let e = moments::phi_n(&spec, &noise.0, samples, seed).map_err(err)?;
    Ok((e.value, e.std_error))
}

#[pyfunction]
fn phi_n_white_heat(n: usize, t: f64) -> f64 {
    moments::phi_n_white_heat(n, t, 1.0)
}

#[pyfunction]
#[pyo3(signature = (kernel, eps_grid, a=None, b=None, y_per_eps=9, threshold=0.1))]
fn verify_small_ball<'py>(
    py: Python<'py>,
    kernel: &PyKernel,
    eps_grid: Vec<f64>,
    a: Option<f64>,
    b: Option<f64>,
    y_per_eps: usize,
    threshold: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let (a0, b0) = kernel.0.small_ball_exponents();
    let r = smallball::verify_small_ball(&kernel.0, a.unwrap_or(a0), b.unwrap_or(b0), &eps_grid, y_per_eps, threshold)
        .map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
fn exp_lower_claim_check<'py>(py: Python<'py>, nu: f64, delta_grid: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &smallball::exp_lower_claim_check(nu, &delta_grid).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (kernel, noise, t, eta=0.0))]
fn hls_mass(kernel: &PyKernel, noise: &PyNoise, t: f64, eta: f64) -> PyResult<f64> {
    hls::hls_mass_spectral(&kernel.0, &noise.0, t, eta).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (kernel, noise, t_min=1e-3, t_max=1e-1, n=12))]
fn fit_hbar<'py>(py: Python<'py>, kernel: &PyKernel, noise: &PyNoise, t_min: f64, t_max: f64, n: usize) -> PyResult<Bound<'py, PyAny>> {
    let g = hls::log_grid(t_min, t_max, n);
    to_py(py, &hls::fit_hbar(&kernel.0, &noise.0, &g).map_err(err)?)
}

#[pymodule]
fn intermittency_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyKernel>()?;
    m.add_class::<PyNoise>()?;
    m.add_function(wrap_pyfunction!(mittag_leffler, m)?)?;
    m.add_function(wrap_pyfunction!(count_admissible, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_admissible, m)?)?;
    m.add_function(wrap_pyfunction!(exponent_table, m)?)?;
    m.add_function(wrap_pyfunction!(phi_n, m)?)?;
    m.add_function(wrap_pyfunction!(phi_n_white_heat, m)?)?;
    m.add_function(wrap_pyfunction!(verify_small_ball, m)?)?;
    m.add_function(wrap_pyfunction!(exp_lower_claim_check, m)?)?;
    m.add_function(wrap_pyfunction!(hls_mass, m)?)?;
    m.add_function(wrap_pyfunction!(fit_hbar, m)?)?;
    Ok(())
}
