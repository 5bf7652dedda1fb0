//! Python bindings. Complex numbers cross the boundary as Python `complex`.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use symext::cglmp::{self, DEFAULT_CGLMP_RESTARTS};
use symext::io::{self as sio, StateFile};
use symext::linalg::{self, ComplexMatrix, StateVector};
use symext::monogamy::{self, GammaFamily};
use symext::qubit::{self, DEFAULT_CHSH_RESTARTS};
use symext::symmetric::{self, DickeState};
use symext::tolerance;

fn to_py(e: symext::Error) -> PyErr {
    match e {
        symext::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        e if e.is_numerical() => PyRuntimeError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn family(name: &str) -> PyResult<GammaFamily> {
    name.parse().map_err(to_py)
}

/// Density matrix with its subsystem dimensions.
#[pyclass(name = "DensityMatrix", module = "symext_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDensityMatrix {
    inner: symext::DensityMatrix,
}

#[pymethods]
impl PyDensityMatrix {
    #[new]
    fn new(rows: Vec<Vec<Complex64>>, dims: Vec<usize>) -> PyResult<Self> {
        let m = ComplexMatrix::from_rows(&rows).map_err(to_py)?;
        let inner = symext::DensityMatrix::new(m, dims).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Projector onto a pure state; the amplitudes must already be normalised.
    #[staticmethod]
    fn from_pure(amplitudes: Vec<Complex64>, dims: Vec<usize>) -> PyResult<Self> {
        let psi = StateVector::new(amplitudes, dims).map_err(to_py)?;
        Ok(linalg::outer(&psi).into())
    }

    #[staticmethod]
    fn maximally_mixed(dims: Vec<usize>) -> Self {
        symext::DensityMatrix::maximally_mixed(dims).into()
    }

    #[staticmethod]
    fn phi_plus() -> Self {
        qubit::phi_plus().into()
    }

    #[staticmethod]
    fn werner(p: f64) -> PyResult<Self> {
        Ok(qubit::werner(p).map_err(to_py)?.into())
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.inner.subsystem_dims().to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn purity(&self) -> f64 {
        self.inner.purity()
    }

    fn eigenvalues(&self) -> PyResult<Vec<f64>> {
        self.inner.eigenvalues().map_err(to_py)
    }

    fn partial_trace(&self, keep: Vec<usize>) -> PyResult<Self> {
        Ok(linalg::partial_trace(&self.inner, &keep).map_err(to_py)?.into())
    }

    fn to_list(&self) -> Vec<Vec<Complex64>> {
        self.inner.matrix().to_rows()
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(dims={:?})", self.inner.subsystem_dims())
    }
}

impl From<symext::DensityMatrix> for PyDensityMatrix {
    fn from(inner: symext::DensityMatrix) -> Self {
        Self { inner }
    }
}

#[pyclass(name = "ChshReport", module = "symext_py", frozen, get_all)]
struct PyChshReport {
    value: f64,
    violates: bool,
    eigenvalues_u: [f64; 3],
}

#[pyclass(name = "ChenReport", module = "symext_py", frozen, get_all)]
struct PyChenReport {
    extendible: bool,
    lhs: f64,
    rhs: f64,
}

#[pyclass(name = "CglmpReport", module = "symext_py", frozen, get_all)]
struct PyCglmpReport {
    value: f64,
    violates: bool,
    best_angles: Vec<f64>,
    restarts_used: usize,
    evaluations: usize,
    distribution_residual: f64,
}

impl From<cglmp::CglmpReport> for PyCglmpReport {
    fn from(r: cglmp::CglmpReport) -> Self {
        Self {
            value: r.value,
            violates: r.violates(),
            best_angles: r.best_angles.to_flat().to_vec(),
            restarts_used: r.restarts_used,
            evaluations: r.evaluations,
            distribution_residual: r.distribution_residual,
        }
    }
}

#[pyclass(name = "ScanRecord", module = "symext_py", frozen, get_all)]
struct PyScanRecord {
    index: u64,
    seed: u64,
    b_ab: f64,
    b_bc: f64,
    b_ac: f64,
    violations: usize,
    double_violation: bool,
}

#[pymethods]
impl PyScanRecord {
    fn __repr__(&self) -> String {
        format!(
            "ScanRecord(index={}, b_ab={:.6}, b_bc={:.6}, b_ac={:.6}, violations={})",
            self.index, self.b_ab, self.b_bc, self.b_ac, self.violations
        )
    }
}

#[pyfunction]
fn chsh_value(rho: &PyDensityMatrix) -> PyResult<PyChshReport> {
    let r = qubit::chsh_value(&rho.inner).map_err(to_py)?;
    Ok(PyChshReport {
        value: r.value,
        violates: r.violates_with(tolerance::CHSH_VIOLATION),
        eigenvalues_u: r.eigenvalues_u,
    })
}

#[pyfunction]
#[pyo3(signature = (rho, restarts = DEFAULT_CHSH_RESTARTS, seed = 0))]
fn chsh_direct(py: Python<'_>, rho: &PyDensityMatrix, restarts: usize, seed: u64) -> PyResult<f64> {
    let rho = rho.inner.clone();
    py.detach(|| qubit::chsh_direct(&rho, restarts, seed)).map_err(to_py)
}

#[pyfunction]
fn chen_criterion(rho: &PyDensityMatrix) -> PyResult<PyChenReport> {
    let r = qubit::chen_criterion(&rho.inner).map_err(to_py)?;
    Ok(PyChenReport {
        extendible: r.extendible,
        lhs: r.lhs,
        rhs: r.rhs,
    })
}

#[pyfunction]
fn verdict_qubit(rho: &PyDensityMatrix) -> PyResult<String> {
    Ok(qubit::nonextendibility_verdict_qubit(&rho.inner).map_err(to_py)?.to_string())
}

/// Returns `(verdict, cglmp_value)`.
#[pyfunction]
#[pyo3(signature = (rho, restarts = DEFAULT_CGLMP_RESTARTS, seed = 0))]
fn verdict_qutrit(py: Python<'_>, rho: &PyDensityMatrix, restarts: usize, seed: u64) -> PyResult<(String, f64)> {
    let rho = rho.inner.clone();
    let (v, r) = py
        .detach(|| monogamy::nonextendibility_verdict_qutrit(&rho, restarts, seed))
        .map_err(to_py)?;
    Ok((v.to_string(), r.value))
}

#[pyfunction]
#[pyo3(signature = (rho, restarts = DEFAULT_CGLMP_RESTARTS, seed = 0, tol = tolerance::CGLMP_OPTIMIZER))]
fn cglmp_max(py: Python<'_>, rho: &PyDensityMatrix, restarts: usize, seed: u64, tol: f64) -> PyResult<PyCglmpReport> {
    let rho = rho.inner.clone();
    Ok(py
        .detach(|| cglmp::cglmp_max(&rho, restarts, seed, tol))
        .map_err(to_py)?
        .into())
}

/// `I3` at twelve measurement phases `(phi_1, phi_2, varphi_1, varphi_2)`.
#[pyfunction]
fn i3_value(rho: &PyDensityMatrix, angles: Vec<f64>) -> PyResult<f64> {
    let angles = cglmp::AngleSet::from_flat(&angles).map_err(to_py)?;
    cglmp::i3_value(&rho.inner, &angles).map_err(to_py)
}

/// Amplitudes of `(|00> + gamma |11> + |22>)`, normalised.
#[pyfunction]
#[pyo3(signature = (gamma = cglmp::OPTIMAL_GAMMA))]
fn correlated_qutrit_pair(gamma: f64) -> PyResult<Vec<Complex64>> {
    Ok(cglmp::correlated_qutrit_pair(gamma).map_err(to_py)?.amplitudes().to_vec())
}

/// Two-qubit marginal of a symmetric state from its Dicke coefficients
/// (`m` ascending).
#[pyfunction]
fn dicke_rdm(coefficients: Vec<Complex64>) -> PyResult<PyDensityMatrix> {
    let psi = DickeState::new(coefficients).map_err(to_py)?;
    let rho = symmetric::rdm_from_dicke(&psi).to_density_matrix().map_err(to_py)?;
    Ok(rho.into())
}

#[pyfunction]
fn random_3qutrit(seed: u64, index: u64) -> Vec<Complex64> {
    monogamy::random_3qutrit(seed, index).amplitudes().to_vec()
}

/// Marginals AB, BC, AC of a three-qutrit pure state.
#[pyfunction]
fn rdm_triple(amplitudes: Vec<Complex64>) -> PyResult<Vec<PyDensityMatrix>> {
    let psi = StateVector::new(amplitudes, vec![3, 3, 3]).map_err(to_py)?;
    Ok(monogamy::rdm_triple(&psi).map_err(to_py)?.map(Into::into).into())
}

#[pyfunction]
fn gamma_state(family_id: &str, gamma: f64) -> PyResult<Vec<Complex64>> {
    let psi = monogamy::gamma_state(family(family_id)?, gamma).map_err(to_py)?;
    Ok(psi.amplitudes().to_vec())
}

/// Returns `(records, max_second_largest, double_violations)`.
#[pyfunction]
#[pyo3(signature = (n_states, seed, restarts = DEFAULT_CGLMP_RESTARTS))]
fn monogamy_scan(py: Python<'_>, n_states: usize, seed: u64, restarts: usize) -> PyResult<(Vec<PyScanRecord>, f64, usize)> {
    let out = py
        .detach(|| monogamy::monogamy_scan(n_states, seed, restarts))
        .map_err(to_py)?;
    let records = out
        .records
        .iter()
        .map(|r| PyScanRecord {
            index: r.index,
            seed: r.seed,
            b_ab: r.b_ab,
            b_bc: r.b_bc,
            b_ac: r.b_ac,
            violations: r.violations,
            double_violation: r.double_violation,
        })
        .collect();
    Ok((records, out.summary.max_second_largest, out.summary.double_violations))
}

/// Rows `(gamma, b_ab, b_bc, b_ac)`.
#[pyfunction]
#[pyo3(signature = (family_id, grid, restarts = DEFAULT_CGLMP_RESTARTS, seed = 1))]
fn gamma_sweep(py: Python<'_>, family_id: &str, grid: Vec<f64>, restarts: usize, seed: u64) -> PyResult<Vec<(f64, f64, f64, f64)>> {
    let fam = family(family_id)?;
    let points = py
        .detach(|| monogamy::gamma_sweep(fam, &grid, restarts, seed))
        .map_err(to_py)?;
    Ok(points.iter().map(|p| (p.gamma, p.b_ab, p.b_bc, p.b_ac)).collect())
}

#[pyfunction]
fn load_state(path: PathBuf) -> PyResult<PyDensityMatrix> {
    Ok(sio::load_state(&path).map_err(to_py)?.density_matrix().into())
}

#[pyfunction]
fn save_state(path: PathBuf, rho: &PyDensityMatrix) -> PyResult<()> {
    sio::save_state(&path, &StateFile::from_mixed(&rho.inner)).map_err(to_py)
}

#[pymodule]
pub fn symext_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyChshReport>()?;
    m.add_class::<PyChenReport>()?;
    m.add_class::<PyCglmpReport>()?;
    m.add_class::<PyScanRecord>()?;
    m.add_function(wrap_pyfunction!(chsh_value, m)?)?;
    m.add_function(wrap_pyfunction!(chsh_direct, m)?)?;
    m.add_function(wrap_pyfunction!(chen_criterion, m)?)?;
    m.add_function(wrap_pyfunction!(verdict_qubit, m)?)?;
    m.add_function(wrap_pyfunction!(verdict_qutrit, m)?)?;
    m.add_function(wrap_pyfunction!(cglmp_max, m)?)?;
    m.add_function(wrap_pyfunction!(i3_value, m)?)?;
    m.add_function(wrap_pyfunction!(correlated_qutrit_pair, m)?)?;
    m.add_function(wrap_pyfunction!(dicke_rdm, m)?)?;
    m.add_function(wrap_pyfunction!(random_3qutrit, m)?)?;
    m.add_function(wrap_pyfunction!(rdm_triple, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_state, m)?)?;
    m.add_function(wrap_pyfunction!(monogamy_scan, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(load_state, m)?)?;
    m.add_function(wrap_pyfunction!(save_state, m)?)?;
    m.add("MAX_CGLMP_VALUE", cglmp::max_cglmp_value())?;
    Ok(())
}
