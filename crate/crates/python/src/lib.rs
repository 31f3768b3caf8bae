use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

use qmonogamy::correlations as corr;
use qmonogamy::entropy;
use qmonogamy::monogamy::{self, PureTripartite, Route};
use qmonogamy::states;
use qmonogamy::verify::{SampleSource, Suite, VerifyConfig};
use qmonogamy::{ComplexMatrix, DimensionList, Error, OptimizerConfig, SweepConfig};

fn err(e: Error) -> PyErr {
    match e {
        Error::NoConvergence(_) | Error::NotHermitian(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_f64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(x)) => x.into_pyobject(py)?.into_any(),
            _ => py.None().into_bound(py),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for x in items {
                list.append(json_to_py(py, x)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let d = PyDict::new(py);
            for (k, x) in map {
                d.set_item(k, json_to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    json_to_py(py, &v)
}

/// Qubit count accepted by the constructors; larger states are out of reach
/// for the dense routines anyway.
fn qubits(n: usize) -> PyResult<DimensionList> {
    if !(2..=6).contains(&n) {
        return Err(PyValueError::new_err(format!("n must be between 2 and 6, got {n}")));
    }
    Ok(DimensionList::qubits(n))
}

fn optimizer(seed: Option<u64>) -> OptimizerConfig {
    let mut c = OptimizerConfig::default();
    if let Some(s) = seed {
        c.seed = s;
    }
    c
}

/// Density matrix over labelled parties.
#[pyclass(name = "DensityMatrix", module = "pyqmonogamy", frozen)]
struct PyDensity(qmonogamy::DensityMatrix);

#[pymethods]
impl PyDensity {
    /// `matrix` is a square nested list of complex numbers; `dims` defaults
    /// to all qubits and `labels` to A, B, ...
    #[new]
    #[pyo3(signature = (matrix, dims=None, labels=None))]
    fn new(matrix: Vec<Vec<Complex64>>, dims: Option<Vec<usize>>, labels: Option<Vec<String>>) -> PyResult<Self> {
        let n = matrix.len();
        if matrix.iter().any(|r| r.len() != n) {
            return Err(PyValueError::new_err("matrix must be square"));
        }
        let dims = match dims {
            Some(d) => d,
            None => {
                if !n.is_power_of_two() || n < 2 {
                    return Err(PyValueError::new_err("pass dims for non-qubit matrices"));
                }
                vec![2; n.trailing_zeros() as usize]
            }
        };
        let labels = labels.unwrap_or_else(|| DimensionList::qubits(dims.len()).labels().to_vec());
        let dl = DimensionList::new(dims, labels).map_err(err)?;
        let m = ComplexMatrix::from_vec(n, n, matrix.into_iter().flatten().collect()).map_err(err)?;
        Ok(Self(qmonogamy::DensityMatrix::new(m, dl).map_err(err)?))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self(states::parse_state_json(text).map_err(err)?))
    }

    fn to_json(&self) -> String {
        states::state_to_json(&self.0)
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        let m = self.0.matrix();
        (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect())
            .collect()
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.0.dims().dims().to_vec()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.0.labels().to_vec()
    }

    fn purity(&self) -> f64 {
        self.0.purity()
    }

    fn is_pure(&self) -> bool {
        self.0.is_pure()
    }

    fn marginal(&self, labels: Vec<String>) -> PyResult<Self> {
        Ok(Self(self.0.marginal(&labels).map_err(err)?))
    }

    fn __repr__(&self) -> String {
        format!(
            "DensityMatrix(dims={:?}, labels={:?})",
            self.0.dims().dims(),
            self.0.labels()
        )
    }
}

/// Pure state vector over labelled parties.
#[pyclass(name = "StateVector", module = "pyqmonogamy", frozen)]
struct PyState(qmonogamy::StateVector);

#[pymethods]
impl PyState {
    #[new]
    #[pyo3(signature = (amplitudes, dims=None))]
    fn new(amplitudes: Vec<Complex64>, dims: Option<Vec<usize>>) -> PyResult<Self> {
        let dl = match dims {
            Some(d) => {
                let labels = DimensionList::qubits(d.len()).labels().to_vec();
                DimensionList::new(d, labels).map_err(err)?
            }
            None => {
                let n = amplitudes.len();
                if !n.is_power_of_two() || n < 2 {
                    return Err(PyValueError::new_err("pass dims for non-qubit vectors"));
                }
                DimensionList::qubits(n.trailing_zeros() as usize)
            }
        };
        Ok(Self(qmonogamy::StateVector::new(amplitudes, dl).map_err(err)?))
    }

    fn amplitudes(&self) -> Vec<Complex64> {
        self.0.amplitudes().to_vec()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.0.labels().to_vec()
    }

    fn to_density(&self) -> PyDensity {
        PyDensity(self.0.to_density())
    }

    fn marginal(&self, labels: Vec<String>) -> PyResult<PyDensity> {
        Ok(PyDensity(self.0.marginal(&labels).map_err(err)?))
    }

    fn __repr__(&self) -> String {
        format!("StateVector(parties={})", self.0.num_parties())
    }
}

#[pyfunction]
#[pyo3(signature = (n=3))]
fn ghz(n: usize) -> PyResult<PyState> {
    qubits(n)?;
    Ok(PyState(states::ghz(n)))
}

#[pyfunction]
#[pyo3(signature = (n=3))]
fn w_state(n: usize) -> PyResult<PyState> {
    qubits(n)?;
    Ok(PyState(states::w_state(n)))
}

#[pyfunction]
fn psi_tilde(p: f64, eps: f64) -> PyResult<PyState> {
    Ok(PyState(states::psi_tilde(p, eps).map_err(err)?))
}

#[pyfunction]
fn ghz_generalized(alpha: f64) -> PyResult<PyState> {
    Ok(PyState(states::ghz_generalized(alpha).map_err(err)?))
}

#[pyfunction]
fn w_generalized(a: f64, b: f64, c: f64) -> PyResult<PyState> {
    Ok(PyState(states::w_generalized(a, b, c).map_err(err)?))
}

#[pyfunction]
fn haar_random_pure(n: usize, seed: u64) -> PyResult<PyState> {
    Ok(PyState(states::haar_random_pure(qubits(n)?, seed)))
}

#[pyfunction]
fn random_mixed(n: usize, ancilla_dim: usize, seed: u64) -> PyResult<PyDensity> {
    if ancilla_dim == 0 {
        return Err(PyValueError::new_err("ancilla_dim must be positive"));
    }
    Ok(PyDensity(states::random_mixed(qubits(n)?, ancilla_dim, seed)))
}

#[pyfunction]
fn von_neumann(rho: &PyDensity) -> f64 {
    entropy::von_neumann(&rho.0)
}

#[pyfunction]
fn mutual_information(rho: &PyDensity, a: Vec<String>, b: Vec<String>) -> PyResult<f64> {
    entropy::mutual_information(&rho.0, &a, &b).map_err(err)
}

/// Discord with the measurement on `measured`, as a dict.
#[pyfunction]
#[pyo3(signature = (rho, measured, target, seed=None))]
fn discord<'py>(
    py: Python<'py>,
    rho: &PyDensity,
    measured: Vec<String>,
    target: Vec<String>,
    seed: Option<u64>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = optimizer(seed);
    let d = py
        .detach(|| corr::discord_with(&rho.0, &measured, &target, &cfg))
        .map_err(err)?;
    to_dict(py, &d)
}

#[pyfunction]
fn concurrence(rho: &PyDensity) -> PyResult<f64> {
    corr::concurrence_2q(&rho.0).map_err(err)
}

#[pyfunction]
fn eof(rho: &PyDensity) -> PyResult<f64> {
    corr::eof_2q(&rho.0).map_err(err)
}

#[pyfunction]
fn work_deficit(py: Python<'_>, rho: &PyDensity, measured: Vec<String>) -> PyResult<f64> {
    py.detach(|| corr::work_deficit_oneway(&rho.0, &measured)).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (rho, seed=None))]
fn correlation_report<'py>(py: Python<'py>, rho: &PyDensity, seed: Option<u64>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = optimizer(seed);
    let r = py.detach(|| corr::correlation_report(&rho.0, &cfg)).map_err(err)?;
    to_dict(py, &r)
}

#[pyfunction]
fn classify<'py>(py: Python<'py>, psi: &PyState) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &monogamy::classify_ghz_w(&psi.0).map_err(err)?)
}

/// Both deficits of `anchor` with every identity residual, for a pure
/// three-qubit state.
#[pyfunction]
#[pyo3(signature = (psi, anchor="A", route="optimized", seed=None))]
fn deficits<'py>(
    py: Python<'py>,
    psi: &PyState,
    anchor: &str,
    route: &str,
    seed: Option<u64>,
) -> PyResult<Bound<'py, PyAny>> {
    let route = match route {
        "optimized" => Route::Optimized,
        "pure_closed_form" | "closed_form" => Route::PureClosedForm,
        other => return Err(PyValueError::new_err(format!("unknown route `{other}`"))),
    };
    let cfg = optimizer(seed);
    let report = py
        .detach(|| PureTripartite::new(&psi.0, &cfg).and_then(|t| t.report(anchor, route)))
        .map_err(err)?;
    to_dict(py, &report)
}

#[pyfunction]
#[pyo3(signature = (rho, anchor="A"))]
fn theorem1_residual<'py>(py: Python<'py>, rho: &PyDensity, anchor: &str) -> PyResult<Bound<'py, PyAny>> {
    let cfg = OptimizerConfig::default();
    let r = py
        .detach(|| monogamy::theorem1_residual(&rho.0, anchor, &cfg))
        .map_err(err)?;
    to_dict(py, &r)
}

/// The psi-tilde sweep as CSV text.
#[pyfunction]
#[pyo3(signature = (eps=vec![0.5, 0.75, 1.0], p_start=0.0, p_end=1.0, p_step=0.01))]
fn sweep(py: Python<'_>, eps: Vec<f64>, p_start: f64, p_end: f64, p_step: f64) -> PyResult<String> {
    let cfg = SweepConfig {
        eps,
        p_start,
        p_end,
        p_step,
        ..SweepConfig::default()
    };
    let r = py.detach(|| qmonogamy::run_sweep(&cfg)).map_err(err)?;
    Ok(r.to_csv())
}

#[pyfunction]
#[pyo3(signature = (suite="tripartite", n=10, seed=0, tol=None, product=false))]
fn verify<'py>(
    py: Python<'py>,
    suite: &str,
    n: usize,
    seed: u64,
    tol: Option<f64>,
    product: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let suite: Suite = suite.parse().map_err(err)?;
    let mut cfg = VerifyConfig::new(suite, n, seed);
    cfg.tolerance = tol;
    if product {
        cfg.source = SampleSource::Product;
    }
    let r = py.detach(|| qmonogamy::run_verify(&cfg)).map_err(err)?;
    to_dict(py, &r)
}

#[pymodule]
fn pyqmonogamy(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensity>()?;
    m.add_class::<PyState>()?;
    m.add_function(wrap_pyfunction!(ghz, m)?)?;
    m.add_function(wrap_pyfunction!(w_state, m)?)?;
    m.add_function(wrap_pyfunction!(psi_tilde, m)?)?;
    m.add_function(wrap_pyfunction!(ghz_generalized, m)?)?;
    m.add_function(wrap_pyfunction!(w_generalized, m)?)?;
    m.add_function(wrap_pyfunction!(haar_random_pure, m)?)?;
    m.add_function(wrap_pyfunction!(random_mixed, m)?)?;
    m.add_function(wrap_pyfunction!(von_neumann, m)?)?;
    m.add_function(wrap_pyfunction!(mutual_information, m)?)?;
    m.add_function(wrap_pyfunction!(discord, m)?)?;
    m.add_function(wrap_pyfunction!(concurrence, m)?)?;
    m.add_function(wrap_pyfunction!(eof, m)?)?;
    m.add_function(wrap_pyfunction!(work_deficit, m)?)?;
    m.add_function(wrap_pyfunction!(correlation_report, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(deficits, m)?)?;
    m.add_function(wrap_pyfunction!(theorem1_residual, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
