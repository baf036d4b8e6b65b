//! Python bindings: the main types and operations of the channel adaptation
//! toolkit as an `esd_adapt` extension module.

use esd_adapt_core::adaptation::{self, apply_filter, run_pipeline, LocalFilter, PipelineSpec};
use esd_adapt_core::channels::{self, KrausChannel};
use esd_adapt_core::entanglement;
use esd_adapt_core::linalg::{CMat2, CMat4, C64};
use esd_adapt_core::optimize::{
    genetic_optimize, grid_search_diag, OptimizationProblem, PipelineTemplate, SearchSpace,
};
use esd_adapt_core::scan;
use esd_adapt_core::states::{self, BellKind, Side, TwoQubitState};
use esd_adapt_core::Error as CoreError;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;

fn err(e: CoreError) -> PyErr {
    match e {
        CoreError::NoFeasiblePoint => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_bell(kind: &str) -> PyResult<BellKind> {
    match kind {
        "psi_minus" => Ok(BellKind::PsiMinus),
        "psi_plus" => Ok(BellKind::PsiPlus),
        "phi_minus" => Ok(BellKind::PhiMinus),
        "phi_plus" => Ok(BellKind::PhiPlus),
        other => Err(PyValueError::new_err(format!(
            "unknown Bell kind '{other}' (use psi_minus, psi_plus, phi_minus, phi_plus)"
        ))),
    }
}

fn parse_side(side: &str) -> PyResult<Side> {
    match side {
        "a" | "A" => Ok(Side::A),
        "b" | "B" => Ok(Side::B),
        other => Err(PyValueError::new_err(format!("unknown side '{other}'"))),
    }
}

fn mat4_to_py(m: &CMat4) -> Vec<Vec<Complex64>> {
    (0..4)
        .map(|i| (0..4).map(|j| m[(i, j)]).collect())
        .collect()
}

fn mat2_to_py(m: &CMat2) -> Vec<Vec<Complex64>> {
    (0..2)
        .map(|i| (0..2).map(|j| m[(i, j)]).collect())
        .collect()
}

fn json_to_py(py: Python<'_>, value: &serde_json::Value) -> PyResult<Py<PyAny>> {
    use serde_json::Value;
    match value {
        Value::Null => Ok(py.None()),
        Value::Bool(b) => b.into_py_any(py),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_py_any(py)
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_py_any(py)
            }
        }
        Value::String(s) => s.into_py_any(py),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_py_any(py)
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, v) in map {
                dict.set_item(k, json_to_py(py, v)?)?;
            }
            dict.into_py_any(py)
        }
    }
}

fn serialize_to_py<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let json = serde_json::to_value(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    json_to_py(py, &json)
}

/// A two-qubit density matrix over the basis {|00>, |01>, |10>, |11>}.
#[pyclass(
    frozen,
    skip_from_py_object,
    name = "TwoQubitState",
    module = "esd_adapt"
)]
#[derive(Clone)]
struct PyTwoQubitState {
    inner: TwoQubitState,
}

#[pymethods]
impl PyTwoQubitState {
    /// Maximally entangled Bell state; kind is one of psi_minus, psi_plus,
    /// phi_minus, phi_plus.
    #[staticmethod]
    fn bell(kind: &str) -> PyResult<Self> {
        Ok(Self {
            inner: states::bell(parse_bell(kind)?),
        })
    }

    /// Bell state mixed with isotropic noise: p|Bell><Bell| + (1-p)/4.
    #[staticmethod]
    fn werner(kind: &str, p: f64) -> PyResult<Self> {
        Ok(Self {
            inner: states::werner(parse_bell(kind)?, p).map_err(err)?,
        })
    }

    /// Builds a state from a 4x4 nested list of complex entries; the
    /// density-matrix invariants are validated.
    #[staticmethod]
    fn from_matrix(rho: Vec<Vec<Complex64>>) -> PyResult<Self> {
        if rho.len() != 4 || rho.iter().any(|row| row.len() != 4) {
            return Err(PyValueError::new_err("expected a 4x4 matrix"));
        }
        let mut m = CMat4::zero();
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = C64::new(rho[i][j].re, rho[i][j].im);
            }
        }
        Ok(Self {
            inner: TwoQubitState::from_matrix(m).map_err(err)?,
        })
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        mat4_to_py(self.inner.rho())
    }

    fn trace(&self) -> f64 {
        self.inner.trace()
    }

    fn purity(&self) -> f64 {
        self.inner.purity()
    }

    fn concurrence(&self) -> PyResult<f64> {
        entanglement::concurrence(&self.inner).map_err(err)
    }

    fn min_pt_eigenvalue(&self) -> PyResult<f64> {
        entanglement::min_pt_eigenvalue(&self.inner).map_err(err)
    }

    /// PPT decision (exact for two qubits).
    #[pyo3(signature = (tolerance = 1e-10))]
    fn is_entangled(&self, tolerance: f64) -> PyResult<bool> {
        Ok(entanglement::is_entangled(&self.inner, tolerance)
            .map_err(err)?
            .entangled)
    }

    /// Dict with min_pt_eigenvalue, concurrence, entangled and tolerance.
    #[pyo3(signature = (tolerance = 1e-10))]
    fn entanglement_report(&self, py: Python<'_>, tolerance: f64) -> PyResult<Py<PyAny>> {
        let report = entanglement::is_entangled(&self.inner, tolerance).map_err(err)?;
        serialize_to_py(py, &report)
    }

    fn __repr__(&self) -> String {
        format!(
            "TwoQubitState(trace={:.6}, purity={:.6})",
            self.inner.trace(),
            self.inner.purity()
        )
    }
}

/// A trace-preserving channel in Kraus form.
#[pyclass(
    frozen,
    skip_from_py_object,
    name = "KrausChannel",
    module = "esd_adapt"
)]
#[derive(Clone)]
struct PyKrausChannel {
    inner: KrausChannel,
}

#[pymethods]
impl PyKrausChannel {
    #[staticmethod]
    fn identity() -> Self {
        Self {
            inner: KrausChannel::identity(),
        }
    }

    /// rho -> p rho + (1-p)/2.
    #[staticmethod]
    fn depolarizing(p: f64) -> PyResult<Self> {
        Ok(Self {
            inner: channels::depolarizing(p).map_err(err)?,
        })
    }

    /// Damps |1> toward |0> with strength gamma.
    #[staticmethod]
    fn amplitude_damping(gamma: f64) -> PyResult<Self> {
        Ok(Self {
            inner: channels::amplitude_damping(gamma).map_err(err)?,
        })
    }

    /// Transmits perfectly with probability p, otherwise replaces the qubit
    /// with the pure state [amp0, amp1].
    #[staticmethod]
    fn replace(p: f64, replacement: Vec<Complex64>) -> PyResult<Self> {
        if replacement.len() != 2 {
            return Err(PyValueError::new_err(
                "replacement state needs 2 amplitudes",
            ));
        }
        let amps = [
            C64::new(replacement[0].re, replacement[0].im),
            C64::new(replacement[1].re, replacement[1].im),
        ];
        Ok(Self {
            inner: channels::replace_channel(p, amps).map_err(err)?,
        })
    }

    fn label(&self) -> String {
        self.inner.label().to_string()
    }

    fn kraus(&self) -> Vec<Vec<Vec<Complex64>>> {
        self.inner.kraus().iter().map(mat2_to_py).collect()
    }

    /// Max entry of |sum_k A_k†A_k - 1|.
    fn completeness_deviation(&self) -> f64 {
        self.inner.completeness_deviation()
    }

    fn is_valid(&self) -> bool {
        self.inner.validate().ok
    }

    /// Applies the channel to qubit "a" or "b" of the state.
    fn apply(&self, state: &PyTwoQubitState, side: &str) -> PyResult<PyTwoQubitState> {
        Ok(PyTwoQubitState {
            inner: self
                .inner
                .apply(&state.inner, parse_side(side)?)
                .map_err(err)?,
        })
    }

    /// The channel that applies self first and `then` second.
    fn compose(&self, then: &PyKrausChannel) -> Self {
        Self {
            inner: KrausChannel::compose(&self.inner, &then.inner),
        }
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "KrausChannel('{}', {} operators)",
            self.inner.label(),
            self.inner.kraus().len()
        )
    }
}

/// A probabilistic local filter F = U diag(1, sqrt(r)) V with F†F <= 1.
#[pyclass(
    frozen,
    skip_from_py_object,
    name = "LocalFilter",
    module = "esd_adapt"
)]
#[derive(Clone)]
struct PyLocalFilter {
    inner: LocalFilter,
}

#[pymethods]
impl PyLocalFilter {
    #[new]
    #[pyo3(signature = (r, u_angles = [0.0, 0.0, 0.0], v_angles = [0.0, 0.0, 0.0]))]
    fn new(r: f64, u_angles: [f64; 3], v_angles: [f64; 3]) -> PyResult<Self> {
        Ok(Self {
            inner: LocalFilter::new(r, u_angles, v_angles).map_err(err)?,
        })
    }

    #[staticmethod]
    fn identity() -> Self {
        Self {
            inner: LocalFilter::identity(),
        }
    }

    /// diag(1, sqrt(r)).
    #[staticmethod]
    fn diagonal(r: f64) -> PyResult<Self> {
        Ok(Self {
            inner: LocalFilter::diagonal(r).map_err(err)?,
        })
    }

    /// diag(sqrt(r), 1) up to a global phase.
    #[staticmethod]
    fn flipped_diagonal(r: f64) -> PyResult<Self> {
        Ok(Self {
            inner: LocalFilter::flipped_diagonal(r).map_err(err)?,
        })
    }

    /// The |0> <-> |1> exchange.
    #[staticmethod]
    fn swap() -> Self {
        Self {
            inner: LocalFilter::swap(),
        }
    }

    fn r(&self) -> f64 {
        self.inner.r()
    }

    fn u_angles(&self) -> [f64; 3] {
        self.inner.u_angles()
    }

    fn v_angles(&self) -> [f64; 3] {
        self.inner.v_angles()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        mat2_to_py(&self.inner.matrix())
    }

    /// Applies the filter to one qubit; returns (normalized state, success rate).
    fn apply(&self, state: &PyTwoQubitState, side: &str) -> PyResult<(PyTwoQubitState, f64)> {
        let out = apply_filter(&state.inner, &self.inner, parse_side(side)?).map_err(err)?;
        Ok((PyTwoQubitState { inner: out.state }, out.success_rate))
    }

    fn __repr__(&self) -> String {
        format!("LocalFilter(r={})", self.inner.r())
    }
}

/// The two-loss-channel mixture state (replacements |0> then |1> on |Ψ−>).
#[pyfunction]
fn loss_mixture_state(p1: f64, p2: f64) -> PyResult<PyTwoQubitState> {
    Ok(PyTwoQubitState {
        inner: adaptation::loss_mixture_state(p1, p2).map_err(err)?,
    })
}

/// The swap-adapted mixture state.
#[pyfunction]
fn swap_adapted_state(p1: f64, p2: f64) -> PyResult<PyTwoQubitState> {
    Ok(PyTwoQubitState {
        inner: adaptation::swap_adapted_state(p1, p2).map_err(err)?,
    })
}

/// Closed-form concurrence of the unadapted mixture (may be negative).
#[pyfunction]
fn loss_mixture_concurrence(p1: f64, p2: f64) -> f64 {
    adaptation::loss_mixture_concurrence(p1, p2)
}

/// p2 above this threshold keeps the unadapted mixture entangled.
#[pyfunction]
fn loss_mixture_threshold(p1: f64) -> f64 {
    adaptation::loss_mixture_threshold(p1)
}

/// Largest admissible sqrt(r) of the sufficient filter bound for the
/// symmetric Werner + amplitude-damping pipeline.
#[pyfunction]
fn sufficient_filter_bound(p: f64, gamma: f64) -> PyResult<f64> {
    adaptation::sufficient_filter_bound(p, gamma).map_err(err)
}

/// Finite-eps limiting filtration on the swap-adapted mixture; returns
/// (concurrence, success_rate).
#[pyfunction]
fn post_channel_filter_limit(p1: f64, p2: f64, eps: f64) -> PyResult<(f64, f64)> {
    let out = adaptation::post_channel_filter_limit(p1, p2, eps).map_err(err)?;
    Ok((out.concurrence, out.success_rate))
}

/// Runs a pipeline spec given as JSON; returns a dict with the final state,
/// success rate and entanglement diagnostics.
#[pyfunction]
fn run_pipeline_json(py: Python<'_>, spec_json: &str) -> PyResult<Py<PyAny>> {
    let spec: PipelineSpec =
        serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let run = run_pipeline(&spec).map_err(err)?;
    let dict = PyDict::new(py);
    dict.set_item("success_rate", run.outcome.success_rate)?;
    dict.set_item("min_pt_eigenvalue", run.report.min_pt_eigenvalue)?;
    dict.set_item("concurrence", run.report.concurrence)?;
    dict.set_item("entangled", run.report.entangled)?;
    dict.set_item(
        "state",
        PyTwoQubitState {
            inner: run.outcome.state,
        },
    )?;
    dict.into_py_any(py)
}

/// Classifies one (gamma, p) cell of the phase diagram; returns the scan
/// record as a dict.
#[pyfunction]
#[pyo3(signature = (gamma, p, seed = 0))]
fn classify_point(py: Python<'_>, gamma: f64, p: f64, seed: u64) -> PyResult<Py<PyAny>> {
    let record = scan::classify_point(gamma, p, seed).map_err(err)?;
    serialize_to_py(py, &record)
}

/// Optimizes the adaptation filter for the symmetric Werner +
/// amplitude-damping pipeline at one point; space is "diagonal" or "full".
#[pyfunction]
#[pyo3(signature = (gamma, p, input, space = "diagonal", seed = 0, r_steps = 200, s_min = 0.0))]
#[allow(clippy::too_many_arguments)]
fn optimize_filters(
    py: Python<'_>,
    gamma: f64,
    p: f64,
    input: &str,
    space: &str,
    seed: u64,
    r_steps: usize,
    s_min: f64,
) -> PyResult<Py<PyAny>> {
    let template =
        PipelineTemplate::symmetric_adaptation(parse_bell(input)?, p, gamma).map_err(err)?;
    let mut problem = OptimizationProblem::new(template);
    problem.seed = seed;
    problem.s_min = s_min;
    let result = match space {
        "diagonal" => grid_search_diag(&problem, r_steps).map_err(err)?,
        "full" => {
            problem.space = SearchSpace::FullFilter;
            genetic_optimize(&problem).map_err(err)?
        }
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown space '{other}' (use diagonal or full)"
            )))
        }
    };
    serialize_to_py(py, &result)
}

/// Runs a (gamma, p) scan and writes the CSV; returns the per-class counts.
#[pyfunction]
#[pyo3(signature = (csv_path, gamma_steps = 50, p_steps = 50, seed = 0))]
fn scan_to_csv(
    py: Python<'_>,
    csv_path: &str,
    gamma_steps: usize,
    p_steps: usize,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let config = scan::ScanConfig {
        gamma_steps,
        p_steps,
        seed,
        ..scan::ScanConfig::default()
    };
    let output = scan::scan_grid(&config).map_err(err)?;
    let mut buf = Vec::new();
    scan::write_csv(&output.records, &mut buf)
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    std::fs::write(csv_path, &buf).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let dict = PyDict::new(py);
    for (class, count) in &output.summary.counts {
        dict.set_item(class.as_str(), count)?;
    }
    dict.into_py_any(py)
}

#[pymodule]
fn esd_adapt(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTwoQubitState>()?;
    m.add_class::<PyKrausChannel>()?;
    m.add_class::<PyLocalFilter>()?;
    m.add_function(wrap_pyfunction!(loss_mixture_state, m)?)?;
    m.add_function(wrap_pyfunction!(swap_adapted_state, m)?)?;
    m.add_function(wrap_pyfunction!(loss_mixture_concurrence, m)?)?;
    m.add_function(wrap_pyfunction!(loss_mixture_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(sufficient_filter_bound, m)?)?;
    m.add_function(wrap_pyfunction!(post_channel_filter_limit, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline_json, m)?)?;
    m.add_function(wrap_pyfunction!(classify_point, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_filters, m)?)?;
    m.add_function(wrap_pyfunction!(scan_to_csv, m)?)?;
    Ok(())
}
