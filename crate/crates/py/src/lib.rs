//! Python bindings: closed-form circulator, noise, tuning, oracle, demo and link budget.
//!
//! Structured results come back as plain dicts and lists; configs go in as dicts
//! with the same keys as the CLI's JSON documents.

use circrx::circmodel::{self, NodeVoltages};
use circrx::netcore::Termination;
use circrx::{balnet, fddemo, linkbudget, lptv, noisemodel, waveform, C64};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn err(e: circrx::Error) -> PyErr {
    use circrx::Error as E;
    match e {
        E::NonConvergence { .. } | E::Singular(_) | E::NoSolution(_) | E::SyncFailed { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Converts any serializable value into Python objects through JSON.
fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_py<T: DeserializeOwned + Default>(py: Python<'_>, v: Option<&Bound<'_, PyAny>>) -> PyResult<T> {
    let Some(v) = v else { return Ok(T::default()) };
    let text: String = py.import("json")?.call_method1("dumps", (v,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn zbal_of(zbal: Option<C64>) -> Termination {
    zbal.map_or(Termination::Open, Termination::Z)
}

/// Circulator parameters. `zbal=None` is an open balance port.
#[pyclass(name = "CirculatorParams", from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: circmodel::CirculatorParams,
}

fn nodes<'py>(py: Python<'py>, n: &NodeVoltages) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for (k, v) in [("tx", n.v_tx), ("ant", n.v_ant), ("bal", n.v_bal), ("rx", n.v_rx), ("v1", n.v1), ("v2", n.v2)] {
        d.set_item(k, v)?;
    }
    Ok(d)
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (z0=50.0, rsw=3.5, zant=C64::new(50.0, 0.0), zbal=None, f0=750e6))]
    fn new(z0: f64, rsw: f64, zant: C64, zbal: Option<C64>, f0: f64) -> PyResult<Self> {
        let inner = circmodel::CirculatorParams { z0, rsw, zant, zbal: zbal_of(zbal), f0 };
        inner.validate().map_err(err)?;
        Ok(PyParams { inner })
    }

    fn with_zbal(&self, zbal: Option<C64>) -> Self {
        PyParams { inner: self.inner.with_zbal(zbal_of(zbal)) }
    }

    /// Node phasors for a TX source of EMF `v`.
    #[pyo3(signature = (v=C64::new(1.0, 0.0)))]
    fn tx_excitation<'py>(&self, py: Python<'py>, v: C64) -> PyResult<Bound<'py, PyDict>> {
        nodes(py, &circmodel::tx_excitation(&self.inner, v).map_err(err)?)
    }

    #[pyo3(signature = (v=C64::new(1.0, 0.0)))]
    fn ant_excitation<'py>(&self, py: Python<'py>, v: C64) -> PyResult<Bound<'py, PyDict>> {
        nodes(py, &circmodel::ant_excitation(&self.inner, v).map_err(err)?)
    }

    /// `(zbal, passive)` nulling TX leakage at the gyrator.
    fn balance_condition(&self) -> PyResult<(C64, bool)> {
        let b = circmodel::balance_condition(&self.inner).map_err(err)?;
        Ok((b.zbal, b.passive))
    }

    fn noise_factor<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &noisemodel::noise_factor(&self.inner).map_err(err)?)
    }

    #[pyo3(signature = (temperature=290.0))]
    fn noise_at_gyrator<'py>(&self, py: Python<'py>, temperature: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &noisemodel::noise_at_gyrator(&self.inner, temperature).map_err(err)?)
    }

    fn nf_vs_zbal<'py>(&self, py: Python<'py>, grid: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &noisemodel::nf_vs_zbal_curve(&self.inner, &grid).map_err(err)?)
    }

    /// Isolation rows over `freqs`; `network` takes the sweep's `network` keys.
    #[pyo3(signature = (freqs, network=None))]
    fn sweep<'py>(&self, py: Python<'py>, freqs: Vec<f64>, network: Option<&Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyAny>> {
        let opts: circmodel::NetworkOptions = from_py(py, network)?;
        to_py(py, &circmodel::frequency_sweep_with(&self.inner, &opts, &freqs).map_err(err)?.rows)
    }

    /// Exhaustive bank tuning; `band` and `bank` take the balance config's keys.
    #[pyo3(signature = (network=None, band=None, bank=None))]
    fn tune<'py>(
        &self,
        py: Python<'py>,
        network: Option<&Bound<'py, PyAny>>,
        band: Option<&Bound<'py, PyAny>>,
        bank: Option<&Bound<'py, PyAny>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let opts: circmodel::NetworkOptions = from_py(py, network)?;
        let band: balnet::Band = from_py(py, band)?;
        let bank: balnet::BankSpec = from_py(py, bank)?;
        to_py(py, &balnet::tune(&self.inner, &opts, &band, &bank).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!("CirculatorParams(z0={}, rsw={}, zant={}, zbal={:?}, f0={})", p.z0, p.rsw, p.zant, p.zbal, p.f0)
    }
}

/// Runs the time-domain oracle; returns node phasors and run statistics.
#[pyfunction]
#[pyo3(signature = (excitation, config=None))]
fn simulate<'py>(py: Python<'py>, excitation: &Bound<'py, PyAny>, config: Option<&Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyDict>> {
    let cfg: lptv::NPathConfig = from_py(py, config)?;
    let text: String = py.import("json")?.call_method1("dumps", (excitation,))?.extract()?;
    let ex: lptv::Excitation = serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let r = py.detach(|| lptv::simulate(&cfg, &ex)).map_err(err)?;
    let d = PyDict::new(py);
    let ph = PyDict::new(py);
    for (k, v) in &r.phasors {
        ph.set_item(k, *v)?;
    }
    d.set_item("phasors", ph)?;
    d.set_item("bb_phasor", r.bb_phasor)?;
    d.set_item("steady_state", r.steady_state)?;
    d.set_item("periods_run", r.periods_run)?;
    d.set_item("last_delta", r.last_delta)?;
    Ok(d)
}

#[pyfunction]
fn mixer_conversion_ratio(n_paths: usize, duty: f64) -> PyResult<f64> {
    lptv::mixer_conversion_ratio(n_paths, duty).map_err(err)
}

/// Full-duplex demo; returns the summary dict.
#[pyfunction]
#[pyo3(signature = (config=None))]
fn run_demo<'py>(py: Python<'py>, config: Option<&Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyAny>> {
    let cfg: fddemo::DemoConfig = from_py(py, config)?;
    let out = py.detach(|| fddemo::run_demo(&cfg)).map_err(err)?;
    to_py(py, &out.summary)
}

#[pyfunction]
#[pyo3(signature = (config=None))]
fn link_range<'py>(py: Python<'py>, config: Option<&Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyAny>> {
    let cfg: linkbudget::LinkConfig = from_py(py, config)?;
    to_py(py, &linkbudget::link_range(&cfg).map_err(err)?)
}

#[pyfunction]
fn noise_floor(bw_hz: f64, nf_db: f64) -> PyResult<f64> {
    linkbudget::noise_floor(bw_hz, nf_db).map_err(err)
}

#[pyfunction]
fn srrc_taps(beta: f64, span: usize, sps: usize) -> PyResult<Vec<f64>> {
    waveform::srrc_taps(beta, span, sps).map_err(err)
}

#[pymodule]
fn circrx_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(mixer_conversion_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(run_demo, m)?)?;
    m.add_function(wrap_pyfunction!(link_range, m)?)?;
    m.add_function(wrap_pyfunction!(noise_floor, m)?)?;
    m.add_function(wrap_pyfunction!(srrc_taps, m)?)?;
    Ok(())
}
