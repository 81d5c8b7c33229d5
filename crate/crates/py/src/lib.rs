//! Python bindings: grids, states, gates, gadgets and the analysis formulas.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ::cvriqp::gadgets::{self, EcOptions, GadgetReport, ShiftNoise};
use ::cvriqp::homodyne::{self, DetectorParams};
use ::cvriqp::quadgrid::{self, ModeState, QuadratureGrid};
use ::cvriqp::{analysis, gates, states};

fn err(e: ::cvriqp::Error) -> PyErr {
    if e.is_numerical() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

#[pyclass(name = "Grid", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyGrid(QuadratureGrid);

#[pymethods]
impl PyGrid {
    #[new]
    fn new(n_points: usize, extent: f64) -> PyResult<Self> {
        quadgrid::make_grid(n_points, extent).map(Self).map_err(err)
    }

    #[getter]
    fn n_points(&self) -> usize {
        self.0.n_points()
    }

    #[getter]
    fn extent(&self) -> f64 {
        self.0.extent()
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.0.spacing()
    }

    #[getter]
    fn momentum_spacing(&self) -> f64 {
        self.0.momentum_spacing()
    }

    fn points(&self) -> Vec<f64> {
        self.0.points()
    }

    fn momentum_points(&self) -> Vec<f64> {
        self.0.momentum_points()
    }

    fn __repr__(&self) -> String {
        format!("Grid(n_points={}, extent={})", self.0.n_points(), self.0.extent())
    }
}

#[pyclass(name = "State", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyState(ModeState);

#[pymethods]
impl PyState {
    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid(*self.0.grid())
    }

    #[getter]
    fn representation(&self) -> String {
        format!("{:?}", self.0.rep()).to_lowercase()
    }

    fn amplitudes(&self) -> Vec<C64> {
        self.0.amplitudes().to_vec()
    }

    fn density(&self) -> Vec<f64> {
        self.0.density()
    }

    fn norm_sq(&self) -> f64 {
        self.0.norm_sq()
    }

    fn in_position(&self) -> Self {
        Self(self.0.in_position())
    }

    fn in_momentum(&self) -> Self {
        Self(self.0.in_momentum())
    }

    fn mean(&self) -> f64 {
        self.0.mean_coordinate()
    }

    fn fidelity(&self, other: &PyState) -> PyResult<f64> {
        quadgrid::fidelity_pure(&self.0, &other.0).map_err(err)
    }
}

fn gkp(delta: f64, delta_env: Option<f64>) -> PyResult<states::GkpParams> {
    states::GkpParams::with_auto_truncation(delta, delta_env.unwrap_or(delta)).map_err(err)
}

#[pyfunction]
fn vacuum(grid: &PyGrid) -> PyResult<PyState> {
    states::vacuum(&grid.0).map(PyState).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (grid, q0=0.0, p0=0.0, width=1.0))]
fn gaussian(grid: &PyGrid, q0: f64, p0: f64, width: f64) -> PyResult<PyState> {
    states::gaussian(&grid.0, q0, p0, width).map(PyState).map_err(err)
}

#[pyfunction]
fn squeezed_momentum(sigma: f64, grid: &PyGrid) -> PyResult<PyState> {
    states::squeezed_momentum(sigma, &grid.0).map(PyState).map_err(err)
}

/// `logical` is one of "0", "1", "+", "-".
#[pyfunction]
#[pyo3(signature = (logical, delta, grid, delta_env=None))]
fn gkp_state(logical: &str, delta: f64, grid: &PyGrid, delta_env: Option<f64>) -> PyResult<PyState> {
    let p = gkp(delta, delta_env)?;
    let s = match logical {
        "0" => states::gkp_zero(&p, &grid.0),
        "1" => states::gkp_one(&p, &grid.0),
        "+" => states::gkp_plus(&p, &grid.0),
        "-" => states::gkp_minus(&p, &grid.0),
        other => return Err(PyValueError::new_err(format!("unknown logical state {other:?}"))),
    };
    s.map(PyState).map_err(err)
}

#[pyfunction]
fn apply_z(psi: &PyState) -> PyResult<PyState> {
    gates::apply_z(&psi.0.in_position()).map(PyState).map_err(err)
}

#[pyfunction]
fn apply_t(psi: &PyState) -> PyResult<PyState> {
    gates::apply_t(&psi.0.in_position()).map(PyState).map_err(err)
}

#[pyfunction]
fn apply_fourier(psi: &PyState) -> PyState {
    PyState(gates::apply_fourier(&psi.0))
}

#[pyfunction]
fn displace_q(psi: &PyState, u: f64) -> PyResult<PyState> {
    gates::displace_q(&psi.0, u).map(PyState).map_err(err)
}

#[pyfunction]
fn displace_p(psi: &PyState, v: f64) -> PyResult<PyState> {
    gates::displace_p(&psi.0, v).map(PyState).map_err(err)
}

/// Outcome record; `components` holds `(weight, State)` pairs of the
/// conditional mixture.
#[pyclass(name = "GadgetReport", frozen, get_all)]
struct PyReport {
    outcome_k: i64,
    outcome_value: f64,
    success_probability: f64,
    diagnostics: BTreeMap<String, f64>,
    components: Vec<(f64, PyState)>,
}

impl From<GadgetReport> for PyReport {
    fn from(r: GadgetReport) -> Self {
        Self {
            outcome_k: r.outcome_k,
            outcome_value: r.outcome_value,
            success_probability: r.success_probability,
            diagnostics: r.diagnostics,
            components: r.output.components().iter().map(|(w, s)| (*w, PyState(s.clone()))).collect(),
        }
    }
}

#[pyfunction]
#[pyo3(signature = (psi, sigma, eta, k=0))]
fn fourier_gadget(psi: &PyState, sigma: f64, eta: f64, k: i64) -> PyResult<PyReport> {
    let det = DetectorParams::for_grid(eta, psi.0.grid()).map_err(err)?;
    gadgets::fourier_gadget(&psi.0, sigma, &det, k).map(PyReport::from).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (data, delta, eta, seed, delta_env=None, outcome=None, data_shift=None))]
fn gkp_error_correct(
    data: &PyState,
    delta: f64,
    eta: f64,
    seed: u64,
    delta_env: Option<f64>,
    outcome: Option<i64>,
    data_shift: Option<f64>,
) -> PyResult<PyReport> {
    let det = DetectorParams::for_grid(eta, data.0.grid()).map_err(err)?;
    let opts = EcOptions { seed, fixed_outcome: outcome, data_shift };
    gadgets::gkp_error_correct(&data.0, &gkp(delta, delta_env)?, &ShiftNoise::none(), &det, &opts)
        .map(PyReport::from)
        .map_err(err)
}

/// X-basis readout as `(p_plus, p_minus, out_of_range, error_mass)`.
#[pyfunction]
fn gkp_readout(psi: &PyState, eta: f64) -> PyResult<(f64, f64, f64, f64)> {
    let det = DetectorParams::new(eta).map_err(err)?;
    let r = homodyne::gkp_readout(&psi.0, &det).map_err(err)?;
    Ok((r.p_plus, r.p_minus, r.out_of_range, r.error_mass))
}

/// Qubit Hadamard gadget on `alpha|0> + beta|1>`; returns
/// `(output amplitudes, outcome bit, probability)`.
#[pyfunction]
#[pyo3(signature = (alpha, beta, seed, postselect=None))]
fn dv_hadamard_gadget(alpha: C64, beta: C64, seed: u64, postselect: Option<bool>) -> PyResult<(Vec<C64>, u8, f64)> {
    let psi = gadgets::QubitState::single(alpha, beta).map_err(err)?;
    let (out, h, p) = gadgets::dv_hadamard_gadget(&psi, postselect, seed).map_err(err)?;
    Ok((out.amplitudes().to_vec(), h, p))
}

#[pyfunction]
fn pe_bound(delta: f64) -> PyResult<f64> {
    analysis::pe_bound(delta).map_err(err)
}

#[pyfunction]
fn squeezing_db(delta_sq: f64) -> PyResult<f64> {
    analysis::squeezing_db(delta_sq).map_err(err)
}

#[pyfunction]
fn delta_sq_from_db(db: f64) -> PyResult<f64> {
    analysis::delta_sq_from_db(db).map_err(err)
}

/// `(min_delta_sq, min_squeezing_db, mean_photon_lower, pe_bound_at_min)`.
#[pyfunction]
fn min_squeezing_db(n: u32) -> PyResult<(f64, f64, f64, f64)> {
    let r = analysis::min_squeezing_db(n).map_err(err)?;
    Ok((r.min_delta_sq, r.min_squeezing_db, r.mean_photon_lower, r.pe_bound_at_min))
}

#[pyfunction]
fn fault_tolerant_fourier_error(sigma: f64) -> PyResult<f64> {
    analysis::fault_tolerant_fourier_error(sigma).map_err(err)
}

#[pyfunction]
fn solve_ft_sigma(target: f64) -> PyResult<f64> {
    analysis::solve_ft_sigma(target).map_err(err)
}

#[pyfunction]
fn check_multiplicative(p_true: f64, p_sim: f64, c: f64) -> PyResult<bool> {
    analysis::check_multiplicative(p_true, p_sim, c).map_err(err)
}

#[pyfunction]
fn pe_budget_check(delta: f64, n: u32) -> PyResult<bool> {
    analysis::pe_budget_check(delta, n).map_err(err)
}

/// `(probability, ln probability)`.
#[pyfunction]
fn composed_postselection(n: u32, l: u32, eta: f64, sigma: f64) -> PyResult<(f64, f64)> {
    let p = analysis::composed_postselection(n, l, eta, sigma).map_err(err)?;
    Ok((p.probability, p.ln_probability))
}

#[pymodule]
#[pyo3(name = "cvriqp")]
fn cvriqp_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyState>()?;
    m.add_class::<PyReport>()?;
    m.add("SQRT_PI", states::SQRT_PI)?;
    m.add_function(wrap_pyfunction!(vacuum, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(squeezed_momentum, m)?)?;
    m.add_function(wrap_pyfunction!(gkp_state, m)?)?;
    m.add_function(wrap_pyfunction!(apply_z, m)?)?;
    m.add_function(wrap_pyfunction!(apply_t, m)?)?;
    m.add_function(wrap_pyfunction!(apply_fourier, m)?)?;
    m.add_function(wrap_pyfunction!(displace_q, m)?)?;
    m.add_function(wrap_pyfunction!(displace_p, m)?)?;
    m.add_function(wrap_pyfunction!(fourier_gadget, m)?)?;
    m.add_function(wrap_pyfunction!(gkp_error_correct, m)?)?;
    m.add_function(wrap_pyfunction!(gkp_readout, m)?)?;
    m.add_function(wrap_pyfunction!(dv_hadamard_gadget, m)?)?;
    m.add_function(wrap_pyfunction!(pe_bound, m)?)?;
    m.add_function(wrap_pyfunction!(squeezing_db, m)?)?;
    m.add_function(wrap_pyfunction!(delta_sq_from_db, m)?)?;
    m.add_function(wrap_pyfunction!(min_squeezing_db, m)?)?;
    m.add_function(wrap_pyfunction!(fault_tolerant_fourier_error, m)?)?;
    m.add_function(wrap_pyfunction!(solve_ft_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(check_multiplicative, m)?)?;
    m.add_function(wrap_pyfunction!(pe_budget_check, m)?)?;
    m.add_function(wrap_pyfunction!(composed_postselection, m)?)?;
    Ok(())
}
