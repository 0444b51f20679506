//! Python bindings: qudit states and their magic measures, disordered cost
//! instances, layered-circuit optimization, annealing sweeps, and the
//! closed-form fidelity-magic envelopes.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use magopt_core::{anneal, ansatz, magic, qaoa, sk, Error, QuditState};

fn py_err(e: Error) -> PyErr {
    // validation problems surface as ValueError, numerical ones as RuntimeError
    if e.exit_code() == 2 {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

/// Dense state vector of `sites` qudits with local dimension `dim`.
#[pyclass(module = "magopt", skip_from_py_object)]
#[derive(Clone)]
struct State {
    inner: QuditState,
}

#[pymethods]
impl State {
    /// Builds a state from an explicit amplitude list of length dim^sites.
    #[new]
    fn new(dim: u32, sites: usize, amplitudes: Vec<Complex64>) -> PyResult<Self> {
        QuditState::from_amps(dim, sites, amplitudes)
            .map(|inner| State { inner })
            .map_err(py_err)
    }

    /// Computational basis state with the given flat index.
    #[staticmethod]
    fn basis(dim: u32, sites: usize, index: usize) -> PyResult<Self> {
        QuditState::basis_state(dim, sites, index)
            .map(|inner| State { inner })
            .map_err(py_err)
    }

    /// Uniform superposition over all basis states.
    #[staticmethod]
    fn plus(dim: u32, sites: usize) -> PyResult<Self> {
        QuditState::plus_state(dim, sites)
            .map(|inner| State { inner })
            .map_err(py_err)
    }

    #[getter]
    fn dim(&self) -> u32 {
        self.inner.dim()
    }

    #[getter]
    fn sites(&self) -> usize {
        self.inner.sites()
    }

    fn amplitudes(&self) -> Vec<Complex64> {
        self.inner.amps().to_vec()
    }

    /// Second stabilizer Renyi entropy, zero exactly on stabilizer states.
    fn sre2(&self) -> PyResult<f64> {
        magic::sre2(&self.inner).map_err(py_err)
    }

    /// Wigner negativity measure; defined for odd local dimension only.
    fn mana(&self) -> PyResult<f64> {
        magic::mana(&self.inner).map_err(py_err)
    }

    /// Sum of squared generalized Pauli expectations; dim^sites when normalized.
    fn pauli_norm_sum(&self) -> PyResult<f64> {
        magic::pauli_norm_sum(&self.inner).map_err(py_err)
    }

    fn overlap(&self, other: &State) -> PyResult<Complex64> {
        self.inner.overlap(&other.inner).map_err(py_err)
    }

    fn tensor(&self, other: &State) -> PyResult<State> {
        self.inner
            .tensor(&other.inner)
            .map(|inner| State { inner })
            .map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "State(dim={}, sites={})",
            self.inner.dim(),
            self.inner.sites()
        )
    }
}

/// Disordered all-to-all two-body cost instance with site biases.
#[pyclass(module = "magopt", skip_from_py_object)]
#[derive(Clone)]
struct Instance {
    inner: sk::SkInstance,
}

#[pymethods]
impl Instance {
    /// Draws couplings and biases deterministically from the seed.
    #[staticmethod]
    #[pyo3(signature = (dim, sites, seed, bias_variance = 0.3, truncation = None))]
    fn generate(
        dim: u32,
        sites: usize,
        seed: u64,
        bias_variance: f64,
        truncation: Option<usize>,
    ) -> PyResult<Self> {
        sk::generate_instance(dim, sites, seed, bias_variance, truncation)
            .map(|inner| Instance { inner })
            .map_err(py_err)
    }

    #[getter]
    fn dim(&self) -> u32 {
        self.inner.dim
    }

    #[getter]
    fn sites(&self) -> usize {
        self.inner.sites
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    /// Pair couplings as (site_i, site_j, strength) triples.
    #[getter]
    fn couplings(&self) -> Vec<(usize, usize, f64)> {
        self.inner.couplings.clone()
    }

    #[getter]
    fn bias(&self) -> Vec<f64> {
        self.inner.bias_h.clone()
    }

    #[getter]
    fn bias_prime(&self) -> Vec<f64> {
        self.inner.bias_hp.clone()
    }

    /// Cost eigenvalue of every computational basis state.
    fn cost_diagonal(&self) -> PyResult<Vec<f64>> {
        self.inner
            .cost_diagonal()
            .map(|s| s.diag)
            .map_err(py_err)
    }

    fn ground_energy(&self) -> PyResult<f64> {
        self.inner
            .cost_diagonal()
            .map(|s| s.ground_energy)
            .map_err(py_err)
    }

    /// Difference between the two lowest distinct cost levels.
    fn gap(&self) -> PyResult<f64> {
        self.inner.cost_diagonal().map(|s| s.gap).map_err(py_err)
    }

    /// Cost expectation value in the given state.
    fn energy(&self, state: &State) -> PyResult<f64> {
        let spectrum = self.inner.cost_diagonal().map_err(py_err)?;
        sk::energy_expectation(&state.inner, &spectrum).map_err(py_err)
    }

    /// Total probability the state assigns to the cost ground space.
    fn ground_fidelity(&self, state: &State) -> PyResult<f64> {
        let spectrum = self.inner.cost_diagonal().map_err(py_err)?;
        sk::fidelity_with_ground(&state.inner, &spectrum).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(dim={}, sites={}, seed={})",
            self.inner.dim, self.inner.sites, self.inner.seed
        )
    }
}

/// Winning restart of a layered-circuit optimization with its traces.
#[pyclass(module = "magopt")]
struct Run {
    inner: qaoa::QaoaRun,
}

#[pymethods]
impl Run {
    #[getter]
    fn dim(&self) -> u32 {
        self.inner.dim
    }

    #[getter]
    fn sites(&self) -> usize {
        self.inner.sites
    }

    #[getter]
    fn energy(&self) -> f64 {
        self.inner.energy
    }

    #[getter]
    fn ground_energy(&self) -> f64 {
        self.inner.ground_energy
    }

    #[getter]
    fn approx_ratio(&self) -> f64 {
        qaoa::approx_ratio(self.inner.energy, self.inner.ground_energy)
    }

    #[getter]
    fn gammas(&self) -> Vec<f64> {
        self.inner.params.gammas.clone()
    }

    #[getter]
    fn betas(&self) -> Vec<f64> {
        self.inner.params.betas.clone()
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    #[getter]
    fn restart_index(&self) -> usize {
        self.inner.restart_index
    }

    /// Profile after each layer; entry 0 is the initial product state.
    fn layers<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.inner
            .layer_trace
            .iter()
            .map(|r| {
                let d = PyDict::new(py);
                d.set_item("energy", r.energy)?;
                d.set_item("approx_ratio", r.approx_ratio)?;
                d.set_item("fidelity", r.fidelity)?;
                d.set_item("sre2", r.sre2)?;
                d.set_item("mana", r.mana)?;
                Ok(d)
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Run(depth={}, energy={:.6}, converged={})",
            self.inner.params.depth(),
            self.inner.energy,
            self.inner.converged
        )
    }
}

/// Optimizes the depth-d circuit over a family of ramp restarts and returns
/// the lowest-energy one.
#[pyfunction]
#[pyo3(signature = (instance, depth, *, restarts = 20, tolerance = 1e-4, max_evals = None, dt_max = 1.0, measure_mana = false))]
#[allow(clippy::too_many_arguments)]
fn optimize(
    py: Python<'_>,
    instance: &Instance,
    depth: usize,
    restarts: usize,
    tolerance: f64,
    max_evals: Option<usize>,
    dt_max: f64,
    measure_mana: bool,
) -> PyResult<Run> {
    let opts = qaoa::OptimizeOptions {
        restarts,
        tolerance,
        max_evals,
        dt_max,
        measure_mana,
    };
    let inst = instance.inner.clone();
    py.detach(move || qaoa::optimize(&inst, depth, &opts))
        .map(|inner| Run { inner })
        .map_err(py_err)
}

/// Applies depth alternating cost and mixer layers to the plus state.
#[pyfunction]
fn run_circuit(
    py: Python<'_>,
    instance: &Instance,
    gammas: Vec<f64>,
    betas: Vec<f64>,
) -> PyResult<State> {
    let params = qaoa::QaoaParams::new(gammas, betas).map_err(py_err)?;
    let inst = instance.inner.clone();
    py.detach(move || qaoa::run_circuit(&inst, &params))
        .map(|inner| State { inner })
        .map_err(py_err)
}

/// Linear-ramp starting parameters (gammas, betas) for a depth-d circuit.
#[pyfunction]
fn tqa_init(depth: usize, dt: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    qaoa::tqa_init(depth, dt)
        .map(|p| (p.gammas, p.betas))
        .map_err(py_err)
}

/// Exact ground-state sweep of the interpolated Hamiltonian on a uniform
/// lambda grid; one dict per grid point.
#[pyfunction]
#[pyo3(signature = (instance, points, *, measure_mana = false))]
fn anneal_sweep<'py>(
    py: Python<'py>,
    instance: &Instance,
    points: usize,
    measure_mana: bool,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let inst = instance.inner.clone();
    let sweep = py
        .detach(move || anneal::anneal_sweep(&inst, points, measure_mana))
        .map_err(py_err)?;
    sweep
        .points
        .iter()
        .map(|p| {
            let d = PyDict::new(py);
            d.set_item("lambda", p.lambda)?;
            d.set_item("energy", p.energy)?;
            d.set_item("sre2_density", p.sre2_density)?;
            d.set_item("mana", p.mana)?;
            d.set_item("residual", p.residual)?;
            d.set_item("gap", p.gap)?;
            d.set_item("degenerate", p.degenerate)?;
            Ok(d)
        })
        .collect()
}

/// Ensemble-mean sre2 of Haar-random states, the generic ceiling for curves.
#[pyfunction]
fn haar_sre2_reference(dim: u32, sites: usize) -> PyResult<f64> {
    magic::haar_sre2_reference(dim, sites).map_err(py_err)
}

/// sre2 of sqrt(F)|0> + e^(i theta) sqrt(1-F)|1> on one qubit.
#[pyfunction]
fn sre2_two_state_qubit(f: f64, theta: f64) -> PyResult<f64> {
    ansatz::sre2_two_state_qubit(f, theta).map_err(py_err)
}

/// Phase minimizing the qubit two-state sre2 at fidelity F.
#[pyfunction]
fn sre2_two_state_qubit_min(f: f64) -> PyResult<f64> {
    ansatz::sre2_two_state_qubit_min(f).map_err(py_err)
}

/// Phase maximizing the qubit two-state sre2 at fidelity F.
#[pyfunction]
fn sre2_two_state_qubit_max(f: f64) -> PyResult<f64> {
    ansatz::sre2_two_state_qubit_max(f).map_err(py_err)
}

/// sre2 of the real qubit three-state superposition with weights (F, p, 1-F-p).
#[pyfunction]
fn sre2_three_state_qubit(f: f64, p: f64, theta1: f64, theta2: f64) -> PyResult<f64> {
    ansatz::sre2_three_state_qubit(f, p, theta1, theta2).map_err(py_err)
}

/// sre2 of a qutrit two-state superposition with weights (F, 1-F).
#[pyfunction]
fn sre2_two_state_qutrit(f: f64, a: u32, b: u32) -> PyResult<f64> {
    ansatz::sre2_two_state_qutrit(f, a, b).map_err(py_err)
}

/// Builds sqrt(F)|a> + e^(i theta) sqrt(1-F)|b> on an explicit register.
#[pyfunction]
#[pyo3(signature = (dim, sites, idx_a, idx_b, f, theta = 0.0))]
fn two_level_state(
    dim: u32,
    sites: usize,
    idx_a: usize,
    idx_b: usize,
    f: f64,
    theta: f64,
) -> PyResult<State> {
    ansatz::two_level_state(dim, sites, idx_a, idx_b, f, theta)
        .map(|inner| State { inner })
        .map_err(py_err)
}

/// Builds sqrt(F)|a> + e^(i theta1) sqrt(p)|b> + e^(i theta2) sqrt(1-F-p)|c>.
#[pyfunction]
#[pyo3(signature = (dim, sites, idx, f, p, theta1 = 0.0, theta2 = 0.0))]
fn three_level_state(
    dim: u32,
    sites: usize,
    idx: [usize; 3],
    f: f64,
    p: f64,
    theta1: f64,
    theta2: f64,
) -> PyResult<State> {
    ansatz::three_level_state(dim, sites, idx, f, p, theta1, theta2)
        .map(|inner| State { inner })
        .map_err(py_err)
}

#[pymodule]
fn magopt(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<State>()?;
    m.add_class::<Instance>()?;
    m.add_class::<Run>()?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(run_circuit, m)?)?;
    m.add_function(wrap_pyfunction!(tqa_init, m)?)?;
    m.add_function(wrap_pyfunction!(anneal_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(haar_sre2_reference, m)?)?;
    m.add_function(wrap_pyfunction!(sre2_two_state_qubit, m)?)?;
    m.add_function(wrap_pyfunction!(sre2_two_state_qubit_min, m)?)?;
    m.add_function(wrap_pyfunction!(sre2_two_state_qubit_max, m)?)?;
    m.add_function(wrap_pyfunction!(sre2_three_state_qubit, m)?)?;
    m.add_function(wrap_pyfunction!(sre2_two_state_qutrit, m)?)?;
    m.add_function(wrap_pyfunction!(two_level_state, m)?)?;
    m.add_function(wrap_pyfunction!(three_level_state, m)?)?;
    Ok(())
}
