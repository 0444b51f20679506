//! Alternating cost/mixer circuits on qudits, annealing-ramp parameter
//! initialization, and multi-restart trust-region optimization with per-layer
//! and per-evaluation traces.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gates::fourier_matrix;
use crate::magic::{mana, sre2};
use crate::optimizer::minimize_trust_region;
use crate::sk::{energy_expectation, fidelity_with_ground, CostSpectrum, SkInstance};
use crate::state::{space_size, QuditState};

/// Angles of one circuit: layer p applies the cost phase with gammas[p-1]
/// and then the mixer with betas[p-1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.len() != betas.len() {
            return Err(Error::Invalid(format!(
                "angle vectors differ in length: {} vs {}",
                gammas.len(),
                betas.len()
            )));
        }
        Ok(QaoaParams { gammas, betas })
    }

    pub fn depth(&self) -> usize {
        self.gammas.len()
    }

    /// Flat layout [gammas..., betas...] used by the optimizer.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(2 * self.depth());
        x.extend_from_slice(&self.gammas);
        x.extend_from_slice(&self.betas);
        x
    }

    pub fn from_flat(x: &[f64]) -> Result<Self> {
        if x.is_empty() || !x.len().is_multiple_of(2) {
            return Err(Error::Invalid(format!(
                "flat parameter vector must have even nonzero length, got {}",
                x.len()
            )));
        }
        let d = x.len() / 2;
        Ok(QaoaParams {
            gammas: x[..d].to_vec(),
            betas: x[d..].to_vec(),
        })
    }
}

/// Linear annealing ramps: gamma_p = (p/d) dt rises, beta_p = (1 - p/d) dt
/// falls, for p = 1..d.
pub fn tqa_init(depth: usize, dt: f64) -> Result<QaoaParams> {
    if depth == 0 {
        return Err(Error::Invalid("depth must be at least 1".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::Invalid(format!("ramp step must be positive, got {dt}")));
    }
    let d = depth as f64;
    let gammas = (1..=depth).map(|p| (p as f64 / d) * dt).collect();
    let betas = (1..=depth).map(|p| (1.0 - p as f64 / d) * dt).collect();
    Ok(QaoaParams { gammas, betas })
}

/// Applies `exp(+i beta X)` per site for qubits, `exp(+i beta (X + X^dag))`
/// per site otherwise: the evolution generated by the mixer `-sum_i X_i`
/// (Hermitized for D > 2). Diagonal in the Fourier basis with eigenvalues
/// 1 - 2k (D = 2) or 2cos(2 pi k / D).
pub fn mixer_evolve(state: &mut QuditState, beta: f64) -> Result<()> {
    let u = mixer_site_unitary(state.dim(), beta);
    for site in 0..state.sites() {
        crate::gates::apply_single_site_unchecked(state, site, &u);
    }
    Ok(())
}

/// Dense single-site mixer step `F^dag diag(e^(i beta m_k)) F`.
fn mixer_site_unitary(dim: u32, beta: f64) -> Vec<Complex64> {
    let d = dim as usize;
    let f = fourier_matrix(dim);
    let phases: Vec<Complex64> = (0..d)
        .map(|k| {
            let m = if dim == 2 {
                1.0 - 2.0 * k as f64
            } else {
                2.0 * (std::f64::consts::TAU * k as f64 / d as f64).cos()
            };
            Complex64::from_polar(1.0, beta * m)
        })
        .collect();
    // u[a][b] = sum_k conj(f[k][a]) phases[k] f[k][b]
    let mut u = vec![Complex64::new(0.0, 0.0); d * d];
    for a in 0..d {
        for b in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..d {
                acc += f[k * d + a].conj() * phases[k] * f[k * d + b];
            }
            u[a * d + b] = acc;
        }
    }
    u
}

/// Runs the circuit from `|+>^N`, visiting the state after every layer:
/// `visit(0, ..)` sees the initial state, `visit(p, ..)` the state after
/// layer p. Returns the final state.
pub fn evolve_layers<F>(
    dim: u32,
    sites: usize,
    diag: &[f64],
    params: &QaoaParams,
    mut visit: F,
) -> Result<QuditState>
where
    F: FnMut(usize, &QuditState) -> Result<()>,
{
    if params.gammas.len() != params.betas.len() {
        return Err(Error::Invalid("angle vectors differ in length".into()));
    }
    let mut state = QuditState::plus_state(dim, sites)?;
    visit(0, &state)?;
    for p in 0..params.depth() {
        state.diagonal_phase_evolve(diag, params.gammas[p])?;
        mixer_evolve(&mut state, params.betas[p])?;
        visit(p + 1, &state)?;
    }
    Ok(state)
}

/// Final state of the alternating circuit for a precomputed cost diagonal.
pub fn run_circuit_on_diagonal(
    dim: u32,
    sites: usize,
    diag: &[f64],
    params: &QaoaParams,
) -> Result<QuditState> {
    evolve_layers(dim, sites, diag, params, |_, _| Ok(()))
}

/// Final state of the alternating circuit for an instance.
pub fn run_circuit(inst: &SkInstance, params: &QaoaParams) -> Result<QuditState> {
    let spectrum = inst.cost_diagonal()?;
    run_circuit_on_diagonal(inst.dim, inst.sites, &spectrum.diag, params)
}

/// Energy deviation from the exact optimum in units of its magnitude:
/// `(E - E_exact) / |E_exact|`; zero at the optimum, decreasing toward it.
pub fn approx_ratio(energy: f64, exact: f64) -> f64 {
    (energy - exact) / exact.abs()
}

/// Identifies the problem a run belongs to without embedding the couplings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRef {
    pub seed: u64,
    /// First 16 hex digits of the SHA-256 of the instance JSON.
    pub hash: String,
}

impl SkInstance {
    pub fn content_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("instance serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        let mut hex = String::with_capacity(16);
        for byte in &digest[..8] {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }

    pub fn reference(&self) -> InstanceRef {
        InstanceRef {
            seed: self.seed,
            hash: self.content_hash(),
        }
    }
}

/// State of the run after each layer p = 0..d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub energy: f64,
    pub approx_ratio: f64,
    pub fidelity: f64,
    pub sre2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mana: Option<f64>,
}

/// One objective evaluation of the winning restart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub energy: f64,
    pub sre2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mana: Option<f64>,
}

/// Optimized run: winning restart's parameters, its per-layer profile, and
/// its optimization history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaRun {
    pub dim: u32,
    pub sites: usize,
    pub instance_ref: InstanceRef,
    pub params: QaoaParams,
    /// d + 1 entries; entry 0 is the initial `|+>^N` state.
    pub layer_trace: Vec<LayerRecord>,
    /// One entry per objective evaluation of the winning restart.
    pub optimizer_trace: Vec<IterRecord>,
    /// 1-based index into the restart ramp grid.
    pub restart_index: usize,
    /// False when the winning restart exhausted its evaluation budget
    /// before the trust region shrank below tolerance.
    pub converged: bool,
    pub energy: f64,
    pub ground_energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOptions {
    pub restarts: usize,
    /// Trust-region radius below which a restart stops.
    pub tolerance: f64,
    /// Per-restart evaluation budget; `None` means 1000 x depth.
    pub max_evals: Option<usize>,
    /// Restart r of R starts from ramps with dt = dt_max * r / R.
    pub dt_max: f64,
    pub measure_mana: bool,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            restarts: 20,
            tolerance: 1e-4,
            max_evals: None,
            dt_max: 1.0,
            measure_mana: false,
        }
    }
}

/// Optimizes the depth-d circuit over restarts and returns the lowest-energy
/// one with full traces. Deterministic: restarts are seeded from a fixed dt
/// grid and merged by (energy, restart index) regardless of thread count.
pub fn optimize(inst: &SkInstance, depth: usize, opts: &OptimizeOptions) -> Result<QaoaRun> {
    if depth == 0 {
        return Err(Error::Invalid("depth must be at least 1".into()));
    }
    if opts.restarts == 0 {
        return Err(Error::Invalid("need at least one restart".into()));
    }
    if !(opts.tolerance > 0.0) || !(opts.dt_max > 0.0) {
        return Err(Error::Invalid("tolerance and dt_max must be positive".into()));
    }
    if opts.measure_mana && inst.dim.is_multiple_of(2) {
        return Err(Error::UnsupportedDimension {
            op: "mana",
            requirement: "an odd prime dimension",
            dim: inst.dim,
        });
    }
    let spectrum = inst.cost_diagonal()?;
    let max_evals = opts.max_evals.unwrap_or(1000 * depth);

    let run_one = |restart: usize, on_eval: &dyn Fn(&[f64], f64)| {
        let dt = opts.dt_max * restart as f64 / opts.restarts as f64;
        let start = tqa_init(depth, dt)?.to_flat();
        let objective = |x: &[f64]| {
            let params = QaoaParams::from_flat(x).expect("flat layout is fixed");
            let state = run_circuit_on_diagonal(inst.dim, inst.sites, &spectrum.diag, &params)
                .expect("dimensions fixed by instance");
            energy_expectation(&state, &spectrum).expect("shapes match")
        };
        Ok(minimize_trust_region(
            objective,
            &start,
            opts.tolerance,
            max_evals,
            on_eval,
        ))
    };

    let results: Vec<_> = (1..=opts.restarts)
        .into_par_iter()
        .map(|restart| run_one(restart, &|_, _| {}))
        .collect::<Result<_>>()?;

    let mut winner = 0;
    for (k, r) in results.iter().enumerate() {
        if r.best_energy < results[winner].best_energy {
            winner = k;
        }
    }
    let restart_index = winner + 1;

    // Replay the winning restart to record its optimization history with
    // magic evaluated at every step; determinism makes the replay exact.
    let trace = std::cell::RefCell::new(Vec::with_capacity(results[winner].evals));
    let replayed = run_one(restart_index, &|x, energy| {
        let params = QaoaParams::from_flat(x).expect("flat layout is fixed");
        let state = run_circuit_on_diagonal(inst.dim, inst.sites, &spectrum.diag, &params)
            .expect("dimensions fixed by instance");
        trace.borrow_mut().push(IterRecord {
            energy,
            sre2: sre2(&state).expect("state is normalized"),
            mana: opts
                .measure_mana
                .then(|| mana(&state).expect("odd dimension checked above")),
        });
    })?;
    debug_assert_eq!(replayed.best_energy, results[winner].best_energy);
    let optimizer_trace = trace.into_inner();

    let params = QaoaParams::from_flat(&replayed.best_params)?;
    let layer_trace = trace_layers(inst, &spectrum, &params, opts.measure_mana)?;

    Ok(QaoaRun {
        dim: inst.dim,
        sites: inst.sites,
        instance_ref: inst.reference(),
        params,
        layer_trace,
        optimizer_trace,
        restart_index,
        converged: replayed.converged,
        energy: replayed.best_energy,
        ground_energy: spectrum.ground_energy,
    })
}

/// Per-layer energies, fidelities, and magic at fixed parameters. Entry 0 is
/// the initial state, whose magic and fidelity are known identities and
/// recorded exactly.
pub fn trace_layers(
    inst: &SkInstance,
    spectrum: &CostSpectrum,
    params: &QaoaParams,
    measure_mana: bool,
) -> Result<Vec<LayerRecord>> {
    if measure_mana && inst.dim.is_multiple_of(2) {
        return Err(Error::UnsupportedDimension {
            op: "mana",
            requirement: "an odd prime dimension",
            dim: inst.dim,
        });
    }
    let exact = spectrum.ground_energy;
    let uniform = 1.0 / space_size(inst.dim, inst.sites)? as f64;
    let mut records = Vec::with_capacity(params.depth() + 1);
    evolve_layers(inst.dim, inst.sites, &spectrum.diag, params, |p, state| {
        let energy = energy_expectation(state, spectrum)?;
        let record = if p == 0 {
            LayerRecord {
                energy,
                approx_ratio: approx_ratio(energy, exact),
                fidelity: uniform,
                sre2: 0.0,
                mana: measure_mana.then_some(0.0),
            }
        } else {
            LayerRecord {
                energy,
                approx_ratio: approx_ratio(energy, exact),
                fidelity: fidelity_with_ground(state, spectrum)?,
                sre2: sre2(state)?,
                mana: if measure_mana { Some(mana(state)?) } else { None },
            }
        };
        records.push(record);
        Ok(())
    })?;
    Ok(records)
}
