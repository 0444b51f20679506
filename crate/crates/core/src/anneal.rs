//! Adiabatic-limit sweeps: the instantaneous ground state of
//! `H(lambda) = (1 - lambda) H_M + lambda H_C` on a uniform grid, profiled
//! with stabilizer entropy density (and negativity for qutrits).
//!
//! `H_M = -sum_i X_i` for qubits and `-sum_i (X_i + X_i^dag)` otherwise, so
//! the whole operator is real symmetric and the solver works in real
//! arithmetic.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lanczos::{lowest_two, TARGET_RESIDUAL};
use crate::magic::{mana, sre2};
use crate::qaoa::InstanceRef;
use crate::sk::SkInstance;
use crate::state::{space_size, QuditState};

/// Two lowest eigenvalues closer than this mark the grid point degenerate;
/// the eigenvector (and its magic) is then an arbitrary member of the ground
/// space.
pub const DEGENERATE_GAP: f64 = 1e-10;

const MAX_QUBIT_SITES: usize = 12;
const MAX_QUTRIT_SITES: usize = 7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub lambda: f64,
    pub energy: f64,
    pub sre2_density: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mana: Option<f64>,
    pub residual: f64,
    pub gap: f64,
    /// When set, sre2_density and mana are unreliable at this point.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealSweep {
    pub dim: u32,
    pub sites: usize,
    pub instance_ref: InstanceRef,
    pub points: Vec<SweepPoint>,
    pub max_residual: f64,
}

fn check_capacity(dim: u32, sites: usize) -> Result<()> {
    let cap = match dim {
        2 => MAX_QUBIT_SITES,
        3 => MAX_QUTRIT_SITES,
        d => {
            return Err(Error::Invalid(format!(
                "annealing supports local dimension 2 or 3, got {d}"
            )));
        }
    };
    if sites > cap {
        return Err(Error::Invalid(format!(
            "annealing supports at most {cap} sites at D = {dim}, got {sites}"
        )));
    }
    Ok(())
}

/// y = [(1 - lambda) H_M + lambda H_C] x as a gather over basis states.
fn apply_hamiltonian(
    dim: u32,
    sites: usize,
    diag: &[f64],
    lambda: f64,
    x: &[f64],
    y: &mut [f64],
) {
    let d = dim as usize;
    let mix = 1.0 - lambda;
    let strides: Vec<usize> = (0..sites)
        .map(|s| d.pow((sites - 1 - s) as u32))
        .collect();
    y.par_iter_mut().enumerate().for_each(|(idx, out)| {
        let mut acc = lambda * diag[idx] * x[idx];
        for &st in &strides {
            let digit = (idx / st) % d;
            if d == 2 {
                let partner = if digit == 0 { idx + st } else { idx - st };
                acc -= mix * x[partner];
            } else {
                let up = if digit + 1 == d { idx - (d - 1) * st } else { idx + st };
                let down = if digit == 0 { idx + (d - 1) * st } else { idx - st };
                acc -= mix * (x[up] + x[down]);
            }
        }
        *out = acc;
    });
}

fn with_lambda_context(err: Error, lambda: f64) -> Error {
    match err {
        Error::Eigensolver {
            target, achieved, ..
        } => Error::Eigensolver {
            target,
            achieved,
            context: format!(" at lambda = {lambda}"),
        },
        other => other,
    }
}

/// Real eigenvector to a state, with the largest-magnitude amplitude made
/// real positive.
fn to_state(dim: u32, sites: usize, mut vector: Vec<f64>) -> Result<QuditState> {
    let mut imax = 0;
    let mut vmax = 0.0;
    for (i, &v) in vector.iter().enumerate() {
        if v.abs() > vmax {
            vmax = v.abs();
            imax = i;
        }
    }
    if vector[imax] < 0.0 {
        for v in vector.iter_mut() {
            *v = -*v;
        }
    }
    QuditState::from_amps(
        dim,
        sites,
        vector.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
    )
}

fn ground_at(
    inst: &SkInstance,
    diag: &[f64],
    lambda: f64,
    warm: Option<&[f64]>,
) -> Result<(crate::lanczos::GroundPair, f64)> {
    let n = diag.len();
    let apply = |x: &[f64], y: &mut [f64]| {
        apply_hamiltonian(inst.dim, inst.sites, diag, lambda, x, y);
    };
    lowest_two(n, apply, warm, TARGET_RESIDUAL).map_err(|e| with_lambda_context(e, lambda))
}

/// Ground state of the interpolated operator at one lambda, solved cold.
/// Returns the state, its energy, and the verified eigensolver residual.
pub fn instantaneous_ground_state(
    inst: &SkInstance,
    lambda: f64,
) -> Result<(QuditState, f64, f64)> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Invalid(format!("lambda = {lambda} outside [0, 1]")));
    }
    check_capacity(inst.dim, inst.sites)?;
    let spectrum = inst.cost_diagonal()?;
    let (ground, _) = ground_at(inst, &spectrum.diag, lambda, None)?;
    let state = to_state(inst.dim, inst.sites, ground.vector)?;
    Ok((state, ground.energy, ground.residual))
}

/// Sweeps a uniform lambda grid (endpoints included), warm-starting each
/// solve from the previous point and recording energy, magic, and solver
/// diagnostics everywhere.
pub fn anneal_sweep(
    inst: &SkInstance,
    grid_points: usize,
    measure_mana: bool,
) -> Result<AnnealSweep> {
    if grid_points < 3 {
        return Err(Error::Invalid(format!(
            "need at least 3 grid points, got {grid_points}"
        )));
    }
    check_capacity(inst.dim, inst.sites)?;
    if measure_mana && inst.dim.is_multiple_of(2) {
        return Err(Error::UnsupportedDimension {
            op: "mana",
            requirement: "an odd prime dimension",
            dim: inst.dim,
        });
    }
    space_size(inst.dim, inst.sites)?;
    let spectrum = inst.cost_diagonal()?;

    let mut points = Vec::with_capacity(grid_points);
    let mut warm: Option<Vec<f64>> = None;
    let mut max_residual = 0.0f64;
    for k in 0..grid_points {
        let lambda = k as f64 / (grid_points - 1) as f64;
        let (ground, e1) = ground_at(inst, &spectrum.diag, lambda, warm.as_deref())?;
        let gap = e1 - ground.energy;
        let state = to_state(inst.dim, inst.sites, ground.vector.clone())?;
        let point = SweepPoint {
            lambda,
            energy: ground.energy,
            sre2_density: sre2(&state)? / inst.sites as f64,
            mana: if measure_mana { Some(mana(&state)?) } else { None },
            residual: ground.residual,
            gap,
            degenerate: gap < DEGENERATE_GAP,
        };
        max_residual = max_residual.max(ground.residual);
        points.push(point);
        warm = Some(ground.vector);
    }

    Ok(AnnealSweep {
        dim: inst.dim,
        sites: inst.sites,
        instance_ref: inst.reference(),
        points,
        max_residual,
    })
}
