//! Random all-to-all spin-glass cost instances on qubits or qutrits, with
//! Gaussian bias fields that break the degeneracy of the classical spectrum.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{derive_seed, TAG_BIAS, TAG_COUPLINGS};
use crate::error::{Error, Result};
use crate::state::{space_size, QuditState};

/// Gap below which a cost spectrum counts as degenerate and the bias fields
/// are redrawn.
pub const DEGENERACY_GAP: f64 = 1e-9;

const MAX_BIAS_ATTEMPTS: u32 = 100;

/// A drawn problem instance. Couplings are stored as (i, j, value) with
/// i < j; there are no self-couplings. `bias_hp` is empty for qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkInstance {
    pub dim: u32,
    pub sites: usize,
    pub couplings: Vec<(usize, usize, f64)>,
    pub bias_h: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bias_hp: Vec<f64>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
}

/// Classical spectrum of an instance: per-basis-state energies plus the
/// location of the unique minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct CostSpectrum {
    pub diag: Vec<f64>,
    pub ground_index: usize,
    pub ground_energy: f64,
    /// Second-lowest energy minus the lowest.
    pub gap: f64,
}

/// Draws couplings J_ij ~ Normal(0, 1) for every pair i < j and bias fields
/// h, h' ~ Normal(0, bias_variance), redrawing the bias (with a derived
/// seed) until the cost spectrum has a unique ground state.
///
/// All pairs are drawn before the truncation filter |i - j| <= r is applied,
/// so the surviving couplings are identical with and without truncation.
pub fn generate_instance(
    dim: u32,
    sites: usize,
    seed: u64,
    bias_variance: f64,
    truncation: Option<usize>,
) -> Result<SkInstance> {
    if dim != 2 && dim != 3 {
        return Err(Error::Invalid(format!(
            "local dimension must be 2 or 3, got {dim}"
        )));
    }
    if sites < 2 {
        return Err(Error::Invalid(format!("need at least 2 sites, got {sites}")));
    }
    if !(bias_variance > 0.0) {
        return Err(Error::Invalid("bias_variance must be positive".into()));
    }
    space_size(dim, sites)?;

    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, TAG_COUPLINGS, 0));
    let mut couplings = Vec::with_capacity(sites * (sites - 1) / 2);
    for i in 0..sites {
        for j in (i + 1)..sites {
            let value = unit.sample(&mut rng);
            if truncation.is_none_or(|r| j - i <= r) {
                couplings.push((i, j, value));
            }
        }
    }

    let bias = Normal::new(0.0, bias_variance.sqrt()).expect("bias normal");
    for attempt in 0..MAX_BIAS_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, TAG_BIAS, attempt as u64));
        let bias_h: Vec<f64> = (0..sites).map(|_| bias.sample(&mut rng)).collect();
        let bias_hp: Vec<f64> = if dim == 2 {
            Vec::new()
        } else {
            (0..sites).map(|_| bias.sample(&mut rng)).collect()
        };
        let inst = SkInstance {
            dim,
            sites,
            couplings: couplings.clone(),
            bias_h,
            bias_hp,
            seed,
            truncation,
        };
        if inst.cost_diagonal()?.gap > DEGENERACY_GAP {
            return Ok(inst);
        }
    }
    Err(Error::DegenerateCost {
        attempts: MAX_BIAS_ATTEMPTS,
        seed,
    })
}

impl SkInstance {
    /// Energy of every computational basis state:
    /// `E(s) = sum_{i<j} J_ij 2cos(2 pi (s_i - s_j)/D)
    ///       + sum_i h_i 2cos(2 pi s_i/D) + sum_i h'_i 2sin(2 pi s_i/D)`.
    pub fn cost_diagonal(&self) -> Result<CostSpectrum> {
        let d = self.dim as usize;
        let len = space_size(self.dim, self.sites)?;
        if self.bias_h.len() != self.sites
            || (!self.bias_hp.is_empty() && self.bias_hp.len() != self.sites)
        {
            return Err(Error::Invalid("bias field length does not match sites".into()));
        }
        if let Some((i, j, _)) = self
            .couplings
            .iter()
            .find(|&&(i, j, _)| i >= j || j >= self.sites)
        {
            return Err(Error::Invalid(format!(
                "coupling ({i}, {j}) violates i < j < sites"
            )));
        }

        // 2cos and 2sin on the digit lattice
        let ct: Vec<f64> = (0..d)
            .map(|k| 2.0 * (std::f64::consts::TAU * k as f64 / d as f64).cos())
            .collect();
        let st: Vec<f64> = (0..d)
            .map(|k| 2.0 * (std::f64::consts::TAU * k as f64 / d as f64).sin())
            .collect();

        let diag: Vec<f64> = (0..len)
            .into_par_iter()
            .map_init(
                || vec![0u32; self.sites],
                |digits, idx| {
                    crate::state::digits_of(idx, self.dim, self.sites, digits);
                    let mut e = 0.0;
                    for &(i, j, v) in &self.couplings {
                        let delta = (digits[i] + self.dim - digits[j]) % self.dim;
                        e += v * ct[delta as usize];
                    }
                    for (i, &h) in self.bias_h.iter().enumerate() {
                        e += h * ct[digits[i] as usize];
                    }
                    for (i, &hp) in self.bias_hp.iter().enumerate() {
                        e += hp * st[digits[i] as usize];
                    }
                    e
                },
            )
            .collect();

        let mut ground_index = 0;
        let mut ground_energy = f64::INFINITY;
        for (k, &e) in diag.iter().enumerate() {
            if e < ground_energy {
                ground_energy = e;
                ground_index = k;
            }
        }
        let mut second = f64::INFINITY;
        for (k, &e) in diag.iter().enumerate() {
            if k != ground_index && e < second {
                second = e;
            }
        }
        Ok(CostSpectrum {
            gap: second - ground_energy,
            diag,
            ground_index,
            ground_energy,
        })
    }
}

/// `sum_k |amps[k]|^2 diag[k]`.
pub fn energy_expectation(state: &QuditState, spectrum: &CostSpectrum) -> Result<f64> {
    if state.len() != spectrum.diag.len() {
        return Err(Error::Invalid(format!(
            "state has {} amplitudes but the cost diagonal has {}",
            state.len(),
            spectrum.diag.len()
        )));
    }
    Ok(state
        .amps()
        .iter()
        .zip(&spectrum.diag)
        .map(|(a, &e)| a.norm_sqr() * e)
        .sum())
}

/// Probability of the exact ground state: `|amps[ground_index]|^2`.
pub fn fidelity_with_ground(state: &QuditState, spectrum: &CostSpectrum) -> Result<f64> {
    if state.len() != spectrum.diag.len() {
        return Err(Error::Invalid(format!(
            "state has {} amplitudes but the cost diagonal has {}",
            state.len(),
            spectrum.diag.len()
        )));
    }
    Ok(state.amps()[spectrum.ground_index].norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bare(dim: u32, sites: usize, couplings: Vec<(usize, usize, f64)>) -> SkInstance {
        SkInstance {
            dim,
            sites,
            couplings,
            bias_h: vec![0.0; sites],
            bias_hp: if dim == 2 { Vec::new() } else { vec![0.0; sites] },
            seed: 0,
            truncation: None,
        }
    }

    #[test]
    fn single_coupling_qubit_diagonal() {
        let inst = bare(2, 2, vec![(0, 1, 1.0)]);
        let spec = inst.cost_diagonal().unwrap();
        assert_eq!(spec.diag, vec![2.0, -2.0, -2.0, 2.0]);
        assert_eq!(spec.ground_index, 1);
        assert_eq!(spec.ground_energy, -2.0);
        assert_eq!(spec.gap, 0.0);
    }

    #[test]
    fn single_site_qutrit_bias_split() {
        let mut inst = bare(3, 2, vec![]);
        inst.bias_hp = vec![1.0, 0.0];
        let spec = inst.cost_diagonal().unwrap();
        // digit 1 at site 0 gains +sqrt(3), digit 2 gains -sqrt(3)
        let s3 = 3.0f64.sqrt();
        assert_abs_diff_eq!(spec.diag[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.diag[3], s3, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.diag[6], -s3, epsilon = 1e-12);
    }

    #[test]
    fn zero_instance_is_flat() {
        let inst = bare(3, 3, vec![]);
        let spec = inst.cost_diagonal().unwrap();
        assert!(spec.diag.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn generation_is_deterministic_and_nondegenerate() {
        for seed in 0..20 {
            let a = generate_instance(2, 6, seed, 0.3, None).unwrap();
            let b = generate_instance(2, 6, seed, 0.3, None).unwrap();
            assert_eq!(a, b);
            let spec = a.cost_diagonal().unwrap();
            assert!(spec.gap > DEGENERACY_GAP);
            assert_eq!(
                spec.ground_index,
                spec.diag
                    .iter()
                    .enumerate()
                    .min_by(|x, y| x.1.partial_cmp(y.1).unwrap())
                    .unwrap()
                    .0
            );
        }
        let q = generate_instance(3, 4, 11, 0.3, None).unwrap();
        assert_eq!(q.bias_hp.len(), 4);
        assert!(q.cost_diagonal().unwrap().gap > DEGENERACY_GAP);
        let c = generate_instance(2, 4, 11, 0.3, None).unwrap();
        assert!(c.bias_hp.is_empty());
    }

    #[test]
    fn truncation_filters_without_reshuffling_draws() {
        let full = generate_instance(2, 6, 5, 0.3, None).unwrap();
        let cut = generate_instance(2, 6, 5, 0.3, Some(2)).unwrap();
        assert!(cut.couplings.iter().all(|&(i, j, _)| j - i <= 2));
        let kept: Vec<_> = full
            .couplings
            .iter()
            .copied()
            .filter(|&(i, j, _)| j - i <= 2)
            .collect();
        assert_eq!(cut.couplings, kept);
    }

    #[test]
    fn bias_fields_have_requested_spread() {
        let n = 400;
        let mut sum = 0.0;
        let mut sq = 0.0;
        let mut count = 0usize;
        for seed in 0..n {
            let inst = generate_instance(2, 6, seed, 0.3, None).unwrap();
            for &h in &inst.bias_h {
                sum += h;
                sq += h * h;
                count += 1;
            }
        }
        let mean = sum / count as f64;
        let var = sq / count as f64 - mean * mean;
        assert!(mean.abs() < 0.05, "bias mean {mean}");
        assert!((var - 0.3).abs() < 0.05, "bias variance {var}");
    }

    #[test]
    fn expectation_and_fidelity_on_reference_states() {
        let inst = generate_instance(2, 4, 3, 0.3, None).unwrap();
        let spec = inst.cost_diagonal().unwrap();

        let ground = QuditState::basis_state(2, 4, spec.ground_index).unwrap();
        assert_eq!(energy_expectation(&ground, &spec).unwrap(), spec.ground_energy);
        assert_eq!(fidelity_with_ground(&ground, &spec).unwrap(), 1.0);

        let plus = QuditState::plus_state(2, 4).unwrap();
        assert_abs_diff_eq!(
            fidelity_with_ground(&plus, &spec).unwrap(),
            1.0 / 16.0,
            epsilon = 1e-12
        );
        assert!(energy_expectation(&plus, &spec).unwrap() >= spec.ground_energy);

        let other = QuditState::basis_state(2, 4, (spec.ground_index + 1) % 16).unwrap();
        assert_eq!(fidelity_with_ground(&other, &spec).unwrap(), 0.0);
    }

    #[test]
    fn uniform_state_zero_bias_energy_vanishes() {
        let mut inst = generate_instance(2, 5, 9, 0.3, None).unwrap();
        inst.bias_h = vec![0.0; 5];
        let spec = inst.cost_diagonal().unwrap();
        let plus = QuditState::plus_state(2, 5).unwrap();
        assert_abs_diff_eq!(energy_expectation(&plus, &spec).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn instance_round_trips_through_json() {
        let inst = generate_instance(3, 4, 21, 0.3, Some(3)).unwrap();
        let text = serde_json::to_string(&inst).unwrap();
        let back: SkInstance = serde_json::from_str(&text).unwrap();
        assert_eq!(inst, back);
        let qubit = generate_instance(2, 4, 21, 0.3, None).unwrap();
        let text = serde_json::to_string(&qubit).unwrap();
        assert!(!text.contains("bias_hp"));
        assert!(!text.contains("truncation"));
        let back: SkInstance = serde_json::from_str(&text).unwrap();
        assert_eq!(qubit, back);
    }
}
