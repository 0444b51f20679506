//! Experiment configuration, seed derivation, and the config hash stamped
//! into every output file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Child-seed domains. Values are part of the on-disk reproducibility
/// contract: changing them changes every derived ensemble.
pub(crate) const TAG_BIAS: u64 = 2;
pub(crate) const TAG_COUPLINGS: u64 = 3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic child seed for the given domain tag and index. Results do
/// not depend on thread count or evaluation order.
pub fn derive_seed(seed: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ tag) ^ index)
}

fn default_dim() -> u32 {
    2
}
fn default_sites() -> usize {
    6
}
fn default_depths() -> Vec<usize> {
    vec![8, 10, 12, 14]
}
fn default_realizations() -> usize {
    50
}
fn default_restarts() -> usize {
    20
}
fn default_tolerance() -> f64 {
    1e-4
}
fn default_dt_max() -> f64 {
    1.0
}
fn default_bias_variance() -> f64 {
    0.3
}
fn default_seed() -> u64 {
    42
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}
fn default_grid_points() -> usize {
    51
}
fn default_epsilons() -> Vec<f64> {
    vec![0.01, 0.3]
}
fn default_f_thresholds() -> Vec<f64> {
    (0..21).map(|k| k as f64 * 0.05).collect()
}

/// Complete description of a batch experiment. Serializes to JSON or TOML;
/// unknown keys are rejected so typos fail loudly.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dim: u32,
    pub sites: usize,
    pub depths: Vec<usize>,
    pub realizations: usize,
    pub restarts: usize,
    /// Trust-region radius below which the optimizer stops.
    pub tolerance: f64,
    /// Per-restart evaluation budget; `None` means 1000 x depth.
    pub max_evals: Option<usize>,
    /// Largest annealing-ramp time step used to seed restarts.
    pub dt_max: f64,
    pub bias_variance: f64,
    /// Master seed; realization r uses instance seed `seed + r`.
    pub seed: u64,
    pub measure_mana: bool,
    pub output_dir: PathBuf,
    /// Worker threads; `None` picks the hardware default.
    pub threads: Option<usize>,
    /// Coupling range cutoff |i - j| <= truncation; `None` keeps all pairs.
    pub truncation: Option<usize>,
    /// Points in each annealing sweep, endpoints included.
    pub grid_points: usize,
    /// Demagication thresholds for the conditional-probability analysis.
    pub epsilons: Vec<f64>,
    /// Fidelity thresholds for the conditional-probability analysis.
    pub f_thresholds: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dim: default_dim(),
            sites: default_sites(),
            depths: default_depths(),
            realizations: default_realizations(),
            restarts: default_restarts(),
            tolerance: default_tolerance(),
            max_evals: None,
            dt_max: default_dt_max(),
            bias_variance: default_bias_variance(),
            seed: default_seed(),
            measure_mana: false,
            output_dir: default_output_dir(),
            threads: None,
            truncation: None,
            grid_points: default_grid_points(),
            epsilons: default_epsilons(),
            f_thresholds: default_f_thresholds(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::Invalid(format!(
                "local dimension must be 2 or 3, got {}",
                self.dim
            )));
        }
        if self.sites < 2 {
            return Err(Error::Invalid(format!(
                "need at least 2 sites, got {}",
                self.sites
            )));
        }
        if self.depths.is_empty() || self.depths.contains(&0) {
            return Err(Error::Invalid("depths must be a nonempty list of positive integers".into()));
        }
        if self.realizations == 0 || self.restarts == 0 {
            return Err(Error::Invalid("realizations and restarts must be positive".into()));
        }
        if !(self.tolerance > 0.0) || !(self.dt_max > 0.0) {
            return Err(Error::Invalid("tolerance and dt_max must be positive".into()));
        }
        if !(self.bias_variance > 0.0) {
            return Err(Error::Invalid(
                "bias_variance must be positive; the bias lifts cost degeneracies".into(),
            ));
        }
        if self.measure_mana && self.dim.is_multiple_of(2) {
            return Err(Error::Invalid(
                "mana requires an odd prime local dimension; drop measure_mana for D=2".into(),
            ));
        }
        if self.grid_points < 2 {
            return Err(Error::Invalid("grid_points must be at least 2".into()));
        }
        if self.epsilons.is_empty() || self.f_thresholds.is_empty() {
            return Err(Error::Invalid("epsilons and f_thresholds must be nonempty".into()));
        }
        Ok(())
    }

    /// Loads a config from JSON or TOML, chosen by file extension
    /// (anything other than `.toml` is treated as JSON).
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let display = path.display().to_string();
        let cfg: ExperimentConfig = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| Error::Config {
                path: display.clone(),
                message: e.to_string(),
            })?
        } else {
            serde_json::from_str(&text).map_err(|e| Error::Config {
                path: display.clone(),
                message: e.to_string(),
            })?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    /// Stamped into every output file so artifacts can be traced to the
    /// exact configuration that produced them.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        let mut hex = String::with_capacity(16);
        for byte in &digest[..8] {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }

    pub fn instance_seed(&self, realization: usize) -> u64 {
        self.seed.wrapping_add(realization as u64)
    }

    pub fn max_evals_for(&self, depth: usize) -> usize {
        self.max_evals.unwrap_or(1000 * depth)
    }
}
