//! Ensemble-level analysis of optimized circuit runs: averaged magic
//! barriers, demagication conditional probabilities, and the fidelity-magic
//! scatter with its analytic envelopes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{
    sre2_three_state_qubit, sre2_two_state_qubit_max, sre2_two_state_qubit_min,
};
use crate::error::Error;
use crate::qaoa::QaoaRun;

/// Per-layer ensemble statistics. Densities are per site; the standard
/// deviation is the sample estimate (n - 1 in the denominator).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStats {
    pub layer: usize,
    pub sre2_density_mean: f64,
    pub sre2_density_std: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mana_density_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mana_density_std: Option<f64>,
    pub approx_ratio_mean: f64,
    pub approx_ratio_std: f64,
    pub fidelity_mean: f64,
    pub fidelity_std: f64,
}

/// Averaged magic-barrier profile for one homogeneous ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierEnsemble {
    pub dim: u32,
    pub sites: usize,
    pub depth: usize,
    pub runs: usize,
    pub layers: Vec<LayerStats>,
}

pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    // identical samples must report exactly zero spread
    if values.windows(2).all(|w| w[0] == w[1]) {
        return (values[0], 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.max(0.0).sqrt())
}

/// Averages layer traces over realizations. All runs must describe the same
/// (dimension, sites, depth) ensemble.
pub fn aggregate_barrier(runs: &[QaoaRun]) -> Result<BarrierEnsemble, Error> {
    if runs.len() < 2 {
        return Err(Error::Invalid(format!(
            "barrier aggregation needs at least 2 runs, got {}",
            runs.len()
        )));
    }
    let (dim, sites, depth) = (runs[0].dim, runs[0].sites, runs[0].params.depth());
    for r in runs {
        if (r.dim, r.sites, r.params.depth()) != (dim, sites, depth) {
            return Err(Error::Invalid(format!(
                "mixed ensemble: expected dim {dim}, sites {sites}, depth {depth}, \
                 found dim {}, sites {}, depth {}",
                r.dim,
                r.sites,
                r.params.depth()
            )));
        }
        if r.layer_trace.len() != depth + 1 {
            return Err(Error::Invalid(format!(
                "layer trace has {} entries, expected {}",
                r.layer_trace.len(),
                depth + 1
            )));
        }
    }

    let n_inv = 1.0 / sites as f64;
    let layers = (0..=depth)
        .map(|p| {
            let col = |f: &dyn Fn(&QaoaRun) -> f64| -> Vec<f64> {
                runs.iter().map(f).collect()
            };
            let (s_mean, s_std) = mean_std(&col(&|r| r.layer_trace[p].sre2 * n_inv));
            let (a_mean, a_std) = mean_std(&col(&|r| r.layer_trace[p].approx_ratio));
            let (f_mean, f_std) = mean_std(&col(&|r| r.layer_trace[p].fidelity));
            let manas: Vec<f64> = runs
                .iter()
                .filter_map(|r| r.layer_trace[p].mana.map(|m| m * n_inv))
                .collect();
            let (m_mean, m_std) = if manas.is_empty() {
                (None, None)
            } else {
                let (m, s) = mean_std(&manas);
                (Some(m), Some(s))
            };
            LayerStats {
                layer: p,
                sre2_density_mean: s_mean,
                sre2_density_std: s_std,
                mana_density_mean: m_mean,
                mana_density_std: m_std,
                approx_ratio_mean: a_mean,
                approx_ratio_std: a_std,
                fidelity_mean: f_mean,
                fidelity_std: f_std,
            }
        })
        .collect();

    Ok(BarrierEnsemble {
        dim,
        sites,
        depth,
        runs: runs.len(),
        layers,
    })
}

/// Which trace the per-run demagication is read from. `Layer` follows the
/// optimized circuit layer by layer; `Optimizer` follows the objective
/// evaluations of the winning restart and is the loosely comparable
/// per-iteration variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceSource {
    Layer,
    Optimizer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalCell {
    pub f_threshold: f64,
    pub epsilon: f64,
    /// None when no run cleared the demagication cut.
    pub probability: Option<f64>,
    /// Binomial standard error sqrt(p(1-p)/n); None with the probability.
    pub std_error: Option<f64>,
    pub numerator: usize,
    pub denominator: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemagicationStats {
    pub source: TraceSource,
    /// Per run: peak magic minus final magic, nonnegative by construction.
    pub delta_m: Vec<f64>,
    /// Per run: final fidelity with the exact ground state.
    pub fidelities: Vec<f64>,
    pub f_thresholds: Vec<f64>,
    pub epsilons: Vec<f64>,
    /// Row-major over (epsilon, f_threshold).
    pub cells: Vec<ConditionalCell>,
}

/// Conditional probability that the final fidelity clears a threshold given
/// that the run shed at least epsilon bits of magic after its peak.
pub fn demagication_conditional(
    runs: &[QaoaRun],
    f_thresholds: &[f64],
    epsilons: &[f64],
    source: TraceSource,
) -> Result<DemagicationStats, Error> {
    if runs.is_empty() {
        return Err(Error::Invalid("no runs to analyze".into()));
    }
    if f_thresholds.is_empty() || epsilons.is_empty() {
        return Err(Error::Invalid(
            "need at least one fidelity threshold and one epsilon".into(),
        ));
    }

    let mut delta_m = Vec::with_capacity(runs.len());
    let mut fidelities = Vec::with_capacity(runs.len());
    for r in runs {
        let final_rec = r.layer_trace.last().ok_or_else(|| {
            Error::Invalid("run carries an empty layer trace".into())
        })?;
        let dm = match source {
            TraceSource::Layer => {
                let peak = r
                    .layer_trace
                    .iter()
                    .map(|l| l.sre2)
                    .fold(f64::NEG_INFINITY, f64::max);
                peak - final_rec.sre2
            }
            TraceSource::Optimizer => {
                let last = r.optimizer_trace.last().ok_or_else(|| {
                    Error::Invalid("run carries an empty optimizer trace".into())
                })?;
                let peak = r
                    .optimizer_trace
                    .iter()
                    .map(|l| l.sre2)
                    .fold(f64::NEG_INFINITY, f64::max);
                peak - last.sre2
            }
        };
        delta_m.push(dm.max(0.0));
        fidelities.push(final_rec.fidelity);
    }

    let mut cells = Vec::with_capacity(epsilons.len() * f_thresholds.len());
    for &eps in epsilons {
        let passing: Vec<usize> = (0..runs.len()).filter(|&i| delta_m[i] > eps).collect();
        for &f_th in f_thresholds {
            let denominator = passing.len();
            let numerator = passing.iter().filter(|&&i| fidelities[i] > f_th).count();
            let (probability, std_error) = if denominator == 0 {
                (None, None)
            } else {
                let p = numerator as f64 / denominator as f64;
                (Some(p), Some((p * (1.0 - p) / denominator as f64).sqrt()))
            };
            cells.push(ConditionalCell {
                f_threshold: f_th,
                epsilon: eps,
                probability,
                std_error,
                numerator,
                denominator,
            });
        }
    }

    Ok(DemagicationStats {
        source,
        delta_m,
        fidelities,
        f_thresholds: f_thresholds.to_vec(),
        epsilons: epsilons.to_vec(),
        cells,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub dim: u32,
    pub sites: usize,
    pub depth: usize,
    pub fidelity: f64,
    pub sre2: f64,
    /// True when the point sits in the region no two-level superposition
    /// with the ground state can reach.
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub fidelity: f64,
    pub two_state_min: f64,
    pub two_state_max: f64,
    pub three_state_min: f64,
    pub three_state_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityMagicScatter {
    pub points: Vec<ScatterPoint>,
    pub envelopes: Vec<EnvelopeRow>,
    pub violations: usize,
}

/// Margin below the two-state minimum envelope that counts as a violation.
pub const FORBIDDEN_MARGIN: f64 = 1e-9;
const ENVELOPE_GRID: usize = 101;
const WEIGHT_GRID: usize = 60;
const PHASE_GRID: usize = 24;

/// Extremal magic of two- and three-level superpositions with the ground
/// state, per fidelity. Two-state extrema are closed forms; three-state
/// extrema scan the weight split and both relative phases. The phase grids
/// include 0 and pi/4 exactly, where the two-state extrema sit, so the
/// three-state envelope always brackets the two-state one.
pub fn analytic_envelopes(fidelities: &[f64]) -> Vec<EnvelopeRow> {
    fidelities
        .par_iter()
        .map(|&f| {
            let two_min = sre2_two_state_qubit_min(f).expect("fidelity in [0,1]");
            let two_max = sre2_two_state_qubit_max(f).expect("fidelity in [0,1]");
            let mut three_min = f64::INFINITY;
            let mut three_max = f64::NEG_INFINITY;
            for wp in 0..=WEIGHT_GRID {
                let p = (1.0 - f) * wp as f64 / WEIGHT_GRID as f64;
                for t1 in 0..=PHASE_GRID {
                    let th1 = std::f64::consts::FRAC_PI_2 * t1 as f64 / PHASE_GRID as f64;
                    for t2 in 0..=PHASE_GRID {
                        let th2 =
                            std::f64::consts::FRAC_PI_2 * t2 as f64 / PHASE_GRID as f64;
                        let m = sre2_three_state_qubit(f, p, th1, th2)
                            .expect("weights sum to 1");
                        three_min = three_min.min(m);
                        three_max = three_max.max(m);
                    }
                }
            }
            EnvelopeRow {
                fidelity: f,
                two_state_min: two_min,
                two_state_max: two_max,
                three_state_min: three_min,
                three_state_max: three_max,
            }
        })
        .collect()
}

/// Final-state (fidelity, magic) scatter with the analytic envelopes on a
/// uniform fidelity grid. Points with fidelity >= 0.5 lying strictly below
/// the two-state minimum envelope (beyond the margin) are flagged.
pub fn fidelity_magic_scatter(runs: &[QaoaRun]) -> Result<FidelityMagicScatter, Error> {
    if runs.is_empty() {
        return Err(Error::Invalid("no runs to analyze".into()));
    }
    let mut points = Vec::with_capacity(runs.len());
    for r in runs {
        let last = r.layer_trace.last().ok_or_else(|| {
            Error::Invalid("run carries an empty layer trace".into())
        })?;
        let floor = sre2_two_state_qubit_min(last.fidelity.clamp(0.0, 1.0))?;
        let violation = last.fidelity >= 0.5 && last.sre2 < floor - FORBIDDEN_MARGIN;
        points.push(ScatterPoint {
            dim: r.dim,
            sites: r.sites,
            depth: r.params.depth(),
            fidelity: last.fidelity,
            sre2: last.sre2,
            violation,
        });
    }
    let grid: Vec<f64> = (0..ENVELOPE_GRID)
        .map(|k| k as f64 / (ENVELOPE_GRID - 1) as f64)
        .collect();
    let envelopes = analytic_envelopes(&grid);
    let violations = points.iter().filter(|p| p.violation).count();
    Ok(FidelityMagicScatter {
        points,
        envelopes,
        violations,
    })
}
