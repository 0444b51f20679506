//! File formats. Every pipeline output carries the format version and the
//! hash of the producing configuration; JSON files embed them as fields and
//! CSV files carry them in a leading comment line. All numeric columns use
//! shortest round-trip decimals, so reading a file back reproduces the
//! original values bit for bit.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::analysis::BarrierEnsemble;
use crate::collapse::DepthCurve;
use crate::error::Error;
use crate::state::QuditState;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Stamped<T> {
    format_version: u32,
    config_hash: String,
    #[serde(flatten)]
    payload: T,
}

fn json_err(path: &Path, source: serde_json::Error) -> Error {
    Error::Json {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path, source: csv::Error) -> Error {
    Error::Csv {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `payload` as pretty JSON stamped with the format version and
/// config hash.
pub fn write_json<T: Serialize>(path: &Path, config_hash: &str, payload: &T) -> Result<(), Error> {
    let stamped = Stamped {
        format_version: FORMAT_VERSION,
        config_hash: config_hash.to_string(),
        payload,
    };
    let mut text = serde_json::to_string_pretty(&stamped).map_err(|e| json_err(path, e))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Reads a stamped JSON file, returning the config hash it was produced
/// under and the payload.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<(String, T), Error> {
    let text = fs::read_to_string(path)?;
    let stamped: Stamped<T> = serde_json::from_str(&text).map_err(|e| json_err(path, e))?;
    if stamped.format_version != FORMAT_VERSION {
        return Err(Error::Invalid(format!(
            "{}: format version {} not supported (expected {})",
            path.display(),
            stamped.format_version,
            FORMAT_VERSION
        )));
    }
    Ok((stamped.config_hash, stamped.payload))
}

fn meta_line(config_hash: &str) -> String {
    format!("# format_version={FORMAT_VERSION} config_hash={config_hash}\n")
}

/// Writes rows as CSV with a leading `# format_version=... config_hash=...`
/// comment line followed by the header row.
pub fn write_csv<T: Serialize>(path: &Path, config_hash: &str, rows: &[T]) -> Result<(), Error> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for row in rows {
        wtr.serialize(row).map_err(|e| csv_err(path, e))?;
    }
    let body = wtr
        .into_inner()
        .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    let mut out = meta_line(config_hash).into_bytes();
    out.extend_from_slice(&body);
    fs::write(path, out)?;
    Ok(())
}

/// Reads a CSV written by `write_csv`, returning the config hash from the
/// comment line and the typed rows.
pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<(String, Vec<T>), Error> {
    let text = fs::read_to_string(path)?;
    let (meta, body) = text.split_once('\n').ok_or_else(|| {
        Error::Invalid(format!("{}: empty file", path.display()))
    })?;
    let hash = parse_meta(path, meta)?;
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let mut rows = Vec::new();
    for row in rdr.deserialize() {
        rows.push(row.map_err(|e| csv_err(path, e))?);
    }
    Ok((hash, rows))
}

fn parse_meta(path: &Path, line: &str) -> Result<String, Error> {
    let bad = || {
        Error::Invalid(format!(
            "{}: missing or malformed format comment line",
            path.display()
        ))
    };
    let rest = line.strip_prefix("# ").ok_or_else(bad)?;
    let mut version = None;
    let mut hash = None;
    for field in rest.split_whitespace() {
        if let Some(v) = field.strip_prefix("format_version=") {
            version = v.parse::<u32>().ok();
        } else if let Some(h) = field.strip_prefix("config_hash=") {
            hash = Some(h.to_string());
        }
    }
    match (version, hash) {
        (Some(v), Some(h)) if v == FORMAT_VERSION => Ok(h),
        (Some(v), Some(_)) => Err(Error::Invalid(format!(
            "{}: format version {v} not supported (expected {FORMAT_VERSION})",
            path.display()
        ))),
        _ => Err(bad()),
    }
}

/// One row of the averaged barrier CSV; lambda is the circuit fraction
/// layer / depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierRow {
    pub dim: u32,
    pub sites: usize,
    pub depth: usize,
    pub runs: usize,
    pub layer: usize,
    pub lambda: f64,
    pub sre2_density_mean: f64,
    pub sre2_density_std: f64,
    pub mana_density_mean: Option<f64>,
    pub mana_density_std: Option<f64>,
    pub approx_ratio_mean: f64,
    pub approx_ratio_std: f64,
    pub fidelity_mean: f64,
    pub fidelity_std: f64,
}

pub fn barrier_rows(ens: &BarrierEnsemble) -> Vec<BarrierRow> {
    ens.layers
        .iter()
        .map(|l| BarrierRow {
            dim: ens.dim,
            sites: ens.sites,
            depth: ens.depth,
            runs: ens.runs,
            layer: l.layer,
            lambda: l.layer as f64 / ens.depth as f64,
            sre2_density_mean: l.sre2_density_mean,
            sre2_density_std: l.sre2_density_std,
            mana_density_mean: l.mana_density_mean,
            mana_density_std: l.mana_density_std,
            approx_ratio_mean: l.approx_ratio_mean,
            approx_ratio_std: l.approx_ratio_std,
            fidelity_mean: l.fidelity_mean,
            fidelity_std: l.fidelity_std,
        })
        .collect()
}

/// Regroups barrier rows into per-depth magic-density curves for the
/// collapse fit. Rows may mix depths; each depth contributes one curve with
/// points ordered by layer.
pub fn curves_from_barrier_rows(rows: &[BarrierRow]) -> Vec<DepthCurve> {
    let mut depths: Vec<usize> = rows.iter().map(|r| r.depth).collect();
    depths.sort_unstable();
    depths.dedup();
    depths
        .into_iter()
        .map(|depth| {
            let mut pts: Vec<(usize, f64, f64)> = rows
                .iter()
                .filter(|r| r.depth == depth)
                .map(|r| (r.layer, r.lambda, r.sre2_density_mean))
                .collect();
            pts.sort_unstable_by_key(|&(layer, _, _)| layer);
            DepthCurve {
                depth,
                lambdas: pts.iter().map(|p| p.1).collect(),
                values: pts.iter().map(|p| p.2).collect(),
            }
        })
        .collect()
}

/// One row of the demagication conditional-probability CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalRow {
    pub dim: u32,
    pub sites: usize,
    pub depth: usize,
    pub source: crate::analysis::TraceSource,
    pub epsilon: f64,
    pub f_threshold: f64,
    pub probability: Option<f64>,
    pub std_error: Option<f64>,
    pub numerator: usize,
    pub denominator: usize,
}

/// One row of the optimizer-trace CSV: objective evaluations of the winning
/// restart in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub realization: usize,
    pub depth: usize,
    pub eval: usize,
    pub energy: f64,
    pub sre2: f64,
    pub mana: Option<f64>,
}

/// One row of the ensemble-averaged annealing sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMeanRow {
    pub lambda: f64,
    pub realizations: usize,
    pub energy_mean: f64,
    pub energy_std: f64,
    pub sre2_density_mean: f64,
    pub sre2_density_std: f64,
    pub mana_mean: Option<f64>,
    pub mana_std: Option<f64>,
}

/// Dense state vector as stored on disk for the measure command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dim: u32,
    pub sites: usize,
    /// Row k holds [re, im] of the amplitude on basis index k.
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn from_state(state: &QuditState) -> Self {
        StateFile {
            dim: state.dim(),
            sites: state.sites(),
            amplitudes: state.amps().iter().map(|a| [a.re, a.im]).collect(),
        }
    }

    pub fn to_state(&self) -> Result<QuditState, Error> {
        let amps: Vec<Complex64> = self
            .amplitudes
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        QuditState::from_amps(self.dim, self.sites, amps)
    }
}

/// Reads a raw (unstamped) state-vector JSON file.
pub fn read_state(path: &Path) -> Result<QuditState, Error> {
    let text = fs::read_to_string(path)?;
    let file: StateFile = serde_json::from_str(&text).map_err(|e| json_err(path, e))?;
    file.to_state()
}

/// Writes a raw state-vector JSON file.
pub fn write_state(path: &Path, state: &QuditState) -> Result<(), Error> {
    let file = StateFile::from_state(state);
    let mut text = serde_json::to_string_pretty(&file).map_err(|e| json_err(path, e))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sk::{generate_instance, SkInstance};
    use tempfile::tempdir;

    #[test]
    fn stamped_json_round_trips_instances_exactly() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("instance.json");
        let inst = generate_instance(3, 4, 99, 0.3, None).unwrap();
        write_json(&path, "deadbeefdeadbeef", &inst).unwrap();
        let (hash, back): (String, SkInstance) = read_json(&path).unwrap();
        assert_eq!(hash, "deadbeefdeadbeef");
        assert_eq!(inst, back);
        // a second write produces identical bytes
        let first = fs::read(&path).unwrap();
        write_json(&path, "deadbeefdeadbeef", &inst).unwrap();
        assert_eq!(first, fs::read(&path).unwrap());
    }

    #[test]
    fn rejects_unknown_format_version() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("x.json");
        fs::write(&path, "{\"format_version\":7,\"config_hash\":\"aa\",\"dim\":2}\n").unwrap();
        #[derive(Debug, Deserialize)]
        struct Probe {
            #[allow(dead_code)]
            dim: u32,
        }
        let err = read_json::<Probe>(&path).unwrap_err();
        assert!(err.to_string().contains("format version"), "{err}");
    }

    #[test]
    fn csv_round_trips_floats_and_blanks() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        let rows = vec![
            TraceRow {
                realization: 0,
                depth: 3,
                eval: 1,
                energy: -1.9178058517106473,
                sre2: 0.1 + 0.2,
                mana: None,
            },
            TraceRow {
                realization: 1,
                depth: 3,
                eval: 2,
                energy: f64::MIN_POSITIVE,
                sre2: 1.0 / 3.0,
                mana: Some(-0.000123456789012345),
            },
        ];
        write_csv(&path, "cafe0123cafe0123", &rows).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# format_version=1 config_hash=cafe0123cafe0123\n"));
        assert!(text.lines().nth(1).unwrap().starts_with("realization,depth,eval"));
        let (hash, back): (String, Vec<TraceRow>) = read_csv(&path).unwrap();
        assert_eq!(hash, "cafe0123cafe0123");
        assert_eq!(rows, back);
    }

    #[test]
    fn csv_meta_line_is_mandatory() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "a,b\n1,2\n").unwrap();
        #[derive(Deserialize)]
        struct Two {
            #[allow(dead_code)]
            a: i32,
            #[allow(dead_code)]
            b: i32,
        }
        assert!(read_csv::<Two>(&path).is_err());
    }

    #[test]
    fn barrier_rows_regroup_into_curves() {
        use crate::analysis::{BarrierEnsemble, LayerStats};
        let mk = |depth: usize| BarrierEnsemble {
            dim: 2,
            sites: 4,
            depth,
            runs: 2,
            layers: (0..=depth)
                .map(|p| LayerStats {
                    layer: p,
                    sre2_density_mean: p as f64 * 0.1,
                    sre2_density_std: 0.0,
                    mana_density_mean: None,
                    mana_density_std: None,
                    approx_ratio_mean: 0.2,
                    approx_ratio_std: 0.0,
                    fidelity_mean: 0.5,
                    fidelity_std: 0.0,
                })
                .collect(),
        };
        let mut rows = barrier_rows(&mk(2));
        rows.extend(barrier_rows(&mk(4)));
        rows.reverse();
        let curves = curves_from_barrier_rows(&rows);
        assert_eq!(curves.len(), 2);
        assert_eq!(curves[0].depth, 2);
        assert_eq!(curves[0].lambdas, vec![0.0, 0.5, 1.0]);
        assert_eq!(curves[1].values.len(), 5);
        assert!((curves[1].values[3] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn state_files_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("state.json");
        let mut state = QuditState::plus_state(3, 2).unwrap();
        state
            .diagonal_phase_evolve(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0], 0.7)
            .unwrap();
        write_state(&path, &state).unwrap();
        let back = read_state(&path).unwrap();
        assert_eq!(state.amps(), back.amps());
    }
}
