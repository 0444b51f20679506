//! Batch orchestration behind the command-line subcommands: seeded instance
//! generation, circuit optimization over (realization x depth), annealing
//! sweeps, and the derived analysis files. Reruns are idempotent: existing
//! well-formed outputs are reused, so an interrupted batch picks up where it
//! stopped and a completed batch is a no-op.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{
    aggregate_barrier, demagication_conditional, fidelity_magic_scatter, mean_std, TraceSource,
};
use crate::anneal::{anneal_sweep, AnnealSweep, SweepPoint};
use crate::collapse::{fit_collapse, CollapseFit, CollapseForm};
use crate::config::ExperimentConfig;
use crate::error::Error;
use crate::io::{
    self, barrier_rows, curves_from_barrier_rows, BarrierRow, ConditionalRow, SweepMeanRow,
    TraceRow,
};
use crate::magic::{mana, sre2};
use crate::qaoa::{optimize, OptimizeOptions, QaoaRun};
use crate::sk::{generate_instance, SkInstance};

/// Output-tree layout rooted at the configured output directory.
#[derive(Debug, Clone)]
pub struct OutputLayout {
    root: PathBuf,
}

impl OutputLayout {
    pub fn new(root: &Path) -> Self {
        OutputLayout {
            root: root.to_path_buf(),
        }
    }

    pub fn instances_dir(&self) -> PathBuf {
        self.root.join("instances")
    }

    pub fn runs_dir(&self) -> PathBuf {
        self.root.join("runs")
    }

    pub fn anneal_dir(&self) -> PathBuf {
        self.root.join("anneal")
    }

    pub fn instance_path(&self, realization: usize) -> PathBuf {
        self.instances_dir()
            .join(format!("instance_r{realization:04}.json"))
    }

    pub fn run_path(&self, realization: usize, depth: usize) -> PathBuf {
        self.runs_dir()
            .join(format!("run_r{realization:04}_d{depth:03}.json"))
    }

    pub fn sweep_path(&self, realization: usize) -> PathBuf {
        self.anneal_dir()
            .join(format!("sweep_r{realization:04}.csv"))
    }

    pub fn barrier_csv(&self) -> PathBuf {
        self.root.join("barrier.csv")
    }

    pub fn scatter_csv(&self) -> PathBuf {
        self.root.join("scatter.csv")
    }

    pub fn envelopes_csv(&self) -> PathBuf {
        self.root.join("envelopes.csv")
    }

    pub fn conditional_csv(&self) -> PathBuf {
        self.root.join("conditional.csv")
    }

    pub fn trace_csv(&self) -> PathBuf {
        self.root.join("trace.csv")
    }

    pub fn sweep_mean_csv(&self) -> PathBuf {
        self.anneal_dir().join("sweep_mean.csv")
    }

    pub fn anneal_meta_json(&self) -> PathBuf {
        self.anneal_dir().join("meta.json")
    }

    pub fn collapse_json(&self, form: CollapseForm) -> PathBuf {
        let name = match form {
            CollapseForm::FourParam => "collapse_four_param.json",
            CollapseForm::CriticalPoint => "collapse_critical_point.json",
        };
        self.root.join(name)
    }
}

/// Runs `f` on a dedicated pool when a thread count is configured. Results
/// never depend on the pool size; this only bounds resource use.
pub fn with_thread_pool<T, F>(threads: Option<usize>, f: F) -> Result<T, Error>
where
    F: FnOnce() -> T + Send,
    T: Send,
{
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub realization: usize,
    pub depth: usize,
    pub message: String,
}

/// Outcome of a batch command. Failures are per-task and do not abort the
/// rest of the batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub completed: usize,
    pub reused: usize,
    pub failed: Vec<FailureRecord>,
}

fn ensure_dir(path: &Path) -> Result<(), Error> {
    fs::create_dir_all(path)?;
    Ok(())
}

fn stale_hash(path: &Path, found: &str, expected: &str) -> Error {
    Error::Invalid(format!(
        "{}: produced under config hash {found}, current config hashes to {expected}; \
         use a fresh output directory or the original config",
        path.display()
    ))
}

/// Loads the instance for one realization, generating and persisting it if
/// missing. Existing files must match the current config hash.
fn ensure_instance(
    cfg: &ExperimentConfig,
    layout: &OutputLayout,
    hash: &str,
    realization: usize,
) -> Result<SkInstance, Error> {
    let path = layout.instance_path(realization);
    if path.is_file() {
        let (found, inst): (String, SkInstance) = io::read_json(&path)?;
        if found != hash {
            return Err(stale_hash(&path, &found, hash));
        }
        return Ok(inst);
    }
    let inst = generate_instance(
        cfg.dim,
        cfg.sites,
        cfg.instance_seed(realization),
        cfg.bias_variance,
        cfg.truncation,
    )?;
    io::write_json(&path, hash, &inst)?;
    Ok(inst)
}

/// Writes one instance file per realization. Deterministic in the master
/// seed: rerunning with the same config reproduces every file byte for byte.
pub fn cmd_generate(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>, Error> {
    cfg.validate()?;
    let layout = OutputLayout::new(&cfg.output_dir);
    ensure_dir(&layout.instances_dir())?;
    let hash = cfg.hash();
    let mut paths = Vec::with_capacity(cfg.realizations);
    for r in 0..cfg.realizations {
        let inst = generate_instance(
            cfg.dim,
            cfg.sites,
            cfg.instance_seed(r),
            cfg.bias_variance,
            cfg.truncation,
        )?;
        let path = layout.instance_path(r);
        io::write_json(&path, &hash, &inst)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Recomputes every aggregate file from the given runs: averaged barrier
/// curves, the fidelity-magic scatter with envelopes, the demagication
/// conditional grid, and a representative optimizer trace per depth.
fn write_aggregates(
    cfg: &ExperimentConfig,
    layout: &OutputLayout,
    hash: &str,
    runs: &[(usize, usize, QaoaRun)],
) -> Result<(), Error> {
    if runs.is_empty() {
        return Ok(());
    }
    let mut depths: Vec<usize> = runs.iter().map(|(_, d, _)| *d).collect();
    depths.sort_unstable();
    depths.dedup();

    let mut barrier = Vec::new();
    let mut conditional = Vec::new();
    for &depth in &depths {
        let group: Vec<QaoaRun> = runs
            .iter()
            .filter(|(_, d, _)| *d == depth)
            .map(|(_, _, r)| r.clone())
            .collect();
        if group.len() >= 2 {
            barrier.extend(barrier_rows(&aggregate_barrier(&group)?));
        } else {
            log::warn!("depth {depth}: only {} runs, skipping averages", group.len());
        }
        let stats =
            demagication_conditional(&group, &cfg.f_thresholds, &cfg.epsilons, TraceSource::Layer)?;
        conditional.extend(stats.cells.iter().map(|c| ConditionalRow {
            dim: cfg.dim,
            sites: cfg.sites,
            depth,
            source: stats.source,
            epsilon: c.epsilon,
            f_threshold: c.f_threshold,
            probability: c.probability,
            std_error: c.std_error,
            numerator: c.numerator,
            denominator: c.denominator,
        }));
    }
    if !barrier.is_empty() {
        io::write_csv(&layout.barrier_csv(), hash, &barrier)?;
    }
    io::write_csv(&layout.conditional_csv(), hash, &conditional)?;

    let pooled: Vec<QaoaRun> = runs.iter().map(|(_, _, r)| r.clone()).collect();
    let scatter = fidelity_magic_scatter(&pooled)?;
    io::write_csv(&layout.scatter_csv(), hash, &scatter.points)?;
    io::write_csv(&layout.envelopes_csv(), hash, &scatter.envelopes)?;

    // full per-evaluation traces grow with the evaluation budget, so keep
    // one representative realization per depth
    let mut trace = Vec::new();
    for &depth in &depths {
        if let Some((r_idx, _, run)) = runs
            .iter()
            .filter(|(_, d, _)| *d == depth)
            .min_by_key(|(r, _, _)| *r)
        {
            trace.extend(run.optimizer_trace.iter().enumerate().map(|(e, it)| TraceRow {
                realization: *r_idx,
                depth,
                eval: e,
                energy: it.energy,
                sre2: it.sre2,
                mana: it.mana,
            }));
        }
    }
    io::write_csv(&layout.trace_csv(), hash, &trace)?;
    Ok(())
}

/// Optimizes every (realization, depth) task, persisting one run file each,
/// then rebuilds the aggregate CSVs from all runs on disk. Existing run
/// files produced under the same config are reused without recomputation;
/// per-task failures are recorded and the batch continues.
pub fn cmd_run_qaoa(cfg: &ExperimentConfig) -> Result<BatchReport, Error> {
    cfg.validate()?;
    let layout = OutputLayout::new(&cfg.output_dir);
    ensure_dir(&layout.instances_dir())?;
    ensure_dir(&layout.runs_dir())?;
    let hash = cfg.hash();

    let opts = OptimizeOptions {
        restarts: cfg.restarts,
        tolerance: cfg.tolerance,
        max_evals: cfg.max_evals,
        dt_max: cfg.dt_max,
        measure_mana: cfg.measure_mana,
    };

    let mut report = BatchReport {
        completed: 0,
        reused: 0,
        failed: Vec::new(),
    };
    let mut runs: Vec<(usize, usize, QaoaRun)> = Vec::new();
    for r in 0..cfg.realizations {
        let inst = match ensure_instance(cfg, &layout, &hash, r) {
            Ok(inst) => inst,
            Err(e) => {
                for &d in &cfg.depths {
                    report.failed.push(FailureRecord {
                        realization: r,
                        depth: d,
                        message: e.to_string(),
                    });
                }
                continue;
            }
        };
        for &d in &cfg.depths {
            let path = layout.run_path(r, d);
            if path.is_file() {
                match io::read_json::<QaoaRun>(&path) {
                    Ok((found, run)) if found == hash => {
                        report.reused += 1;
                        runs.push((r, d, run));
                        continue;
                    }
                    Ok((found, _)) => {
                        report.failed.push(FailureRecord {
                            realization: r,
                            depth: d,
                            message: stale_hash(&path, &found, &hash).to_string(),
                        });
                        continue;
                    }
                    Err(e) => {
                        log::warn!("{}: unreadable ({e}), recomputing", path.display());
                    }
                }
            }
            match optimize(&inst, d, &opts) {
                Ok(run) => {
                    io::write_json(&path, &hash, &run)?;
                    report.completed += 1;
                    runs.push((r, d, run));
                }
                Err(e) => {
                    log::warn!("realization {r} depth {d}: {e}");
                    report.failed.push(FailureRecord {
                        realization: r,
                        depth: d,
                        message: e.to_string(),
                    });
                }
            }
        }
    }

    write_aggregates(cfg, &layout, &hash, &runs)?;
    Ok(report)
}

/// Per-ensemble annealing metadata: solver quality over the batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealMeta {
    pub realizations: usize,
    pub grid_points: usize,
    /// Largest eigensolver residual of each realization's sweep.
    pub max_residuals: Vec<f64>,
    pub overall_max_residual: f64,
    /// Sweep points flagged as spectrum-degenerate, summed over the batch.
    pub degenerate_points: usize,
}

/// Sweeps the interpolated Hamiltonian for every realization and writes the
/// per-run and ensemble-averaged profiles. Existing per-run sweep files
/// produced under the same config are reused.
pub fn cmd_anneal(cfg: &ExperimentConfig) -> Result<BatchReport, Error> {
    cfg.validate()?;
    let layout = OutputLayout::new(&cfg.output_dir);
    ensure_dir(&layout.instances_dir())?;
    ensure_dir(&layout.anneal_dir())?;
    let hash = cfg.hash();

    let mut report = BatchReport {
        completed: 0,
        reused: 0,
        failed: Vec::new(),
    };
    let mut sweeps: Vec<Vec<SweepPoint>> = Vec::new();
    for r in 0..cfg.realizations {
        let path = layout.sweep_path(r);
        if path.is_file() {
            match io::read_csv::<SweepPoint>(&path) {
                Ok((found, points)) if found == hash && points.len() == cfg.grid_points => {
                    report.reused += 1;
                    sweeps.push(points);
                    continue;
                }
                Ok((found, _)) if found != hash => {
                    report.failed.push(FailureRecord {
                        realization: r,
                        depth: 0,
                        message: stale_hash(&path, &found, &hash).to_string(),
                    });
                    continue;
                }
                _ => log::warn!("{}: unreadable, recomputing", path.display()),
            }
        }
        let result = ensure_instance(cfg, &layout, &hash, r)
            .and_then(|inst| anneal_sweep(&inst, cfg.grid_points, cfg.measure_mana));
        match result {
            Ok(AnnealSweep { points, .. }) => {
                io::write_csv(&path, &hash, &points)?;
                report.completed += 1;
                sweeps.push(points);
            }
            Err(e) => {
                log::warn!("realization {r}: {e}");
                report.failed.push(FailureRecord {
                    realization: r,
                    depth: 0,
                    message: e.to_string(),
                });
            }
        }
    }

    if !sweeps.is_empty() {
        let mut mean_rows = Vec::with_capacity(cfg.grid_points);
        for k in 0..cfg.grid_points {
            let col = |f: &dyn Fn(&SweepPoint) -> f64| -> Vec<f64> {
                sweeps.iter().map(|s| f(&s[k])).collect()
            };
            let (e_mean, e_std) = mean_std(&col(&|p| p.energy));
            let (s_mean, s_std) = mean_std(&col(&|p| p.sre2_density));
            let manas: Vec<f64> = sweeps.iter().filter_map(|s| s[k].mana).collect();
            let (m_mean, m_std) = if manas.len() == sweeps.len() {
                let (m, s) = mean_std(&manas);
                (Some(m), Some(s))
            } else {
                (None, None)
            };
            mean_rows.push(SweepMeanRow {
                lambda: sweeps[0][k].lambda,
                realizations: sweeps.len(),
                energy_mean: e_mean,
                energy_std: e_std,
                sre2_density_mean: s_mean,
                sre2_density_std: s_std,
                mana_mean: m_mean,
                mana_std: m_std,
            });
        }
        io::write_csv(&layout.sweep_mean_csv(), &hash, &mean_rows)?;

        let max_residuals: Vec<f64> = sweeps
            .iter()
            .map(|s| s.iter().map(|p| p.residual).fold(0.0, f64::max))
            .collect();
        let meta = AnnealMeta {
            realizations: sweeps.len(),
            grid_points: cfg.grid_points,
            overall_max_residual: max_residuals.iter().copied().fold(0.0, f64::max),
            max_residuals,
            degenerate_points: sweeps
                .iter()
                .flat_map(|s| s.iter())
                .filter(|p| p.degenerate)
                .count(),
        };
        io::write_json(&layout.anneal_meta_json(), &hash, &meta)?;
    }
    Ok(report)
}

/// Fits the configured rescaling family to the averaged barrier curves on
/// disk and writes the fit as JSON.
pub fn cmd_fit_collapse(cfg: &ExperimentConfig, form: CollapseForm) -> Result<CollapseFit, Error> {
    cfg.validate()?;
    let layout = OutputLayout::new(&cfg.output_dir);
    let (_, rows): (String, Vec<BarrierRow>) = io::read_csv(&layout.barrier_csv())?;
    let curves = curves_from_barrier_rows(&rows);
    let fit = fit_collapse(&curves, form)?;
    io::write_json(&layout.collapse_json(form), &cfg.hash(), &fit)?;
    Ok(fit)
}

/// Writes the analytic fidelity-magic envelopes on a uniform grid with
/// `grid_points` rows.
pub fn cmd_envelopes(cfg: &ExperimentConfig) -> Result<PathBuf, Error> {
    cfg.validate()?;
    let layout = OutputLayout::new(&cfg.output_dir);
    ensure_dir(&layout.root)?;
    let grid: Vec<f64> = (0..cfg.grid_points)
        .map(|k| k as f64 / (cfg.grid_points - 1) as f64)
        .collect();
    let rows = crate::analysis::analytic_envelopes(&grid);
    let path = layout.envelopes_csv();
    io::write_csv(&path, &cfg.hash(), &rows)?;
    Ok(path)
}

/// Rebuilds every aggregate CSV from the run files on disk.
pub fn cmd_analyze(cfg: &ExperimentConfig) -> Result<usize, Error> {
    cfg.validate()?;
    let layout = OutputLayout::new(&cfg.output_dir);
    let hash = cfg.hash();
    let mut runs = Vec::new();
    for r in 0..cfg.realizations {
        for &d in &cfg.depths {
            let path = layout.run_path(r, d);
            if !path.is_file() {
                continue;
            }
            let (found, run): (String, QaoaRun) = io::read_json(&path)?;
            if found != hash {
                return Err(stale_hash(&path, &found, &hash));
            }
            runs.push((r, d, run));
        }
    }
    if runs.is_empty() {
        return Err(Error::Invalid(format!(
            "no run files under {}; run the circuit batch first",
            layout.runs_dir().display()
        )));
    }
    let n = runs.len();
    write_aggregates(cfg, &layout, &hash, &runs)?;
    Ok(n)
}

/// Magic measures of one stored state vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub dim: u32,
    pub sites: usize,
    pub sre2: f64,
    /// Present only for odd local dimension.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mana: Option<f64>,
}

/// Computes the magic measures of a state-vector file.
pub fn cmd_measure(path: &Path) -> Result<MeasureReport, Error> {
    let state = io::read_state(path)?;
    let m2 = sre2(&state)?;
    let mn = if state.dim() % 2 == 1 {
        Some(mana(&state)?)
    } else {
        None
    };
    Ok(MeasureReport {
        dim: state.dim(),
        sites: state.sites(),
        sre2: m2,
        mana: mn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn tiny_config(root: &Path) -> ExperimentConfig {
        ExperimentConfig {
            dim: 2,
            sites: 3,
            depths: vec![1, 2, 3],
            realizations: 3,
            restarts: 2,
            tolerance: 1e-3,
            max_evals: Some(60),
            dt_max: 1.0,
            bias_variance: 0.3,
            seed: 11,
            measure_mana: false,
            output_dir: root.to_path_buf(),
            threads: None,
            truncation: None,
            grid_points: 5,
            epsilons: vec![0.01, 0.1],
            f_thresholds: vec![0.0, 0.5, 0.9],
        }
    }

    #[test]
    fn generate_is_deterministic_and_schema_follows_dimension() {
        let dir = tempdir().unwrap();
        let cfg = tiny_config(dir.path());
        let paths = cmd_generate(&cfg).unwrap();
        assert_eq!(paths.len(), 3);
        let bytes: Vec<Vec<u8>> = paths.iter().map(|p| fs::read(p).unwrap()).collect();
        cmd_generate(&cfg).unwrap();
        for (p, b) in paths.iter().zip(&bytes) {
            assert_eq!(&fs::read(p).unwrap(), b, "rerun changed {}", p.display());
        }
        let text = fs::read_to_string(&paths[0]).unwrap();
        assert!(!text.contains("bias_hp"));

        let mut cfg3 = tiny_config(dir.path());
        cfg3.dim = 3;
        cfg3.sites = 2;
        cfg3.output_dir = dir.path().join("qutrit");
        let paths3 = cmd_generate(&cfg3).unwrap();
        let text3 = fs::read_to_string(&paths3[0]).unwrap();
        assert!(text3.contains("bias_hp"));
    }

    #[test]
    fn qaoa_batch_completes_resumes_and_aggregates() {
        let dir = tempdir().unwrap();
        let cfg = tiny_config(dir.path());
        let layout = OutputLayout::new(&cfg.output_dir);

        let report = cmd_run_qaoa(&cfg).unwrap();
        assert_eq!(report.completed, 9);
        assert_eq!(report.reused, 0);
        assert!(report.failed.is_empty());
        assert!(layout.barrier_csv().is_file());
        assert!(layout.scatter_csv().is_file());
        assert!(layout.conditional_csv().is_file());
        assert!(layout.envelopes_csv().is_file());
        assert!(layout.trace_csv().is_file());

        let barrier_bytes = fs::read(layout.barrier_csv()).unwrap();
        let run_bytes = fs::read(layout.run_path(2, 3)).unwrap();

        // resume: everything is reused, outputs unchanged
        let report = cmd_run_qaoa(&cfg).unwrap();
        assert_eq!(report.completed, 0);
        assert_eq!(report.reused, 9);
        assert_eq!(fs::read(layout.barrier_csv()).unwrap(), barrier_bytes);
        assert_eq!(fs::read(layout.run_path(2, 3)).unwrap(), run_bytes);

        // deleting one run file recomputes exactly that task, byte-identically
        fs::remove_file(layout.run_path(2, 3)).unwrap();
        let report = cmd_run_qaoa(&cfg).unwrap();
        assert_eq!(report.completed, 1);
        assert_eq!(report.reused, 8);
        assert_eq!(fs::read(layout.run_path(2, 3)).unwrap(), run_bytes);

        // the barrier file carries rows for every depth at every layer
        let (_, rows): (String, Vec<BarrierRow>) = io::read_csv(&layout.barrier_csv()).unwrap();
        assert_eq!(rows.len(), 2 + 3 + 4);
        assert!(rows.iter().all(|r| r.runs == 3));
        assert!(rows
            .iter()
            .filter(|r| r.layer == 0)
            .all(|r| r.sre2_density_mean == 0.0));

        // analyze rebuilds the same aggregates from disk
        let n = cmd_analyze(&cfg).unwrap();
        assert_eq!(n, 9);
        assert_eq!(fs::read(layout.barrier_csv()).unwrap(), barrier_bytes);
    }

    #[test]
    fn qaoa_batch_rejects_outputs_from_another_config() {
        let dir = tempdir().unwrap();
        let cfg = tiny_config(dir.path());
        cmd_run_qaoa(&cfg).unwrap();

        let mut other = tiny_config(dir.path());
        other.seed = 12;
        let report = cmd_run_qaoa(&other).unwrap();
        assert_eq!(report.completed, 0);
        assert!(!report.failed.is_empty());
        assert!(report.failed[0].message.contains("config hash"));
    }

    #[test]
    fn anneal_batch_writes_sweeps_mean_and_meta() {
        let dir = tempdir().unwrap();
        let mut cfg = tiny_config(dir.path());
        cfg.realizations = 2;
        let layout = OutputLayout::new(&cfg.output_dir);

        let report = cmd_anneal(&cfg).unwrap();
        assert_eq!(report.completed, 2);
        assert!(report.failed.is_empty());

        let (_, points): (String, Vec<SweepPoint>) =
            io::read_csv(&layout.sweep_path(0)).unwrap();
        assert_eq!(points.len(), 5);
        assert_eq!(points[0].lambda, 0.0);
        assert_eq!(points[4].lambda, 1.0);

        let (_, mean): (String, Vec<SweepMeanRow>) =
            io::read_csv(&layout.sweep_mean_csv()).unwrap();
        assert_eq!(mean.len(), 5);
        assert_eq!(mean[0].realizations, 2);
        assert!(mean[0].sre2_density_mean.abs() < 1e-10);

        let (_, meta): (String, AnnealMeta) = io::read_json(&layout.anneal_meta_json()).unwrap();
        assert_eq!(meta.max_residuals.len(), 2);
        assert!(meta.overall_max_residual < 1e-8);

        let mean_bytes = fs::read(layout.sweep_mean_csv()).unwrap();
        let report = cmd_anneal(&cfg).unwrap();
        assert_eq!(report.reused, 2);
        assert_eq!(fs::read(layout.sweep_mean_csv()).unwrap(), mean_bytes);
    }

    #[test]
    fn collapse_command_reads_barrier_csv() {
        let dir = tempdir().unwrap();
        let cfg = tiny_config(dir.path());
        cmd_run_qaoa(&cfg).unwrap();
        let fit = cmd_fit_collapse(&cfg, CollapseForm::CriticalPoint).unwrap();
        assert!(fit.residual() >= 0.0);
        let layout = OutputLayout::new(&cfg.output_dir);
        assert!(layout.collapse_json(CollapseForm::CriticalPoint).is_file());
    }

    #[test]
    fn envelope_command_writes_grid() {
        let dir = tempdir().unwrap();
        let mut cfg = tiny_config(dir.path());
        cfg.grid_points = 11;
        let path = cmd_envelopes(&cfg).unwrap();
        let (_, rows): (String, Vec<crate::analysis::EnvelopeRow>) = io::read_csv(&path).unwrap();
        assert_eq!(rows.len(), 11);
        assert_eq!(rows[0].fidelity, 0.0);
        assert_eq!(rows[10].fidelity, 1.0);
        let mid = &rows[5];
        assert!(mid.two_state_min.abs() < 1e-12);
        assert!((mid.two_state_max - (4.0f64 / 3.0).log2()).abs() < 1e-12);
    }

    #[test]
    fn measure_command_reports_both_measures_for_qutrits() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("state.json");
        let state = QuditState::plus_state(3, 2).unwrap();
        io::write_state(&path, &state).unwrap();
        let report = cmd_measure(&path).unwrap();
        assert!(report.sre2.abs() < 1e-10);
        assert!(report.mana.unwrap().abs() < 1e-10);

        let path2 = dir.path().join("qubit.json");
        io::write_state(&path2, &QuditState::plus_state(2, 3).unwrap()).unwrap();
        let report2 = cmd_measure(&path2).unwrap();
        assert!(report2.mana.is_none());
    }

    use crate::state::QuditState;
}
