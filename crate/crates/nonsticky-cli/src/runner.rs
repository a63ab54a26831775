//! Command implementations behind the CLI surface.

use std::io::Write;
use std::path::{Path, PathBuf};

use nonsticky::coefficients::LevelClass;
use nonsticky::studies::{run_study, StudyError};
use nonsticky::{classify_level, generate_lattice, simulate_path_with, ShiftPolicy};
use thiserror::Error;

use crate::config::{self, ConfigError};
use crate::manifest::RunManifest;
use crate::output;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Study(#[from] StudyError),
    #[error("quadrature: {0}")]
    Quad(#[from] nonsticky::coefficients::QuadError),
    #[error("simulation: {0}")]
    Em(#[from] nonsticky::em::EmError),
    #[error(transparent)]
    Lattice(#[from] nonsticky::brownian::LatticeError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub struct RunOutcome {
    pub verdict: bool,
    pub summary_json: PathBuf,
    pub results_csv: PathBuf,
    pub manifest_json: PathBuf,
}

/// `run`: execute the configured study with a fixed-size worker pool and
/// write manifest.json, results.csv and summary.json into `out_dir`.
pub fn run_command(
    config_path: &Path,
    seed_override: Option<u64>,
    workers: usize,
    out_dir: &Path,
) -> Result<RunOutcome, RunnerError> {
    let bytes = std::fs::read(config_path)?;
    let text = String::from_utf8_lossy(&bytes);
    let mut study_config = config::parse_run_spec(&text)?;
    if let Some(seed) = seed_override {
        study_config.seed = seed;
    }

    std::fs::create_dir_all(out_dir)?;
    let results_csv = out_dir.join("results.csv");
    let summary_json = out_dir.join("summary.json");
    let manifest_json = out_dir.join("manifest.json");

    let mut manifest = RunManifest::begin(
        config_path,
        &bytes,
        study_config.seed,
        workers,
        results_csv.clone(),
        summary_json.clone(),
    );
    manifest.write(&manifest_json)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("worker pool");
    let report = pool.install(|| run_study(&study_config))?;

    std::fs::write(&results_csv, output::results_csv(&report))?;
    std::fs::write(&summary_json, output::summary_json(&report))?;
    manifest.finalize();
    manifest.write(&manifest_json)?;

    Ok(RunOutcome {
        verdict: report.verdict,
        summary_json,
        results_csv,
        manifest_json,
    })
}

/// `classify`: print the shrinking-window ladder for every zero-set
/// level; returns true when every level admits the non-sticky behaviour.
pub fn classify_command(config_path: &Path, out: &mut impl Write) -> Result<bool, RunnerError> {
    let text = std::fs::read_to_string(config_path)?;
    let spec = config::parse_coefficient_spec(&text)?;
    writeln!(out, "coefficient: {}", spec.describe())?;
    if spec.zero_set().is_empty() {
        writeln!(out, "zero set is empty: nothing to classify")?;
        return Ok(true);
    }
    let mut all_vanish = true;
    for &z in spec.zero_set() {
        let verdict = classify_level(&spec, z)?;
        writeln!(out, "level z = {z}:")?;
        writeln!(out, "  {:>10}  {:>24}", "eps", "integral")?;
        for (eps, value) in &verdict.integral_values {
            writeln!(out, "  {:>10.1e}  {:>24}", eps, output::format_g17(*value))?;
        }
        writeln!(out, "  classification: {:?}", verdict.classification)?;
        all_vanish &= verdict.classification == LevelClass::VanishesAsEpsToZero;
    }
    Ok(all_vanish)
}

/// `dump-path`: simulate one trajectory and print it as `t,x` rows with
/// full float precision.
pub fn dump_path_command(
    config_path: &Path,
    level: u32,
    seed: u64,
    path_index: u64,
    no_shift: bool,
    out: &mut impl Write,
) -> Result<(), RunnerError> {
    let text = std::fs::read_to_string(config_path)?;
    let problem = config::parse_problem_spec(&text)?;
    let lattice = generate_lattice(seed, path_index, level, problem.horizon)?;
    let policy = if no_shift {
        ShiftPolicy::NoShift
    } else {
        ShiftPolicy::Shift
    };
    let path = simulate_path_with(&problem, &lattice, policy)?;
    let dt = path.dt();
    writeln!(out, "t,x")?;
    for (k, &x) in path.values().iter().enumerate() {
        writeln!(
            out,
            "{},{}",
            output::format_g17(k as f64 * dt),
            output::format_g17(x)
        )?;
    }
    Ok(())
}
