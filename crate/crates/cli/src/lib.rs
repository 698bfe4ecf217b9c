//! Batch runner: reads an experiment config, evaluates its claims and writes
//! a JSON summary plus any trajectory CSVs.

pub mod config;
pub mod registry;
pub mod report;
pub mod summary;
pub mod tasks;

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use config::ExperimentConfig;
use summary::Summary;

/// Overrides the output directory of every run.
pub const OUT_ENV: &str = "MICZ_LAB_OUT";
pub const DEFAULT_OUT_DIR: &str = "micz-lab-out";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] micz_core::Error),
}

pub mod exit {
    pub const PASS: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        exit::CONFIG
    }
}

fn stem_of(cfg: &ExperimentConfig, path: &Path) -> String {
    cfg.output.name.clone().unwrap_or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into()))
}

/// Output directory: explicit override, then `[output].dir` relative to the
/// config file, then `micz-lab-out` next to the config file.
pub fn output_dir(cfg: &ExperimentConfig, config_path: &Path, out_override: Option<&Path>) -> PathBuf {
    if let Some(o) = out_override {
        return o.to_path_buf();
    }
    let base = config_path.parent().unwrap_or(Path::new("."));
    match &cfg.output.dir {
        Some(d) => base.join(d),
        None => base.join(DEFAULT_OUT_DIR),
    }
}

/// Evaluates a parsed config without touching the filesystem.
pub fn evaluate(cfg: &ExperimentConfig, name: &str) -> Result<(Summary, Vec<tasks::Artifact>), CliError> {
    let out = tasks::run(cfg, name)?;
    let passed = !out.claims.is_empty() && out.claims.iter().all(|c| c.passed) && out.errors.is_empty();
    let generated_at_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let summary = Summary {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        name: name.into(),
        system: cfg.system,
        task: cfg.task,
        seed: cfg.seed,
        params: cfg.params(),
        sampling: out.sampling,
        cases: out.cases,
        corrections: Summary::touched_corrections(&out.claims),
        claims: out.claims,
        errors: out.errors,
        artifacts: out.artifacts.iter().map(|(n, _)| n.clone()).collect(),
        passed,
        generated_at_unix,
    };
    Ok((summary, out.artifacts))
}

/// Loads, runs and writes one experiment. Returns the summary and its path.
pub fn run_file(config_path: &Path, out_override: Option<&Path>) -> Result<(Summary, PathBuf), CliError> {
    let cfg = ExperimentConfig::load(config_path)?;
    let name = stem_of(&cfg, config_path);
    let dir = output_dir(&cfg, config_path, out_override);
    let (summary, artifacts) = evaluate(&cfg, &name)?;
    let io = |e: std::io::Error, p: &Path| CliError::Io(format!("{}: {e}", p.display()));
    std::fs::create_dir_all(&dir).map_err(|e| io(e, &dir))?;
    for (file, bytes) in &artifacts {
        let p = dir.join(file);
        std::fs::write(&p, bytes).map_err(|e| io(e, &p))?;
    }
    let path = dir.join(format!("{name}.summary.json"));
    let json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(&path, json + "\n").map_err(|e| io(e, &path))?;
    Ok((summary, path))
}
