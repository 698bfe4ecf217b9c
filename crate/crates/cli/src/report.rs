//! Consolidates run summaries into per-system markdown tables and a JSON digest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::registry;
use crate::summary::Summary;
use crate::{exit, CliError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub claim: String,
    /// Anchor looked up in the built-in registry, not copied from the summary.
    pub anchor: String,
    pub residual: Option<f64>,
    pub tolerance: String,
    pub passed: bool,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub path: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    /// System name to rows, failures first.
    pub systems: BTreeMap<String, Vec<ReportRow>>,
    pub skipped: Vec<Skipped>,
    pub summaries_read: usize,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.systems.values().flatten().all(|r| r.passed)
    }

    /// 0 when every row passes, 2 when an input was skipped, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if !self.skipped.is_empty() || self.summaries_read == 0 {
            exit::CONFIG
        } else if self.all_passed() {
            exit::PASS
        } else {
            exit::CHECK_FAILED
        }
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::from("# micz-lab report\n");
        for (system, rows) in &self.systems {
            let _ = write!(s, "\n## {system}\n\n| claim | anchor | residual | tolerance | verdict |\n|---|---|---|---|---|\n");
            for r in rows {
                let v = r.residual.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3e}"));
                let verdict = if r.passed { "pass" } else { "FAIL" };
                let _ = writeln!(s, "| {} | {} | {v} | {} | {verdict} |", r.claim, r.anchor, r.tolerance);
            }
        }
        if !self.skipped.is_empty() {
            s.push_str("\n## skipped inputs\n\n");
            for k in &self.skipped {
                let _ = writeln!(s, "- `{}`: {}", k.path, k.reason);
            }
        }
        s
    }
}

fn read_summary(path: &Path) -> Result<Summary, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    serde_json::from_str(&text).map_err(|e| format!("not a run summary: {e}"))
}

/// Builds a report from explicit paths; unreadable ones are listed and skipped.
pub fn build(paths: &[PathBuf]) -> Report {
    let mut rep = Report::default();
    for path in paths {
        let shown = path.display().to_string();
        let sum = match read_summary(path) {
            Ok(s) => s,
            Err(reason) => {
                rep.skipped.push(Skipped { path: shown, reason });
                continue;
            }
        };
        if let Some(c) = sum.claims.iter().find(|c| registry::claim(&c.id).is_none()) {
            rep.skipped.push(Skipped { path: shown, reason: format!("unknown claim `{}`", c.id) });
            continue;
        }
        rep.summaries_read += 1;
        let rows = rep.systems.entry(sum.system.name().to_string()).or_default();
        for c in &sum.claims {
            rows.push(ReportRow {
                claim: c.id.clone(),
                anchor: registry::claim(&c.id).map(|s| s.anchor.to_string()).unwrap_or_default(),
                residual: c.value,
                tolerance: c.check.describe(),
                passed: c.passed,
                source: shown.clone(),
            });
        }
        // a run with case errors fails even if every recorded value is in tolerance
        if !sum.errors.is_empty() && sum.claims.iter().all(|c| c.passed) {
            rows.push(ReportRow {
                claim: "case-errors".into(),
                anchor: String::new(),
                residual: Some(sum.errors.len() as f64),
                tolerance: "0 errors".into(),
                passed: false,
                source: shown.clone(),
            });
        }
    }
    for rows in rep.systems.values_mut() {
        rows.sort_by(|a, b| a.passed.cmp(&b.passed).then_with(|| a.claim.cmp(&b.claim)).then_with(|| a.source.cmp(&b.source)));
    }
    rep
}

/// Expands a glob pattern, sorted for reproducible output.
pub fn expand(pattern: &str) -> Result<Vec<PathBuf>, CliError> {
    let paths = glob::glob(pattern).map_err(|e| CliError::Config(format!("bad glob `{pattern}`: {e}")))?;
    let mut out: Vec<PathBuf> = paths.filter_map(|p| p.ok()).collect();
    out.sort();
    Ok(out)
}

/// Writes `report.md` and `report.json` into `dir`.
pub fn write(rep: &Report, dir: &Path) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join("report.md"), rep.to_markdown()).map_err(io)?;
    let json = serde_json::to_string_pretty(rep).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(dir.join("report.json"), json + "\n").map_err(io)?;
    Ok(())
}
