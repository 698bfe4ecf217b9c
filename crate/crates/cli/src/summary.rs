//! JSON run summaries.

use std::collections::BTreeMap;

use micz_core::system::SamplingBounds;
use micz_core::{SystemId, SystemParams};
use serde::{Deserialize, Serialize};

use crate::config::Task;
use crate::registry::{self, Check};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimResult {
    pub id: String,
    pub anchor: String,
    pub system: SystemId,
    pub check: Check,
    /// Worst value over cases; `None` when no case produced a value.
    pub value: Option<f64>,
    pub worst_case: Option<usize>,
    pub cases: usize,
    /// Cases that failed the check or could not be evaluated.
    pub failures: usize,
    pub passed: bool,
    /// Per-quantity worst values behind the headline number.
    pub details: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseError {
    pub case: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionRef {
    pub id: String,
    pub form: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub tool: String,
    pub version: String,
    pub name: String,
    pub system: SystemId,
    pub task: Task,
    pub seed: u64,
    pub params: SystemParams,
    /// Bounds used for seeded sampling, if states were sampled.
    pub sampling: Option<SamplingBounds>,
    pub cases: usize,
    pub claims: Vec<ClaimResult>,
    pub corrections: Vec<CorrectionRef>,
    pub errors: Vec<CaseError>,
    pub artifacts: Vec<String>,
    pub passed: bool,
    /// Seconds since the Unix epoch; the only field allowed to differ between identical runs.
    pub generated_at_unix: u64,
}

pub const TIMESTAMP_FIELD: &str = "generated_at_unix";

impl Summary {
    /// Corrections referenced by the claims, in registry order.
    pub fn touched_corrections(claims: &[ClaimResult]) -> Vec<CorrectionRef> {
        registry::CORRECTIONS
            .iter()
            .filter(|c| claims.iter().any(|r| registry::claim(&r.id).is_some_and(|s| s.corrections.contains(&c.id))))
            .map(|c| CorrectionRef { id: c.id.to_string(), form: c.form.to_string() })
            .collect()
    }
}

/// Collects per-case values of one claim.
#[derive(Debug, Clone)]
pub struct Tally {
    id: &'static str,
    check: Check,
    worst: Option<(f64, usize)>,
    cases: usize,
    failures: usize,
    details: BTreeMap<String, f64>,
}

impl Tally {
    pub fn new(id: &'static str, check: Check) -> Self {
        Tally { id, check, worst: None, cases: 0, failures: 0, details: BTreeMap::new() }
    }

    pub fn record(&mut self, case: usize, v: f64) {
        self.cases += 1;
        if !self.check.passes(v) {
            self.failures += 1;
        }
        let worse = match self.worst {
            None => true,
            Some((w, _)) => self.check.badness(v) > self.check.badness(w),
        };
        if worse {
            self.worst = Some((v, case));
        }
    }

    /// A case where the quantity could not be evaluated.
    pub fn record_error(&mut self) {
        self.cases += 1;
        self.failures += 1;
    }

    /// Keeps the worst value seen for a named sub-quantity.
    pub fn detail(&mut self, name: &str, v: f64) {
        let check = self.check;
        self.details
            .entry(name.to_string())
            .and_modify(|w| {
                if check.badness(v) > check.badness(*w) {
                    *w = v
                }
            })
            .or_insert(v);
    }

    pub fn finish(self, system: SystemId) -> ClaimResult {
        let spec = registry::claim(self.id).expect("registered claim");
        ClaimResult {
            id: self.id.to_string(),
            anchor: spec.anchor.to_string(),
            system,
            check: self.check,
            value: self.worst.map(|w| w.0),
            worst_case: self.worst.map(|w| w.1),
            cases: self.cases,
            failures: self.failures,
            passed: self.cases > 0 && self.failures == 0,
            details: self.details,
        }
    }
}

/// JSON value of a summary with the timestamp removed, for determinism checks.
pub fn without_timestamp(v: &serde_json::Value) -> serde_json::Value {
    let mut v = v.clone();
    if let Some(o) = v.as_object_mut() {
        o.remove(TIMESTAMP_FIELD);
    }
    v
}
