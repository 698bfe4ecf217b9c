//! TOML experiment configuration.

use std::collections::BTreeMap;
use std::path::Path;

use micz_core::dynamics::IntegratorConfig;
use micz_core::{Curvature, SystemId, SystemParams};
use serde::{Deserialize, Serialize};

use crate::registry;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    CheckBrackets,
    Simulate,
    KsVerify,
    SeparationVerify,
    LaplaceCheck,
    FlatLimit,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::CheckBrackets => "check-brackets",
            Task::Simulate => "simulate",
            Task::KsVerify => "ks-verify",
            Task::SeparationVerify => "separation-verify",
            Task::LaplaceCheck => "laplace-check",
            Task::FlatLimit => "flat-limit",
        }
    }
}

/// Couplings as written in the config; only `omega` is mandatory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub omega: f64,
    #[serde(default)]
    pub delta_omega_sq: f64,
    #[serde(default)]
    pub eps_el: f64,
    #[serde(rename = "R0", default = "one")]
    pub r0_radius: f64,
    #[serde(default = "flat")]
    pub curvature: Curvature,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub s: f64,
}

fn one() -> f64 {
    1.0
}
fn flat() -> Curvature {
    Curvature::Flat
}

impl From<ParamsConfig> for SystemParams {
    fn from(p: ParamsConfig) -> Self {
        SystemParams {
            omega: p.omega,
            delta_omega_sq: p.delta_omega_sq,
            eps_el: p.eps_el,
            r0_radius: p.r0_radius,
            curvature: p.curvature,
            gamma: p.gamma,
            s: p.s,
        }
    }
}

/// Exactly one of `count` (seeded sampling) or `explicit` states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub count: Option<usize>,
    pub explicit: Option<Vec<Vec<f64>>>,
    /// Start of the along-flow checks of ks-verify and separation-verify; case 0 if absent.
    pub trajectory: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Relative paths resolve against the config file's directory.
    pub dir: Option<String>,
    /// File stem for artifacts; defaults to the config file stem.
    pub name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ToleranceOverride {
    Bound(f64),
    Range([f64; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatLimitConfig {
    pub radii: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaplaceConfig {
    pub steps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemId,
    pub task: Task,
    pub seed: u64,
    pub params: ParamsConfig,
    pub state: StateConfig,
    pub integrator: Option<IntegratorConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    /// Per-claim overrides of the registry tolerance.
    #[serde(default)]
    pub tolerances: BTreeMap<String, ToleranceOverride>,
    pub flat_limit: Option<FlatLimitConfig>,
    pub laplace: Option<LaplaceConfig>,
}

fn bad(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("field `{field}`: {msg}"))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn params(&self) -> SystemParams {
        self.params.into()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let p = self.params();
        self.system.check_params(&p).map_err(|e| bad("params", e))?;
        match (&self.state.count, &self.state.explicit) {
            (Some(0), None) => return Err(bad("state.count", "must be positive")),
            (Some(_), None) => {}
            (None, Some(v)) => {
                if v.is_empty() {
                    return Err(bad("state.explicit", "needs at least one state"));
                }
                for (i, x) in v.iter().enumerate() {
                    if x.len() != self.system.dim() {
                        return Err(bad(
                            "state.explicit",
                            format!("state {i} has {} components, {} needs {}", x.len(), self.system, self.system.dim()),
                        ));
                    }
                }
            }
            _ => return Err(bad("state", "give exactly one of `count` or `explicit`")),
        }
        if let Some(t) = &self.state.trajectory {
            if t.len() != self.system.dim() {
                return Err(bad("state.trajectory", format!("has {} components, {} needs {}", t.len(), self.system, self.system.dim())));
            }
        }
        if let Some(ic) = &self.integrator {
            ic.validate().map_err(|e| bad("integrator", e))?;
        }
        let need = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(bad("system", format!("{msg} for task {}", self.task.name()))) };
        match self.task {
            Task::CheckBrackets => {}
            Task::Simulate => {
                if self.integrator.is_none() {
                    return Err(bad("integrator", "required for task simulate"));
                }
            }
            Task::KsVerify => need(matches!(self.system, SystemId::OscAniso | SystemId::HiggsAniso), "must be osc-aniso or higgs-aniso")?,
            Task::SeparationVerify => need(self.system == SystemId::MiczPseudo, "must be micz-pseudo")?,
            Task::LaplaceCheck => {
                need(self.system == SystemId::MiczPseudo, "must be micz-pseudo")?;
                if p.curvature != Curvature::Pseudosphere {
                    return Err(bad("params.curvature", "laplace-check needs pseudosphere"));
                }
            }
            Task::FlatLimit => need(self.system == SystemId::HiggsAniso, "must be higgs-aniso")?,
        }
        if let Some(fl) = &self.flat_limit {
            if fl.radii.len() < 2 || !fl.radii.iter().all(|r| *r > 0.0) {
                return Err(bad("flat_limit.radii", "needs at least two positive radii"));
            }
        }
        if let Some(l) = &self.laplace {
            if l.steps.is_empty() || !l.steps.iter().all(|h| *h > 0.0) {
                return Err(bad("laplace.steps", "needs positive steps"));
            }
        }
        for (id, o) in &self.tolerances {
            let spec = registry::claim(id).ok_or_else(|| bad("tolerances", format!("unknown claim `{id}`")))?;
            self.resolve_check(spec.check, *o).map_err(|m| bad(&format!("tolerances.{id}"), m))?;
        }
        Ok(())
    }

    fn resolve_check(&self, base: registry::Check, o: ToleranceOverride) -> Result<registry::Check, String> {
        use registry::Check;
        match (base, o) {
            (Check::AtMost { .. }, ToleranceOverride::Bound(b)) => Ok(Check::AtMost { bound: b }),
            (Check::AtLeast { .. }, ToleranceOverride::Bound(b)) => Ok(Check::AtLeast { bound: b }),
            (Check::Within { .. }, ToleranceOverride::Range([lo, hi])) if lo < hi => Ok(Check::Within { lo, hi }),
            _ => Err("override does not match the claim's check kind".into()),
        }
    }

    /// Registry check with this config's override applied.
    pub fn check_for(&self, id: &str) -> registry::Check {
        let spec = registry::claim(id).expect("claim ids used by tasks are registered");
        match self.tolerances.get(id) {
            Some(o) => self.resolve_check(spec.check, *o).expect("validated"),
            None => spec.check,
        }
    }
}
