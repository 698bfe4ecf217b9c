//! Trajectory integration of Hamiltonian vector fields and conservation drift.
//!
//! The twisted structure is integrated directly as an ODE (no splitting), with
//! either fixed-step RK4 or adaptive Dormand-Prince 5(4).

use serde::{Deserialize, Serialize};

use crate::bracket::{hamiltonian_vector_field, Obs};
use crate::error::{Error, Result};
use crate::phase::SystemParams;
use crate::system::SystemId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Rk4Fixed,
    Rk45Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step (RK4) or initial step (adaptive).
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    pub t_end: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    /// Integration halts once the state is this close to a guarded boundary.
    #[serde(default = "default_guard")]
    pub guard_margin: f64,
    /// Keep every n-th accepted step (the final state is always kept).
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

fn default_step() -> f64 {
    1e-3
}
fn default_rtol() -> f64 {
    1e-10
}
fn default_atol() -> f64 {
    1e-12
}
fn default_max_steps() -> usize {
    5_000_000
}
fn default_guard() -> f64 {
    1e-6
}
fn default_record_every() -> usize {
    1
}

impl IntegratorConfig {
    pub fn rk4(step: f64, t_end: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk4Fixed,
            step,
            rtol: default_rtol(),
            atol: default_atol(),
            t_end,
            max_steps: default_max_steps(),
            guard_margin: default_guard(),
            record_every: 1,
        }
    }

    pub fn adaptive(rtol: f64, atol: f64, t_end: f64) -> Self {
        IntegratorConfig { method: Method::Rk45Adaptive, rtol, atol, ..Self::rk4(default_step(), t_end) }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Params(m.to_string()));
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be finite and >= 0");
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad("step must be positive");
        }
        if self.method == Method::Rk45Adaptive && !(self.rtol > 0.0 && self.atol > 0.0) {
            return bad("rtol and atol must be positive");
        }
        if !(self.guard_margin > 0.0) {
            return bad("guard_margin must be positive");
        }
        if self.max_steps == 0 || self.record_every == 0 {
            return bad("max_steps and record_every must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Event {
    Completed,
    /// Halted near a guarded boundary or singularity; the trajectory is partial.
    Boundary {
        t: f64,
        reason: String,
    },
    /// `max_steps` reached before `t_end`.
    Truncated {
        t: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub state_labels: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub observable_names: Vec<String>,
    /// `observable_values[i][k]` is observable `k` at `times[i]`.
    pub observable_values: Vec<Vec<f64>>,
    pub event: Event,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn completed(&self) -> bool {
        self.event == Event::Completed
    }

    /// Values of one watched observable over time.
    pub fn series(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.observable_names.iter().position(|n| n == name)?;
        Some(self.observable_values.iter().map(|row| row[k]).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftEntry {
    pub name: String,
    pub initial: f64,
    pub max_abs: f64,
    pub mean_abs: f64,
    /// Drift divided by `max(|O(0)|, 1)`.
    pub max_rel: f64,
    pub mean_rel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub entries: Vec<DriftEntry>,
}

impl DriftReport {
    pub fn get(&self, name: &str) -> Option<&DriftEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn max_rel(&self) -> f64 {
        self.entries.iter().map(|e| e.max_rel).fold(0.0, f64::max)
    }
}

pub fn drift_report(tr: &Trajectory) -> DriftReport {
    let entries = tr
        .observable_names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let initial = tr.observable_values.first().map(|r| r[k]).unwrap_or(0.0);
            let scale = initial.abs().max(1.0);
            let n = tr.observable_values.len().max(1) as f64;
            let (mut max_abs, mut sum) = (0.0f64, 0.0);
            for row in &tr.observable_values {
                let d = (row[k] - initial).abs();
                max_abs = max_abs.max(d);
                sum += d;
            }
            DriftEntry { name: name.clone(), initial, max_abs, mean_abs: sum / n, max_rel: max_abs / scale, mean_rel: sum / n / scale }
        })
        .collect();
    DriftReport { entries }
}

pub type Field<'a> = dyn Fn(&[f64]) -> Result<Vec<f64>> + 'a;
pub type Margin<'a> = dyn Fn(&[f64]) -> f64 + 'a;

/// Integrates the flow of `H` under the system's Poisson structure.
pub fn integrate(system: SystemId, x0: &[f64], params: &SystemParams, cfg: &IntegratorConfig, watch: &[Obs]) -> Result<Trajectory> {
    if x0.len() != system.dim() {
        return Err(Error::Contract(format!("{} expects a {}-component state, got {}", system, system.dim(), x0.len())));
    }
    let h = system.hamiltonian(params)?;
    let structure = system.structure(params);
    let field = |x: &[f64]| hamiltonian_vector_field(h.as_ref(), x, &structure);
    let margin = |x: &[f64]| system.domain_margin(x, params);
    let labels: Vec<String> = system.state_labels().iter().map(|s| s.to_string()).collect();
    integrate_field(&field, &margin, x0, cfg, watch, labels)
}

struct Recorder<'w> {
    watch: &'w [Obs],
    every: usize,
    tr: Trajectory,
}

impl Recorder<'_> {
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.watch.iter().map(|o| o.eval_f64(x)).collect()
    }

    /// Records the state if due; returns an error message if an observable fails.
    fn push(&mut self, t: f64, x: &[f64], force: bool) -> std::result::Result<(), String> {
        if !force && !self.tr.accepted_steps.is_multiple_of(self.every) {
            return Ok(());
        }
        if self.tr.times.last() == Some(&t) {
            return Ok(());
        }
        let vals = self.eval(x).map_err(|e| e.to_string())?;
        self.tr.times.push(t);
        self.tr.states.push(x.to_vec());
        self.tr.observable_values.push(vals);
        Ok(())
    }
}

/// Integrates an arbitrary vector field with domain guard `margin`.
pub fn integrate_field(
    field: &Field<'_>,
    margin: &Margin<'_>,
    x0: &[f64],
    cfg: &IntegratorConfig,
    watch: &[Obs],
    state_labels: Vec<String>,
) -> Result<Trajectory> {
    cfg.validate()?;
    let m0 = margin(x0);
    if !(m0 > cfg.guard_margin) {
        return Err(Error::Domain(format!("initial state is within the guard margin ({m0:e})")));
    }
    let mut rec = Recorder {
        watch,
        every: cfg.record_every,
        tr: Trajectory {
            state_labels,
            times: vec![0.0],
            states: vec![x0.to_vec()],
            observable_names: watch.iter().map(|o| o.name().to_string()).collect(),
            observable_values: vec![],
            event: Event::Completed,
            accepted_steps: 0,
            rejected_steps: 0,
        },
    };
    let v0 = rec.eval(x0)?;
    rec.tr.observable_values.push(v0);
    let event = match cfg.method {
        Method::Rk4Fixed => run_rk4(field, margin, x0, cfg, &mut rec),
        Method::Rk45Adaptive => run_dp45(field, margin, x0, cfg, &mut rec),
    };
    rec.tr.event = event;
    Ok(rec.tr)
}

fn axpy(x: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = x.to_vec();
    for (c, k) in terms {
        if *c != 0.0 {
            for (o, v) in out.iter_mut().zip(k.iter()) {
                *o += h * c * v;
            }
        }
    }
    out
}

fn guard_event(x: &[f64], t: f64, margin: &Margin<'_>, cfg: &IntegratorConfig) -> Option<Event> {
    let m = margin(x);
    if !(m > cfg.guard_margin) {
        Some(Event::Boundary { t, reason: format!("domain margin {m:e} below guard {:e}", cfg.guard_margin) })
    } else {
        None
    }
}

fn run_rk4(field: &Field<'_>, margin: &Margin<'_>, x0: &[f64], cfg: &IntegratorConfig, rec: &mut Recorder<'_>) -> Event {
    if cfg.t_end == 0.0 {
        return Event::Completed;
    }
    let n = ((cfg.t_end / cfg.step) - 1e-9).ceil().max(1.0) as usize;
    let h = cfg.t_end / n as f64;
    let mut x = x0.to_vec();
    for i in 0..n {
        if rec.tr.accepted_steps >= cfg.max_steps {
            let t = i as f64 * h;
            let _ = rec.push(t, &x, true);
            return Event::Truncated { t };
        }
        let t = i as f64 * h;
        let step = || -> Result<Vec<f64>> {
            let k1 = field(&x)?;
            let k2 = field(&axpy(&x, h, &[(0.5, &k1)]))?;
            let k3 = field(&axpy(&x, h, &[(0.5, &k2)]))?;
            let k4 = field(&axpy(&x, h, &[(1.0, &k3)]))?;
            Ok(axpy(&x, h, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)]))
        };
        match step() {
            Ok(next) => {
                let tn = if i + 1 == n { cfg.t_end } else { (i + 1) as f64 * h };
                if let Some(ev) = guard_event(&next, tn, margin, cfg) {
                    let _ = rec.push(t, &x, true);
                    return ev;
                }
                x = next;
                rec.tr.accepted_steps += 1;
                if let Err(msg) = rec.push(tn, &x, i + 1 == n) {
                    return Event::Boundary { t: tn, reason: msg };
                }
            }
            Err(e) => {
                let _ = rec.push(t, &x, true);
                return Event::Boundary { t, reason: e.to_string() };
            }
        }
    }
    Event::Completed
}

// Dormand-Prince 5(4) tableau; the last row doubles as the 5th-order weights.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

fn dp_trial(field: &Field<'_>, x: &[f64], h: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    k.push(field(x)?);
    for s in 1..7 {
        let terms: Vec<(f64, &[f64])> = (0..s).map(|j| (A[s][j], k[j].as_slice())).collect();
        k.push(field(&axpy(x, h, &terms))?);
    }
    // Stage 7 is evaluated at the 5th-order solution.
    let y: Vec<f64> = axpy(x, h, &(0..6).map(|j| (A[6][j], k[j].as_slice())).collect::<Vec<_>>());
    let err: Vec<f64> = (0..x.len()).map(|i| h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>()).collect();
    Ok((y, err))
}

fn run_dp45(field: &Field<'_>, margin: &Margin<'_>, x0: &[f64], cfg: &IntegratorConfig, rec: &mut Recorder<'_>) -> Event {
    let mut x = x0.to_vec();
    let mut t = 0.0;
    let mut h = cfg.step.min(cfg.t_end);
    while t < cfg.t_end {
        if rec.tr.accepted_steps >= cfg.max_steps {
            let _ = rec.push(t, &x, true);
            return Event::Truncated { t };
        }
        let last = t + h >= cfg.t_end;
        if last {
            h = cfg.t_end - t;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            let _ = rec.push(t, &x, true);
            return Event::Boundary { t, reason: "step-size underflow".into() };
        }
        match dp_trial(field, &x, h) {
            Ok((y, err)) => {
                let n = x.len() as f64;
                let norm = (x
                    .iter()
                    .zip(&y)
                    .zip(&err)
                    .map(|((a, b), e)| {
                        let sc = cfg.atol + cfg.rtol * a.abs().max(b.abs());
                        (e / sc).powi(2)
                    })
                    .sum::<f64>()
                    / n)
                    .sqrt();
                if !norm.is_finite() || y.iter().any(|v| !v.is_finite()) {
                    rec.tr.rejected_steps += 1;
                    h *= 0.25;
                    continue;
                }
                if norm <= 1.0 {
                    let tn = if last { cfg.t_end } else { t + h };
                    if let Some(ev) = guard_event(&y, tn, margin, cfg) {
                        let _ = rec.push(t, &x, true);
                        return ev;
                    }
                    x = y;
                    t = tn;
                    rec.tr.accepted_steps += 1;
                    if let Err(msg) = rec.push(t, &x, t >= cfg.t_end) {
                        return Event::Boundary { t, reason: msg };
                    }
                    let fac = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
                    h *= fac;
                } else {
                    rec.tr.rejected_steps += 1;
                    h *= (0.9 * norm.powf(-0.2)).max(0.2);
                }
            }
            Err(_) => {
                rec.tr.rejected_steps += 1;
                h *= 0.25;
            }
        }
    }
    Event::Completed
}
