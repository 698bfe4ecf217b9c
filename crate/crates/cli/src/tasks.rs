//! Task execution. Cases run in parallel; results are gathered in case order so
//! summaries do not depend on scheduling.

use micz_core::bracket::{relative_bracket, Obs};
use micz_core::curved;
use micz_core::dynamics::{drift_report, integrate, Trajectory};
use micz_core::ks;
use micz_core::separation;
use micz_core::system::{sample_in, SamplingBounds};
use micz_core::{PhasePoint4C, ReducedPoint3, SystemId, SystemParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Task};
use crate::summary::{CaseError, ClaimResult, Tally};
use crate::CliError;

pub const DEFAULT_RADII: [f64; 3] = [5.0, 50.0, 500.0];
pub const DEFAULT_LAPLACE_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];
/// Chart point where the linear potential's Laplacian is evaluated.
pub const LINEAR_WITNESS: [f64; 3] = [0.0, 0.0, 0.3];
const KAPPA_FIT_STATES: usize = 10;

/// `(file name, contents)`
pub type Artifact = (String, Vec<u8>);

#[derive(Debug, Default)]
pub struct TaskOutput {
    pub claims: Vec<ClaimResult>,
    pub errors: Vec<CaseError>,
    pub artifacts: Vec<Artifact>,
    pub sampling: Option<SamplingBounds>,
    pub cases: usize,
}

/// Laplace points stay clear of the origin and of the chart edge, where the
/// stencil would need very small steps.
pub fn laplace_bounds() -> SamplingBounds {
    SamplingBounds { position_box: 0.8, momentum_box: 1.0, min_radius: Some(0.2), max_radius: None, max_norm_sq: Some(0.64) }
}

fn states(cfg: &ExperimentConfig, bounds: SamplingBounds) -> (Vec<Vec<f64>>, Option<SamplingBounds>) {
    match (&cfg.state.explicit, cfg.state.count) {
        (Some(v), _) => (v.clone(), None),
        (None, Some(n)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            ((0..n).map(|_| sample_in(&bounds, cfg.system.dim(), &mut rng)).collect(), Some(bounds))
        }
        (None, None) => unreachable!("validated"),
    }
}

fn trajectory_start<'a>(cfg: &'a ExperimentConfig, xs: &'a [Vec<f64>]) -> &'a [f64] {
    cfg.state.trajectory.as_deref().unwrap_or(&xs[0])
}

fn push_err(errors: &mut Vec<CaseError>, case: usize, message: impl ToString) {
    errors.push(CaseError { case, message: message.to_string() });
}

fn claim_id(system: SystemId) -> &'static str {
    crate::registry::claim(&format!("{}.integrals", system.name())).expect("every system has an integrability claim").id
}

pub fn run(cfg: &ExperimentConfig, stem: &str) -> Result<TaskOutput, CliError> {
    match cfg.task {
        Task::CheckBrackets => check_brackets(cfg),
        Task::Simulate => simulate(cfg, stem),
        Task::KsVerify => ks_verify(cfg),
        Task::SeparationVerify => separation_verify(cfg),
        Task::LaplaceCheck => laplace_check(cfg),
        Task::FlatLimit => flat_limit(cfg),
    }
}

fn check_brackets(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let sys = cfg.system;
    let p = cfg.params();
    let h = sys.hamiltonian(&p)?;
    let integrals = sys.conserved(&p)?;
    let st = sys.structure(&p);
    let (xs, sampling) = states(cfg, sys.sampling_bounds());
    let per: Vec<Result<Vec<f64>, String>> = xs
        .par_iter()
        .map(|x| {
            integrals.iter().map(|c| relative_bracket(h.as_ref(), c.as_ref(), x, &st).map_err(|e| format!("{}: {e}", c.name()))).collect()
        })
        .collect();
    let id = claim_id(sys);
    let mut t = Tally::new(id, cfg.check_for(id));
    let mut out = TaskOutput { sampling, cases: xs.len(), ..Default::default() };
    for (i, r) in per.into_iter().enumerate() {
        match r {
            Ok(vals) => {
                t.record(i, vals.iter().copied().fold(0.0, f64::max));
                for (c, v) in integrals.iter().zip(&vals) {
                    t.detail(c.name(), *v);
                }
            }
            Err(e) => {
                t.record_error();
                push_err(&mut out.errors, i, e);
            }
        }
    }
    out.claims.push(t.finish(sys));
    Ok(out)
}

fn watch_list(sys: SystemId, p: &SystemParams) -> Result<Vec<Obs>, CliError> {
    let mut w = vec![sys.hamiltonian(p)?];
    w.extend(sys.conserved(p)?);
    Ok(w)
}

fn trajectory_csv(tr: &Trajectory) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend(tr.state_labels.iter().cloned());
    header.extend(tr.observable_names.iter().cloned());
    w.write_record(&header).map_err(|e| CliError::Io(e.to_string()))?;
    for (k, t) in tr.times.iter().enumerate() {
        let row = std::iter::once(t).chain(&tr.states[k]).chain(&tr.observable_values[k]).map(|v| v.to_string());
        w.write_record(row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

fn simulate(cfg: &ExperimentConfig, stem: &str) -> Result<TaskOutput, CliError> {
    let sys = cfg.system;
    let p = cfg.params();
    let ic = cfg.integrator.as_ref().expect("validated");
    let watch = watch_list(sys, &p)?;
    let (xs, sampling) = states(cfg, sys.sampling_bounds());
    let runs: Vec<_> = xs.par_iter().map(|x| integrate(sys, x, &p, ic, &watch)).collect();
    let id = "dynamics.drift";
    let mut t = Tally::new(id, cfg.check_for(id));
    let mut out = TaskOutput { sampling, cases: xs.len(), ..Default::default() };
    for (i, r) in runs.into_iter().enumerate() {
        let tr = match r {
            Ok(tr) => tr,
            Err(e) => {
                t.record_error();
                push_err(&mut out.errors, i, e);
                continue;
            }
        };
        let name = if xs.len() == 1 { format!("{stem}.csv") } else { format!("{stem}.case-{i}.csv") };
        out.artifacts.push((name, trajectory_csv(&tr)?));
        let d = drift_report(&tr);
        if tr.completed() {
            t.record(i, d.max_rel());
        } else {
            t.record_error();
            push_err(&mut out.errors, i, format!("trajectory ended early: {:?}", tr.event));
        }
        for e in &d.entries {
            t.detail(&e.name, e.max_rel);
        }
    }
    out.claims.push(t.finish(sys));
    Ok(out)
}

fn ks_verify(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let sys = cfg.system;
    let p = cfg.params();
    let source = p.curvature;
    let (xs, sampling) = states(cfg, sys.sampling_bounds());
    let pts: Vec<PhasePoint4C> = xs.iter().map(|x| PhasePoint4C::from_real(x)).collect::<Result<_, _>>()?;
    let mut out = TaskOutput { sampling, cases: pts.len(), ..Default::default() };
    let kappa = ks::fit_kappa(&pts[..pts.len().min(KAPPA_FIT_STATES)], &p, source);

    type Row = Result<(f64, f64, f64, f64), String>;
    let rows: Vec<Row> = pts
        .par_iter()
        .map(|x| {
            let b = ks::ks_bracket_max_residual(x).map_err(|e| e.to_string())?;
            let l = ks::ks_level_check(x, &p, source).map_err(|e| e.to_string())?;
            let k = kappa.as_ref().map_err(|e| format!("kappa fit: {e}"))?;
            let (j, a) = ks::ks_observable_check(x, &p, source, *k).map_err(|e| e.to_string())?;
            Ok((b, l, j, a))
        })
        .collect();
    let ids = ["ks.bracket-image", "ks.energy-surface", "ks.angular-momentum", "ks.hidden-integral"];
    let mut tallies: Vec<Tally> = ids.iter().map(|&id| Tally::new(id, cfg.check_for(id))).collect();
    for (i, r) in rows.into_iter().enumerate() {
        match r {
            Ok((b, l, j, a)) => {
                for (t, v) in tallies.iter_mut().zip([b, l, j, a]) {
                    t.record(i, v);
                }
            }
            Err(e) => {
                tallies.iter_mut().for_each(Tally::record_error);
                push_err(&mut out.errors, i, e);
            }
        }
    }
    if let Ok(k) = kappa {
        tallies[3].detail("kappa", k);
    }
    out.claims.extend(tallies.into_iter().map(|t| t.finish(sys)));

    if let Some(ic) = &cfg.integrator {
        let id = "ks.trajectory-level";
        let mut t = Tally::new(id, cfg.check_for(id));
        let start = trajectory_start(cfg, &xs);
        let res = (|| -> Result<f64, String> {
            let x0 = PhasePoint4C::from_real(start).map_err(|e| e.to_string())?;
            let e = ks::source_energy(&x0, &p, source).map_err(|e| e.to_string())?;
            let s = ks::ks_map(&x0).map_err(|e| e.to_string())?.s;
            let tr = integrate(sys, start, &p, ic, &[]).map_err(|e| e.to_string())?;
            if !tr.completed() {
                return Err(format!("trajectory ended early: {:?}", tr.event));
            }
            let mut worst: f64 = 0.0;
            for x in &tr.states {
                let y = PhasePoint4C::from_real(x).map_err(|e| e.to_string())?;
                worst = worst.max(ks::level_residual_on(&y, &p, source, e, s).map_err(|e| e.to_string())?);
            }
            Ok(worst)
        })();
        match res {
            Ok(v) => t.record(0, v),
            Err(e) => {
                t.record_error();
                push_err(&mut out.errors, 0, e);
            }
        }
        out.claims.push(t.finish(sys));
    }
    Ok(out)
}

fn separation_verify(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let sys = cfg.system;
    let p = cfg.params();
    let r0 = p.r0()?;
    let h = sys.hamiltonian(&p)?;
    let beta = separation::beta_observable(p);
    let pphi = separation::p_phi_observable(p);
    let st = sys.structure(&p);
    let (xs, sampling) = states(cfg, sys.sampling_bounds());
    let mut out = TaskOutput { sampling, cases: xs.len(), ..Default::default() };

    type Row = Result<[f64; 4], String>;
    let rows: Vec<Row> = xs
        .par_iter()
        .map(|v| {
            let e = |e: micz_core::Error| e.to_string();
            let x = ReducedPoint3::from_real(v, p.s).map_err(e)?;
            let hc = curved::h_micz_curved(&x, &p, curved::MiczKind::Pseudo).map_err(e)?;
            let ps = separation::parabolic_momenta(&x, r0).map_err(e)?;
            let hp = separation::h_micz_parabolic(&ps, &p).map_err(e)?;
            let chart = (hc - hp).abs() / hc.abs().max(1.0);
            let rec = separation::separation_constant(&ps, &p, hp).map_err(e)?;
            let cons = rec.consistency / rec.beta_xi.abs().max(1.0);
            let mut inv: f64 = 0.0;
            for (f, g) in [(&h, &beta), (&h, &pphi), (&beta, &pphi)] {
                inv = inv.max(relative_bracket(f.as_ref(), g.as_ref(), v, &st).map_err(e)?);
            }
            let (a, b) = separation::hj_residual_chi_zeta(&ps, &p, hp, rec.beta_xi).map_err(e)?;
            let hyp = a.max(b) / (rec.beta_xi.abs().max(hp.abs()).max(1.0) * r0 * r0);
            Ok([chart, cons, inv, hyp])
        })
        .collect();
    let ids = ["separation.chart-equivalence", "separation.beta-consistency", "separation.involution", "separation.hyperbolic-form"];
    let mut tallies: Vec<Tally> = ids.iter().map(|&id| Tally::new(id, cfg.check_for(id))).collect();
    for (i, r) in rows.into_iter().enumerate() {
        match r {
            Ok(vals) => {
                for (t, v) in tallies.iter_mut().zip(vals) {
                    t.record(i, v);
                }
            }
            Err(e) => {
                tallies.iter_mut().for_each(Tally::record_error);
                push_err(&mut out.errors, i, e);
            }
        }
    }
    out.claims.extend(tallies.into_iter().map(|t| t.finish(sys)));

    if let Some(ic) = &cfg.integrator {
        let id = "separation.beta-drift";
        let mut t = Tally::new(id, cfg.check_for(id));
        match integrate(sys, trajectory_start(cfg, &xs), &p, ic, std::slice::from_ref(&beta)) {
            Ok(tr) if tr.completed() => {
                let d = drift_report(&tr);
                t.record(0, d.max_rel());
                if let Some(b) = d.get("beta") {
                    t.detail("beta_initial", b.initial);
                }
            }
            Ok(tr) => {
                t.record_error();
                push_err(&mut out.errors, 0, format!("trajectory ended early: {:?}", tr.event));
            }
            Err(e) => {
                t.record_error();
                push_err(&mut out.errors, 0, e);
            }
        }
        out.claims.push(t.finish(sys));
    }
    Ok(out)
}

fn laplace_check(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let sys = cfg.system;
    let p = cfg.params();
    let r0 = p.r0()?;
    let steps = cfg.laplace.as_ref().map(|l| l.steps.clone()).unwrap_or_else(|| DEFAULT_LAPLACE_STEPS.to_vec());
    let (xs, sampling) = states(cfg, laplace_bounds());
    let mut out = TaskOutput { sampling, cases: xs.len(), ..Default::default() };
    let kepler = curved::kepler_potential(p);
    let rows: Vec<_> =
        xs.par_iter().map(|x| curved::laplace_beltrami_extrapolated(kepler.as_ref(), &[x[0], x[1], x[2]], r0, &steps)).collect();
    let id = "laplace.kepler-harmonic";
    let mut t = Tally::new(id, cfg.check_for(id));
    for (i, r) in rows.into_iter().enumerate() {
        match r {
            Ok(est) => {
                t.record(i, est.extrapolated.abs());
                t.detail("finest_raw", est.values.last().copied().unwrap_or(f64::NAN).abs());
            }
            Err(e) => {
                t.record_error();
                push_err(&mut out.errors, i, e);
            }
        }
    }
    out.claims.push(t.finish(sys));

    let id = "laplace.linear-non-harmonic";
    let mut t = Tally::new(id, cfg.check_for(id));
    match curved::laplace_beltrami_extrapolated(curved::linear_potential(p).as_ref(), &LINEAR_WITNESS, r0, &steps) {
        Ok(est) => t.record(0, est.extrapolated.abs()),
        Err(e) => {
            t.record_error();
            push_err(&mut out.errors, 0, format!("linear witness: {e}"));
        }
    }
    out.claims.push(t.finish(sys));
    Ok(out)
}

fn flat_limit(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let sys = cfg.system;
    let p = cfg.params();
    let radii = cfg.flat_limit.as_ref().map(|f| f.radii.clone()).unwrap_or_else(|| DEFAULT_RADII.to_vec());
    let (xs, sampling) = states(cfg, sys.sampling_bounds());
    let mut out = TaskOutput { sampling, cases: xs.len(), ..Default::default() };
    let rows: Vec<_> = xs.par_iter().map(|x| PhasePoint4C::from_real(x).and_then(|y| curved::flat_limit_ratio(&y, &p, &radii))).collect();
    let id = "flat-limit.second-order";
    let mut t = Tally::new(id, cfg.check_for(id));
    let mut limits: Vec<f64> = Vec::new();
    for (i, r) in rows.into_iter().enumerate() {
        match r.map_err(|e| e.to_string()).and_then(|tab| {
            let shrink = tab.deviation_ratios.first().copied().flatten();
            match (shrink, tab.limit) {
                (Some(s), Some(c)) => Ok((s, c)),
                _ => Err(format!("indeterminate ratio table: {:?}", tab.rows.iter().map(|r| r.note.clone()).collect::<Vec<_>>())),
            }
        }) {
            Ok((s, c)) => {
                t.record(i, s);
                limits.push(c);
            }
            Err(e) => {
                t.record_error();
                push_err(&mut out.errors, i, e);
            }
        }
    }
    let mut res = t.finish(sys);
    if !limits.is_empty() {
        let (lo, hi) = limits.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        res.details.insert("limit_min".into(), lo);
        res.details.insert("limit_max".into(), hi);
    }
    out.claims.push(res);
    Ok(out)
}
