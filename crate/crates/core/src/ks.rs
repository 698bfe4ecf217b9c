//! Kustaanheimo-Stiefel reduction of the 4D oscillators by the U(1) action
//! generated by `J`.
//!
//! `q = z sigma zbar`, `p = (z sigma pi + pibar sigma zbar)/(2 z zbar)`, `s = J`.

use serde::{Deserialize, Serialize};

use crate::bracket::{poisson_bracket, Obs, PoissonStructure};
use crate::curved::{self, HiggsKind, MiczKind};
use crate::dual::Scalar;
use crate::error::{Error, Result};
use crate::flat::{self, zzbar, OscKind};
use crate::observable;
use crate::pauli::{self, bilinear, conj, unpack};
use crate::phase::{Curvature, PhasePoint4C, ReducedPoint3, SystemParams, SINGULAR_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KSImage {
    pub reduced: ReducedPoint3,
    /// Value of `J` at the source state.
    pub s: f64,
    /// Source Hamiltonian at the source state, when a source system was given.
    pub source_energy: Option<f64>,
}

fn checked_norm<S: Scalar>(x: &[S]) -> Result<S> {
    let r = zzbar(x);
    if !(r.value() > SINGULAR_EPS) {
        return Err(Error::Singularity(format!("z zbar = {:e}: the KS map is undefined at z = 0", r.value())));
    }
    Ok(r)
}

pub fn ks_q_formula<S: Scalar>(x: &[S], _: &SystemParams, k: usize) -> Result<S> {
    checked_norm(x)?;
    let (z, _) = unpack(x);
    pauli::real_part(bilinear(&z, k, &conj(&z)), "KS q")
}

pub fn ks_p_formula<S: Scalar>(x: &[S], _: &SystemParams, k: usize) -> Result<S> {
    let r = checked_norm(x)?;
    let (z, pi) = unpack(x);
    let num = bilinear(&z, k, &pi) + bilinear(&conj(&pi), k, &conj(&z));
    Ok(pauli::real_part(num, "KS p")? / r.scale(2.0))
}

/// `q1∘ks, q2∘ks, q3∘ks, p1∘ks, p2∘ks, p3∘ks` as observables on the 4D phase space.
pub fn ks_coordinates() -> Vec<Obs> {
    let p = SystemParams::default();
    let mut out = Vec::with_capacity(6);
    for k in 0..3 {
        out.push(observable!(format!("q{}", k + 1), p, k, ks_q_formula));
    }
    for k in 0..3 {
        out.push(observable!(format!("p{}", k + 1), p, k, ks_p_formula));
    }
    out
}

pub fn ks_map(x: &PhasePoint4C) -> Result<KSImage> {
    let r = x.to_real();
    let p = SystemParams::default();
    let mut q = [0.0; 3];
    let mut pm = [0.0; 3];
    for k in 0..3 {
        q[k] = ks_q_formula(&r, &p, k)?;
        pm[k] = ks_p_formula(&r, &p, k)?;
    }
    let s = flat::j_formula(&r, &p, 0)?;
    Ok(KSImage { reduced: ReducedPoint3::new(q, pm, s), s, source_energy: None })
}

/// Maximum deviation of the canonical brackets of the pulled-back coordinates
/// `q_i∘ks`, `p_j∘ks` from the twisted-structure values at the image point.
pub fn ks_bracket_residual(x: &PhasePoint4C, i: usize, j: usize) -> Result<f64> {
    if i > 2 || j > 2 {
        return Err(Error::Contract(format!("indices ({i}, {j}) out of range 0..3")));
    }
    let img = ks_map(x)?;
    let c = ks_coordinates();
    let r = x.to_real();
    let cc = PoissonStructure::CanonicalComplex;
    let q = img.reduced.q;
    let qn = img.reduced.q_norm();
    let eps_ijk = |a: usize, b: usize, k: usize| -> f64 {
        match (a, b, k) {
            (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
            (1, 0, 2) | (2, 1, 0) | (0, 2, 1) => -1.0,
            _ => 0.0,
        }
    };
    let pp_expected: f64 = (0..3).map(|k| img.s * eps_ijk(i, j, k) * q[k]).sum::<f64>() / qn.powi(3);
    let pp = poisson_bracket(c[3 + i].as_ref(), c[3 + j].as_ref(), &r, &cc)?;
    let pq = poisson_bracket(c[3 + i].as_ref(), c[j].as_ref(), &r, &cc)?;
    let qq = poisson_bracket(c[i].as_ref(), c[j].as_ref(), &r, &cc)?;
    let delta = if i == j { 1.0 } else { 0.0 };
    Ok((pp - pp_expected).abs().max((pq - delta).abs()).max(qq.abs()))
}

/// [`ks_bracket_residual`] maximized over all index pairs.
pub fn ks_bracket_max_residual(x: &PhasePoint4C) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            worst = worst.max(ks_bracket_residual(x, i, j)?);
        }
    }
    Ok(worst)
}

fn source_params(params: &SystemParams, source: Curvature) -> SystemParams {
    SystemParams { curvature: source, ..*params }
}

/// Energy of the source oscillator (anisotropic flat or anisotropic Higgs).
pub fn source_energy(x: &PhasePoint4C, params: &SystemParams, source: Curvature) -> Result<f64> {
    let p = source_params(params, source);
    match source {
        Curvature::Flat => flat::h_flat(x, &p, OscKind::Aniso),
        _ => curved::h_higgs_aniso(x, &p, HiggsKind::HiggsAniso),
    }
}

/// Target parameters on the level set `H_source = energy`, `J = s`:
/// `gamma = energy/2` and the source curvature kept as the sign of the target's
/// `cos theta` term.
pub fn target_params(params: &SystemParams, source: Curvature, energy: f64, s: f64) -> SystemParams {
    source_params(params, source).with_kepler(energy / 2.0, s)
}

/// Value the target Hamiltonian takes on the image of the level set:
/// `-omega^2/2` (flat source) or `-omega^2/2 - eps E/(2 r0)` (curved source).
pub fn target_energy(params: &SystemParams, source: Curvature, energy: f64) -> Result<f64> {
    let base = -params.omega * params.omega / 2.0;
    match source {
        Curvature::Flat => Ok(base),
        _ => {
            let p = source_params(params, source);
            Ok(base - p.eps()? * energy / (2.0 * p.r0()?))
        }
    }
}

fn target_hamiltonian(img: &ReducedPoint3, tp: &SystemParams, source: Curvature) -> Result<f64> {
    match source {
        Curvature::Flat => flat::h_micz_flat(img, tp),
        _ => curved::h_micz_curved(img, tp, MiczKind::Pseudo),
    }
}

/// `|H_target(ks(x)) - E_target|` on the level set fixed by `energy` and `s`
/// (which need not be the values at `x`).
pub fn level_residual_on(x: &PhasePoint4C, params: &SystemParams, source: Curvature, energy: f64, s: f64) -> Result<f64> {
    let mut img = ks_map(x)?.reduced;
    img.s = s;
    let tp = target_params(params, source, energy, s);
    Ok((target_hamiltonian(&img, &tp, source)? - target_energy(params, source, energy)?).abs())
}

/// Sets `E = H_source(x)`, `gamma = E/2`, `s = J(x)` and returns
/// `|H_target(ks(x)) - E_target|`.
pub fn ks_level_check(x: &PhasePoint4C, params: &SystemParams, source: Curvature) -> Result<f64> {
    let e = source_energy(x, params, source)?;
    let s = ks_map(x)?.s;
    level_residual_on(x, params, source, e, s)
}

/// Both sides of the observable reduction at one source state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservablePair {
    pub j3_source: f64,
    pub j3_target: f64,
    pub a_source: f64,
    /// Image of the target's hidden integral in the source normalization:
    /// `A_target` (flat) or `2 A_target - 2 eps s J3_target / r0` (curved).
    pub a_reduced: f64,
}

pub fn ks_observable_pair(x: &PhasePoint4C, params: &SystemParams, source: Curvature) -> Result<ObservablePair> {
    let sp = source_params(params, source);
    let r = x.to_real();
    let e = source_energy(x, params, source)?;
    let img = ks_map(x)?;
    let tp = target_params(params, source, e, img.s);
    let j3_source = flat::j_vec_formula(&r, &sp, 2)?;
    let (a_source, j3_target, a_reduced) = match source {
        Curvature::Flat => {
            let t = flat::micz_flat_observable_values(&img.reduced, &tp)?;
            (flat::a_hidden_formula(&r, &sp, 0)?, t["J3"], t["A_hidden"])
        }
        _ => {
            let t = curved::micz_curved_observable_values(&img.reduced, &tp, MiczKind::Pseudo)?;
            let red = 2.0 * t["A_hidden"] - 2.0 * sp.eps()? * img.s * t["J3"] / sp.r0()?;
            (curved::higgs_a_hidden_formula(&r, &sp, 0)?, t["J3"], red)
        }
    };
    Ok(ObservablePair { j3_source, j3_target, a_source, a_reduced })
}

/// Least-squares constant offset `kappa` in `A_source = A_reduced + kappa`
/// over a set of states.
pub fn fit_kappa(states: &[PhasePoint4C], params: &SystemParams, source: Curvature) -> Result<f64> {
    if states.is_empty() {
        return Err(Error::Contract("kappa fit needs at least one state".into()));
    }
    let mut acc = 0.0;
    for x in states {
        let pr = ks_observable_pair(x, params, source)?;
        acc += pr.a_source - pr.a_reduced;
    }
    Ok(acc / states.len() as f64)
}

/// `(|J3_source - n3.J_target|, |A_source - A_reduced - kappa|)`.
pub fn ks_observable_check(x: &PhasePoint4C, params: &SystemParams, source: Curvature, kappa: f64) -> Result<(f64, f64)> {
    let pr = ks_observable_pair(x, params, source)?;
    Ok(((pr.j3_source - pr.j3_target).abs(), (pr.a_source - pr.a_reduced - kappa).abs()))
}
