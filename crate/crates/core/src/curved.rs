//! Systems on the 4D sphere and pseudosphere, and the MICZ-Kepler-like
//! systems on the 3D (pseudo)sphere obtained from them.
//!
//! Dynamics always runs in the projective chart `z`; ambient coordinates
//! `(x, x0)` are only used for cross-checks of potentials.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bracket::{Obs, Observable};
use crate::dual::Scalar;
use crate::error::{Error, Result};
use crate::flat::{self, angular_momentum, cross, dot3, pipibar, q_norm_checked, split3, zs3, zzbar, OscKind};
use crate::observable;
use crate::pauli::{self, bilinear, conj, dot, unpack, C};
use crate::phase::{Curvature, PhasePoint4C, ReducedPoint3, SystemParams, SINGULAR_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HiggsKind {
    Higgs,
    HiggsAniso,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MiczKind {
    /// Pseudospherical target; the source curvature sign comes from the parameters.
    Pseudo,
    /// Spherical system given by the real part of the Wick-rotated Hamiltonian.
    Sphere,
}

fn guard(v: f64, what: &str) -> Result<()> {
    if v.abs() < SINGULAR_EPS || !v.is_finite() {
        return Err(Error::Domain(format!("{what} = {v:e} is within {SINGULAR_EPS:e} of zero")));
    }
    Ok(())
}

struct Chart<S> {
    r: S,
    eps: f64,
    big_r: f64,
}

/// `z zbar` plus the curvature data, with the chart's denominators checked.
fn chart<S: Scalar>(x: &[S], p: &SystemParams) -> Result<Chart<S>> {
    let eps = p.eps()?;
    let big_r = p.radius()?;
    let r = zzbar(x);
    let rv = r.value();
    if eps < 0.0 && rv >= 1.0 - SINGULAR_EPS {
        return Err(Error::Domain(format!("z zbar = {rv} outside the pseudosphere chart (needs < 1)")));
    }
    guard(1.0 - rv, "1 - z zbar")?;
    guard(1.0 + eps * rv, "1 + eps z zbar")?;
    Ok(Chart { r, eps, big_r })
}

fn one<S: Scalar>() -> S {
    S::one()
}

pub fn h_higgs_formula<S: Scalar>(x: &[S], p: &SystemParams, _: usize) -> Result<S> {
    let c = chart(x, p)?;
    let e = S::from_f64(c.eps);
    let r2 = c.big_r * c.big_r;
    let plus = one::<S>() + e * c.r;
    let minus = one::<S>() - e * c.r;
    Ok(plus * plus * pipibar(x) / S::from_f64(2.0 * r2) + S::from_f64(2.0 * p.omega * p.omega * r2) * c.r / (minus * minus))
}

/// `Lambda(z zbar)`, the profile multiplying `z sigma_3 zbar` in the anisotropic Higgs Hamiltonian.
pub fn lambda_profile<S: Scalar>(r: S, p: &SystemParams) -> Result<S> {
    let eps = p.eps()?;
    let r2 = p.r0()?;
    let e = S::from_f64(eps);
    let plus = one::<S>() + e * r;
    let minus = one::<S>() - e * r;
    let d = one::<S>() - r * r;
    Ok(S::from_f64(2.0 * r2 * p.delta_omega_sq) / (plus * plus)
        + S::from_f64(8.0 * p.eps_el * r2 * r2) * (one::<S>() + r * r) * r / (d * d * minus * minus))
}

pub fn h_higgs_aniso_formula<S: Scalar>(x: &[S], p: &SystemParams, _: usize) -> Result<S> {
    let h0 = h_higgs_formula(x, p, 0)?;
    if p.is_undeformed() {
        return Ok(h0);
    }
    Ok(h0 + zs3(x) * lambda_profile(zzbar(x), p)?)
}

fn translations<S: Scalar>(x: &[S], eps: f64) -> [C<S>; 2] {
    let (z, pi) = unpack(x);
    let r = zzbar(x);
    let e = S::from_f64(eps);
    let w = dot(&pi, &z) + dot(&conj(&pi), &conj(&z));
    let a = one::<S>() - e * r;
    [pi[0].scale(a) + (w * z[0].conj()).scale(e), pi[1].scale(a) + (w * z[1].conj()).scale(e)]
}

/// Real (`part = 0`) or imaginary (`part = 1`) part of the translation
/// generator `J_alpha`; `k = 2 alpha + part`.
pub fn translation_formula<S: Scalar>(x: &[S], p: &SystemParams, k: usize) -> Result<S> {
    chart(x, p)?;
    let t = translations(x, p.eps()?);
    let c = t[k / 2];
    Ok(if k.is_multiple_of(2) { c.re } else { c.im })
}

/// `A_k = (J sigma_k Jbar)/(2 R0^2) + 2 omega^2 R0^2 (zbar sigma_k z)/(1 - eps z zbar)^2`
pub fn higgs_a_vec_formula<S: Scalar>(x: &[S], p: &SystemParams, k: usize) -> Result<S> {
    let c = chart(x, p)?;
    let (z, _) = unpack(x);
    let t = translations(x, c.eps);
    let r2 = c.big_r * c.big_r;
    let minus = one::<S>() - S::from_f64(c.eps) * c.r;
    let kin = bilinear(&t, k, &conj(&t)).scale(S::from_f64(1.0 / (2.0 * r2)));
    let pot = bilinear(&conj(&z), k, &z).scale(S::from_f64(2.0 * p.omega * p.omega * r2) / (minus * minus));
    pauli::real_part(kin + pot, "curved A_vec")
}

/// `A_3 + 2 R0^2 dw r/(1 + eps r)^2 + 4 eps_el R0^4 [r^2/(1 - r^2)^2 + (z sigma_3 zbar)^2/(1 - eps r)^4]`
pub fn higgs_a_hidden_formula<S: Scalar>(x: &[S], p: &SystemParams, _: usize) -> Result<S> {
    let c = chart(x, p)?;
    let e = S::from_f64(c.eps);
    let r2 = c.big_r * c.big_r;
    let r = c.r;
    let plus = one::<S>() + e * r;
    let minus2 = (one::<S>() - e * r).sq();
    let d = one::<S>() - r * r;
    let z3 = zs3(x);
    Ok(higgs_a_vec_formula(x, p, 2)?
        + S::from_f64(2.0 * r2 * p.delta_omega_sq) * r / (plus * plus)
        + S::from_f64(4.0 * p.eps_el * r2 * r2) * (r * r / (d * d) + z3 * z3 / (minus2 * minus2)))
}

fn j_formula_checked<S: Scalar>(x: &[S], p: &SystemParams, k: usize) -> Result<S> {
    chart(x, p)?;
    flat::j_formula(x, p, k)
}

fn j_vec_formula_checked<S: Scalar>(x: &[S], p: &SystemParams, k: usize) -> Result<S> {
    chart(x, p)?;
    flat::j_vec_formula(x, p, k)
}

pub fn higgs_hamiltonian(params: SystemParams, kind: HiggsKind) -> Obs {
    match kind {
        HiggsKind::Higgs => observable!("H", params, h_higgs_formula),
        HiggsKind::HiggsAniso => observable!("H", params, h_higgs_aniso_formula),
    }
}

/// `J`, `J1..J3`, `A1..A3`, `A_hidden`, then the translation components
/// `Jtr1_re, Jtr1_im, Jtr2_re, Jtr2_im`.
pub fn higgs_observables(params: SystemParams) -> Vec<Obs> {
    let mut out = vec![observable!("J", params, j_formula_checked)];
    for k in 0..3 {
        out.push(observable!(format!("J{}", k + 1), params, k, j_vec_formula_checked));
    }
    for k in 0..3 {
        out.push(observable!(format!("A{}", k + 1), params, k, higgs_a_vec_formula));
    }
    out.push(observable!("A_hidden", params, higgs_a_hidden_formula));
    for (k, n) in ["Jtr1_re", "Jtr1_im", "Jtr2_re", "Jtr2_im"].iter().enumerate() {
        out.push(observable!(*n, params, k, translation_formula));
    }
    out
}

pub fn h_higgs_aniso(x: &PhasePoint4C, params: &SystemParams, kind: HiggsKind) -> Result<f64> {
    let r = x.to_real();
    match kind {
        HiggsKind::Higgs => h_higgs_formula(&r, params, 0),
        HiggsKind::HiggsAniso => h_higgs_aniso_formula(&r, params, 0),
    }
}

pub fn curved_oscillator_observables(x: &PhasePoint4C, params: &SystemParams) -> Result<BTreeMap<String, f64>> {
    let r = x.to_real();
    higgs_observables(*params).iter().map(|o| Ok((o.name().to_string(), o.eval_f64(&r)?))).collect()
}

/// Point of the ambient space `eps x xbar + x0^2 = R0^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbientPoint {
    pub x: [Complex64; 2],
    pub x0: f64,
}

impl AmbientPoint {
    /// `eps x xbar + x0^2 - R0^2`
    pub fn constraint_residual(&self, params: &SystemParams) -> Result<f64> {
        let eps = params.eps()?;
        let r2 = params.r0()?;
        let xx = self.x[0].norm_sqr() + self.x[1].norm_sqr();
        Ok(eps * xx + self.x0 * self.x0 - r2)
    }
}

pub fn to_ambient(z: &[Complex64; 2], params: &SystemParams) -> Result<AmbientPoint> {
    let eps = params.eps()?;
    let big_r = params.radius()?;
    let r = z[0].norm_sqr() + z[1].norm_sqr();
    if eps < 0.0 && r >= 1.0 - SINGULAR_EPS {
        return Err(Error::Domain(format!("z zbar = {r} outside the pseudosphere chart")));
    }
    let den = 1.0 + eps * r;
    guard(den, "1 + eps z zbar")?;
    Ok(AmbientPoint { x: [z[0] * (2.0 * big_r / den), z[1] * (2.0 * big_r / den)], x0: big_r * (1.0 - eps * r) / den })
}

pub fn from_ambient(a: &AmbientPoint, params: &SystemParams) -> Result<[Complex64; 2]> {
    let eps = params.eps()?;
    let big_r = params.radius()?;
    let res = a.constraint_residual(params)?;
    if res.abs() > 1e-10 * big_r * big_r {
        return Err(Error::Contract(format!("ambient constraint violated by {res:e}")));
    }
    if eps < 0.0 && a.x0 <= 0.0 {
        return Err(Error::Domain("x0 must lie on the upper sheet (x0 > 0)".into()));
    }
    let den = big_r + a.x0;
    if den < SINGULAR_EPS * big_r {
        return Err(Error::Domain("x0 = -R0 is the chart's point at infinity".into()));
    }
    Ok([a.x[0] / den, a.x[1] / den])
}

/// Anisotropy potential evaluated from ambient coordinates:
/// `(dw/2 + eps eps_el R0^2 (R0^4 - x0^4)/(4 x0^4)) x sigma_3 xbar`.
pub fn ambient_anisotropy(a: &AmbientPoint, params: &SystemParams) -> Result<f64> {
    let eps = params.eps()?;
    let r2 = params.r0()?;
    guard(a.x0, "x0")?;
    let x04 = a.x0.powi(4);
    let xs3 = a.x[0].norm_sqr() - a.x[1].norm_sqr();
    Ok((params.delta_omega_sq / 2.0 + eps * params.eps_el * r2 * (r2 * r2 - x04) / (4.0 * x04)) * xs3)
}

/// The same potential in chart coordinates, `(z sigma_3 zbar) Lambda(z zbar)`.
pub fn chart_anisotropy(z: &[Complex64; 2], params: &SystemParams) -> Result<f64> {
    let r = z[0].norm_sqr() + z[1].norm_sqr();
    let x = [z[0].re, z[0].im, z[1].re, z[1].im, 0.0, 0.0, 0.0, 0.0];
    chart(&x, params)?;
    Ok((z[0].norm_sqr() - z[1].norm_sqr()) * lambda_profile(r, params)?)
}

// Curved MICZ-Kepler-like systems on [q, p] with r0 = R0^2.

struct Reduced<S> {
    q: [S; 3],
    p: [S; 3],
    qn: S,
    q2: S,
    r0: f64,
}

fn reduced<S: Scalar>(x: &[S], params: &SystemParams, kind: MiczKind) -> Result<Reduced<S>> {
    let (q, p) = split3(x);
    let qn = q_norm_checked(&q)?;
    let q2 = dot3(&q, &q);
    if kind == MiczKind::Pseudo {
        let qv = q2.value();
        if qv >= 1.0 - SINGULAR_EPS {
            return Err(Error::Domain(format!("q^2 = {qv} outside the pseudosphere chart (needs < 1)")));
        }
    }
    Ok(Reduced { q, p, qn, q2, r0: params.r0()? })
}

pub fn h_micz_pseudo_formula<S: Scalar>(x: &[S], p: &SystemParams, _: usize) -> Result<S> {
    let eps = p.eps()?;
    let st = reduced(x, p, MiczKind::Pseudo)?;
    let (q2, qn, r0) = (st.q2, st.qn, st.r0);
    let e = S::from_f64(eps);
    let d = one::<S>() - q2;
    let kin = d * d / S::from_f64(8.0 * r0 * r0) * (dot3(&st.p, &st.p) + S::from_f64(p.s * p.s) / q2);
    let kep = S::from_f64(p.gamma / (2.0 * r0)) * (one::<S>() + q2) / qn;
    let ratio = (one::<S>() - e * qn) / (one::<S>() + e * qn);
    let cos_term = S::from_f64(p.delta_omega_sq / 2.0) * ratio * ratio * st.q[2] / qn;
    let lin = S::from_f64(2.0 * p.eps_el * r0) * (one::<S>() + q2) * st.q[2] / (d * d);
    Ok(kin - kep + cos_term + lin)
}

pub fn h_micz_sphere_formula<S: Scalar>(x: &[S], p: &SystemParams, _: usize) -> Result<S> {
    let st = reduced(x, p, MiczKind::Sphere)?;
    let (q2, qn, r0) = (st.q2, st.qn, st.r0);
    let u = one::<S>() + q2;
    let kin = u * u / S::from_f64(8.0 * r0 * r0) * (dot3(&st.p, &st.p) + S::from_f64(p.s * p.s) / q2);
    let kep = S::from_f64(p.gamma / (2.0 * r0)) * (one::<S>() - q2) / qn;
    let poly = one::<S>() - q2.scale(6.0) + q2 * q2;
    let cos_term = S::from_f64(p.delta_omega_sq / 2.0) * poly / (u * u) * st.q[2] / qn;
    let lin = S::from_f64(2.0 * p.eps_el * r0) * (one::<S>() - q2) * st.q[2] / (u * u);
    Ok(kin - kep + cos_term + lin)
}

/// Translation generator: `(1 + q^2) p - 2 (q.p) q` (pseudo) or
/// `(1 - q^2) p + 2 (q.p) q` (sphere).
fn translation3<S: Scalar>(st: &Reduced<S>, kind: MiczKind) -> [S; 3] {
    let qp = dot3(&st.q, &st.p);
    let (a, b) = match kind {
        MiczKind::Pseudo => (one::<S>() + st.q2, -qp.scale(2.0)),
        MiczKind::Sphere => (one::<S>() - st.q2, qp.scale(2.0)),
    };
    [a * st.p[0] + b * st.q[0], a * st.p[1] + b * st.q[1], a * st.p[2] + b * st.q[2]]
}

fn kind_of(k: usize) -> MiczKind {
    if k >= 100 {
        MiczKind::Sphere
    } else {
        MiczKind::Pseudo
    }
}

// The component index of the curved MICZ observables carries the variant:
// `k` for the pseudospherical system, `100 + k` for the spherical one.
const SPHERE: usize = 100;

pub fn micz_curved_j_formula<S: Scalar>(x: &[S], p: &SystemParams, k: usize) -> Result<S> {
    let st = reduced(x, p, kind_of(k))?;
    Ok(angular_momentum(&st.q, &st.p, p.s)?[k % SPHERE])
}

pub fn micz_curved_t_formula<S: Scalar>(x: &[S], p: &SystemParams, k: usize) -> Result<S> {
    let st = reduced(x, p, kind_of(k))?;
    Ok(translation3(&st, kind_of(k))[k % SPHERE])
}

/// `(J x T)/(2 r0) + gamma q/|q|`
pub fn micz_curved_rl_formula<S: Scalar>(x: &[S], p: &SystemParams, k: usize) -> Result<S> {
    let kind = kind_of(k);
    let st = reduced(x, p, kind)?;
    let j = angular_momentum(&st.q, &st.p, p.s)?;
    let t = translation3(&st, kind);
    let i = k % SPHERE;
    Ok(cross(&j, &t)[i] / S::from_f64(2.0 * st.r0) + S::from_f64(p.gamma) * st.q[i] / st.qn)
}

/// Pseudo: `RL_3 + r0 dw rho^2/((1 + eps q)^2 q) + 2 eps_el r0^2 rho^2/(1 - q^2)^2`.
/// Sphere: `RL_3 + dw r0 (1 - q^2) rho^2/(q (1 + q^2)^2) + 2 eps_el r0^2 rho^2/(1 + q^2)^2`.
pub fn micz_curved_a_hidden_formula<S: Scalar>(x: &[S], p: &SystemParams, k: usize) -> Result<S> {
    let kind = kind_of(k);
    let st = reduced(x, p, kind)?;
    let rho2 = st.q[0] * st.q[0] + st.q[1] * st.q[1];
    let r0 = st.r0;
    let rl3 = micz_curved_rl_formula(x, p, 2 + k - k % SPHERE)?;
    match kind {
        MiczKind::Pseudo => {
            let e = S::from_f64(p.eps()?);
            let plus = one::<S>() + e * st.qn;
            let d = one::<S>() - st.q2;
            Ok(rl3
                + S::from_f64(r0 * p.delta_omega_sq) * rho2 / (plus * plus * st.qn)
                + S::from_f64(2.0 * p.eps_el * r0 * r0) * rho2 / (d * d))
        }
        MiczKind::Sphere => {
            let u2 = (one::<S>() + st.q2).sq();
            Ok(rl3
                + S::from_f64(p.delta_omega_sq * r0) * (one::<S>() - st.q2) * rho2 / (st.qn * u2)
                + S::from_f64(2.0 * p.eps_el * r0 * r0) * rho2 / u2)
        }
    }
}

fn offset(kind: MiczKind) -> usize {
    match kind {
        MiczKind::Pseudo => 0,
        MiczKind::Sphere => SPHERE,
    }
}

pub fn micz_curved_hamiltonian(params: SystemParams, kind: MiczKind) -> Obs {
    match kind {
        MiczKind::Pseudo => observable!("H", params, h_micz_pseudo_formula),
        MiczKind::Sphere => observable!("H", params, h_micz_sphere_formula),
    }
}

/// `J1..J3`, `T1..T3`, `RL1..RL3`, `A_hidden`.
pub fn micz_curved_observables(params: SystemParams, kind: MiczKind) -> Vec<Obs> {
    let o = offset(kind);
    let mut out = Vec::new();
    for k in 0..3 {
        out.push(observable!(format!("J{}", k + 1), params, o + k, micz_curved_j_formula));
    }
    for k in 0..3 {
        out.push(observable!(format!("T{}", k + 1), params, o + k, micz_curved_t_formula));
    }
    for k in 0..3 {
        out.push(observable!(format!("RL{}", k + 1), params, o + k, micz_curved_rl_formula));
    }
    out.push(observable!("A_hidden", params, o, micz_curved_a_hidden_formula));
    out
}

/// Curved MICZ energy; the monopole charge is the point's `s`.
pub fn h_micz_curved(x: &ReducedPoint3, params: &SystemParams, kind: MiczKind) -> Result<f64> {
    let p = params.with_s(x.s);
    match kind {
        MiczKind::Pseudo => h_micz_pseudo_formula(&x.to_real(), &p, 0),
        MiczKind::Sphere => h_micz_sphere_formula(&x.to_real(), &p, 0),
    }
}

pub fn micz_curved_observable_values(x: &ReducedPoint3, params: &SystemParams, kind: MiczKind) -> Result<BTreeMap<String, f64>> {
    let r = x.to_real();
    micz_curved_observables(params.with_s(x.s), kind).iter().map(|o| Ok((o.name().to_string(), o.eval_f64(&r)?))).collect()
}

/// `|H_{eps=-1}(q; dw, eps_el) - H_{eps=+1}(q; dw, eps_el + 2 dw / r0)|`.
///
/// The two source-curvature variants of the pseudospherical MICZ system differ
/// only by a shift of the electric coupling.
pub fn reflection_residual(x: &ReducedPoint3, params: &SystemParams) -> Result<f64> {
    let r0 = params.r0()?;
    let minus = SystemParams { curvature: Curvature::Pseudosphere, ..*params };
    let plus = SystemParams { curvature: Curvature::Sphere, eps_el: params.eps_el + 2.0 * params.delta_omega_sq / r0, ..*params };
    Ok((h_micz_curved(x, &minus, MiczKind::Pseudo)? - h_micz_curved(x, &plus, MiczKind::Pseudo)?).abs())
}

/// One row of a flat-limit table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatLimitRow {
    pub radius: f64,
    /// `None` when the rescaled state leaves the chart or the reference energy vanishes.
    pub ratio: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatLimitTable {
    pub rows: Vec<FlatLimitRow>,
    /// Richardson estimate of the limit from the two largest radii.
    pub limit: Option<f64>,
    /// `|r(R_i) - c| / |r(R_{i+1}) - c|` for consecutive rows.
    pub deviation_ratios: Vec<Option<f64>>,
}

/// Scales a flat state `(u, w)` onto the chart of radius `R0`:
/// `z = u/(sqrt(2) R0)`, `pi = sqrt(2) R0 w`.
pub fn rescale_flat_state(x: &PhasePoint4C, radius: f64) -> PhasePoint4C {
    let k = std::f64::consts::SQRT_2 * radius;
    PhasePoint4C { z: [x.z[0] / k, x.z[1] / k], pi: [x.pi[0] * k, x.pi[1] * k] }
}

/// Ratio `H_higgs_aniso(z(R0), pi(R0)) / H_flat_aniso(u, w)` along a sequence of radii.
pub fn flat_limit_ratio(x: &PhasePoint4C, params: &SystemParams, radii: &[f64]) -> Result<FlatLimitTable> {
    params.eps()?;
    let href = flat::h_flat(x, &SystemParams { curvature: Curvature::Flat, ..*params }, OscKind::Aniso)?;
    let mut rows = Vec::with_capacity(radii.len());
    for &radius in radii {
        let p = SystemParams { r0_radius: radius, ..*params };
        let row = if href == 0.0 {
            FlatLimitRow { radius, ratio: None, note: Some("indeterminate: reference energy is zero".into()) }
        } else {
            match h_higgs_aniso(&rescale_flat_state(x, radius), &p, HiggsKind::HiggsAniso) {
                Ok(h) => FlatLimitRow { radius, ratio: Some(h / href), note: None },
                Err(e) => FlatLimitRow { radius, ratio: None, note: Some(e.to_string()) },
            }
        };
        rows.push(row);
    }
    let n = rows.len();
    let limit = if n >= 2 {
        match (rows[n - 2].ratio, rows[n - 1].ratio) {
            (Some(a), Some(b)) => {
                let k = (rows[n - 1].radius / rows[n - 2].radius).powi(2);
                Some(b + (b - a) / (k - 1.0))
            }
            _ => None,
        }
    } else {
        None
    };
    let deviation_ratios = rows
        .windows(2)
        .map(|w| match (w[0].ratio, w[1].ratio, limit) {
            (Some(a), Some(b), Some(c)) if b != c => Some((a - c).abs() / (b - c).abs()),
            _ => None,
        })
        .collect();
    Ok(FlatLimitTable { rows, limit, deviation_ratios })
}

/// Conformal factor of `ds^2 = 4 r0^2 dq^2/(1 - q^2)^2`.
fn conformal(q: &[f64; 3], r0: f64) -> f64 {
    2.0 * r0 / (1.0 - (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]))
}

/// Second-order flux-form finite-difference Laplace-Beltrami operator of the
/// pseudosphere chart, applied to a function of `q` (evaluated on `[q1, q2, q3]`).
pub fn laplace_beltrami_residual(v: &dyn Observable, q: &[f64; 3], r0: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Contract(format!("step must be positive, got {h}")));
    }
    let qn = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
    if qn * qn >= 1.0 - 10.0 * h {
        return Err(Error::Domain(format!("stencil at |q| = {qn} crosses the chart boundary")));
    }
    if qn <= 10.0 * h {
        return Err(Error::Domain(format!("stencil at |q| = {qn} reaches the origin")));
    }
    let at = |d: usize, t: f64| {
        let mut y = *q;
        y[d] += t;
        y
    };
    let v0 = v.eval_f64(q)?;
    let mut acc = 0.0;
    for d in 0..3 {
        let vp = v.eval_f64(&at(d, h))?;
        let vm = v.eval_f64(&at(d, -h))?;
        let lp = conformal(&at(d, h / 2.0), r0);
        let lm = conformal(&at(d, -h / 2.0), r0);
        acc += lp * (vp - v0) - lm * (v0 - vm);
    }
    Ok(acc / (h * h * conformal(q, r0).powi(3)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplaceEstimate {
    pub steps: Vec<f64>,
    pub values: Vec<f64>,
    pub extrapolated: f64,
}

/// Richardson extrapolation of [`laplace_beltrami_residual`] over steps that
/// halve successively (`h, h/2, h/4, ...`), assuming an even error expansion.
pub fn laplace_beltrami_extrapolated(v: &dyn Observable, q: &[f64; 3], r0: f64, steps: &[f64]) -> Result<LaplaceEstimate> {
    if steps.is_empty() {
        return Err(Error::Contract("no steps given".into()));
    }
    for w in steps.windows(2) {
        if (w[0] / w[1] - 2.0).abs() > 1e-12 {
            return Err(Error::Contract("steps must halve successively".into()));
        }
    }
    let values = steps.iter().map(|&h| laplace_beltrami_residual(v, q, r0, h)).collect::<Result<Vec<_>>>()?;
    let mut table = values.clone();
    let mut factor = 4.0;
    while table.len() > 1 {
        table = table.windows(2).map(|w| (factor * w[1] - w[0]) / (factor - 1.0)).collect();
        factor *= 4.0;
    }
    Ok(LaplaceEstimate { steps: steps.to_vec(), values, extrapolated: table[0] })
}

fn q_only<S: Scalar>(x: &[S]) -> Result<([S; 3], S, S)> {
    let q = [x[0], x[1], x[2]];
    let qn = q_norm_checked(&q)?;
    Ok((q, qn, dot3(&q, &q)))
}

/// `-gamma (1 + q^2)/(2 r0 q)` on `[q1, q2, q3]`.
pub fn kepler_potential_formula<S: Scalar>(x: &[S], p: &SystemParams, _: usize) -> Result<S> {
    let (_, qn, q2) = q_only(x)?;
    Ok(-S::from_f64(p.gamma / (2.0 * p.r0()?)) * (one::<S>() + q2) / qn)
}

/// `eps_el x0 x3 / r0 = 2 eps_el r0 (1 + q^2) q3/(1 - q^2)^2` on `[q1, q2, q3]`.
pub fn linear_potential_formula<S: Scalar>(x: &[S], p: &SystemParams, _: usize) -> Result<S> {
    let (q, _, q2) = q_only(x)?;
    let d = one::<S>() - q2;
    Ok(S::from_f64(2.0 * p.eps_el * p.r0()?) * (one::<S>() + q2) * q[2] / (d * d))
}

pub fn kepler_potential(params: SystemParams) -> Obs {
    observable!("V_kepler", params, kepler_potential_formula)
}

pub fn linear_potential(params: SystemParams) -> Obs {
    observable!("V_linear", params, linear_potential_formula)
}
