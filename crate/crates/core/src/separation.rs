//! Generalized parabolic coordinates on the pseudosphere chart and the
//! separation of the pseudospherical MICZ-Kepler-like system.
//!
//! The chart is
//!
//! ```text
//! chi = asinh(xi/r0), zeta = asinh(eta/r0)
//! x0 = r0 cosh((chi + zeta)/2), x3 = r0 sinh((chi - zeta)/2), rho = sqrt(xi eta)
//! q = (rho cos phi, rho sin phi, x3)/(r0 + x0)
//! ```
//!
//! with metric `r0^2 (xi + eta)/4 (dxi^2/(xi (r0^2 + xi^2)) + deta^2/(eta (r0^2 + eta^2))) + xi eta dphi^2`.
//! The azimuthal momentum is taken in the gauge with the Dirac string on the
//! negative `q3` axis: `p_phi = (q x p)_3 - s (1 - q3/|q|)`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::bracket::Obs;
use crate::dual::{Dual, Scalar};
use crate::error::{Error, Result};
use crate::flat::{dot3, q_norm_checked, split3};
use crate::observable;
use crate::phase::{ReducedPoint3, SystemParams, SINGULAR_EPS};

/// Smallest `xi`, `eta` accepted by the momentum transform.
pub const PARABOLIC_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolicCoords {
    pub xi: f64,
    pub eta: f64,
    pub phi: f64,
    /// The point lies on the `q3` axis, where `phi` is undefined (reported as 0).
    pub axis_degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolicState {
    pub xi: f64,
    pub eta: f64,
    pub phi: f64,
    pub p_xi: f64,
    pub p_eta: f64,
    pub p_phi: f64,
    pub chi: f64,
    pub zeta: f64,
}

impl ParabolicState {
    pub fn new(xi: f64, eta: f64, phi: f64, p_xi: f64, p_eta: f64, p_phi: f64, r0: f64) -> Self {
        ParabolicState { xi, eta, phi, p_xi, p_eta, p_phi, chi: (xi / r0).asinh(), zeta: (eta / r0).asinh() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationRecord {
    /// Left-hand side of the `xi` equation.
    pub beta_xi: f64,
    /// Minus the left-hand side of the `eta` equation.
    pub beta_eta: f64,
    pub energy: f64,
    /// `|beta_xi - beta_eta|`
    pub consistency: f64,
}

fn chart_q<S: Scalar>(xi: S, eta: S, phi: S, r0: f64) -> [S; 3] {
    let r = S::from_f64(r0);
    let chi = (xi / r).asinh();
    let zeta = (eta / r).asinh();
    let half = S::from_f64(0.5);
    let x0 = r * ((chi + zeta) * half).cosh();
    let x3 = r * ((chi - zeta) * half).sinh();
    let rho = (xi * eta).sqrt();
    let d = r + x0;
    [rho * phi.cos() / d, rho * phi.sin() / d, x3 / d]
}

/// `(xi, eta)` of a chart point; requires `q^2 < 1`.
fn chart_xi_eta<S: Scalar>(q: &[S; 3], r0: f64) -> (S, S) {
    let q2 = dot3(q, q);
    let psi = q2.sqrt().atanh().scale(2.0);
    let a = (q[2].scale(2.0) / (S::one() - q2)).asinh();
    let r = S::from_f64(r0);
    (r * (psi + a).sinh(), r * (psi - a).sinh())
}

fn check_r0(r0: f64) -> Result<()> {
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(Error::Params(format!("r0 must be positive, got {r0}")));
    }
    Ok(())
}

fn check_chart<S: Scalar>(q: &[S; 3]) -> Result<()> {
    let q2 = dot3(q, q).value();
    if !(q2 < 1.0 - SINGULAR_EPS) {
        return Err(Error::Domain(format!("q^2 = {q2} outside the pseudosphere chart")));
    }
    Ok(())
}

pub fn to_parabolic(q: &[f64; 3], r0: f64) -> Result<ParabolicCoords> {
    check_r0(r0)?;
    check_chart(q)?;
    let (xi, eta) = chart_xi_eta(q, r0);
    // Rounding can push the vanishing coordinate of an axis point slightly negative.
    let (xi, eta) = (xi.max(0.0), eta.max(0.0));
    let axis_degenerate = q[0] == 0.0 && q[1] == 0.0;
    let phi = if axis_degenerate { 0.0 } else { q[1].atan2(q[0]).rem_euclid(TAU) };
    Ok(ParabolicCoords { xi, eta, phi, axis_degenerate })
}

pub fn from_parabolic(xi: f64, eta: f64, phi: f64, r0: f64) -> Result<[f64; 3]> {
    check_r0(r0)?;
    if !(xi >= 0.0 && eta >= 0.0) {
        return Err(Error::Domain(format!("parabolic coordinates must be non-negative, got ({xi}, {eta})")));
    }
    Ok(chart_q(xi, eta, phi, r0))
}

/// `(xi, eta, phi, p_xi, p_eta, p_phi)` at any scalar level, with `s` from the parameters.
fn canonical<S: Scalar>(x: &[S], r0: f64, s: f64) -> Result<[S; 6]> {
    let (q, p) = split3(x);
    let qn = q_norm_checked(&q)?;
    check_chart(&q)?;
    let rho2 = (q[0] * q[0] + q[1] * q[1]).value();
    if rho2 <= 1e-20 {
        return Err(Error::Degenerate(format!("rho^2 = {rho2:e}: phi is undefined on the axis")));
    }
    let (xi, eta) = chart_xi_eta(&q, r0);
    if xi.value() <= PARABOLIC_EPS || eta.value() <= PARABOLIC_EPS {
        return Err(Error::Degenerate(format!("xi = {:e}, eta = {:e} at the coordinate singularity", xi.value(), eta.value())));
    }
    let phi = q[1].atan2(q[0]);
    // p_u = sum_i p_i dq_i/du, with dq/du from dual numbers through the forward chart.
    let col = |which: usize| -> [S; 3] {
        let mut u = [Dual::constant(xi), Dual::constant(eta), Dual::constant(phi)];
        u[which].d = S::one();
        let qd = chart_q(u[0], u[1], u[2], r0);
        [qd[0].d, qd[1].d, qd[2].d]
    };
    let p_xi = dot3(&col(0), &p);
    let p_eta = dot3(&col(1), &p);
    let l3 = q[0] * p[1] - q[1] * p[0];
    let p_phi = l3 - S::from_f64(s) * (S::one() - q[2] / qn);
    Ok([xi, eta, phi, p_xi, p_eta, p_phi])
}

pub fn parabolic_momenta(x: &ReducedPoint3, r0: f64) -> Result<ParabolicState> {
    check_r0(r0)?;
    let c = canonical(&x.to_real(), r0, x.s)?;
    Ok(ParabolicState::new(c[0], c[1], c[2].rem_euclid(TAU), c[3], c[4], c[5], r0))
}

struct Couplings {
    r0: f64,
    eps: f64,
    s: f64,
    gamma: f64,
    dw: f64,
    el: f64,
}

fn couplings(p: &SystemParams) -> Result<Couplings> {
    Ok(Couplings { r0: p.r0()?, eps: p.eps()?, s: p.s, gamma: p.gamma, dw: p.delta_omega_sq, el: p.eps_el })
}

fn hamiltonian<S: Scalar>(xi: S, eta: S, pxi: S, peta: S, pphi: S, c: &Couplings) -> S {
    let f = S::from_f64;
    let r0 = f(c.r0);
    let r02 = f(c.r0 * c.r0);
    let sx = (r02 + xi * xi).sqrt();
    let se = (r02 + eta * eta).sqrt();
    let sum = xi + eta;
    let kin = (xi * (r02 + xi * xi) * pxi * pxi + eta * (r02 + eta * eta) * peta * peta).scale(2.0) / (r02 * sum)
        + pphi * pphi / (xi * eta).scale(2.0);
    let mono = (f(c.s) * pphi + f(c.s * c.s)) / (r0 * sum) * ((r0 + sx) / xi + (r0 - se) / eta);
    let cos_term = f(c.dw / (2.0 * c.r0)) * (xi * sx - eta * se - f(c.eps) * (xi * xi - eta * eta)) / sum;
    let kep = f(c.gamma / c.r0) * (sx + se) / sum;
    let lin = f(c.el / 2.0) * (xi - eta);
    kin + mono + cos_term - kep + lin
}

/// Left-hand side of the `xi` equation with `(dS1/dxi)^2 -> p_xi^2`.
fn lhs_xi<S: Scalar>(xi: S, pxi: S, pphi: S, e: S, c: &Couplings) -> S {
    let f = S::from_f64;
    let r0 = f(c.r0);
    let r02 = f(c.r0 * c.r0);
    let sx = (r02 + xi * xi).sqrt();
    (xi * (r02 + xi * xi) * pxi * pxi).scale(2.0) / r02
        + (f(c.s) * pphi + f(c.s * c.s)) * (r0 + sx) / (r0 * xi)
        + f(c.dw / (2.0 * c.r0)) * (xi * sx - f(c.eps) * xi * xi)
        - f(c.gamma / c.r0) * sx
        + f(c.el / 2.0) * xi * xi
        - e * xi
        + pphi * pphi / xi.scale(2.0)
}

/// Left-hand side of the `eta` equation; it equals `-beta` on shell.
fn lhs_eta<S: Scalar>(eta: S, peta: S, pphi: S, e: S, c: &Couplings) -> S {
    let f = S::from_f64;
    let r0 = f(c.r0);
    let r02 = f(c.r0 * c.r0);
    let se = (r02 + eta * eta).sqrt();
    (eta * (r02 + eta * eta) * peta * peta).scale(2.0) / r02 + (f(c.s) * pphi + f(c.s * c.s)) * (r0 - se) / (r0 * eta)
        - f(c.dw / (2.0 * c.r0)) * (eta * se - f(c.eps) * eta * eta)
        - f(c.gamma / c.r0) * se
        - f(c.el / 2.0) * eta * eta
        - e * eta
        + pphi * pphi / eta.scale(2.0)
}

fn check_positive(ps: &ParabolicState) -> Result<()> {
    if !(ps.xi > PARABOLIC_EPS && ps.eta > PARABOLIC_EPS) {
        return Err(Error::Domain(format!("xi = {:e}, eta = {:e} must be positive", ps.xi, ps.eta)));
    }
    Ok(())
}

/// The pseudospherical MICZ Hamiltonian in parabolic coordinates.
pub fn h_micz_parabolic(ps: &ParabolicState, params: &SystemParams) -> Result<f64> {
    check_positive(ps)?;
    let c = couplings(params)?;
    Ok(hamiltonian(ps.xi, ps.eta, ps.p_xi, ps.p_eta, ps.p_phi, &c))
}

/// Relative tolerance on `|E - H(ps)|` accepted as on shell.
pub const ON_SHELL_TOL: f64 = 1e-9;

fn check_on_shell(ps: &ParabolicState, params: &SystemParams, e: f64) -> Result<Couplings> {
    let h = h_micz_parabolic(ps, params)?;
    if (e - h).abs() > ON_SHELL_TOL * e.abs().max(1.0) {
        return Err(Error::Contract(format!("energy {e} is off shell (H = {h})")));
    }
    couplings(params)
}

pub fn separation_constant(ps: &ParabolicState, params: &SystemParams, e: f64) -> Result<SeparationRecord> {
    let c = check_on_shell(ps, params, e)?;
    let beta_xi = lhs_xi(ps.xi, ps.p_xi, ps.p_phi, e, &c);
    let beta_eta = -lhs_eta(ps.eta, ps.p_eta, ps.p_phi, e, &c);
    Ok(SeparationRecord { beta_xi, beta_eta, energy: e, consistency: (beta_xi - beta_eta).abs() })
}

/// Residuals of the separated equations in the hyperbolic variables
/// `xi = r0 sinh chi`, `eta = r0 sinh zeta`, with `p_chi = r0 cosh(chi) p_xi`.
pub fn hj_residual_chi_zeta(ps: &ParabolicState, params: &SystemParams, e: f64, beta: f64) -> Result<(f64, f64)> {
    let c = check_on_shell(ps, params, e)?;
    let (sc, sz) = (ps.chi.sinh(), ps.zeta.sinh());
    if sc.abs() < SINGULAR_EPS || sz.abs() < SINGULAR_EPS {
        return Err(Error::Domain(format!("chi = {:e}, zeta = {:e} at the coordinate singularity", ps.chi, ps.zeta)));
    }
    let (r0, sp) = (c.r0, c.s * ps.p_phi + c.s * c.s);
    let pp2 = ps.p_phi * ps.p_phi;
    let p_chi = r0 * ps.chi.cosh() * ps.p_xi;
    let p_zeta = r0 * ps.zeta.cosh() * ps.p_eta;
    let rhs_chi =
        beta * r0 / (2.0 * sc) - sp * (1.0 + ps.chi.cosh()) / (2.0 * sc * sc) - c.dw * r0 * r0 / 4.0 * (ps.chi.cosh() - c.eps * sc)
            + c.gamma * r0 / 2.0 * ps.chi.cosh() / sc
            - c.el * r0.powi(3) * sc / 4.0
            + e * r0 * r0 / 2.0
            - pp2 / (4.0 * sc * sc);
    let rhs_zeta = -beta * r0 / (2.0 * sz) - sp * (1.0 - ps.zeta.cosh()) / (2.0 * sz * sz)
        + c.dw * r0 * r0 / 4.0 * (ps.zeta.cosh() - c.eps * sz)
        + c.gamma * r0 / 2.0 * ps.zeta.cosh() / sz
        + c.el * r0.powi(3) * sz / 4.0
        + e * r0 * r0 / 2.0
        - pp2 / (4.0 * sz * sz);
    Ok(((p_chi * p_chi - rhs_chi).abs(), (p_zeta * p_zeta - rhs_zeta).abs()))
}

// Observables on the reduced phase space [q, p] (twisted structure).

/// Component `k` of `(xi, eta, phi, p_xi, p_eta, p_phi)`.
pub fn parabolic_component_formula<S: Scalar>(x: &[S], p: &SystemParams, k: usize) -> Result<S> {
    Ok(canonical(x, p.r0()?, p.s)?[k])
}

/// Separation constant as a phase-space function, with `E` the pseudospherical
/// MICZ energy at the same point.
pub fn beta_formula<S: Scalar>(x: &[S], p: &SystemParams, _: usize) -> Result<S> {
    let c = couplings(p)?;
    let u = canonical(x, c.r0, c.s)?;
    let e = hamiltonian(u[0], u[1], u[3], u[4], u[5], &c);
    Ok(lhs_xi(u[0], u[3], u[5], e, &c))
}

/// The pseudospherical MICZ Hamiltonian evaluated through the parabolic chart.
pub fn h_parabolic_formula<S: Scalar>(x: &[S], p: &SystemParams, _: usize) -> Result<S> {
    let c = couplings(p)?;
    let u = canonical(x, c.r0, c.s)?;
    Ok(hamiltonian(u[0], u[1], u[3], u[4], u[5], &c))
}

pub fn beta_observable(params: SystemParams) -> Obs {
    observable!("beta", params, beta_formula)
}

pub fn p_phi_observable(params: SystemParams) -> Obs {
    observable!("p_phi", params, 5, parabolic_component_formula)
}

/// `xi, eta, phi, p_xi, p_eta, p_phi` as observables on `[q, p]`.
pub fn parabolic_coordinates(params: SystemParams) -> Vec<Obs> {
    ["xi", "eta", "phi", "p_xi", "p_eta", "p_phi"]
        .iter()
        .enumerate()
        .map(|(k, n)| observable!(*n, params, k, parabolic_component_formula))
        .collect()
}
