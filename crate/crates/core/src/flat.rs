//! Euclidean systems: the isotropic and anisotropic inharmonic 4D oscillator,
//! and the MICZ-Kepler system with linear and `cos theta` potentials.

use std::collections::BTreeMap;

use crate::bracket::Obs;
use crate::dual::Scalar;
use crate::error::{Error, Result};
use crate::observable;
use crate::pauli::{self, bilinear, conj, dot, times_i, unpack};
use crate::phase::{PhasePoint4C, ReducedPoint3, SystemParams, SINGULAR_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OscKind {
    Iso,
    Aniso,
}

/// `z sigma_3 zbar`
pub(crate) fn zs3<S: Scalar>(x: &[S]) -> S {
    x[0] * x[0] + x[1] * x[1] - x[2] * x[2] - x[3] * x[3]
}

pub(crate) fn zzbar<S: Scalar>(x: &[S]) -> S {
    x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]
}

pub(crate) fn pipibar<S: Scalar>(x: &[S]) -> S {
    x[4] * x[4] + x[5] * x[5] + x[6] * x[6] + x[7] * x[7]
}

fn omega2<S: Scalar>(p: &SystemParams) -> S {
    S::from_f64(p.omega * p.omega)
}

pub fn h_iso_formula<S: Scalar>(x: &[S], p: &SystemParams, _: usize) -> Result<S> {
    Ok(pipibar(x) + omega2::<S>(p) * zzbar(x))
}

pub fn h_aniso_formula<S: Scalar>(x: &[S], p: &SystemParams, _: usize) -> Result<S> {
    let r = zzbar(x);
    let deform = S::from_f64(p.delta_omega_sq) + S::from_f64(2.0 * p.eps_el) * r;
    Ok(h_iso_formula(x, p, 0)? + deform * zs3(x))
}

/// U(1) generator `J = (i/2)(pi z - zbar pibar)`.
pub fn j_formula<S: Scalar>(x: &[S], _: &SystemParams, _: usize) -> Result<S> {
    let (z, pi) = unpack(x);
    let c = dot(&pi, &z);
    let v = times_i(c - c.conj()).scale(S::from_f64(0.5));
    pauli::real_part(v, "J")
}

/// Rotation generators `J_k = (i/2)(pi sigma_k z - zbar sigma_k pibar)`.
pub fn j_vec_formula<S: Scalar>(x: &[S], _: &SystemParams, k: usize) -> Result<S> {
    let (z, pi) = unpack(x);
    let v = times_i(bilinear(&pi, k, &z) - bilinear(&conj(&z), k, &conj(&pi))).scale(S::from_f64(0.5));
    pauli::real_part(v, "J_vec")
}

/// Hidden-symmetry vector `A_k = (pi sigma_k pibar + omega^2 zbar sigma_k z)/2`.
pub fn a_vec_formula<S: Scalar>(x: &[S], p: &SystemParams, k: usize) -> Result<S> {
    let (z, pi) = unpack(x);
    let v = (bilinear(&pi, k, &conj(&pi)) + bilinear(&conj(&z), k, &z).scale(omega2::<S>(p))).scale(S::from_f64(0.5));
    pauli::real_part(v, "A_vec")
}

/// `A_3 + (dw/2) z zbar + (eps_el/2)((z zbar)^2 + (z sigma_3 zbar)^2)`
pub fn a_hidden_formula<S: Scalar>(x: &[S], p: &SystemParams, _: usize) -> Result<S> {
    let r = zzbar(x);
    let z3 = zs3(x);
    Ok(a_vec_formula(x, p, 2)? + S::from_f64(p.delta_omega_sq / 2.0) * r + S::from_f64(p.eps_el / 2.0) * (r * r + z3 * z3))
}

pub fn osc_hamiltonian(params: SystemParams, kind: OscKind) -> Obs {
    match kind {
        OscKind::Iso => observable!("H", params, h_iso_formula),
        OscKind::Aniso => observable!("H", params, h_aniso_formula),
    }
}

/// `J`, `J1..J3`, `A1..A3`, `A_hidden`, in that order.
pub fn osc_observables(params: SystemParams) -> Vec<Obs> {
    let mut out = vec![observable!("J", params, j_formula)];
    for k in 0..3 {
        out.push(observable!(format!("J{}", k + 1), params, k, j_vec_formula));
    }
    for k in 0..3 {
        out.push(observable!(format!("A{}", k + 1), params, k, a_vec_formula));
    }
    out.push(observable!("A_hidden", params, a_hidden_formula));
    out
}

pub fn h_flat(x: &PhasePoint4C, params: &SystemParams, kind: OscKind) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain("non-finite oscillator state".into()));
    }
    let r = x.to_real();
    match kind {
        OscKind::Iso => h_iso_formula(&r, params, 0),
        OscKind::Aniso => h_aniso_formula(&r, params, 0),
    }
}

pub fn flat_oscillator_observables(x: &PhasePoint4C, params: &SystemParams) -> Result<BTreeMap<String, f64>> {
    let r = x.to_real();
    osc_observables(*params).iter().map(|o| Ok((o.name().to_string(), o.eval_f64(&r)?))).collect()
}

// Reduced three-dimensional systems share these vector helpers.

pub(crate) fn split3<S: Scalar>(x: &[S]) -> ([S; 3], [S; 3]) {
    ([x[0], x[1], x[2]], [x[3], x[4], x[5]])
}

pub(crate) fn dot3<S: Scalar>(a: &[S; 3], b: &[S; 3]) -> S {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross<S: Scalar>(a: &[S; 3], b: &[S; 3]) -> [S; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// `|q|`, refusing the origin.
pub(crate) fn q_norm_checked<S: Scalar>(q: &[S; 3]) -> Result<S> {
    let r = dot3(q, q).sqrt();
    if !(r.value() >= SINGULAR_EPS) {
        return Err(Error::Singularity(format!("|q| = {:e} at the Coulomb/monopole centre", r.value())));
    }
    Ok(r)
}

/// `J = q x p + s q/|q|`
pub(crate) fn angular_momentum<S: Scalar>(q: &[S; 3], p: &[S; 3], s: f64) -> Result<[S; 3]> {
    let r = q_norm_checked(q)?;
    let l = cross(q, p);
    let k = S::from_f64(s) / r;
    Ok([l[0] + k * q[0], l[1] + k * q[1], l[2] + k * q[2]])
}

pub fn h_micz_flat_formula<S: Scalar>(x: &[S], p: &SystemParams, _: usize) -> Result<S> {
    let (q, pm) = split3(x);
    let r = q_norm_checked(&q)?;
    let s2 = S::from_f64(p.s * p.s);
    Ok(dot3(&pm, &pm).scale(0.5) + s2 / (r * r).scale(2.0) - S::from_f64(p.gamma) / r
        + S::from_f64(p.delta_omega_sq / 2.0) * q[2] / r
        + S::from_f64(p.eps_el) * q[2])
}

pub fn micz_j_formula<S: Scalar>(x: &[S], p: &SystemParams, k: usize) -> Result<S> {
    let (q, pm) = split3(x);
    Ok(angular_momentum(&q, &pm, p.s)?[k])
}

/// Runge-Lenz vector `J x p + gamma q/|q|`.
pub fn micz_rl_formula<S: Scalar>(x: &[S], p: &SystemParams, k: usize) -> Result<S> {
    let (q, pm) = split3(x);
    let j = angular_momentum(&q, &pm, p.s)?;
    let r = q_norm_checked(&q)?;
    Ok(cross(&j, &pm)[k] + S::from_f64(p.gamma) * q[k] / r)
}

/// `RL_3 + (eps_el/2) rho^2 + (dw/2) rho^2/|q|`, `rho^2 = q1^2 + q2^2`.
pub fn micz_a_hidden_formula<S: Scalar>(x: &[S], p: &SystemParams, _: usize) -> Result<S> {
    let (q, _) = split3(x);
    let r = q_norm_checked(&q)?;
    let rho2 = q[0] * q[0] + q[1] * q[1];
    Ok(micz_rl_formula(x, p, 2)? + S::from_f64(p.eps_el / 2.0) * rho2 + S::from_f64(p.delta_omega_sq / 2.0) * rho2 / r)
}

pub fn micz_flat_hamiltonian(params: SystemParams) -> Obs {
    observable!("H", params, h_micz_flat_formula)
}

/// `J1..J3`, `RL1..RL3`, `A_hidden`. The charge is taken from `params.s`.
pub fn micz_flat_observables(params: SystemParams) -> Vec<Obs> {
    let mut out = Vec::new();
    for k in 0..3 {
        out.push(observable!(format!("J{}", k + 1), params, k, micz_j_formula));
    }
    for k in 0..3 {
        out.push(observable!(format!("RL{}", k + 1), params, k, micz_rl_formula));
    }
    out.push(observable!("A_hidden", params, micz_a_hidden_formula));
    out
}

/// Flat MICZ energy; the monopole charge is the point's `s`.
pub fn h_micz_flat(x: &ReducedPoint3, params: &SystemParams) -> Result<f64> {
    h_micz_flat_formula(&x.to_real(), &params.with_s(x.s), 0)
}

pub fn micz_flat_observable_values(x: &ReducedPoint3, params: &SystemParams) -> Result<BTreeMap<String, f64>> {
    let r = x.to_real();
    micz_flat_observables(params.with_s(x.s)).iter().map(|o| Ok((o.name().to_string(), o.eval_f64(&r)?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;

    fn pt(z: [(f64, f64); 2], pi: [(f64, f64); 2]) -> PhasePoint4C {
        PhasePoint4C::new([C64::new(z[0].0, z[0].1), C64::new(z[1].0, z[1].1)], [C64::new(pi[0].0, pi[0].1), C64::new(pi[1].0, pi[1].1)])
    }

    #[test]
    fn oscillator_energies() {
        let o = pt([(0.0, 0.0); 2], [(0.0, 0.0); 2]);
        assert_eq!(h_flat(&o, &SystemParams::flat(1.0, 0.0, 0.0), OscKind::Iso).unwrap(), 0.0);
        let x = pt([(1.0, 0.0), (0.0, 0.0)], [(0.0, 0.0); 2]);
        assert_eq!(h_flat(&x, &SystemParams::flat(2.0, 0.0, 0.0), OscKind::Iso).unwrap(), 4.0);
        assert_eq!(h_flat(&x, &SystemParams::flat(1.0, 0.5, 0.25), OscKind::Aniso).unwrap(), 2.0);
    }

    #[test]
    fn oscillator_observables_at_simple_points() {
        let p = SystemParams::flat(1.0, 0.0, 0.0);
        let o = flat_oscillator_observables(&pt([(0.0, 0.0); 2], [(0.0, 0.0); 2]), &p).unwrap();
        assert!(o.values().all(|v| *v == 0.0));
        let x = pt([(1.0, 0.0), (0.0, 0.0)], [(0.0, 0.0); 2]);
        let o = flat_oscillator_observables(&x, &p).unwrap();
        assert_eq!(o["A_hidden"], 0.5);
        assert_eq!(o["A3"], 0.5);
        let y = pt([(1.0, 0.0), (0.0, 0.0)], [(0.0, 1.0), (0.0, 0.0)]);
        assert_eq!(flat_oscillator_observables(&y, &p).unwrap()["J"], -1.0);
    }

    #[test]
    fn micz_energies() {
        let q = ReducedPoint3::new([0.0, 0.0, 1.0], [0.0; 3], 0.0);
        let kep = SystemParams::flat(1.0, 0.0, 0.0).with_kepler(1.0, 0.0);
        assert_eq!(h_micz_flat(&q, &kep).unwrap(), -1.0);
        let mono = ReducedPoint3 { s: 1.0, ..q };
        assert_eq!(h_micz_flat(&mono, &SystemParams::flat(1.0, 0.0, 0.0)).unwrap(), 0.5);
        assert_eq!(h_micz_flat(&q, &SystemParams::flat(0.0, 0.0, 0.0)).unwrap(), 0.0);
        let origin = ReducedPoint3::new([0.0; 3], [0.1; 3], 0.0);
        assert!(matches!(h_micz_flat(&origin, &kep), Err(Error::Singularity(_))));
    }

    #[test]
    fn micz_observables_on_axis() {
        let q = ReducedPoint3::new([0.0, 0.0, 1.0], [0.0; 3], 0.0);
        let p = SystemParams::flat(1.0, 0.3, 0.2).with_kepler(1.0, 0.0);
        let o = micz_flat_observable_values(&q, &p).unwrap();
        assert_eq!([o["J1"], o["J2"], o["J3"]], [0.0; 3]);
        assert_eq!([o["RL1"], o["RL2"], o["RL3"]], [0.0, 0.0, 1.0]);
        assert_eq!(o["A_hidden"], 1.0);
    }

    #[test]
    fn runge_lenz_vanishes_for_radial_motion() {
        let q = ReducedPoint3::new([0.3, -0.4, 0.5], [0.6, -0.8, 1.0], 0.0);
        let o = micz_flat_observable_values(&q, &SystemParams::flat(0.0, 0.0, 0.0)).unwrap();
        for k in ["RL1", "RL2", "RL3"] {
            assert!(o[k].abs() < 1e-15);
        }
    }
}
