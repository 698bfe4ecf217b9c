mod common;

use std::f64::consts::TAU;

use common::*;
use micz_core::bracket::{poisson_bracket, PoissonStructure};
use micz_core::curved::{self, MiczKind};
use micz_core::dynamics::{drift_report, integrate, IntegratorConfig};
use micz_core::separation::{self, ParabolicState};
use micz_core::{Curvature, Error, ReducedPoint3, SystemId, SystemParams};
use rand::Rng;

fn chart_point<R: Rng>(r: &mut R) -> [f64; 3] {
    let x = SystemId::MiczPseudo.sample(r);
    [x[0], x[1], x[2]]
}

fn params<R: Rng>(r: &mut R, c: Curvature) -> SystemParams {
    random_params(r, &micz_params(c))
}

#[test]
fn chart_round_trip() {
    let mut r = rng(71);
    for _ in 0..500 {
        let q = chart_point(&mut r);
        let r0 = r.gen_range(0.5..3.0);
        let c = separation::to_parabolic(&q, r0).unwrap();
        assert!(c.xi >= 0.0 && c.eta >= 0.0 && (0.0..TAU).contains(&c.phi));
        let back = separation::from_parabolic(c.xi, c.eta, c.phi, r0).unwrap();
        for k in 0..3 {
            assert!((back[k] - q[k]).abs() <= 1e-10, "{q:?} -> {back:?}");
        }
        assert!((c.phi - q[1].atan2(q[0]).rem_euclid(TAU)).abs() <= 1e-12);
    }
}

#[test]
fn chart_special_points() {
    assert_eq!(separation::from_parabolic(0.0, 0.0, 1.3, 2.0).unwrap(), [0.0; 3]);
    let c = separation::to_parabolic(&[0.0, 0.0, 0.4], 1.5).unwrap();
    assert!(c.axis_degenerate && c.phi == 0.0 && c.eta == 0.0);
    assert!(separation::from_parabolic(-1.0, 0.5, 0.0, 1.0).is_err());
    assert!(separation::to_parabolic(&[0.8, 0.8, 0.0], 1.0).is_err());
}

#[test]
fn momenta_vanish_with_momentum() {
    let x = ReducedPoint3::new([0.2, -0.3, 0.1], [0.0; 3], 0.0);
    let ps = separation::parabolic_momenta(&x, 1.4).unwrap();
    assert_eq!([ps.p_xi, ps.p_eta, ps.p_phi], [0.0; 3]);
    assert!((ps.chi - (ps.xi / 1.4).asinh()).abs() <= 1e-12);
    let axis = ReducedPoint3::new([0.0, 0.0, 0.3], [0.1; 3], 0.0);
    assert!(matches!(separation::parabolic_momenta(&axis, 1.4), Err(Error::Degenerate(_))));
}

#[test]
fn axial_momentum_matches_rotation_generator() {
    // p_phi = d/dalpha of q.p along a rotation about n3, shifted by the monopole gauge term.
    let mut r = rng(72);
    for _ in 0..100 {
        let v = SystemId::MiczPseudo.sample(&mut r);
        let s = r.gen_range(-1.0..1.0);
        let x = ReducedPoint3::from_real(&v, s).unwrap();
        let ps = separation::parabolic_momenta(&x, 1.69).unwrap();
        let (q, p) = (x.q, x.p);
        let dq = [-q[1], q[0], 0.0];
        let l3: f64 = (0..3).map(|k| dq[k] * p[k]).sum();
        let expect = l3 - s * (1.0 - q[2] / x.q_norm());
        assert!((ps.p_phi - expect).abs() <= 1e-10);
    }
}

#[test]
fn parabolic_coordinates_are_canonical_without_charge() {
    let mut r = rng(73);
    let tw = PoissonStructure::MonopoleTwisted { s: 0.0 };
    let p = SystemParams { s: 0.0, ..micz_params(Curvature::Pseudosphere) };
    let c = separation::parabolic_coordinates(p);
    for _ in 0..50 {
        let x = SystemId::MiczPseudo.sample(&mut r);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                let pq = poisson_bracket(c[3 + i].as_ref(), c[j].as_ref(), &x, &tw).unwrap();
                assert!((pq - expect).abs() <= 1e-9, "{{{}, {}}} = {pq}", c[3 + i].name(), c[j].name());
                assert!(poisson_bracket(c[i].as_ref(), c[j].as_ref(), &x, &tw).unwrap().abs() <= 1e-9);
                assert!(poisson_bracket(c[3 + i].as_ref(), c[3 + j].as_ref(), &x, &tw).unwrap().abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn azimuthal_pair_stays_canonical_with_charge() {
    let mut r = rng(74);
    let p = micz_params(Curvature::Pseudosphere);
    let tw = PoissonStructure::MonopoleTwisted { s: p.s };
    let c = separation::parabolic_coordinates(p);
    for _ in 0..50 {
        let x = SystemId::MiczPseudo.sample(&mut r);
        assert!((poisson_bracket(c[5].as_ref(), c[2].as_ref(), &x, &tw).unwrap() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn parabolic_and_stereographic_hamiltonians_agree() {
    let mut r = rng(75);
    for k in 0..200 {
        let c = if k % 2 == 0 { Curvature::Pseudosphere } else { Curvature::Sphere };
        let mut p = params(&mut r, c);
        if k % 4 < 2 {
            p.s = 0.0;
        }
        let x = ReducedPoint3::from_real(&SystemId::MiczPseudo.sample(&mut r), p.s).unwrap();
        let h = curved::h_micz_curved(&x, &p, MiczKind::Pseudo).unwrap();
        let ps = separation::parabolic_momenta(&x, p.r0().unwrap()).unwrap();
        let hp = separation::h_micz_parabolic(&ps, &p).unwrap();
        assert!((h - hp).abs() <= 1e-9 * h.abs().max(1.0), "{h} vs {hp}");
    }
}

#[test]
fn parabolic_hamiltonian_examples() {
    let p = SystemParams::curved(Curvature::Pseudosphere, 1.0, 1.0, 0.0, 0.0);
    for (xi, eta) in [(0.3, 0.7), (2.0, 0.1)] {
        let ps = ParabolicState::new(xi, eta, 0.4, 0.0, 0.0, 0.0, 1.0);
        assert_eq!(separation::h_micz_parabolic(&ps, &p).unwrap(), 0.0);
    }
    let rec = separation::separation_constant(&ParabolicState::new(1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0), &p, 0.0).unwrap();
    assert_eq!(rec.beta_xi, 0.0);
    let off = separation::separation_constant(&ParabolicState::new(1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0), &p, 0.5);
    assert!(matches!(off, Err(Error::Contract(_))));
}

#[test]
fn both_separated_equations_give_one_constant() {
    let mut r = rng(76);
    for k in 0..200 {
        let c = if k % 2 == 0 { Curvature::Pseudosphere } else { Curvature::Sphere };
        let p = params(&mut r, c);
        let x = ReducedPoint3::from_real(&SystemId::MiczPseudo.sample(&mut r), p.s).unwrap();
        let ps = separation::parabolic_momenta(&x, p.r0().unwrap()).unwrap();
        let e = separation::h_micz_parabolic(&ps, &p).unwrap();
        let rec = separation::separation_constant(&ps, &p, e).unwrap();
        assert!(rec.consistency <= 1e-8 * rec.beta_xi.abs().max(1.0), "{rec:?}");
        let (a, b) = separation::hj_residual_chi_zeta(&ps, &p, e, rec.beta_xi).unwrap();
        let scale = rec.beta_xi.abs().max(e.abs()).max(1.0) * p.r0().unwrap().powi(2);
        assert!(a <= 1e-8 * scale && b <= 1e-8 * scale, "{a:e} {b:e}");
    }
}

#[test]
fn hyperbolic_form_at_rest_is_energy_bookkeeping() {
    // No couplings, no momenta: both residuals reduce to |E r0^2/2| with beta = 0.
    let p = SystemParams::curved(Curvature::Pseudosphere, 1.2, 1.0, 0.0, 0.0);
    let ps = ParabolicState::new(0.8, 0.5, 0.0, 0.0, 0.0, 0.0, p.r0().unwrap());
    assert_eq!(separation::hj_residual_chi_zeta(&ps, &p, 0.0, 0.0).unwrap(), (0.0, 0.0));
    let degenerate = ParabolicState { chi: 0.0, ..ps };
    assert!(separation::hj_residual_chi_zeta(&degenerate, &p, 0.0, 0.0).is_err());
}

#[test]
fn separation_constant_axial_momentum_and_energy_commute() {
    let mut r = rng(77);
    for c in [Curvature::Pseudosphere, Curvature::Sphere] {
        let p = micz_params(c);
        let tw = SystemId::MiczPseudo.structure(&p);
        let h = SystemId::MiczPseudo.hamiltonian(&p).unwrap();
        let (beta, pphi) = (separation::beta_observable(p), separation::p_phi_observable(p));
        for _ in 0..100 {
            let x = SystemId::MiczPseudo.sample(&mut r);
            for (f, g) in [(&h, &beta), (&h, &pphi), (&beta, &pphi)] {
                let v = relative_bracket(f, g, &x, &tw);
                assert!(v <= 1e-9, "{{{}, {}}} = {v:e}", f.name(), g.name());
            }
        }
    }
}

#[test]
fn separation_constant_is_conserved_along_the_flow() {
    let p = orbit_params(Curvature::Pseudosphere);
    let x0 = bound_state(SystemId::MiczPseudo);
    let watch = vec![separation::beta_observable(p), separation::p_phi_observable(p), SystemId::MiczPseudo.hamiltonian(&p).unwrap()];
    let tr = integrate(SystemId::MiczPseudo, &x0, &p, &IntegratorConfig::adaptive(1e-10, 1e-12, 50.0), &watch).unwrap();
    assert!(tr.completed(), "{:?}", tr.event);
    let d = drift_report(&tr);
    let beta = d.get("beta").unwrap();
    assert!(beta.max_abs <= 1e-6 * beta.initial.abs().max(1.0), "{beta:?}");
    assert!(d.max_rel() <= 1e-6, "{d:?}");
}
