mod common;

use common::*;
use micz_core::bracket::{Constant, Obs};
use micz_core::curved::{self, HiggsKind, MiczKind};
use micz_core::flat::{self, OscKind};
use micz_core::{Curvature, PhasePoint4C, ReducedPoint3, SystemId, SystemParams};
use num_complex::Complex64 as C64;
use rand::Rng;
use std::sync::Arc;

fn chart_point<R: Rng>(r: &mut R, max_norm_sq: f64) -> PhasePoint4C {
    loop {
        let mut c = |b: f64| C64::new(r.gen_range(-b..b), r.gen_range(-b..b));
        let x = PhasePoint4C::new([c(0.7), c(0.7)], [c(1.0), c(1.0)]);
        if x.z_norm_sq() <= max_norm_sq {
            return x;
        }
    }
}

#[test]
fn ambient_round_trip_and_constraint() {
    let mut r = rng(41);
    for c in [Curvature::Sphere, Curvature::Pseudosphere] {
        let p = curved_params(c);
        for _ in 0..100 {
            let x = chart_point(&mut r, 0.8);
            let a = curved::to_ambient(&x.z, &p).unwrap();
            assert!(a.constraint_residual(&p).unwrap().abs() <= 1e-10 * p.r0().unwrap());
            let back = curved::from_ambient(&a, &p).unwrap();
            for (b, z) in back.iter().zip(&x.z) {
                assert!((b - z).norm() <= 1e-12);
            }
        }
    }
}

#[test]
fn ambient_special_points() {
    let p = curved_params(Curvature::Sphere);
    let a = curved::to_ambient(&[C64::new(0.0, 0.0); 2], &p).unwrap();
    assert_eq!(a.x, [C64::new(0.0, 0.0); 2]);
    assert_eq!(a.x0, p.r0_radius);
    let eq = curved::to_ambient(&[C64::new(0.6, 0.0), C64::new(0.0, 0.8)], &p).unwrap();
    assert!(eq.x0.abs() < 1e-15);
    let ps = curved_params(Curvature::Pseudosphere);
    assert!(curved::to_ambient(&[C64::new(0.6, 0.0), C64::new(0.0, 0.8)], &ps).is_err());
}

#[test]
fn ambient_and_chart_anisotropy_agree() {
    let mut r = rng(42);
    for c in [Curvature::Sphere, Curvature::Pseudosphere] {
        for _ in 0..100 {
            let p = random_params(&mut r, &curved_params(c));
            let x = chart_point(&mut r, 0.7);
            let a = curved::to_ambient(&x.z, &p).unwrap();
            let lhs = curved::ambient_anisotropy(&a, &p).unwrap();
            let rhs = curved::chart_anisotropy(&x.z, &p).unwrap();
            assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0), "{c:?}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn higgs_deformation_off_switch_is_bitwise() {
    let mut r = rng(43);
    for c in [Curvature::Sphere, Curvature::Pseudosphere] {
        let p = SystemParams { delta_omega_sq: 0.0, eps_el: 0.0, ..curved_params(c) };
        for _ in 0..100 {
            let x = chart_point(&mut r, 0.7);
            let a = curved::h_higgs_aniso(&x, &p, HiggsKind::HiggsAniso).unwrap();
            let b = curved::h_higgs_aniso(&x, &p, HiggsKind::Higgs).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn higgs_examples() {
    let p = SystemParams::curved(Curvature::Pseudosphere, 1.0, 1.0, 0.3, 0.2);
    let zero = PhasePoint4C::new([C64::new(0.0, 0.0); 2], [C64::new(0.0, 0.0); 2]);
    assert_eq!(curved::h_higgs_aniso(&zero, &p, HiggsKind::HiggsAniso).unwrap(), 0.0);
    let kick = PhasePoint4C::new([C64::new(0.0, 0.0); 2], [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    assert_eq!(curved::h_higgs_aniso(&kick, &p, HiggsKind::Higgs).unwrap(), 0.5);
    let lam = curved::lambda_profile(0.0, &SystemParams { r0_radius: 1.7, ..p }).unwrap();
    assert!((lam - 2.0 * 1.7f64.powi(2) * 0.3).abs() < 1e-14);
    let obs = curved::curved_oscillator_observables(&kick, &p).unwrap();
    assert_eq!([obs["Jtr1_re"], obs["Jtr1_im"], obs["Jtr2_re"], obs["Jtr2_im"]], [1.0, 0.0, 0.0, 0.0]);
    for (k, v) in curved::curved_oscillator_observables(&zero, &p).unwrap() {
        assert_eq!(v, 0.0, "{k}");
    }
}

#[test]
fn pseudosphere_chart_edge_is_guarded() {
    let p = curved_params(Curvature::Pseudosphere);
    let edge = PhasePoint4C::new([C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0); 2]);
    assert!(curved::h_higgs_aniso(&edge, &p, HiggsKind::Higgs).is_err());
}

fn oracle_h_pseudo(x: &ReducedPoint3, p: &SystemParams) -> f64 {
    let r0 = p.r0().unwrap();
    let eps = p.eps().unwrap();
    let q = x.q_norm();
    let q2 = q * q;
    let p2: f64 = x.p.iter().map(|v| v * v).sum();
    let s = x.s;
    (1.0 - q2).powi(2) / (8.0 * r0 * r0) * (p2 + s * s / q2) - p.gamma / (2.0 * r0) * (1.0 + q2) / q
        + p.delta_omega_sq / 2.0 * ((1.0 - eps * q) / (1.0 + eps * q)).powi(2) * x.q[2] / q
        + 2.0 * p.eps_el * r0 * (1.0 + q2) * x.q[2] / (1.0 - q2).powi(2)
}

#[test]
fn pseudospherical_micz_matches_direct_evaluation() {
    let mut r = rng(44);
    for c in [Curvature::Sphere, Curvature::Pseudosphere] {
        for _ in 0..100 {
            let p = random_params(&mut r, &micz_params(c));
            let x = ReducedPoint3::from_real(&SystemId::MiczPseudo.sample(&mut r), p.s).unwrap();
            let h = curved::h_micz_curved(&x, &p, MiczKind::Pseudo).unwrap();
            let o = oracle_h_pseudo(&x, &p);
            assert!((h - o).abs() <= 1e-12 * o.abs().max(1.0));
        }
    }
}

#[test]
fn curved_micz_examples() {
    let p = SystemParams::curved(Curvature::Pseudosphere, 1.0, 1.0, 0.0, 0.0);
    let x = ReducedPoint3::new([0.0, 0.0, 0.5], [0.0; 3], 0.0);
    assert_eq!(curved::h_micz_curved(&x, &p, MiczKind::Pseudo).unwrap(), 0.0);
    assert_eq!(curved::h_micz_curved(&x, &p.with_kepler(1.0, 0.0), MiczKind::Pseudo).unwrap(), -1.25);
    let sp = SystemParams::curved(Curvature::Sphere, 1.0, 1.0, 0.0, 0.0).with_kepler(1.0, 0.0);
    let pole = ReducedPoint3::new([0.0, 0.0, 1.0], [0.0; 3], 0.0);
    assert_eq!(curved::h_micz_curved(&pole, &sp, MiczKind::Sphere).unwrap(), 0.0);
    let obs = curved::micz_curved_observable_values(&x, &p.with_kepler(0.8, 0.0), MiczKind::Pseudo).unwrap();
    assert_eq!([obs["T1"], obs["T2"], obs["T3"]], [0.0; 3]);
    assert_eq!([obs["RL1"], obs["RL2"], obs["RL3"]], [0.0, 0.0, 0.8]);
    // axial points: anisotropy additions vanish
    let d = SystemParams { delta_omega_sq: 0.6, eps_el: 0.3, ..p.with_kepler(0.8, 0.0) };
    let o2 = curved::micz_curved_observable_values(&x, &d, MiczKind::Pseudo).unwrap();
    assert_eq!(o2["A_hidden"], o2["RL3"]);
}

#[test]
fn pseudo_chart_refuses_unit_ball_exterior() {
    let p = micz_params(Curvature::Pseudosphere);
    let x = ReducedPoint3::new([0.0, 0.0, 1.2], [0.0; 3], 0.0);
    assert!(curved::h_micz_curved(&x, &p, MiczKind::Pseudo).is_err());
}

#[test]
fn source_sign_variants_are_related() {
    let mut r = rng(45);
    for _ in 0..100 {
        let p = random_params(&mut r, &micz_params(Curvature::Pseudosphere));
        let x = ReducedPoint3::from_real(&SystemId::MiczPseudo.sample(&mut r), p.s).unwrap();
        let h = curved::h_micz_curved(&x, &p, MiczKind::Pseudo).unwrap();
        assert!(curved::reflection_residual(&x, &p).unwrap() <= 1e-12 * h.abs().max(1.0));
    }
}

#[test]
fn flat_limit_converges_at_second_order() {
    let mut r = rng(46);
    let p = curved_params(Curvature::Pseudosphere);
    for c in [Curvature::Sphere, Curvature::Pseudosphere] {
        for _ in 0..20 {
            let x = chart_point(&mut r, 0.8);
            let t = curved::flat_limit_ratio(&x, &SystemParams { curvature: c, ..p }, &[5.0, 50.0, 500.0]).unwrap();
            let shrink = t.deviation_ratios[0].unwrap();
            assert!((80.0..=120.0).contains(&shrink), "{c:?}: {shrink}");
            // independent oracle: the rescaled chart Hamiltonian tends to the flat one
            assert!((t.limit.unwrap() - 1.0).abs() < 1e-9);
            let dev: Vec<f64> = t.rows.iter().map(|row| (row.ratio.unwrap() - 1.0).abs()).collect();
            let exact = dev[0] / dev[1];
            assert!((80.0..=120.0).contains(&exact), "{c:?}: {exact}");
        }
    }
}

#[test]
fn flat_limit_kinetic_ratio_is_exact_at_origin() {
    let p = SystemParams { delta_omega_sq: 0.0, eps_el: 0.0, ..curved_params(Curvature::Sphere) };
    let x = PhasePoint4C::new([C64::new(0.0, 0.0); 2], [C64::new(0.3, -0.2), C64::new(0.5, 0.1)]);
    let t = curved::flat_limit_ratio(&x, &p, &[1.0, 7.0, 70.0]).unwrap();
    for row in &t.rows {
        assert!((row.ratio.unwrap() - 1.0).abs() < 1e-15);
    }
    let zero = PhasePoint4C::new([C64::new(0.0, 0.0); 2], [C64::new(0.0, 0.0); 2]);
    let t = curved::flat_limit_ratio(&zero, &p, &[5.0, 50.0]).unwrap();
    assert!(t.rows.iter().all(|row| row.ratio.is_none() && row.note.is_some()));
    assert!(flat::h_flat(&zero, &p, OscKind::Aniso).unwrap() == 0.0);
}

const STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

#[test]
fn kepler_potential_is_harmonic_on_pseudosphere() {
    let mut r = rng(47);
    let p = SystemParams::curved(Curvature::Pseudosphere, 1.3, 1.0, 0.0, 0.0).with_kepler(1.0, 0.0);
    let v = curved::kepler_potential(p);
    for _ in 0..20 {
        let q = loop {
            let q = [r.gen_range(-0.8..0.8), r.gen_range(-0.8..0.8), r.gen_range(-0.8..0.8)];
            let n2: f64 = q.iter().map(|c| c * c).sum();
            if (0.04..0.64).contains(&n2) {
                break q;
            }
        };
        let e = curved::laplace_beltrami_extrapolated(v.as_ref(), &q, p.r0().unwrap(), &STEPS).unwrap();
        assert!(e.extrapolated.abs() <= 1e-6, "{q:?}: {e:?}");
        // raw residuals shrink like h^2
        assert!(e.values[2].abs() < e.values[0].abs());
    }
}

#[test]
fn linear_potential_is_not_harmonic() {
    let p = SystemParams::curved(Curvature::Pseudosphere, 1.3, 1.0, 0.0, 1.0);
    let v = curved::linear_potential(p);
    let e = curved::laplace_beltrami_extrapolated(v.as_ref(), &[0.0, 0.0, 0.3], p.r0().unwrap(), &STEPS).unwrap();
    assert!(e.extrapolated.abs() > 1e-2, "{e:?}");
}

#[test]
fn constant_potential_has_zero_laplacian() {
    let v: Obs = Arc::new(Constant(2.5));
    for h in STEPS {
        assert!(curved::laplace_beltrami_residual(v.as_ref(), &[0.1, 0.2, 0.3], 1.69, h).unwrap().abs() <= 1e-12);
    }
    assert!(curved::laplace_beltrami_residual(v.as_ref(), &[0.0, 0.0, 0.99], 1.69, 1e-2).is_err());
    assert!(curved::laplace_beltrami_residual(v.as_ref(), &[0.0, 0.0, 0.05], 1.69, 1e-2).is_err());
}
