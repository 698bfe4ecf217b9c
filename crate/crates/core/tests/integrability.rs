mod common;

use common::*;
use micz_core::{Curvature, SystemId, SystemParams};

const TOL: f64 = 1e-9;

fn base(id: SystemId, c: Curvature) -> SystemParams {
    if id.is_reduced() {
        micz_params(c)
    } else if c == Curvature::Flat {
        flat_params()
    } else {
        curved_params(c)
    }
}

fn assert_integrable(id: SystemId, c: Curvature, seed: u64) {
    let (w, name) = worst_integrability(id, &base(id, c), 100, seed, false);
    assert!(w <= TOL, "{id} ({c:?}): {{H, {name}}} relative residual {w:e}");
}

#[test]
fn flat_isotropic_oscillator() {
    assert_integrable(SystemId::OscIso, Curvature::Flat, 1);
}

#[test]
fn flat_anisotropic_oscillator() {
    assert_integrable(SystemId::OscAniso, Curvature::Flat, 2);
}

#[test]
fn higgs_on_both_curvatures() {
    assert_integrable(SystemId::Higgs, Curvature::Sphere, 3);
    assert_integrable(SystemId::Higgs, Curvature::Pseudosphere, 4);
}

#[test]
fn anisotropic_higgs_on_both_curvatures() {
    assert_integrable(SystemId::HiggsAniso, Curvature::Sphere, 5);
    assert_integrable(SystemId::HiggsAniso, Curvature::Pseudosphere, 6);
}

#[test]
fn flat_micz() {
    assert_integrable(SystemId::MiczFlat, Curvature::Flat, 7);
}

#[test]
fn pseudospherical_micz_for_both_source_signs() {
    // The source sign only enters through the curvature of the parameter set.
    assert_integrable(SystemId::MiczPseudo, Curvature::Pseudosphere, 8);
    assert_integrable(SystemId::MiczPseudo, Curvature::Sphere, 9);
}

#[test]
fn spherical_micz() {
    assert_integrable(SystemId::MiczSphere, Curvature::Sphere, 10);
}

#[test]
fn undeformed_systems_keep_full_vectors() {
    for (id, c) in [
        (SystemId::OscAniso, Curvature::Flat),
        (SystemId::HiggsAniso, Curvature::Pseudosphere),
        (SystemId::MiczFlat, Curvature::Flat),
        (SystemId::MiczPseudo, Curvature::Pseudosphere),
        (SystemId::MiczSphere, Curvature::Sphere),
    ] {
        let p = SystemParams { delta_omega_sq: 0.0, eps_el: 0.0, ..base(id, c) };
        assert!(id.conserved_names(&p).contains(&"J1"));
        let (w, name) = worst_integrability(id, &p, 100, 20, true);
        assert!(w <= TOL, "{id}: {{H, {name}}} = {w:e}");
    }
}

#[test]
fn deformation_breaks_transverse_components() {
    // Sanity check that the suite can fail: J1 is not conserved once deformed.
    let p = flat_params();
    let h = SystemId::OscAniso.hamiltonian(&p).unwrap();
    let j1 = SystemId::OscAniso.observables(&p).unwrap().into_iter().find(|o| o.name() == "J1").unwrap();
    let x = SystemId::OscAniso.sample(&mut rng(0));
    assert!(relative_bracket(&h, &j1, &x, &SystemId::OscAniso.structure(&p)) > 1e-3);
}
