#![allow(dead_code)]

use micz_core::bracket::{poisson_bracket, Obs, PoissonStructure};
use micz_core::{Curvature, SystemParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn flat_params() -> SystemParams {
    SystemParams::flat(1.2, 0.35, 0.25)
}

pub fn curved_params(curvature: Curvature) -> SystemParams {
    SystemParams::curved(curvature, 1.3, 1.2, 0.35, 0.25)
}

pub fn micz_params(curvature: Curvature) -> SystemParams {
    SystemParams { curvature, r0_radius: 1.3, ..SystemParams::flat(1.2, 0.4, 0.3) }.with_kepler(0.9, 0.7)
}

/// `|{H, C}| / max(|H|, |C|, 1)`
pub fn relative_bracket(h: &Obs, c: &Obs, x: &[f64], s: &PoissonStructure) -> f64 {
    let b = poisson_bracket(h.as_ref(), c.as_ref(), x, s).unwrap();
    let scale = h.eval_f64(x).unwrap().abs().max(c.eval_f64(x).unwrap().abs()).max(1.0);
    b.abs() / scale
}

/// Central-difference gradient, step `h`.
pub fn fd_grad(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[i] += h;
            b[i] -= h;
            (f(&a) - f(&b)) / (2.0 * h)
        })
        .collect()
}

/// Structure matrices written out from the defining brackets, independent of
/// the library's contraction code.
pub fn structure_matrix(s: &PoissonStructure, x: &[f64]) -> Vec<Vec<f64>> {
    match *s {
        PoissonStructure::CanonicalComplex => {
            let mut m = vec![vec![0.0; 8]; 8];
            for a in 0..2 {
                let (re_z, im_z, re_p, im_p) = (2 * a, 2 * a + 1, 4 + 2 * a, 5 + 2 * a);
                m[re_p][re_z] = 0.5;
                m[re_z][re_p] = -0.5;
                m[im_p][im_z] = -0.5;
                m[im_z][im_p] = 0.5;
            }
            m
        }
        PoissonStructure::CanonicalReal { dof } => {
            let mut m = vec![vec![0.0; 2 * dof]; 2 * dof];
            for i in 0..dof {
                m[dof + i][i] = 1.0;
                m[i][dof + i] = -1.0;
            }
            m
        }
        PoissonStructure::MonopoleTwisted { s } => {
            let mut m = structure_matrix(&PoissonStructure::CanonicalReal { dof: 3 }, x);
            let r3 = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).powf(1.5);
            m[3][4] = s * x[2] / r3;
            m[4][3] = -m[3][4];
            m[4][5] = s * x[0] / r3;
            m[5][4] = -m[4][5];
            m[5][3] = s * x[1] / r3;
            m[3][5] = -m[5][3];
            m
        }
    }
}

/// Bracket from finite-difference gradients and the explicit matrix.
pub fn fd_bracket(f: &Obs, g: &Obs, x: &[f64], s: &PoissonStructure) -> f64 {
    let ff = |y: &[f64]| f.eval_f64(y).unwrap();
    let gg = |y: &[f64]| g.eval_f64(y).unwrap();
    let a = fd_grad(&ff, x, 1e-6);
    let b = fd_grad(&gg, x, 1e-6);
    let m = structure_matrix(s, x);
    let mut acc = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            acc += a[i] * m[i][j] * b[j];
        }
    }
    acc
}

/// Random couplings; curvature, radius and charge taken from `base`.
pub fn random_params<R: rand::Rng>(r: &mut R, base: &SystemParams) -> SystemParams {
    SystemParams {
        omega: r.gen_range(0.5..2.0),
        delta_omega_sq: r.gen_range(-1.0..1.0),
        eps_el: r.gen_range(-0.5..0.5),
        gamma: r.gen_range(-1.5..1.5),
        s: r.gen_range(-1.5..1.5),
        ..*base
    }
}

/// Largest relative bracket of `H` with every claimed integral, over `n`
/// sampled points with freshly drawn couplings at each point.
pub fn worst_integrability(id: micz_core::SystemId, base: &SystemParams, n: usize, seed: u64, fix: bool) -> (f64, String) {
    let mut r = rng(seed);
    let mut worst = (0.0, String::new());
    for _ in 0..n {
        let p = if fix { *base } else { random_params(&mut r, base) };
        let h = id.hamiltonian(&p).unwrap();
        let s = id.structure(&p);
        let x = id.sample(&mut r);
        for c in id.conserved(&p).unwrap() {
            let v = relative_bracket(&h, &c, &x, &s);
            if v > worst.0 || worst.1.is_empty() {
                worst = (v.max(worst.0), c.name().to_string());
            }
        }
    }
    worst
}

/// Weakly deformed couplings with known bounded orbits for every system.
pub fn orbit_params(curvature: Curvature) -> SystemParams {
    SystemParams { curvature, r0_radius: 1.3, ..SystemParams::flat(1.2, 0.05, 0.02) }.with_kepler(0.9, 0.7)
}

/// Initial states that stay inside the chart for well over `T = 100`.
pub fn bound_state(id: micz_core::SystemId) -> Vec<f64> {
    use micz_core::SystemId::*;
    match id {
        OscIso | OscAniso => vec![-0.0975, -0.4196, 0.0966, -0.2807, -0.2163, 0.2106, -0.0389, -0.3473],
        Higgs | HiggsAniso => vec![-0.0585, -0.2518, 0.0579, -0.1684, -0.2163, 0.2106, -0.0389, -0.3473],
        MiczFlat | MiczSphere => vec![-0.1463, -0.6294, 0.1448, -0.2807, -0.2163, 0.2106],
        MiczPseudo => vec![-0.3301, -0.1407, -0.0177, -0.1027, -0.4863, -0.4511],
    }
}
