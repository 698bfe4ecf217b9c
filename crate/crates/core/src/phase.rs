//! Phase-space points and system parameters.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance from a singular set or chart boundary at which evaluation is refused.
pub const SINGULAR_EPS: f64 = 1e-12;

/// State of the four-dimensional oscillators: two complex coordinates and
/// their conjugate momenta.
///
/// The real view is `[Re z1, Im z1, Re z2, Im z2, Re pi1, Im pi1, Re pi2, Im pi2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint4C {
    pub z: [Complex64; 2],
    pub pi: [Complex64; 2],
}

impl PhasePoint4C {
    pub const DIM: usize = 8;

    pub fn new(z: [Complex64; 2], pi: [Complex64; 2]) -> Self {
        PhasePoint4C { z, pi }
    }

    pub fn to_real(&self) -> [f64; 8] {
        [self.z[0].re, self.z[0].im, self.z[1].re, self.z[1].im, self.pi[0].re, self.pi[0].im, self.pi[1].re, self.pi[1].im]
    }

    pub fn from_real(x: &[f64]) -> Result<Self> {
        if x.len() != Self::DIM {
            return Err(Error::Contract(format!("expected 8 real components, got {}", x.len())));
        }
        Ok(PhasePoint4C {
            z: [Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3])],
            pi: [Complex64::new(x[4], x[5]), Complex64::new(x[6], x[7])],
        })
    }

    /// z z̄
    pub fn z_norm_sq(&self) -> f64 {
        self.z[0].norm_sqr() + self.z[1].norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        self.to_real().iter().all(|v| v.is_finite())
    }

    /// The U(1) orbit generated by `J`: `z -> z e^{ia}`, `pi -> pi e^{-ia}`.
    pub fn phase_rotated(&self, angle: f64) -> Self {
        let u = Complex64::from_polar(1.0, angle);
        PhasePoint4C { z: [self.z[0] * u, self.z[1] * u], pi: [self.pi[0] / u, self.pi[1] / u] }
    }
}

/// Reduced three-dimensional state with monopole charge `s`.
///
/// The real view is `[q1, q2, q3, p1, p2, p3]`; `s` parametrizes the
/// twisted bracket rather than being a coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedPoint3 {
    pub q: [f64; 3],
    pub p: [f64; 3],
    pub s: f64,
}

impl ReducedPoint3 {
    pub const DIM: usize = 6;

    pub fn new(q: [f64; 3], p: [f64; 3], s: f64) -> Self {
        ReducedPoint3 { q, p, s }
    }

    pub fn to_real(&self) -> [f64; 6] {
        [self.q[0], self.q[1], self.q[2], self.p[0], self.p[1], self.p[2]]
    }

    pub fn from_real(x: &[f64], s: f64) -> Result<Self> {
        if x.len() != Self::DIM {
            return Err(Error::Contract(format!("expected 6 real components, got {}", x.len())));
        }
        Ok(ReducedPoint3 { q: [x[0], x[1], x[2]], p: [x[3], x[4], x[5]], s })
    }

    pub fn q_norm(&self) -> f64 {
        self.q.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Curvature of the configuration space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Curvature {
    Flat,
    Sphere,
    Pseudosphere,
}

impl Curvature {
    /// The sign ε: +1 sphere, -1 pseudosphere.
    pub fn sign(self) -> Result<f64> {
        match self {
            Curvature::Sphere => Ok(1.0),
            Curvature::Pseudosphere => Ok(-1.0),
            Curvature::Flat => Err(Error::Params("flat space has no curvature sign".into())),
        }
    }
}

/// Couplings shared by every system.
///
/// `r0_radius` is the four-dimensional radius R₀; the reduced systems use
/// `r0 = R₀²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega: f64,
    pub delta_omega_sq: f64,
    pub eps_el: f64,
    #[serde(rename = "R0")]
    pub r0_radius: f64,
    pub curvature: Curvature,
    pub gamma: f64,
    pub s: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams { omega: 1.0, delta_omega_sq: 0.0, eps_el: 0.0, r0_radius: 1.0, curvature: Curvature::Flat, gamma: 0.0, s: 0.0 }
    }
}

impl SystemParams {
    pub fn flat(omega: f64, delta_omega_sq: f64, eps_el: f64) -> Self {
        SystemParams { omega, delta_omega_sq, eps_el, ..Default::default() }
    }

    pub fn curved(curvature: Curvature, r0_radius: f64, omega: f64, delta_omega_sq: f64, eps_el: f64) -> Self {
        SystemParams { omega, delta_omega_sq, eps_el, r0_radius, curvature, ..Default::default() }
    }

    pub fn with_kepler(mut self, gamma: f64, s: f64) -> Self {
        self.gamma = gamma;
        self.s = s;
        self
    }

    pub fn with_s(mut self, s: f64) -> Self {
        self.s = s;
        self
    }

    /// Curvature sign, refusing flat space.
    pub fn eps(&self) -> Result<f64> {
        self.curvature.sign()
    }

    /// R₀, refusing flat space and non-positive radii.
    pub fn radius(&self) -> Result<f64> {
        if self.curvature == Curvature::Flat {
            return Err(Error::Params("R0 is undefined in flat space".into()));
        }
        if !(self.r0_radius > 0.0) || !self.r0_radius.is_finite() {
            return Err(Error::Params(format!("R0 must be positive, got {}", self.r0_radius)));
        }
        Ok(self.r0_radius)
    }

    /// r₀ = R₀².
    pub fn r0(&self) -> Result<f64> {
        self.radius().map(|r| r * r)
    }

    pub fn is_undeformed(&self) -> bool {
        self.delta_omega_sq == 0.0 && self.eps_el == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.omega, self.delta_omega_sq, self.eps_el, self.r0_radius, self.gamma, self.s];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Params("non-finite parameter".into()));
        }
        if self.omega < 0.0 {
            return Err(Error::Params("omega must be >= 0".into()));
        }
        if self.curvature != Curvature::Flat {
            self.radius()?;
        }
        Ok(())
    }
}
