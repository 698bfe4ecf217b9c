//! Registry of the seven systems: structure, Hamiltonian, certified integrals,
//! domain guards and safe-domain samplers.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bracket::{Obs, PoissonStructure};
use crate::curved::{self, HiggsKind, MiczKind};
use crate::error::{Error, Result};
use crate::flat::{self, OscKind};
use crate::phase::{Curvature, SystemParams};
use crate::separation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemId {
    OscIso,
    OscAniso,
    Higgs,
    HiggsAniso,
    MiczFlat,
    MiczPseudo,
    MiczSphere,
}

/// Uniform box sampling with rejection, described for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingBounds {
    pub position_box: f64,
    pub momentum_box: f64,
    pub min_radius: Option<f64>,
    pub max_radius: Option<f64>,
    /// Upper bound on `z zbar` (oscillators) or `q^2` (reduced systems).
    pub max_norm_sq: Option<f64>,
}

impl SystemId {
    pub const ALL: [SystemId; 7] = [
        SystemId::OscIso,
        SystemId::OscAniso,
        SystemId::Higgs,
        SystemId::HiggsAniso,
        SystemId::MiczFlat,
        SystemId::MiczPseudo,
        SystemId::MiczSphere,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SystemId::OscIso => "osc-iso",
            SystemId::OscAniso => "osc-aniso",
            SystemId::Higgs => "higgs",
            SystemId::HiggsAniso => "higgs-aniso",
            SystemId::MiczFlat => "micz-flat",
            SystemId::MiczPseudo => "micz-pseudo",
            SystemId::MiczSphere => "micz-sphere",
        }
    }

    /// Reduced 3D systems live on `[q, p]` with the twisted structure.
    pub fn is_reduced(self) -> bool {
        matches!(self, SystemId::MiczFlat | SystemId::MiczPseudo | SystemId::MiczSphere)
    }

    pub fn dim(self) -> usize {
        if self.is_reduced() {
            6
        } else {
            8
        }
    }

    pub fn state_labels(self) -> &'static [&'static str] {
        if self.is_reduced() {
            &["q1", "q2", "q3", "p1", "p2", "p3"]
        } else {
            &["re_z1", "im_z1", "re_z2", "im_z2", "re_pi1", "im_pi1", "re_pi2", "im_pi2"]
        }
    }

    pub fn check_params(self, p: &SystemParams) -> Result<()> {
        p.validate()?;
        let curved_only = matches!(self, SystemId::Higgs | SystemId::HiggsAniso | SystemId::MiczPseudo | SystemId::MiczSphere);
        if curved_only && p.curvature == Curvature::Flat {
            return Err(Error::Params(format!("{} needs curvature sphere or pseudosphere", self.name())));
        }
        Ok(())
    }

    pub fn structure(self, p: &SystemParams) -> PoissonStructure {
        if self.is_reduced() {
            PoissonStructure::MonopoleTwisted { s: p.s }
        } else {
            PoissonStructure::CanonicalComplex
        }
    }

    pub fn hamiltonian(self, p: &SystemParams) -> Result<Obs> {
        self.check_params(p)?;
        Ok(match self {
            SystemId::OscIso => flat::osc_hamiltonian(*p, OscKind::Iso),
            SystemId::OscAniso => flat::osc_hamiltonian(*p, OscKind::Aniso),
            SystemId::Higgs => curved::higgs_hamiltonian(*p, HiggsKind::Higgs),
            SystemId::HiggsAniso => curved::higgs_hamiltonian(*p, HiggsKind::HiggsAniso),
            SystemId::MiczFlat => flat::micz_flat_hamiltonian(*p),
            SystemId::MiczPseudo => curved::micz_curved_hamiltonian(*p, MiczKind::Pseudo),
            SystemId::MiczSphere => curved::micz_curved_hamiltonian(*p, MiczKind::Sphere),
        })
    }

    /// Every named observable the system defines.
    pub fn observables(self, p: &SystemParams) -> Result<Vec<Obs>> {
        self.check_params(p)?;
        Ok(match self {
            SystemId::OscIso | SystemId::OscAniso => flat::osc_observables(*p),
            SystemId::Higgs | SystemId::HiggsAniso => curved::higgs_observables(*p),
            SystemId::MiczFlat => flat::micz_flat_observables(*p),
            SystemId::MiczPseudo => {
                let mut v = curved::micz_curved_observables(*p, MiczKind::Pseudo);
                v.push(separation::p_phi_observable(*p));
                v.push(separation::beta_observable(*p));
                v
            }
            SystemId::MiczSphere => curved::micz_curved_observables(*p, MiczKind::Sphere),
        })
    }

    /// Names of the constants of motion claimed for this system at these parameters.
    pub fn conserved_names(self, p: &SystemParams) -> Vec<&'static str> {
        let undeformed = p.is_undeformed();
        match self {
            // The iso Hamiltonians ignore the deformation couplings, which A_hidden does not.
            SystemId::OscIso | SystemId::Higgs => {
                if undeformed {
                    vec!["J", "J1", "J2", "J3", "A1", "A2", "A3", "A_hidden"]
                } else {
                    vec!["J", "J1", "J2", "J3", "A1", "A2", "A3"]
                }
            }
            SystemId::OscAniso | SystemId::HiggsAniso => {
                if undeformed {
                    vec!["J", "J1", "J2", "J3", "A1", "A2", "A3", "A_hidden"]
                } else {
                    vec!["J", "J3", "A_hidden"]
                }
            }
            SystemId::MiczFlat | SystemId::MiczSphere => {
                if undeformed {
                    vec!["J1", "J2", "J3", "RL1", "RL2", "RL3", "A_hidden"]
                } else {
                    vec!["J3", "A_hidden"]
                }
            }
            SystemId::MiczPseudo => {
                if undeformed {
                    vec!["J1", "J2", "J3", "RL1", "RL2", "RL3", "A_hidden", "p_phi", "beta"]
                } else {
                    vec!["J3", "A_hidden", "p_phi", "beta"]
                }
            }
        }
    }

    pub fn conserved(self, p: &SystemParams) -> Result<Vec<Obs>> {
        let names = self.conserved_names(p);
        Ok(self.observables(p)?.into_iter().filter(|o| names.contains(&o.name())).collect())
    }

    /// Distance to the nearest guarded singular set or chart edge.
    pub fn domain_margin(self, x: &[f64], p: &SystemParams) -> f64 {
        if x.iter().any(|v| !v.is_finite()) {
            return f64::NEG_INFINITY;
        }
        match self {
            SystemId::OscIso | SystemId::OscAniso => f64::INFINITY,
            SystemId::Higgs | SystemId::HiggsAniso => {
                let r = flat::zzbar(x);
                let edge = (1.0 - r).abs();
                match p.curvature {
                    Curvature::Pseudosphere => 1.0 - r,
                    _ => edge,
                }
            }
            SystemId::MiczFlat | SystemId::MiczSphere => (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt(),
            SystemId::MiczPseudo => {
                let q2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                q2.sqrt().min(1.0 - q2)
            }
        }
    }

    pub fn sampling_bounds(self) -> SamplingBounds {
        match self {
            SystemId::OscIso | SystemId::OscAniso => {
                SamplingBounds { position_box: 1.0, momentum_box: 1.0, min_radius: None, max_radius: None, max_norm_sq: None }
            }
            SystemId::Higgs | SystemId::HiggsAniso => {
                SamplingBounds { position_box: 0.6, momentum_box: 1.0, min_radius: None, max_radius: None, max_norm_sq: Some(0.7) }
            }
            SystemId::MiczFlat => {
                SamplingBounds { position_box: 1.5, momentum_box: 1.0, min_radius: Some(0.1), max_radius: None, max_norm_sq: None }
            }
            SystemId::MiczPseudo => {
                SamplingBounds { position_box: 0.9, momentum_box: 1.0, min_radius: Some(0.1), max_radius: None, max_norm_sq: Some(0.8) }
            }
            SystemId::MiczSphere => {
                SamplingBounds { position_box: 1.5, momentum_box: 1.0, min_radius: Some(0.1), max_radius: Some(2.0), max_norm_sq: None }
            }
        }
    }

    /// Uniform sample from the safe sub-domain described by [`Self::sampling_bounds`].
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> Vec<f64> {
        sample_in(&self.sampling_bounds(), self.dim(), rng)
    }
}

/// Componentwise uniform sampling with rejection on the position block.
pub fn sample_in<R: Rng + ?Sized>(b: &SamplingBounds, dim: usize, rng: &mut R) -> Vec<f64> {
    let npos = dim / 2;
    loop {
        let pos: Vec<f64> = (0..npos).map(|_| rng.gen_range(-b.position_box..=b.position_box)).collect();
        let n2: f64 = pos.iter().map(|v| v * v).sum();
        let n = n2.sqrt();
        if b.min_radius.is_some_and(|m| n < m) || b.max_radius.is_some_and(|m| n > m) || b.max_norm_sq.is_some_and(|m| n2 > m) {
            continue;
        }
        let mut x = pos;
        x.extend((0..npos).map(|_| rng.gen_range(-b.momentum_box..=b.momentum_box)));
        return x;
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SystemId::ALL.iter().copied().find(|id| id.name() == s).ok_or_else(|| Error::Params(format!("unknown system '{s}'")))
    }
}
