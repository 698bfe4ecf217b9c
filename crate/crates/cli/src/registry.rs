//! Built-in claims: each has one stable anchor and one default tolerance.
//! Corrections are the formula forms the implementation commits to where the
//! source expressions needed adjustment to pass the checks.

use serde::{Deserialize, Serialize};

/// Pass condition applied to a claim's aggregated value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Check {
    AtMost { bound: f64 },
    AtLeast { bound: f64 },
    Within { lo: f64, hi: f64 },
}

impl Check {
    pub fn passes(&self, v: f64) -> bool {
        match *self {
            Check::AtMost { bound } => v <= bound,
            Check::AtLeast { bound } => v >= bound,
            Check::Within { lo, hi } => (lo..=hi).contains(&v),
        }
    }

    /// Distance past the pass boundary; larger is worse. Used to pick the worst case.
    pub fn badness(&self, v: f64) -> f64 {
        if v.is_nan() {
            return f64::INFINITY;
        }
        match *self {
            Check::AtMost { .. } => v,
            Check::AtLeast { .. } => -v,
            Check::Within { lo, hi } => (v - 0.5 * (lo + hi)).abs() / (0.5 * (hi - lo)),
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Check::AtMost { bound } => format!("<= {bound:e}"),
            Check::AtLeast { bound } => format!(">= {bound:e}"),
            Check::Within { lo, hi } => format!("in [{lo}, {hi}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClaimSpec {
    pub id: &'static str,
    pub anchor: &'static str,
    pub statement: &'static str,
    pub check: Check,
    pub corrections: &'static [&'static str],
}

const fn at_most(bound: f64) -> Check {
    Check::AtMost { bound }
}

pub const CLAIMS: &[ClaimSpec] = &[
    ClaimSpec {
        id: "osc-iso.integrals",
        anchor: "flat-oscillator.symmetry-generators",
        statement: "J, J_vec and A_vec commute with the isotropic oscillator",
        check: at_most(1e-9),
        corrections: &["vector-field-sign"],
    },
    ClaimSpec {
        id: "osc-aniso.integrals",
        anchor: "flat-oscillator.hidden-integral",
        statement: "J, J3 and A_hidden commute with the anisotropic inharmonic oscillator",
        check: at_most(1e-9),
        corrections: &["vector-field-sign"],
    },
    ClaimSpec {
        id: "higgs.integrals",
        anchor: "higgs-oscillator.hidden-symmetry",
        statement: "J, J_vec and A_vec commute with the Higgs oscillator",
        check: at_most(1e-9),
        corrections: &["curved-hidden-vector-pairing"],
    },
    ClaimSpec {
        id: "higgs-aniso.integrals",
        anchor: "higgs-oscillator.anisotropic-hidden-integral",
        statement: "J, J3 and A_hidden commute with the anisotropic Higgs oscillator",
        check: at_most(1e-9),
        corrections: &["curved-hidden-vector-pairing"],
    },
    ClaimSpec {
        id: "micz-flat.integrals",
        anchor: "flat-micz.hidden-integral",
        statement: "n3.J and A_hidden commute with the flat MICZ-Kepler system in a constant field",
        check: at_most(1e-9),
        corrections: &["reduced-angular-momentum", "flat-runge-lenz", "flat-reduced-hidden-integral"],
    },
    ClaimSpec {
        id: "micz-pseudo.integrals",
        anchor: "pseudosphere-micz.hidden-integral",
        statement: "n3.J, A_hidden, p_phi and beta commute with the pseudospherical MICZ-Kepler system",
        check: at_most(1e-9),
        corrections: &["reduced-angular-momentum", "pseudo-runge-lenz", "parabolic-hamiltonian", "separated-equations"],
    },
    ClaimSpec {
        id: "micz-sphere.integrals",
        anchor: "sphere-micz.real-part-hidden-integral",
        statement: "n3.J and A_hidden commute with the spherical MICZ-Kepler system",
        check: at_most(1e-9),
        corrections: &["reduced-angular-momentum", "sphere-micz-forms"],
    },
    ClaimSpec {
        id: "ks.bracket-image",
        anchor: "ks.reduced-brackets",
        statement: "canonical brackets of the KS image equal the twisted brackets with s = J",
        check: at_most(1e-9),
        corrections: &[],
    },
    ClaimSpec {
        id: "ks.energy-surface",
        anchor: "ks.energy-surface",
        statement: "the oscillator level set maps onto the MICZ level set",
        check: at_most(1e-9),
        corrections: &["curved-target-energy"],
    },
    ClaimSpec {
        id: "ks.trajectory-level",
        anchor: "ks.energy-surface.along-flow",
        statement: "the KS image of an oscillator orbit stays on the target level set",
        check: at_most(1e-6),
        corrections: &["curved-target-energy"],
    },
    ClaimSpec {
        id: "ks.angular-momentum",
        anchor: "ks.reduced-angular-momentum",
        statement: "the oscillator J3 equals n3.J of the image",
        check: at_most(1e-10),
        corrections: &["reduced-angular-momentum"],
    },
    ClaimSpec {
        id: "ks.hidden-integral",
        anchor: "ks.reduced-hidden-integral",
        statement: "the oscillator A_hidden equals the image's A_hidden up to a fitted constant",
        check: at_most(1e-8),
        corrections: &["flat-reduced-hidden-integral", "curved-hidden-reduction"],
    },
    ClaimSpec {
        id: "separation.chart-equivalence",
        anchor: "separation.parabolic-hamiltonian",
        statement: "the parabolic Hamiltonian equals the stereographic one",
        check: at_most(1e-9),
        corrections: &["parabolic-chart", "parabolic-hamiltonian"],
    },
    ClaimSpec {
        id: "separation.beta-consistency",
        anchor: "separation.separated-equations",
        statement: "the xi and eta equations give the same separation constant",
        check: at_most(1e-8),
        corrections: &["separated-equations"],
    },
    ClaimSpec {
        id: "separation.involution",
        anchor: "separation.commuting-integrals",
        statement: "beta, p_phi and H are pairwise in involution",
        check: at_most(1e-9),
        corrections: &["parabolic-hamiltonian"],
    },
    ClaimSpec {
        id: "separation.hyperbolic-form",
        anchor: "separation.hyperbolic-equations",
        statement: "the chi and zeta forms hold wherever the xi and eta forms do",
        check: at_most(1e-8),
        corrections: &["hyperbolic-separated-equations"],
    },
    ClaimSpec {
        id: "separation.beta-drift",
        anchor: "separation.conserved-constant",
        statement: "beta is constant along the flow",
        check: at_most(1e-6),
        corrections: &["separated-equations"],
    },
    ClaimSpec {
        id: "laplace.kepler-harmonic",
        anchor: "pseudosphere.kepler-potential-harmonic",
        statement: "the pseudospherical Kepler potential solves the Laplace-Beltrami equation",
        check: at_most(1e-6),
        corrections: &[],
    },
    ClaimSpec {
        id: "laplace.linear-non-harmonic",
        anchor: "pseudosphere.linear-potential-not-harmonic",
        statement: "the linear potential does not solve the Laplace-Beltrami equation",
        check: Check::AtLeast { bound: 1e-2 },
        corrections: &[],
    },
    ClaimSpec {
        id: "flat-limit.second-order",
        anchor: "higgs-oscillator.flat-limit",
        statement: "the anisotropic Higgs energy tends to the flat one as 1/R0^2",
        check: Check::Within { lo: 80.0, hi: 120.0 },
        corrections: &["flat-limit-scaling", "ambient-anisotropy"],
    },
    ClaimSpec {
        id: "dynamics.drift",
        anchor: "dynamics.conservation",
        statement: "certified integrals stay constant along integrated orbits",
        check: at_most(1e-6),
        corrections: &["vector-field-sign"],
    },
];

pub fn claim(id: &str) -> Option<&'static ClaimSpec> {
    CLAIMS.iter().find(|c| c.id == id)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correction {
    pub id: &'static str,
    pub form: &'static str,
}

pub const CORRECTIONS: &[Correction] = &[
    Correction { id: "vector-field-sign", form: "flow x' = {H, x} with {p, q} = 1" },
    Correction { id: "reduced-angular-momentum", form: "J = q x p + s q/|q|" },
    Correction { id: "flat-runge-lenz", form: "RL = J x p + gamma q/|q|" },
    Correction { id: "flat-reduced-hidden-integral", form: "A = n3.RL + (eps_el/2)(n3 x q)^2 + (dw/2)(n3 x q)^2/|q|" },
    Correction {
        id: "curved-hidden-vector-pairing",
        form: "A_k = (J sigma_k Jbar)/(2 R0^2) + 2 w^2 R0^2 (zbar sigma_k z)/(1 - eps z zbar)^2",
    },
    Correction { id: "curved-target-energy", form: "E_target = -w^2/2 - eps E/(2 r0)" },
    Correction { id: "pseudo-runge-lenz", form: "RL = (J x T)/(2 r0) + gamma q/|q|" },
    Correction { id: "curved-hidden-reduction", form: "A_source = 2 A_target - 2 eps s J3/r0" },
    Correction { id: "source-sign-relation", form: "H(eps = -1; dw, eps_el) = H(eps = +1; dw, eps_el + 2 dw/r0)" },
    Correction {
        id: "ambient-anisotropy",
        form: "U = (dw/2 + eps eps_el R0^2 (R0^4 - x0^4)/(4 x0^4)) x sigma3 xbar on eps x xbar + x0^2 = R0^2",
    },
    Correction {
        id: "sphere-micz-forms",
        form: "kinetic (1+q^2)^2 (p^2 + s^2/q^2)/(8 r0^2); dw term over (1+q^2)^2; RL = (J x T)/(2 r0) + gamma q/|q|",
    },
    Correction {
        id: "parabolic-chart",
        form: "x0 = r0 cosh((chi+zeta)/2), x3 = r0 sinh((chi-zeta)/2), q = (sqrt(xi eta) e^{i phi}, x3)/(r0 + x0)",
    },
    Correction {
        id: "parabolic-hamiltonian",
        form: "p_phi = (q x p)_3 - s (1 - q3/|q|); dw term (dw/(2 r0))(xi S_xi - eta S_eta - eps (xi^2 - eta^2))/(xi + eta)",
    },
    Correction { id: "separated-equations", form: "eps_el xi^2/2 and p_phi^2/(2 xi) in the xi equation; eta equation mirrored" },
    Correction { id: "hyperbolic-separated-equations", form: "p_chi = r0 cosh(chi) p_xi substituted into the corrected xi equation" },
    Correction { id: "flat-limit-scaling", form: "z = u/(sqrt(2) R0), pi = sqrt(2) R0 w" },
];

pub fn correction(id: &str) -> Option<&'static Correction> {
    CORRECTIONS.iter().find(|c| c.id == id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn ids_and_anchors_are_unique() {
        let ids: BTreeSet<_> = CLAIMS.iter().map(|c| c.id).collect();
        let anchors: BTreeSet<_> = CLAIMS.iter().map(|c| c.anchor).collect();
        assert_eq!(ids.len(), CLAIMS.len());
        assert_eq!(anchors.len(), CLAIMS.len());
    }

    #[test]
    fn corrections_resolve() {
        for c in CLAIMS {
            for k in c.corrections {
                assert!(correction(k).is_some(), "{} -> {k}", c.id);
            }
        }
    }

    #[test]
    fn checks() {
        assert!(Check::Within { lo: 80.0, hi: 120.0 }.passes(100.0));
        assert!(!Check::Within { lo: 80.0, hi: 120.0 }.passes(79.0));
        assert!(Check::AtLeast { bound: 1e-2 }.passes(0.5));
        assert!(!at_most(1e-9).passes(f64::NAN));
    }
}
