//! Numerical laboratory for integrable oscillator and MICZ-Kepler systems.
//!
//! Observables are written once, generically over [`dual::Scalar`], and are
//! differentiated exactly with forward-mode dual numbers. Integrability,
//! reduction and separation claims are then checked as Poisson-bracket
//! residuals, level-set identities and conservation drift along trajectories.

// Guards are written `!(x > 0.0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bracket;
pub mod curved;
pub mod dual;
pub mod dynamics;
pub mod error;
pub mod flat;
pub mod ks;
pub mod pauli;
pub mod phase;
pub mod separation;
pub mod system;

pub use bracket::{poisson_bracket, Obs, Observable, PoissonStructure};
pub use error::{Error, Result};
pub use phase::{Curvature, PhasePoint4C, ReducedPoint3, SystemParams};
pub use system::SystemId;
