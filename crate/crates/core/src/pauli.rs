//! Complex helpers for the 4D oscillator observables.
//!
//! Pauli matrices are the standard ones, `sigma_3 = diag(1, -1)`, and a
//! bilinear `u sigma v` means `sum_ab u^a (sigma)_ab v^b`.

use num_complex::Complex;

use crate::dual::Scalar;
use crate::error::{Error, Result};

pub type C<S> = Complex<S>;
pub type Pair<S> = [C<S>; 2];

/// Largest imaginary part tolerated (relative to `max(1, |re|)`) before a
/// nominally real combination is rejected.
pub const IMAGINARY_TOL: f64 = 1e-12;

/// Splits the real view into `(z, pi)`.
pub fn unpack<S: Scalar>(x: &[S]) -> (Pair<S>, Pair<S>) {
    ([C::new(x[0], x[1]), C::new(x[2], x[3])], [C::new(x[4], x[5]), C::new(x[6], x[7])])
}

pub fn conj<S: Scalar>(u: &Pair<S>) -> Pair<S> {
    [u[0].conj(), u[1].conj()]
}

/// `sum_a u^a v^a`
pub fn dot<S: Scalar>(u: &Pair<S>, v: &Pair<S>) -> C<S> {
    u[0] * v[0] + u[1] * v[1]
}

/// `u sigma_k v` for `k = 0, 1, 2` (sigma_1, sigma_2, sigma_3).
pub fn bilinear<S: Scalar>(u: &Pair<S>, k: usize, v: &Pair<S>) -> C<S> {
    match k {
        0 => u[0] * v[1] + u[1] * v[0],
        1 => {
            let i = C::new(S::zero(), S::one());
            i * (u[1] * v[0] - u[0] * v[1])
        }
        2 => u[0] * v[0] - u[1] * v[1],
        _ => panic!("Pauli index {k} out of range"),
    }
}

/// `|u|^2`
pub fn norm_sq<S: Scalar>(u: &Pair<S>) -> S {
    u[0].re * u[0].re + u[0].im * u[0].im + u[1].re * u[1].re + u[1].im * u[1].im
}

pub fn times_i<S: Scalar>(c: C<S>) -> C<S> {
    C::new(-c.im, c.re)
}

/// Real part of a combination that must be real, rejecting a sizeable
/// imaginary residue.
pub fn real_part<S: Scalar>(c: C<S>, what: &str) -> Result<S> {
    let (re, im) = (c.re.value(), c.im.value());
    if im.abs() > IMAGINARY_TOL * re.abs().max(1.0) || !im.is_finite() {
        return Err(Error::ImaginaryResidue { what: what.to_string(), residue: im });
    }
    Ok(c.re)
}
