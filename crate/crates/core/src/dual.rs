//! Forward-mode dual numbers.
//!
//! Every observable in the crate is written once, generically over [`Scalar`],
//! and evaluated on `f64`, [`D1`] or [`D2`]. A `Dual<T>` carries a value and a
//! single directional derivative, so a gradient in `n` variables costs `n`
//! evaluations. Nesting (`Dual<Dual<f64>>`) gives mixed second derivatives,
//! which is what brackets of brackets need.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use num_traits::{Num, One, Zero};

/// Real scalar usable inside observables.
///
/// `value` exposes the underlying `f64` (the primal part for duals) so that
/// domain checks can be done on any scalar type.
pub trait Scalar: Copy + Debug + Send + Sync + 'static + Num + Neg<Output = Self> + AddAssign + SubAssign + MulAssign {
    fn from_f64(v: f64) -> Self;
    fn value(&self) -> f64;

    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn atanh(self) -> Self;
    fn asinh(self) -> Self;
    /// Four-quadrant arctangent of `self / x`.
    fn atan2(self, x: Self) -> Self;

    fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::one(),
            n if n < 0 => Self::one() / self.powi(-n),
            n => {
                let mut acc = self;
                for _ in 1..n {
                    acc *= self;
                }
                acc
            }
        }
    }

    fn sq(self) -> Self {
        self * self
    }

    fn scale(self, k: f64) -> Self {
        self * Self::from_f64(k)
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn atanh(self) -> Self {
        f64::atanh(self)
    }
    fn asinh(self) -> Self {
        f64::asinh(self)
    }
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

/// Value plus one directional derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual<T> {
    pub v: T,
    pub d: T,
}

pub type D1 = Dual<f64>;
pub type D2 = Dual<D1>;
pub type D3 = Dual<D2>;

impl<T: Scalar> Dual<T> {
    pub fn new(v: T, d: T) -> Self {
        Dual { v, d }
    }

    pub fn constant(v: T) -> Self {
        Dual { v, d: T::zero() }
    }

    pub fn variable(v: T) -> Self {
        Dual { v, d: T::one() }
    }

    /// Applies a function with known derivative `df` at the primal value.
    #[inline]
    fn chain(self, f: T, df: T) -> Self {
        Dual { v: f, d: df * self.d }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual { v: self.v + o.v, d: self.d + o.d }
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual { v: self.v - o.v, d: self.d - o.d }
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual { v: self.v * o.v, d: self.v * o.d + self.d * o.v }
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = T::one() / o.v;
        Dual { v: self.v * inv, d: (self.d * o.v - self.v * o.d) * inv * inv }
    }
}

// Only present because `num_traits::Num` requires it; d(a mod b) = da - trunc(a/b) db.
impl<T: Scalar> Rem for Dual<T> {
    type Output = Self;
    fn rem(self, o: Self) -> Self {
        let k = (self.v.value() / o.v.value()).trunc();
        Dual { v: self.v % o.v, d: self.d - o.d.scale(k) }
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual { v: -self.v, d: -self.d }
    }
}

impl<T: Scalar> AddAssign for Dual<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Scalar> SubAssign for Dual<T> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Scalar> MulAssign for Dual<T> {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl<T: Scalar> Zero for Dual<T> {
    fn zero() -> Self {
        Dual { v: T::zero(), d: T::zero() }
    }
    fn is_zero(&self) -> bool {
        self.v.is_zero() && self.d.is_zero()
    }
}

impl<T: Scalar> One for Dual<T> {
    fn one() -> Self {
        Dual::constant(T::one())
    }
}

impl<T: Scalar> Num for Dual<T> {
    type FromStrRadixErr = <f64 as Num>::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> std::result::Result<Self, Self::FromStrRadixErr> {
        f64::from_str_radix(s, radix).map(|v| Dual::constant(T::from_f64(v)))
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn from_f64(v: f64) -> Self {
        Dual::constant(T::from_f64(v))
    }
    fn value(&self) -> f64 {
        self.v.value()
    }
    fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.chain(r, T::one() / (r + r))
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.v.ln(), T::one() / self.v)
    }
    fn sin(self) -> Self {
        self.chain(self.v.sin(), self.v.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.v.cos(), -self.v.sin())
    }
    fn sinh(self) -> Self {
        self.chain(self.v.sinh(), self.v.cosh())
    }
    fn cosh(self) -> Self {
        self.chain(self.v.cosh(), self.v.sinh())
    }
    fn atanh(self) -> Self {
        self.chain(self.v.atanh(), T::one() / (T::one() - self.v.sq()))
    }
    fn asinh(self) -> Self {
        self.chain(self.v.asinh(), T::one() / (T::one() + self.v.sq()).sqrt())
    }
    fn atan2(self, x: Self) -> Self {
        let r2 = self.v.sq() + x.v.sq();
        Dual { v: self.v.atan2(x.v), d: (x.v * self.d - self.v * x.d) / r2 }
    }
}

/// Derivative of a univariate function at `x`.
pub fn derivative<F>(f: F, x: f64) -> f64
where
    F: Fn(D1) -> D1,
{
    f(D1::variable(x)).d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-6;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn elementary_derivatives_match_central_differences() {
        let x = 0.37;
        type Pair = (fn(D1) -> D1, fn(f64) -> f64);
        let cases: Vec<Pair> = vec![
            (|t| t.sqrt(), f64::sqrt),
            (|t| t.exp(), f64::exp),
            (|t| t.ln(), f64::ln),
            (|t| t.sin(), f64::sin),
            (|t| t.cos(), f64::cos),
            (|t| t.sinh(), f64::sinh),
            (|t| t.cosh(), f64::cosh),
            (|t| t.atanh(), f64::atanh),
            (|t| t.asinh(), f64::asinh),
            (|t| t.powi(-3), |t| t.powi(-3)),
            (|t| t.atan2(D1::from_f64(-0.4)), |t| t.atan2(-0.4)),
            (|t| D1::from_f64(0.8).atan2(t), |t| 0.8f64.atan2(t)),
        ];
        for (i, (fd_dual, fr)) in cases.into_iter().enumerate() {
            let exact = derivative(fd_dual, x);
            let approx = fd(fr, x);
            assert!((exact - approx).abs() < 1e-8, "case {i}: {exact} vs {approx}");
        }
    }

    #[test]
    fn nested_duals_give_second_derivatives() {
        // f(x) = x^3 sinh x, f'' = 6x sinh x + 6x^2 cosh x + x^3 sinh x
        let x = 0.8f64;
        let t = D2::new(D1::variable(x), D1::one());
        let y = t.powi(3) * t.sinh();
        let exact = 6.0 * x * x.sinh() + 6.0 * x * x * x.cosh() + x.powi(3) * x.sinh();
        assert!((y.d.d - exact).abs() < 1e-12);
    }

    #[test]
    fn quotient_rule() {
        let y = derivative(|t| (t * t + D1::one()) / (t - D1::from_f64(2.0)), 0.5);
        // d/dx (x^2+1)/(x-2) = (x^2 - 4x - 1)/(x-2)^2
        let exact = (0.25 - 2.0 - 1.0) / 2.25;
        assert!((y - exact).abs() < 1e-14);
    }
}
