//! Forward-mode automatic differentiation with dual numbers.
//!
//! `Dual<S>` carries a value and one directional derivative. Because
//! `Dual<S>` is itself a [`Scalar`] whenever `S` is, duals nest:
//! `Dual<Dual<f64>>` evaluates mixed second derivatives exactly, which is what
//! the regularity matrices and Newton Jacobians are built from.
//!
//! Comparisons (`PartialOrd`, `min`, `max`) act on the value part only;
//! `min`/`max` keep the derivative of the selected operand.

use crate::scalar::Scalar;
use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};
use std::fmt;
use std::num::FpCategory;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

#[derive(Clone, Copy, PartialEq)]
pub struct Dual<S> {
    /// Value part.
    pub re: S,
    /// Derivative part.
    pub eps: S,
}

impl<S: Scalar> Dual<S> {
    #[inline]
    pub fn new(re: S, eps: S) -> Self {
        Dual { re, eps }
    }

    /// Constant: derivative part zero.
    #[inline]
    pub fn constant(re: S) -> Self {
        Dual { re, eps: S::zero() }
    }

    /// Seeded variable: derivative part one.
    #[inline]
    pub fn variable(re: S) -> Self {
        Dual { re, eps: S::one() }
    }

    /// Applies `f` with derivative factor `df` (chain rule helper).
    #[inline]
    fn lift(self, f: S, df: S) -> Self {
        Dual {
            re: f,
            eps: self.eps * df,
        }
    }
}

/// Derivative of a scalar function of one variable at `x`.
pub fn derivative<S: Scalar>(f: impl FnOnce(Dual<S>) -> Dual<S>, x: S) -> S {
    f(Dual::variable(x)).eps
}

impl<S: Scalar> Scalar for Dual<S> {
    fn real(self) -> f64 {
        self.re.real()
    }
}

impl<S: Scalar> fmt::Debug for Dual<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}+{:?}ε", self.re, self.eps)
    }
}

impl<S: Scalar> fmt::Display for Dual<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}ε", self.re, self.eps)
    }
}

impl<S: Scalar> Default for Dual<S> {
    fn default() -> Self {
        Self::constant(S::zero())
    }
}

impl<S: Scalar> PartialOrd for Dual<S> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.re.partial_cmp(&other.re)
    }
}

impl<S: Scalar> Add for Dual<S> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Dual::new(self.re + rhs.re, self.eps + rhs.eps)
    }
}

impl<S: Scalar> Sub for Dual<S> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Dual::new(self.re - rhs.re, self.eps - rhs.eps)
    }
}

impl<S: Scalar> Mul for Dual<S> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Dual::new(self.re * rhs.re, self.eps * rhs.re + self.re * rhs.eps)
    }
}

impl<S: Scalar> Div for Dual<S> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        Dual::new(
            self.re / rhs.re,
            (self.eps * rhs.re - self.re * rhs.eps) / (rhs.re * rhs.re),
        )
    }
}

impl<S: Scalar> Rem for Dual<S> {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        // d/dx (x mod y) = 1, d/dy = -trunc(x/y) away from the jumps
        let q = (self.re / rhs.re).trunc();
        Dual::new(self.re % rhs.re, self.eps - q * rhs.eps)
    }
}

impl<S: Scalar> Neg for Dual<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<S: Scalar> AddAssign for Dual<S> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}
impl<S: Scalar> SubAssign for Dual<S> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}
impl<S: Scalar> MulAssign for Dual<S> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}
impl<S: Scalar> DivAssign for Dual<S> {
    fn div_assign(&mut self, rhs: Self) {
        *self = *self / rhs;
    }
}

impl<S: Scalar> Zero for Dual<S> {
    fn zero() -> Self {
        Dual::constant(S::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.eps.is_zero()
    }
}

impl<S: Scalar> One for Dual<S> {
    fn one() -> Self {
        Dual::constant(S::one())
    }
}

impl<S: Scalar> Num for Dual<S> {
    type FromStrRadixErr = S::FromStrRadixErr;
    fn from_str_radix(str: &str, radix: u32) -> std::result::Result<Self, Self::FromStrRadixErr> {
        S::from_str_radix(str, radix).map(Dual::constant)
    }
}

impl<S: Scalar> ToPrimitive for Dual<S> {
    fn to_i64(&self) -> Option<i64> {
        self.re.to_i64()
    }
    fn to_u64(&self) -> Option<u64> {
        self.re.to_u64()
    }
    fn to_f64(&self) -> Option<f64> {
        self.re.to_f64()
    }
}

impl<S: Scalar> FromPrimitive for Dual<S> {
    fn from_i64(n: i64) -> Option<Self> {
        S::from_i64(n).map(Dual::constant)
    }
    fn from_u64(n: u64) -> Option<Self> {
        S::from_u64(n).map(Dual::constant)
    }
    fn from_f64(n: f64) -> Option<Self> {
        S::from_f64(n).map(Dual::constant)
    }
}

impl<S: Scalar> NumCast for Dual<S> {
    fn from<T: ToPrimitive>(n: T) -> Option<Self> {
        S::from(n).map(Dual::constant)
    }
}

impl<S: Scalar + FloatConst> FloatConst for Dual<S> {
    fn E() -> Self {
        Dual::constant(S::E())
    }
    fn FRAC_1_PI() -> Self {
        Dual::constant(S::FRAC_1_PI())
    }
    fn FRAC_1_SQRT_2() -> Self {
        Dual::constant(S::FRAC_1_SQRT_2())
    }
    fn FRAC_2_PI() -> Self {
        Dual::constant(S::FRAC_2_PI())
    }
    fn FRAC_2_SQRT_PI() -> Self {
        Dual::constant(S::FRAC_2_SQRT_PI())
    }
    fn FRAC_PI_2() -> Self {
        Dual::constant(S::FRAC_PI_2())
    }
    fn FRAC_PI_3() -> Self {
        Dual::constant(S::FRAC_PI_3())
    }
    fn FRAC_PI_4() -> Self {
        Dual::constant(S::FRAC_PI_4())
    }
    fn FRAC_PI_6() -> Self {
        Dual::constant(S::FRAC_PI_6())
    }
    fn FRAC_PI_8() -> Self {
        Dual::constant(S::FRAC_PI_8())
    }
    fn LN_10() -> Self {
        Dual::constant(S::LN_10())
    }
    fn LN_2() -> Self {
        Dual::constant(S::LN_2())
    }
    fn LOG10_E() -> Self {
        Dual::constant(S::LOG10_E())
    }
    fn LOG2_E() -> Self {
        Dual::constant(S::LOG2_E())
    }
    fn PI() -> Self {
        Dual::constant(S::PI())
    }
    fn SQRT_2() -> Self {
        Dual::constant(S::SQRT_2())
    }
}

impl<S: Scalar> Float for Dual<S> {
    fn nan() -> Self {
        Dual::constant(S::nan())
    }
    fn infinity() -> Self {
        Dual::constant(S::infinity())
    }
    fn neg_infinity() -> Self {
        Dual::constant(S::neg_infinity())
    }
    fn neg_zero() -> Self {
        Dual::constant(S::neg_zero())
    }
    fn min_value() -> Self {
        Dual::constant(S::min_value())
    }
    fn min_positive_value() -> Self {
        Dual::constant(S::min_positive_value())
    }
    fn max_value() -> Self {
        Dual::constant(S::max_value())
    }

    fn is_nan(self) -> bool {
        self.re.is_nan() || self.eps.is_nan()
    }
    fn is_infinite(self) -> bool {
        self.re.is_infinite() || self.eps.is_infinite()
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.eps.is_finite()
    }
    fn is_normal(self) -> bool {
        self.re.is_normal()
    }
    fn classify(self) -> FpCategory {
        self.re.classify()
    }

    fn floor(self) -> Self {
        Dual::constant(self.re.floor())
    }
    fn ceil(self) -> Self {
        Dual::constant(self.re.ceil())
    }
    fn round(self) -> Self {
        Dual::constant(self.re.round())
    }
    fn trunc(self) -> Self {
        Dual::constant(self.re.trunc())
    }
    fn fract(self) -> Self {
        Dual::new(self.re.fract(), self.eps)
    }

    fn abs(self) -> Self {
        if self.re < S::zero() {
            -self
        } else {
            self
        }
    }
    fn signum(self) -> Self {
        Dual::constant(self.re.signum())
    }
    fn is_sign_positive(self) -> bool {
        self.re.is_sign_positive()
    }
    fn is_sign_negative(self) -> bool {
        self.re.is_sign_negative()
    }

    fn mul_add(self, a: Self, b: Self) -> Self {
        Dual::new(
            self.re.mul_add(a.re, b.re),
            self.eps * a.re + self.re * a.eps + b.eps,
        )
    }
    fn recip(self) -> Self {
        let r = self.re.recip();
        self.lift(r, -(r * r))
    }

    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        let d = S::from_i32(n).expect("exponent fits in scalar") * self.re.powi(n - 1);
        self.lift(self.re.powi(n), d)
    }
    fn powf(self, n: Self) -> Self {
        // a^b = exp(b ln a); derivative parts from both base and exponent
        let v = self.re.powf(n.re);
        let da = n.re * self.re.powf(n.re - S::one());
        let db = if n.eps.is_zero() {
            S::zero()
        } else {
            v * self.re.ln()
        };
        Dual::new(v, self.eps * da + n.eps * db)
    }
    fn sqrt(self) -> Self {
        let r = self.re.sqrt();
        self.lift(r, (S::of(2.0) * r).recip())
    }
    fn cbrt(self) -> Self {
        let r = self.re.cbrt();
        self.lift(r, (S::of(3.0) * r * r).recip())
    }

    fn exp(self) -> Self {
        let e = self.re.exp();
        self.lift(e, e)
    }
    fn exp2(self) -> Self {
        let e = self.re.exp2();
        self.lift(e, e * S::of(std::f64::consts::LN_2))
    }
    fn ln(self) -> Self {
        self.lift(self.re.ln(), self.re.recip())
    }
    fn log(self, base: Self) -> Self {
        self.ln() / base.ln()
    }
    fn log2(self) -> Self {
        self.lift(
            self.re.log2(),
            (self.re * S::of(std::f64::consts::LN_2)).recip(),
        )
    }
    fn log10(self) -> Self {
        self.lift(
            self.re.log10(),
            (self.re * S::of(std::f64::consts::LN_10)).recip(),
        )
    }
    fn exp_m1(self) -> Self {
        self.lift(self.re.exp_m1(), self.re.exp())
    }
    fn ln_1p(self) -> Self {
        self.lift(self.re.ln_1p(), (S::one() + self.re).recip())
    }

    fn max(self, other: Self) -> Self {
        if self.re >= other.re {
            self
        } else {
            other
        }
    }
    fn min(self, other: Self) -> Self {
        if self.re <= other.re {
            self
        } else {
            other
        }
    }
    #[allow(deprecated)]
    fn abs_sub(self, other: Self) -> Self {
        if self.re > other.re {
            self - other
        } else {
            Self::zero()
        }
    }
    fn hypot(self, other: Self) -> Self {
        let h = self.re.hypot(other.re);
        Dual::new(h, (self.re * self.eps + other.re * other.eps) / h)
    }

    fn sin(self) -> Self {
        self.lift(self.re.sin(), self.re.cos())
    }
    fn cos(self) -> Self {
        self.lift(self.re.cos(), -self.re.sin())
    }
    fn tan(self) -> Self {
        let c = self.re.cos();
        self.lift(self.re.tan(), (c * c).recip())
    }
    fn sin_cos(self) -> (Self, Self) {
        (self.sin(), self.cos())
    }
    fn asin(self) -> Self {
        self.lift(
            self.re.asin(),
            (S::one() - self.re * self.re).sqrt().recip(),
        )
    }
    fn acos(self) -> Self {
        self.lift(
            self.re.acos(),
            -(S::one() - self.re * self.re).sqrt().recip(),
        )
    }
    fn atan(self) -> Self {
        self.lift(self.re.atan(), (S::one() + self.re * self.re).recip())
    }
    fn atan2(self, other: Self) -> Self {
        let den = self.re * self.re + other.re * other.re;
        Dual::new(
            self.re.atan2(other.re),
            (other.re * self.eps - self.re * other.eps) / den,
        )
    }

    fn sinh(self) -> Self {
        self.lift(self.re.sinh(), self.re.cosh())
    }
    fn cosh(self) -> Self {
        self.lift(self.re.cosh(), self.re.sinh())
    }
    fn tanh(self) -> Self {
        let t = self.re.tanh();
        self.lift(t, S::one() - t * t)
    }
    fn asinh(self) -> Self {
        self.lift(
            self.re.asinh(),
            (self.re * self.re + S::one()).sqrt().recip(),
        )
    }
    fn acosh(self) -> Self {
        self.lift(
            self.re.acosh(),
            (self.re * self.re - S::one()).sqrt().recip(),
        )
    }
    fn atanh(self) -> Self {
        self.lift(self.re.atanh(), (S::one() - self.re * self.re).recip())
    }

    fn integer_decode(self) -> (u64, i16, i8) {
        self.re.integer_decode()
    }
    fn epsilon() -> Self {
        Dual::constant(S::epsilon())
    }
    fn to_degrees(self) -> Self {
        self.lift(self.re.to_degrees(), S::of(180.0 / std::f64::consts::PI))
    }
    fn to_radians(self) -> Self {
        self.lift(self.re.to_radians(), S::of(std::f64::consts::PI / 180.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(x: f64) -> Dual<f64> {
        Dual::variable(x)
    }

    #[test]
    fn arithmetic_rules() {
        let x = var(3.0);
        let y = Dual::constant(2.0);
        assert_eq!((x * x).eps, 6.0);
        assert_eq!((x / y).eps, 0.5);
        assert_eq!((x + y * x).eps, 3.0);
        assert_eq!((-x).eps, -1.0);
    }

    #[test]
    fn transcendental_rules() {
        let x = var(0.7);
        assert!((x.sin().eps - 0.7f64.cos()).abs() < 1e-15);
        assert!((x.exp().eps - 0.7f64.exp()).abs() < 1e-15);
        assert!((x.ln().eps - 1.0 / 0.7).abs() < 1e-15);
        assert!((x.sqrt().eps - 0.5 / 0.7f64.sqrt()).abs() < 1e-15);
        assert!((x.powi(3).eps - 3.0 * 0.49).abs() < 1e-12);
        assert!((x.powf(Dual::constant(2.5)).eps - 2.5 * 0.7f64.powf(1.5)).abs() < 1e-12);
        assert!((x.tanh().eps - (1.0 - 0.7f64.tanh().powi(2))).abs() < 1e-15);
    }

    #[test]
    fn atan2_and_hypot() {
        let y = var(1.0);
        let x = Dual::constant(2.0);
        // d/dy atan2(y, x) = x / (x² + y²)
        assert!((y.atan2(x).eps - 2.0 / 5.0).abs() < 1e-15);
        assert!((y.hypot(x).eps - 1.0 / 5.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn nested_second_derivative() {
        // f(x) = x³ ln x, f''(x) = 6x ln x + 5x
        let x0 = 1.3f64;
        let x: Dual<Dual<f64>> = Dual::new(Dual::variable(x0), Dual::one());
        let f = x * x * x * x.ln();
        let expect = 6.0 * x0 * x0.ln() + 5.0 * x0;
        assert!((f.eps.eps - expect).abs() < 1e-12);
    }

    #[test]
    fn comparison_uses_value_part() {
        let a = Dual::new(1.0, 100.0);
        let b = Dual::new(2.0, -100.0);
        assert!(a < b);
        assert_eq!(a.max(b).eps, -100.0);
        assert_eq!(a.min(b).eps, 100.0);
    }

    #[test]
    fn derivative_helper() {
        let d = derivative(|x| x * x * x, 2.0f64);
        assert_eq!(d, 12.0);
    }

    #[test]
    fn generic_over_f32() {
        let d = derivative(|x| x * x, 3.0f32);
        assert_eq!(d, 6.0f32);
    }
}
