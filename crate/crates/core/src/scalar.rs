//! Scalar abstraction shared by every module.
//!
//! [`Scalar`] is the field interface used by the rational recurrences (edge
//! relations, vertex equations, first-region weights). It is implemented for
//! `f32`, `f64`, [`BigRational`] and the MPFR-backed [`Mp`]. [`Real`] adds the
//! transcendental functions needed by the relation evaluators and the identity
//! engines; the exact rational type does not implement it.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive, Zero};
use rug::float::{Constant, Round};
use rug::integer::Order;
use rug::ops::Pow;
use rug::Float;

pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Num
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// True when arithmetic is exact (no rounding).
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;
    fn from_ratio(r: &BigRational) -> Self;
    /// Exact rational value, `None` for NaN or infinities.
    fn to_ratio(&self) -> Option<BigRational>;
    fn to_f64(&self) -> f64;

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    fn two() -> Self {
        Self::from_i64(2)
    }
}

pub trait Real: Scalar {
    /// Mantissa bits.
    const BITS: u32;

    fn from_f64(v: f64) -> Self;
    fn sqrt(&self) -> Self;
    fn ln(&self) -> Self;
    fn ln_1p(&self) -> Self;
    fn exp(&self) -> Self;
    fn cosh(&self) -> Self;
    fn sinh(&self) -> Self;
    fn acosh(&self) -> Self;
    fn cos(&self) -> Self;
    fn sin(&self) -> Self;
    fn acos(&self) -> Self;
    fn atan2(&self, x: &Self) -> Self;
    fn pi() -> Self;

    /// Unit roundoff, 2^(1-BITS).
    fn epsilon() -> Self {
        Self::from_f64(2.0).powi(1 - Self::BITS as i32)
    }

    fn powi(&self, n: i32) -> Self {
        let mut base = if n < 0 {
            Self::one() / self.clone()
        } else {
            self.clone()
        };
        let mut k = n.unsigned_abs();
        let mut acc = Self::one();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            k >>= 1;
        }
        acc
    }

    fn is_finite(&self) -> bool {
        self.to_f64().is_finite() || self.to_ratio().is_some()
    }
}

/// Converts between scalar types through the exact rational value.
pub fn cast<A: Scalar, B: Scalar>(a: &A) -> B {
    match a.to_ratio() {
        Some(r) => B::from_ratio(&r),
        None => panic!("cast of non-finite value {a}"),
    }
}

macro_rules! impl_native {
    ($t:ty, $bits:expr) => {
        impl Scalar for $t {
            const EXACT: bool = false;
            fn from_i64(v: i64) -> Self {
                v as $t
            }
            fn from_ratio(r: &BigRational) -> Self {
                ToPrimitive::to_f64(r).unwrap_or(f64::NAN) as $t
            }
            fn to_ratio(&self) -> Option<BigRational> {
                BigRational::from_float(*self)
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
        }

        impl Real for $t {
            const BITS: u32 = $bits;
            fn from_f64(v: f64) -> Self {
                v as $t
            }
            fn sqrt(&self) -> Self {
                <$t>::sqrt(*self)
            }
            fn ln(&self) -> Self {
                <$t>::ln(*self)
            }
            fn ln_1p(&self) -> Self {
                <$t>::ln_1p(*self)
            }
            fn exp(&self) -> Self {
                <$t>::exp(*self)
            }
            fn cosh(&self) -> Self {
                <$t>::cosh(*self)
            }
            fn sinh(&self) -> Self {
                <$t>::sinh(*self)
            }
            fn acosh(&self) -> Self {
                <$t>::acosh(*self)
            }
            fn cos(&self) -> Self {
                <$t>::cos(*self)
            }
            fn sin(&self) -> Self {
                <$t>::sin(*self)
            }
            fn acos(&self) -> Self {
                <$t>::acos(*self)
            }
            fn atan2(&self, x: &Self) -> Self {
                <$t>::atan2(*self, *x)
            }
            fn pi() -> Self {
                std::f64::consts::PI as $t
            }
            fn epsilon() -> Self {
                <$t>::EPSILON
            }
            fn powi(&self, n: i32) -> Self {
                <$t>::powi(*self, n)
            }
            fn is_finite(&self) -> bool {
                <$t>::is_finite(*self)
            }
        }
    };
}

impl_native!(f32, 24);
impl_native!(f64, 53);

impl Scalar for BigRational {
    const EXACT: bool = true;
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_ratio(r: &BigRational) -> Self {
        r.clone()
    }
    fn to_ratio(&self) -> Option<BigRational> {
        Some(self.clone())
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Multiple-precision binary float with `P` mantissa bits.
#[derive(Clone)]
pub struct Mp<const P: u32>(pub Float);

impl<const P: u32> Mp<P> {
    pub fn new(v: Float) -> Self {
        Mp(Float::with_val(P, v))
    }

    pub fn inner(&self) -> &Float {
        &self.0
    }

    /// Dilogarithm Li2 from MPFR, used as an independent reference.
    pub fn li2(&self) -> Self {
        Mp(self.0.clone().li2())
    }

    /// Rounded decimal string with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        self.0.to_string_radix(10, Some(digits))
    }
}

fn bigint_to_rug(v: &BigInt) -> rug::Integer {
    let (sign, digits) = v.to_u64_digits();
    let mag = rug::Integer::from_digits(&digits, Order::Lsf);
    if sign == Sign::Minus {
        -mag
    } else {
        mag
    }
}

fn rug_to_bigint(v: &rug::Integer) -> BigInt {
    let digits = v.to_digits::<u64>(Order::Lsf);
    let mag = num_bigint::BigUint::from_slice(
        &digits
            .iter()
            .flat_map(|d| [(*d & 0xffff_ffff) as u32, (*d >> 32) as u32])
            .collect::<Vec<_>>(),
    );
    let sign = match v.cmp0() {
        Ordering::Less => Sign::Minus,
        Ordering::Equal => Sign::NoSign,
        Ordering::Greater => Sign::Plus,
    };
    BigInt::from_biguint(sign, mag)
}

impl<const P: u32> fmt::Debug for Mp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mp<{}>({})", P, self.0)
    }
}

impl<const P: u32> fmt::Display for Mp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl<const P: u32> PartialEq for Mp<P> {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl<const P: u32> PartialOrd for Mp<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

macro_rules! mp_binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl<const P: u32> $tr for Mp<P> {
            type Output = Mp<P>;
            fn $m(self, rhs: Mp<P>) -> Mp<P> {
                Mp(self.0 $op rhs.0)
            }
        }
        impl<'a, const P: u32> $tr<&'a Mp<P>> for Mp<P> {
            type Output = Mp<P>;
            fn $m(self, rhs: &'a Mp<P>) -> Mp<P> {
                Mp(self.0 $op &rhs.0)
            }
        }
    };
}

mp_binop!(Add, add, +);
mp_binop!(Sub, sub, -);
mp_binop!(Mul, mul, *);
mp_binop!(Div, div, /);
mp_binop!(Rem, rem, %);

impl<const P: u32> Neg for Mp<P> {
    type Output = Mp<P>;
    fn neg(self) -> Mp<P> {
        Mp(-self.0)
    }
}

impl<const P: u32> Zero for Mp<P> {
    fn zero() -> Self {
        Mp(Float::new(P))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl<const P: u32> One for Mp<P> {
    fn one() -> Self {
        Mp(Float::with_val(P, 1))
    }
}

impl<const P: u32> Num for Mp<P> {
    type FromStrRadixErr = rug::float::ParseFloatError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        let parsed = Float::parse_radix(s, radix as i32)?;
        Ok(Mp(Float::with_val(P, parsed)))
    }
}

impl<const P: u32> Scalar for Mp<P> {
    const EXACT: bool = false;
    fn from_i64(v: i64) -> Self {
        Mp(Float::with_val(P, v))
    }
    fn from_ratio(r: &BigRational) -> Self {
        let q = rug::Rational::from((bigint_to_rug(r.numer()), bigint_to_rug(r.denom())));
        Mp(Float::with_val_round(P, &q, Round::Nearest).0)
    }
    fn to_ratio(&self) -> Option<BigRational> {
        let q = self.0.to_rational()?;
        let (n, d) = q.into_numer_denom();
        Some(BigRational::new(rug_to_bigint(&n), rug_to_bigint(&d)))
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }
    fn abs(&self) -> Self {
        Mp(self.0.clone().abs())
    }
    fn square(&self) -> Self {
        Mp(self.0.clone().square())
    }
}

impl<const P: u32> Real for Mp<P> {
    const BITS: u32 = P;
    fn from_f64(v: f64) -> Self {
        Mp(Float::with_val(P, v))
    }
    fn sqrt(&self) -> Self {
        Mp(self.0.clone().sqrt())
    }
    fn ln(&self) -> Self {
        Mp(self.0.clone().ln())
    }
    fn ln_1p(&self) -> Self {
        Mp(self.0.clone().ln_1p())
    }
    fn exp(&self) -> Self {
        Mp(self.0.clone().exp())
    }
    fn cosh(&self) -> Self {
        Mp(self.0.clone().cosh())
    }
    fn sinh(&self) -> Self {
        Mp(self.0.clone().sinh())
    }
    fn acosh(&self) -> Self {
        Mp(self.0.clone().acosh())
    }
    fn cos(&self) -> Self {
        Mp(self.0.clone().cos())
    }
    fn sin(&self) -> Self {
        Mp(self.0.clone().sin())
    }
    fn acos(&self) -> Self {
        Mp(self.0.clone().acos())
    }
    fn atan2(&self, x: &Self) -> Self {
        Mp(self.0.clone().atan2(&x.0))
    }
    fn pi() -> Self {
        Mp(Float::with_val(P, Constant::Pi))
    }
    fn epsilon() -> Self {
        Mp(Float::with_val(P, Float::with_val(P, 2).pow(1 - P as i32)))
    }
    fn powi(&self, n: i32) -> Self {
        Mp(self.0.clone().pow(n))
    }
    fn is_finite(&self) -> bool {
        self.0.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type F128 = Mp<128>;

    #[test]
    fn ratio_roundtrip_is_exact() {
        let r = BigRational::new(BigInt::from(-7), BigInt::from(1024));
        let m = F128::from_ratio(&r);
        assert_eq!(m.to_ratio().unwrap(), r);
        assert_eq!(f64::from_ratio(&r), -7.0 / 1024.0);
        let big = BigRational::from_integer(BigInt::from(3).pow(60u32));
        assert_eq!(F128::from_ratio(&big).to_ratio().unwrap(), big);
    }

    #[test]
    fn mp_elementary_functions() {
        let two = F128::from_i64(2);
        let s = two.sqrt();
        assert!(((s.clone() * s) - two).abs() < F128::epsilon() * F128::from_i64(4));
        let pi = F128::pi();
        assert!((pi.cos() + F128::one()).abs() < F128::epsilon() * F128::from_i64(4));
        let x = F128::from_f64(1.5);
        let back = x.acosh().cosh();
        assert!((back - x).abs() < F128::epsilon() * F128::from_i64(8));
    }

    #[test]
    fn cast_between_precisions() {
        let third = Mp::<256>::one() / Mp::<256>::from_i64(3);
        let low: F128 = cast(&third);
        let direct = F128::one() / F128::from_i64(3);
        assert_eq!(low, direct);
    }

    #[test]
    fn epsilon_matches_bits() {
        assert_eq!(Mp::<64>::epsilon().to_f64(), 2f64.powi(-63));
        assert_eq!(<f64 as Real>::epsilon(), f64::EPSILON);
    }

    #[test]
    fn powi_generic_matches_native() {
        let x = Mp::<64>::from_f64(1.25);
        assert_eq!(x.powi(-3).to_f64(), 1.25f64.powi(-3));
    }
}
