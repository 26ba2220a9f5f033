//! Number types the allocation machinery is generic over.
//!
//! Everything in this crate is written against [`Scalar`]. Exact types
//! ([`Rational`], [`Surd`](crate::surd::Surd)) give sound verdicts; the float
//! impls exist for quick experiments and compare with a small tolerance.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational, always in lowest terms with a positive denominator.
pub type Rational = BigRational;

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + ToPrimitive
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Whether comparisons are decided exactly.
    const EXACT: bool;

    fn from_rational(r: &Rational) -> Self;

    /// `√k`, when the type can represent it.
    fn sqrt_of_int(k: u64) -> Option<Self>;

    /// Parse the textual form produced by `Display`.
    fn parse_exact(s: &str) -> Option<Self>;

    /// Slack used by float impls; zero for exact types.
    fn slack(&self) -> Self {
        Self::zero()
    }

    fn from_int(k: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(k)))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `self > other`, beyond float noise.
    fn gt_strict(&self, other: &Self) -> bool {
        if Self::EXACT {
            self > other
        } else {
            self.clone() > other.clone() + other.slack()
        }
    }

    /// `self >= other`, up to float noise.
    fn ge_loose(&self, other: &Self) -> bool {
        !other.gt_strict(self)
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self.ge_loose(other) && other.ge_loose(self)
    }

    fn is_negative_strict(&self) -> bool {
        Self::zero().gt_strict(self)
    }

    fn is_positive_strict(&self) -> bool {
        self.gt_strict(&Self::zero())
    }

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn total_cmp_approx(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).unwrap_or(Ordering::Equal)
    }
}

/// Marker for types whose arithmetic and comparisons are exact.
pub trait ExactScalar: Scalar {}

impl ExactScalar for Rational {}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn sqrt_of_int(k: u64) -> Option<Self> {
        let root = k.sqrt();
        (root * root == k).then(|| Rational::from_integer(BigInt::from(root)))
    }

    fn parse_exact(s: &str) -> Option<Self> {
        parse_rational(s)
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }
}

macro_rules! float_scalar {
    ($t:ty, $eps:expr) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_rational(r: &Rational) -> Self {
                r.to_f64().unwrap_or(f64::NAN) as $t
            }

            fn sqrt_of_int(k: u64) -> Option<Self> {
                Some((k as $t).sqrt())
            }

            fn parse_exact(s: &str) -> Option<Self> {
                s.trim().parse().ok().or_else(|| {
                    parse_rational(s).and_then(|r| r.to_f64()).map(|x| x as $t)
                })
            }

            fn slack(&self) -> Self {
                $eps * (1.0 + self.abs())
            }
        }
    };
}

float_scalar!(f64, 1e-9);
float_scalar!(f32, 1e-5);

/// Parse `"p/q"` or `"p"` (optionally signed) into a reduced rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let r = Rational::from_str(s).ok()?;
    if r.denom().is_zero() {
        return None;
    }
    Some(r)
}

/// Sum of a sequence of scalars (`Sum` is not part of the bound set).
pub fn sum<T: Scalar, I: IntoIterator<Item = T>>(iter: I) -> T {
    iter.into_iter().fold(T::zero(), |acc, x| acc + x)
}

pub fn max_of<T: Scalar, I: IntoIterator<Item = T>>(iter: I) -> Option<T> {
    iter.into_iter().fold(None, |best, x| match best {
        Some(b) if b >= x => Some(b),
        _ => Some(x),
    })
}

/// e^{-1/e}, the constant the NSW reallocation guarantee is stated against.
pub fn inv_e_pow_inv_e() -> f64 {
    (-1.0f64 / std::f64::consts::E).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn parses_rational_forms() {
        assert_eq!(parse_rational("1/2"), Some(q(1, 2)));
        assert_eq!(parse_rational("-3"), Some(q(-3, 1)));
        assert_eq!(parse_rational("4/8"), Some(q(1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
        assert_eq!(q(6, -4).to_string(), "-3/2");
    }

    #[test]
    fn rational_sqrt_only_for_squares() {
        assert_eq!(Rational::sqrt_of_int(49), Some(q(7, 1)));
        assert_eq!(Rational::sqrt_of_int(0), Some(q(0, 1)));
        assert_eq!(Rational::sqrt_of_int(2), None);
    }

    #[test]
    fn float_comparisons_absorb_noise() {
        let a = 0.1f64 + 0.2;
        assert!(a.approx_eq(&0.3));
        assert!(!a.gt_strict(&0.3));
        assert!(1.0f64.gt_strict(&0.999));
        assert!(!q(3, 10).gt_strict(&q(3, 10)));
    }

    proptest! {
        #[test]
        fn rational_add_is_associative(a in -1000i64..1000, b in 1i64..500, c in -1000i64..1000,
                                       d in 1i64..500, e in -1000i64..1000, f in 1i64..500) {
            let (x, y, z) = (q(a, b), q(c, d), q(e, f));
            prop_assert_eq!((x.clone() + y.clone()) + z.clone(), x.clone() + (y.clone() + z.clone()));
            // total order: exactly one of <, =, > holds and it is antisymmetric
            let ord = x.cmp(&y);
            prop_assert_eq!(ord.reverse(), y.cmp(&x));
            prop_assert_eq!(x.to_string().parse::<Rational>().unwrap(), x);
        }
    }
}
