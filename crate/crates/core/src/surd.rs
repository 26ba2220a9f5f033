//! Exact sums of rational multiples of square roots.
//!
//! A [`Surd`] is `Σ q_r·√r` over distinct square-free radicands `r`. The set is
//! closed under `+ − × ÷`, and the sign of any element is decided exactly by
//! peeling off one prime at a time: writing `x = a + b√p` with `a, b` free of
//! `p`, the sign follows from the signs of `a`, `b` and of `a² − p·b²`, all of
//! which live in a strictly smaller field. Every comparison therefore reduces
//! to comparisons of squared quantities, ending at plain rationals.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::scalar::{parse_rational, ExactScalar, Rational, Scalar};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Surd {
    // radicand (square-free, >= 1) -> nonzero coefficient
    terms: BTreeMap<u64, Rational>,
}

impl Surd {
    pub fn from_rational(q: Rational) -> Self {
        let mut s = Surd::default();
        s.add_term(1, q);
        s
    }

    /// `coef · √k` for any `k ≥ 0`.
    pub fn sqrt_scaled(k: u64, coef: Rational) -> Self {
        if k == 0 {
            return Surd::default();
        }
        let (outside, radicand) = split_square(k);
        let mut s = Surd::default();
        s.add_term(radicand, coef * Rational::from_integer(BigInt::from(outside)));
        s
    }

    pub fn sqrt(k: u64) -> Self {
        Self::sqrt_scaled(k, Rational::one())
    }

    /// The rational value, if this surd has no irrational part.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&1).cloned(),
            _ => None,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &Rational)> {
        self.terms.iter().map(|(r, q)| (*r, q))
    }

    fn add_term(&mut self, radicand: u64, coef: Rational) {
        if coef.is_zero() {
            return;
        }
        let entry = self.terms.entry(radicand).or_insert_with(Rational::zero);
        *entry += coef;
        if entry.is_zero() {
            self.terms.remove(&radicand);
        }
    }

    fn scale(&self, k: &Rational) -> Self {
        if k.is_zero() {
            return Surd::default();
        }
        Surd {
            terms: self.terms.iter().map(|(r, q)| (*r, q * k)).collect(),
        }
    }

    fn largest_prime(&self) -> Option<u64> {
        self.terms.keys().filter(|&&r| r > 1).map(|&r| largest_prime_factor(r)).max()
    }

    /// Split into `(a, b)` with `self = a + b·√p`, neither part mentioning `p`.
    fn split_on(&self, p: u64) -> (Surd, Surd) {
        let mut a = Surd::default();
        let mut b = Surd::default();
        for (r, q) in &self.terms {
            if r % p == 0 {
                b.add_term(r / p, q.clone());
            } else {
                a.add_term(*r, q.clone());
            }
        }
        (a, b)
    }

    pub fn signum(&self) -> Ordering {
        let Some(p) = self.largest_prime() else {
            return match self.terms.get(&1) {
                Some(q) if q.is_positive() => Ordering::Greater,
                Some(_) => Ordering::Less,
                None => Ordering::Equal,
            };
        };
        let (a, b) = self.split_on(p);
        let (sa, sb) = (a.signum(), b.signum());
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        // opposite signs: whichever of |a| and |b|√p is larger wins
        let p_rat = Rational::from_integer(BigInt::from(p));
        let d = a.clone() * a - (b.clone() * b).scale(&p_rat);
        match d.signum() {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }

    fn inverse(&self) -> Surd {
        match self.largest_prime() {
            None => {
                let q = self.terms.get(&1).expect("division by zero surd");
                Surd::from_rational(q.recip())
            }
            Some(p) => {
                // 1/(a + b√p) = (a − b√p) / (a² − p b²)
                let (a, b) = self.split_on(p);
                let p_rat = Rational::from_integer(BigInt::from(p));
                let norm = a.clone() * a.clone() - (b.clone() * b.clone()).scale(&p_rat);
                let mut conj = a;
                for (r, q) in b.terms {
                    conj.add_term(r * p, -q);
                }
                conj * norm.inverse()
            }
        }
    }
}

/// `k = outside² · radicand` with `radicand` square-free.
fn split_square(mut k: u64) -> (u64, u64) {
    let mut outside = 1u64;
    let mut radicand = 1u64;
    let mut f = 2u64;
    while f * f <= k {
        let mut e = 0;
        while k % f == 0 {
            k /= f;
            e += 1;
        }
        outside *= f.pow(e / 2);
        if e % 2 == 1 {
            radicand *= f;
        }
        f += 1;
    }
    radicand *= k;
    (outside, radicand)
}

fn largest_prime_factor(mut r: u64) -> u64 {
    let mut best = 1;
    let mut f = 2;
    while f * f <= r {
        while r % f == 0 {
            best = f;
            r /= f;
        }
        f += 1;
    }
    if r > 1 {
        r
    } else {
        best
    }
}

impl PartialOrd for Surd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Surd {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.clone() - other.clone()).signum()
    }
}

impl Add for Surd {
    type Output = Surd;
    fn add(mut self, rhs: Surd) -> Surd {
        for (r, q) in rhs.terms {
            self.add_term(r, q);
        }
        self
    }
}

impl Sub for Surd {
    type Output = Surd;
    fn sub(self, rhs: Surd) -> Surd {
        self + (-rhs)
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd {
            terms: self.terms.into_iter().map(|(r, q)| (r, -q)).collect(),
        }
    }
}

impl Mul for Surd {
    type Output = Surd;
    fn mul(self, rhs: Surd) -> Surd {
        let mut out = Surd::default();
        for (r1, q1) in &self.terms {
            for (r2, q2) in &rhs.terms {
                let g = r1.gcd(r2);
                let coef = q1 * q2 * Rational::from_integer(BigInt::from(g));
                out.add_term((r1 / g) * (r2 / g), coef);
            }
        }
        out
    }
}

impl Div for Surd {
    type Output = Surd;
    fn div(self, rhs: Surd) -> Surd {
        match rhs.as_rational() {
            Some(q) => self.scale(&q.recip()),
            None => self * rhs.inverse(),
        }
    }
}

impl Zero for Surd {
    fn zero() -> Self {
        Surd::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for Surd {
    fn one() -> Self {
        Surd::from_rational(Rational::one())
    }
}

impl ToPrimitive for Surd {
    fn to_i64(&self) -> Option<i64> {
        self.to_f64().map(|x| x.floor() as i64)
    }
    fn to_u64(&self) -> Option<u64> {
        self.to_f64().filter(|x| *x >= 0.0).map(|x| x.floor() as u64)
    }
    fn to_f64(&self) -> Option<f64> {
        Some(
            self.terms
                .iter()
                .map(|(r, q)| q.to_f64().unwrap_or(f64::NAN) * (*r as f64).sqrt())
                .sum(),
        )
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (r, q)) in self.terms.iter().enumerate() {
            let mag = q.abs();
            if idx == 0 {
                if q.is_negative() {
                    write!(f, "-")?;
                }
            } else if q.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            match (*r, mag.is_one()) {
                (1, _) => write!(f, "{mag}")?,
                (r, true) => write!(f, "sqrt({r})")?,
                (r, false) => write!(f, "{mag}*sqrt({r})")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Surd({self})")
    }
}

/// Parse the `Display` form, e.g. `"1/2 - 3*sqrt(2) + sqrt(5)"`.
pub fn parse_surd(s: &str) -> Option<Surd> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return None;
    }
    let mut out = Surd::default();
    let bytes = compact.as_bytes();
    let mut start = 0;
    let mut i = 1;
    let mut pieces = Vec::new();
    while i <= bytes.len() {
        if i == bytes.len() || ((bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'(') {
            pieces.push(&compact[start..i]);
            start = i;
        }
        i += 1;
    }
    for piece in pieces {
        let (neg, body) = match piece.as_bytes()[0] {
            b'-' => (true, &piece[1..]),
            b'+' => (false, &piece[1..]),
            _ => (false, piece),
        };
        let (coef, radicand) = if let Some(pos) = body.find("sqrt(") {
            let coef = match body[..pos].strip_suffix('*') {
                Some(c) => parse_rational(c)?,
                None if pos == 0 => Rational::one(),
                None => return None,
            };
            let inner = body[pos + 5..].strip_suffix(')')?;
            (coef, inner.parse::<u64>().ok()?)
        } else {
            (parse_rational(body)?, 1)
        };
        let coef = if neg { -coef } else { coef };
        out = out + Surd::sqrt_scaled(radicand, coef);
    }
    Some(out)
}

impl Scalar for Surd {
    const EXACT: bool = true;

    fn from_rational(r: &Rational) -> Self {
        Surd::from_rational(r.clone())
    }

    fn sqrt_of_int(k: u64) -> Option<Self> {
        Some(Surd::sqrt(k))
    }

    fn parse_exact(s: &str) -> Option<Self> {
        parse_surd(s)
    }
}

impl ExactScalar for Surd {}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn canonical_radicands() {
        assert_eq!(Surd::sqrt(12), Surd::sqrt_scaled(3, q(2, 1)));
        assert_eq!(Surd::sqrt(16).as_rational(), Some(q(4, 1)));
        assert_eq!(Surd::sqrt(2) * Surd::sqrt(6), Surd::sqrt_scaled(3, q(2, 1)));
        assert!((Surd::sqrt(2) - Surd::sqrt(2)).is_zero());
    }

    #[test]
    fn sign_of_nested_sums() {
        // √2 + √3 vs √10: 5 + 2√6 ≈ 9.899 < 10
        assert!(Surd::sqrt(2) + Surd::sqrt(3) < Surd::sqrt(10));
        // √17 − 2√2 ≈ 1.2948
        let w = Surd::sqrt(17) - Surd::sqrt(8);
        assert!(w > Surd::from_rational(q(129, 100)));
        assert!(w < Surd::from_rational(q(13, 10)));
        // √5 + √7 + √11 − 8 ≈ 0.1984
        let x = Surd::sqrt(5) + Surd::sqrt(7) + Surd::sqrt(11) - Surd::from_rational(q(8, 1));
        assert_eq!(x.signum(), Ordering::Greater);
        assert!((x.to_f64().unwrap() - 0.19844).abs() < 1e-4);
    }

    #[test]
    fn division_round_trips() {
        let a = Surd::sqrt(2) + Surd::sqrt(3) + Surd::from_rational(q(1, 2));
        let b = Surd::sqrt(5) - Surd::sqrt(3);
        let c = a.clone() / b.clone();
        assert_eq!(c * b, a);
    }

    #[test]
    fn display_parse_round_trip() {
        let a = Surd::from_rational(q(-1, 2)) + Surd::sqrt_scaled(2, q(-3, 7)) + Surd::sqrt(5);
        let text = a.to_string();
        assert_eq!(text, "-1/2 - 3/7*sqrt(2) + sqrt(5)");
        assert_eq!(parse_surd(&text), Some(a));
        assert_eq!(parse_surd("0"), Some(Surd::zero()));
        assert_eq!(parse_surd("sqrt("), None);
    }

    #[test]
    fn sqrt_comparison_matches_squaring() {
        // √k ≥ q ⟺ k ≥ q² for q ≥ 0
        for k in 0..=100u64 {
            for num in 0..=40i64 {
                let qv = q(num, 4);
                let by_surd = Surd::sqrt(k) >= Surd::from_rational(qv.clone());
                let by_square = Rational::from_integer(k.into()) >= qv.clone() * qv;
                assert_eq!(by_surd, by_square, "k={k} q={num}/4");
            }
        }
    }
}
