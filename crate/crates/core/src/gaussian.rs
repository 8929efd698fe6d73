//! Exact arithmetic in the Gaussian integers `Z[i]`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{self, Int};

/// `re + im·i` with integer components of type `T`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(bound(serialize = "", deserialize = ""))]
#[serde(into = "String", try_from = "String")]
pub struct GaussInt<T: Int> {
    pub re: T,
    pub im: T,
}

impl<T: Int> GaussInt<T> {
    pub fn new(re: T, im: T) -> Self {
        Self { re, im }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        Self::new(T::of_i64(re), T::of_i64(im))
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn one() -> Self {
        Self::new(T::one(), T::zero())
    }

    pub fn i() -> Self {
        Self::new(T::zero(), T::one())
    }

    /// The four units `1, i, -1, -i`.
    pub fn units() -> [Self; 4] {
        [
            Self::from_ints(1, 0),
            Self::from_ints(0, 1),
            Self::from_ints(-1, 0),
            Self::from_ints(0, -1),
        ]
    }

    pub fn from_int(v: T) -> Self {
        Self::new(v, T::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_unit(&self) -> bool {
        self.norm().is_one()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    /// `re² + im²`.
    pub fn norm(&self) -> T {
        scalar::add(
            &scalar::mul(&self.re, &self.re),
            &scalar::mul(&self.im, &self.im),
        )
    }

    pub fn scale(&self, k: &T) -> Self {
        Self::new(scalar::mul(&self.re, k), scalar::mul(&self.im, k))
    }

    /// Multiplication by `i^k`.
    pub fn mul_i_pow(&self, k: u32) -> Self {
        match k % 4 {
            0 => self.clone(),
            1 => Self::new(-self.im.clone(), self.re.clone()),
            2 => Self::new(-self.re.clone(), -self.im.clone()),
            _ => Self::new(self.im.clone(), -self.re.clone()),
        }
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        let n = d.norm();
        let num = self * &d.conj();
        let (qr, rr) = num.re.div_rem(&n);
        let (qi, ri) = num.im.div_rem(&n);
        if rr.is_zero() && ri.is_zero() {
            Some(Self::new(qr, qi))
        } else {
            None
        }
    }

    /// Euclidean division with the quotient rounded to the nearest lattice
    /// point, so that `norm(rem) <= norm(d) / 2`.
    pub fn div_rem_round(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero Gaussian integer");
        let n = d.norm();
        let num = self * &d.conj();
        let two = T::of_i64(2);
        let round = |x: &T| -> T {
            // floor((2x + n) / 2n)
            scalar::add(&scalar::mul(&two, x), &n).div_floor(&scalar::mul(&two, &n))
        };
        let q = Self::new(round(&num.re), round(&num.im));
        let r = self - &(&q * d);
        (q, r)
    }

    /// Greatest common divisor, normalized into the first quadrant
    /// (`re > 0, im >= 0`), or zero when both inputs are zero.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem_round(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.first_quadrant().1
        }
    }

    /// The exponent `k` such that `i^k · self` has `re > 0` and `im >= 0`,
    /// together with that associate. Zero maps to itself with `k = 0`.
    pub fn first_quadrant(&self) -> (u32, Self) {
        if self.is_zero() {
            return (0, self.clone());
        }
        for k in 0..4 {
            let c = self.mul_i_pow(k);
            if c.re.is_positive() && !c.im.is_negative() {
                return (k, c);
            }
        }
        unreachable!("every nonzero Gaussian integer has a first-quadrant associate")
    }

    /// Residue class modulo `2+2i`.
    pub fn residue_2p2i(&self) -> Residue8 {
        // 2+2i and 4 generate the ideal; first clear the imaginary part to
        // {0, 1} with multiples of 2+2i, then reduce the real part mod 4.
        let two = T::of_i64(2);
        let four = T::of_i64(4);
        let k = self.im.div_floor(&two);
        let twok = scalar::mul(&two, &k);
        let re = scalar::sub(&self.re, &twok).mod_floor(&four);
        let im = scalar::sub(&self.im, &twok);
        let re = re.to_u8().expect("residue in range");
        let im = im.to_u8().expect("residue in range");
        Residue8(re + 4 * im)
    }

    /// Largest `k` with `pi^k | self`.
    pub fn ord(&self, pi: &Self) -> Result<u32> {
        if self.is_zero() {
            return Err(Error::ZeroValuation);
        }
        assert!(!pi.is_unit() && !pi.is_zero(), "ord needs a non-unit prime");
        let mut k = 0;
        let mut cur = self.clone();
        while let Some(q) = cur.div_exact(pi) {
            cur = q;
            k += 1;
        }
        Ok(k)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn convert<U: Int>(&self) -> GaussInt<U> {
        GaussInt::new(scalar::convert(&self.re), scalar::convert(&self.im))
    }
}

/// One of the eight classes of `Z[i] / (2+2i)`, encoded as `a + 4b` for the
/// representative `a + bi` with `0 <= a < 4`, `0 <= b < 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Residue8(u8);

impl Residue8 {
    pub fn class_id(self) -> u8 {
        self.0
    }

    /// Residue of 1.
    pub fn one() -> Self {
        Residue8(1)
    }
}

/// Outcome of factoring an odd rational prime in `Z[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrimeSplitting<T: Int> {
    /// `p = π·conj(π)` with `π` in canonical form `re > im > 0`.
    Split(GaussInt<T>),
    /// `p = 3 mod 4`; `p` itself is prime in `Z[i]`.
    Inert,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn check_odd_prime(p: u64) -> Result<()> {
    if p == 2 || !is_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    Ok(())
}

/// Splits an odd prime `p` in `Z[i]` by exhaustive search over `a <= sqrt(p)`.
pub fn split_prime<T: Int>(p: u64) -> Result<PrimeSplitting<T>> {
    check_odd_prime(p)?;
    if p % 4 == 3 {
        return Ok(PrimeSplitting::Inert);
    }
    let mut a = 1u64;
    while a * a < p {
        let b2 = p - a * a;
        let b = (b2 as f64).sqrt().round() as u64;
        for b in b.saturating_sub(1)..=b + 1 {
            if b * b == b2 && b > 0 {
                let (re, im) = if a > b { (a, b) } else { (b, a) };
                return Ok(PrimeSplitting::Split(GaussInt::from_ints(
                    re as i64, im as i64,
                )));
            }
        }
        a += 1;
    }
    unreachable!("a prime p = 1 mod 4 is a sum of two squares")
}

impl<T: Int> Add for &GaussInt<T> {
    type Output = GaussInt<T>;
    fn add(self, o: &GaussInt<T>) -> GaussInt<T> {
        GaussInt::new(scalar::add(&self.re, &o.re), scalar::add(&self.im, &o.im))
    }
}

impl<T: Int> Sub for &GaussInt<T> {
    type Output = GaussInt<T>;
    fn sub(self, o: &GaussInt<T>) -> GaussInt<T> {
        GaussInt::new(scalar::sub(&self.re, &o.re), scalar::sub(&self.im, &o.im))
    }
}

impl<T: Int> Mul for &GaussInt<T> {
    type Output = GaussInt<T>;
    fn mul(self, o: &GaussInt<T>) -> GaussInt<T> {
        let re = scalar::sub(&scalar::mul(&self.re, &o.re), &scalar::mul(&self.im, &o.im));
        let im = scalar::add(&scalar::mul(&self.re, &o.im), &scalar::mul(&self.im, &o.re));
        GaussInt::new(re, im)
    }
}

impl<T: Int> Neg for &GaussInt<T> {
    type Output = GaussInt<T>;
    fn neg(self) -> GaussInt<T> {
        GaussInt::new(-self.re.clone(), -self.im.clone())
    }
}

impl<T: Int> Add for GaussInt<T> {
    type Output = GaussInt<T>;
    fn add(self, o: GaussInt<T>) -> GaussInt<T> {
        &self + &o
    }
}

impl<T: Int> Sub for GaussInt<T> {
    type Output = GaussInt<T>;
    fn sub(self, o: GaussInt<T>) -> GaussInt<T> {
        &self - &o
    }
}

impl<T: Int> Mul for GaussInt<T> {
    type Output = GaussInt<T>;
    fn mul(self, o: GaussInt<T>) -> GaussInt<T> {
        &self * &o
    }
}

impl<T: Int> Neg for GaussInt<T> {
    type Output = GaussInt<T>;
    fn neg(self) -> GaussInt<T> {
        -&self
    }
}

impl<T: Int> Zero for GaussInt<T> {
    fn zero() -> Self {
        GaussInt::zero()
    }
    fn is_zero(&self) -> bool {
        GaussInt::is_zero(self)
    }
}

impl<T: Int> One for GaussInt<T> {
    fn one() -> Self {
        GaussInt::one()
    }
}

impl<T: Int> fmt::Display for GaussInt<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, -self.im.clone())
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl<T: Int> fmt::Debug for GaussInt<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<T: Int> FromStr for GaussInt<T> {
    type Err = Error;

    /// Parses `a+bi` / `a-bi`. A bare integer `a` and a bare `bi` are also
    /// accepted.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("not a Gaussian integer: {s:?}"));
        let parse = |t: &str| t.parse::<T>().map_err(|_| bad());
        let Some(body) = s.strip_suffix('i') else {
            return Ok(Self::from_int(parse(s)?));
        };
        // split at the last sign that is not in leading position
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(_, c)| c == '+' || c == '-')
            .last()
            .map(|(k, _)| k);
        match split {
            Some(k) => {
                let re = parse(&body[..k])?;
                let im_str = &body[k..];
                let im = match im_str {
                    "+" => T::one(),
                    "-" => -T::one(),
                    _ => parse(im_str.trim_start_matches('+'))?,
                };
                Ok(Self::new(re, im))
            }
            None => {
                let im = match body {
                    "" | "+" => T::one(),
                    "-" => -T::one(),
                    _ => parse(body.trim_start_matches('+'))?,
                };
                Ok(Self::new(T::zero(), im))
            }
        }
    }
}

impl<T: Int> From<GaussInt<T>> for String {
    fn from(g: GaussInt<T>) -> String {
        g.to_string()
    }
}

impl<T: Int> TryFrom<String> for GaussInt<T> {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    type G = GaussInt<i64>;

    fn g(a: i64, b: i64) -> G {
        G::from_ints(a, b)
    }

    #[test]
    fn norms() {
        assert_eq!(g(2, 1).norm(), 5);
        assert_eq!(G::zero().norm(), 0);
        let prod = &g(2, 1) * &g(3, 2);
        assert_eq!(prod, g(4, 7));
        assert_eq!(prod.norm(), 65);
    }

    #[test]
    fn residues_of_units_are_distinct() {
        let r: Vec<_> = G::units().iter().map(|u| u.residue_2p2i()).collect();
        for a in 0..4 {
            for b in a + 1..4 {
                assert_ne!(r[a], r[b]);
            }
        }
        assert_eq!(g(3, 2).residue_2p2i(), g(1, 0).residue_2p2i());
        assert_eq!(g(2, 2).residue_2p2i(), G::zero().residue_2p2i());
    }

    #[test]
    fn residue_ring_has_eight_classes() {
        let mut seen = std::collections::HashSet::new();
        for a in 0..4 {
            for b in 0..4 {
                seen.insert(g(a, b).residue_2p2i());
            }
        }
        assert_eq!(seen.len(), 8);
    }

    #[test]
    fn splitting() {
        assert_eq!(split_prime::<i64>(5).unwrap(), PrimeSplitting::Split(g(2, 1)));
        assert_eq!(split_prime::<i64>(13).unwrap(), PrimeSplitting::Split(g(3, 2)));
        assert_eq!(split_prime::<i64>(3).unwrap(), PrimeSplitting::Inert);
        assert_eq!(split_prime::<i64>(2), Err(Error::NotOddPrime(2)));
        assert_eq!(split_prime::<i64>(15), Err(Error::NotOddPrime(15)));
        for p in [5u64, 13, 17, 29, 37, 41] {
            let PrimeSplitting::Split(pi) = split_prime::<i64>(p).unwrap() else {
                panic!()
            };
            assert_eq!(pi.norm() as u64, p);
            assert!(pi.re > pi.im && pi.im > 0);
        }
    }

    #[test]
    fn valuations() {
        let pi = g(2, 1);
        assert_eq!(g(5, 0).ord(&pi), Ok(1));
        assert_eq!(g(25, 0).ord(&pi), Ok(2));
        assert_eq!(g(2, -1).ord(&pi), Ok(0));
        assert_eq!(G::zero().ord(&pi), Err(Error::ZeroValuation));
    }

    #[test]
    fn text_encoding() {
        for (s, v) in [("3+4i", g(3, 4)), ("3-4i", g(3, -4)), ("-3-4i", g(-3, -4)), ("0+0i", g(0, 0))] {
            assert_eq!(s.parse::<G>().unwrap(), v);
            assert_eq!(v.to_string(), s);
        }
        assert_eq!("7".parse::<G>().unwrap(), g(7, 0));
        assert_eq!("-i".parse::<G>().unwrap(), g(0, -1));
        assert_eq!("2i".parse::<G>().unwrap(), g(0, 2));
        assert!("x+yi".parse::<G>().is_err());
        let big: GaussInt<BigInt> = "123456789012345678901234567890-1i".parse().unwrap();
        assert_eq!(big.im, BigInt::from(-1));
    }

    #[test]
    fn gcd_is_normalized() {
        let a = &g(2, 1) * &g(3, 2);
        let b = &g(2, 1) * &g(1, 1);
        assert_eq!(a.gcd(&b), g(2, 1));
        assert_eq!(g(0, 0).gcd(&g(0, 3)), g(3, 0));
    }

    proptest! {
        #[test]
        fn norm_is_multiplicative(a in -1000i64..1000, b in -1000i64..1000, c in -1000i64..1000, d in -1000i64..1000) {
            let x = g(a, b);
            let y = g(c, d);
            prop_assert_eq!((&x * &y).norm(), x.norm() * y.norm());
            prop_assert_eq!(x.conj().conj(), x.clone());
        }

        #[test]
        fn residue_is_well_defined(a in -500i64..500, b in -500i64..500, c in -500i64..500, d in -500i64..500) {
            let x = g(a, b);
            let shifted = &x + &(&g(2, 2) * &g(c, d));
            prop_assert_eq!(x.residue_2p2i(), shifted.residue_2p2i());
        }

        #[test]
        fn split_valuations_add_up(e1 in 0u32..4, e2 in 0u32..4, a in -50i64..50, b in -50i64..50) {
            let pi = g(2, 1);
            let pib = pi.conj();
            let base = g(a, b);
            prop_assume!(!base.is_zero());
            let x = &(&pi.pow(e1) * &pib.pow(e2)) * &base;
            let mut n = x.norm();
            let mut k = 0;
            while n % 5 == 0 { n /= 5; k += 1; }
            prop_assert_eq!(x.ord(&pi).unwrap() + x.ord(&pib).unwrap(), k);
        }

        #[test]
        fn text_roundtrip(a in any::<i32>(), b in any::<i32>()) {
            let x = g(a as i64, b as i64);
            prop_assert_eq!(x.to_string().parse::<G>().unwrap(), x);
        }
    }
}
