//! 3×3 similitude matrices over `Z[i, 1/p]`: `g g* = λ I`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{split_prime, GaussInt, PrimeSplitting};
use crate::scalar::Int;

/// A plain 3×3 matrix of Gaussian integers.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(bound(serialize = "", deserialize = ""))]
pub struct GMat<T: Int>(pub [[GaussInt<T>; 3]; 3]);

impl<T: Int> GMat<T> {
    pub fn identity() -> Self {
        Self::scalar(GaussInt::one())
    }

    pub fn scalar(c: GaussInt<T>) -> Self {
        let z = GaussInt::zero;
        Self([
            [c.clone(), z(), z()],
            [z(), c.clone(), z()],
            [z(), z(), c],
        ])
    }

    pub fn from_ints(rows: [[(i64, i64); 3]; 3]) -> Self {
        Self(rows.map(|r| r.map(|(a, b)| GaussInt::from_ints(a, b))))
    }

    pub fn rows(&self) -> &[[GaussInt<T>; 3]; 3] {
        &self.0
    }

    pub fn entries(&self) -> impl Iterator<Item = &GaussInt<T>> {
        self.0.iter().flatten()
    }

    pub fn mul(&self, o: &Self) -> Self {
        let a = &self.0;
        let b = &o.0;
        Self(std::array::from_fn(|r| {
            std::array::from_fn(|c| {
                let mut acc = &a[r][0] * &b[0][c];
                acc = &acc + &(&a[r][1] * &b[1][c]);
                &acc + &(&a[r][2] * &b[2][c])
            })
        }))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self(std::array::from_fn(|r| {
            std::array::from_fn(|c| self.0[c][r].conj())
        }))
    }

    pub fn scale(&self, c: &GaussInt<T>) -> Self {
        Self(self.0.clone().map(|r| r.map(|e| &e * c)))
    }

    pub fn det(&self) -> GaussInt<T> {
        let m = &self.0;
        let minor = |a: usize, b: usize, c: usize, d: usize| {
            &(&m[1][a] * &m[2][b]) - &(&m[1][c] * &m[2][d])
        };
        let t0 = &m[0][0] * &minor(1, 2, 2, 1);
        let t1 = &m[0][1] * &minor(0, 2, 2, 0);
        let t2 = &m[0][2] * &minor(0, 1, 1, 0);
        &(&t0 - &t1) + &t2
    }

    pub fn is_zero(&self) -> bool {
        self.entries().all(|e| e.is_zero())
    }

    /// `Some(c)` when the matrix equals `c·I`.
    pub fn as_scalar(&self) -> Option<GaussInt<T>> {
        let m = &self.0;
        let off_diag_zero = (0..3).all(|r| (0..3).all(|c| r == c || m[r][c].is_zero()));
        if off_diag_zero && m[0][0] == m[1][1] && m[1][1] == m[2][2] {
            Some(m[0][0].clone())
        } else {
            None
        }
    }

    pub fn is_scalar(&self) -> bool {
        self.as_scalar().is_some()
    }

    /// Gaussian gcd of all entries (first-quadrant normalized).
    pub fn content(&self) -> GaussInt<T> {
        self.entries()
            .fold(GaussInt::zero(), |acc, e| acc.gcd(e))
    }

    /// `min_ij ord_π(g_ij)` over the nonzero entries.
    pub fn ord(&self, pi: &GaussInt<T>) -> Result<u32> {
        self.entries()
            .filter(|e| !e.is_zero())
            .map(|e| e.ord(pi))
            .try_fold(None, |acc: Option<u32>, v| {
                let v = v?;
                Ok(Some(acc.map_or(v, |a| a.min(v))))
            })?
            .ok_or(Error::ZeroMatrix)
    }

    pub fn div_exact(&self, d: &GaussInt<T>) -> Option<Self> {
        let mut out = self.0.clone();
        for row in out.iter_mut() {
            for e in row.iter_mut() {
                *e = e.div_exact(d)?;
            }
        }
        Some(Self(out))
    }

    pub fn convert<U: Int>(&self) -> GMat<U> {
        GMat(std::array::from_fn(|r| {
            std::array::from_fn(|c| self.0[r][c].convert())
        }))
    }

    /// Canonical primitive representative of the projective class: divides
    /// by the content, then applies the unit that moves the first nonzero
    /// entry (row-major) into the first quadrant.
    pub fn canonical(&self) -> Result<Self> {
        let c = self.content();
        if c.is_zero() {
            return Err(Error::ZeroMatrix);
        }
        let prim = self.div_exact(&c).expect("content divides every entry");
        let first = prim.entries().find(|e| !e.is_zero()).expect("nonzero");
        let (k, _) = first.first_quadrant();
        if k == 0 {
            Ok(prim)
        } else {
            Ok(Self(prim.0.map(|r| r.map(|e| e.mul_i_pow(k)))))
        }
    }
}

impl<T: Int> fmt::Debug for GMat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, r) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{} {} {}", r[0], r[1], r[2])?;
        }
        write!(f, "]")
    }
}

/// Integer valuation `ord_p(n)` for `n != 0`.
pub(crate) fn int_ord<T: Int>(n: &T, p: u64) -> u32 {
    assert!(!n.is_zero(), "valuation of zero");
    let p = T::of_i64(p as i64);
    let mut n = n.clone();
    let mut k = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return k;
        }
        n = q;
        k += 1;
    }
}

/// The prime `π | p` used by the height functions: the canonical split
/// factor for `p = 1 mod 4`, and `p` itself when `p` is inert.
pub fn uniformizer<T: Int>(p: u64) -> Result<(GaussInt<T>, bool)> {
    Ok(match split_prime::<T>(p)? {
        PrimeSplitting::Split(pi) => (pi, true),
        PrimeSplitting::Inert => (GaussInt::from_int(T::of_i64(p as i64)), false),
    })
}

/// An element of `GU_3(Z[i, 1/p])`: the matrix `entries / p^denom_exp`.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound(serialize = "", deserialize = ""))]
pub struct SimilitudeMatrix<T: Int> {
    pub p: u64,
    pub denom_exp: u32,
    pub rows: GMat<T>,
}

impl<T: Int> SimilitudeMatrix<T> {
    pub fn new(p: u64, rows: GMat<T>) -> Self {
        Self { p, denom_exp: 0, rows }
    }

    pub fn with_denominator(p: u64, denom_exp: u32, rows: GMat<T>) -> Self {
        Self { p, denom_exp, rows }
    }

    pub fn identity(p: u64) -> Self {
        Self::new(p, GMat::identity())
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.p, o.p, "mixing similitude matrices over different primes");
        Self {
            p: self.p,
            denom_exp: self.denom_exp + o.denom_exp,
            rows: self.rows.mul(&o.rows),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            p: self.p,
            denom_exp: self.denom_exp,
            rows: self.rows.adjoint(),
        }
    }

    /// `λ` with `g g* = λ I`, as an exact rational.
    pub fn similitude_factor(&self) -> Result<BigRational> {
        let lam = integer_similitude_factor(&self.rows)?;
        let denom = num_traits::pow(BigInt::from(self.p), 2 * self.denom_exp as usize);
        Ok(BigRational::new(lam.to_big(), denom))
    }

    /// `ℓ(g) = ord_p(g g*) − ord_π(g) − ord_π̄(g)`.
    pub fn level(&self) -> Result<u32> {
        level(&self.rows, self.p)
    }

    /// `h_π(g) = ord_π det g − 3 ord_π g`; defined for split `p` only.
    pub fn pi_height(&self) -> Result<u32> {
        pi_height(&self.rows, self.p)
    }

    pub fn projective_equal(&self, o: &Self) -> bool {
        projective_equal(&self.rows, &o.rows)
    }

    pub fn canonicalize(&self) -> Result<ProjElement<T>> {
        ProjElement::new(&self.rows)
    }
}

impl<T: Int> fmt::Debug for SimilitudeMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}/{}^{}", self.rows, self.p, self.denom_exp)
    }
}

/// `λ` with `g g* = λ I` for an integral matrix.
pub fn integer_similitude_factor<T: Int>(g: &GMat<T>) -> Result<T> {
    let gg = g.mul(&g.adjoint());
    let lam = gg.as_scalar().ok_or(Error::NotSimilitude)?;
    if !lam.im.is_zero() || !lam.re.is_positive() {
        return Err(Error::BadSimilitudeFactor);
    }
    Ok(lam.re)
}

pub fn level<T: Int>(g: &GMat<T>, p: u64) -> Result<u32> {
    let lam = integer_similitude_factor(g)?;
    let (pi, split) = uniformizer::<T>(p)?;
    let ord_lam = int_ord(&lam, p);
    let drop = if split {
        g.ord(&pi)? + g.ord(&pi.conj())?
    } else {
        2 * g.ord(&pi)?
    };
    Ok(ord_lam - drop)
}

pub fn pi_height<T: Int>(g: &GMat<T>, p: u64) -> Result<u32> {
    let (pi, split) = uniformizer::<T>(p)?;
    if !split {
        return Err(Error::InertPrime(p));
    }
    let d = g.det();
    Ok(d.ord(&pi)? - 3 * g.ord(&pi)?)
}

/// `g` and `h` differ by a scalar iff `g h*` is scalar.
pub fn projective_equal<T: Int>(g: &GMat<T>, h: &GMat<T>) -> bool {
    if g.is_zero() || h.is_zero() {
        return false;
    }
    g.mul(&h.adjoint()).is_scalar()
}

/// Canonical representative of a projective class; the hashable identity
/// used for deduplication.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjElement<T: Int> {
    mat: GMat<T>,
}

impl<T: Int> ProjElement<T> {
    pub fn new(g: &GMat<T>) -> Result<Self> {
        Ok(Self { mat: g.canonical()? })
    }

    pub fn identity() -> Self {
        Self { mat: GMat::identity() }
    }

    pub fn matrix(&self) -> &GMat<T> {
        &self.mat
    }

    pub fn into_matrix(self) -> GMat<T> {
        self.mat
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(&self.mat.mul(&o.mat)).expect("product of invertible matrices is nonzero")
    }

    /// Projective inverse, represented by the adjoint.
    pub fn inverse(&self) -> Self {
        Self::new(&self.mat.adjoint()).expect("nonzero")
    }

    pub fn is_identity(&self) -> bool {
        self.mat.is_scalar()
    }

    /// Deterministic byte encoding of the canonical form.
    pub fn key(&self) -> Vec<u8> {
        let mut s = String::new();
        for (k, e) in self.mat.entries().enumerate() {
            if k > 0 {
                s.push(',');
            }
            s.push_str(&e.to_string());
        }
        s.into_bytes()
    }

    pub fn convert<U: Int>(&self) -> ProjElement<U> {
        ProjElement { mat: self.mat.convert() }
    }

    pub fn to_similitude(&self, p: u64) -> SimilitudeMatrix<T> {
        SimilitudeMatrix::new(p, self.mat.clone())
    }
}

impl<T: Int> fmt::Debug for ProjElement<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{:?}", self.mat)
    }
}

/// Exact `λ` of a canonical element as a `BigInt`.
pub fn factor_big<T: Int>(g: &GMat<T>) -> Result<BigInt> {
    integer_similitude_factor(g).map(|l| l.to_big())
}

/// True when `λ` is an integral power of `p`.
pub fn factor_is_p_power<T: Int>(g: &GMat<T>, p: u64) -> Result<bool> {
    let mut lam = factor_big(g)?;
    let pb = BigInt::from(p);
    while (&lam % &pb).is_zero() {
        lam /= &pb;
    }
    Ok(lam.is_one())
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = GMat<i64>;

    fn s5() -> M {
        // a matrix with A A* = 5 I and diagonal = 1 mod 2+2i
        M::from_ints([
            [(1, 0), (2, 0), (0, 0)],
            [(-2, 0), (1, 0), (0, 0)],
            [(0, 0), (0, 0), (-1, 2)],
        ])
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(M::identity().adjoint(), M::identity());
        let d = M::from_ints([[(0, 1), (0, 0), (0, 0)], [(0, 0), (1, 0), (0, 0)], [(0, 0), (0, 0), (1, 0)]]);
        let da = M::from_ints([[(0, -1), (0, 0), (0, 0)], [(0, 0), (1, 0), (0, 0)], [(0, 0), (0, 0), (1, 0)]]);
        assert_eq!(d.adjoint(), da);
        let s = s5();
        assert_eq!(s.mul(&s.adjoint()), M::scalar(GaussInt::from_ints(5, 0)));
    }

    #[test]
    fn similitude_factor_and_errors() {
        let g = SimilitudeMatrix::new(5, s5());
        assert_eq!(g.similitude_factor().unwrap(), BigRational::from_integer(5.into()));
        let g2 = SimilitudeMatrix::with_denominator(5, 1, s5());
        assert_eq!(
            g2.similitude_factor().unwrap(),
            BigRational::new(1.into(), 5.into())
        );
        let bad = M::from_ints([[(1, 0), (1, 0), (0, 0)], [(0, 0), (1, 0), (0, 0)], [(0, 0), (0, 0), (1, 0)]]);
        assert_eq!(SimilitudeMatrix::new(5, bad).similitude_factor(), Err(Error::NotSimilitude));
        assert_eq!(
            SimilitudeMatrix::new(5, M::scalar(GaussInt::zero())).similitude_factor(),
            Err(Error::BadSimilitudeFactor)
        );
    }

    #[test]
    fn level_and_height() {
        let id = SimilitudeMatrix::<i64>::identity(5);
        assert_eq!(id.level(), Ok(0));
        assert_eq!(id.pi_height(), Ok(0));
        let g = SimilitudeMatrix::new(5, s5());
        assert_eq!(g.level(), Ok(1));
        // scalars do not change either function
        for c in [GaussInt::from_ints(0, 1), GaussInt::from_ints(2, 1), GaussInt::from_ints(5, 0)] {
            let h = SimilitudeMatrix::new(5, s5().scale(&c));
            assert_eq!(h.level(), g.level());
            assert_eq!(h.pi_height(), g.pi_height());
        }
        assert_eq!(SimilitudeMatrix::<i64>::identity(3).pi_height(), Err(Error::InertPrime(3)));
    }

    #[test]
    fn projective_equality_and_canonical_form() {
        let s = s5();
        let is = s.scale(&GaussInt::from_ints(0, 1));
        let ps = s.scale(&GaussInt::from_ints(25, 0));
        assert!(projective_equal(&s, &is));
        assert!(projective_equal(&s, &ps));
        assert!(!projective_equal(&s, &s.adjoint()));
        let c = ProjElement::new(&s).unwrap();
        assert_eq!(ProjElement::new(&is).unwrap(), c);
        assert_eq!(ProjElement::new(&ps).unwrap(), c);
        assert_eq!(ProjElement::new(c.matrix()).unwrap(), c);
        assert_eq!(ProjElement::new(&M::scalar(GaussInt::zero())), Err(Error::ZeroMatrix));
    }

    #[test]
    fn json_shape() {
        let g = SimilitudeMatrix::new(5, s5());
        let v = serde_json::to_value(&g).unwrap();
        assert_eq!(v["p"], 5);
        assert_eq!(v["denom_exp"], 0);
        assert_eq!(v["rows"][2][2], "-1+2i");
        let back: SimilitudeMatrix<i64> = serde_json::from_value(v).unwrap();
        assert_eq!(back, g);
    }
}
