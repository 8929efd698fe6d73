//! Arithmetic in `F_q` and `F_{q²}`, reduction of gate sets modulo `q`,
//! group closure, and identification of `G_{p,q}`.
//!
//! For `q = 1 mod 4` the gates reduce into `PGL_3(F_q)` by sending `i` to
//! the smaller square root of −1. For `q = 3 mod 4` they reduce into
//! `PGU_3(F_q) ⊂ PGL_3(F_{q²})` with `F_{q²} = F_q[ω]/(ω² + 1)` and
//! `i ↦ ω`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{check_odd_prime, split_prime, GaussInt, PrimeSplitting};
use crate::scalar::Int;
use crate::similitude::GMat;

/// Largest field size supported by the table-driven arithmetic.
pub const MAX_FIELD_SIZE: u32 = 1 << 14;

/// The smaller square root of −1 in `F_q` for `q = 1 mod 4`.
pub fn sqrt_minus_one(q: u64) -> Result<u64> {
    check_odd_prime(q)?;
    if q % 4 != 1 {
        return Err(Error::NoSqrtMinusOne(q));
    }
    (1..q)
        .find(|x| (x * x + 1) % q == 0)
        .ok_or(Error::NoSqrtMinusOne(q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    /// `F_q` with the image of `i`.
    Prime { sqrt_m1: u32 },
    /// `F_q[ω]/(ω²+1)`.
    Quadratic,
}

/// A finite field element, `a + q·b` for `a + bω` (always `b = 0` in `F_q`).
pub type Elem = u16;

/// Table-driven `F_q` or `F_{q²}`.
#[derive(Clone)]
pub struct Field {
    q: u32,
    kind: Kind,
    size: u32,
    mul: Vec<Elem>,
    add: Vec<Elem>,
    neg: Vec<Elem>,
    inv: Vec<Elem>,
    conj: Vec<Elem>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Kind::Prime { .. } => write!(f, "F_{}", self.q),
            Kind::Quadratic => write!(f, "F_{}^2", self.q),
        }
    }
}

impl Field {
    /// The ambient field for reduction modulo the odd prime `q`.
    pub fn for_prime(q: u64) -> Result<Self> {
        check_odd_prime(q)?;
        if q % 4 == 1 {
            let r = sqrt_minus_one(q)? as u32;
            Self::build(q as u32, Kind::Prime { sqrt_m1: r })
        } else {
            Self::build(q as u32, Kind::Quadratic)
        }
    }

    /// `F_q` itself (no square root of −1 required).
    pub fn prime(q: u64) -> Result<Self> {
        check_odd_prime(q)?;
        Self::build(q as u32, Kind::Prime { sqrt_m1: 0 })
    }

    /// `F_{q²} = F_q[ω]/(ω²+1)`; needs `q = 3 mod 4`.
    pub fn quadratic(q: u64) -> Result<Self> {
        check_odd_prime(q)?;
        if q % 4 != 3 {
            return Err(Error::Invalid(format!("ω² = −1 is not irreducible over F_{q}")));
        }
        Self::build(q as u32, Kind::Quadratic)
    }

    fn build(q: u32, kind: Kind) -> Result<Self> {
        let size = match kind {
            Kind::Prime { .. } => q,
            Kind::Quadratic => q * q,
        };
        if size > MAX_FIELD_SIZE {
            return Err(Error::Invalid(format!("field of size {size} is too large")));
        }
        let n = size as usize;
        let split = |x: usize| ((x as u32) % q, (x as u32) / q);
        let join = |a: u32, b: u32| (a % q + q * (b % q)) as Elem;
        let mut mul = vec![0; n * n];
        let mut add = vec![0; n * n];
        for x in 0..n {
            let (a, b) = split(x);
            for y in 0..n {
                let (c, d) = split(y);
                add[x * n + y] = join(a + c, b + d);
                // (a + bω)(c + dω) = ac − bd + (ad + bc)ω
                let re = (a * c + q * q - (b * d) % (q * q)) % q;
                mul[x * n + y] = join(re, a * d + b * c);
            }
        }
        let neg = (0..n)
            .map(|x| {
                let (a, b) = split(x);
                join(q - a, q - b)
            })
            .collect();
        let conj = (0..n)
            .map(|x| {
                let (a, b) = split(x);
                join(a, q - b)
            })
            .collect();
        let mut inv = vec![0; n];
        for x in 1..n {
            inv[x] = (1..n)
                .find(|&y| mul[x * n + y] == 1)
                .expect("nonzero elements of a field are invertible") as Elem;
        }
        Ok(Self { q, kind, size, mul, add, neg, inv, conj })
    }

    pub fn q(&self) -> u64 {
        self.q as u64
    }

    pub fn size(&self) -> u64 {
        self.size as u64
    }

    pub fn is_quadratic(&self) -> bool {
        self.kind == Kind::Quadratic
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.mul[a as usize * self.size as usize + b as usize]
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        self.add[a as usize * self.size as usize + b as usize]
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg[b as usize])
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.neg[a as usize]
    }

    /// Inverse of a nonzero element.
    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        debug_assert!(a != 0);
        self.inv[a as usize]
    }

    /// The Frobenius `x ↦ x^q` (identity on `F_q`).
    #[inline]
    pub fn conj(&self, a: Elem) -> Elem {
        self.conj[a as usize]
    }

    pub fn pow(&self, a: Elem, mut e: u64) -> Elem {
        let mut base = a;
        let mut acc: Elem = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn from_int(&self, v: i64) -> Elem {
        v.rem_euclid(self.q as i64) as Elem
    }

    /// Element `a + bω`.
    pub fn from_pair(&self, a: i64, b: i64) -> Elem {
        assert!(self.is_quadratic() || b.rem_euclid(self.q as i64) == 0);
        let q = self.q as i64;
        (a.rem_euclid(q) + q * b.rem_euclid(q)) as Elem
    }

    /// Image of a Gaussian integer.
    pub fn from_gauss<T: Int>(&self, g: &GaussInt<T>) -> Elem {
        let q = T::of_i64(self.q as i64);
        let a = g.re.mod_floor(&q).to_i64().unwrap();
        let b = g.im.mod_floor(&q).to_i64().unwrap();
        match self.kind {
            Kind::Prime { sqrt_m1 } => {
                assert!(sqrt_m1 != 0 || b == 0, "F_q has no image of i here");
                self.from_int(a + b * sqrt_m1 as i64)
            }
            Kind::Quadratic => self.from_pair(a, b),
        }
    }

    /// Order of the multiplicative group.
    pub fn unit_group_order(&self) -> u64 {
        self.size as u64 - 1
    }

    /// `(a/F)_3`: 1 if `a` is a cube in `F^×`, −1 otherwise.
    pub fn cubic_residue(&self, a: Elem) -> Result<i8> {
        if a == 0 {
            return Err(Error::Invalid("cubic residue symbol of zero".into()));
        }
        let n = self.unit_group_order();
        if !n.is_multiple_of(3) {
            return Ok(1);
        }
        Ok(if self.pow(a, n / 3) == 1 { 1 } else { -1 })
    }

    /// The norm `x·x^q` to `F_q` (identity on prime fields).
    pub fn norm(&self, a: Elem) -> Elem {
        match self.kind {
            Kind::Prime { .. } => a,
            Kind::Quadratic => self.mul(a, self.conj(a)),
        }
    }

    // -- 3×3 matrices -----------------------------------------------------

    pub fn identity(&self) -> FinMat {
        FinMat([1, 0, 0, 0, 1, 0, 0, 0, 1])
    }

    pub fn mat_mul(&self, a: &FinMat, b: &FinMat) -> FinMat {
        let (a, b) = (&a.0, &b.0);
        let mut out = [0; 9];
        for r in 0..3 {
            for c in 0..3 {
                let x = self.mul(a[3 * r], b[c]);
                let y = self.mul(a[3 * r + 1], b[3 + c]);
                let z = self.mul(a[3 * r + 2], b[6 + c]);
                out[3 * r + c] = self.add(self.add(x, y), z);
            }
        }
        FinMat(out)
    }

    /// Scales so the first nonzero entry (row-major) is 1.
    pub fn canonical(&self, m: &FinMat) -> FinMat {
        let Some(&lead) = m.0.iter().find(|&&x| x != 0) else {
            return *m;
        };
        if lead == 1 {
            return *m;
        }
        let s = self.inv(lead);
        FinMat(m.0.map(|x| self.mul(x, s)))
    }

    pub fn mat_mul_canonical(&self, a: &FinMat, b: &FinMat) -> FinMat {
        self.canonical(&self.mat_mul(a, b))
    }

    pub fn det(&self, m: &FinMat) -> Elem {
        let e = &m.0;
        let minor = |a: usize, b: usize, c: usize, d: usize| {
            self.sub(self.mul(e[a], e[b]), self.mul(e[c], e[d]))
        };
        let t0 = self.mul(e[0], minor(4, 8, 5, 7));
        let t1 = self.mul(e[1], minor(3, 8, 5, 6));
        let t2 = self.mul(e[2], minor(3, 7, 4, 6));
        self.add(self.sub(t0, t1), t2)
    }

    /// Conjugate transpose with respect to the Frobenius.
    pub fn adjoint(&self, m: &FinMat) -> FinMat {
        let e = &m.0;
        FinMat(std::array::from_fn(|k| {
            let (r, c) = (k / 3, k % 3);
            self.conj(e[3 * c + r])
        }))
    }

    pub fn scale(&self, m: &FinMat, s: Elem) -> FinMat {
        FinMat(m.0.map(|x| self.mul(x, s)))
    }

    /// `Some(λ)` when `M M* = λ I` with `λ` in `F_q^×`.
    pub fn unitary_factor(&self, m: &FinMat) -> Option<Elem> {
        let mm = self.mat_mul(m, &self.adjoint(m));
        let lam = mm.0[0];
        let scalar = lam != 0
            && (0..9).all(|k| mm.0[k] == if k % 4 == 0 { lam } else { 0 })
            && self.conj(lam) == lam;
        scalar.then_some(lam)
    }

    pub fn is_scalar(&self, m: &FinMat) -> bool {
        let e = &m.0;
        e[0] != 0 && e[0] == e[4] && e[4] == e[8] && (0..9).all(|k| k % 4 == 0 || e[k] == 0)
    }

    /// Projective order of `m`.
    pub fn order(&self, m: &FinMat) -> u64 {
        let mut x = self.canonical(m);
        let mut k = 1;
        while !self.is_scalar(&x) {
            x = self.mat_mul_canonical(&x, m);
            k += 1;
        }
        k
    }
}

/// A 3×3 matrix over the field, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FinMat(pub [Elem; 9]);

/// Reduces an integral Gaussian matrix modulo `q` and canonicalizes it
/// projectively.
pub fn reduce_gate<T: Int>(g: &GMat<T>, field: &Field) -> FinMat {
    let m = FinMat(std::array::from_fn(|k| field.from_gauss(&g.0[k / 3][k % 3])));
    field.canonical(&m)
}

/// Reduced, deduplicated generators.
pub fn reduce_gates<T: Int>(gens: &[GMat<T>], field: &Field) -> Vec<FinMat> {
    gens.iter().map(|g| reduce_gate(g, field)).collect()
}

/// Determinant class test: every generator lies in the index-3 subgroup
/// (`PSL_3` or `PSU_3`) of the ambient projective group.
pub fn det_class_test(gens: &[FinMat], field: &Field) -> bool {
    gens.iter().all(|m| det_is_cube(m, field))
}

fn det_is_cube(m: &FinMat, field: &Field) -> bool {
    let d = field.det(m);
    if !field.is_quadratic() {
        return field.cubic_residue(d).expect("invertible") == 1;
    }
    // normalize into U_3: c with N(c) = λ⁻¹ makes det(cM) lie in U_1
    let q = field.q();
    let lam = field.unitary_factor(m).expect("reduced gate is a unitary similitude");
    let target = field.inv(lam);
    let c = (1..field.size() as Elem)
        .find(|&c| field.norm(c) == target)
        .expect("the norm map is onto");
    let c3 = field.mul(field.mul(c, c), c);
    let u = field.mul(c3, d);
    debug_assert_eq!(field.pow(u, q + 1), 1);
    if !(q + 1).is_multiple_of(3) {
        return true;
    }
    field.pow(u, (q + 1) / 3) == 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GroupKind {
    PSL3,
    PGL3,
    PSU3,
    PU3,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupPrediction {
    pub kind: GroupKind,
    pub q: u64,
    pub label: String,
    pub tripartite: bool,
    /// The cubic symbol consulted, when the column needs one.
    pub symbol: Option<i8>,
    /// Order of the predicted group.
    pub order: u128,
}

impl GroupKind {
    pub fn label(self, q: u64) -> String {
        let name = match self {
            GroupKind::PSL3 => "PSL3",
            GroupKind::PGL3 => "PGL3",
            GroupKind::PSU3 => "PSU3",
            GroupKind::PU3 => "PU3",
        };
        format!("{name}(F_{q})")
    }

    pub fn order(self, q: u64) -> u128 {
        let q = q as u128;
        let (base, g) = match self {
            GroupKind::PSL3 | GroupKind::PGL3 => {
                (q.pow(3) * (q.pow(3) - 1) * (q * q - 1), num_integer::gcd(3, q - 1))
            }
            GroupKind::PSU3 | GroupKind::PU3 => {
                (q.pow(3) * (q.pow(3) + 1) * (q * q - 1), num_integer::gcd(3, q + 1))
            }
        };
        match self {
            GroupKind::PSL3 | GroupKind::PSU3 => base / g,
            _ => base,
        }
    }
}

/// Image of `p·π` in the field, with `π` the canonical split factor.
fn p_pi(p: u64, field: &Field) -> Result<Elem> {
    let PrimeSplitting::Split(pi) = split_prime::<i64>(p)? else {
        return Err(Error::InertPrime(p));
    };
    Ok(field.mul(field.from_int(p as i64), field.from_gauss(&pi)))
}

/// The group `G_{p,q}` generated by `S_p mod q`, read off from the table of
/// cases by `p, q mod 12` and a cubic residue symbol.
pub fn predict_group(p: u64, q: u64) -> Result<GroupPrediction> {
    check_odd_prime(p)?;
    check_odd_prime(q)?;
    if p == q {
        return Err(Error::Invalid("p and q must be distinct".into()));
    }
    let (kind, symbol) = if p % 4 == 3 {
        (if q % 4 == 1 { GroupKind::PSL3 } else { GroupKind::PSU3 }, None)
    } else {
        match q % 12 {
            1 => {
                let s = Field::for_prime(q)?.cubic_residue(p_pi(p, &Field::for_prime(q)?)?)?;
                (if s == 1 { GroupKind::PSL3 } else { GroupKind::PGL3 }, Some(s))
            }
            5 => (GroupKind::PSL3, None),
            3 | 7 => (GroupKind::PSU3, None),
            11 => {
                let f = Field::quadratic(q)?;
                let s = f.cubic_residue(p_pi(p, &f)?)?;
                (if s == 1 { GroupKind::PSU3 } else { GroupKind::PU3 }, Some(s))
            }
            _ => unreachable!("odd prime q > 3 is coprime to 6"),
        }
    };
    Ok(GroupPrediction {
        kind,
        q,
        label: kind.label(q),
        tripartite: matches!(kind, GroupKind::PGL3 | GroupKind::PU3),
        symbol,
        order: kind.order(q),
    })
}

/// A finite group of projective matrices with a sorted element list.
#[derive(Debug, Clone)]
pub struct FinGroup {
    pub elements: Vec<FinMat>,
    index: HashMap<FinMat, u32>,
}

impl FinGroup {
    pub fn from_elements(mut elements: Vec<FinMat>) -> Self {
        elements.sort_unstable();
        elements.dedup();
        let index = elements.iter().enumerate().map(|(k, e)| (*e, k as u32)).collect();
        Self { elements, index }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, m: &FinMat) -> Option<usize> {
        self.index.get(m).map(|&k| k as usize)
    }
}

/// Breadth-first closure of `⟨gens⟩` under right multiplication, stopping
/// with `CapExceeded` once more than `cap` elements are found.
pub fn closure(gens: &[FinMat], field: &Field, cap: usize) -> Result<FinGroup> {
    let gens: Vec<FinMat> = gens.iter().map(|g| field.canonical(g)).collect();
    let id = field.identity();
    let mut index: HashMap<FinMat, u32> = HashMap::new();
    let mut elements = vec![id];
    index.insert(id, 0);
    let mut head = 0;
    while head < elements.len() {
        let x = elements[head];
        head += 1;
        for s in &gens {
            let y = field.mat_mul_canonical(&x, s);
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry(y) {
                if elements.len() >= cap {
                    return Err(Error::CapExceeded { cap });
                }
                e.insert(elements.len() as u32);
                elements.push(y);
            }
        }
    }
    elements.sort_unstable();
    for (k, e) in elements.iter().enumerate() {
        *index.get_mut(e).unwrap() = k as u32;
    }
    Ok(FinGroup { elements, index })
}

pub fn closure_order(gens: &[FinMat], field: &Field, cap: usize) -> Result<usize> {
    closure(gens, field, cap).map(|g| g.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::enumerate_sp;

    #[test]
    fn square_roots_of_minus_one() {
        assert_eq!(sqrt_minus_one(13), Ok(5));
        assert_eq!(sqrt_minus_one(5), Ok(2));
        assert_eq!(sqrt_minus_one(17), Ok(4));
        assert_eq!(sqrt_minus_one(7), Err(Error::NoSqrtMinusOne(7)));
    }

    #[test]
    fn field_axioms_on_samples() {
        for f in [Field::prime(13).unwrap(), Field::quadratic(7).unwrap(), Field::quadratic(3).unwrap()] {
            let n = f.size() as Elem;
            for a in 0..n {
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a)), 1);
                }
                for b in 0..n {
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    let c = (a as u32 * 7 + b as u32 * 3) as Elem % n;
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                }
                // Frobenius x -> x^q
                assert_eq!(f.pow(a, f.q()), f.conj(a));
            }
        }
    }

    #[test]
    fn cubic_residues() {
        let f = Field::prime(13).unwrap();
        let cubes: Vec<Elem> = (1..13).filter(|&a| f.cubic_residue(a).unwrap() == 1).collect();
        assert_eq!(cubes, vec![1, 5, 8, 12]);
        assert_eq!(f.cubic_residue(9), Ok(-1));
        assert!(f.cubic_residue(0).is_err());
        let f11 = Field::prime(11).unwrap();
        assert!((1..11).all(|a| f11.cubic_residue(a).unwrap() == 1));
    }

    #[test]
    fn table_predictions() {
        let g = predict_group(5, 3).unwrap();
        assert_eq!((g.kind, g.tripartite), (GroupKind::PSU3, false));
        assert_eq!(g.label, "PSU3(F_3)");
        assert_eq!(g.order, 6048);
        assert_eq!(predict_group(3, 5).unwrap().kind, GroupKind::PSL3);
        assert_eq!(predict_group(3, 5).unwrap().order, 372000);
        let g = predict_group(5, 13).unwrap();
        assert_eq!((g.kind, g.symbol, g.tripartite), (GroupKind::PGL3, Some(-1), true));
    }

    #[test]
    fn symbols_are_unit_and_conjugation_invariant() {
        for q in [13u64, 37] {
            let f = Field::for_prime(q).unwrap();
            for p in [5u64, 13] {
                if p == q {
                    continue;
                }
                let PrimeSplitting::Split(pi) = split_prime::<i64>(p).unwrap() else { panic!() };
                let pe = f.from_int(p as i64);
                let base = f.cubic_residue(f.mul(pe, f.from_gauss(&pi))).unwrap();
                for u in GaussInt::<i64>::units() {
                    let upi = &u * &pi;
                    assert_eq!(f.cubic_residue(f.mul(pe, f.from_gauss(&upi))).unwrap(), base);
                }
                assert_eq!(f.cubic_residue(f.mul(pe, f.from_gauss(&pi.conj()))).unwrap(), base);
            }
        }
    }

    #[test]
    fn reduction_lands_in_the_unitary_group() {
        let s = enumerate_sp::<i64>(5).unwrap();
        let f = Field::for_prime(3).unwrap();
        for l in &s.lifts {
            let m = reduce_gate(l, &f);
            assert!(f.unitary_factor(&m).is_some());
            let im = reduce_gate(&l.scale(&GaussInt::i()), &f);
            assert_eq!(m, im);
        }
        assert_eq!(reduce_gate(&GMat::<i64>::identity(), &f), f.identity());
    }

    #[test]
    fn small_closures() {
        let f = Field::prime(7).unwrap();
        assert_eq!(closure_order(&[f.identity()], &f, 10), Ok(1));
        // diag(1, -1, 1) has projective order 2
        let inv = FinMat([1, 0, 0, 0, 6, 0, 0, 0, 1]);
        assert_eq!(closure_order(&[inv], &f, 10), Ok(2));
        assert_eq!(f.order(&inv), 2);
        let perm = FinMat([0, 1, 0, 0, 0, 1, 1, 0, 0]);
        // sign diagonals mod ±1 extended by a 3-cycle: A4
        assert_eq!(closure_order(&[perm, inv], &f, 100), Ok(12));
        assert_eq!(closure_order(&[perm, inv], &f, 10), Err(Error::CapExceeded { cap: 10 }));
    }

    #[test]
    fn closure_of_s53_is_psu33() {
        let s = enumerate_sp::<i64>(5).unwrap();
        let f = Field::for_prime(3).unwrap();
        let gens = reduce_gates(&s.lifts, &f);
        // 3³(3³+1)(3²−1)/gcd(3, 4)
        assert_eq!(closure_order(&gens, &f, 1_000_000), Ok(6048));
        assert!(det_class_test(&gens, &f));
    }

    #[test]
    fn det_class_agrees_with_prediction() {
        for p in [3u64, 5, 13] {
            let s = enumerate_sp::<i64>(p).unwrap();
            for q in [3u64, 5, 7, 13, 23] {
                if p == q {
                    continue;
                }
                let f = Field::for_prime(q).unwrap();
                let gens = reduce_gates(&s.lifts, &f);
                let pred = predict_group(p, q).unwrap();
                assert_eq!(det_class_test(&gens, &f), !pred.tripartite, "p={p} q={q}");
            }
        }
    }

    #[test]
    fn reduction_is_a_morphism() {
        let s = enumerate_sp::<i64>(5).unwrap();
        for q in [3u64, 13] {
            let f = Field::for_prime(q).unwrap();
            for a in 0..s.len() {
                let b = (a * 7 + 3) % s.len();
                let (g, h) = (&s.lifts[a], &s.lifts[b]);
                let lhs = reduce_gate(&g.mul(h), &f);
                let rhs = f.mat_mul_canonical(&reduce_gate(g, &f), &reduce_gate(h, &f));
                assert_eq!(lhs, rhs);
            }
        }
    }
}
