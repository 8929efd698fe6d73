//! Compiling lattice elements into shortest generator words.
//!
//! For split `p` the fast path maps `g` to `g̃ ∈ PGL_3(Q_p)` through a
//! `p`-adic square root of −1, puts `g̃` in Iwasawa normal form `b_g`, and
//! reads the next generator off the last nontrivial row of `b_g`. Each step
//! is certified by the exact `π`-height; a scan over the generators takes
//! over whenever the row rule does not give a unique descending generator.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{p_prime, GateSet, Variant};
use crate::gaussian::{check_odd_prime, split_prime, GaussInt, PrimeSplitting, Residue8};
use crate::scalar::Int;
use crate::similitude::{factor_is_p_power, level, pi_height, GMat, ProjElement};

/// An element of `Z/p^N`, i.e. a `p`-adic integer known to `N` digits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicScalar {
    pub p: u64,
    pub precision: u32,
    pub value: BigInt,
}

impl PadicScalar {
    pub fn new(p: u64, precision: u32, value: BigInt) -> Self {
        let m = BigInt::from(p).pow(precision);
        Self { p, precision, value: value.mod_floor(&m) }
    }

    pub fn modulus(&self) -> BigInt {
        BigInt::from(self.p).pow(self.precision)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.p, self.precision.min(o.precision), &self.value + &o.value)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(self.p, self.precision.min(o.precision), &self.value * &o.value)
    }

    /// `None` when the value is zero to the working precision.
    pub fn valuation(&self) -> Option<u32> {
        valuation(&self.value, self.p, self.precision)
    }
}

fn valuation(v: &BigInt, p: u64, cap: u32) -> Option<u32> {
    if v.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let mut v = v.clone();
    let mut k = 0;
    while k < cap && (&v % &pb).is_zero() {
        v /= &pb;
        k += 1;
    }
    (k < cap).then_some(k)
}

fn inverse_mod(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(m)
}

fn lift_root(p: u64, x0: u64, n: u32) -> BigInt {
    // Newton: x ← x − (x² + 1)/(2x) mod p^k
    let mut x = BigInt::from(x0);
    let mut k = 1;
    while k < n {
        k = (2 * k).min(n);
        let m = BigInt::from(p).pow(k);
        let f = (&x * &x + 1u32).mod_floor(&m);
        let d = inverse_mod(&(BigInt::from(2u32) * &x), &m);
        x = (&x - f * d).mod_floor(&m);
    }
    x
}

fn min_root(p: u64) -> Result<u64> {
    check_odd_prime(p)?;
    if p % 4 != 1 {
        return Err(Error::InertPrime(p));
    }
    Ok((1..p).find(|x| (x * x + 1) % p == 0).expect("p = 1 mod 4"))
}

/// `x` with `x² = −1 mod p^N`, on the branch `x mod p = min √−1 mod p`.
pub fn hensel_sqrt_minus_one(p: u64, n: u32) -> Result<PadicScalar> {
    if n == 0 {
        return Err(Error::Invalid("precision must be at least 1".into()));
    }
    let x0 = min_root(p)?;
    Ok(PadicScalar::new(p, n, lift_root(p, x0, n)))
}

/// `b_g`: upper triangular with diagonal `p^{m_i}`, `0 <= x, y < p^{m_1}`,
/// `0 <= z < p^{m_2}`, entries coprime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IwasawaForm {
    pub p: u64,
    pub m: [u32; 3],
    pub b: [[BigInt; 3]; 3],
}

impl IwasawaForm {
    /// The maximal (1-based) `i` with `m_i ≠ 0`, or `None` at the base vertex.
    pub fn last_nontrivial_row(&self) -> Option<usize> {
        (0..3).rev().find(|&i| self.m[i] != 0).map(|i| i + 1)
    }

    /// Row `j` (1-based) reduced mod `p`.
    pub fn row_mod_p(&self, j: usize) -> [u64; 3] {
        let pb = BigInt::from(self.p);
        std::array::from_fn(|c| {
            let r = self.b[j - 1][c].mod_floor(&pb);
            u64::try_from(r).expect("residue fits")
        })
    }
}

/// Column reduction of `g̃` (entries mod `p^N`) to Iwasawa normal form.
pub fn iwasawa_form(g: &[[PadicScalar; 3]; 3]) -> Result<IwasawaForm> {
    let p = g[0][0].p;
    let n = g.iter().flatten().map(|e| e.precision).min().unwrap_or(0);
    let pb = BigInt::from(p);
    let mut prec = n;
    let modulus = |k: u32| pb.pow(k);
    let mut a: [[BigInt; 3]; 3] = std::array::from_fn(|r| std::array::from_fn(|c| g[r][c].value.clone()));
    let mut m = [0u32; 3];
    for r in (0..3).rev() {
        let md = modulus(prec);
        let (c, v) = (0..=r)
            .filter_map(|c| valuation(&a[r][c].mod_floor(&md), p, prec).map(|v| (c, v)))
            .min_by_key(|&(c, v)| (v, std::cmp::Reverse(c)))
            .ok_or(Error::PrecisionExceeded(n))?;
        for row in a.iter_mut() {
            row.swap(c, r);
        }
        let pv = pb.pow(v);
        let unit = a[r][r].mod_floor(&md) / &pv;
        // the unit is known to prec − v digits
        prec -= v;
        let md = modulus(prec);
        let uinv = inverse_mod(&unit, &md);
        for row in a.iter_mut() {
            row[r] = (&row[r] * &uinv).mod_floor(&md);
        }
        a[r][r] = pv.clone();
        for j in 0..r {
            let q = a[r][j].mod_floor(&md) / &pv;
            for row in a.iter_mut() {
                let t = &row[j] - &q * &row[r];
                row[j] = t.mod_floor(&md);
            }
            a[r][j] = BigInt::zero();
        }
        m[r] = v;
    }
    if prec <= *m.iter().max().unwrap() {
        return Err(Error::PrecisionExceeded(n));
    }
    let md = modulus(prec);
    let reduce = |a: &mut [[BigInt; 3]; 3], target: usize, by: usize, row: usize| {
        let q = a[row][target].div_floor(&a[row][by]);
        for r in 0..3 {
            let t = &a[r][target] - &q * &a[r][by];
            a[r][target] = t.mod_floor(&md);
        }
    };
    for r in 0..3 {
        for c in r + 1..3 {
            a[r][c] = a[r][c].mod_floor(&md);
        }
    }
    reduce(&mut a, 2, 1, 1); // z mod p^{m2}
    reduce(&mut a, 1, 0, 0); // x mod p^{m1}
    reduce(&mut a, 2, 0, 0); // y mod p^{m1}
    let common = [a[0][1].clone(), a[0][2].clone(), a[1][2].clone()]
        .iter()
        .filter_map(|e| valuation(e, p, u32::MAX))
        .chain(m)
        .min()
        .unwrap();
    let scale = pb.pow(common);
    for row in a.iter_mut() {
        for e in row.iter_mut() {
            *e = &*e / &scale;
        }
    }
    Ok(IwasawaForm { p, m: m.map(|x| x - common), b: a })
}

/// `g ↦ g̃` through `i ↦ x`, with `x` the root of −1 making `π̃ ≡ 0 mod p`.
pub fn to_padic<T: Int>(g: &GMat<T>, p: u64, n: u32) -> Result<[[PadicScalar; 3]; 3]> {
    let x = pi_root(p, n)?;
    Ok(std::array::from_fn(|r| {
        std::array::from_fn(|c| {
            let e = &g.0[r][c];
            PadicScalar::new(p, n, e.re.to_big() + e.im.to_big() * &x)
        })
    }))
}

fn pi_root(p: u64, n: u32) -> Result<BigInt> {
    let PrimeSplitting::Split(pi) = split_prime::<i64>(p)? else {
        return Err(Error::InertPrime(p));
    };
    let x0 = min_root(p)?;
    let x0 = if (pi.re + pi.im * x0 as i64).rem_euclid(p as i64) == 0 { x0 } else { p - x0 };
    Ok(lift_root(p, x0, n))
}

/// One letter of a word: a generator index, possibly inverted (adjoint).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub index: usize,
    pub inverse: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn from_indices(indices: &[usize]) -> Self {
        Word(indices.iter().map(|&index| Letter { index, inverse: false }).collect())
    }
}

/// Exact product of the lifts along the word, canonicalised.
pub fn evaluate_word<T: Int>(word: &Word, gates: &GateSet<T>) -> Result<ProjElement<T>> {
    let mut acc = GMat::identity();
    for l in &word.0 {
        let s = gates
            .lifts
            .get(l.index)
            .ok_or(Error::IndexOutOfRange { index: l.index, len: gates.len() })?;
        let s = if l.inverse { s.adjoint() } else { s.clone() };
        acc = acc.mul(&s).canonical()?;
    }
    ProjElement::new(&acc)
}

/// Is `g` (projectively) in `Λ_p`? The factor `gg*` must be a power of `p`
/// and a unit multiple of `g` must have every diagonal entry `≡ 1 mod 2+2i`.
pub fn in_lattice<T: Int>(g: &GMat<T>, p: u64) -> Result<bool> {
    let g = g.canonical()?;
    if !factor_is_p_power(&g, p)? {
        return Ok(false);
    }
    Ok(GaussInt::<T>::units().iter().any(|u| (0..3).all(|j| (u * &g.0[j][j]).residue_2p2i() == Residue8::one())))
}

/// Counters from a navigation run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct NavStats {
    /// Steps where the row rule matched exactly one descending generator.
    pub unique_matches: usize,
    /// Steps resolved by scanning all generators.
    pub fallbacks: usize,
}

/// A navigator for one gate set; precomputes `b_s` for the split fast path.
#[derive(Debug, Clone)]
pub struct Navigator<T: Int> {
    gates: GateSet<T>,
    rows: Vec<Option<(usize, [u64; 3])>>,
}

impl<T: Int> Navigator<T> {
    pub fn new(gates: GateSet<T>) -> Result<Self> {
        let p = gates.p;
        check_odd_prime(p)?;
        let rows = if gates.variant == Variant::Split {
            gates
                .lifts
                .iter()
                .map(|s| {
                    let b = iwasawa_form(&to_padic(s, p, 6)?)?;
                    Ok(b.last_nontrivial_row().map(|j| (j, b.row_mod_p(j))))
                })
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        Ok(Self { gates, rows })
    }

    pub fn gates(&self) -> &GateSet<T> {
        &self.gates
    }

    /// Distance from the base vertex in generator steps.
    pub fn height(&self, g: &GMat<T>) -> Result<u32> {
        let p = self.gates.p;
        match self.gates.variant {
            Variant::Split => pi_height(g, p),
            Variant::Full => Ok(level(g, p)? / ord_p(p_prime(p), p)),
            Variant::Super => Err(Error::Invalid("navigation of the super gates is not supported".into())),
        }
    }

    /// A word of length `height(g)` over the gate set evaluating to `g`.
    pub fn navigate(&self, g: &GMat<T>) -> Result<(Word, NavStats)> {
        let p = self.gates.p;
        let mut g = g.canonical()?;
        if !in_lattice(&g, p)? {
            return Err(Error::NotInLattice(format!("{g:?}")));
        }
        let mut h = self.height(&g)?;
        let mut word = Vec::with_capacity(h as usize);
        let mut stats = NavStats::default();
        while h > 0 {
            let fast = if self.gates.variant == Variant::Split { self.row_rule(&g, h)? } else { None };
            let (k, next) = match fast {
                Some(found) => {
                    stats.unique_matches += 1;
                    found
                }
                None => {
                    stats.fallbacks += 1;
                    self.scan(&g, h)?
                }
            };
            word.push(k);
            g = next;
            h -= 1;
        }
        if !g.is_scalar() {
            return Err(Error::NotInLattice(format!("height 0 but not the identity: {g:?}")));
        }
        Ok((Word::from_indices(&word), stats))
    }

    fn descend(&self, g: &GMat<T>, k: usize, h: u32) -> Result<Option<GMat<T>>> {
        let next = self.gates.lifts[k].adjoint().mul(g).canonical()?;
        Ok((self.height(&next)? + 1 == h).then_some(next))
    }

    fn row_rule(&self, g: &GMat<T>, h: u32) -> Result<Option<(usize, GMat<T>)>> {
        let p = self.gates.p;
        let mut n = h + 2;
        let b = loop {
            match iwasawa_form(&to_padic(g, p, n)?) {
                Ok(b) => break b,
                Err(Error::PrecisionExceeded(_)) if n < 8 * (h + 2) => n += h + 2,
                Err(e) => return Err(e),
            }
        };
        let Some(j) = b.last_nontrivial_row() else { return Ok(None) };
        let row = b.row_mod_p(j);
        let matches: Vec<usize> =
            (0..self.rows.len()).filter(|&k| self.rows[k] == Some((j, row))).collect();
        if matches.len() != 1 {
            return Ok(None);
        }
        Ok(self.descend(g, matches[0], h)?.map(|next| (matches[0], next)))
    }

    fn scan(&self, g: &GMat<T>, h: u32) -> Result<(usize, GMat<T>)> {
        for k in 0..self.gates.len() {
            if let Some(next) = self.descend(g, k, h)? {
                return Ok((k, next));
            }
        }
        Err(Error::NotInLattice("no generator lowers the height".into()))
    }
}

fn ord_p(n: u64, p: u64) -> u32 {
    let mut n = n;
    let mut k = 0;
    while n.is_multiple_of(p) {
        n /= p;
        k += 1;
    }
    k
}

/// One-shot navigation (see [`Navigator`]).
pub fn navigate<T: Int>(g: &GMat<T>, gates: &GateSet<T>) -> Result<Word> {
    Navigator::new(gates.clone())?.navigate(g).map(|(w, _)| w)
}

/// A random word of length `len` whose height is exactly `len` (each letter
/// drawn uniformly among those extending the height by one).
pub fn random_reduced_word<T: Int, R: rand::Rng>(nav: &Navigator<T>, len: usize, rng: &mut R) -> Result<(Word, GMat<T>)> {
    let gates = nav.gates();
    let mut g = GMat::identity();
    let mut idx = Vec::with_capacity(len);
    while idx.len() < len {
        let k = rng.gen_range(0..gates.len());
        let next = g.mul(&gates.lifts[k]).canonical()?;
        if nav.height(&next)? as usize == idx.len() + 1 {
            idx.push(k);
            g = next;
        }
    }
    Ok((Word::from_indices(&idx), g))
}
