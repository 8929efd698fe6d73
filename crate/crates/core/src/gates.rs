//! Golden-gate generator sets `S_p`, `S'_p` and the super gates `σ, τ`.
//!
//! `S_p` is the set of integral matrices `A` with `A A* = p' I` (`p' = p`
//! for split `p`, `p²` for inert `p`), `A` not scalar, and every diagonal
//! entry congruent to 1 modulo `2+2i`. The split subset `S'_p` keeps the
//! elements of π-height one.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{check_odd_prime, GaussInt, Residue8};
use crate::scalar::Int;
use crate::similitude::{pi_height, GMat, ProjElement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// The full set `S_p`.
    Full,
    /// `S'_p`, the π-height-one half of `S_p` (split `p` only).
    Split,
    /// The super golden gates `σ, τ` over `Z[1/2][i]`.
    Super,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Variant::Full),
            "split" => Ok(Variant::Split),
            "super" => Ok(Variant::Super),
            _ => Err(Error::Invalid(format!("unknown variant {s:?}"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Full => "full",
            Variant::Split => "split",
            Variant::Super => "super",
        })
    }
}

/// `p'`: `p` when `p = 1 mod 4`, `p²` when `p = 3 mod 4`.
pub fn p_prime(p: u64) -> u64 {
    if p % 4 == 1 {
        p
    } else {
        p * p
    }
}

/// A generator set, indexed by the sorted order of canonical keys.
#[derive(Debug, Clone)]
pub struct GateSet<T: Int> {
    pub p: u64,
    pub variant: Variant,
    /// Canonical projective classes, sorted.
    pub elements: Vec<ProjElement<T>>,
    /// Integral representatives as defined by the congruence conditions,
    /// aligned with `elements`.
    pub lifts: Vec<GMat<T>>,
}

impl<T: Int> GateSet<T> {
    /// Builds a set from integral representatives, sorting by canonical key.
    pub fn from_lifts(p: u64, variant: Variant, lifts: Vec<GMat<T>>) -> Self {
        let mut pairs: Vec<_> = lifts
            .into_iter()
            .map(|l| (ProjElement::new(&l).expect("generators are nonzero"), l))
            .collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let (elements, lifts) = pairs.into_iter().unzip();
        Self { p, variant, elements, lifts }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, g: &ProjElement<T>) -> Option<usize> {
        self.elements.binary_search(g).ok()
    }

    /// Index of the projective inverse of generator `k`, if it is in the set.
    pub fn inverse_index(&self, k: usize) -> Option<usize> {
        self.index_of(&self.elements[k].inverse())
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.len()).all(|k| self.inverse_index(k).is_some())
    }

    pub fn convert<U: Int>(&self) -> GateSet<U> {
        GateSet {
            p: self.p,
            variant: self.variant,
            elements: self.elements.iter().map(|e| e.convert()).collect(),
            lifts: self.lifts.iter().map(|l| l.convert()).collect(),
        }
    }
}

/// All `v ∈ Z[i]³` with `|v_0|² + |v_1|² + |v_2|² = n`.
fn vectors_of_norm(n: i64) -> Vec<[GaussInt<i64>; 3]> {
    let r = (n as f64).sqrt() as i64 + 1;
    let mut by_norm: HashMap<i64, Vec<GaussInt<i64>>> = HashMap::new();
    for a in -r..=r {
        for b in -r..=r {
            let g = GaussInt::from_ints(a, b);
            let m = g.norm();
            if m <= n {
                by_norm.entry(m).or_default().push(g);
            }
        }
    }
    let mut out = Vec::new();
    let empty = Vec::new();
    for n0 in 0..=n {
        let Some(xs) = by_norm.get(&n0) else { continue };
        for n1 in 0..=n - n0 {
            let Some(ys) = by_norm.get(&n1) else { continue };
            let zs = by_norm.get(&(n - n0 - n1)).unwrap_or(&empty);
            for x in xs {
                for y in ys {
                    for z in zs {
                        out.push([x.clone(), y.clone(), z.clone()]);
                    }
                }
            }
        }
    }
    out
}

fn hermitian_dot(a: &[GaussInt<i64>; 3], b: &[GaussInt<i64>; 3]) -> GaussInt<i64> {
    let mut acc = GaussInt::zero();
    for k in 0..3 {
        acc = &acc + &(&a[k] * &b[k].conj());
    }
    acc
}

fn gaussians_of_norm(n: i64) -> Vec<GaussInt<i64>> {
    let r = (n as f64).sqrt() as i64 + 1;
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            let g = GaussInt::from_ints(a, b);
            if g.norm() == n {
                out.push(g);
            }
        }
    }
    out
}

/// Enumerates the lifts of `S_p` as integral matrices.
fn enumerate_lifts(p: u64) -> Vec<GMat<i64>> {
    let pp = p_prime(p) as i64;
    let one = Residue8::one();
    let rows = vectors_of_norm(pp);
    let slot: Vec<Vec<&[GaussInt<i64>; 3]>> = (0..3)
        .map(|j| rows.iter().filter(|r| r[j].residue_2p2i() == one).collect())
        .collect();

    // backtrack: first row, then an orthogonal second row; the third row is
    // forced up to a Gaussian multiple by the cross product
    let found: Vec<Vec<GMat<i64>>> = slot[0]
        .par_iter()
        .map(|r1| {
            let mut out = Vec::new();
            for r2 in &slot[1] {
                // column norms bound the entries of the remaining rows
                if (0..3).any(|k| r1[k].norm() + r2[k].norm() > pp) {
                    continue;
                }
                if !hermitian_dot(r1, r2).is_zero() {
                    continue;
                }
                let cross: [GaussInt<i64>; 3] = [
                    &(&r1[1] * &r2[2]) - &(&r1[2] * &r2[1]),
                    &(&r1[2] * &r2[0]) - &(&r1[0] * &r2[2]),
                    &(&r1[0] * &r2[1]) - &(&r1[1] * &r2[0]),
                ];
                let w = cross.map(|c| c.conj());
                let c = w.iter().fold(GaussInt::zero(), |acc, e| acc.gcd(e));
                let w0: Vec<_> = w.iter().map(|e| e.div_exact(&c).unwrap()).collect();
                let n0: i64 = w0.iter().map(|e| e.norm()).sum();
                if pp % n0 != 0 {
                    continue;
                }
                for mu in gaussians_of_norm(pp / n0) {
                    let r3: [GaussInt<i64>; 3] = std::array::from_fn(|k| &w0[k] * &mu);
                    if r3[2].residue_2p2i() != one {
                        continue;
                    }
                    let m = GMat([(*r1).clone(), (*r2).clone(), r3]);
                    if !m.is_scalar() {
                        out.push(m);
                    }
                }
            }
            out
        })
        .collect();
    found.into_iter().flatten().collect()
}

/// The full generator set `S_p` for an odd prime `p`.
pub fn enumerate_sp<T: Int>(p: u64) -> Result<GateSet<T>> {
    check_odd_prime(p)?;
    let lifts = enumerate_lifts(p).into_iter().map(|m| m.convert()).collect();
    Ok(GateSet::from_lifts(p, Variant::Full, lifts))
}

/// `S'_p = { s ∈ S_p : h_π(s) = 1 }` for `p = 1 mod 4`.
pub fn enumerate_sp_prime<T: Int>(p: u64) -> Result<GateSet<T>> {
    check_odd_prime(p)?;
    if p % 4 != 1 {
        return Err(Error::InertPrime(p));
    }
    let full = enumerate_sp::<T>(p)?;
    let lifts = full
        .lifts
        .into_iter()
        .filter(|l| pi_height(l, p) == Ok(1))
        .collect();
    Ok(GateSet::from_lifts(p, Variant::Split, lifts))
}

/// Dispatches on the variant; `Super` ignores `p`.
pub fn gate_set<T: Int>(p: u64, variant: Variant) -> Result<GateSet<T>> {
    match variant {
        Variant::Full => enumerate_sp(p),
        Variant::Split => enumerate_sp_prime(p),
        Variant::Super => Ok(super_gates()),
    }
}

/// `σ` (cyclic permutation) and `τ`, generating `Λ₂ ≅ Z/3 * Z/3`.
pub fn sigma<T: Int>() -> GMat<T> {
    GMat::from_ints([
        [(0, 0), (1, 0), (0, 0)],
        [(0, 0), (0, 0), (1, 0)],
        [(1, 0), (0, 0), (0, 0)],
    ])
}

pub fn tau<T: Int>() -> GMat<T> {
    GMat::from_ints([
        [(-1, 0), (1, 0), (0, 0)],
        [(0, 1), (0, 1), (0, 0)],
        [(0, 0), (0, 0), (1, -1)],
    ])
}

pub fn super_gates<T: Int>() -> GateSet<T> {
    GateSet::from_lifts(2, Variant::Super, vec![sigma(), tau()])
}

/// Checks that all alternating words `σ^{a₁} τ^{b₁} σ^{a₂} …` (exponents in
/// {1, 2}) with at most `max_syllables` syllables, starting with either
/// letter, are pairwise projectively distinct. Returns the number of words
/// and whether they are all distinct.
pub fn alternating_words_distinct<T: Int>(max_syllables: usize) -> (usize, bool) {
    let letters = [sigma::<T>(), tau::<T>()];
    let powers: [[GMat<T>; 2]; 2] = [
        [letters[0].clone(), letters[0].mul(&letters[0])],
        [letters[1].clone(), letters[1].mul(&letters[1])],
    ];
    let mut seen: HashSet<ProjElement<T>> = HashSet::new();
    seen.insert(ProjElement::identity());
    let mut count = 1;
    let mut distinct = true;
    // (element, last letter)
    let mut layer: Vec<(GMat<T>, usize)> = Vec::new();
    for (letter, pw) in powers.iter().enumerate() {
        for m in pw {
            layer.push((m.clone(), letter));
        }
    }
    for _ in 0..max_syllables {
        let mut next = Vec::new();
        for (m, letter) in &layer {
            count += 1;
            if !seen.insert(ProjElement::new(m).expect("nonzero")) {
                distinct = false;
            }
            let other = 1 - letter;
            for pw in &powers[other] {
                // keep entries small: the projective class is all that matters
                let prod = ProjElement::new(&m.mul(pw)).expect("nonzero").into_matrix();
                next.push((prod, other));
            }
        }
        layer = next;
    }
    (count, distinct)
}

/// Word-metric spheres `S^(0), …, S^(lmax)` of the Cayley graph of the
/// generated semigroup, by breadth-first closure with canonical dedup.
/// Each sphere is sorted. Fails when the ball would exceed `cap` elements.
pub fn spheres<T: Int>(
    gens: &[ProjElement<T>],
    lmax: usize,
    cap: usize,
) -> Result<Vec<Vec<ProjElement<T>>>> {
    let mut seen: HashSet<ProjElement<T>> = HashSet::new();
    let id = ProjElement::identity();
    seen.insert(id.clone());
    let mut out = vec![vec![id]];
    for _ in 0..lmax {
        let frontier = out.last().unwrap();
        let mut products: Vec<ProjElement<T>> = frontier
            .par_iter()
            .flat_map_iter(|x| gens.iter().map(move |s| x.mul(s)))
            .collect();
        products.par_sort_unstable();
        products.dedup();
        let next: Vec<_> = products
            .into_iter()
            .filter(|x| !seen.contains(x))
            .collect();
        if seen.len() + next.len() > cap {
            return Err(Error::CapExceeded { cap });
        }
        seen.extend(next.iter().cloned());
        out.push(next);
    }
    Ok(out)
}

/// Sphere of radius `l` in the Cayley graph of `gates`.
pub fn sphere<T: Int>(gates: &GateSet<T>, l: usize, cap: usize) -> Result<Vec<ProjElement<T>>> {
    Ok(spheres(&gates.elements, l, cap)?.pop().unwrap())
}

/// Word distance from the identity for every element of the ball of radius
/// `lmax`.
pub fn ball_distances<T: Int>(
    gens: &[ProjElement<T>],
    lmax: usize,
    cap: usize,
) -> Result<HashMap<ProjElement<T>, usize>> {
    let sph = spheres(gens, lmax, cap)?;
    let mut out = HashMap::new();
    for (l, s) in sph.into_iter().enumerate() {
        for x in s {
            out.insert(x, l);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similitude::{integer_similitude_factor, level};

    #[test]
    fn counts_small() {
        assert_eq!(enumerate_sp::<i64>(5).unwrap().len(), 62);
        assert_eq!(enumerate_sp::<i64>(3).unwrap().len(), 84);
        assert_eq!(enumerate_sp_prime::<i64>(5).unwrap().len(), 31);
        assert_eq!(enumerate_sp::<i64>(2).unwrap_err(), Error::NotOddPrime(2));
        assert_eq!(enumerate_sp::<i64>(9).unwrap_err(), Error::NotOddPrime(9));
        assert_eq!(enumerate_sp_prime::<i64>(3).unwrap_err(), Error::InertPrime(3));
    }

    #[test]
    fn lifts_satisfy_the_defining_conditions() {
        for p in [3u64, 5] {
            let s = enumerate_sp::<i64>(p).unwrap();
            for l in &s.lifts {
                assert_eq!(integer_similitude_factor(l).unwrap(), p_prime(p) as i64);
                assert!(!l.is_scalar());
                for j in 0..3 {
                    assert_eq!(l.0[j][j].residue_2p2i(), Residue8::one());
                }
                let lv = level(l, p).unwrap();
                assert_eq!(lv, if p % 4 == 1 { 1 } else { 2 });
            }
            assert!(s.is_symmetric());
        }
    }

    #[test]
    fn split_set_and_inverses_partition_full_set() {
        let full = enumerate_sp::<i64>(5).unwrap();
        let split = enumerate_sp_prime::<i64>(5).unwrap();
        let mut union: Vec<_> = split.elements.clone();
        union.extend(split.elements.iter().map(|e| e.inverse()));
        union.sort();
        let before = union.len();
        union.dedup();
        assert_eq!(before, union.len(), "S' and S'^-1 are disjoint");
        assert_eq!(union, full.elements);
    }

    #[test]
    fn super_gate_relations() {
        let s = sigma::<i64>();
        let t = tau::<i64>();
        assert_eq!(s.mul(&s).mul(&s), GMat::identity());
        assert_eq!(t.mul(&t.adjoint()), GMat::scalar(GaussInt::from_ints(2, 0)));
        assert_eq!(t.mul(&t).mul(&t), GMat::scalar(GaussInt::from_ints(-2, -2)));
        let (n, distinct) = alternating_words_distinct::<i64>(6);
        assert_eq!(n, 1 + 2 * (2 + 4 + 8 + 16 + 32 + 64));
        assert!(distinct);
    }

    #[test]
    fn spheres_start_correctly() {
        let s = enumerate_sp_prime::<i64>(5).unwrap();
        let sph = spheres(&s.elements, 1, 1000).unwrap();
        assert_eq!(sph[0], vec![ProjElement::identity()]);
        assert_eq!(sph[1], s.elements);
        let err = spheres(&s.elements, 2, 100).unwrap_err();
        assert_eq!(err, Error::CapExceeded { cap: 100 });
    }
}
