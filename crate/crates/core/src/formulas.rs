//! Closed forms for the degree (`λ_triv`) and the tempered operator-norm
//! bound (`λ_ram`) of the spherical sum operators built from `S_p^(ℓ)` and
//! `S'_p^(ℓ)`.
//!
//! All evaluation is in exact rationals. Binomial coefficients with a
//! negative (or too small) top evaluate to zero.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::check_odd_prime;
use crate::gates::Variant;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `p^e` for any integer `e`.
fn ppow(p: u64, e: i64) -> BigRational {
    let base = rat(p as i64);
    if e >= 0 {
        num_traits::pow(base, e as usize)
    } else {
        num_traits::pow(base, (-e) as usize).recip()
    }
}

/// `C(n, k)` with `C(n, k) = 0` whenever `n < k` (in particular `n < 0`).
pub fn binom(n: i64, k: u64) -> BigRational {
    if n < k as i64 {
        return BigRational::zero();
    }
    let mut acc = BigRational::one();
    for j in 0..k as i64 {
        acc = acc * rat(n - j) / rat(j + 1);
    }
    acc
}

fn check(p: u64, l: u32, variant: Variant) -> Result<()> {
    check_odd_prime(p)?;
    if l == 0 {
        return Err(Error::Invalid("sphere radius must be at least 1".into()));
    }
    match variant {
        Variant::Super => Err(Error::Invalid("no closed form for the super gates".into())),
        Variant::Split if p % 4 != 1 => Err(Error::InertPrime(p)),
        _ => Ok(()),
    }
}

fn to_integer(v: BigRational) -> BigInt {
    assert!(v.is_integer(), "closed form produced a non-integer: {v}");
    v.to_integer()
}

/// `|S^(ℓ)|`, the number of words of length exactly `ℓ`.
pub fn lambda_triv(p: u64, l: u32, variant: Variant) -> Result<BigInt> {
    check(p, l, variant)?;
    let l = l as i64;
    let v = match (p % 4, variant) {
        (1, Variant::Full) => {
            rat(l + 1) * ppow(p, 2 * l)
                + rat(2 * l) * ppow(p, 2 * l - 1)
                + rat(2 * l) * ppow(p, 2 * l - 2)
                + rat(l - 1) * ppow(p, 2 * l - 3)
        }
        (1, Variant::Split) => {
            let head = ppow(p, 2 * l) + ppow(p, 2 * l - 1) + ppow(p, 2 * l - 2);
            let tail = (2..=l).fold(BigRational::one(), |acc, i| acc + ppow(p, -i));
            head * tail
        }
        _ => ppow(p, 4 * l) + ppow(p, 4 * l - 3),
    };
    Ok(to_integer(v))
}

/// Maximal modulus of the spherical operator on the building's `L²`
/// spectrum.
pub fn lambda_ram(p: u64, l: u32, variant: Variant) -> Result<BigRational> {
    check(p, l, variant)?;
    let l = l as i64;
    let half = |n: i64| rat(n) / rat(2);
    Ok(match (p % 4, variant) {
        (1, Variant::Full) => {
            binom(l + 3, 3) * half(l + 2) * ppow(p, l)
                - binom(l + 1, 3) * half(3 * l + 8) * ppow(p, l - 1)
                + binom(l + 1, 3) * half(3 * l - 8) * ppow(p, l - 2)
                - binom(l - 1, 3) * half(l - 2) * ppow(p, l - 3)
        }
        (1, Variant::Split) => binom(l + 2, 2) * ppow(p, l) - binom(l - 1, 2) * ppow(p, l - 3),
        _ => {
            rat(l + 1) * ppow(p, 2 * l)
                + rat(l) * ppow(p, 2 * l - 3) * rat((p * p - p - 1) as i64)
                + ppow(p, 2 * l - 3)
        }
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SphereStats {
    pub p: u64,
    pub l: u32,
    pub variant: Variant,
    pub lambda_triv: String,
    pub lambda_ram: String,
    pub lambda_ram_f64: f64,
}

pub fn sphere_stats(p: u64, l: u32, variant: Variant) -> Result<SphereStats> {
    let triv = lambda_triv(p, l, variant)?;
    let ram = lambda_ram(p, l, variant)?;
    debug_assert!(ram.is_positive());
    Ok(SphereStats {
        p,
        l,
        variant,
        lambda_triv: triv.to_string(),
        lambda_ram_f64: ram.to_f64().unwrap_or(f64::NAN),
        lambda_ram: ram.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn degrees_at_radius_one_match_generator_counts() {
        assert_eq!(lambda_triv(5, 1, Variant::Full).unwrap(), int(62));
        assert_eq!(lambda_triv(5, 1, Variant::Split).unwrap(), int(31));
        assert_eq!(lambda_triv(3, 1, Variant::Full).unwrap(), int(84));
        assert_eq!(lambda_triv(13, 1, Variant::Full).unwrap(), int(366));
    }

    #[test]
    fn degrees_at_radius_two() {
        // 3·5⁴ + 4·5³ + 4·5² + 5
        assert_eq!(lambda_triv(5, 2, Variant::Full).unwrap(), int(2480));
        // (5⁴ + 5³ + 5²)(1 + 5⁻²) = 775 + 31
        assert_eq!(lambda_triv(5, 2, Variant::Split).unwrap(), int(806));
        assert_eq!(lambda_triv(3, 2, Variant::Full).unwrap(), int(6561 + 243));
    }

    #[test]
    fn ramanujan_bounds_at_radius_one() {
        for p in [5u64, 13, 17] {
            assert_eq!(lambda_ram(p, 1, Variant::Full).unwrap(), rat(6 * p as i64));
            assert_eq!(lambda_ram(p, 1, Variant::Split).unwrap(), rat(3 * p as i64));
        }
        assert_eq!(lambda_ram(3, 1, Variant::Full).unwrap(), rat(20));
        assert_eq!(lambda_ram(7, 1, Variant::Full).unwrap(), rat(2 * 49 + 7 - 1));
    }

    #[test]
    fn binomials_with_small_tops_vanish() {
        assert_eq!(binom(-1, 3), BigRational::zero());
        assert_eq!(binom(2, 3), BigRational::zero());
        assert_eq!(binom(5, 2), rat(10));
        assert_eq!(binom(3, 0), rat(1));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(lambda_triv(3, 1, Variant::Split), Err(Error::InertPrime(3)));
        assert!(lambda_triv(5, 0, Variant::Full).is_err());
        assert_eq!(lambda_triv(9, 1, Variant::Full), Err(Error::NotOddPrime(9)));
    }

    #[test]
    fn growth_and_decay() {
        for p in [3u64, 5, 13] {
            let variants: &[Variant] = if p % 4 == 1 { &[Variant::Full, Variant::Split] } else { &[Variant::Full] };
            for &v in variants {
                for l in 1..8 {
                    let a = lambda_triv(p, l, v).unwrap();
                    let b = lambda_triv(p, l + 1, v).unwrap();
                    assert!(b >= a * int((p * p) as i64), "growth p={p} l={l} {v}");
                    let ram = lambda_ram(p, l, v).unwrap();
                    let triv = BigRational::from_integer(lambda_triv(p, l, v).unwrap());
                    assert!(ram.is_positive() && ram < triv);
                    // λ_ram² <= C ℓ^c λ_triv with C = 64, c = 6 across the tested range
                    let bound = rat(64) * rat((l as i64).pow(6)) * triv;
                    assert!(ram.clone() * ram <= bound, "decay p={p} l={l} {v}");
                }
            }
        }
    }
}
