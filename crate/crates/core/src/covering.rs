//! Gate words as points of `PU(3)`: embedding, the projective chordal
//! metric, Haar sampling, and nearest-word covering statistics.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gates::{gate_set, spheres, Variant};
use crate::scalar::{Int, Real};
use crate::similitude::{integer_similitude_factor, ProjElement};

/// A unitary 3×3 matrix, up to a global phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PU3Point<T: Real> {
    u: [[Complex<T>; 3]; 3],
}

impl<T: Real> PU3Point<T> {
    pub fn identity() -> Self {
        let (z, o) = (Complex::new(T::zero(), T::zero()), Complex::new(T::one(), T::zero()));
        Self { u: std::array::from_fn(|r| std::array::from_fn(|c| if r == c { o } else { z })) }
    }

    /// Wraps `u`, failing when `‖uu* − I‖_max` exceeds `tol`.
    pub fn from_unitary(u: [[Complex<T>; 3]; 3], tol: T) -> Result<Self> {
        let x = Self { u };
        if x.unitarity_defect() > tol {
            return Err(Error::Invalid(format!("matrix is not unitary (defect {})", x.unitarity_defect())));
        }
        Ok(x)
    }

    pub fn matrix(&self) -> &[[Complex<T>; 3]; 3] {
        &self.u
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self {
            u: std::array::from_fn(|r| {
                std::array::from_fn(|c| (0..3).fold(Complex::new(T::zero(), T::zero()), |acc, k| acc + self.u[r][k] * o.u[k][c]))
            }),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self { u: std::array::from_fn(|r| std::array::from_fn(|c| self.u[c][r].conj())) }
    }

    pub fn trace(&self) -> Complex<T> {
        self.u[0][0] + self.u[1][1] + self.u[2][2]
    }

    /// `tr(self* · o)`, without forming the product.
    pub fn inner(&self, o: &Self) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for r in 0..3 {
            for c in 0..3 {
                acc = acc + self.u[r][c].conj() * o.u[r][c];
            }
        }
        acc
    }

    pub fn det(&self) -> Complex<T> {
        let u = &self.u;
        u[0][0] * (u[1][1] * u[2][2] - u[1][2] * u[2][1]) - u[0][1] * (u[1][0] * u[2][2] - u[1][2] * u[2][0])
            + u[0][2] * (u[1][0] * u[2][1] - u[1][1] * u[2][0])
    }

    pub fn unitarity_defect(&self) -> T {
        let p = self.mul(&self.adjoint());
        let mut worst = T::zero();
        for r in 0..3 {
            for c in 0..3 {
                let target = if r == c { T::one() } else { T::zero() };
                worst = worst.max((p.u[r][c] - Complex::new(target, T::zero())).norm());
            }
        }
        worst
    }
}

/// `g / √λ` where `gg* = λI`.
pub fn to_unitary<I: Int, T: Real>(g: &ProjElement<I>) -> Result<PU3Point<T>> {
    let m = g.matrix();
    let lam = integer_similitude_factor(m)?.to_f64().ok_or(Error::Invalid("similitude factor overflows f64".into()))?;
    let s = lam.sqrt();
    let cvt = |v: &I| T::from_f64(v.to_f64().unwrap_or(f64::NAN) / s).expect("float conversion");
    Ok(PU3Point { u: std::array::from_fn(|r| std::array::from_fn(|c| Complex::new(cvt(&m.0[r][c].re), cvt(&m.0[r][c].im)))) })
}

/// `sqrt(6 − 2|tr(x*y)|)`: the Frobenius distance minimised over phases.
pub fn distance<T: Real>(x: &PU3Point<T>, y: &PU3Point<T>) -> T {
    let six = T::from_f64(6.0).unwrap();
    let two = T::one() + T::one();
    (six - two * x.inner(y).norm()).max(T::zero()).sqrt()
}

/// Haar-distributed point: Gram–Schmidt on a complex Gaussian matrix. The
/// implicit `R` factor has a positive real diagonal, which makes `Q` exactly
/// Haar on `U(3)`.
pub fn haar_sample<T: Real, R: Rng + ?Sized>(rng: &mut R) -> PU3Point<T> {
    let mut cols: [[Complex<f64>; 3]; 3] = std::array::from_fn(|_| {
        std::array::from_fn(|_| Complex::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)))
    });
    for j in 0..3 {
        for k in 0..j {
            let proj: Complex<f64> = (0..3).map(|r| cols[k][r].conj() * cols[j][r]).sum();
            for r in 0..3 {
                let v = cols[k][r];
                cols[j][r] -= proj * v;
            }
        }
        let n = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[j].iter_mut() {
            *z /= n;
        }
    }
    let cv = |z: Complex<f64>| Complex::new(T::from_f64(z.re).unwrap(), T::from_f64(z.im).unwrap());
    PU3Point { u: std::array::from_fn(|r| std::array::from_fn(|c| cv(cols[c][r]))) }
}

/// Per-sample generator: stream `i` of the master seed.
pub fn sample_rng(seed: u64, i: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    rng
}

pub fn haar_samples<T: Real>(n: usize, seed: u64) -> Vec<PU3Point<T>> {
    (0..n).into_par_iter().map(|i| haar_sample(&mut sample_rng(seed, i as u64))).collect()
}

/// Vantage-point tree over a fixed point set.
#[derive(Debug, Clone)]
pub struct VpTree<T: Real> {
    points: Vec<PU3Point<T>>,
    nodes: Vec<VpNode<T>>,
}

#[derive(Debug, Clone)]
struct VpNode<T> {
    point: usize,
    radius: T,
    inside: Option<usize>,
    outside: Option<usize>,
}

impl<T: Real> VpTree<T> {
    pub fn new(points: Vec<PU3Point<T>>) -> Self {
        let mut tree = Self { nodes: Vec::with_capacity(points.len()), points };
        let mut idx: Vec<usize> = (0..tree.points.len()).collect();
        tree.build(&mut idx);
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn build(&mut self, idx: &mut [usize]) -> Option<usize> {
        let (&mut vp, rest) = idx.split_first_mut()?;
        let slot = self.nodes.len();
        self.nodes.push(VpNode { point: vp, radius: T::zero(), inside: None, outside: None });
        if rest.is_empty() {
            return Some(slot);
        }
        let mid = rest.len() / 2;
        let pts = &self.points;
        rest.select_nth_unstable_by(mid, |&a, &b| {
            distance(&pts[vp], &pts[a]).partial_cmp(&distance(&pts[vp], &pts[b])).unwrap()
        });
        let radius = distance(&pts[vp], &pts[rest[mid]]);
        let (lo, hi) = rest.split_at_mut(mid);
        let inside = self.build(lo);
        let outside = self.build(hi);
        self.nodes[slot] = VpNode { point: vp, radius, inside, outside };
        Some(slot)
    }

    /// Index and distance of the nearest point.
    pub fn nearest(&self, q: &PU3Point<T>) -> Option<(usize, T)> {
        let mut best = (usize::MAX, T::infinity());
        let mut stack = vec![if self.nodes.is_empty() { return None } else { 0 }];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            let d = distance(q, &self.points[node.point]);
            if d < best.1 || (d == best.1 && node.point < best.0) {
                best = (node.point, d);
            }
            let (near, far) = if d < node.radius { (node.inside, node.outside) } else { (node.outside, node.inside) };
            // push the far side first so the near side is searched first
            if let Some(f) = far {
                if (d - node.radius).abs() <= best.1 {
                    stack.push(f);
                }
            }
            if let Some(c) = near {
                stack.push(c);
            }
        }
        Some(best)
    }
}

/// Summary statistics of a distance sample.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    pub q90: f64,
    pub q99: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let i = ((sorted.len() as f64 - 1.0) * q).round() as usize;
    sorted[i]
}

pub fn summarize(values: &[f64]) -> Summary {
    let mut s = values.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Summary {
        max: *s.last().unwrap_or(&f64::NAN),
        mean: s.iter().sum::<f64>() / s.len() as f64,
        median: quantile(&s, 0.5),
        q90: quantile(&s, 0.9),
        q99: quantile(&s, 0.99),
    }
}

/// Empirical CDF of `d(I, x)` for Haar `x`, on a grid of radii.
#[derive(Debug, Clone, Serialize)]
pub struct RadialCdf {
    pub radii: Vec<f64>,
    pub fraction: Vec<f64>,
    #[serde(skip)]
    sorted: Vec<f64>,
}

impl RadialCdf {
    pub fn from_samples(samples: &[PU3Point<f64>], grid: usize) -> Self {
        let id = PU3Point::identity();
        let mut sorted: Vec<f64> = samples.iter().map(|x| distance(&id, x)).collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let top = 6f64.sqrt();
        let radii: Vec<f64> = (0..=grid).map(|k| top * k as f64 / grid as f64).collect();
        let mut cdf = Self { fraction: Vec::new(), radii, sorted };
        cdf.fraction = cdf.radii.iter().map(|&r| cdf.at(r)).collect();
        cdf
    }

    /// Fraction of samples within distance `r` of the identity, i.e. the
    /// estimated Haar volume of a ball of radius `r`.
    pub fn at(&self, r: f64) -> f64 {
        self.sorted.partition_point(|&d| d <= r) as f64 / self.sorted.len() as f64
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelStats {
    pub l: u32,
    /// `|S^(≤ℓ)|`.
    pub ball_size: usize,
    pub sphere_size: usize,
    pub summary: Summary,
    /// Estimated volume of a ball with radius the maximal nearest distance.
    pub volume_at_max: f64,
    pub ball_size_times_volume: f64,
    pub distances: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoveringReport {
    pub p: u64,
    pub variant: Variant,
    pub l_max: u32,
    pub samples: usize,
    pub seed: u64,
    pub levels: Vec<LevelStats>,
    pub radial_cdf: RadialCdf,
}

/// Nearest-word distances from `n_samples` Haar points to `S^(≤ℓ)` for
/// every `ℓ ≤ l_max`.
pub fn covering_stats(p: u64, variant: Variant, l_max: u32, n_samples: usize, seed: u64, cap: usize) -> Result<CoveringReport> {
    if n_samples == 0 {
        return Err(Error::Invalid("at least one sample is required".into()));
    }
    let gates = gate_set::<i64>(p, variant)?;
    let spheres = spheres(&gates.elements, l_max as usize, cap)?;
    let samples = haar_samples::<f64>(n_samples, seed);
    let mut net: Vec<PU3Point<f64>> = Vec::new();
    let mut levels = Vec::new();
    let cdf = RadialCdf::from_samples(&samples, 200);
    for (l, sphere) in spheres.iter().enumerate() {
        let pts: Vec<PU3Point<f64>> = sphere.par_iter().map(to_unitary).collect::<Result<_>>()?;
        net.extend(pts);
        let tree = VpTree::new(net.clone());
        let distances: Vec<f64> = samples.par_iter().map(|x| tree.nearest(x).expect("nonempty").1).collect();
        let summary = summarize(&distances);
        let volume_at_max = cdf.at(summary.max);
        levels.push(LevelStats {
            l: l as u32,
            ball_size: net.len(),
            sphere_size: sphere.len(),
            volume_at_max,
            ball_size_times_volume: volume_at_max * net.len() as f64,
            summary,
            distances,
        });
    }
    Ok(CoveringReport { p, variant, l_max, samples: n_samples, seed, levels, radial_cdf: cdf })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::sphere;

    fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let (mut i, mut j, mut d) = (0, 0, 0f64);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
        }
        d
    }

    fn ks_uniform(v: &[f64]) -> f64 {
        let mut v = v.to_vec();
        v.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let n = v.len() as f64;
        v.iter().enumerate().map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs())).fold(0.0, f64::max)
    }

    #[test]
    fn embedding() {
        let id: PU3Point<f64> = to_unitary(&ProjElement::<i64>::identity()).unwrap();
        assert!(distance(&id, &PU3Point::identity()) < 1e-12);
        let gates = gate_set::<i64>(5, Variant::Full).unwrap();
        for s in &gates.elements {
            let u: PU3Point<f64> = to_unitary(s).unwrap();
            assert!(u.unitarity_defect() < 1e-12);
            assert!(distance(&u, &id) > 0.1);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let g = &gates.elements[rng.gen_range(0..gates.len())];
            let h = &gates.elements[rng.gen_range(0..gates.len())];
            let exact: PU3Point<f64> = to_unitary(&g.mul(h)).unwrap();
            let float = to_unitary::<_, f64>(g).unwrap().mul(&to_unitary(h).unwrap());
            assert!(distance(&exact, &float) < 1e-7);
            assert!((6.0 - 2.0 * exact.inner(&float).norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn metric_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x: PU3Point<f64> = haar_sample(&mut rng);
        assert!(distance(&x, &x) < 1e-7);
        let ph = Complex::from_polar(1.0, 0.7);
        let rot = PU3Point::from_unitary(PU3Point::<f64>::identity().u.map(|r| r.map(|z| z * ph)), 1e-12).unwrap();
        assert!(distance(&PU3Point::identity(), &rot) < 1e-7);
        for _ in 0..100 {
            let (g, x, y): (PU3Point<f64>, PU3Point<f64>, PU3Point<f64>) =
                (haar_sample(&mut rng), haar_sample(&mut rng), haar_sample(&mut rng));
            let d = distance(&x, &y);
            assert!((distance(&g.mul(&x), &g.mul(&y)) - d).abs() < 1e-10);
            assert!((distance(&x.mul(&g), &y.mul(&g)) - d).abs() < 1e-10);
        }
        for _ in 0..10_000 {
            let (x, y, z): (PU3Point<f64>, PU3Point<f64>, PU3Point<f64>) =
                (haar_sample(&mut rng), haar_sample(&mut rng), haar_sample(&mut rng));
            assert!(distance(&x, &z) <= distance(&x, &y) + distance(&y, &z) + 1e-12);
        }
    }

    #[test]
    fn haar_statistics() {
        let xs: Vec<PU3Point<f64>> = haar_samples(100_000, 42);
        assert!(xs.iter().all(|x| x.unitarity_defect() < 1e-12));
        let t: Vec<f64> = xs.iter().map(|x| x.trace().norm_sqr()).collect();
        let mean = t.iter().sum::<f64>() / t.len() as f64;
        let var = t.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t.len() - 1) as f64;
        let se = (var / t.len() as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "mean {mean} se {se}");

        let n = 10_000;
        let crit_two = 1.628 * (2.0 / n as f64).sqrt();
        let g = haar_sample::<f64, _>(&mut ChaCha8Rng::seed_from_u64(7));
        let a: Vec<f64> = xs[..n].iter().map(|x| x.trace().norm()).collect();
        let b: Vec<f64> = xs[n..2 * n].iter().map(|x| g.mul(x).trace().norm()).collect();
        assert!(ks_two_sample(&a, &b) < crit_two);

        let phases: Vec<f64> =
            xs[..n].iter().map(|x| (x.det().arg() + std::f64::consts::PI) / (2.0 * std::f64::consts::PI)).collect();
        assert!(ks_uniform(&phases) < 1.628 / (n as f64).sqrt());
    }

    #[test]
    fn samples_are_deterministic() {
        let a: Vec<PU3Point<f64>> = haar_samples(50, 5);
        let b: Vec<PU3Point<f64>> = (0..50).map(|i| haar_sample(&mut sample_rng(5, i))).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn vp_tree_matches_brute_force() {
        let pts: Vec<PU3Point<f64>> = haar_samples(2000, 1);
        let tree = VpTree::new(pts.clone());
        for q in haar_samples::<f64>(200, 2) {
            let brute = pts.iter().map(|x| distance(&q, x)).fold(f64::INFINITY, f64::min);
            assert_eq!(tree.nearest(&q).unwrap().1, brute);
        }
    }

    #[test]
    fn float_embedding_is_injective() {
        let gates = gate_set::<i64>(3, Variant::Full).unwrap();
        let ball: Vec<_> = (0..=2).flat_map(|l| sphere(&gates, l, 100_000).unwrap()).collect();
        let pts: Vec<PU3Point<f64>> = ball.iter().map(|g| to_unitary(g).unwrap()).collect();
        let gap = (0..pts.len())
            .into_par_iter()
            .map(|i| pts[i + 1..].iter().map(|y| distance(&pts[i], y)).fold(f64::INFINITY, f64::min))
            .reduce(|| f64::INFINITY, f64::min);
        assert!(gap > 1e-4, "minimal gap {gap}");
    }

    #[test]
    fn covering_decreases() {
        let r = covering_stats(3, Variant::Full, 2, 300, 11, 1_000_000).unwrap();
        assert_eq!(r.levels[0].ball_size, 1);
        assert_eq!(r.levels[1].ball_size, 85);
        assert_eq!(r.levels[2].ball_size, 85 + 6804);
        for w in r.levels.windows(2) {
            assert!(w[1].summary.mean < w[0].summary.mean);
            assert!(w[1].summary.max <= w[0].summary.max);
            assert!(w[0].distances.iter().zip(&w[1].distances).all(|(a, b)| b <= a));
        }
        let id = PU3Point::identity();
        let direct: Vec<f64> = haar_samples::<f64>(300, 11).iter().map(|x| distance(&id, x)).collect();
        assert_eq!(r.levels[0].distances, direct);
    }
}
