//! Cayley graphs of `G_{p,q}`, their spectra, and the Ramanujan tests.
//!
//! A graph is stored as one permutation per generator: `perms[s][v]` is the
//! vertex `v·s`. The adjacency operator is `(A f)(v) = Σ_s f(v·s)`.
//!
//! Dense spectra of Cayley graphs are block-diagonalised first. Left
//! multiplication by a cyclic subgroup `C = ⟨c⟩` commutes with `A`, so `A`
//! preserves each isotypic space `{f : f(c·x) = ω^j f(x)}` and the spectrum
//! is the union of the spectra of `|C|` blocks of size `n/|C|`.

use std::collections::HashMap;
use std::io::Write;

use ndarray::Array2;
use ndarray_linalg::{EigVals, EigValsh, Lapack, UPLO};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::finite_field::{Field, FinGroup, FinMat};
use crate::scalar::Real;

/// Largest vertex count accepted by the dense solver.
pub const DENSE_LIMIT: usize = 12_000;

const CHUNK: usize = 4096;

#[derive(Debug, Clone)]
struct LeftSymmetry {
    /// `perm[v]` is the vertex `c·v`.
    perm: Vec<u32>,
    order: usize,
}

#[derive(Debug, Clone)]
pub struct CayleyGraph {
    /// Canonical keys, sorted; empty for graphs built from bare permutations.
    pub vertices: Vec<FinMat>,
    n: usize,
    perms: Vec<Vec<u32>>,
    symmetric: bool,
    left: Option<LeftSymmetry>,
}

fn invert(perm: &[u32]) -> Vec<u32> {
    let mut inv = vec![0; perm.len()];
    for (v, &w) in perm.iter().enumerate() {
        inv[w as usize] = v as u32;
    }
    inv
}

fn is_symmetric(perms: &[Vec<u32>]) -> bool {
    let mut counts: HashMap<&[u32], i64> = HashMap::new();
    for p in perms {
        *counts.entry(p.as_slice()).or_default() += 1;
    }
    let inverses: Vec<Vec<u32>> = perms.iter().map(|p| invert(p)).collect();
    for q in &inverses {
        *counts.entry(q.as_slice()).or_default() -= 1;
    }
    counts.values().all(|&c| c == 0)
}

impl CayleyGraph {
    /// A graph given by one permutation of `0..n` per generator.
    pub fn from_permutations(perms: Vec<Vec<u32>>) -> Result<Self> {
        let n = perms.first().map_or(0, |p| p.len());
        for p in &perms {
            let mut seen = vec![false; n];
            if p.len() != n || p.iter().any(|&w| (w as usize) >= n || std::mem::replace(&mut seen[w as usize], true)) {
                return Err(Error::Invalid("generator is not a permutation of the vertices".into()));
            }
        }
        let symmetric = is_symmetric(&perms);
        Ok(Self { vertices: Vec::new(), n, perms, symmetric, left: None })
    }

    /// `Cay(Z/n, S)` for a set of residues `S`.
    pub fn cyclic(n: usize, steps: &[i64]) -> Result<Self> {
        let perms = steps
            .iter()
            .map(|&s| (0..n as i64).map(|v| (v + s).rem_euclid(n as i64) as u32).collect())
            .collect();
        Self::from_permutations(perms)
    }

    /// `k` uniformly random permutations, each paired with its inverse when
    /// `symmetric` is set (degree `2k`).
    pub fn random(n: usize, k: usize, symmetric: bool, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut perms = Vec::new();
        for _ in 0..k {
            let mut p: Vec<u32> = (0..n as u32).collect();
            for i in (1..n).rev() {
                p.swap(i, rng.gen_range(0..=i));
            }
            if symmetric {
                perms.push(invert(&p));
            }
            perms.push(p);
        }
        Self::from_permutations(perms)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn degree(&self) -> usize {
        self.perms.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn permutations(&self) -> &[Vec<u32>] {
        &self.perms
    }

    /// Order of the cyclic symmetry used by the dense solver (1 if none).
    pub fn block_count(&self) -> usize {
        self.left.as_ref().map_or(1, |l| l.order)
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.par_chunks_mut(CHUNK).enumerate().for_each(|(c, out)| {
            let base = c * CHUNK;
            for (k, o) in out.iter_mut().enumerate() {
                let v = base + k;
                *o = self.perms.iter().map(|p| x[p[v] as usize]).sum();
            }
        });
    }

    /// Writes `u v gen_index` lines, one per directed edge.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for v in 0..self.n {
            for (s, p) in self.perms.iter().enumerate() {
                writeln!(w, "{} {} {}", v, p[v], s)?;
            }
        }
        Ok(())
    }

    /// `max |(A A^T − A^T A)[v][w]|`, computed exactly from the
    /// permutations.
    pub fn normality_defect(&self) -> u64 {
        let inv: Vec<Vec<u32>> = self.perms.iter().map(|p| invert(p)).collect();
        (0..self.n)
            .into_par_iter()
            .map(|v| {
                // (A A^T)[v][w] = #{(s,t) : v·s = w·t};  (A^T A)[v][w] = #{(s,t) : v·s⁻¹·t = w}
                let mut counts: HashMap<u32, i64> = HashMap::new();
                for p in &self.perms {
                    let u = p[v] as usize;
                    for q in &inv {
                        *counts.entry(q[u]).or_default() += 1;
                    }
                }
                for q in &inv {
                    let u = q[v] as usize;
                    for p in &self.perms {
                        *counts.entry(p[u]).or_default() -= 1;
                    }
                }
                counts.values().map(|c| c.unsigned_abs()).max().unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }
}

/// Edges `v → v·s`; vertices are the sorted group elements.
pub fn build_cayley(group: &FinGroup, gens: &[FinMat], field: &Field) -> Result<CayleyGraph> {
    let perms: Vec<Vec<u32>> = gens
        .par_iter()
        .map(|s| {
            group
                .elements
                .iter()
                .map(|x| {
                    let y = field.mat_mul_canonical(x, s);
                    group.index_of(&y).map(|k| k as u32)
                })
                .collect::<Option<Vec<u32>>>()
                .ok_or_else(|| Error::Invalid("generator does not preserve the group".into()))
        })
        .collect::<Result<_>>()?;
    let mut g = CayleyGraph::from_permutations(perms)?;
    g.vertices = group.elements.clone();
    if g.n <= DENSE_LIMIT {
        g.left = left_symmetry(group, field);
    }
    Ok(g)
}

/// Left multiplication by an element of maximal order.
fn left_symmetry(group: &FinGroup, field: &Field) -> Option<LeftSymmetry> {
    let (order, c) = group
        .elements
        .par_iter()
        .map(|x| (field.order(x), *x))
        .max_by_key(|&(o, x)| (o, std::cmp::Reverse(x)))?;
    if order < 2 {
        return None;
    }
    let perm = group
        .elements
        .iter()
        .map(|x| group.index_of(&field.mat_mul_canonical(&c, x)).map(|k| k as u32))
        .collect::<Option<Vec<u32>>>()?;
    Some(LeftSymmetry { perm, order: order as usize })
}

/// Matrices of `A` on the isotypic spaces of the cyclic symmetry.
pub fn dense_blocks<T: Real>(graph: &CayleyGraph) -> Result<Vec<Array2<Complex<T>>>> {
    let n = graph.n;
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge { n, limit: DENSE_LIMIT });
    }
    let (m, orbit) = match &graph.left {
        None => (1, (0..n).map(|v| (v, 0)).collect::<Vec<_>>()),
        Some(l) => {
            // orbit[v] = (r, k) with v = c^k · x_r
            let mut orbit = vec![(usize::MAX, 0); n];
            let mut reps = 0;
            for v in 0..n {
                if orbit[v].0 != usize::MAX {
                    continue;
                }
                let mut u = v;
                for k in 0..l.order {
                    orbit[u] = (reps, k);
                    u = l.perm[u] as usize;
                }
                debug_assert_eq!(u, v);
                reps += 1;
            }
            (l.order, orbit)
        }
    };
    let size = n / m;
    let mut reps = vec![0; size];
    for (v, &(r, k)) in orbit.iter().enumerate() {
        if k == 0 {
            reps[r] = v;
        }
    }
    let roots: Vec<Complex<T>> = (0..m)
        .map(|k| Complex::from_polar(T::one(), T::from_f64(std::f64::consts::TAU * k as f64 / m as f64).unwrap()))
        .collect();
    Ok((0..m)
        .into_par_iter()
        .map(|j| {
            let mut b = Array2::<Complex<T>>::zeros((size, size));
            for (t, &x) in reps.iter().enumerate() {
                for p in &graph.perms {
                    let (r, k) = orbit[p[x] as usize];
                    b[[t, r]] = b[[t, r]] + roots[(j * k) % m];
                }
            }
            b
        })
        .collect())
}

/// Full spectrum of `A` (LAPACK `heev` for symmetric graphs, `geev`
/// otherwise). Cayley operators here are normal, so the computed
/// eigenvalues are accurate to machine precision times `‖A‖`.
pub fn spectrum_dense<T>(graph: &CayleyGraph) -> Result<Vec<Complex<T>>>
where
    T: Real,
    Complex<T>: Lapack<Real = T, Complex = Complex<T>>,
{
    let blocks = dense_blocks::<T>(graph)?;
    let symmetric = graph.symmetric;
    let parts: Vec<Result<Vec<Complex<T>>>> = blocks
        .into_par_iter()
        .map(|b| {
            let fail = |e: ndarray_linalg::error::LinalgError| Error::NoConvergence(e.to_string());
            if symmetric {
                let e = b.eigvalsh(UPLO::Lower).map_err(fail)?;
                Ok(e.iter().map(|&x| Complex::new(x, T::zero())).collect())
            } else {
                Ok(b.eigvals().map_err(fail)?.to_vec())
            }
        })
        .collect();
    let mut out = Vec::with_capacity(graph.n);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

// -- deltoid ---------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltoidVerdict {
    pub inside: bool,
    /// `max | |r| − 1 |` over the roots of the characteristic cubic.
    pub root_deviation: f64,
    /// Distance from `z` to the boundary curve `p(2e^{it} + e^{−2it})`,
    /// computed only when the root test alone rejects `z`.
    pub boundary_distance: Option<f64>,
}

/// Roots of a monic complex cubic `X³ + c2 X² + c1 X + c0`.
pub fn cubic_roots(c2: Complex<f64>, c1: Complex<f64>, c0: Complex<f64>) -> [Complex<f64>; 3] {
    let f = |x: Complex<f64>| ((x + c2) * x + c1) * x + c0;
    let scale = 1.0 + c2.norm().max(c1.norm()).max(c0.norm());
    let seed = Complex::new(0.4, 0.9);
    let mut r = [seed * scale, seed * seed * scale, seed * seed * seed * scale];
    // Durand–Kerner
    for _ in 0..500 {
        let mut delta: f64 = 0.0;
        for i in 0..3 {
            let mut den = Complex::new(1.0, 0.0);
            for j in 0..3 {
                if i != j {
                    den *= r[i] - r[j];
                }
            }
            if den.norm() == 0.0 {
                den = Complex::new(f64::EPSILON, 0.0);
            }
            let step = f(r[i]) / den;
            r[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta <= 1e-15 * scale {
            break;
        }
    }
    r
}

fn boundary_point(p: f64, t: f64) -> Complex<f64> {
    Complex::from_polar(2.0 * p, t) + Complex::from_polar(p, -2.0 * t)
}

/// Distance from `z` to the boundary of the deltoid `p·{α+β+\overline{αβ}}`.
pub fn deltoid_boundary_distance(z: Complex<f64>, p: f64) -> f64 {
    let d = |t: f64| (z - boundary_point(p, t)).norm();
    let samples = 720;
    let h = std::f64::consts::TAU / samples as f64;
    let best = (0..samples)
        .map(|k| k as f64 * h)
        .min_by(|a, b| d(*a).total_cmp(&d(*b)))
        .unwrap();
    let (mut lo, mut hi) = (best - h, best + h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if d(a) < d(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    d(0.5 * (lo + hi)).min(d(best))
}

/// Is `z` in `{p(α+β+\overline{αβ}) : |α| = |β| = 1}`?
///
/// `z/p = α+β+γ` with `αβγ = 1` makes `α, β, γ` the roots of
/// `X³ − (z/p)X² + (z̄/p)X − 1`; `z` is inside iff they are unimodular.
/// Near the boundary the roots coalesce and lose half their digits, so a
/// point within `tol` of the boundary curve is accepted as well.
pub fn deltoid_test(z: Complex<f64>, p: f64, tol: f64) -> DeltoidVerdict {
    let a = z / p;
    let roots = cubic_roots(-a, a.conj(), Complex::new(-1.0, 0.0));
    let root_deviation = roots.iter().map(|r| (r.norm() - 1.0).abs()).fold(0.0, f64::max);
    let boundary_distance = (root_deviation > tol).then(|| deltoid_boundary_distance(z, p));
    DeltoidVerdict {
        inside: root_deviation <= tol || boundary_distance.is_some_and(|d| d <= tol),
        root_deviation,
        boundary_distance,
    }
}

// -- Ramanujan verdicts ----------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RamanujanMode {
    /// `A₁` for split `p`: nontrivial spectrum in the deltoid.
    Split,
    /// `A` for inert `p`: nontrivial spectrum in `[−2p²+p−1, 2p²+p−1]`.
    Inert,
    /// Symmetric `A` against a modulus bound (the full split set: `6p`).
    Symmetric,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub mode: RamanujanMode,
    pub p: u64,
    pub vertices: usize,
    pub degree: usize,
    pub tolerance: f64,
    pub eigenvalue_count: usize,
    /// `[re, im]` pairs.
    pub eigenvalues: Vec<[f64; 2]>,
    pub trivial: Vec<[f64; 2]>,
    /// Eigenvalues near `−(p³+1)` in inert mode; reported, not judged.
    pub zero_class: Vec<f64>,
    pub nontrivial_max_modulus: f64,
    pub nontrivial_min_re: f64,
    pub nontrivial_max_re: f64,
    pub bound: String,
    /// Nontrivial eigenvalues accepted only by their distance to the
    /// deltoid boundary (coalescing roots).
    pub boundary_accepted: usize,
    pub failures: Vec<[f64; 2]>,
    pub pass: bool,
}

/// Classifies every eigenvalue as trivial or not and tests the nontrivial
/// ones. `tripartite` admits the trivial value times cube roots of unity.
pub fn ramanujan_check(
    eigs: &[Complex<f64>],
    p: u64,
    degree: usize,
    mode: RamanujanMode,
    tripartite: bool,
    tol: f64,
) -> SpectrumReport {
    let pf = p as f64;
    let d = degree as f64;
    let near = |z: Complex<f64>, w: Complex<f64>| (z - w).norm() <= tol * d.max(1.0);
    let phases: Vec<Complex<f64>> = if tripartite {
        (0..3).map(|k| Complex::from_polar(1.0, std::f64::consts::TAU * k as f64 / 3.0)).collect()
    } else {
        vec![Complex::new(1.0, 0.0)]
    };
    let (bound, lo, hi) = match mode {
        RamanujanMode::Split => (format!("deltoid {p}(α+β+conj(αβ))"), f64::NAN, f64::NAN),
        RamanujanMode::Inert => {
            let (lo, hi) = (-2.0 * pf * pf + pf - 1.0, 2.0 * pf * pf + pf - 1.0);
            (format!("[{lo}, {hi}]"), lo, hi)
        }
        RamanujanMode::Symmetric => (format!("|λ| <= {}", 6 * p), -6.0 * pf, 6.0 * pf),
    };
    let zero = -(pf.powi(3) + 1.0);
    let mut report = SpectrumReport {
        mode,
        p,
        vertices: 0,
        degree,
        tolerance: tol,
        eigenvalue_count: eigs.len(),
        eigenvalues: Vec::new(),
        trivial: Vec::new(),
        zero_class: Vec::new(),
        nontrivial_max_modulus: 0.0,
        nontrivial_min_re: f64::INFINITY,
        nontrivial_max_re: f64::NEG_INFINITY,
        bound,
        boundary_accepted: 0,
        failures: Vec::new(),
        pass: true,
    };
    for &z in eigs {
        if phases.iter().any(|&w| near(z, w * d)) {
            report.trivial.push([z.re, z.im]);
            continue;
        }
        if mode == RamanujanMode::Inert && (z.re - zero).abs() <= tol * d {
            report.zero_class.push(z.re);
            continue;
        }
        report.nontrivial_max_modulus = report.nontrivial_max_modulus.max(z.norm());
        report.nontrivial_min_re = report.nontrivial_min_re.min(z.re);
        report.nontrivial_max_re = report.nontrivial_max_re.max(z.re);
        let ok = match mode {
            RamanujanMode::Split => {
                let v = deltoid_test(z, pf, tol);
                if v.inside && v.root_deviation > tol {
                    report.boundary_accepted += 1;
                }
                v.inside
            }
            _ => z.im.abs() <= tol && z.re >= lo - tol && z.re <= hi + tol,
        };
        if !ok {
            report.failures.push([z.re, z.im]);
        }
    }
    report.pass = report.failures.is_empty();
    report
}

// -- Lanczos ---------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct ExtremalOptions {
    /// Number of distinct extremal values wanted at each end.
    pub k: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    /// Work orthogonally to the constant vector (removes the degree).
    pub deflate_constant: bool,
}

impl Default for ExtremalOptions {
    fn default() -> Self {
        Self { k: 3, max_iter: 3000, tol: 1e-6, seed: 1, deflate_constant: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RitzPair {
    pub value: f64,
    /// `‖A x − θ x‖ / ‖x‖` for the assembled Ritz vector.
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtremalSpectrum {
    /// Descending.
    pub largest: Vec<RitzPair>,
    /// Ascending.
    pub smallest: Vec<RitzPair>,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    let parts: Vec<f64> = x
        .par_chunks(CHUNK)
        .zip(y.par_chunks(CHUNK))
        .map(|(a, b)| a.iter().zip(b).map(|(u, v)| u * v).sum())
        .collect();
    parts.iter().sum()
}

fn remove_mean(x: &mut [f64]) {
    let parts: Vec<f64> = x.par_chunks(CHUNK).map(|c| c.iter().sum()).collect();
    let mean = parts.iter().sum::<f64>() / x.len() as f64;
    x.par_iter_mut().for_each(|v| *v -= mean);
}

/// Number of eigenvalues of the tridiagonal `(a, b)` below `x`.
fn sturm_count(a: &[f64], b: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..a.len() {
        let off = if i == 0 { 0.0 } else { b[i - 1] * b[i - 1] / d };
        d = a[i] - x - off;
        if d == 0.0 {
            d = -f64::EPSILON * (1.0 + x.abs());
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `idx`-th smallest eigenvalue (0-based) by bisection.
fn tridiag_eigenvalue(a: &[f64], b: &[f64], idx: usize) -> f64 {
    let m = a.len();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..m {
        let r = if i > 0 { b[i - 1].abs() } else { 0.0 } + if i + 1 < m { b[i].abs() } else { 0.0 };
        lo = lo.min(a[i] - r);
        hi = hi.max(a[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(a, b, mid) > idx {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Eigenvector of the tridiagonal for the eigenvalue `theta` by inverse
/// iteration (tridiagonal Gaussian elimination with partial pivoting).
fn tridiag_eigenvector(a: &[f64], b: &[f64], theta: f64) -> Vec<f64> {
    let m = a.len();
    let scale = a.iter().chain(b).fold(1.0f64, |s, x| s.max(x.abs()));
    let tiny = f64::EPSILON * scale;
    let mut y: Vec<f64> = (0..m).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
    for _ in 0..3 {
        let mut u = vec![[0.0f64; 3]; m];
        let mut rhs = vec![0.0; m];
        let mut cur = [a[0] - theta, if m > 1 { b[0] } else { 0.0 }, 0.0];
        let mut rcur = y[0];
        for i in 0..m {
            if i + 1 == m {
                u[i] = cur;
                rhs[i] = rcur;
                break;
            }
            let next = [b[i], a[i + 1] - theta, if i + 2 < m { b[i + 1] } else { 0.0 }];
            let rnext = y[i + 1];
            let (mut piv, other, rp, ro) =
                if cur[0].abs() >= next[0].abs() { (cur, next, rcur, rnext) } else { (next, cur, rnext, rcur) };
            if piv[0].abs() < tiny {
                piv[0] = tiny;
            }
            let f = other[0] / piv[0];
            u[i] = piv;
            rhs[i] = rp;
            cur = [other[1] - f * piv[1], other[2] - f * piv[2], 0.0];
            rcur = ro - f * rp;
        }
        let mut x = vec![0.0; m];
        for i in (0..m).rev() {
            let mut s = rhs[i];
            if i + 1 < m {
                s -= u[i][1] * x[i + 1];
            }
            if i + 2 < m {
                s -= u[i][2] * x[i + 2];
            }
            let d = if u[i][0].abs() < tiny { tiny } else { u[i][0] };
            x[i] = s / d;
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        y = x.into_iter().map(|v| v / norm).collect();
    }
    y
}

/// Distinct extremal eigenvalues of the tridiagonal, with Paige's residual
/// estimates `β_m |y_m|`.
fn extremes(a: &[f64], b: &[f64], beta_last: f64, k: usize, merge: f64) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let m = a.len();
    let pick = |order: &mut dyn Iterator<Item = usize>| {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for idx in order {
            let theta = tridiag_eigenvalue(a, b, idx);
            if out.iter().any(|&(t, _)| (t - theta).abs() <= merge) {
                continue;
            }
            let y = tridiag_eigenvector(a, b, theta);
            out.push((theta, (beta_last * y[m - 1]).abs()));
            if out.len() == k {
                break;
            }
        }
        out
    };
    let lim = (4 * k).min(m);
    let top = pick(&mut (0..m).rev().take(lim));
    let bottom = pick(&mut (0..m).take(lim));
    (top, bottom)
}

fn start_vector(n: usize, seed: u64, deflate: bool) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    if deflate {
        remove_mean(&mut q);
    }
    let norm = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|v| *v /= norm);
    q
}

/// One Lanczos step: returns `(α, β)` and leaves the new vector in `w`.
fn lanczos_step(graph: &CayleyGraph, q: &[f64], q_prev: &[f64], beta_prev: f64, w: &mut [f64], deflate: bool) -> (f64, f64) {
    graph.apply(q, w);
    if deflate {
        remove_mean(w);
    }
    let alpha = dot(w, q);
    w.par_iter_mut()
        .zip(q.par_iter().zip(q_prev.par_iter()))
        .for_each(|(x, (a, b))| *x -= alpha * a + beta_prev * b);
    (alpha, dot(w, w).sqrt())
}

/// Extremal eigenvalues of a symmetric graph by Lanczos without
/// reorthogonalisation. Ghost copies of converged values are merged, and
/// residuals are measured on Ritz vectors rebuilt in a second pass.
pub fn extremal_sparse(graph: &CayleyGraph, opts: &ExtremalOptions) -> Result<ExtremalSpectrum> {
    if !graph.symmetric {
        return Err(Error::Invalid("the iterative solver needs a symmetric generator set".into()));
    }
    let n = graph.n;
    if n < 2 || opts.k == 0 {
        return Err(Error::Invalid("graph too small for the iterative solver".into()));
    }
    let scale = graph.degree().max(1) as f64;
    let merge = opts.tol * scale;
    let max_iter = opts.max_iter.min(n);
    let mut q = start_vector(n, opts.seed, opts.deflate_constant);
    let mut q_prev = vec![0.0; n];
    let mut w = vec![0.0; n];
    let (mut alphas, mut betas) = (Vec::new(), Vec::new());
    let mut beta_prev = 0.0;
    let check_every = 50;
    let mut ends;
    loop {
        let (alpha, beta) = lanczos_step(graph, &q, &q_prev, beta_prev, &mut w, opts.deflate_constant);
        alphas.push(alpha);
        let j = alphas.len();
        let breakdown = beta <= 1e-12 * scale;
        if j % check_every == 0 || j == max_iter || breakdown {
            ends = extremes(&alphas, &betas, beta, opts.k, merge);
            let done = ends.0.iter().chain(&ends.1).all(|&(_, r)| r <= opts.tol);
            if done || j == max_iter || breakdown {
                break;
            }
        }
        betas.push(beta);
        beta_prev = beta;
        std::mem::swap(&mut q_prev, &mut q);
        std::mem::swap(&mut q, &mut w);
        q.par_iter_mut().for_each(|v| *v /= beta);
    }
    let m = alphas.len();
    let (top, bottom) = ends;
    let targets: Vec<f64> = top.iter().chain(&bottom).map(|&(t, _)| t).collect();
    let coeffs: Vec<Vec<f64>> = targets.iter().map(|&t| tridiag_eigenvector(&alphas, &betas, t)).collect();

    // second pass: regenerate the basis and assemble Ritz vectors
    let mut ritz = vec![vec![0.0; n]; targets.len()];
    let mut q = start_vector(n, opts.seed, opts.deflate_constant);
    let mut q_prev = vec![0.0; n];
    let mut beta_prev = 0.0;
    for j in 0..m {
        for (x, y) in ritz.iter_mut().zip(&coeffs) {
            let c = y[j];
            x.par_iter_mut().zip(q.par_iter()).for_each(|(a, b)| *a += c * b);
        }
        if j + 1 == m {
            break;
        }
        lanczos_step(graph, &q, &q_prev, beta_prev, &mut w, opts.deflate_constant);
        let beta = betas[j];
        beta_prev = beta;
        std::mem::swap(&mut q_prev, &mut q);
        std::mem::swap(&mut q, &mut w);
        q.par_iter_mut().for_each(|v| *v /= beta);
    }
    let residuals: Vec<f64> = ritz
        .iter()
        .zip(&targets)
        .map(|(x, &t)| {
            let mut ax = vec![0.0; n];
            graph.apply(x, &mut ax);
            ax.par_iter_mut().zip(x.par_iter()).for_each(|(a, b)| *a -= t * b);
            (dot(&ax, &ax) / dot(x, x)).sqrt()
        })
        .collect();
    let pairs: Vec<RitzPair> =
        targets.iter().zip(&residuals).map(|(&value, &residual)| RitzPair { value, residual }).collect();
    let (largest, smallest) = pairs.split_at(top.len());
    Ok(ExtremalSpectrum {
        converged: pairs.iter().all(|r| r.residual <= opts.tol),
        largest: largest.to_vec(),
        smallest: smallest.to_vec(),
        iterations: m,
    })
}
