//! Floating-point models of the direction operad `Bₙ`, its framed version
//! and the labelled cosimplicial object, with a seeded property harness.
//!
//! A point of `Bₙ(k)` is one unit vector per pair `i < j`, read as the
//! direction from point `j` to point `i`: `θᵢⱼ(x) = (xᵢ − xⱼ)/|xᵢ − xⱼ|`.
//! Composition `α ∘ₜ β` substitutes the infinitesimal configuration `β`
//! for point `t`:
//!
//! | pair `(i, j)`, `i < j`        | entry                 |
//! |-------------------------------|-----------------------|
//! | `j ≤ t`                       | `α(i, j)`             |
//! | `t ≤ i`, `j < t+l`            | `β(i−t+1, j−t+1)`     |
//! | `t+l ≤ i`                     | `α(i−l+1, j−l+1)`     |
//! | `i < t ≤ j < t+l`             | `α(i, t)`             |
//! | `t ≤ i < t+l ≤ j`             | `α(t, j−l+1)`         |
//! | `i < t`, `t+l ≤ j`            | `α(i, j−l+1)`         |
//!
//! With `l = 0` the composition forgets point `t`.
//!
//! The basepoint `m_k` has every entry equal to `eₙ`, the last standard
//! basis vector. Cofaces of the labelled object insert the new point
//! created by `d⁰` first and the one created by `d^{k+1}` last, the pairing
//! under which the cosimplicial identities hold.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checks::{CheckResult, SuiteReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("slot {slot} out of range for arity {arity}")]
    SlotOutOfRange { slot: usize, arity: usize },
    #[error("index {index} out of range at arity {arity}")]
    IndexOutOfRange { index: usize, arity: usize },
    #[error("points {i} and {j} are closer than the minimum separation ({dist:e})")]
    Degenerate { i: usize, j: usize, dist: f64 },
    #[error("vector has norm {0}, not 1")]
    NotUnit(f64),
    #[error("matrix is not a rotation (residual {0:e})")]
    NotRotation(f64),
    #[error("rotation does not fix the preferred direction (residual {0:e})")]
    MovesAxis(f64),
    #[error("dimension {found} where {expected} was expected")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("arity {found} where {expected} was expected")]
    ArityMismatch { expected: usize, found: usize },
    #[error("not a permutation of 1..{0}")]
    NotAPermutation(usize),
    #[error("ambient dimension must be at least 2")]
    InvalidDimension,
}

/// Numerical tolerances of the geometric checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub unit: f64,
    pub rotation: f64,
    pub assoc: f64,
    /// Residual allowed on pure index shuffles.
    pub shuffle: f64,
    pub min_sep: f64,
    /// Allowed distance of the error ratio from 1/2.
    pub convergence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            unit: 1e-10,
            rotation: 1e-10,
            assoc: 1e-9,
            shuffle: 1e-12,
            min_sep: 1e-6,
            convergence: 0.1,
        }
    }
}

/// Position of the pair `(i, j)`, `1 ≤ i < j ≤ k`, in row-major order.
fn pair_index(k: usize, i: usize, j: usize) -> usize {
    debug_assert!(1 <= i && i < j && j <= k);
    (i - 1) * (2 * k - i) / 2 + (j - i - 1)
}

/// A point of `Bₙ(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionElement {
    n: usize,
    arity: usize,
    entries: Vec<DVector<f64>>,
}

impl DirectionElement {
    /// Builds from entries in the order `(1,2), (1,3), …, (k−1,k)`.
    pub fn new(n: usize, arity: usize, entries: Vec<DVector<f64>>, tol: f64) -> Result<Self, GeoError> {
        if n < 2 {
            return Err(GeoError::InvalidDimension);
        }
        let expected = arity * arity.saturating_sub(1) / 2;
        if entries.len() != expected {
            return Err(GeoError::ArityMismatch {
                expected,
                found: entries.len(),
            });
        }
        for v in &entries {
            if v.len() != n {
                return Err(GeoError::DimensionMismatch { expected: n, found: v.len() });
            }
            if (v.norm() - 1.0).abs() > tol {
                return Err(GeoError::NotUnit(v.norm()));
            }
        }
        Ok(DirectionElement { n, arity, entries })
    }

    /// The arity-1 unit.
    pub fn unit(n: usize) -> Self {
        DirectionElement {
            n,
            arity: 1,
            entries: Vec::new(),
        }
    }

    /// The basepoint `m_k`, every entry `eₙ`.
    pub fn basepoint(n: usize, k: usize) -> Self {
        DirectionElement {
            n,
            arity: k,
            entries: vec![preferred(n); k * k.saturating_sub(1) / 2],
        }
    }

    /// The arity-2 element with the single entry `v`.
    pub fn from_label(v: &DVector<f64>) -> Self {
        DirectionElement {
            n: v.len(),
            arity: 2,
            entries: vec![v.clone()],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Entry for `i < j` (1-based).
    pub fn get(&self, i: usize, j: usize) -> &DVector<f64> {
        &self.entries[pair_index(self.arity, i, j)]
    }

    pub fn entries(&self) -> &[DVector<f64>] {
        &self.entries
    }

    /// Largest Euclidean distance between corresponding entries.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.arity != other.arity {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Applies `g` to every entry.
    pub fn rotated(&self, g: &Rotation) -> Self {
        DirectionElement {
            n: self.n,
            arity: self.arity,
            entries: self.entries.iter().map(|v| &g.0 * v).collect(),
        }
    }

    /// `σ·α` with `(σ·α)(σ(i), σ(j)) = α(i, j)`; a pair whose order
    /// reverses picks up the antipode.
    pub fn permuted(&self, sigma: &[usize]) -> Result<Self, GeoError> {
        check_perm(sigma, self.arity)?;
        let k = self.arity;
        let mut inv = vec![0; k];
        for (i, &s) in sigma.iter().enumerate() {
            inv[s - 1] = i + 1;
        }
        let mut entries = Vec::with_capacity(self.entries.len());
        for a in 1..=k {
            for b in a + 1..=k {
                let (i, j) = (inv[a - 1], inv[b - 1]);
                entries.push(if i < j { self.get(i, j).clone() } else { -self.get(j, i) });
            }
        }
        Ok(DirectionElement {
            n: self.n,
            arity: k,
            entries,
        })
    }
}

fn check_perm(sigma: &[usize], k: usize) -> Result<(), GeoError> {
    let mut seen = vec![false; k];
    if sigma.len() != k {
        return Err(GeoError::NotAPermutation(k));
    }
    for &s in sigma {
        if s == 0 || s > k || seen[s - 1] {
            return Err(GeoError::NotAPermutation(k));
        }
        seen[s - 1] = true;
    }
    Ok(())
}

/// `eₙ`.
pub fn preferred(n: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[n - 1] = 1.0;
    v
}

/// Selects the composition formula; everything except `Correct` exists to
/// show that the checks detect errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CompositionVariant {
    #[default]
    Correct,
    /// Antipode in the `t ≤ i < t+l ≤ j` case.
    NegatedCase5,
    /// Treats `i < t`, `t+l ≤ j` like `i < t ≤ j < t+l`.
    MissingCase6,
}

pub fn compose_bn(alpha: &DirectionElement, t: usize, beta: &DirectionElement) -> Result<DirectionElement, GeoError> {
    compose_bn_variant(alpha, t, beta, CompositionVariant::Correct)
}

pub fn compose_bn_variant(
    alpha: &DirectionElement,
    t: usize,
    beta: &DirectionElement,
    variant: CompositionVariant,
) -> Result<DirectionElement, GeoError> {
    let (k, l) = (alpha.arity, beta.arity);
    if t == 0 || t > k {
        return Err(GeoError::SlotOutOfRange { slot: t, arity: k });
    }
    if alpha.n != beta.n {
        return Err(GeoError::DimensionMismatch {
            expected: alpha.n,
            found: beta.n,
        });
    }
    let m = k + l - 1;
    let mut entries = Vec::with_capacity(m * m.saturating_sub(1) / 2);
    if l == 0 {
        // forget point t
        let old = |a: usize| if a < t { a } else { a + 1 };
        for i in 1..=m {
            for j in i + 1..=m {
                entries.push(alpha.get(old(i), old(j)).clone());
            }
        }
    } else {
        for i in 1..=m {
            for j in i + 1..=m {
                let v = if j <= t {
                    alpha.get(i, j).clone()
                } else if t <= i && j < t + l {
                    beta.get(i - t + 1, j - t + 1).clone()
                } else if t + l <= i {
                    alpha.get(i - l + 1, j - l + 1).clone()
                } else if i < t && j < t + l {
                    alpha.get(i, t).clone()
                } else if t <= i {
                    match variant {
                        CompositionVariant::NegatedCase5 => -alpha.get(t, j - l + 1),
                        _ => alpha.get(t, j - l + 1).clone(),
                    }
                } else {
                    match variant {
                        CompositionVariant::MissingCase6 => alpha.get(i, t).clone(),
                        _ => alpha.get(i, j - l + 1).clone(),
                    }
                };
                entries.push(v);
            }
        }
    }
    Ok(DirectionElement {
        n: alpha.n,
        arity: m,
        entries,
    })
}

/// `k` distinct points of `ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    points: Vec<DVector<f64>>,
}

impl Configuration {
    pub fn new(points: Vec<DVector<f64>>, min_sep: f64) -> Result<Self, GeoError> {
        if let Some(n) = points.first().map(|p| p.len()) {
            if let Some(p) = points.iter().find(|p| p.len() != n) {
                return Err(GeoError::DimensionMismatch { expected: n, found: p.len() });
            }
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let dist = (&points[i] - &points[j]).norm();
                if dist < min_sep {
                    return Err(GeoError::Degenerate { i: i + 1, j: j + 1, dist });
                }
            }
        }
        Ok(Configuration { points })
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(σ·x)_{σ(i)} = x_i`.
    pub fn permuted(&self, sigma: &[usize]) -> Result<Self, GeoError> {
        check_perm(sigma, self.len())?;
        let mut points = self.points.clone();
        for (i, &s) in sigma.iter().enumerate() {
            points[s - 1] = self.points[i].clone();
        }
        Ok(Configuration { points })
    }
}

/// All pairwise directions of a configuration.
pub fn theta(c: &Configuration, n: usize, min_sep: f64) -> Result<DirectionElement, GeoError> {
    let k = c.len();
    let mut entries = Vec::with_capacity(k * k.saturating_sub(1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            let diff = &c.points[i] - &c.points[j];
            let dist = diff.norm();
            if dist < min_sep {
                return Err(GeoError::Degenerate { i: i + 1, j: j + 1, dist });
            }
            entries.push(diff / dist);
        }
    }
    Ok(DirectionElement { n, arity: k, entries })
}

/// Replaces point `t` of `x` by `x_t + ε(y_j − ȳ)`, `ȳ` the centroid of `y`.
pub fn insert(x: &Configuration, t: usize, y: &Configuration, eps: f64, min_sep: f64) -> Result<Configuration, GeoError> {
    if t == 0 || t > x.len() {
        return Err(GeoError::SlotOutOfRange { slot: t, arity: x.len() });
    }
    let mut points = Vec::with_capacity(x.len() + y.len() - 1);
    points.extend_from_slice(&x.points[..t - 1]);
    if !y.is_empty() {
        let centroid = y.points.iter().fold(DVector::zeros(y.points[0].len()), |a, p| a + p) / y.len() as f64;
        points.extend(y.points.iter().map(|p| &x.points[t - 1] + (p - &centroid) * eps));
    }
    points.extend_from_slice(&x.points[t..]);
    Configuration::new(points, min_sep)
}

/// An element of `SO(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation(DMatrix<f64>);

impl Rotation {
    pub fn new(m: DMatrix<f64>, tol: f64) -> Result<Self, GeoError> {
        let r = Rotation(m);
        let res = r.residual();
        if res > tol {
            return Err(GeoError::NotRotation(res));
        }
        Ok(r)
    }

    pub fn identity(n: usize) -> Self {
        Rotation(DMatrix::identity(n, n))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// `max(|gᵀg − 1|, |det g − 1|)`.
    pub fn residual(&self) -> f64 {
        let n = self.0.nrows();
        if self.0.ncols() != n {
            return f64::INFINITY;
        }
        let orth = (self.0.transpose() * &self.0 - DMatrix::identity(n, n)).abs().max();
        orth.max((self.0.determinant() - 1.0).abs())
    }

    pub fn compose(&self, other: &Rotation) -> Rotation {
        Rotation(&self.0 * &other.0)
    }

    /// `|g eₙ − eₙ|`.
    pub fn axis_residual(&self) -> f64 {
        let e = preferred(self.0.nrows());
        (&self.0 * &e - e).norm()
    }

    pub fn distance(&self, other: &Rotation) -> f64 {
        (&self.0 - &other.0).abs().max()
    }
}

/// A point of the framed operad: directions plus one rotation per input.
#[derive(Debug, Clone, PartialEq)]
pub struct FramedElement {
    pub directions: DirectionElement,
    pub frames: Vec<Rotation>,
}

impl FramedElement {
    pub fn new(directions: DirectionElement, frames: Vec<Rotation>) -> Result<Self, GeoError> {
        if frames.len() != directions.arity {
            return Err(GeoError::ArityMismatch {
                expected: directions.arity,
                found: frames.len(),
            });
        }
        Ok(FramedElement { directions, frames })
    }

    pub fn arity(&self) -> usize {
        self.directions.arity
    }

    pub fn distance(&self, other: &Self) -> f64 {
        if self.frames.len() != other.frames.len() {
            return f64::INFINITY;
        }
        self.frames
            .iter()
            .zip(&other.frames)
            .map(|(a, b)| a.distance(b))
            .fold(self.directions.distance(&other.directions), f64::max)
    }

    pub fn permuted(&self, sigma: &[usize]) -> Result<Self, GeoError> {
        let directions = self.directions.permuted(sigma)?;
        let mut frames = self.frames.clone();
        for (i, &s) in sigma.iter().enumerate() {
            frames[s - 1] = self.frames[i].clone();
        }
        Ok(FramedElement { directions, frames })
    }
}

/// `(p; g) ∘ᵢ (q; h) = (p ∘ᵢ gᵢ(q); g₁, …, gᵢh₁, …, gᵢh_m, …, g_k)`.
pub fn semidirect_compose(a: &FramedElement, i: usize, b: &FramedElement) -> Result<FramedElement, GeoError> {
    if i == 0 || i > a.arity() {
        return Err(GeoError::SlotOutOfRange { slot: i, arity: a.arity() });
    }
    let g = &a.frames[i - 1];
    let directions = compose_bn(&a.directions, i, &b.directions.rotated(g))?;
    let mut frames = Vec::with_capacity(a.arity() + b.arity() - 1);
    frames.extend_from_slice(&a.frames[..i - 1]);
    frames.extend(b.frames.iter().map(|h| g.compose(h)));
    frames.extend_from_slice(&a.frames[i..]);
    Ok(FramedElement { directions, frames })
}

/// `(g₁, …, g_k) ↦ (m_k; g₁, …, g_k)` for rotations fixing `eₙ`.
pub fn i_n(n: usize, frames: &[Rotation], tol: f64) -> Result<FramedElement, GeoError> {
    for g in frames {
        if g.0.nrows() != n {
            return Err(GeoError::DimensionMismatch {
                expected: n,
                found: g.0.nrows(),
            });
        }
        let r = g.axis_residual();
        if r > tol {
            return Err(GeoError::MovesAxis(r));
        }
    }
    Ok(FramedElement {
        directions: DirectionElement::basepoint(n, frames.len()),
        frames: frames.to_vec(),
    })
}

/// A point of `𝒦ₙ(k) × (Sⁿ⁻¹)ᵏ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledElement {
    pub directions: DirectionElement,
    pub labels: Vec<DVector<f64>>,
}

impl LabeledElement {
    pub fn new(directions: DirectionElement, labels: Vec<DVector<f64>>, tol: f64) -> Result<Self, GeoError> {
        if labels.len() != directions.arity {
            return Err(GeoError::ArityMismatch {
                expected: directions.arity,
                found: labels.len(),
            });
        }
        for v in &labels {
            if (v.norm() - 1.0).abs() > tol {
                return Err(GeoError::NotUnit(v.norm()));
            }
        }
        Ok(LabeledElement { directions, labels })
    }

    pub fn arity(&self) -> usize {
        self.directions.arity
    }

    pub fn distance(&self, other: &Self) -> f64 {
        if self.labels.len() != other.labels.len() {
            return f64::INFINITY;
        }
        self.labels
            .iter()
            .zip(&other.labels)
            .map(|(a, b)| (a - b).norm())
            .fold(self.directions.distance(&other.directions), f64::max)
    }
}

/// `dⁱ`, `0 ≤ i ≤ k+1`: doubles point `i` in its labelled direction, or
/// adds a point labelled `eₙ` in front (`i = 0`) or at the end.
pub fn labeled_coface(i: usize, e: &LabeledElement) -> Result<LabeledElement, GeoError> {
    let k = e.arity();
    let n = e.directions.n;
    if i > k + 1 {
        return Err(GeoError::IndexOutOfRange { index: i, arity: k });
    }
    let m2 = DirectionElement::basepoint(n, 2);
    let mut labels = Vec::with_capacity(k + 1);
    let directions = if i == 0 {
        labels.push(preferred(n));
        labels.extend_from_slice(&e.labels);
        compose_bn(&m2, 2, &e.directions)?
    } else if i == k + 1 {
        labels.extend_from_slice(&e.labels);
        labels.push(preferred(n));
        compose_bn(&m2, 1, &e.directions)?
    } else {
        let v = &e.labels[i - 1];
        labels.extend_from_slice(&e.labels[..i]);
        labels.push(v.clone());
        labels.extend_from_slice(&e.labels[i..]);
        compose_bn(&e.directions, i, &DirectionElement::from_label(v))?
    };
    Ok(LabeledElement { directions, labels })
}

/// `sⁱ`, `1 ≤ i ≤ k`: forgets point `i` and its label.
pub fn labeled_codegeneracy(i: usize, e: &LabeledElement) -> Result<LabeledElement, GeoError> {
    let k = e.arity();
    if i == 0 || i > k {
        return Err(GeoError::IndexOutOfRange { index: i, arity: k });
    }
    let empty = DirectionElement {
        n: e.directions.n,
        arity: 0,
        entries: Vec::new(),
    };
    let mut labels = e.labels.clone();
    labels.remove(i - 1);
    Ok(LabeledElement {
        directions: compose_bn(&e.directions, i, &empty)?,
        labels,
    })
}

/// A uniformly random unit vector.
pub fn random_unit(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-3 {
            return v / norm;
        }
    }
}

pub fn random_direction(rng: &mut impl Rng, n: usize, k: usize) -> DirectionElement {
    DirectionElement {
        n,
        arity: k,
        entries: (0..k * k.saturating_sub(1) / 2).map(|_| random_unit(rng, n)).collect(),
    }
}

/// Points in `[−1, 1]ⁿ` pairwise at least `spacing` apart.
pub fn random_configuration(rng: &mut impl Rng, n: usize, k: usize, spacing: f64) -> Configuration {
    let mut points: Vec<DVector<f64>> = Vec::with_capacity(k);
    while points.len() < k {
        let p = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        if points.iter().all(|q| (q - &p).norm() >= spacing) {
            points.push(p);
        }
    }
    Configuration { points }
}

/// A random rotation from the QR factorisation of a Gaussian matrix.
pub fn random_rotation(rng: &mut impl Rng, n: usize) -> Rotation {
    let a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = a.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    Rotation(q)
}

/// A random rotation of the first `n−1` coordinates.
pub fn random_axis_rotation(rng: &mut impl Rng, n: usize) -> Rotation {
    let small = random_rotation(rng, n - 1);
    let mut m = DMatrix::identity(n, n);
    m.view_mut((0, 0), (n - 1, n - 1)).copy_from(&small.0);
    Rotation(m)
}

fn random_perm(rng: &mut impl Rng, k: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (1..=k).collect();
    for i in (1..k).rev() {
        let j = rng.random_range(0..=i);
        p.swap(i, j);
    }
    p
}

/// `σ ∘ᵢ id_l`: the block permutation moving the `l` inputs of slot `i`
/// together.
fn block_perm(sigma: &[usize], i: usize, l: usize) -> Vec<usize> {
    let k = sigma.len();
    let si = sigma[i - 1];
    let mut out = Vec::with_capacity(k + l - 1);
    for a in 1..=k {
        let start = 1 + (1..sigma[a - 1]).map(|b| if b == si { l } else { 1 }).sum::<usize>();
        if a == i {
            out.extend(start..start + l);
        } else {
            out.push(start);
        }
    }
    out
}

/// `id_k ∘ᵢ τ`.
fn inner_perm(k: usize, i: usize, tau: &[usize]) -> Vec<usize> {
    let l = tau.len();
    let mut out = Vec::with_capacity(k + l - 1);
    for a in 1..=k {
        if a == i {
            out.extend(tau.iter().map(|t| t + i - 1));
        } else if a < i {
            out.push(a);
        } else {
            out.push(a + l - 1);
        }
    }
    out
}

/// Maximum residual of each check over one shard of samples.
#[derive(Debug, Clone, Default)]
struct ShardResult {
    residuals: Vec<(String, f64)>,
}

impl ShardResult {
    fn record(&mut self, name: &str, r: f64) {
        match self.residuals.iter_mut().find(|(n, _)| n == name) {
            Some((_, v)) => *v = v.max(r),
            None => self.residuals.push((name.to_string(), r)),
        }
    }
}

const SHARDS: u64 = 16;

/// Runs the randomized checks for one `n` and returns one record per check.
///
/// Samples are split over a fixed number of shards, each with its own ChaCha
/// stream, so the report does not depend on the number of worker threads.
pub fn property_suite(n: usize, samples: usize, seed: u64, tol: &Tolerances) -> Result<SuiteReport, GeoError> {
    property_suite_variant(n, samples, seed, tol, CompositionVariant::Correct)
}

pub fn property_suite_variant(
    n: usize,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
    variant: CompositionVariant,
) -> Result<SuiteReport, GeoError> {
    if n < 2 {
        return Err(GeoError::InvalidDimension);
    }
    let mut report = SuiteReport::default();
    if samples == 0 {
        return Ok(report);
    }
    let shards: Vec<ShardResult> = (0..SHARDS)
        .into_par_iter()
        .map(|s| {
            let count = samples / SHARDS as usize + usize::from((s as usize) < samples % SHARDS as usize);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s);
            let mut out = ShardResult::default();
            for _ in 0..count {
                sample_once(&mut rng, n, tol, variant, &mut out)?;
            }
            Ok(out)
        })
        .collect::<Result<_, GeoError>>()?;
    let spec: [(&str, f64); 14] = [
        ("bn_unit", tol.shuffle),
        ("bn_associativity_sequential", tol.shuffle),
        ("bn_associativity_parallel", tol.shuffle),
        ("bn_equivariance", tol.shuffle),
        ("theta_equivariance", tol.shuffle),
        ("theta_entries_unit", tol.unit),
        ("framed_unit", tol.assoc),
        ("framed_associativity_sequential", tol.assoc),
        ("framed_associativity_parallel", tol.assoc),
        ("framed_equivariance", tol.assoc),
        ("rotations_orthogonal", tol.rotation),
        ("labeled_cosimplicial_identities", tol.shuffle),
        ("i_n_operad_map", tol.assoc),
        ("insertion_oracle_convergence", tol.convergence),
    ];
    for (name, t) in spec {
        let r = shards
            .iter()
            .flat_map(|s| s.residuals.iter())
            .filter(|(k, _)| k == name)
            .map(|(_, v)| *v)
            .fold(0.0, f64::max);
        report.push(CheckResult::numeric(name, samples, r, t));
    }
    Ok(report)
}

fn sample_once(
    rng: &mut ChaCha8Rng,
    n: usize,
    tol: &Tolerances,
    variant: CompositionVariant,
    out: &mut ShardResult,
) -> Result<(), GeoError> {
    let comp = |a: &DirectionElement, t: usize, b: &DirectionElement| compose_bn_variant(a, t, b, variant);
    let k = rng.random_range(1..=5);
    let l = rng.random_range(0..=4);
    let m = rng.random_range(0..=3);
    let (x, y, z) = (random_direction(rng, n, k), random_direction(rng, n, l), random_direction(rng, n, m));
    let u = DirectionElement::unit(n);

    // unit
    let mut r: f64 = 0.0;
    for t in 1..=k {
        r = r.max(comp(&x, t, &u)?.distance(&x));
    }
    r = r.max(comp(&u, 1, &x)?.distance(&x));
    out.record("bn_unit", r);

    // (x∘ᵢy)∘_{i+j−1}z = x∘ᵢ(y∘ⱼz)
    let i = rng.random_range(1..=k);
    if l >= 1 {
        let j = rng.random_range(1..=l);
        let lhs = comp(&comp(&x, i, &y)?, i + j - 1, &z)?;
        let rhs = comp(&x, i, &comp(&y, j, &z)?)?;
        out.record("bn_associativity_sequential", lhs.distance(&rhs));
    }
    // (x∘ᵢy)∘_{j+l−1}z = (x∘ⱼz)∘ᵢy, i < j
    if k >= 2 {
        let i = rng.random_range(1..k);
        let j = rng.random_range(i + 1..=k);
        let lhs = comp(&comp(&x, i, &y)?, j + l - 1, &z)?;
        let rhs = comp(&comp(&x, j, &z)?, i, &y)?;
        out.record("bn_associativity_parallel", lhs.distance(&rhs));
    }

    // (σ·x)∘_{σ(i)}(τ·y) = (σ∘ᵢτ)·(x∘ᵢy)
    let sigma = random_perm(rng, k);
    let tau = random_perm(rng, l);
    let lhs = comp(&x.permuted(&sigma)?, sigma[i - 1], &y.permuted(&tau)?)?;
    let perm = compose_perms(&block_perm(&sigma, i, l), &inner_perm(k, i, &tau));
    let rhs = comp(&x, i, &y)?.permuted(&perm)?;
    out.record("bn_equivariance", lhs.distance(&rhs));

    // θ(σ·c) = σ·θ(c)
    let c = random_configuration(rng, n, k, 0.05);
    let lhs = theta(&c.permuted(&sigma)?, n, tol.min_sep)?;
    let th = theta(&c, n, tol.min_sep)?;
    out.record("theta_equivariance", lhs.distance(&th.permuted(&sigma)?));
    out.record(
        "theta_entries_unit",
        th.entries.iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max),
    );

    // framed operad
    let fx = FramedElement::new(x.clone(), (0..k).map(|_| random_rotation(rng, n)).collect())?;
    let fy = FramedElement::new(y.clone(), (0..l).map(|_| random_rotation(rng, n)).collect())?;
    let fz = FramedElement::new(z.clone(), (0..m).map(|_| random_rotation(rng, n)).collect())?;
    let fu = FramedElement::new(u.clone(), vec![Rotation::identity(n)])?;
    let mut r: f64 = 0.0;
    for t in 1..=k {
        r = r.max(semidirect_compose(&fx, t, &fu)?.distance(&fx));
    }
    r = r.max(semidirect_compose(&fu, 1, &fx)?.distance(&fx));
    out.record("framed_unit", r);
    out.record(
        "rotations_orthogonal",
        fx.frames.iter().map(Rotation::residual).fold(0.0, f64::max),
    );
    if l >= 1 {
        let j = rng.random_range(1..=l);
        let lhs = semidirect_compose(&semidirect_compose(&fx, i, &fy)?, i + j - 1, &fz)?;
        let rhs = semidirect_compose(&fx, i, &semidirect_compose(&fy, j, &fz)?)?;
        out.record("framed_associativity_sequential", lhs.distance(&rhs));
    }
    if k >= 2 {
        let i = rng.random_range(1..k);
        let j = rng.random_range(i + 1..=k);
        let lhs = semidirect_compose(&semidirect_compose(&fx, i, &fy)?, j + l - 1, &fz)?;
        let rhs = semidirect_compose(&semidirect_compose(&fx, j, &fz)?, i, &fy)?;
        out.record("framed_associativity_parallel", lhs.distance(&rhs));
    }
    let lhs = semidirect_compose(&fx.permuted(&sigma)?, sigma[i - 1], &fy.permuted(&tau)?)?;
    let rhs = semidirect_compose(&fx, i, &fy)?.permuted(&perm)?;
    out.record("framed_equivariance", lhs.distance(&rhs));

    // labelled cosimplicial identities
    let le = LabeledElement::new(x.clone(), (0..k).map(|_| random_unit(rng, n)).collect(), tol.unit)?;
    out.record("labeled_cosimplicial_identities", labeled_identity_residual(&le)?);

    // iₙ is an operad map
    let gs: Vec<Rotation> = (0..k).map(|_| random_axis_rotation(rng, n)).collect();
    let hs: Vec<Rotation> = (0..l).map(|_| random_axis_rotation(rng, n)).collect();
    let lhs = semidirect_compose(&i_n(n, &gs, tol.rotation)?, i, &i_n(n, &hs, tol.rotation)?)?;
    let mut merged = gs[..i - 1].to_vec();
    merged.extend(hs.iter().map(|h| gs[i - 1].compose(h)));
    merged.extend_from_slice(&gs[i..]);
    let rhs = i_n(n, &merged, tol.rotation)?;
    out.record("i_n_operad_map", lhs.distance(&rhs));

    // insertion oracle: first-order convergence
    let (ko, lo) = (rng.random_range(2..=4), rng.random_range(2..=4));
    let cx = random_configuration(rng, n, ko, 0.3);
    let cy = random_configuration(rng, n, lo, 0.3);
    let t = rng.random_range(1..=ko);
    let composed = comp(&theta(&cx, n, tol.min_sep)?, t, &theta(&cy, n, tol.min_sep)?)?;
    let err = |eps: f64| -> Result<f64, GeoError> {
        Ok(theta(&insert(&cx, t, &cy, eps, tol.min_sep)?, n, tol.min_sep)?.distance(&composed))
    };
    let (e1, e2) = (err(1e-3)?, err(5e-4)?);
    out.record("insertion_oracle_convergence", (e2 / e1 - 0.5).abs());
    Ok(())
}

/// `(σ·τ)(a) = σ(τ(a))`.
fn compose_perms(sigma: &[usize], tau: &[usize]) -> Vec<usize> {
    tau.iter().map(|&t| sigma[t - 1]).collect()
}

/// Largest residual of every cosimplicial identity starting at `e`.
pub fn labeled_identity_residual(e: &LabeledElement) -> Result<f64, GeoError> {
    let k = e.arity();
    let mut r: f64 = 0.0;
    for j in 1..=k + 2 {
        for i in 0..j {
            let lhs = labeled_coface(j, &labeled_coface(i, e)?)?;
            let rhs = labeled_coface(i, &labeled_coface(j - 1, e)?)?;
            r = r.max(lhs.distance(&rhs));
        }
    }
    for j in 1..=k + 1 {
        for i in 0..=k + 1 {
            let lhs = labeled_codegeneracy(j, &labeled_coface(i, e)?)?;
            let rhs = if i + 1 < j {
                labeled_coface(i, &labeled_codegeneracy(j - 1, e)?)?
            } else if i + 1 == j || i == j {
                e.clone()
            } else {
                labeled_coface(i - 1, &labeled_codegeneracy(j, e)?)?
            };
            r = r.max(lhs.distance(&rhs));
        }
    }
    for i in 1..k {
        for j in i..k {
            let lhs = labeled_codegeneracy(j, &labeled_codegeneracy(i, e)?)?;
            let rhs = labeled_codegeneracy(i, &labeled_codegeneracy(j + 1, e)?)?;
            r = r.max(lhs.distance(&rhs));
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    #[test]
    fn pair_indices_are_row_major() {
        let k = 4;
        let mut expected = 0;
        for i in 1..=k {
            for j in i + 1..=k {
                assert_eq!(pair_index(k, i, j), expected);
                expected += 1;
            }
        }
    }

    #[test]
    fn theta_examples() {
        let c = Configuration::new(vec![v(&[0.0, 0.0]), v(&[0.0, 1.0])], 1e-6).unwrap();
        let th = theta(&c, 2, 1e-6).unwrap();
        assert_eq!(th.get(1, 2), &v(&[0.0, -1.0]));
        let one = Configuration::new(vec![v(&[0.3, 0.1])], 1e-6).unwrap();
        assert!(theta(&one, 2, 1e-6).unwrap().entries().is_empty());
        // points descending along eₙ give the basepoint
        let line = Configuration::new((0..4).map(|i| v(&[0.0, 0.0, -(i as f64)])).collect(), 1e-6).unwrap();
        assert!(theta(&line, 3, 1e-6).unwrap().distance(&DirectionElement::basepoint(3, 4)) < 1e-15);
        let bad = Configuration::new(vec![v(&[0.0, 0.0]), v(&[0.0, 1e-9])], 1e-6);
        assert!(matches!(bad, Err(GeoError::Degenerate { .. })));
    }

    #[test]
    fn composition_example() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_direction(&mut rng, 3, 2);
        let b = random_direction(&mut rng, 3, 2);
        let c = compose_bn(&a, 2, &b).unwrap();
        assert_eq!(c.get(1, 2), a.get(1, 2));
        assert_eq!(c.get(1, 3), a.get(1, 2));
        assert_eq!(c.get(2, 3), b.get(1, 2));
        assert_eq!(compose_bn(&a, 1, &DirectionElement::unit(3)).unwrap(), a);
        assert!(matches!(compose_bn(&a, 3, &b), Err(GeoError::SlotOutOfRange { .. })));
    }

    #[test]
    fn labeled_coface_doubles_point() {
        let lab = v(&[0.6, 0.0, 0.8]);
        let e = LabeledElement::new(DirectionElement::unit(3), vec![lab.clone()], 1e-10).unwrap();
        let d = labeled_coface(1, &e).unwrap();
        assert_eq!(d.directions.get(1, 2), &lab);
        assert_eq!(d.labels, vec![lab.clone(), lab.clone()]);
        assert_eq!(labeled_codegeneracy(1, &d).unwrap(), e);
        assert_eq!(labeled_codegeneracy(2, &d).unwrap(), e);
        assert!(labeled_coface(3, &e).is_err());
    }

    #[test]
    fn i_n_examples() {
        let f = i_n(3, &[Rotation::identity(3), Rotation::identity(3)], 1e-10).unwrap();
        assert_eq!(f.directions, DirectionElement::basepoint(3, 2));
        assert_eq!(i_n(3, &[], 1e-10).unwrap().arity(), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_rotation(&mut rng, 3);
        assert!(matches!(i_n(3, &[g], 1e-10), Err(GeoError::MovesAxis(_))));
    }

    #[test]
    fn framed_with_identity_frames_reduces_to_bn() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_direction(&mut rng, 4, 3);
        let b = random_direction(&mut rng, 4, 2);
        let fa = FramedElement::new(a.clone(), vec![Rotation::identity(4); 3]).unwrap();
        let fb = FramedElement::new(b.clone(), vec![Rotation::identity(4); 2]).unwrap();
        let c = semidirect_compose(&fa, 2, &fb).unwrap();
        assert_eq!(c.directions, compose_bn(&a, 2, &b).unwrap());
        // arity-1 frame multiplies into slot i
        let g = random_rotation(&mut rng, 4);
        let fg = FramedElement::new(DirectionElement::unit(4), vec![g.clone()]).unwrap();
        let c = semidirect_compose(&fa, 2, &fg).unwrap();
        assert!(c.frames[1].distance(&g) < 1e-15);
    }

    #[test]
    fn suite_passes_and_is_deterministic() {
        let tol = Tolerances::default();
        let a = property_suite(4, 64, 7, &tol).unwrap();
        assert!(a.pass(), "{:?}", a.first_failure());
        let b = property_suite(4, 64, 7, &tol).unwrap();
        assert_eq!(a, b);
        assert!(property_suite(4, 0, 7, &tol).unwrap().checks.is_empty());
    }

    #[test]
    fn mutants_fail() {
        let tol = Tolerances::default();
        for variant in [CompositionVariant::NegatedCase5, CompositionVariant::MissingCase6] {
            let r = property_suite_variant(4, 64, 7, &tol, variant).unwrap();
            let assoc = r
                .checks
                .iter()
                .find(|c| c.check_name == "bn_associativity_sequential")
                .unwrap();
            assert!(!assoc.pass, "{variant:?}");
        }
    }
}
