//! First and second pages of the spectral sequence of a cosimplicial
//! object, with the Gerstenhaber operations on Hochschild classes and maps
//! induced by cosimplicial maps.
//!
//! Levels are already homology, so `E¹(p,q)` is the normalized level-`p`
//! space in internal degree `q` and `d¹ = Σ(−1)ⁱdⁱ`. `E²(p,q)` needs the
//! differential out of level `p`, so with level cutoff `P` the row `p = P`
//! is only an upper bound and is flagged partial.
//!
//! Classes keep an explicit normalized cycle as representative; brackets
//! and products are computed on representatives and reduced to E²
//! coordinates.

mod suite;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cosimplicial::{
    hochschild_object, inclusion_map, semidirect_object, Cell, CellBasis, CosimplicialError, CosimplicialMap,
    MapRule, NormalizedComplex, ObjectKind,
};
use crate::poisson_operad::{gerstenhaber_bracket, star, Convention, OperadElement, OperadError, SignVersion};
use crate::ratlin::{image_basis, kernel_basis, rat, LinAlgError, Rational, SpanSolver, SparseMatrix, SparseVector, SubspaceBasis};

pub use suite::{algebra_suite, gerstenhaber_axioms, random_chain, AxiomCounts};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Cosimplicial(#[from] CosimplicialError),
    #[error(transparent)]
    Operad(#[from] OperadError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
    #[error("bidegree (p={p}, q={q}) is outside the computed range")]
    OutOfRange { p: usize, q: usize },
    #[error("bidegree (p={p}, q={q}) is partial: level {} was not computed", p + 1)]
    Partial { p: usize, q: usize },
    #[error("representative at (p={p}, q={q}) is not a cycle")]
    NotACycle { p: usize, q: usize },
    #[error("chain has a component outside the normalized complex")]
    NotNormalized,
    #[error("operation needs an E{expected} page, got E{found}")]
    WrongPage { expected: u8, found: u8 },
    #[error("objects of kind {found} given where {expected} was expected")]
    KindMismatch { expected: ObjectKind, found: ObjectKind },
    #[error("pages and map use different cutoffs or conventions")]
    CutoffMismatch,
    #[error("{0}")]
    Precondition(String),
}

/// One bidegree of a page.
#[derive(Debug, Clone)]
pub struct PageEntry {
    p: usize,
    q: usize,
    partial: bool,
    representatives: Vec<SparseVector>,
    boundaries: SubspaceBasis,
    solver: SpanSolver,
    boundary_solver: SpanSolver,
}

impl PageEntry {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.representatives.len()
    }

    /// The entry is an upper bound only.
    pub fn partial(&self) -> bool {
        self.partial
    }

    /// Chain-level representatives, in coordinates of the normalized cells.
    pub fn representatives(&self) -> &[SparseVector] {
        &self.representatives
    }

    pub fn boundary_dim(&self) -> usize {
        self.boundaries.dim()
    }
}

/// A page `E^r` for `r ∈ {1, 2}`.
#[derive(Debug, Clone)]
pub struct Page {
    complex: Arc<NormalizedComplex>,
    index: u8,
    entries: BTreeMap<(usize, usize), PageEntry>,
}

/// A homology class on an E² page.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HHClass {
    pub p: usize,
    pub q: usize,
    /// A normalized cycle, in cell coordinates.
    pub representative: SparseVector,
    /// Coordinates in the page basis at `(p, q)`.
    pub coordinates: Vec<Rational>,
}

impl HHClass {
    pub fn is_zero(&self) -> bool {
        self.coordinates.iter().all(Zero::is_zero)
    }

    /// Total degree `q − p`.
    pub fn total_degree(&self) -> i64 {
        self.q as i64 - self.p as i64
    }
}

fn entry_for(p: usize, q: usize, partial: bool, representatives: Vec<SparseVector>, boundaries: SubspaceBasis) -> PageEntry {
    let ambient = boundaries.ambient_dim();
    let mut all = representatives.clone();
    all.extend(boundaries.vectors().iter().cloned());
    let solver = SpanSolver::new(&SubspaceBasis::new_unchecked(ambient, all));
    let boundary_solver = SpanSolver::new(&boundaries);
    PageEntry {
        p,
        q,
        partial,
        representatives,
        boundaries,
        solver,
        boundary_solver,
    }
}

/// The E¹ page of a normalized complex.
pub fn e1(complex: Arc<NormalizedComplex>) -> Page {
    let mut entries = BTreeMap::new();
    for p in 0..=complex.max_level() {
        for q in complex.degrees() {
            let n = complex.dim(p, q);
            let reps = (0..n).map(|i| SparseVector::unit(n, i)).collect();
            entries.insert((p, q), entry_for(p, q, false, reps, SubspaceBasis::empty(n)));
        }
    }
    Page {
        complex,
        index: 1,
        entries,
    }
}

/// `E²(p,q) = ker d¹ / im d¹`. Representatives prefer single cells that are
/// cycles, in cell order, then kernel vectors.
pub fn e2(page: &Page) -> Result<Page, SpectralError> {
    if page.index != 1 {
        return Err(SpectralError::WrongPage {
            expected: 1,
            found: page.index,
        });
    }
    let cx = &page.complex;
    let keys: Vec<(usize, usize)> = page.entries.keys().copied().collect();
    let entries = keys
        .par_iter()
        .map(|&(p, q)| {
            let n = cx.dim(p, q);
            let boundaries = match p.checked_sub(1) {
                Some(pm) => image_basis(cx.differential(pm, q).expect("lower level computed")),
                None => SubspaceBasis::empty(n),
            };
            let (partial, candidates) = match cx.differential(p, q) {
                Some(d) => {
                    let mut c: Vec<SparseVector> = (0..n)
                        .filter(|&j| d.column(j).is_zero())
                        .map(|j| SparseVector::unit(n, j))
                        .collect();
                    c.extend(kernel_basis(d).vectors().iter().cloned());
                    (false, c)
                }
                None => (true, (0..n).map(|j| SparseVector::unit(n, j)).collect()),
            };
            let mut ech = crate::ratlin::RowEchelon::new(n);
            for b in boundaries.vectors() {
                ech.insert(b);
            }
            let reps = candidates.into_iter().filter(|v| ech.insert(v)).collect();
            ((p, q), entry_for(p, q, partial, reps, boundaries))
        })
        .collect();
    Ok(Page {
        complex: page.complex.clone(),
        index: 2,
        entries,
    })
}

impl Page {
    /// Builds E¹ and E² of the normalized complex of the given kind.
    pub fn second(conv: Convention, kind: ObjectKind, max_level: usize, max_degree: usize) -> Result<Page, SpectralError> {
        let cx = NormalizedComplex::build(conv, kind, max_level, max_degree)?;
        e2(&e1(Arc::new(cx)))
    }

    pub fn index(&self) -> u8 {
        self.index
    }

    pub fn complex(&self) -> &NormalizedComplex {
        &self.complex
    }

    pub fn convention(&self) -> Convention {
        self.complex.convention()
    }

    pub fn kind(&self) -> ObjectKind {
        self.complex.kind()
    }

    pub fn max_level(&self) -> usize {
        self.complex.max_level()
    }

    pub fn max_degree(&self) -> usize {
        self.complex.max_degree()
    }

    pub fn entry(&self, p: usize, q: usize) -> Option<&PageEntry> {
        self.entries.get(&(p, q))
    }

    pub fn entries(&self) -> impl Iterator<Item = &PageEntry> {
        self.entries.values()
    }

    pub fn dim(&self, p: usize, q: usize) -> usize {
        self.entry(p, q).map_or(0, PageEntry::dim)
    }

    fn space(&self, p: usize, q: usize) -> Result<&CellBasis, SpectralError> {
        self.complex.space(p, q).ok_or(SpectralError::OutOfRange { p, q })
    }

    /// Human-readable form of a chain at `(p, q)`.
    pub fn describe(&self, p: usize, q: usize, v: &SparseVector) -> String {
        let Ok(space) = self.space(p, q) else {
            return String::from("?");
        };
        let mut out = String::new();
        for (i, (cell, c)) in space.combination(v).enumerate() {
            let neg = c < &Rational::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            match (i, neg) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            if mag != rat(1) {
                out.push_str(&format!("{mag}*"));
            }
            out.push_str(&cell.to_string());
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }

    /// Labels of the basis representatives at `(p, q)`.
    pub fn basis_labels(&self, p: usize, q: usize) -> Vec<String> {
        self.entry(p, q)
            .map(|e| e.representatives.iter().map(|v| self.describe(p, q, v)).collect())
            .unwrap_or_default()
    }

    /// Normalized cell coordinates of an operad element (Hochschild pages).
    pub fn vector_of(&self, x: &OperadElement) -> Result<SparseVector, SpectralError> {
        self.expect_kind(ObjectKind::Hochschild)?;
        let (p, q) = (x.arity(), x.degree());
        let space = self.space(p, q)?;
        let mut entries = Vec::new();
        for (m, c) in x.terms() {
            let i = space.position(&Cell::plain(m.clone())).ok_or(SpectralError::NotNormalized)?;
            entries.push((i, c.clone()));
        }
        Ok(SparseVector::from_entries(space.len(), entries))
    }

    /// Operad element with the given cell coordinates (Hochschild pages).
    pub fn element_of(&self, p: usize, q: usize, v: &SparseVector) -> Result<OperadElement, SpectralError> {
        self.expect_kind(ObjectKind::Hochschild)?;
        let space = self.space(p, q)?;
        let terms = space.combination(v).map(|(c, x)| (c.mono.clone(), x.clone()));
        Ok(OperadElement::from_terms(self.convention(), p, q, terms)?)
    }

    fn expect_kind(&self, kind: ObjectKind) -> Result<(), SpectralError> {
        if self.kind() != kind {
            return Err(SpectralError::KindMismatch {
                expected: kind,
                found: self.kind(),
            });
        }
        Ok(())
    }

    fn expect_second(&self) -> Result<(), SpectralError> {
        if self.index != 2 {
            return Err(SpectralError::WrongPage {
                expected: 2,
                found: self.index,
            });
        }
        Ok(())
    }

    /// Whether `v` is a d¹-boundary. Only the differential into `(p, q)` is
    /// used, so this also works on the partial row.
    pub fn is_boundary(&self, p: usize, q: usize, v: &SparseVector) -> Result<bool, SpectralError> {
        self.expect_second()?;
        let e = self.entry(p, q).ok_or(SpectralError::OutOfRange { p, q })?;
        Ok(e.boundary_solver.contains(v))
    }

    /// The class of a normalized cycle.
    pub fn class_of_vector(&self, p: usize, q: usize, v: SparseVector) -> Result<HHClass, SpectralError> {
        self.expect_second()?;
        let e = self.entry(p, q).ok_or(SpectralError::OutOfRange { p, q })?;
        if e.partial {
            return Err(SpectralError::Partial { p, q });
        }
        let d = self.complex.differential(p, q).ok_or(SpectralError::Partial { p, q })?;
        if !d.mul_vec(&v).is_zero() {
            return Err(SpectralError::NotACycle { p, q });
        }
        let mut coords = e.solver.solve(&v)?;
        coords.truncate(e.dim());
        Ok(HHClass {
            p,
            q,
            representative: v,
            coordinates: coords,
        })
    }

    /// The class of a cycle given as an operad element (Hochschild pages).
    pub fn class_of(&self, x: &OperadElement) -> Result<HHClass, SpectralError> {
        let v = self.vector_of(x)?;
        self.class_of_vector(x.arity(), x.degree(), v)
    }

    /// Parses an expression such as `{1,3}·{2,4}` and returns its class.
    pub fn class_of_expr(&self, s: &str) -> Result<HHClass, SpectralError> {
        let x = OperadElement::parse(self.convention(), s)?;
        self.class_of(&x)
    }

    /// The `i`-th basis class at `(p, q)`.
    pub fn basis_class(&self, p: usize, q: usize, i: usize) -> Result<HHClass, SpectralError> {
        let e = self.entry(p, q).ok_or(SpectralError::OutOfRange { p, q })?;
        let v = e.representatives.get(i).cloned().ok_or(SpectralError::OutOfRange { p, q })?;
        self.class_of_vector(p, q, v)
    }

    pub fn representative_element(&self, c: &HHClass) -> Result<OperadElement, SpectralError> {
        self.element_of(c.p, c.q, &c.representative)
    }

    /// The zero class at `(p, q)`.
    pub fn zero_class(&self, p: usize, q: usize) -> Result<HHClass, SpectralError> {
        let n = self.space(p, q)?.len();
        self.class_of_vector(p, q, SparseVector::zero(n))
    }

    /// `Σ cᵢ aᵢ` for classes in one bidegree.
    pub fn combine(&self, terms: &[(Rational, &HHClass)]) -> Result<HHClass, SpectralError> {
        let (p, q) = terms.first().map(|(_, c)| (c.p, c.q)).ok_or(SpectralError::Precondition("empty combination".into()))?;
        let mut v = SparseVector::zero(self.space(p, q)?.len());
        for (c, a) in terms {
            if (a.p, a.q) != (p, q) {
                return Err(SpectralError::Precondition("classes in different bidegrees".into()));
            }
            v = v.add_scaled(c, &a.representative);
        }
        self.class_of_vector(p, q, v)
    }

    /// Classes in one bidegree are linearly independent in E².
    pub fn independent(&self, classes: &[&HHClass]) -> bool {
        let Some(first) = classes.first() else {
            return true;
        };
        let n = first.coordinates.len();
        let mut ech = crate::ratlin::RowEchelon::new(n);
        classes.iter().all(|c| ech.insert(&SparseVector::from_dense(&c.coordinates)))
    }
}

/// `[a, b]` on E² of the Hochschild object. The bracket lowers the level by
/// one, so two level-0 classes have no target and give `OutOfRange`.
pub fn hh_bracket(page: &Page, a: &HHClass, b: &HHClass) -> Result<HHClass, SpectralError> {
    if a.p + b.p == 0 {
        return Err(SpectralError::OutOfRange { p: 0, q: a.q + b.q });
    }
    let x = page.representative_element(a)?;
    let y = page.representative_element(b)?;
    page.class_of(&gerstenhaber_bracket(&x, &y)?)
}

/// `a ★ b` on E² of the Hochschild object.
pub fn hh_star(page: &Page, a: &HHClass, b: &HHClass) -> Result<HHClass, SpectralError> {
    let x = page.representative_element(a)?;
    let y = page.representative_element(b)?;
    page.class_of(&star(&x, &y)?)
}

/// The map on E² pages induced by a cosimplicial map.
#[derive(Debug, Clone)]
pub struct InducedMap {
    rule: MapRule,
    blocks: BTreeMap<(usize, usize), SparseMatrix>,
    partial: BTreeSet<(usize, usize)>,
}

fn map_vector(rule: &MapRule, src: &Page, dst: &Page, p: usize, q: usize, v: &SparseVector) -> Result<SparseVector, SpectralError> {
    let (from, to) = (src.space(p, q)?, dst.space(p, q)?);
    let mut out = SparseVector::zero(to.len());
    for (cell, c) in from.combination(v) {
        for (image, x) in rule.apply_cell(cell) {
            let j = to.position(&image).ok_or(SpectralError::NotNormalized)?;
            out = out.add_scaled(&(c * rat(x)), &SparseVector::unit(to.len(), j));
        }
    }
    Ok(out)
}

pub fn induced_e2(map: &CosimplicialMap, src: &Page, dst: &Page) -> Result<InducedMap, SpectralError> {
    src.expect_second()?;
    dst.expect_second()?;
    src.expect_kind(map.source_kind())?;
    dst.expect_kind(map.target_kind())?;
    let cut = (src.max_level(), src.max_degree());
    if src.convention() != dst.convention()
        || map.convention() != src.convention()
        || cut != (dst.max_level(), dst.max_degree())
        || map.cutoffs() != cut
    {
        return Err(SpectralError::CutoffMismatch);
    }
    let mut blocks = BTreeMap::new();
    let mut partial = BTreeSet::new();
    for e in src.entries() {
        let (p, q) = (e.p, e.q);
        let target = dst.entry(p, q).ok_or(SpectralError::OutOfRange { p, q })?;
        if e.partial || target.partial {
            partial.insert((p, q));
            continue;
        }
        let columns = e
            .representatives
            .iter()
            .map(|r| {
                let img = map_vector(map.rule(), src, dst, p, q, r)?;
                Ok(SparseVector::from_dense(&dst.class_of_vector(p, q, img)?.coordinates))
            })
            .collect::<Result<Vec<_>, SpectralError>>()?;
        blocks.insert((p, q), SparseMatrix::from_columns(target.dim(), columns));
    }
    Ok(InducedMap {
        rule: map.rule().clone(),
        blocks,
        partial,
    })
}

impl InducedMap {
    pub fn matrix(&self, p: usize, q: usize) -> Option<&SparseMatrix> {
        self.blocks.get(&(p, q))
    }

    pub fn is_partial(&self, p: usize, q: usize) -> bool {
        self.partial.contains(&(p, q))
    }

    pub fn bidegrees(&self) -> impl Iterator<Item = &(usize, usize)> {
        self.blocks.keys()
    }

    /// Image of a class, with its representative mapped at chain level.
    pub fn apply(&self, class: &HHClass, src: &Page, dst: &Page) -> Result<HHClass, SpectralError> {
        let img = map_vector(&self.rule, src, dst, class.p, class.q, &class.representative)?;
        let out = dst.class_of_vector(class.p, class.q, img)?;
        if let Some(m) = self.matrix(class.p, class.q) {
            debug_assert_eq!(
                SparseVector::from_dense(&out.coordinates),
                m.mul_vec(&SparseVector::from_dense(&class.coordinates))
            );
        }
        Ok(out)
    }
}

/// E² in one total degree `t = q − p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TotalDegreeReport {
    pub total_degree: i64,
    pub entries: Vec<TotalDegreeEntry>,
    /// Every bidegree that can contribute was computed and is not partial.
    pub complete: bool,
    pub max_contributing_level: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TotalDegreeEntry {
    pub p: usize,
    pub q: usize,
    pub dim: usize,
    pub partial: bool,
}

impl TotalDegreeReport {
    pub fn total_dim(&self) -> usize {
        self.entries.iter().map(|e| e.dim).sum()
    }
}

/// Normalized cells satisfy `q ≥ (n−1)·p/2`, hence `p ≤ 2t/(n−3)` in total
/// degree `t` when `n > 3`.
pub fn total_degree_report(page: &Page, t: i64) -> TotalDegreeReport {
    let d = page.convention().bracket_degree() as i64;
    let bound = (d > 2).then(|| if t < 0 { 0 } else { (2 * t / (d - 2)) as usize });
    let mut entries = Vec::new();
    for e in page.entries() {
        if e.q as i64 - e.p as i64 == t {
            entries.push(TotalDegreeEntry {
                p: e.p,
                q: e.q,
                dim: e.dim(),
                partial: e.partial,
            });
        }
    }
    let complete = match bound {
        Some(b) => {
            let top_q = t + b as i64;
            b < page.max_level() && top_q <= page.max_degree() as i64 && entries.iter().all(|e| !e.partial || e.dim == 0)
        }
        None => false,
    };
    TotalDegreeReport {
        total_degree: t,
        entries,
        complete,
        max_contributing_level: bound,
    }
}

/// Which map the obstruction is computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObstructionMap {
    /// Forgetting the framing: Hochschild object → semidirect object.
    Inclusion,
    /// The identity of the Hochschild object; its kernel is zero.
    Identity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub name: String,
    pub representative: String,
    pub p: usize,
    pub q: usize,
    pub source_dim: usize,
    pub target_dim: usize,
    pub nonzero: bool,
    pub image_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub n: u32,
    pub sign_version: SignVersion,
    pub map: ObstructionMap,
    pub max_level: usize,
    pub max_degree: usize,
    pub witnesses: Vec<Witness>,
    pub alpha_in_kernel: bool,
    pub bracket_in_kernel: bool,
    /// The kernel of the induced map contains `α` but not `[α, β]`, so it is
    /// not closed under the bracket.
    pub kernel_not_bracket_ideal: bool,
    pub partial: bool,
}

/// Computes `α`, `β`, `[α, β]` and their images under the inclusion.
pub fn obstruction_report(conv: Convention) -> Result<ObstructionReport, SpectralError> {
    obstruction_report_for(conv, ObstructionMap::Inclusion)
}

pub fn obstruction_report_for(conv: Convention, which: ObstructionMap) -> Result<ObstructionReport, SpectralError> {
    let n = conv.n();
    if n.is_multiple_of(2) || n <= 3 {
        return Err(SpectralError::Precondition(format!("n must be odd and greater than 3, got {n}")));
    }
    let d = conv.bracket_degree();
    let (max_level, max_degree) = (6, 3 * d);
    let h_obj = hochschild_object(conv, max_level, max_degree)?;
    let (map, t_obj) = match which {
        ObstructionMap::Inclusion => {
            let s_obj = semidirect_object(conv, max_level, max_degree)?;
            (inclusion_map(&h_obj, &s_obj)?, s_obj)
        }
        ObstructionMap::Identity => (CosimplicialMap::identity(&h_obj)?, h_obj.clone()),
    };
    let src = e2(&e1(Arc::new(h_obj.normalize()?)))?;
    let dst = if which == ObstructionMap::Identity {
        src.clone()
    } else {
        e2(&e1(Arc::new(t_obj.normalize()?)))?
    };
    let induced = induced_e2(&map, &src, &dst)?;

    let alpha = src.class_of_expr("{1,2}")?;
    let beta = src.class_of_expr("{1,3}·{2,4}")?;
    let alpha2 = hh_star(&src, &alpha, &alpha)?;
    let ab = hh_bracket(&src, &alpha, &beta)?;
    let aa2 = hh_bracket(&src, &alpha, &alpha2)?;
    let mut witnesses = Vec::new();
    let mut images = Vec::new();
    for (name, c) in [("alpha", &alpha), ("beta", &beta), ("alpha^2", &alpha2), ("[alpha,beta]", &ab), ("[alpha,alpha^2]", &aa2)] {
        let img = induced.apply(c, &src, &dst)?;
        witnesses.push(Witness {
            name: name.to_string(),
            representative: src.describe(c.p, c.q, &c.representative),
            p: c.p,
            q: c.q,
            source_dim: src.dim(c.p, c.q),
            target_dim: dst.dim(c.p, c.q),
            nonzero: !c.is_zero(),
            image_zero: img.is_zero(),
        });
        images.push(img);
    }
    let alpha_in_kernel = !alpha.is_zero() && images[0].is_zero();
    let bracket_in_kernel = images[3].is_zero();
    Ok(ObstructionReport {
        n,
        sign_version: conv.sign_version(),
        map: which,
        max_level,
        max_degree,
        witnesses,
        alpha_in_kernel,
        bracket_in_kernel,
        kernel_not_bracket_ideal: alpha_in_kernel && !bracket_in_kernel,
        partial: false,
    })
}
