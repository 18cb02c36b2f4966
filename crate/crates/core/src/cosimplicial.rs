//! Cosimplicial graded vector spaces built from the Poisson operad.
//!
//! Two objects are constructed, both truncated at a level cutoff `P` and an
//! internal degree cutoff `Q`:
//!
//! * the Hochschild object, level `p` = `O(p)` with cofaces given by
//!   inserting the product and codegeneracies by inserting the arity-0 unit;
//! * the semidirect object, level `p` = `O(p) ⊗ H(S^{n−1})^{⊗p}`, whose basis
//!   cells carry a label `pt` or `v` per input. Doubling a `v`-labelled input
//!   expands the diagonal of the sphere class and produces a bracket term.
//!
//! The new input created by `d⁰` is the first one and the one created by
//! `d^{p+1}` is the last one; with this pairing the cosimplicial identities
//! hold exactly, which [`CosimplicialObject::verify_identities`] checks.
//!
//! The normalized subspace `∩ ker sⁱ` is spanned by the cells without a
//! `pt`-labelled singleton block (a codegeneracy is injective on the cells
//! it does not kill), so [`NormalizedComplex::build`] enumerates those cells
//! directly and never materialises the full levels.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poisson_operad::{
    basis, basis_without_singletons, compose_monomials, distinguished_elements, Convention, LieMonomial, OperadElement, PoissonMonomial,
};
use crate::ratlin::{kernel_basis, rat, Rational, SparseMatrix, SparseVector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CosimplicialError {
    #[error("level cutoff must be at least 1")]
    InvalidCutoff,
    #[error("objects use different conventions")]
    ConventionMismatch,
    #[error("cutoffs differ: source (P={src_p}, Q={src_q}), target (P={dst_p}, Q={dst_q})")]
    CutoffMismatch {
        src_p: usize,
        src_q: usize,
        dst_p: usize,
        dst_q: usize,
    },
    #[error("map does not commute with {map} at level {level}, degree {degree}")]
    NotCommuting { map: String, level: usize, degree: usize },
    #[error("cosimplicial identity {identity} fails at level {level}, degree {degree}")]
    IdentityFailed {
        identity: String,
        level: usize,
        degree: usize,
    },
    #[error("differential squares to a non-zero map at level {level}, degree {degree}")]
    DifferentialSquare { level: usize, degree: usize },
    #[error("normalized subspace at level {level}, degree {degree} is not spanned by basis cells")]
    NonCellularKernel { level: usize, degree: usize },
    #[error("differential leaves the normalized subcomplex at level {level}")]
    LeavesSubcomplex { level: usize },
    #[error("level {0} is outside the computed range")]
    LevelOutOfRange(usize),
    #[error("cell does not belong to this object")]
    UnknownCell,
}

/// Which cosimplicial object a cell or table belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectKind {
    Hochschild,
    Semidirect,
}

impl ObjectKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ObjectKind::Hochschild => "hochschild",
            ObjectKind::Semidirect => "semidirect",
        }
    }
}

impl fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Homology class of the sphere attached to one input: the point class or
/// the fundamental class (degree `n−1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Pt,
    V,
}

/// A basis element: a monomial, plus one label per input for the
/// semidirect object. Hochschild cells have no labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub mono: PoissonMonomial,
    pub labels: Vec<Label>,
}

impl Cell {
    pub fn plain(mono: PoissonMonomial) -> Self {
        Cell {
            mono,
            labels: Vec::new(),
        }
    }

    pub fn labeled(mono: PoissonMonomial, labels: Vec<Label>) -> Self {
        Cell { mono, labels }
    }

    pub fn level(&self) -> usize {
        self.mono.arity()
    }

    pub fn degree(&self, conv: &Convention) -> usize {
        let v = self.labels.iter().filter(|l| **l == Label::V).count();
        self.mono.degree(conv) + conv.bracket_degree() * v
    }

    /// Lies in every codegeneracy kernel.
    pub fn is_normalized(&self) -> bool {
        self.mono
            .singletons()
            .all(|s| self.labels.get(s - 1) == Some(&Label::V))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.mono)?;
        if !self.labels.is_empty() {
            f.write_str(" ⊗ (")?;
            for (i, l) in self.labels.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                f.write_str(match l {
                    Label::Pt => "pt",
                    Label::V => "v",
                })?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// An integer combination of cells.
pub type CellCombo = BTreeMap<Cell, i64>;

fn accumulate(out: &mut CellCombo, cell: Cell, c: i64) {
    if c == 0 {
        return;
    }
    let e = out.entry(cell.clone()).or_insert(0);
    *e += c;
    if *e == 0 {
        out.remove(&cell);
    }
}

fn product_monomial() -> PoissonMonomial {
    PoissonMonomial::from_blocks(vec![
        LieMonomial::new(vec![1]).unwrap(),
        LieMonomial::new(vec![2]).unwrap(),
    ])
    .unwrap()
}

fn bracket_monomial() -> PoissonMonomial {
    PoissonMonomial::from_blocks(vec![LieMonomial::new(vec![1, 2]).unwrap()]).unwrap()
}

/// Coface `dⁱ` on a single cell of level `p`, for `0 ≤ i ≤ p+1`.
pub fn coface_cell(conv: &Convention, kind: ObjectKind, i: usize, cell: &Cell) -> CellCombo {
    let k = cell.level();
    assert!(i <= k + 1, "coface index {i} out of range at level {k}");
    let mu = product_monomial();
    let x = &cell.mono;
    let mut out = CellCombo::new();
    let labels_with = |pos: usize, pair: [Label; 2]| -> Vec<Label> {
        let mut l = Vec::with_capacity(k + 1);
        l.extend_from_slice(&cell.labels[..pos]);
        l.extend_from_slice(&pair);
        l.extend_from_slice(&cell.labels[pos + 1..]);
        l
    };
    let push = |out: &mut CellCombo, combo: BTreeMap<PoissonMonomial, i64>, labels: &[Label], sign: i64| {
        for (m, c) in combo {
            accumulate(out, Cell::labeled(m, labels.to_vec()), sign * c);
        }
    };
    if i == 0 {
        let mut labels = Vec::new();
        if kind == ObjectKind::Semidirect {
            labels.push(Label::Pt);
            labels.extend_from_slice(&cell.labels);
        }
        push(&mut out, compose_monomials(conv, &mu, 2, x), &labels, 1);
    } else if i == k + 1 {
        let mut labels = cell.labels.clone();
        if kind == ObjectKind::Semidirect {
            labels.push(Label::Pt);
        }
        push(&mut out, compose_monomials(conv, &mu, 1, x), &labels, 1);
    } else {
        let doubled = compose_monomials(conv, x, i, &mu);
        match kind {
            ObjectKind::Hochschild => push(&mut out, doubled, &[], 1),
            ObjectKind::Semidirect => match cell.labels[i - 1] {
                Label::Pt => push(&mut out, doubled, &labels_with(i - 1, [Label::Pt, Label::Pt]), 1),
                Label::V => {
                    // v moves from the label string into the monomial
                    let passed = cell.labels[..i - 1].iter().filter(|l| **l == Label::V).count();
                    let sign = if conv.odd_bracket() && passed % 2 == 1 { -1 } else { 1 };
                    push(
                        &mut out,
                        compose_monomials(conv, x, i, &bracket_monomial()),
                        &labels_with(i - 1, [Label::Pt, Label::Pt]),
                        sign,
                    );
                    push(&mut out, doubled.clone(), &labels_with(i - 1, [Label::V, Label::Pt]), 1);
                    push(&mut out, doubled, &labels_with(i - 1, [Label::Pt, Label::V]), 1);
                }
            },
        }
    }
    out
}

/// Codegeneracy `sʲ` on a single cell of level `p`, for `1 ≤ j ≤ p`.
pub fn codegeneracy_cell(conv: &Convention, kind: ObjectKind, j: usize, cell: &Cell) -> CellCombo {
    let k = cell.level();
    assert!(j >= 1 && j <= k, "codegeneracy index {j} out of range at level {k}");
    let mut out = CellCombo::new();
    let labels = match kind {
        ObjectKind::Hochschild => Vec::new(),
        ObjectKind::Semidirect => {
            if cell.labels[j - 1] == Label::V {
                return out;
            }
            let mut l = cell.labels.clone();
            l.remove(j - 1);
            l
        }
    };
    let u = PoissonMonomial::unit();
    for (m, c) in compose_monomials(conv, &cell.mono, j, &u) {
        accumulate(&mut out, Cell::labeled(m, labels.clone()), c);
    }
    out
}

/// `Σᵢ (−1)ⁱ dⁱ` on a cell.
pub fn differential_cell(conv: &Convention, kind: ObjectKind, cell: &Cell) -> CellCombo {
    let mut out = CellCombo::new();
    for i in 0..=cell.level() + 1 {
        let s = if i % 2 == 0 { 1 } else { -1 };
        for (c, x) in coface_cell(conv, kind, i, cell) {
            accumulate(&mut out, c, s * x);
        }
    }
    out
}

/// All cells of level `p` and degree `q`, sorted.
pub fn cells(conv: &Convention, kind: ObjectKind, p: usize, q: usize) -> Vec<Cell> {
    enumerate_cells(conv, kind, p, q, false)
}

/// Cells of level `p` and degree `q` spanning the normalized subspace.
pub fn normalized_cells(conv: &Convention, kind: ObjectKind, p: usize, q: usize) -> Vec<Cell> {
    enumerate_cells(conv, kind, p, q, true)
}

fn enumerate_cells(conv: &Convention, kind: ObjectKind, p: usize, q: usize, normalized: bool) -> Vec<Cell> {
    let d = conv.bracket_degree();
    if !q.is_multiple_of(d) {
        return Vec::new();
    }
    let mut out = match kind {
        ObjectKind::Hochschild => {
            let monos = if normalized {
                basis_without_singletons(conv, p, q)
            } else {
                basis(conv, p, q)
            };
            monos.into_iter().map(Cell::plain).collect()
        }
        ObjectKind::Semidirect => {
            let mut out = Vec::new();
            for b in 0..=(q / d).min(p) {
                let vs = q / d - b;
                if vs > p {
                    continue;
                }
                for m in basis(conv, p, d * b) {
                    let forced: Vec<usize> = if normalized { m.singletons().collect() } else { Vec::new() };
                    if forced.len() > vs {
                        continue;
                    }
                    for labels in label_vectors(p, vs, &forced) {
                        out.push(Cell::labeled(m.clone(), labels));
                    }
                }
            }
            out
        }
    };
    out.sort();
    out
}

/// Label vectors of length `p` with exactly `vs` entries `V`, including the
/// (1-based) positions in `forced`.
fn label_vectors(p: usize, vs: usize, forced: &[usize]) -> Vec<Vec<Label>> {
    fn rec(pos: usize, p: usize, left: usize, forced: &[usize], cur: &mut Vec<Label>, out: &mut Vec<Vec<Label>>) {
        if pos == p {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let is_forced = forced.contains(&(pos + 1));
        if !is_forced {
            cur.push(Label::Pt);
            rec(pos + 1, p, left, forced, cur, out);
            cur.pop();
        }
        if left > 0 {
            cur.push(Label::V);
            rec(pos + 1, p, left - 1, forced, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, p, vs, forced, &mut Vec::new(), &mut out);
    out
}

/// An enumerated basis of one graded piece.
#[derive(Debug, Clone, Default)]
pub struct CellBasis {
    cells: Vec<Cell>,
    index: HashMap<Cell, usize>,
}

impl CellBasis {
    pub fn new(cells: Vec<Cell>) -> Self {
        let index = cells.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
        CellBasis { cells, index }
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn position(&self, cell: &Cell) -> Option<usize> {
        self.index.get(cell).copied()
    }

    /// Coordinates of an integer combination; `None` if a cell is missing.
    pub fn vector(&self, combo: &CellCombo) -> Option<SparseVector> {
        let mut entries = Vec::with_capacity(combo.len());
        for (c, x) in combo {
            entries.push((self.position(c)?, rat(*x)));
        }
        Some(SparseVector::from_entries(self.len(), entries))
    }

    pub fn combination<'a>(&'a self, v: &'a SparseVector) -> impl Iterator<Item = (&'a Cell, &'a Rational)> + 'a {
        v.entries().iter().map(move |(i, x)| (&self.cells[*i], x))
    }
}

/// A truncated cosimplicial graded vector space with explicit structure
/// matrices.
#[derive(Debug, Clone)]
pub struct CosimplicialObject {
    conv: Convention,
    kind: ObjectKind,
    max_level: usize,
    max_degree: usize,
    /// `levels[p][q]`.
    levels: Vec<BTreeMap<usize, CellBasis>>,
    /// `cofaces[p][i][q]`: level `p` → `p+1`, for `p < max_level`.
    cofaces: Vec<Vec<BTreeMap<usize, SparseMatrix>>>,
    /// `codegeneracies[p][j−1][q]`: level `p` → `p−1`.
    codegeneracies: Vec<Vec<BTreeMap<usize, SparseMatrix>>>,
}

pub fn hochschild_object(
    conv: Convention,
    max_level: usize,
    max_degree: usize,
) -> Result<CosimplicialObject, CosimplicialError> {
    CosimplicialObject::build(conv, ObjectKind::Hochschild, max_level, max_degree)
}

pub fn semidirect_object(
    conv: Convention,
    max_level: usize,
    max_degree: usize,
) -> Result<CosimplicialObject, CosimplicialError> {
    CosimplicialObject::build(conv, ObjectKind::Semidirect, max_level, max_degree)
}

fn degrees(conv: &Convention, max_degree: usize) -> Vec<usize> {
    (0..=max_degree).step_by(conv.bracket_degree()).collect()
}

fn matrix_of(
    src: &CellBasis,
    dst: &CellBasis,
    f: impl Fn(&Cell) -> CellCombo + Sync,
) -> Result<SparseMatrix, CosimplicialError> {
    let columns = src
        .cells()
        .par_iter()
        .map(|c| dst.vector(&f(c)).ok_or(CosimplicialError::UnknownCell))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SparseMatrix::from_columns(dst.len(), columns))
}

impl CosimplicialObject {
    pub fn build(
        conv: Convention,
        kind: ObjectKind,
        max_level: usize,
        max_degree: usize,
    ) -> Result<Self, CosimplicialError> {
        if max_level < 1 {
            return Err(CosimplicialError::InvalidCutoff);
        }
        let qs = degrees(&conv, max_degree);
        let levels: Vec<BTreeMap<usize, CellBasis>> = (0..=max_level)
            .into_par_iter()
            .map(|p| {
                qs.iter()
                    .map(|&q| (q, CellBasis::new(cells(&conv, kind, p, q))))
                    .collect()
            })
            .collect();
        let cofaces = (0..max_level)
            .into_par_iter()
            .map(|p| {
                (0..=p + 1)
                    .map(|i| {
                        qs.iter()
                            .map(|&q| {
                                let m = matrix_of(&levels[p][&q], &levels[p + 1][&q], |c| {
                                    coface_cell(&conv, kind, i, c)
                                })
                                .expect("cofaces stay inside the truncation");
                                (q, m)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let codegeneracies = (0..=max_level)
            .into_par_iter()
            .map(|p| {
                (1..=p)
                    .map(|j| {
                        qs.iter()
                            .map(|&q| {
                                let m = matrix_of(&levels[p][&q], &levels[p - 1][&q], |c| {
                                    codegeneracy_cell(&conv, kind, j, c)
                                })
                                .expect("codegeneracies stay inside the truncation");
                                (q, m)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(CosimplicialObject {
            conv,
            kind,
            max_level,
            max_degree,
            levels,
            cofaces,
            codegeneracies,
        })
    }

    pub fn convention(&self) -> Convention {
        self.conv
    }

    pub fn kind(&self) -> ObjectKind {
        self.kind
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn degrees(&self) -> Vec<usize> {
        degrees(&self.conv, self.max_degree)
    }

    pub fn basis(&self, p: usize, q: usize) -> Option<&CellBasis> {
        self.levels.get(p)?.get(&q)
    }

    pub fn coface(&self, p: usize, i: usize, q: usize) -> Option<&SparseMatrix> {
        self.cofaces.get(p)?.get(i)?.get(&q)
    }

    pub fn codegeneracy(&self, p: usize, j: usize, q: usize) -> Option<&SparseMatrix> {
        self.codegeneracies.get(p)?.get(j.checked_sub(1)?)?.get(&q)
    }

    /// `Σᵢ (−1)ⁱ dⁱ` from level `p` to `p+1` in degree `q`.
    pub fn differential(&self, p: usize, q: usize) -> Option<SparseMatrix> {
        let first = self.coface(p, 0, q)?;
        let mut acc = SparseMatrix::zeros(first.rows(), first.cols());
        for i in 0..=p + 1 {
            let s = if i % 2 == 0 { rat(1) } else { rat(-1) };
            acc = acc.add_scaled(&s, self.coface(p, i, q)?);
        }
        Some(acc)
    }

    /// Checks every cosimplicial identity among the stored matrices and
    /// returns the number of matrix equations checked.
    pub fn verify_identities(&self) -> Result<usize, CosimplicialError> {
        let mut checked = 0;
        let fail = |identity: String, level: usize, degree: usize| CosimplicialError::IdentityFailed {
            identity,
            level,
            degree,
        };
        for q in self.degrees() {
            // dʲdⁱ = dⁱd^{j−1}, i < j, from level p
            for p in 0..self.max_level.saturating_sub(1) {
                for j in 1..=p + 2 {
                    for i in 0..j {
                        let lhs = self.coface(p + 1, j, q).unwrap().mul(self.coface(p, i, q).unwrap());
                        let rhs = self.coface(p + 1, i, q).unwrap().mul(self.coface(p, j - 1, q).unwrap());
                        if lhs != rhs {
                            return Err(fail(format!("d{j}d{i} = d{i}d{}", j - 1), p, q));
                        }
                        checked += 1;
                    }
                }
            }
            // sʲsⁱ = sⁱs^{j+1}, i ≤ j, from level p
            for p in 2..=self.max_level {
                for i in 1..p {
                    for j in i..p {
                        let lhs = self.codegeneracy(p - 1, j, q).unwrap().mul(self.codegeneracy(p, i, q).unwrap());
                        let rhs = self.codegeneracy(p - 1, i, q).unwrap().mul(self.codegeneracy(p, j + 1, q).unwrap());
                        if lhs != rhs {
                            return Err(fail(format!("s{j}s{i} = s{i}s{}", j + 1), p, q));
                        }
                        checked += 1;
                    }
                }
            }
            // sʲdⁱ from level p (p+1 has codegeneracies 1..=p+1)
            for p in 0..self.max_level {
                for j in 1..=p + 1 {
                    for i in 0..=p + 1 {
                        let lhs = self.codegeneracy(p + 1, j, q).unwrap().mul(self.coface(p, i, q).unwrap());
                        // codegeneracies are indexed from 1
                        let rhs = if i + 1 < j {
                            self.coface(p - 1, i, q).unwrap().mul(self.codegeneracy(p, j - 1, q).unwrap())
                        } else if i + 1 == j || i == j {
                            SparseMatrix::identity(lhs.cols())
                        } else {
                            self.coface(p - 1, i - 1, q).unwrap().mul(self.codegeneracy(p, j, q).unwrap())
                        };
                        if lhs != rhs {
                            return Err(fail(format!("s{j}d{i}"), p, q));
                        }
                        checked += 1;
                    }
                }
            }
        }
        Ok(checked)
    }

    /// Checks `∂∂ = 0` on every pair of consecutive stored differentials.
    pub fn verify_differential(&self) -> Result<usize, CosimplicialError> {
        let mut checked = 0;
        for q in self.degrees() {
            for p in 0..self.max_level.saturating_sub(1) {
                let dd = self.differential(p + 1, q).unwrap().mul(&self.differential(p, q).unwrap());
                if !dd.is_zero() {
                    return Err(CosimplicialError::DifferentialSquare { level: p, degree: q });
                }
                checked += 1;
            }
        }
        Ok(checked)
    }

    /// The normalized cochain complex, computed as `∩ⱼ ker sʲ` on each
    /// level. The kernel is required to be spanned by cells.
    pub fn normalize(&self) -> Result<NormalizedComplex, CosimplicialError> {
        let qs = self.degrees();
        let spaces: Vec<BTreeMap<usize, CellBasis>> = (0..=self.max_level)
            .into_par_iter()
            .map(|p| {
                qs.iter()
                    .map(|&q| {
                        let full = &self.levels[p][&q];
                        let mut rows = Vec::new();
                        for j in 1..=p {
                            rows.extend(self.codegeneracy(p, j, q).unwrap().row_vectors());
                        }
                        let stacked = SparseMatrix::from_columns(
                            rows.len(),
                            transpose_rows(full.len(), &rows),
                        );
                        let ker = kernel_basis(&stacked);
                        let mut picked = Vec::with_capacity(ker.dim());
                        for v in ker.vectors() {
                            match v.entries() {
                                [(i, x)] if !x.is_zero() => picked.push(full.cells()[*i].clone()),
                                _ => return Err(CosimplicialError::NonCellularKernel { level: p, degree: q }),
                            }
                        }
                        picked.sort();
                        Ok((q, CellBasis::new(picked)))
                    })
                    .collect::<Result<BTreeMap<_, _>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        NormalizedComplex::from_spaces(self.conv, self.kind, self.max_level, self.max_degree, spaces)
    }
}

fn transpose_rows(cols: usize, rows: &[SparseVector]) -> Vec<SparseVector> {
    let mut per_col: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); cols];
    for (r, row) in rows.iter().enumerate() {
        for (c, x) in row.entries() {
            per_col[*c].push((r, x.clone()));
        }
    }
    per_col
        .into_iter()
        .map(|e| SparseVector::from_entries(rows.len(), e))
        .collect()
}

/// The normalized cochain complex: per level and degree a cell basis and
/// the differential `Σ(−1)ⁱdⁱ` restricted to it.
#[derive(Debug, Clone)]
pub struct NormalizedComplex {
    conv: Convention,
    kind: ObjectKind,
    max_level: usize,
    max_degree: usize,
    spaces: Vec<BTreeMap<usize, CellBasis>>,
    /// `differentials[p][q]`: level `p` → `p+1`, for `p < max_level`.
    differentials: Vec<BTreeMap<usize, SparseMatrix>>,
}

impl NormalizedComplex {
    /// Enumerates normalized cells directly, without the full levels.
    pub fn build(
        conv: Convention,
        kind: ObjectKind,
        max_level: usize,
        max_degree: usize,
    ) -> Result<Self, CosimplicialError> {
        if max_level < 1 {
            return Err(CosimplicialError::InvalidCutoff);
        }
        let qs = degrees(&conv, max_degree);
        let spaces = (0..=max_level)
            .into_par_iter()
            .map(|p| {
                qs.iter()
                    .map(|&q| (q, CellBasis::new(normalized_cells(&conv, kind, p, q))))
                    .collect()
            })
            .collect();
        Self::from_spaces(conv, kind, max_level, max_degree, spaces)
    }

    fn from_spaces(
        conv: Convention,
        kind: ObjectKind,
        max_level: usize,
        max_degree: usize,
        spaces: Vec<BTreeMap<usize, CellBasis>>,
    ) -> Result<Self, CosimplicialError> {
        let qs = degrees(&conv, max_degree);
        let differentials = (0..max_level)
            .into_par_iter()
            .map(|p| {
                qs.iter()
                    .map(|&q| {
                        let (src, dst) = (&spaces[p][&q], &spaces[p + 1][&q]);
                        let columns = src
                            .cells()
                            .par_iter()
                            .map(|c| {
                                dst.vector(&differential_cell(&conv, kind, c))
                                    .ok_or(CosimplicialError::LeavesSubcomplex { level: p })
                            })
                            .collect::<Result<Vec<_>, _>>()?;
                        Ok((q, SparseMatrix::from_columns(dst.len(), columns)))
                    })
                    .collect::<Result<BTreeMap<_, _>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(NormalizedComplex {
            conv,
            kind,
            max_level,
            max_degree,
            spaces,
            differentials,
        })
    }

    pub fn convention(&self) -> Convention {
        self.conv
    }

    pub fn kind(&self) -> ObjectKind {
        self.kind
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn degrees(&self) -> Vec<usize> {
        degrees(&self.conv, self.max_degree)
    }

    pub fn space(&self, p: usize, q: usize) -> Option<&CellBasis> {
        self.spaces.get(p)?.get(&q)
    }

    pub fn differential(&self, p: usize, q: usize) -> Option<&SparseMatrix> {
        self.differentials.get(p)?.get(&q)
    }

    pub fn dim(&self, p: usize, q: usize) -> usize {
        self.space(p, q).map_or(0, CellBasis::len)
    }

    pub fn verify_differential(&self) -> Result<usize, CosimplicialError> {
        let mut checked = 0;
        for q in self.degrees() {
            for p in 0..self.max_level.saturating_sub(1) {
                let dd = self.differential(p + 1, q).unwrap().mul(self.differential(p, q).unwrap());
                if !dd.is_zero() {
                    return Err(CosimplicialError::DifferentialSquare { level: p, degree: q });
                }
                checked += 1;
            }
        }
        Ok(checked)
    }

    /// Same cells and same differentials.
    pub fn same_as(&self, other: &NormalizedComplex) -> bool {
        self.conv == other.conv
            && self.kind == other.kind
            && self.max_level == other.max_level
            && self.max_degree == other.max_degree
            && self.spaces.iter().zip(&other.spaces).all(|(a, b)| {
                a.len() == b.len() && a.iter().zip(b).all(|((qa, x), (qb, y))| qa == qb && x.cells == y.cells)
            })
            && self.differentials == other.differentials
    }
}

/// Converts an operad element to a combination of Hochschild cells.
pub fn element_cells(x: &OperadElement) -> BTreeMap<Cell, Rational> {
    x.terms()
        .iter()
        .map(|(m, c)| (Cell::plain(m.clone()), c.clone()))
        .collect()
}

/// `dⁱ` on an operad element viewed as a Hochschild cochain.
pub fn coface_element(i: usize, x: &OperadElement) -> OperadElement {
    let k = x.arity();
    assert!(i <= k + 1, "coface index {i} out of range at level {k}");
    let dist = distinguished_elements(x.convention());
    let r = match i {
        0 => dist.product.compose(2, x),
        _ if i == k + 1 => dist.product.compose(1, x),
        _ => x.compose(i, &dist.product),
    };
    r.expect("slots checked above")
}

/// `Σᵢ (−1)ⁱ dⁱ` on an operad element.
pub fn differential_element(x: &OperadElement) -> OperadElement {
    let mut acc = OperadElement::zero(x.convention(), x.arity() + 1, x.degree());
    for i in 0..=x.arity() + 1 {
        let s = if i % 2 == 0 { rat(1) } else { rat(-1) };
        acc = acc.add_scaled(&s, &coface_element(i, x)).expect("same shape");
    }
    acc
}

/// Rule defining a cosimplicial map on cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapRule {
    Identity,
    /// `x ↦ x ⊗ (pt,…,pt)`.
    Inclusion,
    /// Apply the second rule, then the first.
    Composite(Box<MapRule>, Box<MapRule>),
}

impl MapRule {
    pub fn apply_cell(&self, cell: &Cell) -> CellCombo {
        match self {
            MapRule::Identity => CellCombo::from([(cell.clone(), 1)]),
            MapRule::Inclusion => {
                let labels = vec![Label::Pt; cell.level()];
                CellCombo::from([(Cell::labeled(cell.mono.clone(), labels), 1)])
            }
            MapRule::Composite(f, g) => {
                let mut out = CellCombo::new();
                for (c, x) in g.apply_cell(cell) {
                    for (d, y) in f.apply_cell(&c) {
                        accumulate(&mut out, d, x * y);
                    }
                }
                out
            }
        }
    }
}

/// A levelwise linear map between two truncated cosimplicial objects that
/// commutes with every coface and codegeneracy.
#[derive(Debug, Clone)]
pub struct CosimplicialMap {
    rule: MapRule,
    source_kind: ObjectKind,
    target_kind: ObjectKind,
    conv: Convention,
    max_level: usize,
    max_degree: usize,
    /// `levels[p][q]`.
    levels: Vec<BTreeMap<usize, SparseMatrix>>,
}

impl CosimplicialMap {
    fn checked(
        rule: MapRule,
        src: &CosimplicialObject,
        dst: &CosimplicialObject,
    ) -> Result<Self, CosimplicialError> {
        if src.conv != dst.conv {
            return Err(CosimplicialError::ConventionMismatch);
        }
        if (src.max_level, src.max_degree) != (dst.max_level, dst.max_degree) {
            return Err(CosimplicialError::CutoffMismatch {
                src_p: src.max_level,
                src_q: src.max_degree,
                dst_p: dst.max_level,
                dst_q: dst.max_degree,
            });
        }
        let qs = src.degrees();
        let levels = (0..=src.max_level)
            .map(|p| {
                qs.iter()
                    .map(|&q| {
                        let m = matrix_of(src.basis(p, q).unwrap(), dst.basis(p, q).unwrap(), |c| rule.apply_cell(c))?;
                        Ok((q, m))
                    })
                    .collect::<Result<BTreeMap<_, _>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let map = CosimplicialMap {
            rule,
            source_kind: src.kind,
            target_kind: dst.kind,
            conv: src.conv,
            max_level: src.max_level,
            max_degree: src.max_degree,
            levels,
        };
        map.verify_commutation(src, dst)?;
        Ok(map)
    }

    fn verify_commutation(&self, src: &CosimplicialObject, dst: &CosimplicialObject) -> Result<(), CosimplicialError> {
        for q in src.degrees() {
            for p in 0..src.max_level {
                for i in 0..=p + 1 {
                    let lhs = self.levels[p + 1][&q].mul(src.coface(p, i, q).unwrap());
                    let rhs = dst.coface(p, i, q).unwrap().mul(&self.levels[p][&q]);
                    if lhs != rhs {
                        return Err(CosimplicialError::NotCommuting {
                            map: format!("d{i}"),
                            level: p,
                            degree: q,
                        });
                    }
                }
            }
            for p in 1..=src.max_level {
                for j in 1..=p {
                    let lhs = self.levels[p - 1][&q].mul(src.codegeneracy(p, j, q).unwrap());
                    let rhs = dst.codegeneracy(p, j, q).unwrap().mul(&self.levels[p][&q]);
                    if lhs != rhs {
                        return Err(CosimplicialError::NotCommuting {
                            map: format!("s{j}"),
                            level: p,
                            degree: q,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn identity(obj: &CosimplicialObject) -> Result<Self, CosimplicialError> {
        Self::checked(MapRule::Identity, obj, obj)
    }

    /// `g` followed by `f`.
    pub fn compose(
        f: &CosimplicialMap,
        g: &CosimplicialMap,
        src: &CosimplicialObject,
        dst: &CosimplicialObject,
    ) -> Result<Self, CosimplicialError> {
        Self::checked(
            MapRule::Composite(Box::new(f.rule.clone()), Box::new(g.rule.clone())),
            src,
            dst,
        )
    }

    pub fn rule(&self) -> &MapRule {
        &self.rule
    }

    pub fn source_kind(&self) -> ObjectKind {
        self.source_kind
    }

    pub fn target_kind(&self) -> ObjectKind {
        self.target_kind
    }

    pub fn convention(&self) -> Convention {
        self.conv
    }

    pub fn matrix(&self, p: usize, q: usize) -> Option<&SparseMatrix> {
        self.levels.get(p)?.get(&q)
    }

    pub fn cutoffs(&self) -> (usize, usize) {
        (self.max_level, self.max_degree)
    }
}

/// The inclusion of the Hochschild object into the semidirect object.
pub fn inclusion_map(
    hochschild: &CosimplicialObject,
    semidirect: &CosimplicialObject,
) -> Result<CosimplicialMap, CosimplicialError> {
    CosimplicialMap::checked(MapRule::Inclusion, hochschild, semidirect)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratlin::rank;

    fn conv(n: u32) -> Convention {
        Convention::new(n).unwrap()
    }

    fn mono(s: &str, n: u32) -> PoissonMonomial {
        let e = OperadElement::parse(conv(n), s).unwrap();
        assert_eq!(e.terms().len(), 1);
        e.terms().keys().next().unwrap().clone()
    }

    #[test]
    fn hochschild_examples() {
        for n in [4, 5] {
            let c = conv(n);
            let lam = Cell::plain(mono("{1,2}", n));
            let dist = distinguished_elements(c);
            let expected = dist.bracket.compose(1, &dist.product).unwrap();
            let got = coface_cell(&c, ObjectKind::Hochschild, 1, &lam);
            assert_eq!(got.len(), expected.terms().len());
            for (m, x) in expected.terms() {
                assert_eq!(rat(got[&Cell::plain(m.clone())]), *x);
            }
            assert!(codegeneracy_cell(&c, ObjectKind::Hochschild, 1, &lam).is_empty());
            assert!(codegeneracy_cell(&c, ObjectKind::Hochschild, 2, &lam).is_empty());
            let mu = Cell::plain(mono("1·2", n));
            assert_eq!(
                codegeneracy_cell(&c, ObjectKind::Hochschild, 1, &mu),
                CellCombo::from([(Cell::plain(mono("1", n)), 1)])
            );
            assert!(lam.is_normalized());
            assert!(!mu.is_normalized());
        }
    }

    #[test]
    fn semidirect_examples() {
        for n in [4, 5] {
            let c = conv(n);
            let mu = Cell::labeled(mono("1·2", n), vec![Label::Pt, Label::Pt]);
            assert_eq!(
                coface_cell(&c, ObjectKind::Semidirect, 1, &mu),
                CellCombo::from([(Cell::labeled(mono("1·2·3", n), vec![Label::Pt; 3]), 1)])
            );
            let iota_v = Cell::labeled(mono("1", n), vec![Label::V]);
            let d1 = coface_cell(&c, ObjectKind::Semidirect, 1, &iota_v);
            assert_eq!(
                d1,
                CellCombo::from([
                    (Cell::labeled(mono("{1,2}", n), vec![Label::Pt, Label::Pt]), 1),
                    (Cell::labeled(mono("1·2", n), vec![Label::V, Label::Pt]), 1),
                    (Cell::labeled(mono("1·2", n), vec![Label::Pt, Label::V]), 1),
                ])
            );
            assert!(codegeneracy_cell(&c, ObjectKind::Semidirect, 1, &iota_v).is_empty());
            assert!(iota_v.is_normalized());
        }
    }

    #[test]
    fn identities_hold_for_both_parities() {
        for n in [3, 4, 5, 6] {
            let c = conv(n);
            let d = c.bracket_degree();
            for kind in [ObjectKind::Hochschild, ObjectKind::Semidirect] {
                let obj = CosimplicialObject::build(c, kind, 5, 2 * d).unwrap();
                assert!(obj.verify_identities().unwrap() > 0, "{kind} n={n}");
                obj.verify_differential().unwrap();
                let norm = obj.normalize().unwrap();
                norm.verify_differential().unwrap();
                let direct = NormalizedComplex::build(c, kind, 5, 2 * d).unwrap();
                assert!(norm.same_as(&direct), "{kind} n={n}");
            }
        }
    }

    #[test]
    fn inclusion_commutes_and_is_injective() {
        for n in [4, 5] {
            let c = conv(n);
            let d = c.bracket_degree();
            let h = hochschild_object(c, 4, 2 * d).unwrap();
            let s = semidirect_object(c, 4, 2 * d).unwrap();
            let inc = inclusion_map(&h, &s).unwrap();
            for p in 0..=4 {
                for q in h.degrees() {
                    let m = inc.matrix(p, q).unwrap();
                    assert_eq!(rank(m), m.cols());
                }
            }
            let lam = Cell::plain(mono("{1,2}", n));
            assert_eq!(
                MapRule::Inclusion.apply_cell(&lam),
                CellCombo::from([(Cell::labeled(lam.mono.clone(), vec![Label::Pt, Label::Pt]), 1)])
            );
            let id = CosimplicialMap::identity(&h).unwrap();
            let comp = CosimplicialMap::compose(&inc, &id, &h, &s).unwrap();
            assert_eq!(comp.matrix(3, d), inc.matrix(3, d));
            assert!(inclusion_map(&s, &h).is_err());
        }
    }

    #[test]
    fn zero_level_cutoff_is_rejected() {
        assert_eq!(
            hochschild_object(conv(5), 0, 4).unwrap_err(),
            CosimplicialError::InvalidCutoff
        );
    }
}
