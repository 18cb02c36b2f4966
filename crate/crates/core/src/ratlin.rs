//! Exact linear algebra over the rationals.
//!
//! Everything here works with [`BigRational`] entries; there are no
//! tolerances. Matrices are stored column-major as sparse columns because
//! the coface and codegeneracy maps of a cosimplicial object are built one
//! basis element (one column) at a time.
//!
//! Elimination is incremental: vectors are inserted into a [`RowEchelon`],
//! reduced against the pivots found so far, and the new pivot is chosen as
//! the entry of smallest bit size. The echelon is kept fully reduced, so a
//! pivot column is zero in every other row.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

/// The coefficient field.
pub type Rational = BigRational;

/// Shorthand for an integer-valued rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn bit_size(x: &Rational) -> u64 {
    x.numer().bits() + x.denom().bits()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinAlgError {
    #[error("vector is not in the span of the basis")]
    NotInSpan,
    #[error("subspace is not contained in the ambient span")]
    NotSubspace,
    #[error("vectors are linearly dependent")]
    Dependent,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// A sparse vector: sorted `(index, value)` pairs with no stored zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct SparseVector {
    dim: usize,
    entries: Vec<(usize, Rational)>,
}

impl SparseVector {
    pub fn zero(dim: usize) -> Self {
        SparseVector {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn unit(dim: usize, index: usize) -> Self {
        assert!(index < dim, "unit vector index {index} out of range {dim}");
        SparseVector {
            dim,
            entries: vec![(index, Rational::one())],
        }
    }

    /// Builds a vector from arbitrary `(index, value)` pairs; repeated
    /// indices are summed and zeros dropped.
    pub fn from_entries(dim: usize, entries: impl IntoIterator<Item = (usize, Rational)>) -> Self {
        let mut map: BTreeMap<usize, Rational> = BTreeMap::new();
        for (i, v) in entries {
            assert!(i < dim, "index {i} out of range {dim}");
            *map.entry(i).or_insert_with(Rational::zero) += v;
        }
        SparseVector {
            dim,
            entries: map.into_iter().filter(|(_, v)| !v.is_zero()).collect(),
        }
    }

    pub fn from_dense(values: &[Rational]) -> Self {
        SparseVector {
            dim: values.len(),
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, v)| (i, v.clone()))
                .collect(),
        }
    }

    pub fn from_ints(values: &[i64]) -> Self {
        let dense: Vec<Rational> = values.iter().map(|&v| rat(v)).collect();
        Self::from_dense(&dense)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, Rational)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> Rational {
        match self.entries.binary_search_by_key(&index, |(i, _)| *i) {
            Ok(pos) => self.entries[pos].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    pub fn to_dense(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.dim];
        for (i, v) in &self.entries {
            out[*i] = v.clone();
        }
        out
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        SparseVector {
            dim: self.dim,
            entries: self.entries.iter().map(|(i, v)| (*i, v * c)).collect(),
        }
    }

    /// `self + c * other`, merging the two sorted entry lists.
    pub fn add_scaled(&self, c: &Rational, other: &SparseVector) -> SparseVector {
        assert_eq!(self.dim, other.dim, "dimension mismatch in add_scaled");
        if c.is_zero() || other.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some((i, x)), Some((j, y))) => {
                    if i < j {
                        out.push((*i, x.clone()));
                        a.next();
                    } else if j < i {
                        out.push((*j, y * c));
                        b.next();
                    } else {
                        let s = x + y * c;
                        if !s.is_zero() {
                            out.push((*i, s));
                        }
                        a.next();
                        b.next();
                    }
                }
                (Some((i, x)), None) => {
                    out.push((*i, x.clone()));
                    a.next();
                }
                (None, Some((j, y))) => {
                    out.push((*j, y * c));
                    b.next();
                }
                (None, None) => break,
            }
        }
        SparseVector {
            dim: self.dim,
            entries: out,
        }
    }

    pub fn sub(&self, other: &SparseVector) -> SparseVector {
        self.add_scaled(&-Rational::one(), other)
    }

    pub fn add(&self, other: &SparseVector) -> SparseVector {
        self.add_scaled(&Rational::one(), other)
    }
}

impl fmt::Display for SparseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, (i, v)) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}:{v}")?;
        }
        write!(f, "]")
    }
}

/// A sparse rational matrix, stored as a list of sparse columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    columns: Vec<SparseVector>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            columns: vec![SparseVector::zero(rows); cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            rows: n,
            columns: (0..n).map(|i| SparseVector::unit(n, i)).collect(),
        }
    }

    pub fn from_columns(rows: usize, columns: Vec<SparseVector>) -> Self {
        for c in &columns {
            assert_eq!(c.dim(), rows, "column length does not match row count");
        }
        SparseMatrix { rows, columns }
    }

    /// Dense row-major integer input, mostly for tests.
    pub fn from_rows_i64(rows: &[Vec<i64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let columns = (0..ncols)
            .map(|j| {
                SparseVector::from_entries(nrows, rows.iter().enumerate().map(|(i, r)| (i, rat(r[j]))))
            })
            .collect();
        SparseMatrix {
            rows: nrows,
            columns,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &SparseVector {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[SparseVector] {
        &self.columns
    }

    pub fn get(&self, row: usize, col: usize) -> Rational {
        self.columns[col].get(row)
    }

    /// Non-zero entries as `((row, col), value)`, column by column.
    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), &Rational)> + '_ {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(j, c)| c.entries().iter().map(move |(i, v)| ((*i, j), v)))
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(SparseVector::is_zero)
    }

    pub fn mul_vec(&self, v: &SparseVector) -> SparseVector {
        assert_eq!(v.dim(), self.cols(), "matrix-vector dimension mismatch");
        let mut acc = SparseVector::zero(self.rows);
        for (j, c) in v.entries() {
            acc = acc.add_scaled(c, &self.columns[*j]);
        }
        acc
    }

    /// `self * other`.
    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols(), other.rows(), "matrix product dimension mismatch");
        SparseMatrix {
            rows: self.rows,
            columns: other.columns.iter().map(|c| self.mul_vec(c)).collect(),
        }
    }

    pub fn add(&self, other: &SparseMatrix) -> SparseMatrix {
        self.add_scaled(&Rational::one(), other)
    }

    pub fn add_scaled(&self, c: &Rational, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!((self.rows, self.cols()), (other.rows, other.cols()));
        SparseMatrix {
            rows: self.rows,
            columns: self
                .columns
                .iter()
                .zip(&other.columns)
                .map(|(a, b)| a.add_scaled(c, b))
                .collect(),
        }
    }

    pub fn scaled(&self, c: &Rational) -> SparseMatrix {
        SparseMatrix {
            rows: self.rows,
            columns: self.columns.iter().map(|col| col.scaled(c)).collect(),
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut cols: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); self.rows];
        for (j, c) in self.columns.iter().enumerate() {
            for (i, v) in c.entries() {
                cols[*i].push((j, v.clone()));
            }
        }
        let n = self.cols();
        SparseMatrix {
            rows: n,
            columns: cols
                .into_iter()
                .map(|e| SparseVector { dim: n, entries: e })
                .collect(),
        }
    }

    /// Rows as sparse vectors of length `cols`.
    pub fn row_vectors(&self) -> Vec<SparseVector> {
        self.transpose().columns
    }
}

/// A fully reduced echelon form built by incremental insertion.
///
/// Every stored row has a pivot entry equal to one, and each pivot column is
/// zero in all other rows. Each row also records its expression as a
/// combination of the inserted vectors.
#[derive(Clone, Debug)]
pub struct RowEchelon {
    dim: usize,
    rows: Vec<SparseVector>,
    combos: Vec<SparseVector>,
    pivots: Vec<usize>,
    pivot_row: HashMap<usize, usize>,
    inserted: usize,
    track: bool,
}

impl RowEchelon {
    pub fn new(dim: usize) -> Self {
        RowEchelon {
            dim,
            rows: Vec::new(),
            combos: Vec::new(),
            pivots: Vec::new(),
            pivot_row: HashMap::new(),
            inserted: 0,
            track: false,
        }
    }

    /// Like [`RowEchelon::new`] but also records, for each row, which
    /// combination of inserted vectors produced it.
    pub fn with_tracking(dim: usize, capacity: usize) -> Self {
        let mut e = Self::new(dim);
        e.track = true;
        e.combos.reserve(capacity);
        e
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn rows(&self) -> &[SparseVector] {
        &self.rows
    }

    /// Splits `v` into pivot coefficients and a remainder with zero entries
    /// in every pivot column.
    pub fn reduce(&self, v: &SparseVector) -> (Vec<(usize, Rational)>, SparseVector) {
        assert_eq!(v.dim(), self.dim, "echelon dimension mismatch");
        let coeffs: Vec<(usize, Rational)> = v
            .entries()
            .iter()
            .filter_map(|(i, x)| self.pivot_row.get(i).map(|&r| (r, x.clone())))
            .collect();
        let mut rem = v.clone();
        for (r, c) in &coeffs {
            rem = rem.add_scaled(&-c, &self.rows[*r]);
        }
        (coeffs, rem)
    }

    pub fn contains(&self, v: &SparseVector) -> bool {
        self.reduce(v).1.is_zero()
    }

    /// Inserts a vector; returns `true` when it raised the rank.
    pub fn insert(&mut self, v: &SparseVector) -> bool {
        let index = self.inserted;
        self.inserted += 1;
        let (coeffs, rem) = self.reduce(v);
        if rem.is_zero() {
            return false;
        }
        let combo = if self.track {
            let mut c = SparseVector::unit(index + 1, index);
            for (r, x) in &coeffs {
                c = grow(&c, index + 1).add_scaled(&-x, &grow(&self.combos[*r], index + 1));
            }
            Some(c)
        } else {
            None
        };
        let (pcol, pval) = rem
            .entries()
            .iter()
            .min_by(|(i, a), (j, b)| bit_size(a).cmp(&bit_size(b)).then(i.cmp(j)))
            .map(|(i, x)| (*i, x.clone()))
            .expect("non-zero remainder");
        let inv = pval.recip();
        let row = rem.scaled(&inv);
        let combo = combo.map(|c| c.scaled(&inv));
        for r in 0..self.rows.len() {
            let x = self.rows[r].get(pcol);
            if !x.is_zero() {
                self.rows[r] = self.rows[r].add_scaled(&-&x, &row);
                if let Some(c) = &combo {
                    let n = c.dim();
                    self.combos[r] = grow(&self.combos[r], n).add_scaled(&-&x, c);
                }
            }
        }
        self.pivot_row.insert(pcol, self.rows.len());
        self.pivots.push(pcol);
        self.rows.push(row);
        if let Some(c) = combo {
            self.combos.push(c);
        }
        true
    }

    /// Basis of the null space of the row span, i.e. of all `x` with
    /// `row · x = 0` for every row.
    pub fn orthogonal_kernel(&self) -> Vec<SparseVector> {
        let mut free: Vec<usize> = (0..self.dim).filter(|c| !self.pivot_row.contains_key(c)).collect();
        free.sort_unstable();
        // column f of each row, gathered once
        let mut by_col: HashMap<usize, Vec<(usize, Rational)>> = HashMap::new();
        for (r, row) in self.rows.iter().enumerate() {
            for (c, x) in row.entries() {
                if !self.pivot_row.contains_key(c) {
                    by_col.entry(*c).or_default().push((self.pivots[r], x.clone()));
                }
            }
        }
        free.into_iter()
            .map(|f| {
                let mut entries = vec![(f, Rational::one())];
                if let Some(list) = by_col.get(&f) {
                    entries.extend(list.iter().map(|(p, x)| (*p, -x)));
                }
                SparseVector::from_entries(self.dim, entries)
            })
            .collect()
    }
}

fn grow(v: &SparseVector, dim: usize) -> SparseVector {
    SparseVector {
        dim,
        entries: v.entries.clone(),
    }
}

/// A list of linearly independent vectors in a common ambient space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubspaceBasis {
    ambient_dim: usize,
    vectors: Vec<SparseVector>,
}

impl SubspaceBasis {
    /// Checks independence by rank.
    pub fn new(ambient_dim: usize, vectors: Vec<SparseVector>) -> Result<Self, LinAlgError> {
        let mut ech = RowEchelon::new(ambient_dim);
        for v in &vectors {
            if v.dim() != ambient_dim {
                return Err(LinAlgError::DimensionMismatch {
                    expected: ambient_dim,
                    found: v.dim(),
                });
            }
            if !ech.insert(v) {
                return Err(LinAlgError::Dependent);
            }
        }
        Ok(SubspaceBasis {
            ambient_dim,
            vectors,
        })
    }

    /// Skips the independence check; callers guarantee it.
    pub fn new_unchecked(ambient_dim: usize, vectors: Vec<SparseVector>) -> Self {
        SubspaceBasis {
            ambient_dim,
            vectors,
        }
    }

    pub fn empty(ambient_dim: usize) -> Self {
        SubspaceBasis {
            ambient_dim,
            vectors: Vec::new(),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        SubspaceBasis {
            ambient_dim,
            vectors: (0..ambient_dim).map(|i| SparseVector::unit(ambient_dim, i)).collect(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[SparseVector] {
        &self.vectors
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// `Σ cᵢ bᵢ`.
    pub fn combine(&self, coeffs: &[Rational]) -> SparseVector {
        assert_eq!(coeffs.len(), self.dim(), "coefficient count mismatch");
        let mut acc = SparseVector::zero(self.ambient_dim);
        for (c, b) in coeffs.iter().zip(&self.vectors) {
            acc = acc.add_scaled(c, b);
        }
        acc
    }
}

pub fn rank(m: &SparseMatrix) -> usize {
    let mut ech = RowEchelon::new(m.cols());
    for row in m.row_vectors() {
        ech.insert(&row);
    }
    ech.rank()
}

/// Basis of `ker m`; it has `cols − rank(m)` vectors.
pub fn kernel_basis(m: &SparseMatrix) -> SubspaceBasis {
    let mut ech = RowEchelon::new(m.cols());
    for row in m.row_vectors() {
        ech.insert(&row);
    }
    SubspaceBasis::new_unchecked(m.cols(), ech.orthogonal_kernel())
}

/// Basis of the column space of `m`, chosen greedily among its columns.
pub fn image_basis(m: &SparseMatrix) -> SubspaceBasis {
    let mut ech = RowEchelon::new(m.rows());
    let mut out = Vec::new();
    for c in m.columns() {
        if ech.insert(c) {
            out.push(c.clone());
        }
    }
    SubspaceBasis::new_unchecked(m.rows(), out)
}

/// Dimension of `total / sub` together with representatives of a basis of
/// the quotient, picked in order from `total`.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub dim: usize,
    pub representatives: Vec<SparseVector>,
}

pub fn quotient(sub: &SubspaceBasis, total: &SubspaceBasis) -> Result<Quotient, LinAlgError> {
    if sub.ambient_dim() != total.ambient_dim() {
        return Err(LinAlgError::DimensionMismatch {
            expected: total.ambient_dim(),
            found: sub.ambient_dim(),
        });
    }
    let mut tot = RowEchelon::new(total.ambient_dim());
    for v in total.vectors() {
        tot.insert(v);
    }
    if sub.vectors().iter().any(|v| !tot.contains(v)) {
        return Err(LinAlgError::NotSubspace);
    }
    let mut ech = RowEchelon::new(total.ambient_dim());
    for v in sub.vectors() {
        ech.insert(v);
    }
    let base = ech.rank();
    let mut representatives = Vec::new();
    for v in total.vectors() {
        if ech.insert(v) {
            representatives.push(v.clone());
        }
    }
    Ok(Quotient {
        dim: ech.rank() - base,
        representatives,
    })
}

pub fn quotient_dim(sub: &SubspaceBasis, total: &SubspaceBasis) -> Result<usize, LinAlgError> {
    quotient(sub, total).map(|q| q.dim)
}

/// Solves `v = Σ cᵢ bᵢ` repeatedly against a fixed basis.
#[derive(Clone, Debug)]
pub struct SpanSolver {
    len: usize,
    ech: RowEchelon,
}

impl SpanSolver {
    pub fn new(basis: &SubspaceBasis) -> Self {
        let mut ech = RowEchelon::with_tracking(basis.ambient_dim(), basis.dim());
        for v in basis.vectors() {
            ech.insert(v);
        }
        SpanSolver {
            len: basis.dim(),
            ech,
        }
    }

    pub fn solve(&self, v: &SparseVector) -> Result<Vec<Rational>, LinAlgError> {
        if v.dim() != self.ech.dim() {
            return Err(LinAlgError::DimensionMismatch {
                expected: self.ech.dim(),
                found: v.dim(),
            });
        }
        let (coeffs, rem) = self.ech.reduce(v);
        if !rem.is_zero() {
            return Err(LinAlgError::NotInSpan);
        }
        let mut out = vec![Rational::zero(); self.len];
        for (r, c) in coeffs {
            for (i, x) in self.ech.combos[r].entries() {
                out[*i] += &c * x;
            }
        }
        Ok(out)
    }

    pub fn contains(&self, v: &SparseVector) -> bool {
        self.ech.contains(v)
    }
}

pub fn coordinates(v: &SparseVector, basis: &SubspaceBasis) -> Result<Vec<Rational>, LinAlgError> {
    SpanSolver::new(basis).solve(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&SparseMatrix::zeros(3, 3)), 0);
        assert_eq!(rank(&SparseMatrix::identity(4)), 4);
        assert_eq!(rank(&SparseMatrix::from_rows_i64(&[vec![1, 2], vec![2, 4]])), 1);
    }

    #[test]
    fn kernel_examples() {
        assert!(kernel_basis(&SparseMatrix::identity(3)).is_empty());
        assert_eq!(kernel_basis(&SparseMatrix::zeros(2, 5)).dim(), 5);
        let k = kernel_basis(&SparseMatrix::from_rows_i64(&[vec![1, 1]]));
        assert_eq!(k.dim(), 1);
        let v = &k.vectors()[0];
        // proportional to (1, -1)
        assert_eq!(v.get(0), -v.get(1));
        assert!(!v.is_zero());
    }

    #[test]
    fn quotient_examples() {
        let total = SubspaceBasis::new(
            3,
            vec![SparseVector::from_ints(&[1, 1, 0]), SparseVector::from_ints(&[0, 0, 1])],
        )
        .unwrap();
        assert_eq!(quotient_dim(&total, &total).unwrap(), 0);
        let full = SubspaceBasis::full(3);
        assert_eq!(quotient_dim(&SubspaceBasis::empty(3), &full).unwrap(), 3);
        let sub = SubspaceBasis::new(3, vec![SparseVector::from_ints(&[1, 1, 0])]).unwrap();
        let q = quotient(&sub, &total).unwrap();
        assert_eq!(q.dim, 1);
        assert_eq!(q.representatives, vec![SparseVector::from_ints(&[0, 0, 1])]);
    }

    #[test]
    fn quotient_rejects_non_subspace() {
        let sub = SubspaceBasis::new(2, vec![SparseVector::from_ints(&[1, 0])]).unwrap();
        let total = SubspaceBasis::new(2, vec![SparseVector::from_ints(&[0, 1])]).unwrap();
        assert_eq!(quotient(&sub, &total).unwrap_err(), LinAlgError::NotSubspace);
    }

    #[test]
    fn coordinate_examples() {
        let basis = SubspaceBasis::new(
            3,
            vec![SparseVector::from_ints(&[1, 2, 0]), SparseVector::from_ints(&[0, 1, 1])],
        )
        .unwrap();
        assert_eq!(coordinates(&basis.vectors()[0], &basis).unwrap(), ints(&[1, 0]));
        assert_eq!(coordinates(&SparseVector::zero(3), &basis).unwrap(), ints(&[0, 0]));
        let v = basis.combine(&ints(&[2, -3]));
        assert_eq!(coordinates(&v, &basis).unwrap(), ints(&[2, -3]));
        assert_eq!(
            coordinates(&SparseVector::from_ints(&[0, 0, 1]), &basis).unwrap_err(),
            LinAlgError::NotInSpan
        );
    }

    #[test]
    fn dependent_basis_rejected() {
        let r = SubspaceBasis::new(
            2,
            vec![SparseVector::from_ints(&[1, 2]), SparseVector::from_ints(&[2, 4])],
        );
        assert_eq!(r.unwrap_err(), LinAlgError::Dependent);
    }

    fn small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            prop::collection::vec(prop::collection::vec(-3i64..4, c), r)
        })
    }

    proptest! {
        #[test]
        fn rank_of_transpose(rows in small_matrix()) {
            let m = SparseMatrix::from_rows_i64(&rows);
            prop_assert_eq!(rank(&m), rank(&m.transpose()));
        }

        #[test]
        fn rank_nullity(rows in small_matrix()) {
            let m = SparseMatrix::from_rows_i64(&rows);
            let k = kernel_basis(&m);
            prop_assert_eq!(rank(&m) + k.dim(), m.cols());
            for v in k.vectors() {
                prop_assert!(m.mul_vec(v).is_zero());
            }
        }

        #[test]
        fn coordinates_invert_combination(rows in small_matrix(), coeffs in prop::collection::vec(-5i64..6, 6)) {
            let m = SparseMatrix::from_rows_i64(&rows);
            let basis = image_basis(&m);
            let c: Vec<Rational> = coeffs.iter().take(basis.dim()).map(|&x| rat(x)).collect();
            prop_assume!(c.len() == basis.dim());
            let v = basis.combine(&c);
            prop_assert_eq!(coordinates(&v, &basis).unwrap(), c);
        }
    }
}
