//! The homology operad of the little n-discs (the n-Poisson operad).
//!
//! An element of arity `k` is an operation on inputs `x₁,…,x_k` of degree 0,
//! built from a commutative product `x₁·x₂` (degree 0) and a bracket
//! `{x₁,x₂}` of degree `n−1`. Operations are read in prefix form: every
//! bracket symbol carries degree `n−1` and sits in front of its two
//! arguments. All signs (composition, rewriting to normal form) are Koszul
//! signs of permutations of these graded symbols; when `n` is odd every
//! degree is even and the signs disappear.
//!
//! The basis of `O(k)` is indexed by a set partition of `{1,…,k}` together
//! with one left-normed bracket word per block whose first letter is the
//! minimum of the block:
//!
//! ```text
//! {{1,3},2}·{4,5}·6
//! ```
//!
//! Summing over partitions gives `Π (|B|−1)!`, hence `k!` in total.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ratlin::{rat, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OperadError {
    #[error("ambient dimension n = {0} must be at least 2")]
    InvalidDimension(u32),
    #[error("slot {slot} out of range for arity {arity}")]
    SlotOutOfRange { slot: usize, arity: usize },
    #[error("permutation of size {perm} applied to element of arity {arity}")]
    PermutationSize { perm: usize, arity: usize },
    #[error("not a permutation of 1..{0}")]
    NotAPermutation(usize),
    #[error("leaf labels must be exactly 1..k, found {0:?}")]
    BadLabels(Vec<usize>),
    #[error("expression is not homogeneous in degree")]
    Inhomogeneous,
    #[error("elements use different conventions")]
    ConventionMismatch,
    #[error("arity or degree mismatch in sum")]
    ShapeMismatch,
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

/// Identifier of the sign rules in force; written into every serialized
/// table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SignVersion {
    /// Prefix-notation Koszul signs; bracket symmetric under the swap by
    /// `(−1)ⁿ`.
    #[serde(rename = "koszul-prefix-v1")]
    KoszulPrefixV1,
}

impl SignVersion {
    pub fn as_str(&self) -> &'static str {
        match self {
            SignVersion::KoszulPrefixV1 => "koszul-prefix-v1",
        }
    }
}

impl fmt::Display for SignVersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ambient dimension `n` and sign rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Convention {
    n: u32,
    sign_version: SignVersion,
}

impl Convention {
    pub fn new(n: u32) -> Result<Self, OperadError> {
        Self::with_signs(n, SignVersion::KoszulPrefixV1)
    }

    pub fn with_signs(n: u32, sign_version: SignVersion) -> Result<Self, OperadError> {
        if n < 2 {
            return Err(OperadError::InvalidDimension(n));
        }
        Ok(Convention { n, sign_version })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn sign_version(&self) -> SignVersion {
        self.sign_version
    }

    /// Degree `n−1` of the bracket.
    pub fn bracket_degree(&self) -> usize {
        (self.n - 1) as usize
    }

    /// Whether the bracket has odd degree (n even).
    pub fn odd_bracket(&self) -> bool {
        self.n.is_multiple_of(2)
    }

    /// `{x₂,x₁} = swap_sign · {x₁,x₂}`.
    fn swap_sign(&self) -> i64 {
        if self.n.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }
}

/// A left-normed bracket word `{…{{a₁,a₂},a₃}…,a_m}` with `a₁` minimal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LieMonomial(Vec<usize>);

impl LieMonomial {
    /// Accepts only words already in normal form.
    pub fn new(word: Vec<usize>) -> Option<Self> {
        let first = *word.first()?;
        if word.iter().skip(1).all(|&x| x > first) && !has_repeats(&word) {
            Some(LieMonomial(word))
        } else {
            None
        }
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min_label(&self) -> usize {
        self.0[0]
    }

    /// Number of bracket symbols, `len − 1`.
    pub fn brackets(&self) -> usize {
        self.0.len() - 1
    }
}

fn has_repeats(word: &[usize]) -> bool {
    let mut w = word.to_vec();
    w.sort_unstable();
    w.windows(2).any(|p| p[0] == p[1])
}

impl fmt::Display for LieMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = &self.0;
        for _ in 1..w.len() {
            f.write_str("{")?;
        }
        write!(f, "{}", w[0])?;
        for x in &w[1..] {
            write!(f, ",{x}}}")?;
        }
        Ok(())
    }
}

/// A product of bracket words over a set partition, blocks ordered by their
/// minimal label. The empty product is the arity-0 unit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PoissonMonomial {
    blocks: Vec<LieMonomial>,
}

impl PoissonMonomial {
    pub fn unit() -> Self {
        PoissonMonomial { blocks: Vec::new() }
    }

    /// Blocks must have distinct letters; they are put in order here.
    /// Returns `None` if the blocks overlap or a word is not normal.
    pub fn from_blocks(mut blocks: Vec<LieMonomial>) -> Option<Self> {
        blocks.sort_by_key(|b| b.min_label());
        let all: Vec<usize> = blocks.iter().flat_map(|b| b.0.iter().copied()).collect();
        if has_repeats(&all) {
            return None;
        }
        Some(PoissonMonomial { blocks })
    }

    pub fn blocks(&self) -> &[LieMonomial] {
        &self.blocks
    }

    pub fn arity(&self) -> usize {
        self.blocks.iter().map(LieMonomial::len).sum()
    }

    pub fn brackets(&self) -> usize {
        self.blocks.iter().map(LieMonomial::brackets).sum()
    }

    pub fn degree(&self, conv: &Convention) -> usize {
        conv.bracket_degree() * self.brackets()
    }

    /// Labels that form a block on their own.
    pub fn singletons(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().filter(|b| b.len() == 1).map(|b| b.0[0])
    }

    fn to_expr(&self) -> Expr {
        let mut it = self.blocks.iter().rev();
        let Some(last) = it.next() else {
            return Expr::Unit;
        };
        let mut acc = comb_expr(last.letters());
        for b in it {
            acc = Expr::Mul(Box::new(comb_expr(b.letters())), Box::new(acc));
        }
        acc
    }

    fn relabeled(&self, f: impl Fn(usize) -> usize) -> Expr {
        self.to_expr().relabel(&f)
    }
}

fn comb_expr(word: &[usize]) -> Expr {
    let mut acc = Expr::Leaf(word[0]);
    for &x in &word[1..] {
        acc = Expr::Bracket(Box::new(acc), Box::new(Expr::Leaf(x)));
    }
    acc
}

impl fmt::Display for PoissonMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.blocks.is_empty() {
            return f.write_str("1");
        }
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str("·")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// A formal product/bracket expression, not yet in normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Leaf(usize),
    /// The arity-0 unit.
    Unit,
    Mul(Box<Expr>, Box<Expr>),
    Bracket(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn bracket(a: Expr, b: Expr) -> Expr {
        Expr::Bracket(Box::new(a), Box::new(b))
    }

    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<usize>) {
        match self {
            Expr::Leaf(a) => out.push(*a),
            Expr::Unit => {}
            Expr::Mul(a, b) | Expr::Bracket(a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
        }
    }

    fn relabel(self, f: &impl Fn(usize) -> usize) -> Expr {
        match self {
            Expr::Leaf(a) => Expr::Leaf(f(a)),
            Expr::Unit => Expr::Unit,
            Expr::Mul(a, b) => Expr::mul(a.relabel(f), b.relabel(f)),
            Expr::Bracket(a, b) => Expr::bracket(a.relabel(f), b.relabel(f)),
        }
    }

    /// Replaces leaf `target` by `sub`.
    fn substitute(self, target: usize, sub: &Expr) -> Expr {
        match self {
            Expr::Leaf(a) if a == target => sub.clone(),
            Expr::Leaf(a) => Expr::Leaf(a),
            Expr::Unit => Expr::Unit,
            Expr::Mul(a, b) => Expr::mul(a.substitute(target, sub), b.substitute(target, sub)),
            Expr::Bracket(a, b) => {
                Expr::bracket(a.substitute(target, sub), b.substitute(target, sub))
            }
        }
    }

    /// Bracket symbols appearing strictly after leaf `target` in prefix order.
    fn brackets_after(&self, target: usize) -> usize {
        fn walk(e: &Expr, target: usize, seen: &mut bool, count: &mut usize) {
            match e {
                Expr::Leaf(a) => {
                    if *a == target {
                        *seen = true;
                    }
                }
                Expr::Unit => {}
                Expr::Mul(a, b) => {
                    walk(a, target, seen, count);
                    walk(b, target, seen, count);
                }
                Expr::Bracket(a, b) => {
                    if *seen {
                        *count += 1;
                    }
                    walk(a, target, seen, count);
                    walk(b, target, seen, count);
                }
            }
        }
        let (mut seen, mut count) = (false, 0);
        walk(self, target, &mut seen, &mut count);
        count
    }
}

impl FromStr for Expr {
    type Err = OperadError;

    /// Grammar: `product := factor (('·' | '*') factor)*`,
    /// `factor := label | 'u' | '{' product ',' product '}' | '(' product ')'`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser { src: s, pos: 0 };
        let e = p.product()?;
        p.skip_ws();
        if p.pos != s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> OperadError {
        OperadError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<(), OperadError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.err(&format!("expected '{c}'")))
        }
    }

    fn product(&mut self) -> Result<Expr, OperadError> {
        let mut factors = vec![self.factor()?];
        loop {
            self.skip_ws();
            match self.peek() {
                Some(c @ ('·' | '*' | '.')) => {
                    self.pos += c.len_utf8();
                    factors.push(self.factor()?);
                }
                _ => break,
            }
        }
        let mut it = factors.into_iter().rev();
        let mut acc = it.next().expect("at least one factor");
        for f in it {
            acc = Expr::mul(f, acc);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr, OperadError> {
        self.skip_ws();
        match self.peek() {
            Some('{') => {
                self.pos += 1;
                let a = self.product()?;
                self.expect(',')?;
                let b = self.product()?;
                self.expect('}')?;
                Ok(Expr::bracket(a, b))
            }
            Some('(') => {
                self.pos += 1;
                let a = self.product()?;
                self.expect(')')?;
                Ok(a)
            }
            Some('u') => {
                self.pos += 1;
                Ok(Expr::Unit)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let v: usize = self.src[start..self.pos].parse().map_err(|_| self.err("bad label"))?;
                if v == 0 {
                    return Err(self.err("labels start at 1"));
                }
                Ok(Expr::Leaf(v))
            }
            _ => Err(self.err("expected a label, 'u', '{' or '('")),
        }
    }
}

type Combo = BTreeMap<PoissonMonomial, i64>;

fn add_to(map: &mut Combo, key: PoissonMonomial, c: i64) {
    if c == 0 {
        return;
    }
    match map.entry(key) {
        std::collections::btree_map::Entry::Occupied(mut e) => {
            *e.get_mut() += c;
            if *e.get() == 0 {
                e.remove();
            }
        }
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(c);
        }
    }
}

fn parity(b: bool) -> i64 {
    if b {
        -1
    } else {
        1
    }
}

/// Sorts blocks by minimal label, returning the Koszul sign.
fn sort_blocks(conv: &Convention, mut blocks: Vec<LieMonomial>) -> (i64, PoissonMonomial) {
    let odd = conv.odd_bracket();
    let mut sign = 1;
    // insertion sort; blocks have distinct minima
    for i in 1..blocks.len() {
        let mut j = i;
        while j > 0 && blocks[j - 1].min_label() > blocks[j].min_label() {
            if odd && blocks[j - 1].brackets() % 2 == 1 && blocks[j].brackets() % 2 == 1 {
                sign = -sign;
            }
            blocks.swap(j - 1, j);
            j -= 1;
        }
    }
    (sign, PoissonMonomial { blocks })
}

/// Bracket of two bracket words over disjoint label sets, expanded in the
/// left-normed basis.
fn lie_bracket(conv: &Convention, a: &[usize], b: &[usize], coeff: i64, out: &mut BTreeMap<Vec<usize>, i64>) {
    let odd = conv.odd_bracket();
    let pa = odd && (a.len() - 1) % 2 == 1;
    let pb = odd && (b.len() - 1) % 2 == 1;
    if b[0] < a[0] {
        let s = conv.swap_sign() * parity(pa && pb);
        lie_bracket(conv, b, a, coeff * s, out);
        return;
    }
    if b.len() == 1 {
        let mut w = a.to_vec();
        w.push(b[0]);
        *out.entry(w).or_insert(0) += coeff;
        return;
    }
    let (head, c) = (&b[..b.len() - 1], b[b.len() - 1]);
    // {A,{B',c}} = (−1)^{|A|d+d} {{A,B'},c} − (−1)^{|A|d} {{A,c},B'}
    let mut inner = BTreeMap::new();
    lie_bracket(conv, a, head, 1, &mut inner);
    let s1 = parity(pa ^ odd);
    for (mut w, x) in inner {
        if x != 0 {
            w.push(c);
            *out.entry(w).or_insert(0) += coeff * s1 * x;
        }
    }
    let mut ac = a.to_vec();
    ac.push(c);
    lie_bracket(conv, &ac, head, -coeff * parity(pa), out);
}

fn bracket_monomials(conv: &Convention, p: &PoissonMonomial, q: &PoissonMonomial, coeff: i64, out: &mut Combo) {
    let odd = conv.odd_bracket();
    let deg = |b: &LieMonomial| odd && b.brackets() % 2 == 1;
    for (i, pi) in p.blocks.iter().enumerate() {
        for (j, qj) in q.blocks.iter().enumerate() {
            // β moves past P_<i; Q_j moves left past P_>i and Q_<j
            let mut s = odd && p.blocks[..i].iter().filter(|b| deg(b)).count() % 2 == 1;
            if deg(qj) {
                let passed = p.blocks[i + 1..].iter().filter(|b| deg(b)).count()
                    + q.blocks[..j].iter().filter(|b| deg(b)).count();
                s ^= passed % 2 == 1;
            }
            let mut lie = BTreeMap::new();
            lie_bracket(conv, pi.letters(), qj.letters(), 1, &mut lie);
            for (w, x) in lie {
                if x == 0 {
                    continue;
                }
                let mut blocks = Vec::with_capacity(p.blocks.len() + q.blocks.len() - 1);
                blocks.extend_from_slice(&p.blocks[..i]);
                blocks.push(LieMonomial(w));
                blocks.extend_from_slice(&p.blocks[i + 1..]);
                blocks.extend_from_slice(&q.blocks[..j]);
                blocks.extend_from_slice(&q.blocks[j + 1..]);
                let (t, m) = sort_blocks(conv, blocks);
                add_to(out, m, coeff * parity(s) * t * x);
            }
        }
    }
}

/// Rewrites an expression into the monomial basis with integer coefficients.
pub fn normalize(conv: &Convention, e: &Expr) -> BTreeMap<PoissonMonomial, i64> {
    match e {
        Expr::Leaf(a) => BTreeMap::from([(
            PoissonMonomial {
                blocks: vec![LieMonomial(vec![*a])],
            },
            1,
        )]),
        Expr::Unit => BTreeMap::from([(PoissonMonomial::unit(), 1)]),
        Expr::Mul(a, b) => {
            let (na, nb) = (normalize(conv, a), normalize(conv, b));
            let mut out = Combo::new();
            for (p, x) in &na {
                for (q, y) in &nb {
                    let blocks = p.blocks.iter().chain(&q.blocks).cloned().collect();
                    let (s, m) = sort_blocks(conv, blocks);
                    add_to(&mut out, m, s * x * y);
                }
            }
            out
        }
        Expr::Bracket(a, b) => {
            let (na, nb) = (normalize(conv, a), normalize(conv, b));
            let mut out = Combo::new();
            for (p, x) in &na {
                for (q, y) in &nb {
                    bracket_monomials(conv, p, q, x * y, &mut out);
                }
            }
            out
        }
    }
}

/// An exact rational combination of monomials of one arity and degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperadElement {
    conv: Convention,
    arity: usize,
    degree: usize,
    terms: BTreeMap<PoissonMonomial, Rational>,
}

impl OperadElement {
    pub fn zero(conv: Convention, arity: usize, degree: usize) -> Self {
        OperadElement {
            conv,
            arity,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_monomial(conv: Convention, m: PoissonMonomial) -> Self {
        let (arity, degree) = (m.arity(), m.degree(&conv));
        OperadElement {
            conv,
            arity,
            degree,
            terms: BTreeMap::from([(m, Rational::one())]),
        }
    }

    /// Builds an element from a linear combination of monomials; all must
    /// share arity and degree.
    pub fn from_terms(
        conv: Convention,
        arity: usize,
        degree: usize,
        terms: impl IntoIterator<Item = (PoissonMonomial, Rational)>,
    ) -> Result<Self, OperadError> {
        let mut out = Self::zero(conv, arity, degree);
        for (m, c) in terms {
            if m.arity() != arity || m.degree(&conv) != degree {
                return Err(OperadError::ShapeMismatch);
            }
            out.add_term(m, c);
        }
        Ok(out)
    }

    /// Normalizes an expression whose leaves are exactly `1..k`.
    pub fn from_expr(conv: Convention, e: &Expr) -> Result<Self, OperadError> {
        let mut leaves = e.leaves();
        leaves.sort_unstable();
        let k = leaves.len();
        if leaves.iter().enumerate().any(|(i, &l)| l != i + 1) {
            return Err(OperadError::BadLabels(leaves));
        }
        let combo = normalize(&conv, e);
        let degree = match combo.keys().next() {
            Some(m) => m.degree(&conv),
            None => expr_degree(&conv, e).ok_or(OperadError::Inhomogeneous)?,
        };
        if combo.keys().any(|m| m.degree(&conv) != degree) {
            return Err(OperadError::Inhomogeneous);
        }
        Ok(Self::from_int_combo(conv, k, degree, combo))
    }

    pub fn parse(conv: Convention, s: &str) -> Result<Self, OperadError> {
        Self::from_expr(conv, &s.parse()?)
    }

    fn from_int_combo(conv: Convention, arity: usize, degree: usize, combo: Combo) -> Self {
        OperadElement {
            conv,
            arity,
            degree,
            terms: combo
                .into_iter()
                .filter(|(_, c)| *c != 0)
                .map(|(m, c)| (m, rat(c)))
                .collect(),
        }
    }

    pub fn convention(&self) -> Convention {
        self.conv
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &BTreeMap<PoissonMonomial, Rational> {
        &self.terms
    }

    pub fn coefficient(&self, m: &PoissonMonomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, m: PoissonMonomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let remove = {
            let e = self.terms.entry(m.clone()).or_insert_with(Rational::zero);
            *e += c;
            e.is_zero()
        };
        if remove {
            self.terms.remove(&m);
        }
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.conv, self.arity, self.degree);
        for (m, x) in &self.terms {
            out.add_term(m.clone(), x * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, OperadError> {
        self.add_scaled(&Rational::one(), other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, OperadError> {
        self.add_scaled(&-Rational::one(), other)
    }

    pub fn add_scaled(&self, c: &Rational, other: &Self) -> Result<Self, OperadError> {
        if self.conv != other.conv {
            return Err(OperadError::ConventionMismatch);
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() && (self.arity, self.degree) != (other.arity, other.degree) {
            return Ok(other.scaled(c));
        }
        if (self.arity, self.degree) != (other.arity, other.degree) {
            return Err(OperadError::ShapeMismatch);
        }
        let mut out = self.clone();
        for (m, x) in &other.terms {
            out.add_term(m.clone(), x * c);
        }
        Ok(out)
    }

    /// Partial composition `self ∘ᵢ other` (slots are 1-based).
    pub fn compose(&self, i: usize, other: &Self) -> Result<Self, OperadError> {
        if self.conv != other.conv {
            return Err(OperadError::ConventionMismatch);
        }
        if i == 0 || i > self.arity {
            return Err(OperadError::SlotOutOfRange {
                slot: i,
                arity: self.arity,
            });
        }
        let conv = self.conv;
        let arity = self.arity + other.arity - 1;
        let degree = self.degree + other.degree;
        let mut acc = BTreeMap::<PoissonMonomial, Rational>::new();
        for (x, a) in &self.terms {
            for (y, b) in &other.terms {
                let ab = a * b;
                for (m, c) in compose_monomials(&conv, x, i, y) {
                    let e = acc.entry(m).or_insert_with(Rational::zero);
                    *e += &ab * rat(c);
                }
            }
        }
        acc.retain(|_, v| !v.is_zero());
        Ok(OperadElement {
            conv,
            arity,
            degree,
            terms: acc,
        })
    }

    /// Left action relabelling input `j` as `perm[j−1]`.
    pub fn sym_action(&self, perm: &[usize]) -> Result<Self, OperadError> {
        if perm.len() != self.arity {
            return Err(OperadError::PermutationSize {
                perm: perm.len(),
                arity: self.arity,
            });
        }
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            if p == 0 || p > perm.len() || seen[p - 1] {
                return Err(OperadError::NotAPermutation(perm.len()));
            }
            seen[p - 1] = true;
        }
        let mut acc = BTreeMap::<PoissonMonomial, Rational>::new();
        for (m, a) in &self.terms {
            let e = m.relabeled(|j| perm[j - 1]);
            for (mm, c) in normalize(&self.conv, &e) {
                *acc.entry(mm).or_insert_with(Rational::zero) += a * rat(c);
            }
        }
        acc.retain(|_, v| !v.is_zero());
        Ok(OperadElement {
            conv: self.conv,
            arity: self.arity,
            degree: self.degree,
            terms: acc,
        })
    }

    /// Total degree of the desuspended Hochschild element, `q − k`.
    pub fn hochschild_degree(&self) -> i64 {
        self.degree as i64 - self.arity as i64
    }
}

fn expr_degree(conv: &Convention, e: &Expr) -> Option<usize> {
    Some(match e {
        Expr::Leaf(_) | Expr::Unit => 0,
        Expr::Mul(a, b) => expr_degree(conv, a)? + expr_degree(conv, b)?,
        Expr::Bracket(a, b) => expr_degree(conv, a)? + expr_degree(conv, b)? + conv.bracket_degree(),
    })
}

impl fmt::Display for OperadElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c < &Rational::zero();
            let mag = if neg { -c } else { c.clone() };
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if !mag.is_one() {
                write!(f, "{mag}*")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

/// `x ∘ᵢ y` on basis monomials, as an integer combination.
pub fn compose_monomials(
    conv: &Convention,
    x: &PoissonMonomial,
    i: usize,
    y: &PoissonMonomial,
) -> BTreeMap<PoissonMonomial, i64> {
    let l = y.arity();
    const HOLE: usize = usize::MAX;
    let xe = x.relabeled(|j| match j.cmp(&i) {
        std::cmp::Ordering::Less => j,
        std::cmp::Ordering::Equal => HOLE,
        std::cmp::Ordering::Greater => j + l - 1,
    });
    let sign = if conv.odd_bracket() && y.brackets() % 2 == 1 && xe.brackets_after(HOLE) % 2 == 1 {
        -1
    } else {
        1
    };
    let ye = y.relabeled(|j| j + i - 1);
    let e = xe.substitute(HOLE, &ye);
    let mut out = normalize(conv, &e);
    if sign < 0 {
        for v in out.values_mut() {
            *v = -*v;
        }
    }
    out
}

/// The basis monomials of arity `k` and degree `q`, in canonical order.
pub fn basis(conv: &Convention, k: usize, q: usize) -> Vec<PoissonMonomial> {
    monomials_with_blocks(conv, k, q, 1)
}

/// Basis monomials of arity `k` and degree `q` without singleton blocks.
pub fn basis_without_singletons(conv: &Convention, k: usize, q: usize) -> Vec<PoissonMonomial> {
    monomials_with_blocks(conv, k, q, 2)
}

fn monomials_with_blocks(conv: &Convention, k: usize, q: usize, min_size: usize) -> Vec<PoissonMonomial> {
    let d = conv.bracket_degree();
    if !q.is_multiple_of(d) || q / d > k || (k > 0 && q / d == k) {
        return Vec::new();
    }
    let mut out: Vec<PoissonMonomial> = partitions_into(k, k - q / d, min_size)
        .into_iter()
        .flat_map(|p| combs_for_partition(&p))
        .collect();
    out.sort();
    out
}

/// Set partitions of `{1..k}` into exactly `blocks` blocks of size at least
/// `min_size`.
fn partitions_into(k: usize, blocks: usize, min_size: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(
        i: usize,
        k: usize,
        blocks: usize,
        min_size: usize,
        cur: &mut Vec<Vec<usize>>,
        out: &mut Vec<Vec<Vec<usize>>>,
    ) {
        let left = k + 1 - i;
        let deficit: usize = cur.iter().map(|b| min_size.saturating_sub(b.len())).sum();
        let new_needed = blocks - cur.len();
        if deficit + new_needed * min_size > left {
            return;
        }
        if i > k {
            out.push(cur.clone());
            return;
        }
        for b in 0..cur.len() {
            cur[b].push(i);
            rec(i + 1, k, blocks, min_size, cur, out);
            cur[b].pop();
        }
        if cur.len() < blocks {
            cur.push(vec![i]);
            rec(i + 1, k, blocks, min_size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if blocks <= k {
        rec(1, k, blocks, min_size, &mut Vec::new(), &mut out);
    }
    out
}

/// Every basis monomial of arity `k`, all degrees.
pub fn full_basis(k: usize) -> Vec<PoissonMonomial> {
    let mut out: Vec<PoissonMonomial> = set_partitions(k)
        .into_iter()
        .flat_map(|p| combs_for_partition(&p))
        .collect();
    out.sort();
    out
}

/// Set partitions of `{1..k}` as lists of blocks, each block sorted and
/// blocks ordered by their minimum.
pub fn set_partitions(k: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(i: usize, k: usize, cur: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i > k {
            out.push(cur.clone());
            return;
        }
        for b in 0..cur.len() {
            cur[b].push(i);
            rec(i + 1, k, cur, out);
            cur[b].pop();
        }
        cur.push(vec![i]);
        rec(i + 1, k, cur, out);
        cur.pop();
    }
    let mut out = Vec::new();
    rec(1, k, &mut Vec::new(), &mut out);
    out
}

fn combs_for_partition(blocks: &[Vec<usize>]) -> Vec<PoissonMonomial> {
    let per_block: Vec<Vec<LieMonomial>> = blocks
        .iter()
        .map(|b| {
            permutations(&b[1..])
                .into_iter()
                .map(|rest| {
                    let mut w = vec![b[0]];
                    w.extend(rest);
                    LieMonomial(w)
                })
                .collect()
        })
        .collect();
    let mut out = vec![Vec::new()];
    for choices in per_block {
        let mut next = Vec::with_capacity(out.len() * choices.len());
        for prefix in &out {
            for c in &choices {
                let mut v: Vec<LieMonomial> = prefix.clone();
                v.push(c.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out.into_iter().map(|blocks| PoissonMonomial { blocks }).collect()
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// The unit `ι`, the product `μ = x₁·x₂`, the bracket `λ = {x₁,x₂}` and the
/// arity-0 unit of the multiplication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distinguished {
    pub unit: OperadElement,
    pub product: OperadElement,
    pub bracket: OperadElement,
    pub counit: OperadElement,
}

pub fn distinguished_elements(conv: Convention) -> Distinguished {
    let single = |a| LieMonomial(vec![a]);
    Distinguished {
        unit: OperadElement::from_monomial(conv, PoissonMonomial { blocks: vec![single(1)] }),
        product: OperadElement::from_monomial(
            conv,
            PoissonMonomial {
                blocks: vec![single(1), single(2)],
            },
        ),
        bracket: OperadElement::from_monomial(
            conv,
            PoissonMonomial {
                blocks: vec![LieMonomial(vec![1, 2])],
            },
        ),
        counit: OperadElement::from_monomial(conv, PoissonMonomial::unit()),
    }
}

/// Sign of `x ∘ᵢ y` in the operadic suspension, so that
/// `x ∘ y = Σᵢ ε(i) x ∘ᵢ y` is a graded pre-Lie product in degree `q − k + 1`.
fn pre_lie_sign(k: usize, i: usize, y: &OperadElement) -> Rational {
    let (l, qy) = (y.arity as i64, y.degree as i64);
    let e = (k as i64 - i as i64) * (qy + 1 - l) + qy * (i as i64 - 1);
    if e.rem_euclid(2) == 1 {
        -Rational::one()
    } else {
        Rational::one()
    }
}

/// Degree of `x` in the suspended (Lie) grading, `q − k + 1`.
pub fn lie_degree(x: &OperadElement) -> i64 {
    x.degree as i64 - x.arity as i64 + 1
}

/// `x ∘ y`; an arity-0 `x` has no slots, so the result is zero (placed in
/// arity 0 when both arities vanish).
pub fn pre_lie(x: &OperadElement, y: &OperadElement) -> Result<OperadElement, OperadError> {
    let arity = (x.arity + y.arity).saturating_sub(1);
    let mut acc = OperadElement::zero(x.conv, arity, x.degree + y.degree);
    for i in 1..=x.arity {
        acc = acc.add_scaled(&pre_lie_sign(x.arity, i, y), &x.compose(i, y)?)?;
    }
    Ok(acc)
}

/// Chain-level Gerstenhaber bracket `[x,y] = x∘y − (−1)^{|x||y|} y∘x` with
/// suspended degrees.
pub fn gerstenhaber_bracket(x: &OperadElement, y: &OperadElement) -> Result<OperadElement, OperadError> {
    let xy = pre_lie(x, y)?;
    let yx = pre_lie(y, x)?;
    let s = if (lie_degree(x) * lie_degree(y)).rem_euclid(2) == 1 {
        Rational::one()
    } else {
        -Rational::one()
    };
    xy.add_scaled(&s, &yx)
}

/// Chain-level star product, `(−1)^{q_x·l} · (m ∘₂ y) ∘₁ x` corrected by the
/// Koszul sign of placing `x` in front of `y`.
pub fn star(x: &OperadElement, y: &OperadElement) -> Result<OperadElement, OperadError> {
    let conv = x.conv;
    let m = distinguished_elements(conv).product;
    let raw = m.compose(2, y)?.compose(1, x)?;
    let odd = conv.odd_bracket();
    let qx_odd = odd && (x.degree / conv.bracket_degree()) % 2 == 1;
    let qy_odd = odd && (y.degree / conv.bracket_degree()) % 2 == 1;
    // (m∘₂y)∘₁x = (−1)^{q_x q_y} x⊙y
    let mut e = qx_odd && qy_odd;
    e ^= qx_odd && y.arity % 2 == 1;
    Ok(if e { raw.scaled(&-Rational::one()) } else { raw })
}
