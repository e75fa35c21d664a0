//! Exact sparse linear algebra over the rationals and over prime fields.
//!
//! Everything downstream (bar homology, the quadratic dual, the Koszul
//! complex) reduces to ranks, kernel bases and subspace intersections of
//! small sparse matrices. Matrices carry integer entries; over `F_p` the
//! entries are read modulo `p`. The rational path never normalizes
//! fractions during elimination: it runs fraction-free (Bareiss) updates,
//! so intermediate values stay integral.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Default prime for the `F_p` cross-check path.
pub const DEFAULT_PRIME: u64 = 32003;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} out of range (need 2 <= p < 2^31)")]
    ModulusOutOfRange(u64),
    #[error("cannot parse field spec {0:?} (expected \"q\" or \"fp:<prime>\")")]
    BadFieldSpec(String),
    #[error("vector of length {got} does not match ambient dimension {want}")]
    ShapeMismatch { want: usize, got: usize },
}

/// The coefficient field: exact rationals or a prime field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldSpec {
    Rationals,
    PrimeField { p: u64 },
}

impl FieldSpec {
    pub fn rationals() -> Self {
        FieldSpec::Rationals
    }

    pub fn prime_field(p: u64) -> Result<Self, LinalgError> {
        if !(2..1u64 << 31).contains(&p) {
            return Err(LinalgError::ModulusOutOfRange(p));
        }
        if !is_prime(p) {
            return Err(LinalgError::NotPrime(p));
        }
        Ok(FieldSpec::PrimeField { p })
    }

    /// Parses `"q"` or `"fp:<prime>"`; a bare `"fp"` selects the default prime.
    pub fn parse(s: &str) -> Result<Self, LinalgError> {
        match s {
            "q" | "Q" => Ok(FieldSpec::Rationals),
            "fp" => FieldSpec::prime_field(DEFAULT_PRIME),
            _ => match s.strip_prefix("fp:") {
                Some(rest) => {
                    let p = rest
                        .parse::<u64>()
                        .map_err(|_| LinalgError::BadFieldSpec(s.to_string()))?;
                    FieldSpec::prime_field(p)
                }
                None => Err(LinalgError::BadFieldSpec(s.to_string())),
            },
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rationals => write!(f, "Q"),
            FieldSpec::PrimeField { p } => write!(f, "F_{p}"),
        }
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// A sparse matrix with exact integer entries; no zero entry is ever stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), BigInt>,
}

impl SparseMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SparseMatrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    /// Builds a matrix whose columns are the given dense vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<BigInt>]) -> Self {
        let mut m = SparseMatrix::zero(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (i, v) in col.iter().enumerate() {
                if !v.is_zero() {
                    m.set(i, j, v.clone());
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero_matrix(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        assert!(i < self.rows && j < self.cols, "index out of range");
        if v.is_zero() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), v);
        }
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: &BigInt) {
        assert!(i < self.rows && j < self.cols, "index out of range");
        let cur = self.entries.remove(&(i, j)).unwrap_or_else(BigInt::zero) + v;
        if !cur.is_zero() {
            self.entries.insert((i, j), cur);
        }
    }

    pub fn get(&self, i: usize, j: usize) -> BigInt {
        self.entries
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &BigInt)> {
        self.entries.iter().map(|(&(i, j), v)| (i, j, v))
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        let mut col = vec![BigInt::zero(); self.rows];
        for (&(i, jj), v) in &self.entries {
            if jj == j {
                col[i] = v.clone();
            }
        }
        col
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        // group lhs entries by column for cache-friendly accumulation
        let mut by_col: BTreeMap<usize, Vec<(usize, &BigInt)>> = BTreeMap::new();
        for (&(i, j), v) in &self.entries {
            by_col.entry(j).or_default().push((i, v));
        }
        let mut out = SparseMatrix::zero(self.rows, other.cols);
        for (&(k, l), w) in &other.entries {
            if let Some(lhs) = by_col.get(&k) {
                for &(i, v) in lhs {
                    out.add_to(i, l, &(v * w));
                }
            }
        }
        out
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.rows, other.rows, "row count mismatch in hstack");
        let mut out = SparseMatrix::zero(self.rows, self.cols + other.cols);
        for (&(i, j), v) in &self.entries {
            out.set(i, j, v.clone());
        }
        for (&(i, j), v) in &other.entries {
            out.set(i, self.cols + j, v.clone());
        }
        out
    }

    /// Plain-text triplet dump: a `rows cols` header, then one
    /// `i j value` line per stored entry, zero-based.
    pub fn triplet_dump(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for (&(i, j), v) in &self.entries {
            s.push_str(&format!("{i} {j} {v}\n"));
        }
        s
    }
}

/// Exact rank over the requested field.
pub fn rank(m: &SparseMatrix, field: FieldSpec) -> usize {
    match field {
        FieldSpec::Rationals => bareiss_echelon(m).pivots.len(),
        FieldSpec::PrimeField { p } => fp_echelon(m, p).pivots.len(),
    }
}

/// Basis of the right null space, one dense vector per free column.
///
/// Over the rationals each vector is primitive (coprime integer entries)
/// with positive leading coefficient; over `F_p` the leading coefficient
/// is 1 and entries are lifted to `0..p`.
pub fn kernel_basis(m: &SparseMatrix, field: FieldSpec) -> Vec<Vec<BigInt>> {
    match field {
        FieldSpec::Rationals => {
            let ech = bareiss_echelon(m);
            kernel_from_echelon_q(&ech, m.cols)
        }
        FieldSpec::PrimeField { p } => {
            let ech = fp_echelon(m, p);
            kernel_from_echelon_fp(&ech, m.cols, p)
        }
    }
}

/// Basis of the intersection of the spanned subspaces.
///
/// An empty list of subspaces intersects to the full ambient space.
pub fn intersect_subspaces(
    bases: &[Vec<Vec<BigInt>>],
    ambient_dim: usize,
    field: FieldSpec,
) -> Result<Vec<Vec<BigInt>>, LinalgError> {
    for basis in bases {
        for v in basis {
            if v.len() != ambient_dim {
                return Err(LinalgError::ShapeMismatch {
                    want: ambient_dim,
                    got: v.len(),
                });
            }
        }
    }
    let full: Vec<Vec<BigInt>> = (0..ambient_dim)
        .map(|i| {
            let mut e = vec![BigInt::zero(); ambient_dim];
            e[i] = BigInt::one();
            e
        })
        .collect();
    let mut cur = full;
    for basis in bases {
        let other = independent_subset(basis, ambient_dim, field);
        if cur.is_empty() || other.is_empty() {
            return Ok(Vec::new());
        }
        // Solve [cur | -other] x = 0; the cur-part of each kernel vector
        // spans the intersection.
        let k1 = cur.len();
        let mut stacked = SparseMatrix::zero(ambient_dim, k1 + other.len());
        for (j, v) in cur.iter().enumerate() {
            for (i, a) in v.iter().enumerate() {
                if !a.is_zero() {
                    stacked.set(i, j, a.clone());
                }
            }
        }
        for (j, v) in other.iter().enumerate() {
            for (i, a) in v.iter().enumerate() {
                if !a.is_zero() {
                    stacked.set(i, k1 + j, -a.clone());
                }
            }
        }
        let ker = kernel_basis(&stacked, field);
        let mut next = Vec::with_capacity(ker.len());
        for w in &ker {
            let mut v = vec![BigInt::zero(); ambient_dim];
            for (j, c) in w.iter().take(k1).enumerate() {
                if !c.is_zero() {
                    for (i, a) in cur[j].iter().enumerate() {
                        v[i] += c * a;
                    }
                }
            }
            next.push(normalize_vector(v, field));
        }
        cur = next;
    }
    Ok(cur)
}

/// Whether `v` lies in the span of `basis`.
pub fn in_span(basis: &[Vec<BigInt>], v: &[BigInt], field: FieldSpec) -> bool {
    let dim = v.len();
    let b = SparseMatrix::from_columns(dim, basis);
    let bv = SparseMatrix::from_columns(dim, std::slice::from_ref(&v.to_vec()));
    rank(&b.hstack(&bv), field) == rank(&b, field)
}

/// Selects a maximal linearly independent subset of `vectors`, in order.
pub fn independent_subset(
    vectors: &[Vec<BigInt>],
    ambient_dim: usize,
    field: FieldSpec,
) -> Vec<Vec<BigInt>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = SparseMatrix::from_columns(ambient_dim, vectors);
    let pivot_cols: Vec<usize> = match field {
        FieldSpec::Rationals => bareiss_echelon(&m).pivots.iter().map(|&(_, c)| c).collect(),
        FieldSpec::PrimeField { p } => fp_echelon(&m, p).pivots.iter().map(|&(_, c)| c).collect(),
    };
    pivot_cols.into_iter().map(|c| vectors[c].clone()).collect()
}

/// Canonical scaling of a nonzero vector: primitive with positive leading
/// entry over the rationals, leading entry 1 over `F_p`.
pub fn normalize_vector(v: Vec<BigInt>, field: FieldSpec) -> Vec<BigInt> {
    match field {
        FieldSpec::Rationals => {
            let mut g = BigInt::zero();
            for a in &v {
                g = g.gcd(a);
            }
            if g.is_zero() {
                return v;
            }
            let lead_neg = v.iter().find(|a| !a.is_zero()).is_some_and(Signed::is_negative);
            let scale = if lead_neg { -g } else { g };
            v.into_iter().map(|a| a / &scale).collect()
        }
        FieldSpec::PrimeField { p } => {
            let reduced: Vec<u64> = v.iter().map(|a| lift_mod(a, p)).collect();
            match reduced.iter().find(|&&a| a != 0) {
                None => reduced.into_iter().map(BigInt::from).collect(),
                Some(&lead) => {
                    let inv = fp_inv(lead, p);
                    reduced
                        .into_iter()
                        .map(|a| BigInt::from(mul_mod(a, inv, p)))
                        .collect()
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// fraction-free elimination over the rationals
// ---------------------------------------------------------------------------

struct Echelon<T> {
    /// (row, col) of each pivot, in elimination order.
    pivots: Vec<(usize, usize)>,
    /// Rows after elimination, sparse by column.
    rows: Vec<BTreeMap<usize, T>>,
}

fn bareiss_echelon(m: &SparseMatrix) -> Echelon<BigInt> {
    let mut rows: Vec<BTreeMap<usize, BigInt>> = vec![BTreeMap::new(); m.rows];
    for (&(i, j), v) in &m.entries {
        rows[i].insert(j, v.clone());
    }
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for col in 0..m.cols {
        if r == rows.len() {
            break;
        }
        // leftmost column, first nonzero row from the top: value-independent
        // pivoting so kernel bases are reproducible
        let Some(pr) = (r..rows.len()).find(|&i| rows[i].contains_key(&col)) else {
            continue;
        };
        rows.swap(r, pr);
        let pivot_row = rows[r].clone();
        let pivot = pivot_row[&col].clone();
        for row in rows.iter_mut().skip(r + 1) {
            if row.is_empty() {
                continue;
            }
            let a = row.remove(&col).unwrap_or_else(BigInt::zero);
            let mut updated: BTreeMap<usize, BigInt> = BTreeMap::new();
            for (&k, v) in row.iter() {
                let mut t = &pivot * v;
                if !a.is_zero() {
                    if let Some(w) = pivot_row.get(&k) {
                        t -= &a * w;
                    }
                }
                let q = exact_div(t, &prev);
                if !q.is_zero() {
                    updated.insert(k, q);
                }
            }
            if !a.is_zero() {
                for (&k, w) in pivot_row.iter() {
                    if k != col && !row.contains_key(&k) {
                        let q = exact_div(-(&a * w), &prev);
                        if !q.is_zero() {
                            updated.insert(k, q);
                        }
                    }
                }
            }
            *row = updated;
        }
        pivots.push((r, col));
        prev = pivot;
        r += 1;
    }
    Echelon { pivots, rows }
}

fn exact_div(n: BigInt, d: &BigInt) -> BigInt {
    debug_assert!((&n % d).is_zero(), "fraction-free step must divide exactly");
    n / d
}

fn kernel_from_echelon_q(ech: &Echelon<BigInt>, cols: usize) -> Vec<Vec<BigInt>> {
    let pivot_cols: Vec<usize> = ech.pivots.iter().map(|&(_, c)| c).collect();
    let mut is_pivot = vec![false; cols];
    for &c in &pivot_cols {
        is_pivot[c] = true;
    }
    let mut basis = Vec::new();
    for f in 0..cols {
        if is_pivot[f] {
            continue;
        }
        let mut x = vec![BigRational::zero(); cols];
        x[f] = BigRational::one();
        for &(r, c) in ech.pivots.iter().rev() {
            let row = &ech.rows[r];
            let mut sum = BigRational::zero();
            for (&k, v) in row.range((c + 1)..) {
                if !x[k].is_zero() {
                    sum += BigRational::from(v.clone()) * &x[k];
                }
            }
            let pivot = BigRational::from(row[&c].clone());
            x[c] = -sum / pivot;
        }
        basis.push(primitive_integer(&x));
    }
    basis
}

/// Clears denominators and common factors; leading nonzero entry positive.
fn primitive_integer(x: &[BigRational]) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for a in x {
        if !a.is_zero() {
            lcm = lcm.lcm(a.denom());
        }
    }
    let ints: Vec<BigInt> = x.iter().map(|a| a.numer() * (&lcm / a.denom())).collect();
    normalize_vector(ints, FieldSpec::Rationals)
}

// ---------------------------------------------------------------------------
// elimination over F_p
// ---------------------------------------------------------------------------

fn lift_mod(v: &BigInt, p: u64) -> u64 {
    let m = v.mod_floor(&BigInt::from(p));
    let (_, digits) = m.to_u64_digits();
    match digits.first() {
        None => 0,
        Some(&d) => d,
    }
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    // p < 2^31, so the product fits in u64
    (a * b) % p
}

fn fp_inv(a: u64, p: u64) -> u64 {
    // Fermat: a^(p-2) mod p
    let mut base = a % p;
    let mut exp = p - 2;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

fn fp_echelon(m: &SparseMatrix, p: u64) -> Echelon<u64> {
    let mut rows: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); m.rows];
    for (&(i, j), v) in &m.entries {
        let r = lift_mod(v, p);
        if r != 0 {
            rows[i].insert(j, r);
        }
    }
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..m.cols {
        if r == rows.len() {
            break;
        }
        let Some(pr) = (r..rows.len()).find(|&i| rows[i].contains_key(&col)) else {
            continue;
        };
        rows.swap(r, pr);
        let pivot_row = rows[r].clone();
        let pivot_inv = fp_inv(pivot_row[&col], p);
        for row in rows.iter_mut().skip(r + 1) {
            let Some(a) = row.remove(&col) else { continue };
            let factor = mul_mod(a, pivot_inv, p);
            for (&k, &w) in pivot_row.iter() {
                if k == col {
                    continue;
                }
                let cur = row.get(&k).copied().unwrap_or(0);
                let nv = (cur + p - mul_mod(factor, w, p)) % p;
                if nv == 0 {
                    row.remove(&k);
                } else {
                    row.insert(k, nv);
                }
            }
        }
        pivots.push((r, col));
        r += 1;
    }
    Echelon { pivots, rows }
}

fn kernel_from_echelon_fp(ech: &Echelon<u64>, cols: usize, p: u64) -> Vec<Vec<BigInt>> {
    let mut is_pivot = vec![false; cols];
    for &(_, c) in &ech.pivots {
        is_pivot[c] = true;
    }
    let mut basis = Vec::new();
    for f in 0..cols {
        if is_pivot[f] {
            continue;
        }
        let mut x = vec![0u64; cols];
        x[f] = 1;
        for &(r, c) in ech.pivots.iter().rev() {
            let row = &ech.rows[r];
            let mut sum = 0u64;
            for (&k, &v) in row.range((c + 1)..) {
                sum = (sum + mul_mod(v, x[k], p)) % p;
            }
            x[c] = mul_mod((p - sum) % p, fp_inv(row[&c], p), p);
        }
        let v: Vec<BigInt> = x.into_iter().map(BigInt::from).collect();
        basis.push(normalize_vector(v, FieldSpec::PrimeField { p }));
    }
    basis
}
