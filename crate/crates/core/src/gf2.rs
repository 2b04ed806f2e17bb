//! Bit-packed vectors and matrices over GF(2) with the elimination kernel
//! (rank, nullspace basis, linear solve) used throughout the crate.
//!
//! All operations leave their inputs untouched; elimination works on clones.
//! Vectors are packed into `u64` words, least significant bit first.

use std::fmt;

const WORD_BITS: usize = 64;

/// A fixed-length vector over GF(2), packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    /// All-zero vector of the given length.
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; len.div_ceil(WORD_BITS)],
        }
    }

    /// Vector with ones exactly at `indices` (duplicates toggle).
    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut v = BitVec::zeros(len);
        for &i in indices {
            v.flip(i);
        }
        v
    }

    /// Vector from a 0/1 slice.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b != 0 {
                v.set(i, true);
            }
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    /// In-place XOR with another vector of the same length.
    pub fn xor_with(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w ^= o;
        }
    }

    /// Number of ones.
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Index of the first set bit, if any.
    pub fn first_one(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(wi * WORD_BITS + w.trailing_zeros() as usize);
            }
        }
        None
    }

    /// Parity of the overlap `|self AND other|` — the GF(2) dot product.
    pub fn dot(&self, other: &BitVec) -> bool {
        debug_assert_eq!(self.len, other.len);
        let mut acc = 0u64;
        for (w, o) in self.words.iter().zip(&other.words) {
            acc ^= w & o;
        }
        acc.count_ones() % 2 == 1
    }

    /// Size of the overlap `|self AND other|`.
    pub fn and_count(&self, other: &BitVec) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(w, o)| (w & o).count_ones() as usize)
            .sum()
    }

    /// Iterator over the indices of set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(wi * WORD_BITS + b)
                }
            })
        })
    }

    /// Concatenation `self ++ other`.
    pub fn concat(&self, other: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.len + other.len);
        for i in self.ones() {
            out.set(i, true);
        }
        for i in other.ones() {
            out.set(self.len + i, true);
        }
        out
    }

    /// The sub-vector at the given positions, in order.
    pub fn select(&self, positions: &[usize]) -> BitVec {
        let mut out = BitVec::zeros(positions.len());
        for (j, &p) in positions.iter().enumerate() {
            if self.get(p) {
                out.set(j, true);
            }
        }
        out
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// A dense matrix over GF(2): a list of equal-length bit-vector rows.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryMatrix {
    n_cols: usize,
    rows: Vec<BitVec>,
}

impl BinaryMatrix {
    /// Matrix with no rows.
    pub fn empty(n_cols: usize) -> Self {
        BinaryMatrix {
            n_cols,
            rows: Vec::new(),
        }
    }

    /// Builds from rows; every row must share the same length.
    pub fn from_rows(rows: Vec<BitVec>) -> Self {
        let n_cols = rows.first().map_or(0, BitVec::len);
        assert!(
            rows.iter().all(|r| r.len() == n_cols),
            "rows must have uniform length"
        );
        BinaryMatrix { n_cols, rows }
    }

    pub fn identity(n: usize) -> Self {
        BinaryMatrix {
            n_cols: n,
            rows: (0..n).map(|i| BitVec::from_indices(n, &[i])).collect(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn push_row(&mut self, row: BitVec) {
        assert_eq!(row.len(), self.n_cols);
        self.rows.push(row);
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value);
    }

    pub fn transpose(&self) -> BinaryMatrix {
        let mut out = BinaryMatrix::from_rows(vec![BitVec::zeros(self.n_rows()); self.n_cols]);
        for (r, row) in self.rows.iter().enumerate() {
            for c in row.ones() {
                out.rows[c].set(r, true);
            }
        }
        out.n_cols = self.n_rows();
        out
    }

    /// Matrix-vector product `M v`.
    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.n_cols);
        let mut out = BitVec::zeros(self.n_rows());
        for (i, row) in self.rows.iter().enumerate() {
            if row.dot(v) {
                out.set(i, true);
            }
        }
        out
    }
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            writeln!(f, "{row:?}")?;
        }
        Ok(())
    }
}

/// Row-reduced echelon form with recorded pivot columns.
struct Echelon {
    rows: Vec<BitVec>,
    pivots: Vec<usize>,
}

impl Echelon {
    fn reduce(m: &BinaryMatrix) -> Self {
        let mut rows: Vec<BitVec> = m.rows.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.n_cols {
            let Some(p) = (r..rows.len()).find(|&i| rows[i].get(c)) else {
                continue;
            };
            rows.swap(r, p);
            // Clear column c from every other row (full Gauss-Jordan so that
            // back-substitution is never needed downstream).
            let pivot_row = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && row.get(c) {
                    row.xor_with(&pivot_row);
                }
            }
            pivots.push(c);
            r += 1;
            if r == rows.len() {
                break;
            }
        }
        rows.truncate(r);
        Echelon { rows, pivots }
    }
}

/// Rank over GF(2). The input is not modified.
pub fn gf2_rank(m: &BinaryMatrix) -> usize {
    Echelon::reduce(m).pivots.len()
}

/// Basis of the right null space `{v : M v = 0}`, one basis vector per row.
///
/// The number of rows returned is always `n_cols - rank(M)`.
pub fn gf2_kernel(m: &BinaryMatrix) -> BinaryMatrix {
    let ech = Echelon::reduce(m);
    let pivot_set: Vec<Option<usize>> = {
        let mut lookup = vec![None; m.n_cols];
        for (r, &c) in ech.pivots.iter().enumerate() {
            lookup[c] = Some(r);
        }
        lookup
    };
    let mut basis = Vec::new();
    for free in 0..m.n_cols {
        if pivot_set[free].is_some() {
            continue;
        }
        let mut v = BitVec::zeros(m.n_cols);
        v.set(free, true);
        for (r, &p) in ech.pivots.iter().enumerate() {
            if ech.rows[r].get(free) {
                v.set(p, true);
            }
        }
        basis.push(v);
    }
    let mut out = BinaryMatrix::empty(m.n_cols);
    for v in basis {
        out.push_row(v);
    }
    out
}

/// One solution of `M x = b`, or `None` when the system is inconsistent.
pub fn gf2_solve(m: &BinaryMatrix, b: &BitVec) -> Option<BitVec> {
    assert_eq!(
        b.len(),
        m.n_rows(),
        "right-hand side length must equal the row count"
    );
    // Eliminate with the right-hand side carried along as an extra column.
    let mut rows: Vec<BitVec> = m
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| r.concat(&BitVec::from_bits(&[u8::from(b.get(i))])))
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m.n_cols {
        let Some(p) = (r..rows.len()).find(|&i| rows[i].get(c)) else {
            continue;
        };
        rows.swap(r, p);
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row.get(c) {
                row.xor_with(&pivot_row);
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    // Any row of the form (0 ... 0 | 1) is a contradiction.
    if rows
        .iter()
        .any(|row| row.get(m.n_cols) && row.ones().all(|c| c == m.n_cols))
    {
        return None;
    }
    let mut x = BitVec::zeros(m.n_cols);
    for (row_idx, &pc) in pivots.iter().enumerate() {
        if rows[row_idx].get(m.n_cols) {
            x.set(pc, true);
        }
    }
    Some(x)
}

/// Coefficients `c` with `c^T M = b` (i.e. `b` as a combination of the rows
/// of `M`), or `None` when `b` is outside the row space.
pub fn gf2_solve_rowspace(m: &BinaryMatrix, b: &BitVec) -> Option<BitVec> {
    assert_eq!(b.len(), m.n_cols());
    gf2_solve(&m.transpose(), b)
}

/// Grow-only row basis in reduced form, for incremental independence tests.
pub struct IncrementalBasis {
    n_cols: usize,
    rows: Vec<BitVec>,
    pivots: Vec<usize>,
}

impl IncrementalBasis {
    pub fn new(n_cols: usize) -> Self {
        IncrementalBasis {
            n_cols,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the basis; inserts the residual when nonzero.
    /// Returns true when `v` was independent of the rows seen so far.
    pub fn try_insert(&mut self, v: &BitVec) -> bool {
        assert_eq!(v.len(), self.n_cols);
        let mut v = v.clone();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v.get(p) {
                v.xor_with(row);
            }
        }
        match v.first_one() {
            None => false,
            Some(p) => {
                self.rows.push(v);
                self.pivots.push(p);
                true
            }
        }
    }

    /// True when `v` lies in the span of the inserted rows.
    pub fn contains(&self, v: &BitVec) -> bool {
        assert_eq!(v.len(), self.n_cols);
        let mut v = v.clone();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v.get(p) {
                v.xor_with(row);
            }
        }
        v.is_zero()
    }
}
