//! Column combinatorics for operators on an `x × 2^m` strip of composite
//! particles.
//!
//! An operator supported on such a strip is read column by column. Each
//! column of height `2^m` reduces, through a pair of halving maps, to a
//! characteristic binary vector plus a characteristic single-particle
//! operator; width-one binary "characteristic columns" compose under a
//! cyclic star product whose arithmetic is governed by binomial parities.
//! On top of this sit two solvers: [`find_odd_identity_matrix`] searches for
//! an odd identity-generating matrix (the certificate that lets a strip
//! operator's width shrink by one), and [`decompose_periodic`] splits a
//! plane-supported logical operator into an anchored part times a
//! translation-periodic part.
//!
//! Everything here is projective: operators are compared through their
//! symplectic bits and every product is normalized back to phase zero.

use crate::analysis::Region;
use crate::error::Error;
use crate::gf2::{gf2_kernel, gf2_solve_rowspace, BinaryMatrix, BitVec};
use crate::lattice::{translate_operator, LatticeLayout};
use crate::pauli::PauliOperator;
use crate::stabilizer::StabilizerCode;
use crate::Result;

/// A Pauli operator on one column of `2^m` composite particles, stored as
/// one single-particle operator per height position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnOperator {
    entries: Vec<PauliOperator>,
}

impl ColumnOperator {
    /// Builds a column from per-particle operators. The height must be a
    /// power of two and every entry must act on the same qubit count; entry
    /// phases are normalized to zero.
    pub fn new(entries: Vec<PauliOperator>) -> Result<Self> {
        if entries.is_empty() || !entries.len().is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "column height must be a power of two, got {}",
                entries.len()
            )));
        }
        let v = entries[0].n_qubits();
        if v == 0 {
            return Err(Error::DimensionMismatch(
                "column entries need at least one qubit".into(),
            ));
        }
        if entries.iter().any(|e| e.n_qubits() != v) {
            return Err(Error::DimensionMismatch(
                "column entries act on differing qubit counts".into(),
            ));
        }
        Ok(Self::normalized(entries))
    }

    /// The all-identity column of height `2^m` on `v`-qubit particles.
    pub fn identity(m: usize, v: usize) -> Self {
        Self::normalized(vec![PauliOperator::identity(v); 1 << m])
    }

    // Internal constructor for entries already known to be well-shaped.
    fn normalized(entries: Vec<PauliOperator>) -> Self {
        ColumnOperator {
            entries: entries.into_iter().map(|e| e.with_phase(0)).collect(),
        }
    }

    /// Height exponent `m` (the column holds `2^m` entries).
    pub fn m(&self) -> usize {
        self.entries.len().trailing_zeros() as usize
    }

    pub fn height(&self) -> usize {
        self.entries.len()
    }

    /// Qubits per composite particle.
    pub fn v(&self) -> usize {
        self.entries[0].n_qubits()
    }

    pub fn entries(&self) -> &[PauliOperator] {
        &self.entries
    }

    pub fn is_identity_bits(&self) -> bool {
        self.entries.iter().all(PauliOperator::is_identity_bits)
    }

    /// Entrywise product of two columns of the same shape.
    pub fn mul(&self, other: &ColumnOperator) -> Result<ColumnOperator> {
        if self.height() != other.height() || self.v() != other.v() {
            return Err(Error::DimensionMismatch(format!(
                "column shapes differ: {}x{} vs {}x{}",
                self.height(),
                self.v(),
                other.height(),
                other.v()
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.mul(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::normalized(entries))
    }

    /// Cyclic shift by `s` positions: entry `t` of the result is entry
    /// `t - s (mod height)` of the input.
    pub fn shifted(&self, s: usize) -> ColumnOperator {
        let h = self.height();
        let s = s % h;
        let entries = (0..h).map(|t| self.entries[(t + h - s) % h].clone()).collect();
        Self::normalized(entries)
    }

    /// Halving maps: `which = 0` multiplies each entry of the top half by
    /// the entry half a period below it; `which = 1` keeps the top half.
    pub fn f_map(&self, which: u8) -> Result<ColumnOperator> {
        if self.height() == 1 {
            return Err(Error::DimensionMismatch(
                "a height-one column cannot be halved".into(),
            ));
        }
        let half = self.height() / 2;
        let entries = match which {
            0 => (0..half)
                .map(|j| self.entries[j].mul(&self.entries[j + half]))
                .collect::<Result<Vec<_>>>()?,
            1 => self.entries[..half].to_vec(),
            other => {
                return Err(Error::IndexOutOfRange(format!(
                    "halving map selector must be 0 or 1, got {other}"
                )))
            }
        };
        Ok(Self::normalized(entries))
    }

    /// The column as one operator on `height * v` qubits, particle-major.
    pub fn to_operator(&self) -> PauliOperator {
        let v = self.v();
        let n = self.height() * v;
        let mut x = BitVec::zeros(n);
        let mut z = BitVec::zeros(n);
        for (j, entry) in self.entries.iter().enumerate() {
            for q in 0..v {
                if entry.x_bits().get(q) {
                    x.set(j * v + q, true);
                }
                if entry.z_bits().get(q) {
                    z.set(j * v + q, true);
                }
            }
        }
        PauliOperator::from_parts(x, z, 0).expect("bit lengths match by construction")
    }
}

/// The reduction of a column operator: a binary vector (least-significant
/// index first) together with the surviving single-particle operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacteristicData {
    pub vector: Vec<bool>,
    pub operator: PauliOperator,
}

/// Integer value of a characteristic vector: bit `j` weighs `2^j`.
pub fn g_value(vector: &[bool]) -> usize {
    vector
        .iter()
        .enumerate()
        .map(|(j, &b)| usize::from(b) << j)
        .sum()
}

/// Inverse of [`g_value`]: the length-`m` vector representing `value`.
pub fn vector_from_value(value: usize, m: usize) -> Result<Vec<bool>> {
    if value >> m != 0 {
        return Err(Error::IndexOutOfRange(format!(
            "value {value} does not fit in {m} bits"
        )));
    }
    Ok((0..m).map(|j| value >> j & 1 == 1).collect())
}

/// Reduces a column to its characteristic vector and operator by iterating
/// the halving maps from the most significant position down: when the
/// folding map `f_0` kills the column the bit is 1 and the top half is kept,
/// otherwise the bit is 0 and the folded column is kept.
pub fn characteristic_vector(u: &ColumnOperator) -> Result<CharacteristicData> {
    if u.is_identity_bits() {
        return Err(Error::InvalidCode(
            "the identity column has no characteristic vector".into(),
        ));
    }
    let m = u.m();
    let mut vector = vec![false; m];
    let mut cur = u.clone();
    for idx in (0..m).rev() {
        let folded = cur.f_map(0)?;
        if folded.is_identity_bits() {
            vector[idx] = true;
            cur = cur.f_map(1)?;
        } else {
            vector[idx] = false;
            cur = folded;
        }
    }
    // A nonidentity column always leaves a nonidentity survivor: when f_0
    // kills the column the two halves are equal, so the kept half is nonzero.
    debug_assert!(!cur.entries()[0].is_identity_bits());
    Ok(CharacteristicData {
        vector,
        operator: cur.entries()[0].clone(),
    })
}

/// A binary matrix with `x` columns of height `2^m`, prescribing which
/// translates of a strip operator to multiply together: bit `(i, j)` selects
/// the translate by `i` along the strip and by `j` around the column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryColumnMatrix {
    m: usize,
    cols: Vec<BitVec>,
}

impl BinaryColumnMatrix {
    pub fn zeros(x: usize, m: usize) -> Result<Self> {
        if x == 0 {
            return Err(Error::DimensionMismatch(
                "matrix width must be at least one".into(),
            ));
        }
        Ok(BinaryColumnMatrix {
            m,
            cols: vec![BitVec::zeros(1 << m); x],
        })
    }

    pub fn from_columns(m: usize, cols: Vec<BitVec>) -> Result<Self> {
        if cols.is_empty() || cols.iter().any(|c| c.len() != 1 << m) {
            return Err(Error::DimensionMismatch(format!(
                "need at least one column, all of height {}",
                1usize << m
            )));
        }
        Ok(BinaryColumnMatrix { m, cols })
    }

    /// Width (number of strip positions covered).
    pub fn x(&self) -> usize {
        self.cols.len()
    }

    /// Height exponent.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn height(&self) -> usize {
        1 << self.m
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cols[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.cols[i].set(j, value);
    }

    pub fn column(&self, i: usize) -> &BitVec {
        &self.cols[i]
    }

    /// Parity of column `i` (sum of its bits mod 2).
    pub fn column_parity(&self, i: usize) -> bool {
        self.cols[i].count_ones() % 2 == 1
    }

    /// True when some column has odd parity.
    pub fn is_odd(&self) -> bool {
        (0..self.x()).any(|i| self.column_parity(i))
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(BitVec::is_zero)
    }

    /// Set positions as `(column, height)` pairs, column-major.
    pub fn ones(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, col) in self.cols.iter().enumerate() {
            for j in col.ones() {
                out.push((i, j));
            }
        }
        out
    }
}

/// The width-one matrix whose set heights are exactly the values dominated
/// bitwise by the vector's value: bit `p` is set iff `p AND g == p` where
/// `g` is the vector's integer value.
pub fn characteristic_column(vector: &[bool]) -> BinaryColumnMatrix {
    let m = vector.len();
    let g = g_value(vector);
    let mut col = BitVec::zeros(1 << m);
    for p in 0..1usize << m {
        if p & g == p {
            col.set(p, true);
        }
    }
    BinaryColumnMatrix { m, cols: vec![col] }
}

/// Star product of width-one matrices: XOR of cyclic down-rotations of `ba`,
/// one per set bit of `bb`. Characteristic columns compose additively under
/// it as long as the two values sum below the height.
pub fn column_star(ba: &BinaryColumnMatrix, bb: &BinaryColumnMatrix) -> Result<BinaryColumnMatrix> {
    if ba.x() != 1 || bb.x() != 1 || ba.m != bb.m {
        return Err(Error::DimensionMismatch(
            "star product needs two width-one matrices of equal height".into(),
        ));
    }
    let h = ba.height();
    let mut out = BitVec::zeros(h);
    for p in bb.cols[0].ones() {
        for t in 0..h {
            if ba.cols[0].get((t + h - p) % h) {
                out.flip(t);
            }
        }
    }
    Ok(BinaryColumnMatrix {
        m: ba.m,
        cols: vec![out],
    })
}

/// Parity of a binomial coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Parity of `C(alpha, beta)`: odd exactly when `beta` is a bitwise subset
/// of `alpha`.
pub fn binomial_parity(alpha: u64, beta: u64) -> Result<Parity> {
    if beta > alpha {
        return Err(Error::IndexOutOfRange(format!(
            "binomial lower index {beta} exceeds upper index {alpha}"
        )));
    }
    Ok(if beta & alpha == beta {
        Parity::Odd
    } else {
        Parity::Even
    })
}

/// Applies a width-one matrix to a single column: the product of the cyclic
/// shifts of `u` selected by the matrix bits.
pub fn apply_column(u: &ColumnOperator, b: &BinaryColumnMatrix) -> Result<ColumnOperator> {
    if b.x() != 1 || b.height() != u.height() {
        return Err(Error::DimensionMismatch(
            "need a width-one matrix matching the column height".into(),
        ));
    }
    let mut out = ColumnOperator::identity(u.m(), u.v());
    for p in b.cols[0].ones() {
        out = out.mul(&u.shifted(p))?;
    }
    Ok(out)
}

/// Reads the first `x` columns of an operator on a two-axis layout whose
/// circumference is a power of two. The operator must have no support beyond
/// those columns.
pub fn extract_columns(
    layout: &LatticeLayout,
    op: &PauliOperator,
    x: usize,
) -> Result<Vec<ColumnOperator>> {
    if layout.d() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "column extraction needs a two-axis layout, got {} axes",
            layout.d()
        )));
    }
    if op.n_qubits() != layout.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "operator on {} qubits, layout has {}",
            op.n_qubits(),
            layout.n_qubits()
        )));
    }
    let (n1, n2) = (layout.dims()[0], layout.dims()[1]);
    if x == 0 || x > n1 {
        return Err(Error::IndexOutOfRange(format!(
            "strip width {x} on a lattice of {n1} columns"
        )));
    }
    if !n2.is_power_of_two() {
        return Err(Error::InvalidLattice(format!(
            "column height {n2} is not a power of two"
        )));
    }
    for q in op.support() {
        let (coords, _) = layout.qubit_site(q)?;
        if coords[0] >= x {
            return Err(Error::DimensionMismatch(format!(
                "operator has support in column {} beyond the strip width {x}",
                coords[0]
            )));
        }
    }
    let v = layout.v();
    let mut columns = Vec::with_capacity(x);
    for i in 0..x {
        let mut entries = Vec::with_capacity(n2);
        for j in 0..n2 {
            let mut entry = PauliOperator::identity(v);
            for s in 0..v {
                let q = layout.qubit_index(&[i as i64, j as i64], s)?;
                entry.set_letter(s, op.letter(q));
            }
            entries.push(entry);
        }
        columns.push(ColumnOperator::new(entries)?);
    }
    Ok(columns)
}

/// Multiplies together the translates of a strip operator selected by a
/// binary matrix. Bit `(i, j)` of `b` (zero-based) contributes the translate
/// by `x - 1 - i` along the strip and `j` around the column, so the full
/// product's final strip column is the cyclic column product returned
/// alongside it.
pub fn apply_matrix(
    layout: &LatticeLayout,
    op: &PauliOperator,
    b: &BinaryColumnMatrix,
) -> Result<(PauliOperator, ColumnOperator)> {
    let x = b.x();
    if layout.d() == 2 && layout.dims()[1] != b.height() {
        return Err(Error::DimensionMismatch(format!(
            "matrix height {} does not match the lattice circumference {}",
            b.height(),
            layout.dims()[1]
        )));
    }
    let columns = extract_columns(layout, op, x)?;
    let mut strip_col = ColumnOperator::identity(b.m(), layout.v());
    let mut full = PauliOperator::identity(op.n_qubits());
    for (i, j) in b.ones() {
        strip_col = strip_col.mul(&columns[i].shifted(j))?;
        let mut t = translate_operator(layout, op, 0, (x - 1 - i) as i64)?;
        if j > 0 {
            t = translate_operator(layout, &t, 1, j as i64)?;
        }
        full = full.mul(&t)?;
    }
    Ok((full.with_phase(0), strip_col))
}

/// True when `b` is nonzero and the prescribed product of translates ends in
/// an identity strip column.
pub fn is_identity_generating(
    layout: &LatticeLayout,
    op: &PauliOperator,
    b: &BinaryColumnMatrix,
) -> Result<bool> {
    if b.is_zero() {
        return Ok(false);
    }
    Ok(apply_matrix(layout, op, b)?.1.is_identity_bits())
}

/// Searches for an odd identity-generating matrix for the first `x` columns
/// of `op`: a nonzero bit matrix whose prescribed product of translates ends
/// in an identity column and which has at least one odd-parity column.
///
/// The search is a complete kernel computation over the shifted columns'
/// symplectic bits, so `None` (within budget) means no odd matrix exists.
/// Budgets cap the number of matrix entries `x * 2^m`; larger problems
/// return `None` untried.
pub fn find_odd_identity_matrix(
    layout: &LatticeLayout,
    op: &PauliOperator,
    x: usize,
    budget: usize,
) -> Result<Option<BinaryColumnMatrix>> {
    let columns = extract_columns(layout, op, x)?;
    let h = layout.dims()[1];
    let m = h.trailing_zeros() as usize;
    if x * h > budget {
        return Ok(None);
    }
    let mut rows = Vec::with_capacity(x * h);
    for column in &columns {
        for j in 0..h {
            rows.push(column.shifted(j).to_operator().symplectic_row());
        }
    }
    // Coefficient vectors over the entries that combine to the identity
    // column: the kernel of the transposed entry-row matrix.
    let kernel = gf2_kernel(&BinaryMatrix::from_rows(rows).transpose());
    for r in 0..kernel.n_rows() {
        let coeffs = kernel.row(r);
        let odd = (0..x).any(|i| (0..h).filter(|&j| coeffs.get(i * h + j)).count() % 2 == 1);
        if !odd {
            // Column parities are linear in the coefficients, so an odd
            // kernel element exists only if some basis vector is odd.
            continue;
        }
        let mut b = BinaryColumnMatrix::zeros(x, m)?;
        for e in coeffs.ones() {
            b.set(e / h, e % h, true);
        }
        debug_assert!(is_identity_generating(layout, op, &b)?);
        debug_assert!(b.is_odd());
        return Ok(Some(b));
    }
    Ok(None)
}

/// A split of a plane-supported logical operator into an anchored part
/// (supported on a fixed-width corner slab) times a part that is periodic
/// under translation along the first axis.
#[derive(Clone, Debug)]
pub struct PeriodicDecomposition {
    pub anchored: PauliOperator,
    pub periodic: PauliOperator,
    pub period: usize,
}

/// Decomposes a logical operator supported on the base plane (all
/// coordinates beyond the first two equal to zero) as `anchored * periodic`
/// up to a stabilizer, where the periodic part commutes with every generator
/// and is invariant under translation by `period` along axis 0, and the
/// anchored part fits in the corner slab of width `min(2v, n_1)`.
///
/// The solver tries ascending periods dividing `n_1`: for each it builds the
/// periodic plane centralizer by linear algebra over one fundamental domain
/// and asks for a combination of generators and periodic centralizer
/// operators matching the input outside the slab. The smallest period that
/// works is reported.
pub fn decompose_periodic(
    code: &StabilizerCode,
    layout: &LatticeLayout,
    op: &PauliOperator,
) -> Result<Option<PeriodicDecomposition>> {
    let n = layout.n_qubits();
    if code.n_qubits() != n || op.n_qubits() != n {
        return Err(Error::DimensionMismatch(
            "code, layout, and operator sizes differ".into(),
        ));
    }
    if layout.d() < 2 {
        return Err(Error::DimensionMismatch(
            "periodic decomposition needs at least two axes".into(),
        ));
    }
    if !code.is_logical(op)? {
        return Err(Error::InvalidCode(
            "the operator to decompose must be logical".into(),
        ));
    }
    for q in op.support() {
        let (coords, _) = layout.qubit_site(q)?;
        if coords[2..].iter().any(|&c| c != 0) {
            return Err(Error::InvalidCode(
                "the operator must be supported on the base plane".into(),
            ));
        }
    }
    // An operator already invariant along axis 0 is its own periodic part.
    let shifted = translate_operator(layout, op, 0, 1)?;
    if bits_eq(&shifted, op) {
        return Ok(Some(PeriodicDecomposition {
            anchored: PauliOperator::identity(n),
            periodic: op.with_phase(0),
            period: 1,
        }));
    }
    let (n1, n2, v) = (layout.dims()[0], layout.dims()[1], layout.v());
    let mut extents = vec![1usize; layout.d()];
    extents[0] = (2 * v).min(n1);
    extents[1] = n2;
    let slab_mask = Region::corner_box(layout, &extents)?.qubit_mask();
    let outside: Vec<usize> = (0..n).filter(|&q| !slab_mask.get(q)).collect();
    let restrict = |p: &PauliOperator| {
        p.x_bits()
            .select(&outside)
            .concat(&p.z_bits().select(&outside))
    };
    let gens = code.generators();

    for beta in (1..=n1).filter(|b| n1 % b == 0) {
        let reps = n1 / beta;
        // Qubit orbits of translation by beta, one per fundamental-domain slot.
        let mut tiles: Vec<Vec<usize>> = Vec::with_capacity(beta * n2 * v);
        for c0 in 0..beta {
            for c1 in 0..n2 {
                for s in 0..v {
                    let mut coords = vec![0i64; layout.d()];
                    coords[1] = c1 as i64;
                    tiles.push(
                        (0..reps)
                            .map(|t| {
                                coords[0] = (c0 + t * beta) as i64;
                                layout.qubit_index(&coords, s)
                            })
                            .collect::<Result<Vec<_>>>()?,
                    );
                }
            }
        }
        let slots = tiles.len();
        // Commutation constraints on a periodic plane operator, one row per
        // generator over (x-part, z-part) unknowns of the fundamental domain.
        let mut constraints = BinaryMatrix::empty(2 * slots);
        for g in gens {
            let mut row = BitVec::zeros(2 * slots);
            for (u, tile) in tiles.iter().enumerate() {
                let x_pair = tile.iter().filter(|&&q| g.z_bits().get(q)).count() % 2 == 1;
                let z_pair = tile.iter().filter(|&&q| g.x_bits().get(q)).count() % 2 == 1;
                row.set(u, x_pair);
                row.set(slots + u, z_pair);
            }
            constraints.push_row(row);
        }
        let kernel = gf2_kernel(&constraints);
        let mut basis = Vec::with_capacity(kernel.n_rows());
        for r in 0..kernel.n_rows() {
            let coeffs = kernel.row(r);
            let mut x = BitVec::zeros(n);
            let mut z = BitVec::zeros(n);
            for u in coeffs.ones() {
                let (bits, tile) = if u < slots {
                    (&mut x, &tiles[u])
                } else {
                    (&mut z, &tiles[u - slots])
                };
                for &q in tile {
                    bits.set(q, true);
                }
            }
            basis.push(PauliOperator::from_parts(x, z, 0)?);
        }
        // Match the input outside the slab with generators plus periodic
        // centralizer operators; whatever remains is the anchored part.
        let rows: Vec<BitVec> = gens.iter().chain(basis.iter()).map(&restrict).collect();
        let rhs = restrict(op);
        let Some(coeffs) = gf2_solve_rowspace(&BinaryMatrix::from_rows(rows), &rhs) else {
            continue;
        };
        let mut periodic = PauliOperator::identity(n);
        let mut anchored = op.clone();
        for idx in coeffs.ones() {
            if idx < gens.len() {
                anchored = anchored.mul(&gens[idx])?;
            } else {
                periodic = periodic.mul(&basis[idx - gens.len()])?;
            }
        }
        let periodic = periodic.with_phase(0);
        let anchored = anchored.mul(&periodic)?.with_phase(0);
        debug_assert!(anchored.supported_inside(&slab_mask));
        debug_assert!(bits_eq(&translate_operator(layout, &periodic, 0, beta as i64)?, &periodic));
        return Ok(Some(PeriodicDecomposition {
            anchored,
            periodic,
            period: beta,
        }));
    }
    Ok(None)
}

fn bits_eq(a: &PauliOperator, b: &PauliOperator) -> bool {
    a.x_bits() == b.x_bits() && a.z_bits() == b.z_bits()
}
