//! Stabilizer codes: validation, logical-operator extraction, canonical
//! anticommuting pairs, region counts, and exact code distance.
//!
//! A code is a list of commuting Hermitian Pauli generators on `N` qubits
//! whose group avoids `-I`. With `M` independent generators the code encodes
//! `k = N - M` logical qubits; logical operators are centralizer elements
//! outside the stabilizer group, counted modulo stabilizer multiplication.

use serde::{Deserialize, Serialize};

use crate::gf2::{gf2_kernel, gf2_rank, gf2_solve_rowspace, BinaryMatrix, BitVec, IncrementalBasis};
use crate::pauli::PauliOperator;
use crate::{Error, Result};

/// A stabilizer code: generators plus cached rank and logical count.
#[derive(Clone)]
pub struct StabilizerCode {
    n_qubits: usize,
    generators: Vec<PauliOperator>,
    rank: usize,
    k: usize,
}

/// Outcome of [`StabilizerCode::code_distance_exact`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceResult {
    /// The least weight of any logical operator.
    Exact(usize),
    /// No logical operator exists at or below the searched weight.
    Exceeded(usize),
}

/// First violation found by [`StabilizerCode::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Generators at these indices anticommute.
    AnticommutingPair(usize, usize),
    /// A generator is not Hermitian (its square is not `+I`).
    NonHermitian(usize),
    /// The product of the generators at these indices is `-I`.
    MinusIdentity(Vec<usize>),
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::AnticommutingPair(i, j) => {
                write!(f, "generators {i} and {j} anticommute")
            }
            Violation::NonHermitian(i) => write!(f, "generator {i} does not square to +I"),
            Violation::MinusIdentity(idx) => {
                write!(f, "product of generators {idx:?} equals -I")
            }
        }
    }
}

/// Canonical anticommuting logical pairs `(l_p, r_p)`: members of the same
/// pair anticommute, everything across pairs commutes.
#[derive(Clone, Debug)]
pub struct LogicalSet {
    pub pairs: Vec<(PauliOperator, PauliOperator)>,
}

impl LogicalSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// All members, pair by pair: `l_0, r_0, l_1, r_1, ...`.
    pub fn members(&self) -> impl Iterator<Item = &PauliOperator> {
        self.pairs.iter().flat_map(|(l, r)| [l, r])
    }
}

/// On-disk form: `{"n_qubits": N, "generators": ["ZZII...", ...]}`.
#[derive(Serialize, Deserialize)]
pub struct CodeSpecJson {
    pub n_qubits: usize,
    pub generators: Vec<String>,
}

impl StabilizerCode {
    /// Builds a code from generators; checks sizes and caches rank and `k`.
    ///
    /// Group-level invariants (commutation, `-I` exclusion) are checked by
    /// [`validate`](Self::validate), not here, so that deliberately broken
    /// inputs can be constructed and reported on.
    pub fn new(n_qubits: usize, generators: Vec<PauliOperator>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidCode("zero qubits".into()));
        }
        if let Some(g) = generators.iter().find(|g| g.n_qubits() != n_qubits) {
            return Err(Error::DimensionMismatch(format!(
                "generator on {} qubits in a {}-qubit code",
                g.n_qubits(),
                n_qubits
            )));
        }
        let rank = gf2_rank(&bit_matrix(&generators, n_qubits));
        let k = n_qubits - rank;
        Ok(StabilizerCode {
            n_qubits,
            generators,
            rank,
            k,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    /// Number of independent generators, `G(S)`.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of logical qubits, `k = N - G(S)`.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Checks the two group invariants: all generator pairs commute, and no
    /// product of generators equals `-I`. Reports the first violation.
    pub fn validate(&self) -> std::result::Result<(), Violation> {
        for (i, g) in self.generators.iter().enumerate() {
            if g.mul(g).expect("same size").phase() != 0 {
                return Err(Violation::NonHermitian(i));
            }
        }
        for i in 0..self.generators.len() {
            for j in (i + 1)..self.generators.len() {
                if self.generators[i]
                    .symplectic_product(&self.generators[j])
                    .expect("same size")
                    == 1
                {
                    return Err(Violation::AnticommutingPair(i, j));
                }
            }
        }
        // Eliminate with full group multiplication so phases ride along; a
        // combination that cancels every letter but carries phase 2 is -I.
        let mut rows: Vec<(PauliOperator, Vec<usize>)> = self
            .generators
            .iter()
            .enumerate()
            .map(|(i, g)| (g.clone(), vec![i]))
            .collect();
        let mut r = 0;
        for c in 0..2 * self.n_qubits {
            let Some(p) = (r..rows.len()).find(|&i| rows[i].0.symplectic_row().get(c)) else {
                continue;
            };
            rows.swap(r, p);
            let (pivot_op, pivot_src) = rows[r].clone();
            for (i, (op, src)) in rows.iter_mut().enumerate() {
                if i != r && op.symplectic_row().get(c) {
                    *op = op.mul(&pivot_op).expect("same size");
                    src.extend_from_slice(&pivot_src);
                }
            }
            r += 1;
            if r == rows.len() {
                break;
            }
        }
        for (op, src) in &rows[r..] {
            debug_assert!(op.is_identity_bits());
            if op.phase() != 0 {
                let mut idx: Vec<usize> = src.clone();
                idx.sort_unstable();
                // Indices appearing an even number of times cancel.
                let mut odd = Vec::new();
                for &i in &idx {
                    if odd.last() == Some(&i) {
                        odd.pop();
                    } else {
                        odd.push(i);
                    }
                }
                return Err(Violation::MinusIdentity(odd));
            }
        }
        Ok(())
    }

    /// The generator bit matrix, one `[x | z]` row per generator.
    pub fn bit_matrix(&self) -> BinaryMatrix {
        bit_matrix(&self.generators, self.n_qubits)
    }

    /// Rows `[z | x]` per generator: multiplying this matrix by an operator's
    /// `[x | z]` row yields its syndrome (one bit per generator).
    fn commutation_matrix(&self) -> BinaryMatrix {
        let rows = self
            .generators
            .iter()
            .map(|g| g.z_bits().concat(g.x_bits()))
            .collect();
        BinaryMatrix::from_rows(rows)
    }

    /// Syndrome of an operator: bit `j` set when generator `j` anticommutes.
    pub fn syndrome(&self, op: &PauliOperator) -> Result<BitVec> {
        if op.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "operator on {} qubits, code on {}",
                op.n_qubits(),
                self.n_qubits
            )));
        }
        Ok(self.commutation_matrix().mul_vec(&op.symplectic_row()))
    }

    /// True when the operator's bit content lies in the stabilizer group
    /// (phases are quotiented out, as everywhere in the counting layer).
    pub fn contains_in_group(&self, op: &PauliOperator) -> bool {
        gf2_solve_rowspace(&self.bit_matrix(), &op.symplectic_row()).is_some()
    }

    /// True for centralizer elements outside the stabilizer group.
    pub fn is_logical(&self, op: &PauliOperator) -> Result<bool> {
        Ok(self.syndrome(op)?.is_zero() && !self.contains_in_group(op))
    }

    /// A basis of `2k` logical operators: centralizer elements independent
    /// modulo the stabilizer group. Deterministic for a fixed generator list.
    pub fn logical_basis(&self) -> Result<Vec<PauliOperator>> {
        let centralizer = gf2_kernel(&self.commutation_matrix());
        let mut quotient = IncrementalBasis::new(2 * self.n_qubits);
        for g in &self.generators {
            quotient.try_insert(&g.symplectic_row());
        }
        let mut basis = Vec::with_capacity(2 * self.k);
        for row in centralizer.rows() {
            if quotient.try_insert(row) {
                basis.push(PauliOperator::from_symplectic_row(row)?);
            }
        }
        debug_assert_eq!(basis.len(), 2 * self.k);
        Ok(basis)
    }

    /// Pairs the logical basis by symplectic Gram-Schmidt: take the first
    /// unpaired element, pair it with the first partner that anticommutes,
    /// then clean the cross products out of the rest. Input order breaks
    /// ties, so the output is deterministic.
    pub fn canonical_pairs(&self) -> Result<LogicalSet> {
        let mut pool = self.logical_basis()?;
        let mut pairs = Vec::with_capacity(self.k);
        while !pool.is_empty() {
            let u = pool.remove(0);
            let vi = pool
                .iter()
                .position(|w| u.symplectic_product(w).expect("same size") == 1)
                .ok_or_else(|| {
                    Error::InvalidCode("logical basis element has no anticommuting partner".into())
                })?;
            let v = pool.remove(vi);
            for w in &mut pool {
                let hits_v = w.symplectic_product(&v).expect("same size") == 1;
                let hits_u = w.symplectic_product(&u).expect("same size") == 1;
                if hits_v {
                    *w = w.mul(&u).expect("same size").with_phase(0);
                }
                if hits_u {
                    *w = w.mul(&v).expect("same size").with_phase(0);
                }
            }
            pairs.push((u.with_phase(0), v.with_phase(0)));
        }
        Ok(LogicalSet { pairs })
    }

    /// Exact code distance by enumeration in increasing weight, pruning to
    /// zero-syndrome candidates and rejecting stabilizer elements.
    pub fn code_distance_exact(&self, max_weight: usize) -> Result<DistanceResult> {
        if self.k == 0 {
            return Err(Error::NoLogicals);
        }
        // Syndrome of each single-qubit letter, so candidate syndromes are
        // XORs of precomputed columns.
        let g = self.generators.len();
        let mut letter_syndromes = vec![[BitVec::zeros(g), BitVec::zeros(g), BitVec::zeros(g)]; 0];
        letter_syndromes.reserve(self.n_qubits);
        for q in 0..self.n_qubits {
            let mut per_letter = [BitVec::zeros(g), BitVec::zeros(g), BitVec::zeros(g)];
            for (li, letter) in [crate::pauli::Letter::X, crate::pauli::Letter::Y, crate::pauli::Letter::Z]
                .into_iter()
                .enumerate()
            {
                let op = PauliOperator::single(self.n_qubits, q, letter)?;
                per_letter[li] = self.syndrome(&op)?;
            }
            letter_syndromes.push(per_letter);
        }
        let gen_matrix = self.bit_matrix();
        for w in 1..=max_weight.min(self.n_qubits) {
            let mut positions = Vec::with_capacity(w);
            let mut letters = Vec::with_capacity(w);
            if let Some(d) = self.distance_scan(
                w,
                0,
                &mut positions,
                &mut letters,
                &letter_syndromes,
                &gen_matrix,
            )? {
                return Ok(DistanceResult::Exact(d));
            }
        }
        Ok(DistanceResult::Exceeded(max_weight))
    }

    fn distance_scan(
        &self,
        w: usize,
        start: usize,
        positions: &mut Vec<usize>,
        letters: &mut Vec<usize>,
        letter_syndromes: &[[BitVec; 3]],
        gen_matrix: &BinaryMatrix,
    ) -> Result<Option<usize>> {
        if positions.len() == w {
            let mut syn = BitVec::zeros(self.generators.len());
            for (&q, &l) in positions.iter().zip(letters.iter()) {
                syn.xor_with(&letter_syndromes[q][l]);
            }
            if !syn.is_zero() {
                return Ok(None);
            }
            let mut op = PauliOperator::identity(self.n_qubits);
            for (&q, &l) in positions.iter().zip(letters.iter()) {
                let letter = [
                    crate::pauli::Letter::X,
                    crate::pauli::Letter::Y,
                    crate::pauli::Letter::Z,
                ][l];
                op.set_letter(q, letter);
            }
            if !self.contains_in_group(&op) {
                return Ok(Some(w));
            }
            return Ok(None);
        }
        let remaining = w - positions.len();
        for q in start..=(self.n_qubits - remaining) {
            positions.push(q);
            for l in 0..3 {
                letters.push(l);
                if let Some(d) = self.distance_scan(
                    w,
                    q + 1,
                    positions,
                    letters,
                    letter_syndromes,
                    gen_matrix,
                )? {
                    return Ok(Some(d));
                }
                letters.pop();
            }
            positions.pop();
        }
        let _ = gen_matrix;
        Ok(None)
    }

    /// `g_R`: the number of independent logical classes with a representative
    /// supported inside the qubit subset `R`. Computed as
    /// `G(C_R) - G(S_R)` from two rank computations.
    pub fn g_region(&self, region: &[usize]) -> Result<usize> {
        let mut qubits: Vec<usize> = region.to_vec();
        qubits.sort_unstable();
        qubits.dedup();
        if let Some(&q) = qubits.iter().find(|&&q| q >= self.n_qubits) {
            return Err(Error::IndexOutOfRange(format!(
                "qubit {q} on {} qubits",
                self.n_qubits
            )));
        }
        let inside = BitVec::from_indices(self.n_qubits, &qubits);
        let outside: Vec<usize> = (0..self.n_qubits).filter(|&q| !inside.get(q)).collect();

        // Centralizer elements living on R: kernel of the restricted
        // commutation matrix (columns [x_R | z_R] of candidate operators).
        let restricted_rows: Vec<BitVec> = self
            .generators
            .iter()
            .map(|g| g.z_bits().select(&qubits).concat(&g.x_bits().select(&qubits)))
            .collect();
        let c_r = 2 * qubits.len() - gf2_rank(&BinaryMatrix::from_rows(restricted_rows));

        // Stabilizer elements living on R: combinations whose bits vanish
        // outside R, counted modulo the relation space of the generator list.
        let outside_rows: Vec<BitVec> = self
            .generators
            .iter()
            .map(|g| g.x_bits().select(&outside).concat(&g.z_bits().select(&outside)))
            .collect();
        let s_r = self.rank - gf2_rank(&BinaryMatrix::from_rows(outside_rows));

        Ok(c_r - s_r)
    }

    /// Serializes to the JSON code spec.
    pub fn to_json(&self) -> Result<String> {
        let spec = CodeSpecJson {
            n_qubits: self.n_qubits,
            generators: self.generators.iter().map(|g| g.to_string()).collect(),
        };
        Ok(serde_json::to_string_pretty(&spec)?)
    }

    /// Parses and validates the JSON code spec.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: CodeSpecJson = serde_json::from_str(text)?;
        StabilizerCode::from_spec(&spec)
    }

    /// Builds from a parsed JSON spec, validating the group invariants.
    pub fn from_spec(spec: &CodeSpecJson) -> Result<Self> {
        let generators = spec
            .generators
            .iter()
            .map(|s| s.parse::<PauliOperator>())
            .collect::<Result<Vec<_>>>()?;
        let code = StabilizerCode::new(spec.n_qubits, generators)?;
        code.validate()
            .map_err(|v| Error::InvalidCode(v.to_string()))?;
        Ok(code)
    }
}

fn bit_matrix(generators: &[PauliOperator], n_qubits: usize) -> BinaryMatrix {
    let mut m = BinaryMatrix::empty(2 * n_qubits);
    for g in generators {
        m.push_row(g.symplectic_row());
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Letter;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn code(n: usize, gens: &[&str]) -> StabilizerCode {
        let generators = gens.iter().map(|s| s.parse().unwrap()).collect();
        StabilizerCode::new(n, generators).unwrap()
    }

    /// Repetition code on a ring: the 1D nearest-neighbour bond code.
    fn ring_code(l: usize) -> StabilizerCode {
        let mut gens = Vec::new();
        for i in 0..l {
            let mut g = PauliOperator::identity(l);
            g.set_letter(i, Letter::Z);
            g.set_letter((i + 1) % l, Letter::Z);
            gens.push(g);
        }
        StabilizerCode::new(l, gens).unwrap()
    }

    /// The five-qubit code: k=1, distance 3.
    fn five_qubit_code() -> StabilizerCode {
        code(5, &["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"])
    }

    #[test]
    fn ring_code_counts() {
        let c = ring_code(5);
        assert_eq!(c.rank(), 4);
        assert_eq!(c.k(), 1);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn validate_flags_anticommuting_pair() {
        let c = code(2, &["XI", "ZI"]);
        assert_eq!(c.validate(), Err(Violation::AnticommutingPair(0, 1)));
    }

    #[test]
    fn validate_flags_minus_identity() {
        let c = code(1, &["Z", "-Z"]);
        assert_eq!(c.validate(), Err(Violation::MinusIdentity(vec![0, 1])));
    }

    #[test]
    fn validate_flags_non_hermitian_generator() {
        let c = code(1, &["+iZ"]);
        assert_eq!(c.validate(), Err(Violation::NonHermitian(0)));
    }

    #[test]
    fn validate_accepts_dependent_but_consistent_generators() {
        // ZZI * IZZ = ZIZ: dependent, but the product carries phase 0.
        let c = code(3, &["ZZI", "IZZ", "ZIZ"]);
        assert!(c.validate().is_ok());
        assert_eq!(c.rank(), 2);
        assert_eq!(c.k(), 1);
    }

    #[test]
    fn logical_basis_has_2k_commuting_members() {
        let c = five_qubit_code();
        let basis = c.logical_basis().unwrap();
        assert_eq!(basis.len(), 2);
        for b in &basis {
            assert!(c.syndrome(b).unwrap().is_zero());
            assert!(!c.contains_in_group(b));
        }
    }

    #[test]
    fn logical_class_survives_stabilizer_multiplication() {
        let c = five_qubit_code();
        for b in c.logical_basis().unwrap() {
            for g in c.generators() {
                let moved = b.mul(g).unwrap();
                assert!(c.is_logical(&moved).unwrap());
            }
        }
    }

    #[test]
    fn canonical_pairs_form_the_standard_symplectic_table() {
        for c in [ring_code(4), five_qubit_code(), code(4, &["XXXX", "ZZZZ"])] {
            let set = c.canonical_pairs().unwrap();
            assert_eq!(set.len(), c.k());
            let members: Vec<&PauliOperator> = set.members().collect();
            for (i, a) in members.iter().enumerate() {
                for (j, b) in members.iter().enumerate() {
                    let expected = u8::from(i / 2 == j / 2 && i != j);
                    assert_eq!(
                        a.symplectic_product(b).unwrap(),
                        expected,
                        "members {i} and {j}"
                    );
                }
            }
            for m in members {
                assert!(c.is_logical(m).unwrap());
            }
        }
    }

    #[test]
    fn canonical_pairs_empty_for_k_zero() {
        let c = code(1, &["Z"]);
        assert!(c.canonical_pairs().unwrap().is_empty());
    }

    #[test]
    fn ring_code_pair_matches_bit_flip_structure_up_to_stabilizers() {
        // The ring code stores one bit: Z_1 reads it, X...X flips it.
        let c = ring_code(4);
        let set = c.canonical_pairs().unwrap();
        let (l, r) = &set.pairs[0];
        let z1: PauliOperator = "ZIII".parse().unwrap();
        let all_x: PauliOperator = "XXXX".parse().unwrap();
        // Each canonical member is equivalent (mod stabilizers) to one of the
        // two references, and the pair covers both classes.
        let class_of = |op: &PauliOperator| -> u8 {
            if c.contains_in_group(&op.mul(&z1).unwrap()) {
                1
            } else if c.contains_in_group(&op.mul(&all_x).unwrap()) {
                2
            } else {
                0
            }
        };
        let classes = [class_of(l), class_of(r)];
        assert!(classes.contains(&1) && classes.contains(&2), "{l} {r}");
    }

    #[test]
    fn distance_of_ring_code_is_one() {
        for l in 3..=8 {
            let c = ring_code(l);
            assert_eq!(
                c.code_distance_exact(3).unwrap(),
                DistanceResult::Exact(1)
            );
        }
    }

    #[test]
    fn distance_of_five_qubit_code_is_three() {
        let c = five_qubit_code();
        assert_eq!(c.code_distance_exact(5).unwrap(), DistanceResult::Exact(3));
    }

    #[test]
    fn distance_reports_exceeded() {
        let c = five_qubit_code();
        assert_eq!(
            c.code_distance_exact(2).unwrap(),
            DistanceResult::Exceeded(2)
        );
    }

    #[test]
    fn distance_requires_logicals() {
        let c = code(1, &["Z"]);
        assert!(matches!(
            c.code_distance_exact(1),
            Err(Error::NoLogicals)
        ));
    }

    #[test]
    fn distance_cannot_decrease_when_stabilizer_grows() {
        // Promote a logical operator to a stabilizer generator: the logical
        // set shrinks, so the minimum weight cannot drop.
        let c = code(4, &["XXXX", "ZZZZ"]);
        let d0 = match c.code_distance_exact(4).unwrap() {
            DistanceResult::Exact(d) => d,
            _ => panic!(),
        };
        let mut gens: Vec<PauliOperator> = c.generators().to_vec();
        gens.push("XXII".parse().unwrap());
        let bigger = StabilizerCode::new(4, gens).unwrap();
        assert!(bigger.validate().is_ok());
        assert_eq!(bigger.k(), 1);
        let d1 = match bigger.code_distance_exact(4).unwrap() {
            DistanceResult::Exact(d) => d,
            _ => panic!(),
        };
        assert!(d1 >= d0);
    }

    #[test]
    fn g_region_full_support_is_2k() {
        let c = five_qubit_code();
        let all: Vec<usize> = (0..5).collect();
        assert_eq!(c.g_region(&all).unwrap(), 2);
        let c = code(4, &["XXXX", "ZZZZ"]);
        let all: Vec<usize> = (0..4).collect();
        assert_eq!(c.g_region(&all).unwrap(), 4);
    }

    #[test]
    fn g_region_single_qubit_of_ring_code_holds_the_bit() {
        // Z_1 is a logical inside one site, so g of a single site is 1.
        let c = ring_code(5);
        assert_eq!(c.g_region(&[0]).unwrap(), 1);
        assert_eq!(c.g_region(&[]).unwrap(), 0);
    }

    #[test]
    fn g_region_bipartition_law_on_random_subsets() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        for c in [ring_code(6), five_qubit_code(), code(4, &["XXXX", "ZZZZ"])] {
            let n = c.n_qubits();
            for _ in 0..40 {
                let inside: Vec<usize> = (0..n).filter(|_| rng.random_range(0..2) == 1).collect();
                let outside: Vec<usize> =
                    (0..n).filter(|q| !inside.contains(q)).collect();
                assert_eq!(
                    c.g_region(&inside).unwrap() + c.g_region(&outside).unwrap(),
                    2 * c.k()
                );
            }
        }
    }

    #[test]
    fn json_round_trip_and_validation() {
        let c = five_qubit_code();
        let text = c.to_json().unwrap();
        let back = StabilizerCode::from_json(&text).unwrap();
        assert_eq!(back.n_qubits(), 5);
        assert_eq!(back.k(), 1);
        assert_eq!(
            back.generators().iter().map(ToString::to_string).collect::<Vec<_>>(),
            c.generators().iter().map(ToString::to_string).collect::<Vec<_>>()
        );
        // Broken input is rejected on read.
        let bad = r#"{"n_qubits": 2, "generators": ["XI", "ZI"]}"#;
        assert!(StabilizerCode::from_json(bad).is_err());
    }
}
