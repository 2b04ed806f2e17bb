//! Pauli operators in binary symplectic form.
//!
//! An operator is stored as `i^phase · W_1 ⊗ ... ⊗ W_n` where each letter
//! `W_q ∈ {I, X, Y, Z}` is encoded by the bit pair `(x_q, z_q)`:
//! `(0,0) = I`, `(1,0) = X`, `(0,1) = Z`, `(1,1) = Y`. The phase is the
//! exponent of `i` in front of the literal letter string, kept mod 4, so the
//! printed form `-iXY` has `phase = 3`. The symplectic product deliberately
//! ignores the phase: commutation is a property of the bit content alone.

use std::fmt;
use std::str::FromStr;

use crate::gf2::BitVec;
use crate::{Error, Result};

/// A single Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    fn from_bits(x: bool, z: bool) -> Letter {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (false, true) => Letter::Z,
            (true, true) => Letter::Y,
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Z => (false, true),
            Letter::Y => (true, true),
        }
    }

    fn to_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

/// An n-qubit Pauli operator with phase.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n_qubits: usize,
    x_bits: BitVec,
    z_bits: BitVec,
    phase: u8,
}

impl PauliOperator {
    /// The identity on `n` qubits.
    pub fn identity(n_qubits: usize) -> Self {
        PauliOperator {
            n_qubits,
            x_bits: BitVec::zeros(n_qubits),
            z_bits: BitVec::zeros(n_qubits),
            phase: 0,
        }
    }

    /// Builds from explicit bit vectors and a phase (exponent of i, mod 4).
    pub fn from_parts(x_bits: BitVec, z_bits: BitVec, phase: u8) -> Result<Self> {
        if x_bits.len() != z_bits.len() {
            return Err(Error::DimensionMismatch(format!(
                "x has {} bits, z has {}",
                x_bits.len(),
                z_bits.len()
            )));
        }
        Ok(PauliOperator {
            n_qubits: x_bits.len(),
            x_bits,
            z_bits,
            phase: phase % 4,
        })
    }

    /// A single letter at qubit `q`, identity elsewhere.
    pub fn single(n_qubits: usize, q: usize, letter: Letter) -> Result<Self> {
        if q >= n_qubits {
            return Err(Error::IndexOutOfRange(format!(
                "qubit {q} on {n_qubits} qubits"
            )));
        }
        let mut op = PauliOperator::identity(n_qubits);
        op.set_letter(q, letter);
        Ok(op)
    }

    /// Builds from a `[x | z]` symplectic row of length `2 n`, phase 0.
    pub fn from_symplectic_row(row: &BitVec) -> Result<Self> {
        if row.len() % 2 != 0 {
            return Err(Error::DimensionMismatch(format!(
                "symplectic row length {} is odd",
                row.len()
            )));
        }
        let n = row.len() / 2;
        let mut x = BitVec::zeros(n);
        let mut z = BitVec::zeros(n);
        for i in row.ones() {
            if i < n {
                x.set(i, true);
            } else {
                z.set(i - n, true);
            }
        }
        PauliOperator::from_parts(x, z, 0)
    }

    /// The `[x | z]` symplectic row of this operator (phase dropped).
    pub fn symplectic_row(&self) -> BitVec {
        self.x_bits.concat(&self.z_bits)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_bits(&self) -> &BitVec {
        &self.x_bits
    }

    pub fn z_bits(&self) -> &BitVec {
        &self.z_bits
    }

    /// Exponent of `i` in front of the letter string, mod 4.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    /// Same bit content with the phase replaced.
    pub fn with_phase(&self, phase: u8) -> Self {
        let mut op = self.clone();
        op.phase = phase % 4;
        op
    }

    pub fn letter(&self, q: usize) -> Letter {
        Letter::from_bits(self.x_bits.get(q), self.z_bits.get(q))
    }

    pub fn set_letter(&mut self, q: usize, letter: Letter) {
        let (x, z) = letter.bits();
        self.x_bits.set(q, x);
        self.z_bits.set(q, z);
    }

    /// True when both bit vectors are zero (phase may be anything).
    pub fn is_identity_bits(&self) -> bool {
        self.x_bits.is_zero() && self.z_bits.is_zero()
    }

    /// Qubits carrying a non-identity letter.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n_qubits)
            .filter(|&q| self.x_bits.get(q) || self.z_bits.get(q))
            .collect()
    }

    /// Number of qubits carrying a non-identity letter.
    pub fn weight(&self) -> usize {
        self.x_bits.count_ones() + self.z_bits.count_ones() - self.x_bits.and_count(&self.z_bits)
    }

    /// Number of `Y` letters (positions with both bits set).
    fn y_count(&self) -> usize {
        self.x_bits.and_count(&self.z_bits)
    }

    /// Group product `self · other`, with exact phase accumulation.
    pub fn mul(&self, other: &PauliOperator) -> Result<PauliOperator> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {} qubits",
                self.n_qubits, other.n_qubits
            )));
        }
        // Work in X^x Z^z normal form: i^p ∏W = i^(p + y) X^x Z^z with
        // y = #Y letters. Commuting Z^z1 past X^x2 costs (-1)^|z1 ∧ x2|.
        let q1 = u32::from(self.phase) + self.y_count() as u32;
        let q2 = u32::from(other.phase) + other.y_count() as u32;
        let swaps = self.z_bits.and_count(&other.x_bits) as u32;
        let mut x = self.x_bits.clone();
        x.xor_with(&other.x_bits);
        let mut z = self.z_bits.clone();
        z.xor_with(&other.z_bits);
        let y_out = x.and_count(&z) as u32;
        let phase = (q1 + q2 + 2 * swaps + 4 - (y_out % 4)) % 4;
        Ok(PauliOperator {
            n_qubits: self.n_qubits,
            x_bits: x,
            z_bits: z,
            phase: phase as u8,
        })
    }

    /// 0 when the operators commute, 1 when they anticommute.
    pub fn symplectic_product(&self, other: &PauliOperator) -> Result<u8> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {} qubits",
                self.n_qubits, other.n_qubits
            )));
        }
        let a = self.x_bits.dot(&other.z_bits);
        let b = self.z_bits.dot(&other.x_bits);
        Ok(u8::from(a != b))
    }

    pub fn commutes_with(&self, other: &PauliOperator) -> Result<bool> {
        Ok(self.symplectic_product(other)? == 0)
    }

    /// Hermitian operators square to the identity with phase 0.
    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// The operator with qubits rearranged: output letter at `perm[q]` is the
    /// input letter at `q`. `perm` must be a permutation of `0..n`.
    pub fn permuted(&self, perm: &[usize]) -> Result<PauliOperator> {
        if perm.len() != self.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "permutation of length {} on {} qubits",
                perm.len(),
                self.n_qubits
            )));
        }
        let mut x = BitVec::zeros(self.n_qubits);
        let mut z = BitVec::zeros(self.n_qubits);
        for q in 0..self.n_qubits {
            if self.x_bits.get(q) {
                x.set(perm[q], true);
            }
            if self.z_bits.get(q) {
                z.set(perm[q], true);
            }
        }
        Ok(PauliOperator {
            n_qubits: self.n_qubits,
            x_bits: x,
            z_bits: z,
            phase: self.phase,
        })
    }

    /// True when every non-identity letter sits inside `allowed` qubits.
    pub fn supported_inside(&self, allowed: &BitVec) -> bool {
        debug_assert_eq!(allowed.len(), self.n_qubits);
        self.support().iter().all(|&q| allowed.get(q))
    }
}

/// Free-function form of [`PauliOperator::mul`].
pub fn multiply(a: &PauliOperator, b: &PauliOperator) -> Result<PauliOperator> {
    a.mul(b)
}

/// Free-function form of [`PauliOperator::symplectic_product`].
pub fn symplectic_product(a: &PauliOperator, b: &PauliOperator) -> Result<u8> {
    a.symplectic_product(b)
}

/// Free-function form of [`PauliOperator::weight`].
pub fn weight(a: &PauliOperator) -> usize {
    a.weight()
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}")?;
        for q in 0..self.n_qubits {
            write!(f, "{}", self.letter(q).to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    /// Parses the text form: an optional sign prefix (`+`, `-`, `+i`, `-i`)
    /// followed by one letter from `{I, X, Y, Z}` per qubit, e.g. `-XZIY`.
    fn from_str(s: &str) -> Result<Self> {
        // Tolerate the typographic minus sign on input.
        let s = s.trim().replace('\u{2212}', "-");
        let (phase, rest) = if let Some(r) = s.strip_prefix("+i") {
            (1u8, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (3u8, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0u8, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2u8, r)
        } else {
            (0u8, s.as_str())
        };
        if rest.is_empty() {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        let mut op = PauliOperator::identity(rest.chars().count());
        op.phase = phase;
        for (q, c) in rest.chars().enumerate() {
            let letter = match c {
                'I' => Letter::I,
                'X' => Letter::X,
                'Y' => Letter::Y,
                'Z' => Letter::Z,
                other => {
                    return Err(Error::Parse(format!(
                        "invalid Pauli letter {other:?} at position {q}"
                    )))
                }
            };
            op.set_letter(q, letter);
        }
        Ok(op)
    }
}
