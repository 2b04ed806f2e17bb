//! Analysis toolkit for translation- and scale-symmetric stabilizer codes on
//! periodic lattices.
//!
//! The crate is organized bottom-up:
//!
//! * [`gf2`] — bit-packed vectors/matrices over GF(2) and the elimination
//!   kernel (rank, nullspace, solve) everything else runs on.
//! * [`pauli`] — Pauli operators in binary symplectic form with exact phase
//!   tracking, plus the text format.
//! * [`stabilizer`] — stabilizer codes: validation, logical operators,
//!   canonical anticommuting pairs, region counts `g_R`, exact distance.
//! * [`lattice`] — builders for Ising and D-dimensional Toric codes on tori
//!   of composite particles, translations, coarse-graining.
//! * [`analysis`] — lattice regions `P`/`Q`/`R`, translation equivalence,
//!   dimension classification and duality of logical operators, deformation
//!   by stabilizer multiplication, the topological-order criterion.
//! * [`columns`] — column-operator combinatorics: halving maps,
//!   characteristic vectors/columns, the star product, binomial parity,
//!   identity-generating matrices, and periodic decomposition of plane
//!   logical operators.
//! * [`barrier`] — exact excitation energies and minimax energy barriers for
//!   building a logical operator one qubit at a time.
//! * [`thermal`] — exact partition functions for commuting-Pauli
//!   Hamiltonians and Metropolis sampling of CSS codes in the error picture:
//!   order parameters and memory times.

pub mod analysis;
pub mod barrier;
pub mod columns;
pub mod error;
pub mod gf2;
pub mod lattice;
pub mod pauli;
pub mod stabilizer;
pub mod thermal;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
