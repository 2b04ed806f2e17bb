//! Region machinery over lattice layouts and the structural queries built on
//! it: translation equivalence of logical classes, dimension classification
//! of canonical pairs, the dimensional duality check, support-constrained
//! deformation, and the topological-order criterion.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::gf2::{gf2_solve_rowspace, BinaryMatrix, BitVec};
use crate::lattice::{combinations, translate_operator, LatticeLayout};
use crate::pauli::PauliOperator;
use crate::stabilizer::StabilizerCode;
use crate::{Error, Result};

/// A set of composite particles on a layout; the derived qubit set is the
/// union of the members' qubits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    layout: LatticeLayout,
    members: BTreeSet<Vec<usize>>,
}

impl Region {
    /// Region from explicit particle coordinates (wrapped into range).
    pub fn from_particles(layout: &LatticeLayout, coords: &[Vec<i64>]) -> Result<Region> {
        let mut members = BTreeSet::new();
        for c in coords {
            let site = layout.site_index(c)?;
            members.insert(layout.site_coords(site));
        }
        Ok(Region {
            layout: layout.clone(),
            members,
        })
    }

    /// The corner-anchored box of particles with coordinates
    /// `0 <= c_a < extents[a]` on every axis.
    pub fn corner_box(layout: &LatticeLayout, extents: &[usize]) -> Result<Region> {
        if extents.len() != layout.d() {
            return Err(Error::DimensionMismatch(format!(
                "{} extents on a {}-dimensional lattice",
                extents.len(),
                layout.d()
            )));
        }
        for (a, (&x, &n)) in extents.iter().zip(layout.dims()).enumerate() {
            if x < 1 || x > n {
                return Err(Error::IndexOutOfRange(format!(
                    "extent {x} on axis {a} with {n} particles"
                )));
            }
        }
        let mut members = BTreeSet::new();
        let mut cursor = vec![0usize; layout.d()];
        loop {
            members.insert(cursor.clone());
            let mut a = 0;
            loop {
                if a == layout.d() {
                    return Ok(Region {
                        layout: layout.clone(),
                        members,
                    });
                }
                cursor[a] += 1;
                if cursor[a] < extents[a] {
                    break;
                }
                cursor[a] = 0;
                a += 1;
            }
        }
    }

    /// The topological unit box that spans the torus along the masked axes
    /// and has width one along the rest.
    pub fn spanning_box(layout: &LatticeLayout, winding_axes: &[bool]) -> Result<Region> {
        if winding_axes.len() != layout.d() {
            return Err(Error::DimensionMismatch(format!(
                "{} axis flags on a {}-dimensional lattice",
                winding_axes.len(),
                layout.d()
            )));
        }
        let extents: Vec<usize> = winding_axes
            .iter()
            .zip(layout.dims())
            .map(|(&w, &n)| if w { n } else { 1 })
            .collect();
        Region::corner_box(layout, &extents)
    }

    /// Union of all unit boxes winding along exactly `m` axes.
    pub fn winding_union(layout: &LatticeLayout, m: usize) -> Result<Region> {
        if m > layout.d() {
            return Err(Error::IndexOutOfRange(format!(
                "winding number {m} on a {}-dimensional lattice",
                layout.d()
            )));
        }
        let mut members = BTreeSet::new();
        for axes in combinations(layout.d(), m) {
            let mut mask = vec![false; layout.d()];
            for a in axes {
                mask[a] = true;
            }
            members.extend(Region::spanning_box(layout, &mask)?.members);
        }
        Ok(Region {
            layout: layout.clone(),
            members,
        })
    }

    pub fn layout(&self) -> &LatticeLayout {
        &self.layout
    }

    pub fn particles(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.members.iter()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, coords: &[i64]) -> Result<bool> {
        let site = self.layout.site_index(coords)?;
        Ok(self.members.contains(&self.layout.site_coords(site)))
    }

    /// All particles not in this region.
    pub fn complement(&self) -> Region {
        let mut members = BTreeSet::new();
        for site in 0..self.layout.n_sites() {
            let coords = self.layout.site_coords(site);
            if !self.members.contains(&coords) {
                members.insert(coords);
            }
        }
        Region {
            layout: self.layout.clone(),
            members,
        }
    }

    pub fn union(&self, other: &Region) -> Result<Region> {
        if self.layout != other.layout {
            return Err(Error::DimensionMismatch(
                "regions on different layouts".into(),
            ));
        }
        let mut members = self.members.clone();
        members.extend(other.members.iter().cloned());
        Ok(Region {
            layout: self.layout.clone(),
            members,
        })
    }

    /// Sorted qubit indices covered by the member particles.
    pub fn qubits(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.members.len() * self.layout.v());
        for coords in &self.members {
            let signed: Vec<i64> = coords.iter().map(|&c| c as i64).collect();
            out.extend(self.layout.particle_qubits(&signed).expect("member in range"));
        }
        out.sort_unstable();
        out
    }

    /// Membership mask over qubits.
    pub fn qubit_mask(&self) -> BitVec {
        BitVec::from_indices(self.layout.n_qubits(), &self.qubits())
    }
}

/// Result of the per-axis translation-equivalence test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TranslationCheck {
    Pass,
    /// The first axis on which `l * T(l)` leaves the stabilizer group.
    Fail { axis: usize },
}

/// Tests whether a logical operator is equivalent to its unit translate
/// along every axis (their product lies in the stabilizer group).
pub fn translation_equivalence_check(
    code: &StabilizerCode,
    layout: &LatticeLayout,
    l: &PauliOperator,
) -> Result<TranslationCheck> {
    if !code.is_logical(l)? {
        return Err(Error::InvalidCode(
            "translation equivalence needs a logical operator".into(),
        ));
    }
    for axis in 0..layout.d() {
        let translated = translate_operator(layout, l, axis, 1)?;
        let product = l.mul(&translated)?;
        if !code.contains_in_group(&product) {
            return Ok(TranslationCheck::Fail { axis });
        }
    }
    Ok(TranslationCheck::Pass)
}

/// Dimensions assigned to one canonical anticommuting pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairDimensions {
    pub left: usize,
    pub right: usize,
}

/// Logical-operator structure by dimension: `g_by_dimension[m]` counts the
/// classes that first fit a winding union of order `m`, and `pairs` lists
/// the dimensions of each canonical anticommuting pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualityReport {
    pub g_by_dimension: Vec<usize>,
    pub pairs: Vec<PairDimensions>,
}

/// Finds a stabilizer-equivalent representative supported inside `target`,
/// or `None` when the class has no such representative.
pub fn deform_logical(
    code: &StabilizerCode,
    l: &PauliOperator,
    target: &Region,
) -> Result<Option<PauliOperator>> {
    let n = code.n_qubits();
    if l.n_qubits() != n || target.layout().n_qubits() != n {
        return Err(Error::DimensionMismatch(
            "operator, code, and region sizes differ".into(),
        ));
    }
    let mask = target.qubit_mask();
    let outside: Vec<usize> = (0..n).filter(|&q| !mask.get(q)).collect();
    // Solve sum_j c_j g_j = l on the outside columns; multiplying by that
    // stabilizer element then clears every bit outside the target.
    let rows: Vec<BitVec> = code
        .generators()
        .iter()
        .map(|g| g.x_bits().select(&outside).concat(&g.z_bits().select(&outside)))
        .collect();
    let rhs = l.x_bits().select(&outside).concat(&l.z_bits().select(&outside));
    let Some(coeffs) = gf2_solve_rowspace(&BinaryMatrix::from_rows(rows), &rhs) else {
        return Ok(None);
    };
    let mut result = l.clone();
    for j in coeffs.ones() {
        result = result.mul(&code.generators()[j])?;
    }
    let result = result.with_phase(0);
    debug_assert!(result.supported_inside(&mask));
    Ok(Some(result))
}

/// The least winding order whose union region holds a representative of the
/// class of `l`; this is the dimension of the logical class.
pub fn operator_dimension(
    code: &StabilizerCode,
    layout: &LatticeLayout,
    l: &PauliOperator,
) -> Result<usize> {
    for m in 0..=layout.d() {
        let region = Region::winding_union(layout, m)?;
        if deform_logical(code, l, &region)?.is_some() {
            return Ok(m);
        }
    }
    Err(Error::InvalidCode(
        "operator does not fit the full lattice".into(),
    ))
}

/// Computes the dimension profile `g_m` from nested winding unions and the
/// per-pair dimension table from the canonical pairs.
pub fn classify_dimensions(code: &StabilizerCode, layout: &LatticeLayout) -> Result<DualityReport> {
    let d = layout.d();
    let mut g_nested = Vec::with_capacity(d + 1);
    for m in 0..=d {
        let region = Region::winding_union(layout, m)?;
        g_nested.push(code.g_region(&region.qubits())?);
    }
    let mut g_by_dimension = Vec::with_capacity(d + 1);
    g_by_dimension.push(g_nested[0]);
    for m in 1..=d {
        g_by_dimension.push(g_nested[m] - g_nested[m - 1]);
    }
    let mut pairs = Vec::new();
    for (left_op, right_op) in code.canonical_pairs()?.pairs {
        pairs.push(PairDimensions {
            left: operator_dimension(code, layout, &left_op)?,
            right: operator_dimension(code, layout, &right_op)?,
        });
    }
    Ok(DualityReport {
        g_by_dimension,
        pairs,
    })
}

/// Dimensional duality: the profile must be palindromic and every pair's
/// dimensions must sum to the lattice dimension.
pub fn verify_duality(report: &DualityReport) -> bool {
    let d = report.g_by_dimension.len() - 1;
    let palindromic = (0..=d).all(|m| report.g_by_dimension[m] == report.g_by_dimension[d - m]);
    let sums = report.pairs.iter().all(|p| p.left + p.right == d);
    palindromic && sums
}

/// Stabilizer-state topological order: no logical class may fit inside the
/// contractible box one particle short of the lattice on every axis, nor
/// inside any single particle.
pub fn topological_order_check(code: &StabilizerCode, layout: &LatticeLayout) -> Result<bool> {
    if layout.dims().iter().any(|&n| n < 2) {
        return Err(Error::InvalidLattice(
            "topological order needs at least two particles per axis".into(),
        ));
    }
    let shrunk: Vec<usize> = layout.dims().iter().map(|&n| n - 1).collect();
    let contractible = Region::corner_box(layout, &shrunk)?;
    if code.g_region(&contractible.qubits())? != 0 {
        return Ok(false);
    }
    for site in 0..layout.n_sites() {
        let coords: Vec<i64> = layout.site_coords(site).iter().map(|&c| c as i64).collect();
        let single = Region::from_particles(layout, &[coords])?;
        if code.g_region(&single.qubits())? != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}
