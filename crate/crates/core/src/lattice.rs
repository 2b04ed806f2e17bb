//! Code families on D-dimensional tori of composite particles: layouts,
//! builders, translations, and coarse-graining.
//!
//! A layout places `v` qubits on each site of an `n_1 x ... x n_D` periodic
//! lattice. Builders produce nearest-neighbour bond codes (`ising`), cell
//! codes with qubits on m-cells (`toric`), and translation-stamped custom
//! generator patterns (`pattern`, used for counterexample fixtures).

use serde::{Deserialize, Serialize};

use crate::pauli::{Letter, PauliOperator};
use crate::stabilizer::StabilizerCode;
use crate::{Error, Result};

/// Coordinates of composite particles on a periodic hypercubic lattice,
/// with `v` qubits per particle.
///
/// The index map is the bijection
/// `qubit = (c_1 + n_1*(c_2 + n_2*(...))) * v + intra`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeLayout {
    dims: Vec<usize>,
    v: usize,
}

impl LatticeLayout {
    pub fn new(dims: Vec<usize>, v: usize) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&n| n == 0) || v == 0 {
            return Err(Error::InvalidLattice(format!(
                "layout needs positive dims and v, got dims={dims:?} v={v}"
            )));
        }
        Ok(LatticeLayout { dims, v })
    }

    /// Number of axes, `D`.
    pub fn d(&self) -> usize {
        self.dims.len()
    }

    /// Particles per direction, `(n_1, ..., n_D)`.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Qubits per composite particle.
    pub fn v(&self) -> usize {
        self.v
    }

    pub fn n_sites(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn n_qubits(&self) -> usize {
        self.v * self.n_sites()
    }

    /// Site rank of a coordinate vector; coordinates wrap.
    pub fn site_index(&self, coords: &[i64]) -> Result<usize> {
        if coords.len() != self.d() {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinates on a {}-dimensional lattice",
                coords.len(),
                self.d()
            )));
        }
        let mut rank = 0usize;
        for a in (0..self.d()).rev() {
            let n = self.dims[a] as i64;
            rank = rank * self.dims[a] + coords[a].rem_euclid(n) as usize;
        }
        Ok(rank)
    }

    /// Inverse of [`site_index`](Self::site_index) on canonical coordinates.
    pub fn site_coords(&self, mut site: usize) -> Vec<usize> {
        let mut coords = Vec::with_capacity(self.d());
        for &n in &self.dims {
            coords.push(site % n);
            site /= n;
        }
        coords
    }

    pub fn qubit_index(&self, coords: &[i64], intra: usize) -> Result<usize> {
        if intra >= self.v {
            return Err(Error::IndexOutOfRange(format!(
                "intra index {intra} with v={}",
                self.v
            )));
        }
        Ok(self.site_index(coords)? * self.v + intra)
    }

    /// Splits a qubit index into (site coordinates, intra index).
    pub fn qubit_site(&self, qubit: usize) -> Result<(Vec<usize>, usize)> {
        if qubit >= self.n_qubits() {
            return Err(Error::IndexOutOfRange(format!(
                "qubit {qubit} on {} qubits",
                self.n_qubits()
            )));
        }
        Ok((self.site_coords(qubit / self.v), qubit % self.v))
    }

    /// Qubit permutation of a unit-translation power: `perm[q]` is where `q`
    /// lands after shifting coordinates by `amount` along `axis`.
    pub fn translation_permutation(&self, axis: usize, amount: i64) -> Result<Vec<usize>> {
        if axis >= self.d() {
            return Err(Error::IndexOutOfRange(format!(
                "axis {axis} on a {}-dimensional lattice",
                self.d()
            )));
        }
        let mut perm = vec![0usize; self.n_qubits()];
        for (q, target) in perm.iter_mut().enumerate() {
            let (coords, intra) = self.qubit_site(q)?;
            let mut shifted: Vec<i64> = coords.iter().map(|&c| c as i64).collect();
            shifted[axis] += amount;
            *target = self.qubit_index(&shifted, intra)?;
        }
        Ok(perm)
    }

    /// All qubits belonging to the given particle coordinates.
    pub fn particle_qubits(&self, coords: &[i64]) -> Result<Vec<usize>> {
        let site = self.site_index(coords)?;
        Ok((site * self.v..(site + 1) * self.v).collect())
    }
}

/// One translation-stamped generator shape: a letter at each site offset.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorPattern {
    /// Site offsets relative to the stamp position, one per letter.
    pub offsets: Vec<Vec<i64>>,
    /// Letters as text, e.g. `"ZZZ"`; same length as `offsets`.
    pub letters: String,
}

/// A size-indexed builder for a family of lattice codes.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum CodeFamily {
    /// Nearest-neighbour two-body bond code, one qubit per site.
    Ising {
        #[serde(rename = "D")]
        d: usize,
    },
    /// Cell code with qubits on m-cells of a D-torus.
    Toric {
        #[serde(rename = "D")]
        d: usize,
        m: usize,
    },
    /// Custom patterns stamped at every site (one qubit per site).
    Pattern {
        #[serde(rename = "D")]
        d: usize,
        terms: Vec<GeneratorPattern>,
    },
}

impl CodeFamily {
    pub fn d(&self) -> usize {
        match self {
            CodeFamily::Ising { d } | CodeFamily::Toric { d, .. } | CodeFamily::Pattern { d, .. } => {
                *d
            }
        }
    }

    /// Builds the family member of the given size. `size` is a full dims
    /// vector, or a single entry meaning the same extent on every axis.
    pub fn build(&self, size: &[usize]) -> Result<(StabilizerCode, LatticeLayout)> {
        let dims: Vec<usize> = if size.len() == 1 {
            vec![size[0]; self.d()]
        } else {
            size.to_vec()
        };
        if dims.len() != self.d() {
            return Err(Error::InvalidLattice(format!(
                "size {size:?} for a {}-dimensional family",
                self.d()
            )));
        }
        match self {
            CodeFamily::Ising { d } => build_ising(*d, &dims),
            CodeFamily::Toric { d, m } => {
                if dims.iter().any(|&n| n != dims[0]) {
                    return Err(Error::InvalidLattice(format!(
                        "cell codes use one side length, got {dims:?}"
                    )));
                }
                build_toric(*d, *m, dims[0])
            }
            CodeFamily::Pattern { d, terms } => build_pattern(*d, terms, &dims),
        }
    }
}

/// Per-size logical counts from [`check_scale_symmetry`].
#[derive(Clone, Debug, Serialize)]
pub struct ScaleSymmetryEntry {
    pub size: Vec<usize>,
    pub k: usize,
}

/// Whether the logical count is independent of the system size.
#[derive(Clone, Debug, Serialize)]
pub struct ScaleSymmetryReport {
    pub entries: Vec<ScaleSymmetryEntry>,
    pub passes: bool,
}

/// Nearest-neighbour ZZ bond code on a D-torus: one qubit per site, one bond
/// generator per site per axis, a single logical qubit.
pub fn build_ising(d: usize, dims: &[usize]) -> Result<(StabilizerCode, LatticeLayout)> {
    if d == 0 || dims.len() != d {
        return Err(Error::InvalidLattice(format!(
            "dimension {d} with dims {dims:?}"
        )));
    }
    if dims.iter().any(|&n| n < 2) {
        return Err(Error::InvalidLattice(format!(
            "extents must be at least 2 to avoid bond duplication under wrap, got {dims:?}"
        )));
    }
    let layout = LatticeLayout::new(dims.to_vec(), 1)?;
    let n = layout.n_qubits();
    let mut generators = Vec::with_capacity(d * layout.n_sites());
    for site in 0..layout.n_sites() {
        let coords: Vec<i64> = layout.site_coords(site).iter().map(|&c| c as i64).collect();
        for axis in 0..d {
            let mut shifted = coords.clone();
            shifted[axis] += 1;
            let mut g = PauliOperator::identity(n);
            g.set_letter(layout.qubit_index(&coords, 0)?, Letter::Z);
            g.set_letter(layout.qubit_index(&shifted, 0)?, Letter::Z);
            generators.push(g);
        }
    }
    let code = StabilizerCode::new(n, generators)?;
    Ok((code, layout))
}

/// Cell code on a D-torus of side `l` with qubits on m-cells: Z generators
/// on (m+1)-cells, X generators on (m-1)-cells, `k = C(D,m)`.
///
/// An m-cell is identified by (base vertex, sorted m-subset of axes); the
/// subset's lexicographic rank is the qubit's intra index.
pub fn build_toric(d: usize, m: usize, l: usize) -> Result<(StabilizerCode, LatticeLayout)> {
    if d == 0 || m > d {
        return Err(Error::InvalidLattice(format!(
            "cell dimension {m} in a {d}-dimensional lattice"
        )));
    }
    if l < 2 {
        return Err(Error::InvalidLattice(format!(
            "side length {l}: a cell would touch itself under wrap"
        )));
    }
    let qubit_subsets = combinations(d, m);
    let layout = LatticeLayout::new(vec![l; d], qubit_subsets.len())?;
    let n = layout.n_qubits();
    let subset_rank =
        |s: &[usize]| -> usize { qubit_subsets.iter().position(|t| t == s).expect("m-subset") };

    let mut generators = Vec::new();
    // Z generators: for an (m+1)-cell (y, B), one Z on each bounding m-cell
    // (y, B\{a}) and (y + e_a, B\{a}).
    if m + 1 <= d {
        for big in combinations(d, m + 1) {
            for site in 0..layout.n_sites() {
                let coords: Vec<i64> =
                    layout.site_coords(site).iter().map(|&c| c as i64).collect();
                let mut g = PauliOperator::identity(n);
                for &a in &big {
                    let face: Vec<usize> = big.iter().copied().filter(|&b| b != a).collect();
                    let intra = subset_rank(&face);
                    let mut shifted = coords.clone();
                    shifted[a] += 1;
                    g.set_letter(layout.qubit_index(&coords, intra)?, Letter::Z);
                    g.set_letter(layout.qubit_index(&shifted, intra)?, Letter::Z);
                }
                generators.push(g);
            }
        }
    }
    // X generators: for an (m-1)-cell (y, C), one X on each m-cell it bounds,
    // (y, C u {a}) and (y - e_a, C u {a}).
    if m >= 1 {
        for small in combinations(d, m - 1) {
            for site in 0..layout.n_sites() {
                let coords: Vec<i64> =
                    layout.site_coords(site).iter().map(|&c| c as i64).collect();
                let mut g = PauliOperator::identity(n);
                for a in 0..d {
                    if small.contains(&a) {
                        continue;
                    }
                    let mut grown = small.clone();
                    grown.push(a);
                    grown.sort_unstable();
                    let intra = subset_rank(&grown);
                    let mut shifted = coords.clone();
                    shifted[a] -= 1;
                    g.set_letter(layout.qubit_index(&coords, intra)?, Letter::X);
                    g.set_letter(layout.qubit_index(&shifted, intra)?, Letter::X);
                }
                generators.push(g);
            }
        }
    }
    let code = StabilizerCode::new(n, generators)?;
    Ok((code, layout))
}

/// Stamps each pattern at every site of the lattice (one qubit per site).
pub fn build_pattern(
    d: usize,
    terms: &[GeneratorPattern],
    dims: &[usize],
) -> Result<(StabilizerCode, LatticeLayout)> {
    if d == 0 || dims.len() != d || dims.iter().any(|&n| n < 2) {
        return Err(Error::InvalidLattice(format!(
            "dimension {d} with dims {dims:?}"
        )));
    }
    let layout = LatticeLayout::new(dims.to_vec(), 1)?;
    let n = layout.n_qubits();
    let mut generators = Vec::new();
    for pattern in terms {
        let letters: Vec<Letter> = pattern
            .letters
            .chars()
            .map(|c| match c {
                'I' => Ok(Letter::I),
                'X' => Ok(Letter::X),
                'Y' => Ok(Letter::Y),
                'Z' => Ok(Letter::Z),
                other => Err(Error::Parse(format!("pattern letter {other:?}"))),
            })
            .collect::<Result<_>>()?;
        if letters.len() != pattern.offsets.len() {
            return Err(Error::InvalidLattice(format!(
                "{} offsets for {} letters",
                pattern.offsets.len(),
                letters.len()
            )));
        }
        for site in 0..layout.n_sites() {
            let coords: Vec<i64> = layout.site_coords(site).iter().map(|&c| c as i64).collect();
            // Offsets can collide under wrap; multiply so letters combine.
            let mut g = PauliOperator::identity(n);
            for (offset, &letter) in pattern.offsets.iter().zip(letters.iter()) {
                if offset.len() != d {
                    return Err(Error::DimensionMismatch(format!(
                        "offset {offset:?} on a {d}-dimensional lattice"
                    )));
                }
                let target: Vec<i64> =
                    coords.iter().zip(offset.iter()).map(|(&c, &o)| c + o).collect();
                let factor =
                    PauliOperator::single(n, layout.qubit_index(&target, 0)?, letter)?;
                g = g.mul(&factor)?;
            }
            generators.push(g.with_phase(0));
        }
    }
    let code = StabilizerCode::new(n, generators)?;
    Ok((code, layout))
}

/// Applies a power of a unit translation to an operator (phase preserved).
pub fn translate_operator(
    layout: &LatticeLayout,
    p: &PauliOperator,
    axis: usize,
    amount: i64,
) -> Result<PauliOperator> {
    if p.n_qubits() != layout.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "operator on {} qubits, layout has {}",
            p.n_qubits(),
            layout.n_qubits()
        )));
    }
    p.permuted(&layout.translation_permutation(axis, amount)?)
}

/// Relabels qubits so blocks of `factors[a]` particles per axis become single
/// composite particles. The stabilizer group is unchanged — only names move.
pub fn coarse_grain(
    code: &StabilizerCode,
    layout: &LatticeLayout,
    factors: &[usize],
) -> Result<(StabilizerCode, LatticeLayout)> {
    let perm = coarse_grain_permutation(layout, factors)?;
    let coarse = coarse_layout(layout, factors)?;
    let generators = code
        .generators()
        .iter()
        .map(|g| g.permuted(&perm))
        .collect::<Result<Vec<_>>>()?;
    let new_code = StabilizerCode::new(code.n_qubits(), generators)?;
    Ok((new_code, coarse))
}

fn coarse_layout(layout: &LatticeLayout, factors: &[usize]) -> Result<LatticeLayout> {
    if factors.len() != layout.d() || factors.iter().any(|&f| f == 0) {
        return Err(Error::InvalidLattice(format!(
            "factors {factors:?} on a {}-dimensional lattice",
            layout.d()
        )));
    }
    for (a, (&n, &f)) in layout.dims().iter().zip(factors.iter()).enumerate() {
        if n % f != 0 {
            return Err(Error::InvalidLattice(format!(
                "factor {f} does not divide extent {n} on axis {a}"
            )));
        }
    }
    let dims: Vec<usize> = layout.dims().iter().zip(factors).map(|(&n, &f)| n / f).collect();
    let v = layout.v() * factors.iter().product::<usize>();
    LatticeLayout::new(dims, v)
}

/// The qubit relabeling used by [`coarse_grain`]: `perm[q]` is the new index
/// of old qubit `q`.
pub fn coarse_grain_permutation(layout: &LatticeLayout, factors: &[usize]) -> Result<Vec<usize>> {
    let coarse = coarse_layout(layout, factors)?;
    let mut perm = vec![0usize; layout.n_qubits()];
    for (q, target) in perm.iter_mut().enumerate() {
        let (coords, intra) = layout.qubit_site(q)?;
        let block: Vec<i64> = coords
            .iter()
            .zip(factors)
            .map(|(&c, &f)| (c / f) as i64)
            .collect();
        // Rank of the position inside the block, first axis fastest.
        let mut within = 0usize;
        for a in (0..layout.d()).rev() {
            within = within * factors[a] + coords[a] % factors[a];
        }
        let new_intra = within * layout.v() + intra;
        *target = coarse.qubit_index(&block, new_intra)?;
    }
    Ok(perm)
}

/// Minimal periodic window covering an operator's support, in particles per
/// axis. Zero entries mean empty support.
pub fn support_window(layout: &LatticeLayout, op: &PauliOperator) -> Result<Vec<usize>> {
    if op.n_qubits() != layout.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "operator on {} qubits, layout has {}",
            op.n_qubits(),
            layout.n_qubits()
        )));
    }
    let support = op.support();
    let mut window = Vec::with_capacity(layout.d());
    for axis in 0..layout.d() {
        let n = layout.dims()[axis];
        let mut coords: Vec<usize> = support
            .iter()
            .map(|&q| layout.qubit_site(q).map(|(c, _)| c[axis]))
            .collect::<Result<_>>()?;
        coords.sort_unstable();
        coords.dedup();
        if coords.is_empty() {
            window.push(0);
            continue;
        }
        // Shortest cyclic interval = n minus the largest gap between
        // consecutive occupied coordinates.
        let mut max_gap = coords[0] + n - coords[coords.len() - 1];
        for w in coords.windows(2) {
            max_gap = max_gap.max(w[1] - w[0]);
        }
        window.push(n - max_gap);
    }
    Ok(window)
}

/// Builds every size and reports whether `k` is size-independent.
pub fn check_scale_symmetry(
    family: &CodeFamily,
    sizes: &[Vec<usize>],
) -> Result<ScaleSymmetryReport> {
    if sizes.len() < 2 {
        return Err(Error::InvalidLattice(
            "scale symmetry needs at least two sizes".into(),
        ));
    }
    let mut entries = Vec::with_capacity(sizes.len());
    for size in sizes {
        let (code, _) = family.build(size)?;
        entries.push(ScaleSymmetryEntry {
            size: size.clone(),
            k: code.k(),
        });
    }
    let passes = entries.iter().all(|e| e.k == entries[0].k);
    Ok(ScaleSymmetryReport { entries, passes })
}

/// All m-element subsets of `{0, ..., d-1}` in lexicographic order.
pub fn combinations(d: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(m);
    fn recurse(d: usize, m: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == m {
            out.push(current.clone());
            return;
        }
        for a in start..d {
            current.push(a);
            recurse(d, m, a + 1, current, out);
            current.pop();
        }
    }
    recurse(d, m, 0, &mut current, &mut out);
    out
}

/// Binomial coefficient `C(d, m)`.
pub fn binomial(d: usize, m: usize) -> usize {
    if m > d {
        return 0;
    }
    let mut result = 1usize;
    for i in 0..m.min(d - m) {
        result = result * (d - i) / (i + 1);
    }
    result
}

/// CLI-facing lattice description, carrying both family and size.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum LatticeSpec {
    Ising {
        dims: Vec<usize>,
    },
    Toric {
        #[serde(rename = "D")]
        d: usize,
        m: usize,
        #[serde(rename = "L")]
        l: usize,
    },
}

impl LatticeSpec {
    pub fn build(&self) -> Result<(StabilizerCode, LatticeLayout)> {
        match self {
            LatticeSpec::Ising { dims } => build_ising(dims.len(), dims),
            LatticeSpec::Toric { d, m, l } => build_toric(*d, *m, *l),
        }
    }
}
