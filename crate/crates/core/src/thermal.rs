//! Thermal behaviour of commuting-Pauli Hamiltonians `H = -sum_j S_j`.
//!
//! Three layers:
//!
//! * exact partition functions — either by enumerating the dependency space
//!   of the generator list or by enumerating syndrome sectors, whichever is
//!   small enough;
//! * Metropolis sampling of the Gibbs state of a CSS code in the error
//!   picture: a classical configuration of bit-flip (or phase-flip) errors,
//!   single-qubit flip proposals, and an optional uniform field that biases
//!   the dynamics toward the zero-error state;
//! * estimators built on the sampler: translation-symmetrized order
//!   parameters measured after the bias is ramped away, and memory times
//!   measured against exact minimal-weight coset decoding.
//!
//! All randomness flows through per-chain counter-seeded ChaCha streams, so
//! every result is a pure function of `(code, config)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::gf2::{gf2_kernel, gf2_solve_rowspace, BinaryMatrix, BitVec};
use crate::lattice::{translate_operator, LatticeLayout};
use crate::pauli::PauliOperator;
use crate::stabilizer::StabilizerCode;
use crate::Result;

/// Largest dependency-space dimension enumerated by the exact partition sum.
pub const DEPENDENCY_BUDGET: usize = 20;

/// Largest independent-generator count enumerated by the syndrome-sector sum.
pub const SECTOR_BUDGET: usize = 20;

/// Largest defect count the exact matching decoder will process.
pub const TORIC_DEFECT_CAP: usize = 22;

/// Knobs for a Monte Carlo run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThermalConfig {
    /// Temperature in units where a single violated generator costs energy 2.
    pub temperature: f64,
    /// Initial strength of the uniform field biasing toward zero error.
    pub bias: f64,
    /// Measurement sweeps (one sweep = one flip proposal per qubit).
    pub sweeps: usize,
    /// Equilibration sweeps at full bias; the bias ramp takes as many again.
    pub burn_in: usize,
    /// Master seed; every chain derives its own stream from it.
    pub seed: u64,
    /// Number of independent chains.
    pub chains: usize,
}

impl ThermalConfig {
    /// Checks that every field is usable.
    pub fn validate(&self) -> Result<()> {
        if !self.temperature.is_finite() || self.temperature <= 0.0 {
            return Err(Error::Config(format!(
                "temperature must be positive and finite, got {}",
                self.temperature
            )));
        }
        if !self.bias.is_finite() || self.bias < 0.0 {
            return Err(Error::Config(format!(
                "bias must be nonnegative and finite, got {}",
                self.bias
            )));
        }
        if self.sweeps == 0 {
            return Err(Error::Config("sweep count must be positive".into()));
        }
        if self.chains == 0 {
            return Err(Error::Config("chain count must be positive".into()));
        }
        Ok(())
    }
}

/// Which classical error species the sampler tracks.
///
/// `BitFlip` walks over X-error configurations checked by the pure-Z
/// generators (observables are then Z-type); `PhaseFlip` is the mirror case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorSector {
    BitFlip,
    PhaseFlip,
}

/// A logical operator together with the translation axes that generate its
/// symmetrized order parameter.
#[derive(Debug, Clone)]
pub struct LogicalFamily {
    /// Base logical operator; must be pure X or pure Z.
    pub operator: PauliOperator,
    /// Lattice axes over which the operator is translated and averaged.
    pub axes: Vec<usize>,
    /// Identifier echoed in the resulting estimate.
    pub label: String,
}

/// Mean and spread of an order parameter across independent chains.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderParameterEstimate {
    /// Average over chains of the per-chain time average; always in [-1, 1].
    pub mean: f64,
    /// Standard error across chains (0 when only one chain ran).
    pub std_error: f64,
    /// Label of the operator family that was measured.
    pub operator: String,
}

/// One thinned observation from a sampling run.
#[derive(Debug, Clone, Serialize)]
pub struct TraceSample {
    /// Measurement sweep index (1-based).
    pub sweep: usize,
    /// Chain the observation came from.
    pub chain: usize,
    /// Relative energy 2 * (violated checks) at the observation.
    pub energy: f64,
    /// Instantaneous order-parameter value.
    pub order_parameter: f64,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the deterministic RNG for one chain of a seeded run.
pub fn chain_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut state = seed ^ stream.wrapping_mul(0xA076_1D64_78BD_642F);
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

// ---------------------------------------------------------------------------
// Exact partition functions.
// ---------------------------------------------------------------------------

/// Online log-sum-exp accumulator.
struct LogSum {
    max: f64,
    sum: f64,
}

impl LogSum {
    fn new() -> Self {
        LogSum {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    fn add(&mut self, term: f64) {
        if term == f64::NEG_INFINITY {
            return;
        }
        if term > self.max {
            self.sum = self.sum * (self.max - term).exp() + 1.0;
            self.max = term;
        } else {
            self.sum += (term - self.max).exp();
        }
    }

    fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

fn check_generator_phases(code: &StabilizerCode) -> Result<()> {
    for g in code.generators() {
        if g.phase() != 0 {
            return Err(Error::InvalidCode(
                "partition sums require generators with phase 0".into(),
            ));
        }
    }
    Ok(())
}

/// `log Tr exp(beta * sum_j S_j)` by enumerating the dependency space.
///
/// Expanding `prod_j (cosh b + S_j sinh b)` term-wise, only subsets whose
/// product is the identity survive the trace, and those subsets are exactly
/// the GF(2) kernel of the generator list:
/// `Z = 2^N * sum_{T in ker} cosh^(M-|T|) sinh^|T|`.
fn log_z_dependency_sum(code: &StabilizerCode, beta: f64) -> Result<f64> {
    let m = code.generators().len();
    let rows: Vec<BitVec> = code
        .generators()
        .iter()
        .map(|g| g.symplectic_row())
        .collect();
    let kernel = gf2_kernel(&BinaryMatrix::from_rows(rows).transpose());
    let dim = kernel.n_rows();
    if dim > DEPENDENCY_BUDGET {
        return Err(Error::Capacity(format!(
            "dependency space has dimension {dim}, budget is {DEPENDENCY_BUDGET}"
        )));
    }
    let ln_cosh = beta.cosh().ln();
    let sinh = beta.sinh();
    let ln_sinh = sinh.ln();
    let mut acc = LogSum::new();
    // Gray-code walk over the kernel: one basis toggle per step.
    let mut current = BitVec::zeros(m);
    let mut prev_gray = 0usize;
    acc.add(m as f64 * ln_cosh);
    for i in 1..(1usize << dim) {
        let gray = i ^ (i >> 1);
        let toggled = (gray ^ prev_gray).trailing_zeros() as usize;
        prev_gray = gray;
        current.xor_with(kernel.row(toggled));
        let w = current.count_ones();
        if w == 0 {
            acc.add(m as f64 * ln_cosh);
        } else if sinh > 0.0 {
            acc.add((m - w) as f64 * ln_cosh + w as f64 * ln_sinh);
        }
    }
    Ok(code.n_qubits() as f64 * std::f64::consts::LN_2 + acc.value())
}

/// `log Tr exp(beta * sum_j S_j)` by enumerating syndrome sectors.
///
/// Each joint eigenvalue pattern of an independent generator subset labels a
/// sector of dimension `2^(N - rank)`; dependent generators take the eigenvalue
/// of their GF(2) combination.
fn log_z_syndrome_sum(code: &StabilizerCode, beta: f64) -> Result<f64> {
    let rank = code.rank();
    if rank > SECTOR_BUDGET {
        return Err(Error::Capacity(format!(
            "code has {rank} independent generators, sector budget is {SECTOR_BUDGET}"
        )));
    }
    // Split generators into a pivot set and GF(2) expressions for the rest.
    let mut indep_rows: Vec<BitVec> = Vec::new();
    let mut basis = crate::gf2::IncrementalBasis::new(2 * code.n_qubits());
    let mut dep_masks: Vec<u64> = Vec::new();
    for g in code.generators() {
        let row = g.symplectic_row();
        if basis.try_insert(&row) {
            indep_rows.push(row);
        } else {
            let coeffs = gf2_solve_rowspace(&BinaryMatrix::from_rows(indep_rows.clone()), &row)
                .ok_or_else(|| {
                    Error::InvalidCode("dependent generator outside pivot row space".into())
                })?;
            let mut mask = 0u64;
            for i in coeffs.ones() {
                mask |= 1u64 << i;
            }
            dep_masks.push(mask);
        }
    }
    debug_assert_eq!(indep_rows.len(), rank);
    let mut acc = LogSum::new();
    for sigma in 0..(1u64 << rank) {
        let indep_sum = rank as i64 - 2 * sigma.count_ones() as i64;
        let mut dep_sum = 0i64;
        for &mask in &dep_masks {
            dep_sum += 1 - 2 * (((sigma & mask).count_ones() & 1) as i64);
        }
        acc.add(beta * (indep_sum + dep_sum) as f64);
    }
    Ok((code.n_qubits() - rank) as f64 * std::f64::consts::LN_2 + acc.value())
}

/// Exact `log Z(beta)` for `H = -sum_j S_j` over the listed generators.
///
/// Works whenever the dependency space of the generator list or the
/// independent-generator count fits the enumeration budget; every code with
/// `N <= 20` qubits qualifies. Duplicate generators are honored (each listed
/// term contributes to the energy).
pub fn partition_function_exact(code: &StabilizerCode, beta: f64) -> Result<f64> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::Config(format!(
            "inverse temperature must be nonnegative and finite, got {beta}"
        )));
    }
    check_generator_phases(code)?;
    let m = code.generators().len();
    let dim = m - code.rank();
    if dim <= DEPENDENCY_BUDGET {
        log_z_dependency_sum(code, beta)
    } else if code.rank() <= SECTOR_BUDGET {
        log_z_syndrome_sum(code, beta)
    } else {
        Err(Error::Capacity(format!(
            "dependency dimension {dim} and rank {} both exceed the 2^20 enumeration budget",
            code.rank()
        )))
    }
}

// ---------------------------------------------------------------------------
// Error-picture Metropolis sampler.
// ---------------------------------------------------------------------------

/// The classical check structure one error species sees in a CSS code.
#[derive(Debug, Clone)]
struct SectorModel {
    n: usize,
    /// Qubit-support mask of each check of the opposite letter type.
    checks: Vec<BitVec>,
    /// For each qubit, the checks containing it (duplicates kept).
    qubit_checks: Vec<Vec<u32>>,
    max_degree: usize,
}

impl SectorModel {
    fn build(code: &StabilizerCode, sector: ErrorSector) -> Result<SectorModel> {
        let n = code.n_qubits();
        let mut checks = Vec::new();
        for g in code.generators() {
            if g.phase() != 0 {
                return Err(Error::InvalidCode(
                    "sampling requires generators with phase 0".into(),
                ));
            }
            let pure_z = g.x_bits().is_zero();
            let pure_x = g.z_bits().is_zero();
            if !pure_z && !pure_x {
                return Err(Error::NotCss(
                    "generator mixes X and Z letters; the error picture does not split".into(),
                ));
            }
            if pure_z && pure_x {
                continue; // identity generator constrains nothing
            }
            match sector {
                ErrorSector::BitFlip if pure_z => checks.push(g.z_bits().clone()),
                ErrorSector::PhaseFlip if pure_x => checks.push(g.x_bits().clone()),
                _ => {}
            }
        }
        let mut qubit_checks = vec![Vec::new(); n];
        for (c, supp) in checks.iter().enumerate() {
            for q in supp.ones() {
                qubit_checks[q].push(c as u32);
            }
        }
        let max_degree = qubit_checks.iter().map(Vec::len).max().unwrap_or(0);
        Ok(SectorModel {
            n,
            checks,
            qubit_checks,
            max_degree,
        })
    }
}

/// Energy change of flipping one error bit.
///
/// Flipping toggles every adjacent check (`2 * (degree - 2 * violated)`) and
/// moves the uniform-field term by `2 * bias` against the current alignment.
pub fn metropolis_flip_delta(
    degree: usize,
    violated_adjacent: usize,
    error_bit: bool,
    bias: f64,
) -> f64 {
    let check_part = 2.0 * (degree as f64 - 2.0 * violated_adjacent as f64);
    let bias_part = if error_bit { -2.0 * bias } else { 2.0 * bias };
    check_part + bias_part
}

/// Single-flip Metropolis walker over one error sector of a CSS code.
pub struct GibbsSampler {
    model: SectorModel,
    temperature: f64,
    bias: f64,
    errors: BitVec,
    violated: BitVec,
    n_violated: usize,
    weight: usize,
    /// Acceptance probability per (degree, violated-adjacent, error-bit).
    accept: Vec<f64>,
}

impl GibbsSampler {
    /// Builds a sampler for `code` in the given sector, starting at zero error.
    pub fn new(
        code: &StabilizerCode,
        sector: ErrorSector,
        temperature: f64,
        bias: f64,
    ) -> Result<GibbsSampler> {
        let model = SectorModel::build(code, sector)?;
        GibbsSampler::from_model(model, temperature, bias)
    }

    fn from_model(model: SectorModel, temperature: f64, bias: f64) -> Result<GibbsSampler> {
        if !temperature.is_finite() || temperature <= 0.0 {
            return Err(Error::Config(format!(
                "temperature must be positive and finite, got {temperature}"
            )));
        }
        if !bias.is_finite() || bias < 0.0 {
            return Err(Error::Config(format!(
                "bias must be nonnegative and finite, got {bias}"
            )));
        }
        let n = model.n;
        let n_checks = model.checks.len();
        let mut sampler = GibbsSampler {
            model,
            temperature,
            bias,
            errors: BitVec::zeros(n),
            violated: BitVec::zeros(n_checks),
            n_violated: 0,
            weight: 0,
            accept: Vec::new(),
        };
        sampler.rebuild_acceptance();
        Ok(sampler)
    }

    fn rebuild_acceptance(&mut self) {
        let d = self.model.max_degree;
        self.accept = vec![0.0; (d + 1) * (d + 1) * 2];
        for degree in 0..=d {
            for violated in 0..=degree {
                for error_bit in [false, true] {
                    let delta = metropolis_flip_delta(degree, violated, error_bit, self.bias);
                    let idx = (degree * (d + 1) + violated) * 2 + usize::from(error_bit);
                    self.accept[idx] = (-delta / self.temperature).exp();
                }
            }
        }
    }

    /// Replaces the bias field (used while ramping it away).
    pub fn set_bias(&mut self, bias: f64) {
        self.bias = bias;
        self.rebuild_acceptance();
    }

    /// Number of error bits.
    pub fn n(&self) -> usize {
        self.model.n
    }

    /// Current error configuration.
    pub fn errors(&self) -> &BitVec {
        &self.errors
    }

    /// Hamming weight of the current error configuration.
    pub fn error_weight(&self) -> usize {
        self.weight
    }

    /// Violation pattern over this sector's checks.
    pub fn violated_checks(&self) -> &BitVec {
        &self.violated
    }

    /// Number of currently violated checks.
    pub fn violated_count(&self) -> usize {
        self.n_violated
    }

    /// Excitation energy `2 * violated`.
    pub fn interaction_energy(&self) -> f64 {
        2.0 * self.n_violated as f64
    }

    /// Field energy `-bias * sum_q (-1)^(e_q)`.
    pub fn bias_energy(&self) -> f64 {
        -self.bias * (self.model.n as f64 - 2.0 * self.weight as f64)
    }

    /// Total relative energy of the current configuration.
    pub fn energy(&self) -> f64 {
        self.interaction_energy() + self.bias_energy()
    }

    fn apply_flip(&mut self, q: usize) {
        if self.errors.get(q) {
            self.weight -= 1;
        } else {
            self.weight += 1;
        }
        self.errors.flip(q);
        for &c in &self.model.qubit_checks[q] {
            let c = c as usize;
            if self.violated.get(c) {
                self.n_violated -= 1;
            } else {
                self.n_violated += 1;
            }
            self.violated.flip(c);
        }
    }

    /// One sweep: `n` random single-bit proposals.
    pub fn sweep<R: Rng>(&mut self, rng: &mut R) {
        self.sweep_hooked(rng, |_| {});
    }

    /// One sweep, invoking `on_flip` with each accepted qubit index.
    pub fn sweep_hooked<R: Rng, F: FnMut(usize)>(&mut self, rng: &mut R, mut on_flip: F) {
        let n = self.model.n;
        let stride = self.model.max_degree + 1;
        for _ in 0..n {
            let q = rng.random_range(0..n);
            let mut violated_adjacent = 0usize;
            for &c in &self.model.qubit_checks[q] {
                violated_adjacent += usize::from(self.violated.get(c as usize));
            }
            let degree = self.model.qubit_checks[q].len();
            let idx = (degree * stride + violated_adjacent) * 2 + usize::from(self.errors.get(q));
            let u: f64 = rng.random();
            if u < self.accept[idx] {
                self.apply_flip(q);
                on_flip(q);
            }
        }
    }
}

/// Samples the Gibbs state of a CSS code in the error picture and returns the
/// post-burn-in trajectory of error configurations (one per sweep, first
/// chain's stream).
pub fn sample_gibbs_css(
    code: &StabilizerCode,
    sector: ErrorSector,
    config: &ThermalConfig,
) -> Result<Vec<BitVec>> {
    config.validate()?;
    let mut sampler = GibbsSampler::new(code, sector, config.temperature, config.bias)?;
    let mut rng = chain_rng(config.seed, 0);
    for _ in 0..config.burn_in {
        sampler.sweep(&mut rng);
    }
    let mut trajectory = Vec::with_capacity(config.sweeps);
    for _ in 0..config.sweeps {
        sampler.sweep(&mut rng);
        trajectory.push(sampler.errors().clone());
    }
    Ok(trajectory)
}

// ---------------------------------------------------------------------------
// Order parameters.
// ---------------------------------------------------------------------------

/// Incrementally tracked value of a symmetrized diagonal observable.
struct Observable {
    terms: Vec<BitVec>,
    qubit_terms: Vec<Vec<u32>>,
    parities: Vec<bool>,
    sum: i64,
}

impl Observable {
    fn build(
        layout: &LatticeLayout,
        base: &PauliOperator,
        axes: &[usize],
        sector: ErrorSector,
    ) -> Result<Observable> {
        let n = base.n_qubits();
        let mut seen = vec![false; layout.d()];
        for &axis in axes {
            if axis >= layout.d() {
                return Err(Error::Config(format!(
                    "translation axis {axis} out of range for a {}-dimensional lattice",
                    layout.d()
                )));
            }
            if seen[axis] {
                return Err(Error::Config(format!("translation axis {axis} repeated")));
            }
            seen[axis] = true;
        }
        let mut terms = Vec::new();
        let mut shifts = vec![0i64; axes.len()];
        loop {
            let mut translated = base.clone();
            for (i, &axis) in axes.iter().enumerate() {
                translated = translate_operator(layout, &translated, axis, shifts[i])?;
            }
            terms.push(match sector {
                ErrorSector::BitFlip => translated.z_bits().clone(),
                ErrorSector::PhaseFlip => translated.x_bits().clone(),
            });
            let mut i = 0;
            while i < axes.len() {
                shifts[i] += 1;
                if (shifts[i] as usize) < layout.dims()[axes[i]] {
                    break;
                }
                shifts[i] = 0;
                i += 1;
            }
            if i == axes.len() {
                break;
            }
        }
        let mut qubit_terms = vec![Vec::new(); n];
        for (t, supp) in terms.iter().enumerate() {
            for q in supp.ones() {
                qubit_terms[q].push(t as u32);
            }
        }
        let n_terms = terms.len();
        Ok(Observable {
            terms,
            qubit_terms,
            parities: vec![false; n_terms],
            sum: n_terms as i64,
        })
    }

    /// Recomputes every term parity from the full error configuration.
    fn reset(&mut self, errors: &BitVec) {
        self.sum = 0;
        for (t, supp) in self.terms.iter().enumerate() {
            let parity = supp.and_count(errors) % 2 == 1;
            self.parities[t] = parity;
            self.sum += if parity { -1 } else { 1 };
        }
    }

    fn flip(&mut self, q: usize) {
        for &t in &self.qubit_terms[q] {
            let t = t as usize;
            self.parities[t] = !self.parities[t];
            self.sum += if self.parities[t] { -2 } else { 2 };
        }
    }

    fn value(&self) -> f64 {
        self.sum as f64 / self.terms.len() as f64
    }
}

fn sector_for_observable(op: &PauliOperator) -> Result<ErrorSector> {
    let pure_z = op.x_bits().is_zero() && !op.z_bits().is_zero();
    let pure_x = op.z_bits().is_zero() && !op.x_bits().is_zero();
    match (pure_z, pure_x) {
        (true, false) => Ok(ErrorSector::BitFlip),
        (false, true) => Ok(ErrorSector::PhaseFlip),
        _ => Err(Error::NotCss(
            "observable must be a nonidentity pure-X or pure-Z operator".into(),
        )),
    }
}

fn run_order_parameter_chains(
    code: &StabilizerCode,
    layout: &LatticeLayout,
    family: &LogicalFamily,
    config: &ThermalConfig,
    thin: usize,
) -> Result<(Vec<f64>, Vec<TraceSample>)> {
    config.validate()?;
    if family.operator.n_qubits() != code.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "observable acts on {} qubits, code has {}",
            family.operator.n_qubits(),
            code.n_qubits()
        )));
    }
    if !code.is_logical(&family.operator)? {
        return Err(Error::InvalidCode(
            "order-parameter family must be built from a logical operator".into(),
        ));
    }
    let sector = sector_for_observable(&family.operator)?;
    let base = family.operator.with_phase(0);
    let model = SectorModel::build(code, sector)?;
    let per_chain: Vec<(f64, Vec<TraceSample>)> = (0..config.chains)
        .into_par_iter()
        .map(|chain| -> Result<(f64, Vec<TraceSample>)> {
            let mut sampler =
                GibbsSampler::from_model(model.clone(), config.temperature, config.bias)?;
            let mut observable = Observable::build(layout, &base, &family.axes, sector)?;
            let mut rng = chain_rng(config.seed, chain as u64);
            for _ in 0..config.burn_in {
                sampler.sweep(&mut rng);
            }
            // Linear bias ramp to zero over another burn-in window.
            for step in 0..config.burn_in {
                let frac = (step + 1) as f64 / config.burn_in as f64;
                sampler.set_bias(config.bias * (1.0 - frac));
                sampler.sweep(&mut rng);
            }
            sampler.set_bias(0.0);
            observable.reset(sampler.errors());
            let mut total = 0.0;
            let mut trace = Vec::new();
            for sweep in 1..=config.sweeps {
                sampler.sweep_hooked(&mut rng, |q| observable.flip(q));
                total += observable.value();
                if thin > 0 && sweep % thin == 0 {
                    trace.push(TraceSample {
                        sweep,
                        chain,
                        energy: sampler.interaction_energy(),
                        order_parameter: observable.value(),
                    });
                }
            }
            Ok((total / config.sweeps as f64, trace))
        })
        .collect::<Result<Vec<_>>>()?;
    let means: Vec<f64> = per_chain.iter().map(|(m, _)| *m).collect();
    let traces: Vec<TraceSample> = per_chain.into_iter().flat_map(|(_, t)| t).collect();
    Ok((means, traces))
}

fn estimate_from_chain_means(means: &[f64], label: &str) -> OrderParameterEstimate {
    let chains = means.len();
    let mean = means.iter().sum::<f64>() / chains as f64;
    let std_error = if chains > 1 {
        let var =
            means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (chains as f64 - 1.0);
        (var / chains as f64).sqrt()
    } else {
        0.0
    };
    OrderParameterEstimate {
        mean,
        std_error,
        operator: label.to_string(),
    }
}

/// Biased-start estimate of the order parameter `m = avg_t <U(t(l))>`.
///
/// Protocol per chain: `burn_in` sweeps at the configured bias, `burn_in`
/// further sweeps while the bias ramps linearly to zero, then `sweeps`
/// measurement sweeps at exactly zero bias. The estimate averages the
/// per-sweep observable over measurement sweeps and chains.
pub fn order_parameter(
    code: &StabilizerCode,
    layout: &LatticeLayout,
    family: &LogicalFamily,
    config: &ThermalConfig,
) -> Result<OrderParameterEstimate> {
    let (means, _) = run_order_parameter_chains(code, layout, family, config, 0)?;
    Ok(estimate_from_chain_means(&means, &family.label))
}

/// Like [`order_parameter`], also returning every `thin`-th observation.
pub fn order_parameter_trace(
    code: &StabilizerCode,
    layout: &LatticeLayout,
    family: &LogicalFamily,
    config: &ThermalConfig,
    thin: usize,
) -> Result<(OrderParameterEstimate, Vec<TraceSample>)> {
    if thin == 0 {
        return Err(Error::Config("trace thinning interval must be positive".into()));
    }
    let (means, trace) = run_order_parameter_chains(code, layout, family, config, thin)?;
    Ok((estimate_from_chain_means(&means, &family.label), trace))
}

/// Runs [`order_parameter`] once per bias value, reusing the rest of `config`.
pub fn bias_sweep(
    code: &StabilizerCode,
    layout: &LatticeLayout,
    family: &LogicalFamily,
    config: &ThermalConfig,
    biases: &[f64],
) -> Result<Vec<(f64, OrderParameterEstimate)>> {
    biases
        .iter()
        .map(|&bias| {
            let run = ThermalConfig {
                bias,
                ..config.clone()
            };
            Ok((bias, order_parameter(code, layout, family, &run)?))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Memory time with exact minimal-weight decoding.
// ---------------------------------------------------------------------------

/// Exact matching decoder for the two-dimensional Toric code's bit-flip sector.
struct ToricMatcher {
    l: i64,
    /// Site coordinates of the plaquette behind each check index.
    check_sites: Vec<(i64, i64)>,
    /// Qubits whose use crosses the axis-0 (resp. axis-1) homology cut.
    cut0: BitVec,
    cut1: BitVec,
    /// Whether the canonical winding error along each axis flips the readout.
    pair0: bool,
    pair1: bool,
}

impl ToricMatcher {
    fn build(
        layout: &LatticeLayout,
        readout: &PauliOperator,
        model: &SectorModel,
    ) -> Result<ToricMatcher> {
        if layout.d() != 2 || layout.v() != 2 || layout.dims()[0] != layout.dims()[1] {
            return Err(Error::Capacity(
                "matching decoder requires a square two-dimensional Toric layout".into(),
            ));
        }
        let l = layout.dims()[0] as i64;
        if model.checks.len() != layout.n_sites() {
            return Err(Error::Capacity(
                "matching decoder expects one plaquette check per site".into(),
            ));
        }
        // Verify each check is the plaquette of its site, in site-rank order.
        let mut check_sites = Vec::with_capacity(model.checks.len());
        for (idx, supp) in model.checks.iter().enumerate() {
            let coords = layout.site_coords(idx);
            let (r, c) = (coords[0] as i64, coords[1] as i64);
            let expected = BitVec::from_indices(
                layout.n_qubits(),
                &[
                    layout.qubit_index(&[r, c], 1)?,
                    layout.qubit_index(&[r + 1, c], 1)?,
                    layout.qubit_index(&[r, c], 0)?,
                    layout.qubit_index(&[r, c + 1], 0)?,
                ],
            );
            if *supp != expected {
                return Err(Error::Capacity(
                    "check structure is not the standard Toric plaquette pattern".into(),
                ));
            }
            check_sites.push((r, c));
        }
        // A defect step across the axis-i seam uses the axis-(1-i)-oriented
        // edge at coordinate 0 of axis i.
        let mut cut0_idx = Vec::new();
        let mut cut1_idx = Vec::new();
        for t in 0..l {
            cut0_idx.push(layout.qubit_index(&[0, t], 1)?);
            cut1_idx.push(layout.qubit_index(&[t, 0], 0)?);
        }
        let cut0 = BitVec::from_indices(layout.n_qubits(), &cut0_idx);
        let cut1 = BitVec::from_indices(layout.n_qubits(), &cut1_idx);
        // Canonical winding errors, used only to read off the pairing with
        // the readout operator.
        let mut loop0_idx = Vec::new();
        let mut loop1_idx = Vec::new();
        for t in 0..l {
            loop0_idx.push(layout.qubit_index(&[t, 0], 1)?);
            loop1_idx.push(layout.qubit_index(&[0, t], 0)?);
        }
        let loop0 = BitVec::from_indices(layout.n_qubits(), &loop0_idx);
        let loop1 = BitVec::from_indices(layout.n_qubits(), &loop1_idx);
        let readout_supp = readout.z_bits();
        Ok(ToricMatcher {
            l,
            check_sites,
            cut0,
            cut1,
            pair0: loop0.and_count(readout_supp) % 2 == 1,
            pair1: loop1.and_count(readout_supp) % 2 == 1,
        })
    }

    /// Minimal error weight per homology class for the given defect set.
    ///
    /// Subset DP over pairings: the lowest unmatched defect is paired with
    /// every other, each pairing choosing independently per axis between the
    /// direct and the wrapped geodesic (the wrapped one crosses the seam).
    /// Detached winding loops cost `l` per class bit and are folded in at the
    /// end.
    fn class_minima(&self, defects: &[(i64, i64)]) -> Result<[u64; 4]> {
        let d = defects.len();
        if d % 2 != 0 {
            return Err(Error::InvalidCode(
                "plaquette defects must come in pairs".into(),
            ));
        }
        if d > TORIC_DEFECT_CAP {
            return Err(Error::Capacity(format!(
                "{d} defects exceed the matching budget of {TORIC_DEFECT_CAP}"
            )));
        }
        const INF: u32 = u32::MAX / 2;
        let l = self.l;
        // Pair options: (cost, class) for each axis-wrap combination.
        let mut options = vec![[(0u32, 0u8); 4]; d * d];
        for a in 0..d {
            for b in 0..d {
                let mut opts = [(0u32, 0u8); 4];
                let mut slot = 0;
                let axis_opts = |xa: i64, xb: i64| -> [(i64, u8); 2] {
                    let up = (xb - xa).rem_euclid(l);
                    let cross_up = u8::from(xb < xa);
                    [(up, cross_up), (l - up, 1 - cross_up)]
                };
                for (c0, w0) in axis_opts(defects[a].0, defects[b].0) {
                    for (c1, w1) in axis_opts(defects[a].1, defects[b].1) {
                        opts[slot] = ((c0 + c1) as u32, w0 | (w1 << 1));
                        slot += 1;
                    }
                }
                options[a * d + b] = opts;
            }
        }
        let mut dp = vec![[INF; 4]; 1usize << d];
        dp[0][0] = 0;
        let full = (1usize << d) - 1;
        for s in 0..=full {
            if dp[s].iter().all(|&v| v == INF) {
                continue;
            }
            if s == full {
                break;
            }
            let a = (!s).trailing_zeros() as usize;
            for b in (a + 1)..d {
                if s & (1 << b) != 0 {
                    continue;
                }
                let ns = s | (1 << a) | (1 << b);
                for &(cost, class) in &options[a * d + b] {
                    for h in 0..4 {
                        if dp[s][h] == INF {
                            continue;
                        }
                        let cand = dp[s][h] + cost;
                        let nh = h ^ class as usize;
                        if cand < dp[ns][nh] {
                            dp[ns][nh] = cand;
                        }
                    }
                }
            }
        }
        let paired = dp[full];
        let mut minima = [u64::MAX; 4];
        for h in 0..4usize {
            for (hp, &val) in paired.iter().enumerate() {
                if val == INF {
                    continue;
                }
                let extra = (h ^ hp).count_ones() as u64 * l as u64;
                minima[h] = minima[h].min(val as u64 + extra);
            }
        }
        Ok(minima)
    }

    fn is_failure(&self, errors: &BitVec, violated: &BitVec) -> Result<bool> {
        let defects: Vec<(i64, i64)> = violated.ones().map(|c| self.check_sites[c]).collect();
        let minima = self.class_minima(&defects)?;
        let h_err =
            (errors.and_count(&self.cut0) % 2) | ((errors.and_count(&self.cut1) % 2) << 1);
        let mut best_ok = u64::MAX;
        let mut best_fail = u64::MAX;
        for (h, &w) in minima.iter().enumerate() {
            let residual = h ^ h_err;
            let flips = (residual & 1 == 1 && self.pair0) ^ (residual & 2 == 2 && self.pair1);
            if flips {
                best_fail = best_fail.min(w);
            } else {
                best_ok = best_ok.min(w);
            }
        }
        // Ties are resolved in favor of the memory (no failure).
        Ok(best_fail < best_ok)
    }
}

enum MemoryDecoder {
    /// Zero-syndrome space is exactly {0, all-ones}: decode by majority vote.
    Majority { n: usize },
    Toric(ToricMatcher),
}

impl MemoryDecoder {
    fn is_failure(&self, sampler: &GibbsSampler) -> Result<bool> {
        match self {
            MemoryDecoder::Majority { n } => Ok(2 * sampler.error_weight() > *n),
            MemoryDecoder::Toric(matcher) => {
                matcher.is_failure(sampler.errors(), sampler.violated_checks())
            }
        }
    }
}

fn build_memory_decoder(
    layout: &LatticeLayout,
    readout: &PauliOperator,
    sector: ErrorSector,
    model: &SectorModel,
) -> Result<MemoryDecoder> {
    let kernel = gf2_kernel(&BinaryMatrix::from_rows(model.checks.clone()));
    if kernel.n_rows() == 1 && kernel.row(0).count_ones() == model.n {
        // Only the global flip escapes the syndrome; it must flip the readout
        // for readout failure to be observable at all.
        let readout_supp = match sector {
            ErrorSector::BitFlip => readout.z_bits(),
            ErrorSector::PhaseFlip => readout.x_bits(),
        };
        if readout_supp.count_ones() % 2 == 0 {
            return Err(Error::Config(
                "readout commutes with the global flip; majority decoding never fails".into(),
            ));
        }
        return Ok(MemoryDecoder::Majority { n: model.n });
    }
    if sector == ErrorSector::BitFlip {
        return Ok(MemoryDecoder::Toric(ToricMatcher::build(
            layout, readout, model,
        )?));
    }
    Err(Error::Capacity(
        "no exact decoder for this code and readout sector".into(),
    ))
}

/// Unbiased thermal evolution from the ground state, decoded every sweep.
///
/// Each trial runs `config.sweeps` sweeps at `config.temperature` with zero
/// bias, starting from the zero-error configuration, and records the first
/// sweep at which exact minimal-weight coset decoding of the accumulated
/// error flips the readout (`None` if that never happens). `trials`
/// independent trials use streams `0..trials` of `config.seed`.
pub fn memory_time(
    code: &StabilizerCode,
    layout: &LatticeLayout,
    readout: &PauliOperator,
    config: &ThermalConfig,
    trials: usize,
) -> Result<Vec<Option<usize>>> {
    config.validate()?;
    if trials == 0 {
        return Err(Error::Config("trial count must be positive".into()));
    }
    if readout.n_qubits() != code.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "readout acts on {} qubits, code has {}",
            readout.n_qubits(),
            code.n_qubits()
        )));
    }
    if !code.is_logical(readout)? {
        return Err(Error::InvalidCode(
            "memory readout must be a logical operator".into(),
        ));
    }
    let sector = sector_for_observable(readout)?;
    let model = SectorModel::build(code, sector)?;
    let decoder = build_memory_decoder(layout, readout, sector, &model)?;
    (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<Option<usize>> {
            let mut sampler = GibbsSampler::from_model(model.clone(), config.temperature, 0.0)?;
            let mut rng = chain_rng(config.seed, trial as u64);
            for sweep in 1..=config.sweeps {
                sampler.sweep(&mut rng);
                if decoder.is_failure(&sampler)? {
                    return Ok(Some(sweep));
                }
            }
            Ok(None)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Small statistics helpers.
// ---------------------------------------------------------------------------

/// Median of a nonempty sample (mean of the middle pair for even sizes).
pub fn median_of(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty sample");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-comparable sample value"));
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

/// Seeded 95% bootstrap interval for the median.
pub fn bootstrap_median_interval(
    values: &[f64],
    resamples: usize,
    seed: u64,
) -> (f64, f64) {
    assert!(!values.is_empty(), "bootstrap of an empty sample");
    assert!(resamples > 0, "bootstrap needs at least one resample");
    let mut rng = chain_rng(seed, 0x626f_6f74);
    let mut medians = Vec::with_capacity(resamples);
    let mut resample = vec![0.0; values.len()];
    for _ in 0..resamples {
        for slot in resample.iter_mut() {
            *slot = values[rng.random_range(0..values.len())];
        }
        medians.push(median_of(&resample));
    }
    medians.sort_by(|a, b| a.partial_cmp(b).expect("non-comparable median"));
    let lo = ((resamples as f64) * 0.025) as usize;
    let hi = (((resamples as f64) * 0.975) as usize).min(resamples - 1);
    (medians[lo], medians[hi])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_ising, build_toric};
    use crate::pauli::PauliOperator;

    fn pauli(s: &str) -> PauliOperator {
        s.parse().expect("valid Pauli literal")
    }

    fn code_from(n: usize, gens: &[&str]) -> StabilizerCode {
        let gens = gens.iter().map(|s| pauli(s)).collect();
        StabilizerCode::new(n, gens).expect("valid code")
    }

    fn five_qubit() -> StabilizerCode {
        code_from(5, &["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"])
    }

    // ---- oracles -----------------------------------------------------

    /// Trace of `prod_j (cosh + S_j sinh)` by explicit subset products.
    fn brute_subset_log_z(code: &StabilizerCode, beta: f64) -> f64 {
        let gens = code.generators();
        let m = gens.len();
        assert!(m <= 20, "subset oracle is exponential in the term count");
        let cosh = beta.cosh();
        let sinh = beta.sinh();
        let mut total = 0.0f64;
        for subset in 0..(1usize << m) {
            let mut prod = PauliOperator::identity(code.n_qubits());
            for (j, g) in gens.iter().enumerate() {
                if subset & (1 << j) != 0 {
                    prod = prod.mul(g).unwrap();
                }
            }
            if prod.is_identity_bits() {
                assert_eq!(prod.phase(), 0, "stabilizer products never give -I");
                let w = subset.count_ones() as i32;
                total += cosh.powi(m as i32 - w) * sinh.powi(w);
            }
        }
        code.n_qubits() as f64 * std::f64::consts::LN_2 + total.ln()
    }

    /// Diagonal Boltzmann sum over all 2^N basis states; pure-Z codes only.
    fn brute_diagonal_log_z(code: &StabilizerCode, beta: f64) -> f64 {
        let n = code.n_qubits();
        assert!(n <= 14);
        let supports: Vec<BitVec> = code
            .generators()
            .iter()
            .map(|g| {
                assert!(g.x_bits().is_zero(), "diagonal oracle needs pure-Z terms");
                g.z_bits().clone()
            })
            .collect();
        let mut acc = LogSum::new();
        for state in 0..(1usize << n) {
            let bits = BitVec::from_bits(
                &(0..n).map(|q| ((state >> q) & 1) as u8).collect::<Vec<_>>(),
            );
            let mut energy = 0i64;
            for supp in &supports {
                energy += if supp.and_count(&bits) % 2 == 1 { -1 } else { 1 };
            }
            acc.add(beta * energy as f64);
        }
        acc.value()
    }

    /// Ring Ising `log Z` from the transfer-matrix eigenvalues.
    fn transfer_matrix_log_z(l: usize, beta: f64) -> f64 {
        l as f64 * (2.0 * beta.cosh()).ln() + beta.tanh().powi(l as i32).ln_1p()
    }

    /// Exact violated-bond density of the length-`l` Ising ring.
    fn ring_wall_density(l: usize, beta: f64) -> f64 {
        let x = (-2.0 * beta).exp();
        let li = l as i32;
        let num = x * ((1.0 + x).powi(li - 1) - (1.0 - x).powi(li - 1));
        let den = (1.0 + x).powi(li) + (1.0 - x).powi(li);
        num / den
    }

    /// Exact violated-bond expectation by brute enumeration of spin states.
    fn brute_wall_density(l: usize, beta: f64) -> f64 {
        let mut z = 0.0f64;
        let mut walls_avg = 0.0f64;
        for state in 0..(1usize << l) {
            let mut walls = 0;
            for i in 0..l {
                let a = (state >> i) & 1;
                let b = (state >> ((i + 1) % l)) & 1;
                if a != b {
                    walls += 1;
                }
            }
            let w = (-2.0 * beta * walls as f64).exp();
            z += w;
            walls_avg += w * walls as f64;
        }
        walls_avg / z / l as f64
    }

    // ---- partition function -------------------------------------------

    #[test]
    fn partition_rejects_negative_inverse_temperature() {
        let code = code_from(1, &["Z"]);
        assert!(matches!(
            partition_function_exact(&code, -0.5),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            partition_function_exact(&code, f64::NAN),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn partition_matches_single_generator_closed_form() {
        for gen in ["Z", "X"] {
            let code = code_from(1, &[gen]);
            for beta in [0.0f64, 0.3, 0.9, 2.0] {
                let expected = (2.0 * beta.cosh()).ln();
                let got = partition_function_exact(&code, beta).unwrap();
                assert!((got - expected).abs() < 1e-12, "{gen} at beta {beta}");
            }
        }
    }

    #[test]
    fn partition_matches_independent_generator_closed_form() {
        let open_chain = code_from(5, &["ZZIII", "IZZII", "IIZZI", "IIIZZ"]);
        for code in [five_qubit(), open_chain] {
            let m = code.generators().len() as f64;
            let k = (code.n_qubits() - code.generators().len()) as f64;
            for beta in [0.1f64, 0.7, 1.3] {
                let expected = k * std::f64::consts::LN_2 + m * (2.0 * beta.cosh()).ln();
                let got = partition_function_exact(&code, beta).unwrap();
                assert!((got - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn partition_matches_transfer_matrix_on_ising_rings() {
        for l in 3..=8 {
            let (code, _) = build_ising(1, &[l]).unwrap();
            for beta in [0.2, 0.6, 1.1] {
                let got = partition_function_exact(&code, beta).unwrap();
                let expected = transfer_matrix_log_z(l, beta);
                assert!(
                    (got - expected).abs() < 1e-10,
                    "ring {l} at beta {beta}: {got} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn partition_matches_subset_expansion_oracle() {
        let (toric, _) = build_toric(2, 1, 2).unwrap();
        let (ising2, _) = build_ising(2, &[2, 2]).unwrap();
        let (ising3, _) = build_ising(2, &[3, 3]).unwrap();
        for code in [toric, ising2, ising3, five_qubit()] {
            for beta in [0.3, 0.8] {
                let got = partition_function_exact(&code, beta).unwrap();
                let expected = brute_subset_log_z(&code, beta);
                assert!((got - expected).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn partition_matches_diagonal_boltzmann_sum_for_pure_z_codes() {
        let (ring4, _) = build_ising(1, &[4]).unwrap();
        let (ring6, _) = build_ising(1, &[6]).unwrap();
        let (ising2, _) = build_ising(2, &[2, 2]).unwrap();
        let (ising3, _) = build_ising(2, &[3, 3]).unwrap();
        for code in [ring4, ring6, ising2, ising3] {
            for beta in [0.25, 0.9] {
                let got = partition_function_exact(&code, beta).unwrap();
                let expected = brute_diagonal_log_z(&code, beta);
                assert!((got - expected).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dependency_and_sector_sums_agree() {
        let (ising3, _) = build_ising(2, &[3, 3]).unwrap();
        let (toric, _) = build_toric(2, 1, 2).unwrap();
        for code in [ising3, toric, five_qubit()] {
            for beta in [0.0, 0.4, 1.2] {
                let a = log_z_dependency_sum(&code, beta).unwrap();
                let b = log_z_syndrome_sum(&code, beta).unwrap();
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn partition_free_energy_sandwich_holds() {
        // Independent generators: degeneracy 2^k makes Z exceed the naive
        // upper bound below beta = ln 2, so the literal two-sided bound is
        // checked in its validity regime.
        let open_chain = code_from(5, &["ZZIII", "IZZII", "IIZZI", "IIIZZ"]);
        for code in [five_qubit(), open_chain] {
            let m = code.generators().len() as f64;
            let k = code.n_qubits() as f64 - m;
            for beta in [0.8, 1.0, 1.4] {
                let log_z = partition_function_exact(&code, beta).unwrap();
                let mid = m * (2.0 * beta.cosh()).ln();
                assert!(log_z >= mid - beta * k - 1e-9);
                assert!(log_z <= mid + beta * k + 1e-9);
            }
        }
        // Degeneracy-corrected sandwich holds at every temperature, here for
        // rings whose full generator list has one dependency (k = 1).
        for l in [4usize, 6] {
            let (code, _) = build_ising(1, &[l]).unwrap();
            for beta in [0.2, 0.7, 1.3] {
                let log_z = partition_function_exact(&code, beta).unwrap();
                let base =
                    std::f64::consts::LN_2 + (l as f64 - 1.0) * (2.0 * beta.cosh()).ln();
                assert!(log_z >= base - beta - 1e-9);
                assert!(log_z <= base + beta + 1e-9);
            }
        }
    }

    #[test]
    fn partition_capacity_exceeded_for_large_dependent_codes() {
        let (code, _) = build_ising(2, &[7, 7]).unwrap();
        assert!(matches!(
            partition_function_exact(&code, 0.5),
            Err(Error::Capacity(_))
        ));
    }

    // ---- sampler -------------------------------------------------------

    #[test]
    fn sampler_rejects_non_css_codes() {
        let err = GibbsSampler::new(&five_qubit(), ErrorSector::BitFlip, 1.0, 0.0);
        assert!(matches!(err, Err(Error::NotCss(_))));
    }

    #[test]
    fn sampler_rejects_bad_temperatures() {
        let (code, _) = build_ising(1, &[4]).unwrap();
        assert!(matches!(
            GibbsSampler::new(&code, ErrorSector::BitFlip, 0.0, 0.0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            GibbsSampler::new(&code, ErrorSector::BitFlip, 1.0, -0.1),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn sampler_matches_exact_gibbs_distribution() {
        let (code, _) = build_ising(1, &[4]).unwrap();
        let n = code.n_qubits();
        let t = 1.7;
        let eps = 0.3;
        // Exact distribution over the 16 error configurations.
        let supports: Vec<BitVec> = code.generators().iter().map(|g| g.z_bits().clone()).collect();
        let mut weights = vec![0.0f64; 1 << n];
        let mut z = 0.0;
        for state in 0..(1usize << n) {
            let bits = BitVec::from_bits(
                &(0..n).map(|q| ((state >> q) & 1) as u8).collect::<Vec<_>>(),
            );
            let viol = supports
                .iter()
                .filter(|s| s.and_count(&bits) % 2 == 1)
                .count();
            let energy = 2.0 * viol as f64 + 2.0 * eps * bits.count_ones() as f64;
            weights[state] = (-energy / t).exp();
            z += weights[state];
        }
        let mut sampler = GibbsSampler::new(&code, ErrorSector::BitFlip, t, eps).unwrap();
        let mut rng = chain_rng(41, 0);
        for _ in 0..2_000 {
            sampler.sweep(&mut rng);
        }
        let sweeps = 500_000usize;
        let mut counts = vec![0u64; 1 << n];
        for _ in 0..sweeps {
            sampler.sweep(&mut rng);
            let mut state = 0usize;
            for q in sampler.errors().ones() {
                state |= 1 << q;
            }
            counts[state] += 1;
        }
        let tv: f64 = (0..(1usize << n))
            .map(|s| (counts[s] as f64 / sweeps as f64 - weights[s] / z).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.02, "total variation distance {tv}");
    }

    #[test]
    fn sampler_matches_naive_reimplementation() {
        let (code, _) = build_ising(2, &[3, 3]).unwrap();
        let n = code.n_qubits();
        let t = 2.0;
        let eps = 0.1;
        let supports: Vec<BitVec> = code.generators().iter().map(|g| g.z_bits().clone()).collect();
        let mut sampler = GibbsSampler::new(&code, ErrorSector::BitFlip, t, eps).unwrap();
        let mut rng_a = chain_rng(7, 3);
        let mut rng_b = chain_rng(7, 3);
        let mut naive = BitVec::zeros(n);
        for _ in 0..200 {
            sampler.sweep(&mut rng_a);
            // From-scratch twin consuming an identical random stream.
            for _ in 0..n {
                let q = rng_b.random_range(0..n);
                let mut violated_adjacent = 0;
                let mut degree = 0;
                for supp in &supports {
                    if supp.get(q) {
                        degree += 1;
                        violated_adjacent += usize::from(supp.and_count(&naive) % 2 == 1);
                    }
                }
                let delta = metropolis_flip_delta(degree, violated_adjacent, naive.get(q), eps);
                let accept = (-delta / t).exp();
                let u: f64 = rng_b.random();
                if u < accept {
                    naive.flip(q);
                }
            }
            assert_eq!(*sampler.errors(), naive);
        }
        // Incremental bookkeeping agrees with recomputation at the end.
        let viol = supports
            .iter()
            .filter(|s| s.and_count(sampler.errors()) % 2 == 1)
            .count();
        assert_eq!(sampler.violated_count(), viol);
        assert_eq!(sampler.error_weight(), sampler.errors().count_ones());
    }

    #[test]
    fn sampler_freezes_at_low_temperature() {
        let (code, _) = build_ising(2, &[4, 4]).unwrap();
        let mut sampler = GibbsSampler::new(&code, ErrorSector::BitFlip, 0.05, 0.2).unwrap();
        let mut rng = chain_rng(11, 0);
        for _ in 0..1_000 {
            sampler.sweep(&mut rng);
        }
        assert!(sampler.errors().is_zero());
        assert_eq!(sampler.violated_count(), 0);
    }

    #[test]
    fn sampler_reproduces_ring_domain_wall_density() {
        let l = 64;
        let beta = 1.0;
        // The closed form is itself validated against brute enumeration.
        let exact_small = brute_wall_density(10, 0.8);
        assert!((ring_wall_density(10, 0.8) - exact_small).abs() < 1e-12);
        let (code, _) = build_ising(1, &[l]).unwrap();
        let mut sampler =
            GibbsSampler::new(&code, ErrorSector::BitFlip, 1.0 / beta, 0.0).unwrap();
        let mut rng = chain_rng(5, 0);
        for _ in 0..2_000 {
            sampler.sweep(&mut rng);
        }
        let sweeps = 40_000;
        let mut total = 0.0;
        for _ in 0..sweeps {
            sampler.sweep(&mut rng);
            total += sampler.violated_count() as f64;
        }
        let density = total / sweeps as f64 / l as f64;
        let expected = ring_wall_density(l, beta);
        assert!(
            (density - expected).abs() < 0.008,
            "measured {density}, exact {expected}"
        );
    }

    #[test]
    fn trajectories_are_seed_deterministic() {
        let (code, _) = build_ising(1, &[8]).unwrap();
        let config = ThermalConfig {
            temperature: 1.2,
            bias: 0.05,
            sweeps: 50,
            burn_in: 20,
            seed: 99,
            chains: 1,
        };
        let a = sample_gibbs_css(&code, ErrorSector::BitFlip, &config).unwrap();
        let b = sample_gibbs_css(&code, ErrorSector::BitFlip, &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 50);
    }

    #[test]
    fn chain_streams_differ_and_reproduce() {
        let mut a = chain_rng(1, 0);
        let mut b = chain_rng(1, 1);
        let mut a2 = chain_rng(1, 0);
        let xs: Vec<u64> = (0..4).map(|_| a.random()).collect();
        let ys: Vec<u64> = (0..4).map(|_| b.random()).collect();
        let xs2: Vec<u64> = (0..4).map(|_| a2.random()).collect();
        assert_eq!(xs, xs2);
        assert_ne!(xs, ys);
    }

    // ---- order parameters ----------------------------------------------

    fn site_field_family(layout: &LatticeLayout, n: usize) -> LogicalFamily {
        let operator = PauliOperator::single(n, 0, crate::pauli::Letter::Z).unwrap();
        LogicalFamily {
            operator,
            axes: (0..layout.d()).collect(),
            label: "magnetization".into(),
        }
    }

    fn toric_z_string(layout: &LatticeLayout, along_axis: usize) -> PauliOperator {
        // Z on the axis-oriented edges of one straight winding line.
        let l = layout.dims()[along_axis] as i64;
        let mut op = PauliOperator::identity(layout.n_qubits());
        for t in 0..l {
            let coords = if along_axis == 0 { [t, 0] } else { [0, t] };
            let q = layout.qubit_index(&coords, along_axis).unwrap();
            op.set_letter(q, crate::pauli::Letter::Z);
        }
        op
    }

    #[test]
    fn order_parameter_validates_inputs() {
        let (code, layout) = build_ising(2, &[3, 3]).unwrap();
        let config = ThermalConfig {
            temperature: 2.0,
            bias: 0.01,
            sweeps: 10,
            burn_in: 5,
            seed: 1,
            chains: 1,
        };
        // Non-logical observable: a single X anticommutes with bonds.
        let bad = LogicalFamily {
            operator: PauliOperator::single(9, 0, crate::pauli::Letter::X).unwrap(),
            axes: vec![0, 1],
            label: "bad".into(),
        };
        assert!(order_parameter(&code, &layout, &bad, &config).is_err());
        // Repeated axis.
        let dup = LogicalFamily {
            axes: vec![0, 0],
            ..site_field_family(&layout, 9)
        };
        assert!(matches!(
            order_parameter(&code, &layout, &dup, &config),
            Err(Error::Config(_))
        ));
        // Axis out of range.
        let oob = LogicalFamily {
            axes: vec![2],
            ..site_field_family(&layout, 9)
        };
        assert!(matches!(
            order_parameter(&code, &layout, &oob, &config),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn magnetization_persists_below_the_transition() {
        let (code, layout) = build_ising(2, &[12, 12]).unwrap();
        let config = ThermalConfig {
            temperature: 1.5,
            bias: 0.01,
            sweeps: 2_500,
            burn_in: 500,
            seed: 17,
            chains: 4,
        };
        let family = site_field_family(&layout, code.n_qubits());
        let estimate = order_parameter(&code, &layout, &family, &config).unwrap();
        assert!(estimate.mean > 0.95 && estimate.mean <= 1.0, "{estimate:?}");
        assert_eq!(estimate.operator, "magnetization");
    }

    #[test]
    fn magnetization_vanishes_above_the_transition() {
        let (code, layout) = build_ising(2, &[8, 8]).unwrap();
        let config = ThermalConfig {
            temperature: 3.5,
            bias: 0.01,
            sweeps: 3_000,
            burn_in: 500,
            seed: 23,
            chains: 4,
        };
        let family = site_field_family(&layout, code.n_qubits());
        let estimate = order_parameter(&code, &layout, &family, &config).unwrap();
        assert!(estimate.mean.abs() < 0.1, "{estimate:?}");
        assert!(estimate.mean.abs() <= 1.0);
    }

    #[test]
    fn one_dimensional_magnetization_vanishes_at_modest_temperature() {
        let (code, layout) = build_ising(1, &[24]).unwrap();
        let config = ThermalConfig {
            temperature: 0.8,
            bias: 0.01,
            sweeps: 20_000,
            burn_in: 1_000,
            seed: 31,
            chains: 4,
        };
        let family = site_field_family(&layout, code.n_qubits());
        let estimate = order_parameter(&code, &layout, &family, &config).unwrap();
        assert!(estimate.mean.abs() < 0.15, "{estimate:?}");
    }

    #[test]
    fn toric_string_order_parameter_vanishes() {
        let (code, layout) = build_toric(2, 1, 8).unwrap();
        let family = LogicalFamily {
            operator: toric_z_string(&layout, 0),
            axes: vec![1],
            label: "winding-string".into(),
        };
        let config = ThermalConfig {
            temperature: 1.0,
            bias: 0.01,
            sweeps: 10_000,
            burn_in: 500,
            seed: 43,
            chains: 2,
        };
        let estimate = order_parameter(&code, &layout, &family, &config).unwrap();
        assert!(estimate.mean.abs() < 0.05, "{estimate:?}");
    }

    #[test]
    fn trace_thinning_preserves_the_estimate() {
        let (code, layout) = build_ising(2, &[4, 4]).unwrap();
        let config = ThermalConfig {
            temperature: 2.0,
            bias: 0.02,
            sweeps: 400,
            burn_in: 100,
            seed: 3,
            chains: 2,
        };
        let family = site_field_family(&layout, code.n_qubits());
        let plain = order_parameter(&code, &layout, &family, &config).unwrap();
        let (traced, rows) =
            order_parameter_trace(&code, &layout, &family, &config, 50).unwrap();
        assert_eq!(plain.mean, traced.mean);
        assert_eq!(plain.std_error, traced.std_error);
        assert_eq!(rows.len(), 2 * (400 / 50));
        assert!(rows.iter().all(|r| r.sweep % 50 == 0 && r.chain < 2));
        assert!(rows.iter().all(|r| r.order_parameter.abs() <= 1.0));
        assert!(matches!(
            order_parameter_trace(&code, &layout, &family, &config, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn bias_sweep_reports_one_estimate_per_bias() {
        let (code, layout) = build_ising(1, &[8]).unwrap();
        let config = ThermalConfig {
            temperature: 1.5,
            bias: 0.0,
            sweeps: 200,
            burn_in: 50,
            seed: 8,
            chains: 2,
        };
        let family = site_field_family(&layout, code.n_qubits());
        let sweep =
            bias_sweep(&code, &layout, &family, &config, &[0.02, 0.01, 0.005]).unwrap();
        assert_eq!(sweep.len(), 3);
        assert_eq!(sweep[0].0, 0.02);
        assert!(sweep.iter().all(|(_, e)| e.mean.abs() <= 1.0));
    }

    // ---- memory times ----------------------------------------------------

    #[test]
    fn memory_never_fails_deep_in_the_ordered_phase() {
        let (code, layout) = build_ising(1, &[16]).unwrap();
        let readout = PauliOperator::single(16, 0, crate::pauli::Letter::Z).unwrap();
        let config = ThermalConfig {
            temperature: 0.4,
            bias: 0.0,
            sweeps: 300,
            burn_in: 0,
            seed: 2,
            chains: 1,
        };
        let times = memory_time(&code, &layout, &readout, &config, 8).unwrap();
        assert_eq!(times.len(), 8);
        assert!(times.iter().all(Option::is_none));
    }

    #[test]
    fn ising_memory_time_grows_with_system_size() {
        let config = ThermalConfig {
            temperature: 2.0,
            bias: 0.0,
            sweeps: 6_000,
            burn_in: 0,
            seed: 12,
            chains: 1,
        };
        let mut medians = Vec::new();
        for l in [4usize, 8] {
            let (code, layout) = build_ising(2, &[l, l]).unwrap();
            let readout =
                PauliOperator::single(code.n_qubits(), 0, crate::pauli::Letter::Z).unwrap();
            let times = memory_time(&code, &layout, &readout, &config, 16).unwrap();
            let finite: Vec<f64> = times
                .iter()
                .map(|t| t.map(|s| s as f64).unwrap_or(config.sweeps as f64 + 1.0))
                .collect();
            medians.push(median_of(&finite));
        }
        assert!(
            medians[0] < medians[1],
            "medians did not grow: {medians:?}"
        );
    }

    #[test]
    fn memory_rejects_unsuitable_inputs() {
        let (code, layout) = build_ising(2, &[4, 4]).unwrap();
        let config = ThermalConfig {
            temperature: 2.0,
            bias: 0.0,
            sweeps: 10,
            burn_in: 0,
            seed: 1,
            chains: 1,
        };
        // Even-support Z operators are stabilizer products, hence not logical
        // (equivalently: they commute with the only undetectable flip).
        let mut even = PauliOperator::identity(16);
        even.set_letter(0, crate::pauli::Letter::Z);
        even.set_letter(1, crate::pauli::Letter::Z);
        assert!(matches!(
            memory_time(&code, &layout, &even, &config, 2),
            Err(Error::InvalidCode(_))
        ));
        // Anticommuting readout.
        let bad = PauliOperator::single(16, 0, crate::pauli::Letter::X).unwrap();
        assert!(memory_time(&code, &layout, &bad, &config, 2).is_err());
        // Zero trials is a configuration error.
        let readout = PauliOperator::single(16, 0, crate::pauli::Letter::Z).unwrap();
        assert!(matches!(
            memory_time(&code, &layout, &readout, &config, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn toric_matcher_agrees_with_exhaustive_enumeration_at_l2() {
        let (code, layout) = build_toric(2, 1, 2).unwrap();
        let readout = toric_z_string(&layout, 1);
        let model = SectorModel::build(&code, ErrorSector::BitFlip).unwrap();
        let matcher = ToricMatcher::build(&layout, &readout, &model).unwrap();
        let n = code.n_qubits();
        let n_checks = model.checks.len();
        // Enumerate every error configuration once.
        struct Entry {
            syndrome: u32,
            class: usize,
            weight: u32,
            flips_readout: bool,
        }
        let readout_supp = readout.z_bits().clone();
        let mut entries = Vec::with_capacity(1 << n);
        for state in 0..(1usize << n) {
            let bits = BitVec::from_bits(
                &(0..n).map(|q| ((state >> q) & 1) as u8).collect::<Vec<_>>(),
            );
            let mut syndrome = 0u32;
            for (c, supp) in model.checks.iter().enumerate() {
                if supp.and_count(&bits) % 2 == 1 {
                    syndrome |= 1 << c;
                }
            }
            let class = (bits.and_count(&matcher.cut0) % 2)
                | ((bits.and_count(&matcher.cut1) % 2) << 1);
            entries.push(Entry {
                syndrome,
                class,
                weight: bits.count_ones() as u32,
                flips_readout: bits.and_count(&readout_supp) % 2 == 1,
            });
        }
        // Exhaustive per-class minima for every distinct syndrome.
        let mut minima: std::collections::HashMap<u32, [u64; 4]> =
            std::collections::HashMap::new();
        for e in &entries {
            let slot = minima.entry(e.syndrome).or_insert([u64::MAX; 4]);
            slot[e.class] = slot[e.class].min(e.weight as u64);
        }
        for (syndrome, exact) in &minima {
            let defects: Vec<(i64, i64)> = (0..n_checks)
                .filter(|c| syndrome & (1 << c) != 0)
                .map(|c| matcher.check_sites[c])
                .collect();
            let got = matcher.class_minima(&defects).unwrap();
            assert_eq!(got, *exact, "syndrome {syndrome:b}");
        }
        // Decoder verdicts match exhaustive minimal-weight coset decoding.
        for (state, e) in entries.iter().enumerate() {
            let mut best_ok = u64::MAX;
            let mut best_fail = u64::MAX;
            for c in &entries {
                if c.syndrome != e.syndrome {
                    continue;
                }
                let flips = c.flips_readout ^ e.flips_readout;
                if flips {
                    best_fail = best_fail.min(c.weight as u64);
                } else {
                    best_ok = best_ok.min(c.weight as u64);
                }
            }
            let expected = best_fail < best_ok;
            let bits = BitVec::from_bits(
                &(0..n).map(|q| ((state >> q) & 1) as u8).collect::<Vec<_>>(),
            );
            let mut violated = BitVec::zeros(n_checks);
            for c in 0..n_checks {
                if e.syndrome & (1 << c) != 0 {
                    violated.set(c, true);
                }
            }
            let got = matcher.is_failure(&bits, &violated).unwrap();
            assert_eq!(got, expected, "state {state:b}");
        }
    }

    #[test]
    fn toric_matcher_agrees_with_exhaustive_enumeration_at_l3() {
        let (code, layout) = build_toric(2, 1, 3).unwrap();
        let readout = toric_z_string(&layout, 1);
        let model = SectorModel::build(&code, ErrorSector::BitFlip).unwrap();
        let matcher = ToricMatcher::build(&layout, &readout, &model).unwrap();
        let n = code.n_qubits();
        let n_checks = model.checks.len();
        let readout_supp = readout.z_bits().clone();
        let mut syndromes = vec![0u32; 1 << n];
        let mut classes = vec![0u8; 1 << n];
        let mut weights = vec![0u8; 1 << n];
        let mut flips = vec![false; 1 << n];
        for state in 0..(1usize << n) {
            let bits = BitVec::from_bits(
                &(0..n).map(|q| ((state >> q) & 1) as u8).collect::<Vec<_>>(),
            );
            let mut syndrome = 0u32;
            for (c, supp) in model.checks.iter().enumerate() {
                if supp.and_count(&bits) % 2 == 1 {
                    syndrome |= 1 << c;
                }
            }
            syndromes[state] = syndrome;
            classes[state] = ((bits.and_count(&matcher.cut0) % 2)
                | ((bits.and_count(&matcher.cut1) % 2) << 1)) as u8;
            weights[state] = bits.count_ones() as u8;
            flips[state] = bits.and_count(&readout_supp) % 2 == 1;
        }
        let mut minima: std::collections::HashMap<u32, [u64; 4]> =
            std::collections::HashMap::new();
        for state in 0..(1usize << n) {
            let slot = minima.entry(syndromes[state]).or_insert([u64::MAX; 4]);
            let class = classes[state] as usize;
            slot[class] = slot[class].min(weights[state] as u64);
        }
        for (syndrome, exact) in &minima {
            let defects: Vec<(i64, i64)> = (0..n_checks)
                .filter(|c| syndrome & (1 << c) != 0)
                .map(|c| matcher.check_sites[c])
                .collect();
            let got = matcher.class_minima(&defects).unwrap();
            assert_eq!(got, *exact, "syndrome {syndrome:b}");
        }
        // Spot-check decoder verdicts on random configurations.
        let mut rng = chain_rng(77, 0);
        for _ in 0..40 {
            let state = rng.random_range(0..(1usize << n));
            let mut best_ok = u64::MAX;
            let mut best_fail = u64::MAX;
            for other in 0..(1usize << n) {
                if syndromes[other] != syndromes[state] {
                    continue;
                }
                if flips[other] ^ flips[state] {
                    best_fail = best_fail.min(weights[other] as u64);
                } else {
                    best_ok = best_ok.min(weights[other] as u64);
                }
            }
            let expected = best_fail < best_ok;
            let bits = BitVec::from_bits(
                &(0..n).map(|q| ((state >> q) & 1) as u8).collect::<Vec<_>>(),
            );
            let mut violated = BitVec::zeros(n_checks);
            for c in 0..n_checks {
                if syndromes[state] & (1 << c) != 0 {
                    violated.set(c, true);
                }
            }
            let got = matcher.is_failure(&bits, &violated).unwrap();
            assert_eq!(got, expected, "state {state:b}");
        }
    }

    #[test]
    fn toric_memory_fails_fast_when_hot() {
        let (code, layout) = build_toric(2, 1, 4).unwrap();
        let readout = toric_z_string(&layout, 1);
        let config = ThermalConfig {
            temperature: 1.5,
            bias: 0.0,
            sweeps: 400,
            burn_in: 0,
            seed: 6,
            chains: 1,
        };
        let times = memory_time(&code, &layout, &readout, &config, 6).unwrap();
        assert!(times.iter().all(|t| t.is_some()));
        let times2 = memory_time(&code, &layout, &readout, &config, 6).unwrap();
        assert_eq!(times, times2);
    }

    // ---- statistics helpers ---------------------------------------------

    #[test]
    fn median_handles_even_and_odd_sizes() {
        assert_eq!(median_of(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median_of(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn bootstrap_interval_brackets_the_median() {
        let values: Vec<f64> = (1..=40).map(|x| x as f64).collect();
        let (lo, hi) = bootstrap_median_interval(&values, 1_000, 9);
        let med = median_of(&values);
        assert!(lo <= med && med <= hi);
        assert!(lo < hi);
        let constant = vec![7.0; 12];
        let (clo, chi) = bootstrap_median_interval(&constant, 200, 9);
        assert_eq!((clo, chi), (7.0, 7.0));
    }
}
