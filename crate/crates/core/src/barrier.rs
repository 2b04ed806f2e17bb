//! Exact excitation energies and energy barriers for implementing an
//! operator through a sequence of single-qubit steps.
//!
//! The Hamiltonian is minus the sum of the stabilizer generators, so a Pauli
//! error pays +2 for every generator it anticommutes with. The barrier of an
//! operator is the smallest possible value, over orderings of its
//! single-qubit factors, of the largest excitation energy seen along the
//! way — a bottleneck shortest path over the subset lattice of the
//! operator's support, solved exactly by best-first search.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::Error;
use crate::gf2::BitVec;
use crate::pauli::{Letter, PauliOperator};
use crate::stabilizer::StabilizerCode;
use crate::Result;

/// Hard cap on the support size of a barrier search (2^20 subset states).
pub const BARRIER_WEIGHT_CAP: usize = 20;

/// Hard cap on the stabilizer budget of a class-level search.
pub const CLASS_BUDGET_CAP: usize = 16;

/// An ordered single-qubit implementation of a target operator: the factor
/// applied at each step and the excitation energy after it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorPath {
    pub steps: Vec<(usize, Letter)>,
    pub energies: Vec<u64>,
}

impl ErrorPath {
    /// Largest excitation energy along the path (zero for the empty path).
    pub fn max_energy(&self) -> u64 {
        self.energies.iter().copied().max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// The outcome of a barrier search: the bottleneck energy, a witness path
/// attaining it, and the representative the path implements.
#[derive(Clone, Debug)]
pub struct BarrierResult {
    pub barrier: u64,
    pub path: ErrorPath,
    pub representative: PauliOperator,
}

/// Excitation energy of an error above the ground space: +2 per violated
/// generator.
pub fn excitation_energy(code: &StabilizerCode, e: &PauliOperator) -> Result<u64> {
    Ok(2 * code.syndrome(e)?.count_ones() as u64)
}

/// Finds the cheapest-bottleneck ordering of the single-qubit factors of
/// `l`: a best-first search over support subsets where the cost of a state
/// is the largest excitation energy on the best path reaching it.
pub fn barrier_for_representative(code: &StabilizerCode, l: &PauliOperator) -> Result<BarrierResult> {
    let support = l.support();
    let w = support.len();
    if w > BARRIER_WEIGHT_CAP {
        return Err(Error::Capacity(format!(
            "operator weight {w} exceeds the barrier search cap {BARRIER_WEIGHT_CAP}"
        )));
    }
    let letters: Vec<Letter> = support.iter().map(|&q| l.letter(q)).collect();
    let factor_syndromes: Vec<BitVec> = support
        .iter()
        .zip(&letters)
        .map(|(&q, &letter)| {
            code.syndrome(&PauliOperator::single(code.n_qubits(), q, letter)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let m = code.generators().len();
    let energy = |state: u32| -> u64 {
        let mut syndrome = BitVec::zeros(m);
        for (i, factor) in factor_syndromes.iter().enumerate() {
            if state >> i & 1 == 1 {
                syndrome.xor_with(factor);
            }
        }
        2 * syndrome.count_ones() as u64
    };

    let full: u32 = ((1u64 << w) - 1) as u32;
    let mut dist = vec![u64::MAX; 1 << w];
    let mut last_added = vec![usize::MAX; 1 << w];
    let mut heap = BinaryHeap::new();
    dist[0] = 0;
    heap.push(Reverse((0u64, 0u32)));
    while let Some(Reverse((cost, state))) = heap.pop() {
        if cost > dist[state as usize] {
            continue;
        }
        if state == full {
            break;
        }
        for i in 0..w {
            if state >> i & 1 == 1 {
                continue;
            }
            let next = state | 1 << i;
            let next_cost = cost.max(energy(next));
            if next_cost < dist[next as usize] {
                dist[next as usize] = next_cost;
                last_added[next as usize] = i;
                heap.push(Reverse((next_cost, next)));
            }
        }
    }

    // Walk the parent pointers back from the full set to order the steps.
    let mut order = Vec::with_capacity(w);
    let mut cur = full;
    while cur != 0 {
        let i = last_added[cur as usize];
        order.push(i);
        cur &= !(1 << i);
    }
    order.reverse();
    let mut steps = Vec::with_capacity(w);
    let mut energies = Vec::with_capacity(w);
    let mut prefix = 0u32;
    for i in order {
        prefix |= 1 << i;
        steps.push((support[i], letters[i]));
        energies.push(energy(prefix));
    }
    Ok(BarrierResult {
        barrier: dist[full as usize],
        path: ErrorPath { steps, energies },
        representative: l.clone(),
    })
}

/// Minimizes [`barrier_for_representative`] over the class representatives
/// `l * s`, with `s` ranging over the subgroup generated by the first
/// `stabilizer_budget` generators. Representatives whose weight exceeds the
/// search cap are skipped; ties keep the earliest subset.
pub fn barrier_min_over_class(
    code: &StabilizerCode,
    l: &PauliOperator,
    stabilizer_budget: usize,
) -> Result<BarrierResult> {
    if stabilizer_budget > CLASS_BUDGET_CAP {
        return Err(Error::Capacity(format!(
            "stabilizer budget {stabilizer_budget} exceeds the enumeration cap {CLASS_BUDGET_CAP}"
        )));
    }
    let budget = stabilizer_budget.min(code.generators().len());
    let mut best: Option<BarrierResult> = None;
    for mask in 0u32..1 << budget {
        let mut rep = l.clone();
        for (i, g) in code.generators()[..budget].iter().enumerate() {
            if mask >> i & 1 == 1 {
                rep = rep.mul(g)?;
            }
        }
        let rep = rep.with_phase(0);
        if rep.weight() > BARRIER_WEIGHT_CAP {
            continue;
        }
        let result = barrier_for_representative(code, &rep)?;
        if best.as_ref().is_none_or(|b| result.barrier < b.barrier) {
            best = Some(result);
        }
    }
    best.ok_or_else(|| {
        Error::Capacity(
            "every representative within the stabilizer budget exceeds the search cap".into(),
        )
    })
}
