//! Channel-assignment solvers and the throughput evaluators that drive them.

mod brute;
mod greedy;
mod overlap;

pub use brute::{brute_force, BruteForceCap, DEFAULT_BRUTE_FORCE_BITS};
pub use greedy::algorithm1;
pub use overlap::{algorithm2, phase2, Phase2Run, MAX_DELTA_ROUNDS};

use crate::analytics::all_throughputs;
use crate::assignment::ChannelAssignment;
use crate::channel_set::ChannelSet;
use crate::enumeration::EnumerationCap;
use crate::error::{Error, Result};
use crate::mac::{overhead, select_window, MacConfig};
use crate::network::{availability, NetworkInstance};

/// Throughputs within this distance of each other count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// An SU at or above this throughput takes no further part in a search.
pub const SATURATED: f64 = 1.0 - 1e-12;

/// `1 - prod(1 - p)` over `channels`.
pub fn nonoverlap_throughput(channels: ChannelSet, avail_row: &[f64]) -> f64 {
    1.0 - channels.iter().map(|c| 1.0 - avail_row[c]).product::<f64>()
}

/// Throughput gained by adding `candidate` to `current`.
pub fn throughput_delta(current: ChannelSet, candidate: usize, avail_row: &[f64]) -> Result<f64> {
    if current.contains(candidate) {
        return Err(Error::AlreadyAssigned { channel: candidate });
    }
    let idle: f64 = current.iter().map(|c| 1.0 - avail_row[c]).product();
    Ok(avail_row[candidate] * idle)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counters {
    pub iterations: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentOutcome {
    pub assignment: ChannelAssignment,
    pub per_su_throughput: Vec<f64>,
    pub min_throughput: f64,
    /// Counters of the search producing `assignment` (phase 2 for algorithm 2).
    pub iterations: usize,
    pub evaluations: usize,
    /// Algorithm 2 only: counters of the greedy first phase.
    pub phase1: Option<Counters>,
    /// Overhead used to score `per_su_throughput`.
    pub delta: f64,
    /// Contention window behind `delta`, when the evaluator chose one.
    pub window: Option<u32>,
}

pub(crate) fn min_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Per-SU throughput of an assignment together with the overhead charged.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub throughput: Vec<f64>,
    pub delta: f64,
    pub window: Option<u32>,
}

impl Evaluation {
    pub fn min(&self) -> f64 {
        min_of(&self.throughput)
    }
}

pub trait Evaluator {
    fn evaluate(&self, instance: &NetworkInstance, assignment: &ChannelAssignment) -> Result<Evaluation>;
}

/// `1 - prod(1 - p)` over each separate set; for non-overlapping assignments.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClosedForm;

impl Evaluator for ClosedForm {
    fn evaluate(&self, instance: &NetworkInstance, assignment: &ChannelAssignment) -> Result<Evaluation> {
        let avail = availability(instance);
        let throughput = (0..instance.num_sus())
            .map(|i| nonoverlap_throughput(assignment.separate(i), avail.row(i)))
            .collect();
        Ok(Evaluation {
            throughput,
            delta: 0.0,
            window: None,
        })
    }
}

/// Exact analytic model at a fixed overhead.
#[derive(Debug, Clone, Copy)]
pub struct Analytic {
    pub delta: f64,
    pub cap: EnumerationCap,
}

impl Evaluator for Analytic {
    fn evaluate(&self, instance: &NetworkInstance, assignment: &ChannelAssignment) -> Result<Evaluation> {
        Ok(Evaluation {
            throughput: all_throughputs(assignment, instance, self.delta, self.cap)?,
            delta: self.delta,
            window: None,
        })
    }
}

/// Exact analytic model at the overhead of the window the assignment itself
/// needs to meet the collision target.
#[derive(Debug, Clone, Copy)]
pub struct SelfConsistent {
    pub mac: MacConfig,
    pub cap: EnumerationCap,
}

impl Evaluator for SelfConsistent {
    fn evaluate(&self, instance: &NetworkInstance, assignment: &ChannelAssignment) -> Result<Evaluation> {
        let window = select_window(instance, assignment, self.mac.epsilon, self.cap)?.global_window;
        let delta = overhead(window, &self.mac.timing)?;
        Ok(Evaluation {
            throughput: all_throughputs(assignment, instance, delta, self.cap)?,
            delta,
            window: Some(window),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn nonoverlap_examples() {
        let row = [0.8, 0.8, 0.8];
        assert!((nonoverlap_throughput(ChannelSet::single(0), &row) - 0.8).abs() < 1e-15);
        assert!((nonoverlap_throughput(ChannelSet::from_iter([1, 2]), &row) - 0.96).abs() < 1e-15);
        assert_eq!(nonoverlap_throughput(ChannelSet::EMPTY, &row), 0.0);
    }

    #[test]
    fn delta_examples() {
        let row = [0.5, 0.6, 0.7, 1.0];
        assert!((throughput_delta(ChannelSet::single(0), 1, &row).unwrap() - 0.30).abs() < 1e-15);
        assert!((throughput_delta(ChannelSet::EMPTY, 2, &row).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(throughput_delta(ChannelSet::single(3), 1, &row).unwrap(), 0.0);
        assert!(throughput_delta(ChannelSet::single(3), 3, &row).is_err());
    }

    proptest! {
        #[test]
        fn delta_is_difference_of_throughputs(
            row in proptest::collection::vec(0.0f64..=1.0, 8),
            bits in 0u64..256,
            candidate in 0usize..8,
        ) {
            let mut current = ChannelSet::from_bits(bits);
            current.remove(candidate);
            let mut after = current;
            after.insert(candidate);
            let diff = nonoverlap_throughput(after, &row) - nonoverlap_throughput(current, &row);
            let d = throughput_delta(current, candidate, &row).unwrap();
            prop_assert!((d - diff).abs() <= 1e-12);
        }
    }
}
