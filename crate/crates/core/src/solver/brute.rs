use super::{AssignmentOutcome, Evaluator};
use crate::assignment::ChannelAssignment;
use crate::channel_set::ChannelSet;
use crate::error::{Error, Result};
use crate::network::NetworkInstance;

pub const DEFAULT_BRUTE_FORCE_BITS: usize = 20;

/// Exhaustive search is refused when `N * M_s` exceeds `max_bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BruteForceCap {
    pub max_bits: usize,
}

impl Default for BruteForceCap {
    fn default() -> Self {
        BruteForceCap {
            max_bits: DEFAULT_BRUTE_FORCE_BITS,
        }
    }
}

/// Visits all `2^(N * M_s)` choices of per-SU channel sets and keeps the one
/// with the largest minimum throughput (first found on ties). Without
/// `overlap_allowed`, choices where neighbors share a channel are skipped.
pub fn brute_force(
    instance: &NetworkInstance,
    evaluator: &dyn Evaluator,
    overlap_allowed: bool,
    cap: BruteForceCap,
) -> Result<AssignmentOutcome> {
    let n = instance.num_channels();
    let m = instance.num_sus();
    let bits = n * m;
    if bits > cap.max_bits || bits >= 64 {
        return Err(Error::TooLargeForBruteForce {
            bits,
            cap: cap.max_bits,
        });
    }
    let channel_mask = ChannelSet::full(n).bits();
    let mut best: Option<AssignmentOutcome> = None;
    let mut iterations = 0usize;
    let mut evaluations = 0usize;
    let mut totals = vec![ChannelSet::EMPTY; m];
    for code in 0u64..(1u64 << bits) {
        iterations += 1;
        for (i, t) in totals.iter_mut().enumerate() {
            *t = ChannelSet::from_bits(code >> (i * n) & channel_mask);
        }
        if !overlap_allowed
            && instance
                .su_edges()
                .iter()
                .any(|&(a, b)| !totals[a].is_disjoint(totals[b]))
        {
            continue;
        }
        let assignment = ChannelAssignment::classify(instance, &totals);
        let eval = evaluator.evaluate(instance, &assignment)?;
        evaluations += 1;
        let min = eval.min();
        if best.as_ref().is_none_or(|b| min > b.min_throughput) {
            best = Some(AssignmentOutcome {
                assignment,
                min_throughput: min,
                per_su_throughput: eval.throughput,
                iterations: 0,
                evaluations: 0,
                phase1: None,
                delta: eval.delta,
                window: eval.window,
            });
        }
    }
    let mut best = best.expect("the empty assignment is always feasible");
    best.iterations = iterations;
    best.evaluations = evaluations;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::EnumerationCap;
    use crate::network::{PuProfile, SuProfile};
    use crate::solver::{Analytic, ClosedForm};

    fn homogeneous(p: f64, n: usize, m: usize, edges: Vec<(usize, usize)>) -> NetworkInstance {
        NetworkInstance::new(
            n,
            vec![PuProfile {
                id: 0,
                idle_prob: vec![p; n],
            }],
            (0..m)
                .map(|id| SuProfile {
                    id,
                    pu_neighbors: vec![0],
                })
                .collect(),
            edges,
        )
        .unwrap()
    }

    /// Independent oracle: list every subset of channels for one SU by hand.
    fn best_single_su(row: &[f64]) -> f64 {
        let n = row.len();
        (0u32..(1 << n))
            .map(|s| {
                let mut miss = 1.0;
                for (c, &p) in row.iter().enumerate() {
                    if s >> c & 1 == 1 {
                        miss *= 1.0 - p;
                    }
                }
                1.0 - miss
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn single_su_takes_everything() {
        let inst = NetworkInstance::new(
            2,
            vec![PuProfile {
                id: 0,
                idle_prob: vec![0.6, 0.8],
            }],
            vec![SuProfile {
                id: 0,
                pu_neighbors: vec![0],
            }],
            vec![],
        )
        .unwrap();
        let out = brute_force(&inst, &ClosedForm, false, BruteForceCap::default()).unwrap();
        assert_eq!(out.assignment.separate(0), ChannelSet::full(2));
        assert!((out.min_throughput - best_single_su(&[0.6, 0.8])).abs() < 1e-15);
        assert!((out.min_throughput - 0.92).abs() < 1e-15);
        assert_eq!(out.iterations, 4);
    }

    #[test]
    fn spatial_reuse_for_non_neighbors() {
        let inst = homogeneous(1.0, 1, 2, vec![]);
        let out = brute_force(&inst, &ClosedForm, false, BruteForceCap::default()).unwrap();
        assert_eq!(out.min_throughput, 1.0);
        assert!(out.assignment.separate(0).contains(0) && out.assignment.separate(1).contains(0));
    }

    #[test]
    fn neighbors_split_channels() {
        let inst = homogeneous(0.8, 2, 2, vec![(0, 1)]);
        let out = brute_force(&inst, &ClosedForm, false, BruteForceCap::default()).unwrap();
        // Of the 16 choices, 9 are non-overlapping; the best gives one channel each.
        assert_eq!(out.evaluations, 9);
        assert!((out.min_throughput - 0.8).abs() < 1e-15);
        assert_eq!(out.assignment.separate(0).len(), 1);
        assert_eq!(out.assignment.separate(1).len(), 1);
        out.assignment.validate(&inst).unwrap();
    }

    #[test]
    fn overlap_search_validates_and_dominates() {
        let inst = homogeneous(0.7, 2, 3, vec![(0, 1), (1, 2)]);
        let plain = brute_force(&inst, &ClosedForm, false, BruteForceCap::default()).unwrap();
        let eval = Analytic {
            delta: 0.0,
            cap: EnumerationCap::default(),
        };
        let over = brute_force(&inst, &eval, true, BruteForceCap::default()).unwrap();
        over.assignment.validate(&inst).unwrap();
        assert!(over.min_throughput >= plain.min_throughput - 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let inst = homogeneous(0.8, 7, 3, vec![]);
        assert!(matches!(
            brute_force(&inst, &ClosedForm, false, BruteForceCap::default()),
            Err(Error::TooLargeForBruteForce { bits: 21, cap: 20 })
        ));
    }
}
