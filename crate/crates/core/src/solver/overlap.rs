use std::collections::BTreeSet;

use super::{algorithm1, min_of, AssignmentOutcome, Counters, Evaluator, SelfConsistent, SATURATED, TIE_TOLERANCE};
use crate::analytics::{all_throughputs, total_throughput};
use crate::assignment::ChannelAssignment;
use crate::channel_set::ChannelSet;
use crate::enumeration::EnumerationCap;
use crate::error::Result;
use crate::mac::{overhead, MacConfig};
use crate::network::{availability, NetworkInstance};

/// Maximum number of times the second phase is re-run with a refreshed overhead.
pub const MAX_DELTA_ROUNDS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Phase2Run {
    pub assignment: ChannelAssignment,
    /// Analytic throughput at the overhead the run searched with.
    pub throughput: Vec<f64>,
    pub counters: Counters,
    pub moves: usize,
}

/// Channels a minimum-throughput SU may start sharing: those held by exactly
/// one neighbor, plus those held by two or more, minus what it already has.
fn candidates(instance: &NetworkInstance, assignment: &ChannelAssignment, su: usize) -> ChannelSet {
    let mut union = ChannelSet::EMPTY;
    let mut repeated = ChannelSet::EMPTY;
    for &l in instance.neighbors(su) {
        let tot = assignment.total(l);
        repeated = repeated.union(union.intersection(tot));
        union = union.union(tot);
    }
    let exactly_one = union.difference(repeated);
    let intersecting = union.difference(exactly_one).difference(assignment.common(su));
    exactly_one.union(intersecting).difference(assignment.total(su))
}

/// Number of SUs within [`TIE_TOLERANCE`] of the minimum.
fn count_at_min(throughput: &[f64], min: f64) -> usize {
    throughput.iter().filter(|&&t| t <= min + TIE_TOLERANCE).count()
}

/// Whether `(min, count)` beats `(best_min, best_count)`: a higher minimum, or
/// the same minimum (never lower) held by fewer SUs.
fn leximin_better(min: f64, count: usize, best_min: f64, best_count: usize) -> bool {
    min > best_min + TIE_TOLERANCE || (min >= best_min && min <= best_min + TIE_TOLERANCE && count < best_count)
}

/// Overlapping refinement at a fixed overhead `delta`.
///
/// Every pass scores each candidate move (a minimum-throughput SU starts
/// sharing one channel) by the global minimum throughput it would produce and
/// the number of SUs left at that minimum, recomputing only the SUs whose sets
/// or sharing neighbors changed. The best move is applied if it raises the
/// minimum, or keeps it while freeing some SU from it; otherwise the run ends.
/// Passes are capped at `M_s * N`.
pub fn phase2(
    instance: &NetworkInstance,
    start: &ChannelAssignment,
    delta: f64,
    cap: EnumerationCap,
) -> Result<Phase2Run> {
    let m = instance.num_sus();
    let avail = availability(instance);
    let mut assignment = start.clone();
    let mut throughput = all_throughputs(&assignment, instance, delta, cap)?;
    let mut counters = Counters::default();
    let mut moves = 0;
    let max_passes = m * instance.num_channels();

    while counters.iterations < max_passes {
        let t_min = min_of(&throughput);
        if t_min >= SATURATED {
            break;
        }
        counters.iterations += 1;
        let at_min: Vec<usize> = (0..m).filter(|&i| throughput[i] <= t_min + TIE_TOLERANCE).collect();
        let mut best: Option<(f64, usize, ChannelAssignment, Vec<f64>)> = None;
        for &i in &at_min {
            for j in candidates(instance, &assignment, i) {
                counters.evaluations += 1;
                let mut trial = assignment.clone();
                trial.share(instance, i, j)?;
                let mut affected = BTreeSet::from([i]);
                for &k in instance.neighbors(i) {
                    if trial.total(k).contains(j) {
                        affected.insert(k);
                        affected.extend(instance.neighbors(k).iter().copied());
                    }
                }
                affected.extend(instance.neighbors(i).iter().copied());
                let mut next = throughput.clone();
                for &x in &affected {
                    next[x] = total_throughput(x, &trial, instance, &avail, delta, cap)?;
                }
                let new_min = min_of(&next);
                let count = count_at_min(&next, new_min);
                if best
                    .as_ref()
                    .is_none_or(|(b, c, _, _)| leximin_better(new_min, count, *b, *c))
                {
                    best = Some((new_min, count, trial, next));
                }
            }
        }
        match best {
            Some((new_min, count, trial, next)) if leximin_better(new_min, count, t_min, at_min.len()) => {
                assignment = trial;
                throughput = next;
                moves += 1;
            }
            _ => break,
        }
    }
    Ok(Phase2Run {
        assignment,
        throughput,
        counters,
        moves,
    })
}

/// Overlapping channel assignment.
///
/// Phase 1 is [`algorithm1`]. Phase 2 ([`phase2`]) needs the MAC overhead,
/// which depends on the window the final assignment requires, so it runs with
/// the overhead of the current window estimate, the window the result needs is
/// computed, and the phase is re-run from the phase-1 assignment until the
/// window stops changing (at most [`MAX_DELTA_ROUNDS`] runs). Every result,
/// and the phase-1 assignment itself, is scored at its own window's overhead;
/// the best minimum wins, earliest on ties. The phase-1 assignment never
/// contends, so the answer is never worse than phase 1.
pub fn algorithm2(instance: &NetworkInstance, mac: &MacConfig, cap: EnumerationCap) -> Result<AssignmentOutcome> {
    let first = algorithm1(instance);
    let phase1 = Counters {
        iterations: first.iterations,
        evaluations: first.evaluations,
    };
    let scorer = SelfConsistent { mac: *mac, cap };
    let base_eval = scorer.evaluate(instance, &first.assignment)?;
    let mut window = base_eval.window.expect("self-consistent evaluation picks a window");
    let mut best = AssignmentOutcome {
        assignment: first.assignment.clone(),
        min_throughput: base_eval.min(),
        per_su_throughput: base_eval.throughput,
        iterations: 0,
        evaluations: 0,
        phase1: Some(phase1),
        delta: base_eval.delta,
        window: base_eval.window,
    };
    let mut first_round = true;
    for _ in 0..MAX_DELTA_ROUNDS {
        let delta = overhead(window, &mac.timing)?;
        let run = phase2(instance, &first.assignment, delta, cap)?;
        if first_round {
            best.iterations = run.counters.iterations;
            best.evaluations = run.counters.evaluations;
            first_round = false;
        }
        let eval = scorer.evaluate(instance, &run.assignment)?;
        let next_window = eval.window.expect("self-consistent evaluation picks a window");
        if eval.min() > best.min_throughput {
            best = AssignmentOutcome {
                assignment: run.assignment,
                min_throughput: eval.min(),
                per_su_throughput: eval.throughput,
                iterations: run.counters.iterations,
                evaluations: run.counters.evaluations,
                phase1: Some(phase1),
                delta: eval.delta,
                window: eval.window,
            };
        }
        if next_window == window {
            break;
        }
        window = next_window;
    }
    Ok(best)
}
