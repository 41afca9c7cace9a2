use super::{min_of, nonoverlap_throughput, throughput_delta, AssignmentOutcome, SATURATED, TIE_TOLERANCE};
use crate::assignment::ChannelAssignment;
use crate::channel_set::ChannelSet;
use crate::network::{availability, NetworkInstance};

/// Greedy non-overlapping assignment.
///
/// Each round takes the SUs at the minimum throughput, scores every channel
/// still available to them by its throughput gain, and gives the best
/// (SU, channel) pair to that SU. The channel then leaves the available sets of
/// the winner's neighbors only, so non-neighbors may reuse it. The search ends
/// once no minimum-throughput SU has a channel left, or every SU is saturated.
/// Ties go to the lowest SU index, then the lowest channel.
pub fn algorithm1(instance: &NetworkInstance) -> AssignmentOutcome {
    let m = instance.num_sus();
    let avail = availability(instance);
    let mut available = vec![ChannelSet::full(instance.num_channels()); m];
    let mut assignment = ChannelAssignment::empty(m);
    let mut throughput = vec![0.0; m];
    let mut iterations = 0;
    let mut evaluations = 0;

    while !throughput.is_empty() {
        let t_min = min_of(&throughput);
        if t_min >= SATURATED {
            break;
        }
        let at_min: Vec<usize> = (0..m).filter(|&i| throughput[i] <= t_min + TIE_TOLERANCE).collect();
        if at_min.iter().all(|&i| available[i].is_empty()) {
            break;
        }
        iterations += 1;
        let mut best: Option<(f64, usize, usize)> = None;
        for &i in &at_min {
            let current = assignment.separate(i);
            for j in available[i] {
                evaluations += 1;
                let gain = throughput_delta(current, j, avail.row(i)).expect("available channels are unassigned");
                if best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, i, j));
                }
            }
        }
        let (_, i, j) = best.expect("some minimum-throughput SU has a channel");
        assignment.separate_mut(i).insert(j);
        available[i].remove(j);
        for &k in instance.neighbors(i) {
            available[k].remove(j);
        }
        throughput[i] = nonoverlap_throughput(assignment.separate(i), avail.row(i));
    }

    AssignmentOutcome {
        assignment,
        min_throughput: if m == 0 { 0.0 } else { min_of(&throughput) },
        per_su_throughput: throughput,
        iterations,
        evaluations,
        phase1: None,
        delta: 0.0,
        window: None,
    }
}
