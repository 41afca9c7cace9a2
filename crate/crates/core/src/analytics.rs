//! Analytic per-SU throughput for overlapping assignments.
//!
//! Throughput splits into two disjoint events. Case 1: some separate channel
//! is free, and the SU transmits without contention. Case 2: every separate
//! channel is busy, the SU picks a free common channel `j` uniformly, and wins
//! it with probability `1 / (1 + A4)` where `A4` counts neighbors that also
//! picked `j`; the win is worth `1 - delta`.
//!
//! Case 2 is computed exactly. For each `j`, the scope is the SU plus the
//! neighbors sharing `j`; a dynamic program over the other channels in their
//! total sets tracks which SUs still have every separate channel busy and how
//! many common channels each sees free. The pick of every sharing neighbor is
//! independent given that state, so `E[1 / (1 + A4)]` is a Poisson-binomial
//! expectation.

use crate::assignment::ChannelAssignment;
use crate::channel_set::ChannelSet;
use crate::enumeration::{channel_patterns, fold_channels, EnumerationCap, PuStateOutcome};
use crate::error::{Error, Result};
use crate::network::{AvailabilityMatrix, NetworkInstance};
use crate::solver::nonoverlap_throughput;

pub fn case1_throughput(su: usize, assignment: &ChannelAssignment, avail: &AvailabilityMatrix) -> f64 {
    nonoverlap_throughput(assignment.separate(su), avail.row(su))
}

fn check_delta(delta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&delta) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("overhead {delta} outside [0, 1]")))
    }
}

/// `E[1 / (1 + A)]` for `A` a sum of independent Bernoulli(`q`) trials.
fn expected_win_share(q: &[f64]) -> f64 {
    let mut dist = vec![0.0; q.len() + 1];
    dist[0] = 1.0;
    for (n, &p) in q.iter().enumerate() {
        for a in (0..=n + 1).rev() {
            let stay = dist[a] * (1.0 - p);
            let moved = if a > 0 { dist[a - 1] * p } else { 0.0 };
            dist[a] = stay + moved;
        }
    }
    dist.iter().enumerate().map(|(a, &p)| p / (a as f64 + 1.0)).sum()
}

/// Case 2 contribution of common channel `channel` to `su`, before the
/// `(1 - delta)` factor.
fn case2_on_channel(
    su: usize,
    channel: usize,
    assignment: &ChannelAssignment,
    instance: &NetworkInstance,
    cap: EnumerationCap,
) -> Result<f64> {
    let mut sus = vec![su];
    sus.extend(
        instance
            .neighbors(su)
            .iter()
            .copied()
            .filter(|&k| assignment.common(k).contains(channel)),
    );
    let sep: Vec<ChannelSet> = sus.iter().map(|&x| assignment.separate(x)).collect();
    let com: Vec<ChannelSet> = sus.iter().map(|&x| assignment.common(x)).collect();
    let mut others = sus
        .iter()
        .fold(ChannelSet::EMPTY, |acc, &x| acc.union(assignment.total(x)));
    others.remove(channel);

    let all_busy = if sus.len() == 64 {
        u64::MAX
    } else {
        (1u64 << sus.len()) - 1
    };
    // (SUs whose separate sets are still all busy, free common channels other than `channel`)
    let init = (all_busy, vec![0u8; sus.len()]);
    let states = fold_channels(instance, &sus, others, init, cap, |(busy, counts), c, mask| {
        let mut busy = *busy;
        let mut counts = counts.clone();
        for t in 0..sus.len() {
            if mask >> t & 1 == 0 {
                continue;
            }
            if sep[t].contains(c) {
                busy &= !(1u64 << t);
            } else if com[t].contains(c) {
                counts[t] += 1;
            }
        }
        if busy & 1 == 0 {
            return None;
        }
        for (t, n) in counts.iter_mut().enumerate() {
            if busy >> t & 1 == 0 {
                *n = 0;
            }
        }
        Some((busy, counts))
    })?;

    let on_channel = channel_patterns(instance, &sus, channel, cap)?;
    let mut total = 0.0;
    for &(mask, pj) in &on_channel {
        if mask & 1 == 0 {
            continue;
        }
        for ((busy, counts), &p) in &states {
            let pick = 1.0 / (counts[0] as f64 + 1.0);
            let contend: Vec<f64> = (1..sus.len())
                .map(|t| {
                    if mask >> t & 1 == 1 && busy >> t & 1 == 1 {
                        1.0 / (counts[t] as f64 + 1.0)
                    } else {
                        0.0
                    }
                })
                .collect();
            total += pj * p * pick * expected_win_share(&contend);
        }
    }
    Ok(total)
}

/// Exact Case 2 throughput of `su`, including the `(1 - delta)` factor.
pub fn case2_throughput_exact(
    su: usize,
    assignment: &ChannelAssignment,
    instance: &NetworkInstance,
    delta: f64,
    cap: EnumerationCap,
) -> Result<f64> {
    check_delta(delta)?;
    let mut sum = 0.0;
    for j in assignment.common(su) {
        sum += case2_on_channel(su, j, assignment, instance, cap)?;
    }
    Ok((1.0 - delta) * sum)
}

pub fn total_throughput(
    su: usize,
    assignment: &ChannelAssignment,
    instance: &NetworkInstance,
    avail: &AvailabilityMatrix,
    delta: f64,
    cap: EnumerationCap,
) -> Result<f64> {
    let case2 = case2_throughput_exact(su, assignment, instance, delta, cap)?;
    Ok((case1_throughput(su, assignment, avail) + case2).clamp(0.0, 1.0))
}

/// Analytic throughput of every SU.
pub fn all_throughputs(
    assignment: &ChannelAssignment,
    instance: &NetworkInstance,
    delta: f64,
    cap: EnumerationCap,
) -> Result<Vec<f64>> {
    let avail = crate::network::availability(instance);
    (0..instance.num_sus())
        .map(|i| total_throughput(i, assignment, instance, &avail, delta, cap))
        .collect()
}

/// Sizes of the four neighbor groups competing (or not) for one channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GroupCensus {
    /// Channel unavailable to the neighbor.
    pub a1: usize,
    /// Channel available, some separate channel free.
    pub a2: usize,
    /// Separate set busy, picked another channel.
    pub a3: usize,
    /// Separate set busy, picked this channel: a competitor.
    pub a4: usize,
}

impl GroupCensus {
    pub fn total(&self) -> usize {
        self.a1 + self.a2 + self.a3 + self.a4
    }
}

/// Classifies each neighbor of `su` that shares `channel` under one
/// realization of PU activity and per-SU channel picks.
pub fn group_census(
    realization: &PuStateOutcome,
    picks: &[Option<usize>],
    su: usize,
    channel: usize,
    assignment: &ChannelAssignment,
    instance: &NetworkInstance,
) -> Result<GroupCensus> {
    if !assignment.common(su).contains(channel) {
        return Err(Error::ChannelNotShared { su, channel });
    }
    if picks.len() != instance.num_sus() {
        return Err(Error::InconsistentPicks(format!(
            "{} picks for {} SUs",
            picks.len(),
            instance.num_sus()
        )));
    }
    let mut census = GroupCensus::default();
    for &k in instance.neighbors(su) {
        if !assignment.common(k).contains(channel) {
            continue;
        }
        let free = |c: usize| realization.available(instance, k, c);
        let sep_free = assignment.separate(k).iter().any(free);
        match picks[k] {
            Some(c) if !assignment.common(k).contains(c) || !free(c) => {
                return Err(Error::InconsistentPicks(format!(
                    "SU {k} picked channel {c}, which is not a free common channel"
                )));
            }
            Some(c) if sep_free => {
                return Err(Error::InconsistentPicks(format!(
                    "SU {k} picked common channel {c} while a separate channel is free"
                )));
            }
            None if !sep_free && assignment.common(k).iter().any(free) => {
                return Err(Error::InconsistentPicks(format!(
                    "SU {k} has a free common channel but no pick"
                )));
            }
            _ => {}
        }
        if !free(channel) {
            census.a1 += 1;
        } else if sep_free {
            census.a2 += 1;
        } else if picks[k] == Some(channel) {
            census.a4 += 1;
        } else {
            census.a3 += 1;
        }
    }
    Ok(census)
}
