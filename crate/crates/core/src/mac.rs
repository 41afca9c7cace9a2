//! Contention-window sizing and MAC overhead.

use crate::assignment::ChannelAssignment;
use crate::channel_set::ChannelSet;
use crate::enumeration::{fold_channels, EnumerationCap};
use crate::error::{Error, Result};
use crate::network::NetworkInstance;

/// Largest window `select_window` will try.
pub const WINDOW_SCAN_LIMIT: u32 = 4096;

/// Protocol timing, in microseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacTiming {
    /// Duration of one backoff slot.
    pub theta_us: f64,
    pub t_rts_us: f64,
    pub t_cts_us: f64,
    pub t_sifs_us: f64,
    pub t_sen_us: f64,
    pub t_syn_us: f64,
    pub t_cycle_us: f64,
}

impl Default for MacTiming {
    /// 802.11a/g basic-rate control frames with a 3 ms cycle; sensing and
    /// synchronization time neglected.
    fn default() -> Self {
        MacTiming {
            theta_us: 20.0,
            t_rts_us: 48.0,
            t_cts_us: 40.0,
            t_sifs_us: 28.0,
            t_sen_us: 0.0,
            t_syn_us: 0.0,
            t_cycle_us: 3000.0,
        }
    }
}

impl MacTiming {
    /// Fixed (window-independent) per-cycle overhead.
    pub fn fixed_overhead_us(&self) -> f64 {
        self.t_rts_us + self.t_cts_us + 3.0 * self.t_sifs_us + self.t_sen_us + self.t_syn_us
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("theta_us", self.theta_us),
            ("t_rts_us", self.t_rts_us),
            ("t_cts_us", self.t_cts_us),
            ("t_sifs_us", self.t_sifs_us),
            ("t_sen_us", self.t_sen_us),
            ("t_syn_us", self.t_syn_us),
            ("t_cycle_us", self.t_cycle_us),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::validation(name, format!("{v} must be finite and nonnegative")));
            }
        }
        if self.t_cycle_us <= self.fixed_overhead_us() {
            return Err(Error::validation(
                "t_cycle_us",
                "cycle does not exceed the fixed overhead",
            ));
        }
        Ok(())
    }

    /// Backoff slots the control channel stays busy for a successful RTS/CTS exchange.
    pub fn exchange_slots(&self) -> u32 {
        self.slots(self.t_rts_us + self.t_sifs_us + self.t_cts_us + self.t_sifs_us)
    }

    /// Backoff slots lost to a collided RTS (RTS plus CTS timeout).
    pub fn collision_slots(&self) -> u32 {
        self.slots(self.t_rts_us + self.t_sifs_us)
    }

    fn slots(&self, us: f64) -> u32 {
        if self.theta_us <= 0.0 {
            1
        } else {
            ((us / self.theta_us).ceil() as u32).max(1)
        }
    }
}

/// Timing plus the per-SU collision target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacConfig {
    pub timing: MacTiming,
    pub epsilon: f64,
}

impl Default for MacConfig {
    fn default() -> Self {
        MacConfig {
            timing: MacTiming::default(),
            epsilon: 0.03,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowResult {
    pub per_su_window: Vec<u32>,
    pub global_window: u32,
    /// Collision probability of each SU at its own window.
    pub per_su_collision_prob: Vec<f64>,
    /// Target each SU was sized against.
    pub epsilon: Vec<f64>,
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Probability that the first transmission attempt among `m` contenders with
/// uniform backoff on `[0, w-1]` is a collision, counting tied minima at
/// `l = 0..=w-2`.
pub fn first_collision_prob_conditional(m: u32, w: u32) -> Result<f64> {
    if m < 2 || w < 2 {
        return Err(Error::InvalidArgument(format!(
            "need m >= 2 and w >= 2, got m = {m}, w = {w}"
        )));
    }
    let wf = w as f64;
    let mut total = 0.0;
    for j in 2..=m {
        let c = binomial(m, j) * (1.0 / wf).powi(j as i32);
        let mut inner = 0.0;
        for l in 0..=(w - 2) {
            inner += ((wf - l as f64 - 1.0) / wf).powi((m - j) as i32);
        }
        total += c * inner;
    }
    Ok(total)
}

/// `P{m neighbors of su contend | su contends}` for `m = 0..=degree`. An SU
/// contends when its separate channels are all busy and some common channel
/// is free. Neighbors often see the same PUs as `su`, so the condition matters.
/// If `su` can never contend the distribution is all mass at `m = 0`.
pub fn contend_count_distribution(
    su: usize,
    assignment: &ChannelAssignment,
    instance: &NetworkInstance,
    cap: EnumerationCap,
) -> Result<Vec<f64>> {
    let nbrs = instance.neighbors(su);
    let mut dist = vec![0.0; nbrs.len() + 1];
    if nbrs.is_empty() {
        dist[0] = 1.0;
        return Ok(dist);
    }
    // Neighbors first, then su itself at index `nbrs.len()`.
    let members: Vec<usize> = nbrs.iter().copied().chain([su]).collect();
    let sep: Vec<ChannelSet> = members.iter().map(|&k| assignment.separate(k)).collect();
    let com: Vec<ChannelSet> = members.iter().map(|&k| assignment.common(k)).collect();
    let channels = members
        .iter()
        .fold(ChannelSet::EMPTY, |acc, &k| acc.union(assignment.total(k)));
    let all = if members.len() == 64 {
        u64::MAX
    } else {
        (1u64 << members.len()) - 1
    };
    let me = 1u64 << nbrs.len();
    // (separate sets still all busy, some common channel seen free)
    let states = fold_channels(
        instance,
        &members,
        channels,
        (all, 0u64),
        cap,
        |&(busy, free), c, mask| {
            let mut busy = busy;
            let mut free = free;
            for t in 0..members.len() {
                if mask >> t & 1 == 1 {
                    if sep[t].contains(c) {
                        busy &= !(1u64 << t);
                    } else if com[t].contains(c) {
                        free |= 1u64 << t;
                    }
                }
            }
            if busy & me == 0 {
                // su transmits on a separate channel and never contends.
                return None;
            }
            // Neighbors with a free separate channel are settled; forget their common state.
            Some((busy, free & busy))
        },
    )?;
    let mut contends = 0.0;
    for ((busy, free), p) in states {
        let active = busy & free;
        if active & me != 0 {
            dist[(active & !me).count_ones() as usize] += p;
            contends += p;
        }
    }
    if contends > 0.0 {
        for d in dist.iter_mut() {
            *d /= contends;
        }
    } else {
        dist.iter_mut().for_each(|d| *d = 0.0);
        dist[0] = 1.0;
    }
    Ok(dist)
}

fn collision_from_distribution(dist: &[f64], w: u32) -> Result<f64> {
    let mut total = 0.0;
    for (m, &p) in dist.iter().enumerate().skip(1) {
        if p > 0.0 {
            total += p * first_collision_prob_conditional(m as u32 + 1, w)?;
        }
    }
    Ok(total)
}

/// First-collision probability seen by `su` at window `w`, counting `su`
/// itself among the contenders. Zero for an SU with no common channels, which
/// never contends.
pub fn collision_prob(
    su: usize,
    assignment: &ChannelAssignment,
    instance: &NetworkInstance,
    w: u32,
    cap: EnumerationCap,
) -> Result<f64> {
    if w < 2 {
        return Err(Error::InvalidArgument(format!("window {w} < 2")));
    }
    if assignment.common(su).is_empty() {
        return Ok(0.0);
    }
    let dist = contend_count_distribution(su, assignment, instance, cap)?;
    collision_from_distribution(&dist, w)
}

/// Smallest window per SU meeting a single target `epsilon`.
pub fn select_window(
    instance: &NetworkInstance,
    assignment: &ChannelAssignment,
    epsilon: f64,
    cap: EnumerationCap,
) -> Result<WindowResult> {
    select_window_with_targets(instance, assignment, &vec![epsilon; instance.num_sus()], cap)
}

/// Smallest window per SU meeting its own target; the global window is the maximum.
pub fn select_window_with_targets(
    instance: &NetworkInstance,
    assignment: &ChannelAssignment,
    targets: &[f64],
    cap: EnumerationCap,
) -> Result<WindowResult> {
    if targets.len() != instance.num_sus() {
        return Err(Error::InvalidArgument(format!(
            "{} collision targets for {} SUs",
            targets.len(),
            instance.num_sus()
        )));
    }
    let mut per_su_window = Vec::with_capacity(targets.len());
    let mut per_su_collision_prob = Vec::with_capacity(targets.len());
    for (su, &eps) in targets.iter().enumerate() {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidArgument(format!("collision target {eps} outside (0, 1)")));
        }
        let dist = if assignment.common(su).is_empty() {
            vec![1.0]
        } else {
            contend_count_distribution(su, assignment, instance, cap)?
        };
        let mut found = None;
        for w in 2..=WINDOW_SCAN_LIMIT {
            let pc = collision_from_distribution(&dist, w)?;
            if pc <= eps {
                found = Some((w, pc));
                break;
            }
        }
        let (w, pc) = found.ok_or(Error::WindowNotFound {
            su,
            epsilon: eps,
            limit: WINDOW_SCAN_LIMIT,
        })?;
        per_su_window.push(w);
        per_su_collision_prob.push(pc);
    }
    let global_window = per_su_window.iter().copied().max().unwrap_or(2);
    Ok(WindowResult {
        per_su_window,
        global_window,
        per_su_collision_prob,
        epsilon: targets.to_vec(),
    })
}

/// Fraction of a cycle spent on sensing, synchronization, average backoff and
/// the RTS/CTS handshake at window `w`.
pub fn overhead(w: u32, timing: &MacTiming) -> Result<f64> {
    if w < 2 {
        return Err(Error::InvalidArgument(format!("window {w} < 2")));
    }
    timing.validate()?;
    let delta = ((w - 1) as f64 * timing.theta_us / 2.0 + timing.fixed_overhead_us()) / timing.t_cycle_us;
    if delta >= 1.0 {
        return Err(Error::OverheadTooLarge(delta));
    }
    Ok(delta)
}
