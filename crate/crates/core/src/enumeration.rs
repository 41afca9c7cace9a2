//! Exact enumeration over PU activity.
//!
//! PU activity is independent across (PU, channel) pairs, so channels are
//! independent of each other. On one channel, the availability seen by a set
//! of SUs is a bitmask whose distribution comes from enumerating only the PUs
//! adjacent to those SUs with idle probability strictly inside (0, 1); the
//! remaining pairs are deterministic and folded in directly. Consumers then run
//! a dynamic program over channels whose state is whatever statistic they need.
//!
//! All maps are ordered so summation order, and therefore every result, is
//! bit-stable across runs.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::network::NetworkInstance;

/// Default bound on enumerated states: 2^24.
pub const DEFAULT_STATE_CAP: u64 = 1 << 24;

/// Upper bound on the number of weighted states a single enumeration may touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationCap {
    pub max_states: u64,
}

impl Default for EnumerationCap {
    fn default() -> Self {
        EnumerationCap {
            max_states: DEFAULT_STATE_CAP,
        }
    }
}

impl EnumerationCap {
    pub fn check(&self, states: u128) -> Result<()> {
        if states > self.max_states as u128 {
            Err(Error::ScopeTooLarge {
                states,
                cap: self.max_states,
            })
        } else {
            Ok(())
        }
    }
}

/// Distribution of the availability mask over `sus` on `channel`: bit `t` is
/// set when `sus[t]` sees the channel free. Entries are sorted by mask and
/// carry positive probability.
pub fn channel_patterns(
    instance: &NetworkInstance,
    sus: &[usize],
    channel: usize,
    cap: EnumerationCap,
) -> Result<Vec<(u64, f64)>> {
    assert!(sus.len() <= 64, "at most 64 SUs per scope");
    let mut base = if sus.len() == 64 {
        u64::MAX
    } else {
        (1u64 << sus.len()) - 1
    };
    // (idle probability, SUs blocked while the PU is active)
    let mut uncertain: BTreeMap<usize, u64> = BTreeMap::new();
    for (t, &su) in sus.iter().enumerate() {
        for &pu in instance.pu_neighbors(su) {
            let p = instance.idle_prob(pu, channel);
            if p <= 0.0 {
                base &= !(1u64 << t);
            } else if p < 1.0 {
                *uncertain.entry(pu).or_insert(0) |= 1u64 << t;
            }
        }
    }
    let pus: Vec<(f64, u64)> = uncertain
        .into_iter()
        .map(|(pu, blocks)| (instance.idle_prob(pu, channel), blocks))
        .collect();
    if pus.len() >= 64 {
        return Err(Error::ScopeTooLarge {
            states: u128::MAX,
            cap: cap.max_states,
        });
    }
    cap.check(1u128 << pus.len())?;

    let mut dist: BTreeMap<u64, f64> = BTreeMap::new();
    for state in 0u64..(1u64 << pus.len()) {
        let mut mask = base;
        let mut prob = 1.0;
        for (b, &(idle, blocks)) in pus.iter().enumerate() {
            if state >> b & 1 == 1 {
                prob *= 1.0 - idle;
                mask &= !blocks;
            } else {
                prob *= idle;
            }
        }
        *dist.entry(mask).or_insert(0.0) += prob;
    }
    Ok(dist.into_iter().filter(|&(_, p)| p > 0.0).collect())
}

/// Runs a dynamic program over `channels`. `step` maps a state and the
/// availability mask seen on one channel to the successor state, or `None`
/// when the branch contributes nothing and can be dropped.
pub fn fold_channels<S, I, F>(
    instance: &NetworkInstance,
    sus: &[usize],
    channels: I,
    init: S,
    cap: EnumerationCap,
    mut step: F,
) -> Result<BTreeMap<S, f64>>
where
    S: Ord + Clone,
    I: IntoIterator<Item = usize>,
    F: FnMut(&S, usize, u64) -> Option<S>,
{
    let mut states = BTreeMap::new();
    states.insert(init, 1.0);
    for c in channels {
        let patterns = channel_patterns(instance, sus, c, cap)?;
        cap.check(states.len() as u128 * patterns.len() as u128)?;
        let mut next: BTreeMap<S, f64> = BTreeMap::new();
        for (state, &p) in &states {
            for &(mask, q) in &patterns {
                if let Some(s) = step(state, c, mask) {
                    *next.entry(s).or_insert(0.0) += p * q;
                }
            }
        }
        states = next;
    }
    Ok(states)
}

/// One joint realization of PU activity on every channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PuStateOutcome {
    /// `busy[pu][channel]`
    pub busy: Vec<Vec<bool>>,
    pub probability: f64,
}

impl PuStateOutcome {
    /// Whether `su` may transmit on `channel` under this realization.
    pub fn available(&self, instance: &NetworkInstance, su: usize, channel: usize) -> bool {
        instance.pu_neighbors(su).iter().all(|&pu| !self.busy[pu][channel])
    }
}

/// Every one of the `2^(M_p * N)` joint PU states with its probability.
pub fn enumerate_pu_states(instance: &NetworkInstance, cap: EnumerationCap) -> Result<Vec<PuStateOutcome>> {
    let (np, nc) = (instance.num_pus(), instance.num_channels());
    let bits = np * nc;
    if bits >= 64 {
        return Err(Error::ScopeTooLarge {
            states: u128::MAX,
            cap: cap.max_states,
        });
    }
    cap.check(1u128 << bits)?;
    let mut out = Vec::with_capacity(1 << bits);
    for state in 0u64..(1u64 << bits) {
        let mut busy = vec![vec![false; nc]; np];
        let mut probability = 1.0;
        for (pu, row) in busy.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                let idle = instance.idle_prob(pu, c);
                if state >> (pu * nc + c) & 1 == 1 {
                    *cell = true;
                    probability *= 1.0 - idle;
                } else {
                    probability *= idle;
                }
            }
        }
        out.push(PuStateOutcome { busy, probability });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{PuProfile, SuProfile};

    fn two_su_three_pu() -> NetworkInstance {
        NetworkInstance::new(
            2,
            vec![
                PuProfile {
                    id: 0,
                    idle_prob: vec![0.6, 0.0],
                },
                PuProfile {
                    id: 1,
                    idle_prob: vec![0.7, 1.0],
                },
                PuProfile {
                    id: 2,
                    idle_prob: vec![0.9, 0.5],
                },
            ],
            vec![
                SuProfile {
                    id: 0,
                    pu_neighbors: vec![0, 1],
                },
                SuProfile {
                    id: 1,
                    pu_neighbors: vec![1, 2],
                },
            ],
            vec![(0, 1)],
        )
        .unwrap()
    }

    #[test]
    fn patterns_match_marginals() {
        let inst = two_su_three_pu();
        let pats = channel_patterns(&inst, &[0, 1], 0, EnumerationCap::default()).unwrap();
        let total: f64 = pats.iter().map(|p| p.1).sum();
        assert!((total - 1.0).abs() < 1e-15);
        let marginal = |bit: u64| -> f64 { pats.iter().filter(|p| p.0 & bit != 0).map(|p| p.1).sum() };
        assert!((marginal(1) - 0.42).abs() < 1e-15);
        assert!((marginal(2) - 0.63).abs() < 1e-15);
        let both: f64 = pats.iter().filter(|p| p.0 == 3).map(|p| p.1).sum();
        assert!((both - 0.6 * 0.7 * 0.9).abs() < 1e-15);
    }

    #[test]
    fn deterministic_pus_are_folded() {
        let inst = two_su_three_pu();
        // Channel 1: PU0 always busy, PU1 always idle, PU2 coin flip.
        let pats = channel_patterns(&inst, &[0, 1], 1, EnumerationCap::default()).unwrap();
        assert_eq!(pats, vec![(0, 0.5), (2, 0.5)]);
        let tiny = EnumerationCap { max_states: 1 };
        assert!(channel_patterns(&inst, &[0, 1], 1, tiny).is_err());
    }

    #[test]
    fn full_enumeration_sums_to_one() {
        let inst = two_su_three_pu();
        let states = enumerate_pu_states(&inst, EnumerationCap::default()).unwrap();
        assert_eq!(states.len(), 64);
        let total: f64 = states.iter().map(|s| s.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
