use crate::channel_set::ChannelSet;
use crate::error::{Error, Result};
use crate::network::NetworkInstance;

/// Per-SU separate set (channels no neighbor uses) and common set (channels
/// shared with at least one neighbor).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChannelAssignment {
    separate: Vec<ChannelSet>,
    common: Vec<ChannelSet>,
}

impl ChannelAssignment {
    /// Builds an assignment without checking it; see [`ChannelAssignment::validate`].
    pub fn new(separate: Vec<ChannelSet>, common: Vec<ChannelSet>) -> Self {
        assert_eq!(separate.len(), common.len(), "one separate and one common set per SU");
        ChannelAssignment { separate, common }
    }

    pub fn empty(num_sus: usize) -> Self {
        ChannelAssignment::new(vec![ChannelSet::EMPTY; num_sus], vec![ChannelSet::EMPTY; num_sus])
    }

    /// Splits each SU's total set into separate and common parts: a channel is
    /// common iff some neighbor's total set also holds it.
    pub fn classify(instance: &NetworkInstance, totals: &[ChannelSet]) -> Self {
        assert_eq!(totals.len(), instance.num_sus());
        let mut separate = Vec::with_capacity(totals.len());
        let mut common = Vec::with_capacity(totals.len());
        for (i, &tot) in totals.iter().enumerate() {
            let around = instance
                .neighbors(i)
                .iter()
                .fold(ChannelSet::EMPTY, |acc, &k| acc.union(totals[k]));
            common.push(tot.intersection(around));
            separate.push(tot.difference(around));
        }
        ChannelAssignment { separate, common }
    }

    pub fn num_sus(&self) -> usize {
        self.separate.len()
    }

    pub fn separate(&self, su: usize) -> ChannelSet {
        self.separate[su]
    }

    pub fn common(&self, su: usize) -> ChannelSet {
        self.common[su]
    }

    pub fn total(&self, su: usize) -> ChannelSet {
        self.separate[su].union(self.common[su])
    }

    pub fn totals(&self) -> Vec<ChannelSet> {
        (0..self.num_sus()).map(|i| self.total(i)).collect()
    }

    pub fn is_non_overlapping(&self) -> bool {
        self.common.iter().all(|c| c.is_empty())
    }

    pub(crate) fn separate_mut(&mut self, su: usize) -> &mut ChannelSet {
        &mut self.separate[su]
    }

    /// Shares `channel` with `su`: it joins `su`'s common set and every
    /// neighbor holding it in a separate set reclassifies it as common.
    pub fn share(&mut self, instance: &NetworkInstance, su: usize, channel: usize) -> Result<()> {
        if self.total(su).contains(channel) {
            return Err(Error::AlreadyAssigned { channel });
        }
        let mut shared = false;
        for &k in instance.neighbors(su) {
            if self.separate[k].remove(channel) {
                self.common[k].insert(channel);
                shared = true;
            } else if self.common[k].contains(channel) {
                shared = true;
            }
        }
        if shared {
            self.common[su].insert(channel);
        } else {
            self.separate[su].insert(channel);
        }
        Ok(())
    }

    /// Checks every structural invariant against `instance`.
    pub fn validate(&self, instance: &NetworkInstance) -> Result<()> {
        let n = instance.num_sus();
        if self.num_sus() != n {
            return Err(Error::validation(
                "assignment",
                format!("has {} SUs, instance has {n}", self.num_sus()),
            ));
        }
        let all = ChannelSet::full(instance.num_channels());
        for i in 0..n {
            let (sep, com) = (self.separate[i], self.common[i]);
            if !sep.union(com).difference(all).is_empty() {
                return Err(Error::validation(
                    format!("assignment[{i}]"),
                    "channel index out of range",
                ));
            }
            if !sep.is_disjoint(com) {
                return Err(Error::validation(
                    format!("assignment[{i}]"),
                    "separate and common sets overlap",
                ));
            }
            let mut neighbor_common = ChannelSet::EMPTY;
            for &k in instance.neighbors(i) {
                if !sep.is_disjoint(self.total(k)) {
                    return Err(Error::validation(
                        format!("assignment[{i}].separate"),
                        format!("channel also used by neighbor {k}"),
                    ));
                }
                neighbor_common = neighbor_common.union(self.common[k]);
            }
            if !com.difference(neighbor_common).is_empty() {
                return Err(Error::validation(
                    format!("assignment[{i}].common"),
                    "channel shared with no neighbor",
                ));
            }
        }
        Ok(())
    }
}
