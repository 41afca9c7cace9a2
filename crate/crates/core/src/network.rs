//! Network instances: primary users, secondary users, the SU contention graph
//! and per-channel availability.
//!
//! Instance files are JSON documents with exactly four top-level keys:
//!
//! ```json
//! {
//!   "num_channels": 2,
//!   "pus": [{ "id": 0, "idle_prob": [0.8, 0.6] }],
//!   "sus": [{ "id": 0, "pu_neighbors": [0] }, { "id": 1, "pu_neighbors": [] }],
//!   "su_edges": [[0, 1]]
//! }
//! ```
//!
//! All indices are 0-based and `id` must equal the entry's position.

use std::collections::BTreeSet;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::assignment::ChannelAssignment;
use crate::channel_set::MAX_CHANNELS;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PuProfile {
    pub id: usize,
    /// Probability that this PU is silent on each channel.
    pub idle_prob: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuProfile {
    pub id: usize,
    /// PUs whose activity on a channel forbids this SU from using it. Sorted.
    pub pu_neighbors: Vec<usize>,
}

/// A validated network. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkInstance {
    num_channels: usize,
    pus: Vec<PuProfile>,
    sus: Vec<SuProfile>,
    /// Normalized `(a, b)` with `a < b`, sorted.
    su_edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

#[derive(Serialize)]
struct InstanceFile<'a> {
    num_channels: usize,
    pus: &'a [PuProfile],
    sus: &'a [SuProfile],
    su_edges: Vec<[usize; 2]>,
}

impl NetworkInstance {
    /// Builds an instance, checking every invariant.
    pub fn new(
        num_channels: usize,
        pus: Vec<PuProfile>,
        sus: Vec<SuProfile>,
        su_edges: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if num_channels == 0 {
            return Err(Error::validation("num_channels", "must be at least 1"));
        }
        if num_channels > MAX_CHANNELS {
            return Err(Error::validation(
                "num_channels",
                format!("at most {MAX_CHANNELS} channels are supported"),
            ));
        }
        for (pos, pu) in pus.iter().enumerate() {
            if pu.id != pos {
                return Err(Error::validation(
                    format!("pus[{pos}].id"),
                    format!("expected {pos}, found {}", pu.id),
                ));
            }
            if pu.idle_prob.len() != num_channels {
                return Err(Error::validation(
                    format!("pus[{pos}].idle_prob"),
                    format!(
                        "length {} does not match num_channels {num_channels}",
                        pu.idle_prob.len()
                    ),
                ));
            }
            for (c, &p) in pu.idle_prob.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::validation(
                        format!("pus[{pos}].idle_prob[{c}]"),
                        format!("{p} is not a probability in [0, 1]"),
                    ));
                }
            }
        }
        let mut sus = sus;
        for (pos, su) in sus.iter_mut().enumerate() {
            if su.id != pos {
                return Err(Error::validation(
                    format!("sus[{pos}].id"),
                    format!("expected {pos}, found {}", su.id),
                ));
            }
            let mut seen = BTreeSet::new();
            for &p in &su.pu_neighbors {
                if p >= pus.len() {
                    return Err(Error::validation(
                        format!("sus[{pos}].pu_neighbors"),
                        format!("dangling PU index {p} (have {} PUs)", pus.len()),
                    ));
                }
                if !seen.insert(p) {
                    return Err(Error::validation(
                        format!("sus[{pos}].pu_neighbors"),
                        format!("duplicate PU index {p}"),
                    ));
                }
            }
            su.pu_neighbors = seen.into_iter().collect();
        }
        let mut edges = BTreeSet::new();
        for &(a, b) in &su_edges {
            if a >= sus.len() || b >= sus.len() {
                return Err(Error::validation(
                    "su_edges",
                    format!("dangling SU index in edge ({a}, {b})"),
                ));
            }
            if a == b {
                return Err(Error::validation("su_edges", format!("self-loop ({a}, {b})")));
            }
            if !edges.insert((a.min(b), a.max(b))) {
                return Err(Error::validation("su_edges", format!("duplicate edge ({a}, {b})")));
            }
        }
        let su_edges: Vec<_> = edges.into_iter().collect();
        let mut adjacency = vec![Vec::new(); sus.len()];
        for &(a, b) in &su_edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(NetworkInstance {
            num_channels,
            pus,
            sus,
            su_edges,
            adjacency,
        })
    }

    pub fn num_channels(&self) -> usize {
        self.num_channels
    }

    pub fn num_sus(&self) -> usize {
        self.sus.len()
    }

    pub fn num_pus(&self) -> usize {
        self.pus.len()
    }

    pub fn pus(&self) -> &[PuProfile] {
        &self.pus
    }

    pub fn sus(&self) -> &[SuProfile] {
        &self.sus
    }

    pub fn su_edges(&self) -> &[(usize, usize)] {
        &self.su_edges
    }

    pub fn idle_prob(&self, pu: usize, channel: usize) -> f64 {
        self.pus[pu].idle_prob[channel]
    }

    pub fn pu_neighbors(&self, su: usize) -> &[usize] {
        &self.sus[su].pu_neighbors
    }

    /// Neighbors of `su` in the contention graph, ascending. Panics on a bad index.
    pub fn neighbors(&self, su: usize) -> &[usize] {
        &self.adjacency[su]
    }

    pub fn are_neighbors(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Same graph with every idle probability set to `p`.
    pub fn with_homogeneous_idle_prob(&self, p: f64) -> Result<Self> {
        let pus = self
            .pus
            .iter()
            .map(|pu| PuProfile {
                id: pu.id,
                idle_prob: vec![p; self.num_channels],
            })
            .collect();
        NetworkInstance::new(self.num_channels, pus, self.sus.clone(), self.su_edges.clone())
    }

    /// Same graph with `n` channels. Each PU's idle-probability vector is
    /// truncated, or extended by repeating it cyclically.
    pub fn with_num_channels(&self, n: usize) -> Result<Self> {
        let pus = self
            .pus
            .iter()
            .map(|pu| PuProfile {
                id: pu.id,
                idle_prob: (0..n).map(|c| pu.idle_prob[c % self.num_channels]).collect(),
            })
            .collect();
        NetworkInstance::new(n, pus, self.sus.clone(), self.su_edges.clone())
    }
}

/// Per-SU, per-channel probability that the channel is free of every
/// conflicting PU.
#[derive(Debug, Clone, PartialEq)]
pub struct AvailabilityMatrix {
    rows: Vec<Vec<f64>>,
}

impl AvailabilityMatrix {
    pub fn get(&self, su: usize, channel: usize) -> f64 {
        self.rows[su][channel]
    }

    pub fn row(&self, su: usize) -> &[f64] {
        &self.rows[su]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// Product of idle probabilities over each SU's PU neighbors.
pub fn availability(instance: &NetworkInstance) -> AvailabilityMatrix {
    let rows = instance
        .sus
        .iter()
        .map(|su| {
            (0..instance.num_channels)
                .map(|c| su.pu_neighbors.iter().map(|&p| instance.pus[p].idle_prob[c]).product())
                .collect()
        })
        .collect();
    AvailabilityMatrix { rows }
}

pub fn su_neighbors(instance: &NetworkInstance, su: usize) -> Result<BTreeSet<usize>> {
    if su >= instance.num_sus() {
        return Err(Error::IndexOutOfRange {
            what: "SU",
            index: su,
            len: instance.num_sus(),
        });
    }
    Ok(instance.neighbors(su).iter().copied().collect())
}

/// PUs adjacent to `su` or to any neighbor that shares `channel` with it.
pub fn pu_neighbors_of_channel_sharers(
    instance: &NetworkInstance,
    assignment: &ChannelAssignment,
    su: usize,
    channel: usize,
) -> Result<BTreeSet<usize>> {
    if su >= instance.num_sus() {
        return Err(Error::IndexOutOfRange {
            what: "SU",
            index: su,
            len: instance.num_sus(),
        });
    }
    if !assignment.common(su).contains(channel) {
        return Err(Error::ChannelNotShared { su, channel });
    }
    let mut out: BTreeSet<usize> = instance.pu_neighbors(su).iter().copied().collect();
    for &k in instance.neighbors(su) {
        if assignment.total(k).contains(channel) {
            out.extend(instance.pu_neighbors(k).iter().copied());
        }
    }
    Ok(out)
}

fn take_usize(v: &Value, field: &str) -> Result<usize> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| Error::validation(field, format!("expected a nonnegative integer, found {v}")))
}

fn take_array<'a>(v: &'a Value, field: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::validation(field, format!("expected an array, found {v}")))
}

fn take_object<'a>(v: &'a Value, field: &str, keys: &[&str]) -> Result<&'a Map<String, Value>> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::validation(field, "expected an object"))?;
    for k in obj.keys() {
        if !keys.contains(&k.as_str()) {
            return Err(Error::validation(format!("{field}.{k}"), "unknown key"));
        }
    }
    for k in keys {
        if !obj.contains_key(*k) {
            return Err(Error::validation(format!("{field}.{k}"), "missing key"));
        }
    }
    Ok(obj)
}

/// Parses and validates an instance file.
pub fn parse_instance(text: &str) -> Result<NetworkInstance> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::Syntax(e.to_string()))?;
    let obj = take_object(&root, "instance", &["num_channels", "pus", "sus", "su_edges"])?;
    let num_channels = take_usize(&obj["num_channels"], "num_channels")?;

    let mut pus = Vec::new();
    for (pos, v) in take_array(&obj["pus"], "pus")?.iter().enumerate() {
        let field = format!("pus[{pos}]");
        let pu = take_object(v, &field, &["id", "idle_prob"])?;
        let id = take_usize(&pu["id"], &format!("{field}.id"))?;
        let idle_field = format!("{field}.idle_prob");
        let idle_prob = take_array(&pu["idle_prob"], &idle_field)?
            .iter()
            .map(|x| {
                x.as_f64()
                    .ok_or_else(|| Error::validation(&idle_field, format!("expected a number, found {x}")))
            })
            .collect::<Result<Vec<_>>>()?;
        pus.push(PuProfile { id, idle_prob });
    }

    let mut sus = Vec::new();
    for (pos, v) in take_array(&obj["sus"], "sus")?.iter().enumerate() {
        let field = format!("sus[{pos}]");
        let su = take_object(v, &field, &["id", "pu_neighbors"])?;
        let id = take_usize(&su["id"], &format!("{field}.id"))?;
        let nb_field = format!("{field}.pu_neighbors");
        let pu_neighbors = take_array(&su["pu_neighbors"], &nb_field)?
            .iter()
            .map(|x| take_usize(x, &nb_field))
            .collect::<Result<Vec<_>>>()?;
        sus.push(SuProfile { id, pu_neighbors });
    }

    let mut edges = Vec::new();
    for (pos, v) in take_array(&obj["su_edges"], "su_edges")?.iter().enumerate() {
        let field = format!("su_edges[{pos}]");
        let pair = take_array(v, &field)?;
        if pair.len() != 2 {
            return Err(Error::validation(field, "edge must have exactly two endpoints"));
        }
        edges.push((take_usize(&pair[0], &field)?, take_usize(&pair[1], &field)?));
    }

    NetworkInstance::new(num_channels, pus, sus, edges)
}

pub fn serialize_instance(instance: &NetworkInstance) -> String {
    let file = InstanceFile {
        num_channels: instance.num_channels,
        pus: &instance.pus,
        sus: &instance.sus,
        su_edges: instance.su_edges.iter().map(|&(a, b)| [a, b]).collect(),
    };
    serde_json::to_string_pretty(&file).expect("instance serializes")
}
