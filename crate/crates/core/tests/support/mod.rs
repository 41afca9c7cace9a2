//! Random instances and a brute-force throughput oracle shared by test targets.
#![allow(dead_code)]

use cogmesh_core::network::{PuProfile, SuProfile};
use cogmesh_core::{ChannelAssignment, ChannelSet, NetworkInstance};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct Shape {
    pub max_sus: usize,
    pub max_pus: usize,
    pub max_channels: usize,
    /// Upper bound on `pus * channels`.
    pub max_pu_bits: usize,
}

fn idle_prob(rng: &mut ChaCha8Rng) -> f64 {
    match rng.gen_range(0..10) {
        0 => 0.0,
        1 => 1.0,
        _ => (rng.gen_range(5..=95) as f64) / 100.0,
    }
}

pub fn random_instance(rng: &mut ChaCha8Rng, shape: &Shape) -> NetworkInstance {
    let n = rng.gen_range(1..=shape.max_channels);
    let max_pus = shape.max_pus.min(shape.max_pu_bits / n);
    let np = rng.gen_range(0..=max_pus);
    let ns = rng.gen_range(1..=shape.max_sus);
    let pus = (0..np)
        .map(|id| PuProfile {
            id,
            idle_prob: (0..n).map(|_| idle_prob(rng)).collect(),
        })
        .collect();
    let sus = (0..ns)
        .map(|id| {
            let mut pu_neighbors: Vec<usize> = (0..np).filter(|_| rng.gen_bool(0.5)).collect();
            pu_neighbors.shuffle(rng);
            SuProfile { id, pu_neighbors }
        })
        .collect();
    let density = rng.gen_range(0.2..0.9);
    let mut edges = Vec::new();
    for a in 0..ns {
        for b in a + 1..ns {
            if rng.gen_bool(density) {
                edges.push((a, b));
            }
        }
    }
    NetworkInstance::new(n, pus, sus, edges).expect("generated instance is valid")
}

/// Random (possibly overlapping) per-SU channel sets, classified.
pub fn random_assignment(rng: &mut ChaCha8Rng, instance: &NetworkInstance) -> ChannelAssignment {
    let n = instance.num_channels();
    let full = ChannelSet::full(n).bits();
    let totals: Vec<ChannelSet> = (0..instance.num_sus())
        .map(|_| ChannelSet::from_bits(rng.gen::<u64>() & full))
        .collect();
    ChannelAssignment::classify(instance, &totals)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Throughput of `su` by listing every joint PU state and every combination
/// of neighbor channel picks.
pub fn naive_throughput(instance: &NetworkInstance, assignment: &ChannelAssignment, su: usize, delta: f64) -> f64 {
    let (np, nc) = (instance.num_pus(), instance.num_channels());
    let bits = np * nc;
    let mut total = 0.0;
    for state in 0u64..(1u64 << bits) {
        let busy = |pu: usize, c: usize| state >> (pu * nc + c) & 1 == 1;
        let mut prob = 1.0;
        for pu in 0..np {
            for c in 0..nc {
                let idle = instance.idle_prob(pu, c);
                prob *= if busy(pu, c) { 1.0 - idle } else { idle };
            }
        }
        if prob == 0.0 {
            continue;
        }
        let free = |k: usize, c: usize| instance.pu_neighbors(k).iter().all(|&pu| !busy(pu, c));
        if assignment.separate(su).iter().any(|c| free(su, c)) {
            total += prob;
            continue;
        }
        let mine: Vec<usize> = assignment.common(su).iter().filter(|&c| free(su, c)).collect();
        for &j in &mine {
            // Options of each neighbor that shares j: None, or one of its free common channels.
            let mut options: Vec<Vec<Option<usize>>> = Vec::new();
            for &k in instance.neighbors(su) {
                if !assignment.common(k).contains(j) {
                    continue;
                }
                let theirs: Vec<usize> = assignment.common(k).iter().filter(|&c| free(k, c)).collect();
                if assignment.separate(k).iter().any(|c| free(k, c)) || theirs.is_empty() {
                    options.push(vec![None]);
                } else {
                    options.push(theirs.into_iter().map(Some).collect());
                }
            }
            let mut share = 0.0;
            let mut idx = vec![0usize; options.len()];
            loop {
                let mut weight = 1.0;
                let mut rivals = 0;
                for (o, &x) in options.iter().zip(&idx) {
                    weight /= o.len() as f64;
                    if o[x] == Some(j) {
                        rivals += 1;
                    }
                }
                share += weight / (1.0 + rivals as f64);
                let mut pos = 0;
                while pos < idx.len() {
                    idx[pos] += 1;
                    if idx[pos] < options[pos].len() {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
                if pos == idx.len() {
                    break;
                }
            }
            total += prob * (1.0 - delta) * share / mine.len() as f64;
        }
    }
    total
}
