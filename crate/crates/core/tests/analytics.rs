mod support;

use cogmesh_core::analytics::{case1_throughput, case2_throughput_exact, group_census, total_throughput};
use cogmesh_core::enumeration::enumerate_pu_states;
use cogmesh_core::network::availability;
use cogmesh_core::solver::nonoverlap_throughput;
use cogmesh_core::{ChannelAssignment, ChannelSet, EnumerationCap};
use proptest::prelude::*;
use rand::Rng;
use support::{naive_throughput, random_assignment, random_instance, rng, Shape};

const SMALL: Shape = Shape {
    max_sus: 5,
    max_pus: 4,
    max_channels: 4,
    max_pu_bits: 16,
};

#[test]
fn factored_model_matches_full_enumeration() {
    let cap = EnumerationCap::default();
    let mut checked = 0;
    for seed in 0..150u64 {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, &SMALL);
        let a = random_assignment(&mut r, &inst);
        let delta = [0.0, 0.164, 0.5][seed as usize % 3];
        let avail = availability(&inst);
        for su in 0..inst.num_sus() {
            let fast = total_throughput(su, &a, &inst, &avail, delta, cap).unwrap();
            let slow = naive_throughput(&inst, &a, su, delta);
            assert!((fast - slow).abs() <= 1e-12, "seed {seed} su {su}: {fast} vs {slow}");
            checked += 1;
        }
    }
    assert!(checked >= 150);
}

#[test]
fn non_overlapping_matches_closed_form() {
    let cap = EnumerationCap::default();
    for seed in 0..200u64 {
        let mut r = rng(1000 + seed);
        let inst = random_instance(&mut r, &SMALL);
        // Drop every channel a lower-indexed neighbor already holds.
        let mut totals = vec![ChannelSet::EMPTY; inst.num_sus()];
        for i in 0..inst.num_sus() {
            let mut mine = ChannelSet::from_bits(r.gen::<u64>() & ChannelSet::full(inst.num_channels()).bits());
            for &k in inst.neighbors(i) {
                mine = mine.difference(totals[k]);
            }
            totals[i] = mine;
        }
        let a = ChannelAssignment::classify(&inst, &totals);
        assert!(a.is_non_overlapping());
        let avail = availability(&inst);
        for su in 0..inst.num_sus() {
            assert_eq!(case2_throughput_exact(su, &a, &inst, 0.2, cap).unwrap(), 0.0);
            let t = total_throughput(su, &a, &inst, &avail, 0.2, cap).unwrap();
            assert!((t - nonoverlap_throughput(a.separate(su), avail.row(su))).abs() <= 1e-12);
        }
    }
}

#[test]
fn pu_state_probabilities_sum_to_one() {
    for seed in 0..30u64 {
        let mut r = rng(2000 + seed);
        let inst = random_instance(&mut r, &SMALL);
        let states = enumerate_pu_states(&inst, EnumerationCap::default()).unwrap();
        assert_eq!(states.len(), 1 << (inst.num_pus() * inst.num_channels()));
        let sum: f64 = states.iter().map(|s| s.probability).sum();
        assert!((sum - 1.0).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn throughput_bounded_and_monotone_in_overhead(seed in any::<u64>(), d1 in 0.0f64..=1.0, d2 in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, &SMALL);
        let a = random_assignment(&mut r, &inst);
        let avail = availability(&inst);
        let cap = EnumerationCap::default();
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        for su in 0..inst.num_sus() {
            let at_lo = total_throughput(su, &a, &inst, &avail, lo, cap).unwrap();
            let at_hi = total_throughput(su, &a, &inst, &avail, hi, cap).unwrap();
            prop_assert!((0.0..=1.0).contains(&at_lo) && (0.0..=1.0).contains(&at_hi));
            prop_assert!(at_hi <= at_lo);
            prop_assert_eq!(case2_throughput_exact(su, &a, &inst, 1.0, cap).unwrap(), 0.0);
        }
    }

    #[test]
    fn dropping_common_channels_leaves_case1(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, &SMALL);
        let a = random_assignment(&mut r, &inst);
        let stripped = ChannelAssignment::new(
            (0..inst.num_sus()).map(|i| a.separate(i)).collect(),
            vec![ChannelSet::EMPTY; inst.num_sus()],
        );
        let avail = availability(&inst);
        for su in 0..inst.num_sus() {
            let t = total_throughput(su, &stripped, &inst, &avail, 0.1, EnumerationCap::default()).unwrap();
            prop_assert_eq!(t, case1_throughput(su, &a, &avail));
        }
    }

    #[test]
    fn census_is_a_partition(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, &Shape { max_pu_bits: 12, ..SMALL });
        let a = random_assignment(&mut r, &inst);
        let states = enumerate_pu_states(&inst, EnumerationCap::default()).unwrap();
        for state in states.iter().take(64) {
            // Each SU follows the protocol: separate channel first, else a random free common one.
            let picks: Vec<Option<usize>> = (0..inst.num_sus())
                .map(|k| {
                    if a.separate(k).iter().any(|c| state.available(&inst, k, c)) {
                        return None;
                    }
                    let free: Vec<usize> = a.common(k).iter().filter(|&c| state.available(&inst, k, c)).collect();
                    (!free.is_empty()).then(|| free[r.gen_range(0..free.len())])
                })
                .collect();
            for su in 0..inst.num_sus() {
                for j in a.common(su) {
                    let census = group_census(state, &picks, su, j, &a, &inst).unwrap();
                    let sharers = inst.neighbors(su).iter().filter(|&&k| a.common(k).contains(j)).count();
                    prop_assert_eq!(census.total(), sharers);
                }
            }
        }
    }
}
