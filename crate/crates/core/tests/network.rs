mod support;

use cogmesh_core::network::{availability, PuProfile, SuProfile};
use cogmesh_core::{parse_instance, serialize_instance, NetworkInstance};
use proptest::prelude::*;
use support::{random_instance, rng, Shape};

const SHAPE: Shape = Shape {
    max_sus: 8,
    max_pus: 5,
    max_channels: 8,
    max_pu_bits: 40,
};

fn rebuild(inst: &NetworkInstance, pus: Vec<PuProfile>, sus: Vec<SuProfile>) -> NetworkInstance {
    NetworkInstance::new(inst.num_channels(), pus, sus, inst.su_edges().to_vec()).unwrap()
}

proptest! {
    #[test]
    fn round_trip(seed in any::<u64>()) {
        let inst = random_instance(&mut rng(seed), &SHAPE);
        let text = serialize_instance(&inst);
        prop_assert_eq!(parse_instance(&text).unwrap(), inst);
    }

    #[test]
    fn availability_in_unit_interval_and_monotone(seed in any::<u64>(), bump in 0.0f64..=1.0) {
        let inst = random_instance(&mut rng(seed), &SHAPE);
        prop_assume!(inst.num_pus() > 0);
        let before = availability(&inst);
        let mut pus = inst.pus().to_vec();
        let (pu, c) = (seed as usize % inst.num_pus(), (seed >> 8) as usize % inst.num_channels());
        let raised = pus[pu].idle_prob[c] + bump * (1.0 - pus[pu].idle_prob[c]);
        pus[pu].idle_prob[c] = raised.min(1.0);
        let after = availability(&rebuild(&inst, pus, inst.sus().to_vec()));
        for su in 0..inst.num_sus() {
            for ch in 0..inst.num_channels() {
                prop_assert!((0.0..=1.0).contains(&before.get(su, ch)));
                prop_assert!(after.get(su, ch) >= before.get(su, ch));
            }
        }
    }

    #[test]
    fn availability_is_local(seed in any::<u64>(), value in 0.0f64..=1.0) {
        let inst = random_instance(&mut rng(seed), &SHAPE);
        prop_assume!(inst.num_pus() > 0);
        let pu = seed as usize % inst.num_pus();
        let mut pus = inst.pus().to_vec();
        for p in pus[pu].idle_prob.iter_mut() {
            *p = value;
        }
        let before = availability(&inst);
        let after = availability(&rebuild(&inst, pus, inst.sus().to_vec()));
        for su in 0..inst.num_sus() {
            if !inst.pu_neighbors(su).contains(&pu) {
                prop_assert_eq!(before.row(su), after.row(su));
            }
        }
        for su in (0..inst.num_sus()).filter(|&s| inst.pu_neighbors(s).is_empty()) {
            prop_assert!(before.row(su).iter().all(|&p| p == 1.0));
        }
    }
}
