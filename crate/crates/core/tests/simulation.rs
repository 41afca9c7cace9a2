mod support;

use cogmesh_core::network::availability;
use cogmesh_core::sim::{run_simulation, SimConfig, SimReport};
use cogmesh_core::solver::{algorithm1, algorithm2, nonoverlap_throughput};
use cogmesh_core::{EnumerationCap, MacConfig, MacTiming};
use support::{random_assignment, random_instance, rng, Shape};

const SHAPE: Shape = Shape {
    max_sus: 8,
    max_pus: 5,
    max_channels: 6,
    max_pu_bits: 30,
};

fn config(cycles: u64, seed: u64, window: u32, record_trace: bool) -> SimConfig {
    SimConfig {
        cycles,
        seed,
        window,
        timing: MacTiming::default(),
        record_trace,
    }
}

#[test]
fn identical_inputs_give_identical_reports() {
    let mut r = rng(11);
    let inst = random_instance(&mut r, &SHAPE);
    let a = random_assignment(&mut r, &inst);
    let run = |trace| run_simulation(&inst, &a, &config(5_000, 3, 16, trace)).unwrap();
    let first: SimReport = run(true);
    assert_eq!(first, run(true));
    let quiet = run(false);
    assert_eq!(quiet.per_su_throughput, first.per_su_throughput);
    assert_eq!(quiet.collisions, first.collisions);
    let other = run_simulation(&inst, &a, &config(5_000, 4, 16, false)).unwrap();
    assert_eq!(other.cycles_run, 5_000);
}

#[test]
fn no_conflicting_transmissions() {
    for seed in 0..15u64 {
        let mut r = rng(600 + seed);
        let inst = random_instance(&mut r, &SHAPE);
        let a = random_assignment(&mut r, &inst);
        let rep = run_simulation(&inst, &a, &config(2_000, seed, 8, true)).unwrap();
        for cycle in rep.trace.unwrap() {
            for su in 0..inst.num_sus() {
                if !cycle.transmitted[su] {
                    continue;
                }
                let c = cycle.su_choice[su].expect("a transmitter chose a channel");
                assert!(a.total(su).contains(c));
                assert!(inst.pu_neighbors(su).iter().all(|&pu| !cycle.pu_busy[pu][c]));
                for &k in inst.neighbors(su) {
                    assert!(
                        !(cycle.transmitted[k] && cycle.su_choice[k] == Some(c)),
                        "cycle {}",
                        cycle.cycle
                    );
                }
            }
            for (p, t) in rep.per_su_throughput.iter().zip(&cycle.transmitted) {
                assert!((0.0..=1.0).contains(p) || !t);
            }
        }
    }
}

#[test]
fn non_overlapping_converges_to_closed_form() {
    let cycles = 100_000u64;
    for seed in 0..10u64 {
        let inst = random_instance(&mut rng(700 + seed), &SHAPE);
        let out = algorithm1(&inst);
        let rep = run_simulation(&inst, &out.assignment, &config(cycles, seed, 2, false)).unwrap();
        let avail = availability(&inst);
        for su in 0..inst.num_sus() {
            let p = nonoverlap_throughput(out.assignment.separate(su), avail.row(su));
            let se = (p * (1.0 - p) / cycles as f64).sqrt();
            let got = rep.per_su_throughput[su];
            assert!((got - p).abs() <= 3.0 * se + 1e-12, "seed {seed} su {su}: {got} vs {p}");
        }
    }
}

#[test]
fn overlapping_assignment_tracks_the_model() {
    let mac = MacConfig::default();
    let cap = EnumerationCap::default();
    let mut close = 0;
    let mut total = 0;
    for seed in 0..8u64 {
        let inst = random_instance(
            &mut rng(800 + seed),
            &Shape {
                max_sus: 6,
                max_pus: 3,
                max_channels: 3,
                max_pu_bits: 9,
            },
        );
        let out = algorithm2(&inst, &mac, cap).unwrap();
        let rep = run_simulation(
            &inst,
            &out.assignment,
            &config(50_000, seed, out.window.unwrap(), false),
        )
        .unwrap();
        for su in 0..inst.num_sus() {
            total += 1;
            if (rep.per_su_throughput[su] - out.per_su_throughput[su]).abs() <= 0.05 {
                close += 1;
            }
        }
    }
    assert!(close as f64 >= 0.95 * total as f64, "{close} of {total}");
}
