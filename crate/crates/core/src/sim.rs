//! Cycle-based simulation of the synchronized multichannel MAC.
//!
//! Every cycle: PU activity is drawn per (PU, channel); each SU senses its
//! assigned channels; an SU with a free separate channel transmits on one of
//! them at random without contention; otherwise an SU with a free common
//! channel picks one at random, draws a backoff on `[0, W-1]` and contends on
//! the control channel against its contention-graph neighbors.
//!
//! Randomness comes from ChaCha8 streams keyed by `(seed, PU or SU)` with the
//! cycle number as the stream id, so each SU's draws in a cycle do not depend
//! on anything else the simulator does.

use std::io::{self, Write};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::assignment::ChannelAssignment;
use crate::error::{Error, Result};
use crate::mac::{overhead, MacTiming};
use crate::network::NetworkInstance;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub cycles: u64,
    pub seed: u64,
    pub window: u32,
    pub timing: MacTiming,
    pub record_trace: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SuOutcome {
    /// No channels assigned.
    Idle,
    SeparateTx,
    Win,
    Quit,
    Collide,
    /// Every assigned channel busy.
    NoChannel,
}

impl SuOutcome {
    pub fn label(self) -> &'static str {
        match self {
            SuOutcome::Idle => "IDLE",
            SuOutcome::SeparateTx => "SEPARATE_TX",
            SuOutcome::Win => "WIN",
            SuOutcome::Quit => "QUIT",
            SuOutcome::Collide => "COLLIDE",
            SuOutcome::NoChannel => "NO_CHANNEL",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleOutcome {
    pub cycle: u64,
    /// `pu_busy[pu][channel]`
    pub pu_busy: Vec<Vec<bool>>,
    pub su_choice: Vec<Option<usize>>,
    pub su_backoff: Vec<Option<u32>>,
    pub transmitted: Vec<bool>,
    pub collided: Vec<bool>,
    pub outcome: Vec<SuOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    /// Separate-set cycles score 1, contention wins score `1 - delta`.
    pub per_su_throughput: Vec<f64>,
    /// Fraction of an SU's contention cycles in which its RTS collided.
    pub collision_rate: Vec<f64>,
    /// Fraction of an SU's contention cycles in which the earliest RTS slot
    /// among it and its contending neighbors held a collision.
    pub first_collision_rate: Vec<f64>,
    pub contention_cycles: Vec<u64>,
    pub collisions: Vec<u64>,
    pub first_collisions: Vec<u64>,
    pub cycles_run: u64,
    pub delta: f64,
    pub trace: Option<Vec<CycleOutcome>>,
}

/// One SU entering the contention phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Contender {
    pub su: usize,
    pub channel: usize,
    pub backoff: u32,
}

/// How long, in backoff slots, neighbors of a transmitter stay frozen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreezeSlots {
    pub success: u32,
    pub collision: u32,
}

impl From<&MacTiming> for FreezeSlots {
    fn from(t: &MacTiming) -> Self {
        FreezeSlots {
            success: t.exchange_slots(),
            collision: t.collision_slots(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContentionOutcome {
    Win,
    /// Overheard a neighbor announce the same channel.
    Quit,
    Collide,
}

/// Outcome of one contender and the backoff slot it was decided in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    pub outcome: ContentionOutcome,
    pub slot: u64,
}

/// Resolves one cycle's contention. Results are in `contenders` order.
///
/// Slots advance one at a time. An unfrozen contender whose counter is zero
/// sends RTS; two such contenders that are neighbors collide and leave.
/// A lone sender wins: its neighbors on the same channel quit, the rest
/// freeze while the handshake occupies their control channel. Contenders in
/// different neighborhoods never interact.
pub fn resolve_contention(
    contenders: &[Contender],
    instance: &NetworkInstance,
    freeze: FreezeSlots,
) -> Vec<Resolution> {
    let n = contenders.len();
    let mut remaining: Vec<u32> = contenders.iter().map(|c| c.backoff).collect();
    let mut frozen_until = vec![0u64; n];
    let mut result: Vec<Option<Resolution>> = vec![None; n];
    let adjacent = |a: usize, b: usize| instance.are_neighbors(contenders[a].su, contenders[b].su);

    let mut t = 0u64;
    while result.iter().any(Option::is_none) {
        let ready: Vec<usize> = (0..n)
            .filter(|&x| result[x].is_none() && remaining[x] == 0 && frozen_until[x] <= t)
            .collect();
        let mut freezes: Vec<(usize, u32)> = Vec::new();
        for &r in &ready {
            let collided = ready.iter().any(|&o| o != r && adjacent(r, o));
            let outcome = if collided {
                ContentionOutcome::Collide
            } else {
                ContentionOutcome::Win
            };
            result[r] = Some(Resolution { outcome, slot: t });
        }
        for &r in &ready {
            let won = result[r].map(|x| x.outcome) == Some(ContentionOutcome::Win);
            let hold = if won { freeze.success } else { freeze.collision };
            for x in 0..n {
                if result[x].is_some() || !adjacent(r, x) {
                    continue;
                }
                if won && contenders[x].channel == contenders[r].channel {
                    result[x] = Some(Resolution {
                        outcome: ContentionOutcome::Quit,
                        slot: t,
                    });
                } else {
                    freezes.push((x, hold));
                }
            }
        }
        for (x, hold) in freezes {
            frozen_until[x] = frozen_until[x].max(t + hold as u64);
        }
        for x in 0..n {
            if result[x].is_none() && frozen_until[x] <= t && remaining[x] > 0 {
                remaining[x] -= 1;
            }
        }
        t += 1;
    }
    result
        .into_iter()
        .map(|r| r.expect("all contenders resolved"))
        .collect()
}

fn stream(seed: u64, label: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&label.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn at_cycle(rng: &mut ChaCha8Rng, cycle: u64) -> &mut ChaCha8Rng {
    rng.set_stream(cycle);
    rng.set_word_pos(0);
    rng
}

pub fn run_simulation(
    instance: &NetworkInstance,
    assignment: &ChannelAssignment,
    config: &SimConfig,
) -> Result<SimReport> {
    if config.cycles == 0 {
        return Err(Error::InvalidArgument("simulation needs at least one cycle".into()));
    }
    if config.window < 2 {
        return Err(Error::InvalidArgument(format!("window {} < 2", config.window)));
    }
    assignment.validate(instance)?;
    let delta = overhead(config.window, &config.timing)?;
    let freeze = FreezeSlots::from(&config.timing);
    let (np, nc, ns) = (instance.num_pus(), instance.num_channels(), instance.num_sus());

    let mut pu_rng = stream(config.seed, 0);
    let mut su_rng: Vec<ChaCha8Rng> = (0..ns).map(|k| stream(config.seed, 1 + k as u64)).collect();
    let mut score = vec![0.0f64; ns];
    let mut contention_cycles = vec![0u64; ns];
    let mut collisions = vec![0u64; ns];
    let mut first_collisions = vec![0u64; ns];
    let mut trace = config.record_trace.then(Vec::new);

    for cycle in 0..config.cycles {
        let rng = at_cycle(&mut pu_rng, cycle);
        let mut pu_busy = vec![vec![false; nc]; np];
        for (pu, row) in pu_busy.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = rng.gen::<f64>() >= instance.idle_prob(pu, c);
            }
        }
        let free = |su: usize, c: usize| instance.pu_neighbors(su).iter().all(|&pu| !pu_busy[pu][c]);

        let mut outcome = vec![SuOutcome::Idle; ns];
        let mut su_choice = vec![None; ns];
        let mut su_backoff = vec![None; ns];
        let mut contenders = Vec::new();
        for su in 0..ns {
            let rng = at_cycle(&mut su_rng[su], cycle);
            if assignment.total(su).is_empty() {
                continue;
            }
            let sep: Vec<usize> = assignment.separate(su).iter().filter(|&c| free(su, c)).collect();
            if !sep.is_empty() {
                su_choice[su] = Some(sep[rng.gen_range(0..sep.len())]);
                outcome[su] = SuOutcome::SeparateTx;
                continue;
            }
            let com: Vec<usize> = assignment.common(su).iter().filter(|&c| free(su, c)).collect();
            if com.is_empty() {
                outcome[su] = SuOutcome::NoChannel;
                continue;
            }
            let channel = com[rng.gen_range(0..com.len())];
            let backoff = rng.gen_range(0..config.window);
            su_choice[su] = Some(channel);
            su_backoff[su] = Some(backoff);
            contenders.push(Contender { su, channel, backoff });
        }

        let results = resolve_contention(&contenders, instance, freeze);
        for c in &contenders {
            let senders: Vec<&Resolution> = contenders
                .iter()
                .zip(&results)
                .filter(|(o, r)| {
                    (o.su == c.su || instance.are_neighbors(o.su, c.su)) && r.outcome != ContentionOutcome::Quit
                })
                .map(|(_, r)| r)
                .collect();
            let earliest = senders
                .iter()
                .map(|r| r.slot)
                .min()
                .expect("a domain always has a sender");
            let at_earliest: Vec<_> = senders.iter().filter(|r| r.slot == earliest).collect();
            if at_earliest.len() > 1 && at_earliest.iter().any(|r| r.outcome == ContentionOutcome::Collide) {
                first_collisions[c.su] += 1;
            }
        }
        for (c, r) in contenders.iter().zip(results) {
            contention_cycles[c.su] += 1;
            outcome[c.su] = match r.outcome {
                ContentionOutcome::Win => SuOutcome::Win,
                ContentionOutcome::Quit => SuOutcome::Quit,
                ContentionOutcome::Collide => {
                    collisions[c.su] += 1;
                    SuOutcome::Collide
                }
            };
        }
        for su in 0..ns {
            match outcome[su] {
                SuOutcome::SeparateTx => score[su] += 1.0,
                SuOutcome::Win => score[su] += 1.0 - delta,
                _ => {}
            }
        }
        if let Some(trace) = trace.as_mut() {
            trace.push(CycleOutcome {
                cycle,
                pu_busy,
                transmitted: outcome
                    .iter()
                    .map(|o| matches!(o, SuOutcome::SeparateTx | SuOutcome::Win))
                    .collect(),
                collided: outcome.iter().map(|&o| o == SuOutcome::Collide).collect(),
                su_choice,
                su_backoff,
                outcome,
            });
        }
    }

    let cycles = config.cycles as f64;
    let rate = |events: &[u64]| -> Vec<f64> {
        events
            .iter()
            .zip(&contention_cycles)
            .map(|(&c, &n)| if n == 0 { 0.0 } else { c as f64 / n as f64 })
            .collect()
    };
    Ok(SimReport {
        per_su_throughput: score.iter().map(|s| s / cycles).collect(),
        collision_rate: rate(&collisions),
        first_collision_rate: rate(&first_collisions),
        contention_cycles,
        collisions,
        first_collisions,
        cycles_run: config.cycles,
        delta,
        trace,
    })
}

/// One tab-separated line per (cycle, SU): cycle, su, channel, backoff, outcome.
/// Missing channel or backoff is written as -1.
pub fn write_trace<W: Write>(trace: &[CycleOutcome], mut out: W) -> io::Result<()> {
    for cycle in trace {
        for su in 0..cycle.outcome.len() {
            let channel = cycle.su_choice[su].map_or(-1, |c| c as i64);
            let backoff = cycle.su_backoff[su].map_or(-1, |b| b as i64);
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                cycle.cycle,
                su,
                channel,
                backoff,
                cycle.outcome[su].label()
            )?;
        }
    }
    Ok(())
}
