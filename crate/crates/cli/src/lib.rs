//! Experiment driver: solver runs, parameter sweeps, simulation and CSV output.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use anyhow::{bail, ensure, Context, Result};
use cogmesh_core::analytics::all_throughputs;
use cogmesh_core::mac::{overhead, select_window};
use cogmesh_core::sim::{run_simulation, CycleOutcome, SimConfig};
use cogmesh_core::solver::{
    algorithm1, algorithm2, brute_force, AssignmentOutcome, BruteForceCap, ClosedForm, SelfConsistent,
};
use cogmesh_core::{parse_instance, EnumerationCap, Error, MacConfig, NetworkInstance};
use rayon::prelude::*;
use serde::Serialize;

pub const CAP_ENV: &str = "COGMESH_CAP";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Alg1,
    Alg2,
    Brute,
    BruteOverlap,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Alg1,
        Algorithm::Alg2,
        Algorithm::Brute,
        Algorithm::BruteOverlap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Alg1 => "alg1",
            Algorithm::Alg2 => "alg2",
            Algorithm::Brute => "brute",
            Algorithm::BruteOverlap => "brute-overlap",
        }
    }

    pub fn is_brute(self) -> bool {
        matches!(self, Algorithm::Brute | Algorithm::BruteOverlap)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .with_context(|| format!("unknown algorithm `{s}` (expected alg1, alg2, brute or brute-overlap)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    NumChannels,
    PuIdleProb,
}

/// A swept parameter with its values; `labels` keep the values as typed.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub var: SweepVar,
    pub values: Vec<f64>,
    pub labels: Vec<String>,
}

impl FromStr for Sweep {
    type Err = anyhow::Error;

    /// `num_channels=5,6,7` or `pu_idle_prob=0.5,0.6`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, list) = s.split_once('=').context("sweep must look like VAR=v1,v2,...")?;
        let var = match name.trim() {
            "num_channels" => SweepVar::NumChannels,
            "pu_idle_prob" => SweepVar::PuIdleProb,
            other => bail!("unknown sweep variable `{other}` (expected num_channels or pu_idle_prob)"),
        };
        let mut values = Vec::new();
        let mut labels = Vec::new();
        for token in list.split(',').map(str::trim) {
            let v: f64 = token.parse().with_context(|| format!("bad sweep value `{token}`"))?;
            match var {
                SweepVar::NumChannels => ensure!(
                    v.fract() == 0.0 && (1.0..=64.0).contains(&v),
                    "num_channels must be an integer in 1..=64, got {token}"
                ),
                SweepVar::PuIdleProb => {
                    ensure!((0.0..=1.0).contains(&v), "pu_idle_prob must be in [0, 1], got {token}")
                }
            }
            values.push(v);
            labels.push(token.to_string());
        }
        ensure!(!values.is_empty(), "sweep needs at least one value");
        Ok(Sweep { var, values, labels })
    }
}

impl Sweep {
    fn apply(&self, instance: &NetworkInstance, index: usize) -> Result<NetworkInstance> {
        let v = self.values[index];
        Ok(match self.var {
            SweepVar::NumChannels => instance.with_num_channels(v as usize)?,
            SweepVar::PuIdleProb => instance.with_homogeneous_idle_prob(v)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Caps {
    pub brute: BruteForceCap,
    pub enumeration: EnumerationCap,
}

impl Caps {
    /// Reads [`CAP_ENV`]: either `K` (brute force up to `K` bits, enumeration up
    /// to `2^K` states) or `brute=K,enum=S` with either key optional.
    pub fn from_env() -> Result<Caps> {
        match std::env::var(CAP_ENV) {
            Ok(v) => Caps::parse(&v).with_context(|| format!("invalid {CAP_ENV}")),
            Err(std::env::VarError::NotPresent) => Ok(Caps::default()),
            Err(e) => Err(e).with_context(|| format!("invalid {CAP_ENV}")),
        }
    }

    pub fn parse(text: &str) -> Result<Caps> {
        let text = text.trim();
        let mut caps = Caps::default();
        if let Ok(k) = text.parse::<u32>() {
            ensure!(k < 64, "cap exponent {k} too large");
            caps.brute.max_bits = k as usize;
            caps.enumeration.max_states = 1u64 << k;
            return Ok(caps);
        }
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .with_context(|| format!("expected key=value, got `{part}`"))?;
            let value: u64 = value
                .trim()
                .parse()
                .with_context(|| format!("bad number in `{part}`"))?;
            match key.trim() {
                "brute" => caps.brute.max_bits = value as usize,
                "enum" => caps.enumeration.max_states = value,
                other => bail!("unknown cap `{other}` (expected brute or enum)"),
            }
        }
        Ok(caps)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub instance: NetworkInstance,
    pub algorithm: Algorithm,
    pub sweep: Option<Sweep>,
    /// Zero skips simulation.
    pub sim_cycles: u64,
    pub seed: u64,
    pub mac: MacConfig,
    pub caps: Caps,
    pub record_trace: bool,
}

impl ExperimentSpec {
    pub fn new(instance: NetworkInstance, algorithm: Algorithm) -> Self {
        ExperimentSpec {
            instance,
            algorithm,
            sweep: None,
            sim_cycles: 0,
            seed: 0,
            mac: MacConfig::default(),
            caps: Caps::default(),
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub sweep_value: Option<String>,
    pub algorithm: String,
    pub su_id: usize,
    pub analytic_throughput: f64,
    pub sim_throughput: Option<f64>,
    pub min_throughput: f64,
    pub window: u32,
    pub delta: f64,
}

/// One solver run with its window, overhead and (optionally) simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub instance: NetworkInstance,
    pub outcome: AssignmentOutcome,
    pub window: u32,
    pub delta: f64,
    pub analytic: Vec<f64>,
    pub simulated: Option<Vec<f64>>,
    pub trace: Option<Vec<CycleOutcome>>,
}

impl PointResult {
    pub fn min_analytic(&self) -> f64 {
        self.analytic.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_simulated(&self) -> Option<f64> {
        self.simulated
            .as_ref()
            .map(|s| s.iter().copied().fold(f64::INFINITY, f64::min))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub points: Vec<PointResult>,
}

pub fn load_instance(path: &Path) -> Result<NetworkInstance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("loading {}", path.display()))
}

pub fn solve(
    instance: &NetworkInstance,
    algorithm: Algorithm,
    mac: &MacConfig,
    caps: Caps,
) -> Result<AssignmentOutcome> {
    let scorer = SelfConsistent {
        mac: *mac,
        cap: caps.enumeration,
    };
    Ok(match algorithm {
        Algorithm::Alg1 => algorithm1(instance),
        Algorithm::Alg2 => algorithm2(instance, mac, caps.enumeration)?,
        Algorithm::Brute => brute_force(instance, &ClosedForm, false, caps.brute)?,
        Algorithm::BruteOverlap => brute_force(instance, &scorer, true, caps.brute)?,
    })
}

/// Solves, sizes the window for the result, evaluates the analytic model at
/// that window's overhead and simulates when `sim_cycles > 0`.
pub fn run_point(
    instance: &NetworkInstance,
    algorithm: Algorithm,
    mac: &MacConfig,
    caps: Caps,
    sim_cycles: u64,
    seed: u64,
    record_trace: bool,
) -> Result<PointResult> {
    let outcome = solve(instance, algorithm, mac, caps)?;
    let window = select_window(instance, &outcome.assignment, mac.epsilon, caps.enumeration)?.global_window;
    let delta = overhead(window, &mac.timing)?;
    let analytic = all_throughputs(&outcome.assignment, instance, delta, caps.enumeration)?;
    let (simulated, trace) = if sim_cycles > 0 {
        let config = SimConfig {
            cycles: sim_cycles,
            seed,
            window,
            timing: mac.timing,
            record_trace,
        };
        let report = run_simulation(instance, &outcome.assignment, &config)?;
        (Some(report.per_su_throughput), report.trace)
    } else {
        (None, None)
    };
    Ok(PointResult {
        instance: instance.clone(),
        outcome,
        window,
        delta,
        analytic,
        simulated,
        trace,
    })
}

fn rows_for(point: &PointResult, algorithm: Algorithm, sweep_value: Option<&str>) -> Vec<ResultRow> {
    let min = point.min_analytic();
    (0..point.analytic.len())
        .map(|su| ResultRow {
            sweep_value: sweep_value.map(str::to_string),
            algorithm: algorithm.name().to_string(),
            su_id: su,
            analytic_throughput: point.analytic[su],
            sim_throughput: point.simulated.as_ref().map(|s| s[su]),
            min_throughput: min,
            window: point.window,
            delta: point.delta,
        })
        .collect()
}

/// Runs every sweep point (in parallel) and returns rows ordered by sweep
/// position, then SU.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.mac.timing.validate()?;
    ensure!(
        spec.mac.epsilon > 0.0 && spec.mac.epsilon < 1.0,
        "epsilon must be in (0, 1), got {}",
        spec.mac.epsilon
    );
    if spec.record_trace {
        ensure!(spec.sweep.is_none(), "a trace can only be recorded without a sweep");
        ensure!(spec.sim_cycles > 0, "a trace needs --cycles > 0");
    }
    let instances: Vec<(Option<&str>, NetworkInstance)> = match &spec.sweep {
        None => vec![(None, spec.instance.clone())],
        Some(sweep) => (0..sweep.values.len())
            .map(|i| Ok((Some(sweep.labels[i].as_str()), sweep.apply(&spec.instance, i)?)))
            .collect::<Result<_>>()?,
    };
    let points: Vec<PointResult> = instances
        .par_iter()
        .map(|(label, inst)| {
            run_point(
                inst,
                spec.algorithm,
                &spec.mac,
                spec.caps,
                spec.sim_cycles,
                spec.seed,
                spec.record_trace,
            )
            .with_context(|| match label {
                Some(l) => format!("{} at sweep value {l}", spec.algorithm),
                None => spec.algorithm.to_string(),
            })
        })
        .collect::<Result<_>>()?;
    let rows = instances
        .iter()
        .zip(&points)
        .flat_map(|((label, _), p)| rows_for(p, spec.algorithm, *label))
        .collect();
    Ok(ExperimentOutput { rows, points })
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    if rows.is_empty() {
        writer.write_record([
            "sweep_value",
            "algorithm",
            "su_id",
            "analytic_throughput",
            "sim_throughput",
            "min_throughput",
            "window",
            "delta",
        ])?;
    }
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub algorithm: Algorithm,
    pub min_analytic: f64,
    pub min_simulated: Option<f64>,
    pub wall: Duration,
    pub iterations: usize,
    pub evaluations: usize,
    pub window: u32,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<CompareRow>,
    /// Algorithms skipped because the instance exceeds the brute-force cap.
    pub warnings: Vec<String>,
}

/// Runs all four algorithms on one instance. Brute-force variants that exceed
/// the cap are left out with a warning.
pub fn compare_algorithms(
    instance: &NetworkInstance,
    mac: &MacConfig,
    caps: Caps,
    cycles: u64,
    seed: u64,
) -> Result<Comparison> {
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for algorithm in Algorithm::ALL {
        let start = Instant::now();
        match run_point(instance, algorithm, mac, caps, cycles, seed, false) {
            Ok(point) => rows.push(CompareRow {
                algorithm,
                min_analytic: point.min_analytic(),
                min_simulated: point.min_simulated(),
                wall: start.elapsed(),
                iterations: point.outcome.iterations,
                evaluations: point.outcome.evaluations,
                window: point.window,
                delta: point.delta,
            }),
            Err(e) if algorithm.is_brute() && matches!(e.downcast_ref(), Some(Error::TooLargeForBruteForce { .. })) => {
                warnings.push(format!("{algorithm} skipped: {e}"));
            }
            Err(e) => return Err(e.context(algorithm.to_string())),
        }
    }
    Ok(Comparison { rows, warnings })
}

pub fn write_comparison<W: Write>(cmp: &Comparison, mut out: W) -> Result<()> {
    writeln!(
        out,
        "{:<14} {:>10} {:>10} {:>6} {:>8} {:>10} {:>12} {:>10}",
        "algorithm", "min_model", "min_sim", "window", "delta", "iterations", "evaluations", "wall_ms"
    )?;
    for r in &cmp.rows {
        let sim = r.min_simulated.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        writeln!(
            out,
            "{:<14} {:>10.4} {:>10} {:>6} {:>8.4} {:>10} {:>12} {:>10.1}",
            r.algorithm.name(),
            r.min_analytic,
            sim,
            r.window,
            r.delta,
            r.iterations,
            r.evaluations,
            r.wall.as_secs_f64() * 1e3
        )?;
    }
    Ok(())
}
