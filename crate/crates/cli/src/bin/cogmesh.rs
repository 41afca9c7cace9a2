use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use cogmesh_cli::{
    compare_algorithms, load_instance, run_experiment, write_comparison, write_csv, Algorithm, Caps, ExperimentSpec,
    Sweep,
};
use cogmesh_core::sim::write_trace;
use cogmesh_core::{MacConfig, MacTiming};

#[derive(Parser, Debug)]
#[command(
    name = "cogmesh",
    version,
    about = "Fair channel assignment for cognitive radio ad hoc networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one algorithm, optionally over a parameter sweep, and write CSV.
    Assign(AssignArgs),
    /// Run every algorithm on one instance and print a summary table.
    Compare(CommonArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Target first-collision probability.
    #[arg(long, default_value_t = 0.03)]
    epsilon: f64,
    /// Simulated cycles per run (0 = analytic only).
    #[arg(long, default_value_t = 0)]
    cycles: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    timing: TimingArgs,
}

#[derive(Args, Debug)]
struct AssignArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    algorithm: Algorithm,
    /// VAR=v1,v2,... with VAR one of num_channels, pu_idle_prob.
    #[arg(long)]
    sweep: Option<Sweep>,
    /// CSV destination (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-cycle simulation trace destination; needs --cycles and no --sweep.
    #[arg(long)]
    trace: Option<PathBuf>,
}

/// Timing overrides in microseconds.
#[derive(Args, Debug)]
struct TimingArgs {
    #[arg(long, default_value_t = 20.0)]
    theta_us: f64,
    #[arg(long, default_value_t = 48.0)]
    t_rts_us: f64,
    #[arg(long, default_value_t = 40.0)]
    t_cts_us: f64,
    #[arg(long, default_value_t = 28.0)]
    t_sifs_us: f64,
    #[arg(long, default_value_t = 0.0)]
    t_sen_us: f64,
    #[arg(long, default_value_t = 0.0)]
    t_syn_us: f64,
    #[arg(long, default_value_t = 3000.0)]
    t_cycle_us: f64,
}

impl CommonArgs {
    fn mac(&self) -> MacConfig {
        let t = &self.timing;
        MacConfig {
            timing: MacTiming {
                theta_us: t.theta_us,
                t_rts_us: t.t_rts_us,
                t_cts_us: t.t_cts_us,
                t_sifs_us: t.t_sifs_us,
                t_sen_us: t.t_sen_us,
                t_syn_us: t.t_syn_us,
                t_cycle_us: t.t_cycle_us,
            },
            epsilon: self.epsilon,
        }
    }
}

fn assign(args: AssignArgs) -> Result<()> {
    let spec = ExperimentSpec {
        instance: load_instance(&args.common.instance)?,
        algorithm: args.algorithm,
        sweep: args.sweep,
        sim_cycles: args.common.cycles,
        seed: args.common.seed,
        mac: args.common.mac(),
        caps: Caps::from_env()?,
        record_trace: args.trace.is_some(),
    };
    let output = run_experiment(&spec)?;
    match &args.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(&output.rows, BufWriter::new(file))?;
        }
        None => write_csv(&output.rows, io::stdout().lock())?,
    }
    if let Some(path) = &args.trace {
        let trace = output.points[0].trace.as_deref().unwrap_or_default();
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut out = BufWriter::new(file);
        write_trace(trace, &mut out)?;
        out.flush()?;
    }
    Ok(())
}

fn compare(args: CommonArgs) -> Result<()> {
    let instance = load_instance(&args.instance)?;
    let cmp = compare_algorithms(&instance, &args.mac(), Caps::from_env()?, args.cycles, args.seed)?;
    for w in &cmp.warnings {
        eprintln!("warning: {w}");
    }
    write_comparison(&cmp, io::stdout().lock())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Assign(args) => assign(args),
        Command::Compare(args) => compare(args),
    }
}
