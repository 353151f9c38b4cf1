//! `tsplab`: batch driver for the tsplab experiments.
//!
//! Every run writes its effective configuration as one JSON line to stderr
//! before doing any work; `tsplab replay <file>` re-runs such a line.
//! Vertex indices on the command line and in outputs are 1-based.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

mod commands;
mod spec;

use spec::{BoundArg, Endpoints, GadgetSpec, IncumbentSpec, OutputFormat, PointArg, RuleArg, SolveMode, VariantArg};
use tsplab::{Heuristic, Topology};

#[derive(Parser, Debug, Clone, Serialize, Deserialize)]
#[command(name = "tsplab", version, about = "Euclidean TSP laboratory")]
pub struct Cli {
    /// Human-readable tables instead of CSV/JSON.
    #[arg(long, global = true)]
    pub pretty: bool,
    /// Worker threads for trial and copy parallelism.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Write results here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Uniform random instance.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, env = "TSPLAB_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = Topology::Torus)]
        topology: Topology,
        /// Snap coordinates to `t·j/2^bits`.
        #[arg(long, default_value_t = tsplab::instance::DEFAULT_PRECISION_BITS)]
        bits: u32,
    },
    /// Exact optimal tour or Hamilton path.
    Solve {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = SolveMode::Tour)]
        mode: SolveMode,
        /// Fixed path endpoints `i,j`.
        #[arg(long)]
        endpoints: Option<Endpoints>,
    },
    /// Heuristic tour lengths against the optimum or the 1-tree bound.
    Heur {
        #[arg(long)]
        file: PathBuf,
        /// A heuristic name or `all`.
        #[arg(long, default_value = "all")]
        heuristic: String,
        /// Reference for the ratio: `exact`, `onetree`, or `auto` (exact up to 16 points).
        #[arg(long, default_value = "auto")]
        reference: String,
    },
    /// Build a gadget and plant copies of it into an instance.
    Plant {
        #[arg(long)]
        file: PathBuf,
        /// nn | ni | pi:K | q | m | piH | pi3
        #[arg(long)]
        gadget: GadgetSpec,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 1)]
        copies: usize,
        /// Background points this close to the gadget are removed.
        #[arg(long, default_value_t = 0.5)]
        clearance: f64,
        /// Radius for the detection grid; copies go to colored cell centers.
        #[arg(long = "R")]
        r: Option<f64>,
        #[arg(long, env = "TSPLAB_SEED", default_value_t = 0)]
        seed: u64,
        /// Heuristic whose M gadget is used by m, piH and pi3.
        #[arg(long, default_value_t = Heuristic::Greedy)]
        heuristic: Heuristic,
        #[arg(long, value_enum, default_value_t = VariantArg::Yes)]
        variant: VariantArg,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = tsplab::gadgets::DEFAULT_EPS_PI)]
        eps_pi: f64,
        #[arg(long, default_value_t = tsplab::gadgets::DEFAULT_D1)]
        d1: f64,
        /// Also save the (scaled) gadget as an instance file.
        #[arg(long)]
        gadget_out: Option<PathBuf>,
    },
    /// Aligned copies of a gadget.
    Detect {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        gadget_file: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long = "R")]
        r: f64,
    },
    /// Local simulator on the ball of radius R (S) and the annulus out to `outer` (Y).
    Simulate {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        center: PointArg,
        #[arg(long = "R")]
        r: f64,
        #[arg(long)]
        outer: Option<f64>,
        #[arg(long, default_value_t = Heuristic::NearestNeighbor)]
        heuristic: Heuristic,
        /// Fork tolerance in units of R.
        #[arg(long, default_value_t = 1e-9)]
        eps: f64,
        #[arg(long, default_value_t = tsplab::localsim::DEFAULT_CAP)]
        cap: u32,
    },
    /// Trichotomy classification of every planted copy.
    Classify {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        gadget_file: PathBuf,
        #[arg(long, default_value_t = Heuristic::NearestNeighbor)]
        heuristic: Heuristic,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, default_value_t = 1e-9)]
        sim_eps: f64,
        #[arg(long, default_value_t = tsplab::analysis::STABILITY_TRIALS)]
        trials: usize,
        #[arg(long, env = "TSPLAB_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// How often perturbing S ∪ Y changes the heuristic's path through them.
    Stability {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        center: PointArg,
        #[arg(long = "R")]
        r: f64,
        #[arg(long)]
        outer: Option<f64>,
        #[arg(long, default_value_t = Heuristic::NearestNeighbor)]
        heuristic: Heuristic,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, env = "TSPLAB_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Breadth-first branch-and-bound; per-level statistics.
    Bnb {
        /// Instance file; without it a uniform instance of `n` points is generated.
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, env = "TSPLAB_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = BoundArg::Onetree)]
        bound: BoundArg,
        /// heur[:NAME] | exact | fixed:B
        #[arg(long, default_value = "heur")]
        incumbent: IncumbentSpec,
        #[arg(long, value_enum, default_value_t = RuleArg::Frac)]
        rule: RuleArg,
        #[arg(long, default_value_t = 64)]
        level_cap: usize,
        #[arg(long, default_value_t = 1_000_000)]
        node_cap: usize,
        #[arg(long, default_value_t = tsplab::bnb::DEFAULT_ITERS)]
        iters: usize,
        #[arg(long)]
        no_propagate: bool,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Decide a toy set-cover instance through a heuristic's local simulator.
    Decide {
        #[arg(long, value_enum, default_value_t = VariantArg::Yes)]
        variant: VariantArg,
        #[arg(long, default_value_t = tsplab::gadgets::TOY_INNER)]
        inner: usize,
        #[arg(long, default_value_t = Heuristic::Greedy)]
        heuristic: Heuristic,
        #[arg(long, default_value_t = 10.0)]
        d0: f64,
    },
    /// Empirical D0 for the Q gadget, optionally D1 for three Π(k) blocks.
    Calibrate {
        #[arg(long, value_enum, default_value_t = VariantArg::Yes)]
        variant: VariantArg,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 99)]
        required: usize,
        #[arg(long, env = "TSPLAB_SEED", default_value_t = 0)]
        seed: u64,
        /// Also calibrate D1 with Π(k) for this k.
        #[arg(long)]
        pi3_k: Option<usize>,
        #[arg(long, value_delimiter = ',', default_value = "6,8,10,15,20")]
        d1_grid: Vec<f64>,
        /// Distance of the path ends from the set, in units of D1.
        #[arg(long, default_value_t = 2.0)]
        d2_factor: f64,
    },
    /// Re-run a configuration line printed by an earlier run.
    Replay {
        config: PathBuf,
    },
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn execute(cli: Cli) -> Result<()> {
    if let Command::Replay { config } = &cli.command {
        let text = std::fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
        let line = text.lines().find(|l| !l.trim().is_empty()).context("empty config file")?;
        let inner: Cli = serde_json::from_str(line).context("parsing config")?;
        anyhow::ensure!(!matches!(inner.command, Command::Replay { .. }), "a replay config cannot replay");
        return execute(inner);
    }
    eprintln!("{}", serde_json::to_string(&cli)?);
    rayon::ThreadPoolBuilder::new().num_threads(cli.threads.max(1)).build_global().ok();
    let mut out = sink(&cli.out)?;
    commands::run(&cli, &mut out)?;
    out.flush()?;
    Ok(())
}

fn main() -> Result<()> {
    execute(Cli::parse())
}
