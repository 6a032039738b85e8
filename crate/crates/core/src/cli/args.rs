use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::{Command, RunConfig};

#[derive(Parser, Debug)]
#[command(
    name = "cantorflow",
    version,
    about = "Rokhlin towers, suspension flowboxes and K0 maps on Cantor systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// `odometer base=2` or `substitution a:ab,b:a`.
    #[arg(long, global = true, default_value = "odometer base=2")]
    pub system: String,
    /// Comma-separated cylinder words, outermost first.
    #[arg(long, global = true)]
    pub slices: Option<String>,
    /// Generate this many nested cylinders around `--point` instead.
    #[arg(long, global = true)]
    pub auto_nest: Option<usize>,
    /// `prefix(period)` for odometers, `l.r[@shift]` for subshifts.
    #[arg(long, global = true)]
    pub point: Option<String>,
    /// Partition depth for K0 stages.
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Number of nested slices, or flowbox stages for `suspension flowbox`.
    #[arg(long, global = true)]
    pub stages: Option<usize>,
    /// Kernel grid size `N`; the check also runs `2N`.
    #[arg(long, global = true, default_value_t = 64)]
    pub grid: usize,
    /// Roof: a rational, or `word=p/q` pairs such as `a=1,b=3/2`.
    #[arg(long, global = true, default_value = "1")]
    pub tau: String,
    /// Flow time for `suspension flow`.
    #[arg(long, global = true, default_value = "1/2", allow_hyphen_values = true)]
    pub time: String,
    /// Random samples per check.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Also write the report (DOT for `bratteli`) to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print the full report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Add wall-clock timings to the report (breaks byte-stability).
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Describe a system: languages, measures, K0 at a depth.
    System,
    /// Tower decompositions along the slice chain.
    Towers,
    /// Cokernel of `id − Φ` on depth-`d` atoms.
    K0,
    /// Exact-sequence and order-isomorphism suites.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Suspension flows and flowboxes.
    #[command(subcommand)]
    Suspension(SuspensionCmd),
    /// Discretized kernel identities.
    #[command(subcommand)]
    Kernels(KernelsCmd),
    /// Bratteli diagram of the chain as Graphviz DOT.
    Bratteli,
}

#[derive(Subcommand, Debug)]
pub enum VerifyCmd {
    /// Rows, squares and δ stabilization per stage.
    ExactSequence,
    /// The direct limit against K0 as ordered groups.
    OrderIso,
}

#[derive(Subcommand, Debug)]
pub enum SuspensionCmd {
    /// Flow a point and check the group law.
    Flow,
    /// Build and check a flowbox structure around `--point`.
    Flowbox,
}

#[derive(Subcommand, Debug)]
pub enum KernelsCmd {
    /// Identity errors at `N` and `2N`.
    Check,
}

impl Cli {
    pub fn into_config(self) -> RunConfig {
        let command = match self.command {
            Cmd::System => Command::System,
            Cmd::Towers => Command::Towers,
            Cmd::K0 => Command::K0,
            Cmd::Verify(VerifyCmd::ExactSequence) => Command::ExactSequence,
            Cmd::Verify(VerifyCmd::OrderIso) => Command::OrderIso,
            Cmd::Suspension(SuspensionCmd::Flow) => Command::Flow,
            Cmd::Suspension(SuspensionCmd::Flowbox) => Command::Flowbox,
            Cmd::Kernels(KernelsCmd::Check) => Command::KernelsCheck,
            Cmd::Bratteli => Command::Bratteli,
        };
        let c = self.common;
        RunConfig {
            command,
            system: c.system,
            slices: c.slices,
            auto_nest: c.auto_nest,
            point: c.point,
            depth: c.depth,
            stages: c.stages,
            grid: c.grid,
            tau: c.tau,
            time: c.time,
            samples: c.samples,
            seed: c.seed,
            out: c.out,
            json: c.json,
            timings: c.timings,
        }
    }
}
