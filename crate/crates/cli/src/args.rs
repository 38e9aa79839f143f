//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "relaycap",
    version,
    about = "Capacity bounds for the relay channel with an informed source"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep bounds over a dB range and emit CSV.
    Sweep(SweepArgs),
    /// Evaluate optimized bounds at one parameter point.
    Point(PointArgs),
    /// Run the oracle verification suite.
    Verify(VerifyArgs),
    /// Run a figure preset sweep; sweep flags override the preset.
    Preset {
        /// fig3, fig4, fig5a, fig5b or fig6.
        name: String,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Discrete memoryless evaluation and search on channel and joint files.
    #[command(subcommand)]
    Dm(DmCommand),
}

/// Parameter sources shared by every Gaussian command.
#[derive(Debug, Args, Clone, Default)]
pub struct ParamArgs {
    /// Config file of `key=value` lines; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// A `key=value` setting, e.g. `P1_dB=10` or `grid.coarse_steps=41`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output path, or `stdout`.
    #[arg(long, default_value = "stdout")]
    pub out: String,
}

#[derive(Debug, Args, Clone, Default)]
pub struct SweepArgs {
    /// general, hyper, dest-only or orthogonal.
    #[arg(long)]
    pub model: Option<String>,
    /// Comma-separated bound names; all bounds of the model by default.
    #[arg(long)]
    pub bounds: Option<String>,
    /// Swept quantity: snr_relay, snr_dest or a parameter name, in dB.
    #[arg(long)]
    pub x: Option<String>,
    /// Range `start:stop:step` in dB.
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<String>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args, Clone, Default)]
pub struct PointArgs {
    /// general, hyper, dest-only or orthogonal.
    #[arg(long)]
    pub model: Option<String>,
    /// Comma-separated bound names; all bounds of the model by default.
    #[arg(long)]
    pub bounds: Option<String>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args, Clone)]
pub struct VerifyArgs {
    /// Absolute tolerance in bits.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Seed of the random parameter points and joints.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random points per Gaussian construction.
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    /// Random joints per discrete evaluator.
    #[arg(long, default_value_t = 20)]
    pub joints: usize,
    /// Output path, or `stdout`.
    #[arg(long, default_value = "stdout")]
    pub out: String,
}

#[derive(Debug, Subcommand)]
pub enum DmCommand {
    /// Evaluate a bound on a joint file.
    Eval {
        /// Joint file.
        #[arg(long)]
        joint: PathBuf,
        /// Evaluator name, e.g. ub_hyper.
        #[arg(long)]
        evaluator: String,
        /// Output path, or `stdout`.
        #[arg(long, default_value = "stdout")]
        out: String,
    },
    /// Search joints of the evaluator's template for a channel file.
    Search {
        /// Channel file.
        #[arg(long)]
        channel: PathBuf,
        /// Evaluator name, e.g. ub_hyper.
        #[arg(long)]
        evaluator: String,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Auxiliary alphabet size, e.g. `U=3`; repeatable.
        #[arg(long = "aux", value_name = "VAR=SIZE")]
        aux: Vec<String>,
        /// Where to write the best joint as a joint file.
        #[arg(long)]
        joint_out: Option<PathBuf>,
        /// Output path, or `stdout`.
        #[arg(long, default_value = "stdout")]
        out: String,
    },
}
