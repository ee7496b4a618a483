use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ring_ladder::eigensolver::{SectorScan, TieBreak};
use ring_ladder::reduced::BondFamily;

/// Exact diagonalization of the spin-1/2 two-leg ladder with ring exchange,
/// and two-spin quantum correlations of its low-lying states.
///
/// θ is given in units of π everywhere: J_rung = J_leg = cos θ, K = sin θ.
#[derive(Debug, Parser)]
#[command(name = "ring-ladder", version)]
pub struct Cli {
    /// Log progress (repeat for more detail). RUST_LOG takes precedence.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Diagonalize every (θ, L) cell and tabulate two-spin correlations.
    Sweep(SweepArgs),
    /// Estimate transition points from a sweep table.
    Boundaries(BoundaryArgs),
    /// Correlations of a single two-qubit X state.
    Discord(DiscordArgs),
    /// Two lowest levels across ladder lengths at fixed θ.
    Oddeven(OddEvenArgs),
    /// Run the built-in consistency checks.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Ladder lengths (comma list of even integers ≥ 4).
    #[arg(long = "L", value_delimiter = ',')]
    pub l: Vec<usize>,

    /// θ values in units of π (comma list).
    #[arg(long, allow_hyphen_values = true, conflicts_with = "theta_grid")]
    pub theta: Option<String>,

    /// Inclusive θ grid `start:stop:step`, units of π.
    #[arg(long = "theta-grid", allow_hyphen_values = true)]
    pub theta_grid: Option<String>,

    /// Bond families (comma list of rung, leg, diag).
    #[arg(long, value_delimiter = ',', value_parser = parse_bond)]
    pub bond: Vec<BondFamily>,

    /// Number of low-lying levels per cell.
    #[arg(long)]
    pub levels: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Representative of degenerate levels.
    #[arg(long, value_parser = parse_tiebreak)]
    pub tiebreak: Option<TieBreak>,

    /// How non-zero magnetization sectors are obtained (multiplet or all).
    #[arg(long, value_parser = parse_scan)]
    pub scan: Option<SectorScan>,

    /// Cross-check every discord value with the measurement-grid oracle.
    #[arg(long)]
    pub oracle: bool,

    /// Eigenvector cache directory (RING_LADDER_CACHE overrides it).
    #[arg(long = "cache-dir")]
    pub cache_dir: Option<PathBuf>,

    /// Worker threads for independent cells.
    #[arg(long)]
    pub workers: Option<usize>,

    /// Seed for Lanczos start vectors.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Relative residual tolerance of the eigensolver.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub grid: GridArgs,

    #[command(flatten)]
    pub solve: SolveArgs,

    /// Threshold stored with the configuration for later boundary detection.
    #[arg(long)]
    pub delta: Option<f64>,

    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct BoundaryArgs {
    /// Sweep table (CSV, or JSON when the name ends in .json).
    pub table: PathBuf,

    /// Threshold on |Q_L - Q_{L-2}|.
    #[arg(long, default_value_t = 1e-4)]
    pub delta: f64,

    /// Ladder length to analyse (default: the largest in the table).
    #[arg(long = "L")]
    pub l: Option<usize>,

    /// Jumps must exceed this multiple of the local median step.
    #[arg(long = "jump-factor", default_value_t = 10.0)]
    pub jump_factor: f64,

    /// Half width of the median window, units of π.
    #[arg(long = "jump-window", default_value_t = 0.05)]
    pub jump_window: f64,

    /// Smallest discord step that can count as a jump.
    #[arg(long = "min-jump", default_value_t = 1e-3)]
    pub min_jump: f64,
}

#[derive(Debug, Args)]
pub struct DiscordArgs {
    /// X-state parameters u,x,y,v,z,w.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "file", required_unless_present = "file")]
    pub rho: Option<String>,

    /// JSON file holding either {"u":…,"x":…,"y":…,"v":…,"z":…,"w":…} or a 4×4 real matrix.
    #[arg(long)]
    pub file: Option<PathBuf>,

    /// Also run the measurement-grid oracle.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args)]
pub struct OddEvenArgs {
    /// Read levels from this sweep table instead of computing them.
    #[arg(long)]
    pub table: Option<PathBuf>,

    #[command(flatten)]
    pub grid: GridArgs,

    #[command(flatten)]
    pub solve: SolveArgs,

    /// Energy gap below which the two levels count as degenerate.
    #[arg(long = "eps-deg", default_value_t = 1e-8)]
    pub eps_deg: f64,

    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Skip the L = 6 eigenvalue comparison and use fewer random samples.
    #[arg(long)]
    pub quick: bool,

    #[arg(long, default_value_t = 17)]
    pub seed: u64,
}

fn parse_bond(s: &str) -> Result<BondFamily, String> {
    s.parse().map_err(|e: ring_ladder::Error| e.to_string())
}

fn parse_tiebreak(s: &str) -> Result<TieBreak, String> {
    s.parse().map_err(|e: ring_ladder::Error| e.to_string())
}

fn parse_scan(s: &str) -> Result<SectorScan, String> {
    s.parse().map_err(|e: ring_ladder::Error| e.to_string())
}
