use std::path::{Path, PathBuf};

use ring_ladder::eigensolver::{SectorScan, SolverOptions, TieBreak};
use ring_ladder::reduced::BondFamily;
use ring_ladder::sweep::{parse_grid, parse_list, RunOptions, SweepConfig};
use ring_ladder::Error;

use crate::args::{Format, GridArgs, SolveArgs, SweepArgs};

pub const CACHE_ENV: &str = "RING_LADDER_CACHE";

/// θ grid as written in a config file: an explicit list or `"a:b:s"`.
#[derive(Debug, Clone, serde::Deserialize)]
#[serde(untagged)]
pub enum ThetaSpec {
    List(Vec<f64>),
    Range(String),
}

impl ThetaSpec {
    fn resolve(&self) -> ring_ladder::Result<Vec<f64>> {
        match self {
            ThetaSpec::List(v) => Ok(v.clone()),
            ThetaSpec::Range(s) => parse_grid(s),
        }
    }
}

/// Everything a sweep needs. Every field is optional in the file so that
/// flags can fill the gaps.
#[derive(Debug, Clone, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub theta_grid: Option<ThetaSpec>,
    #[serde(rename = "L_list")]
    pub l_list: Option<Vec<usize>>,
    pub bonds: Option<Vec<BondFamily>>,
    pub levels: Option<usize>,
    pub delta: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub cache_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub tol: Option<f64>,
    pub tiebreak: Option<String>,
    pub scan: Option<String>,
    pub oracle: Option<bool>,
    pub seed: Option<u64>,
}

/// Fully resolved sweep settings.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub sweep: SweepConfig,
    pub run: RunOptions,
    pub out: Option<PathBuf>,
    pub format: Format,
}

pub fn load(path: &Path) -> ring_ladder::Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| {
        Error::Domain(format!("malformed config {}: {e}", path.display()))
    })
}

fn theta_from_flags(grid: &GridArgs) -> ring_ladder::Result<Option<Vec<f64>>> {
    match (&grid.theta, &grid.theta_grid) {
        (Some(list), _) => parse_list(list).map(Some),
        (None, Some(range)) => parse_grid(range).map(Some),
        (None, None) => Ok(None),
    }
}

fn missing(field: &str, flag: &str) -> Error {
    Error::Domain(format!("{field} is required (set it in the config or with {flag})"))
}

/// Solver and scheduling options shared by `sweep` and `oddeven`.
pub fn run_options(solve: &SolveArgs, file: &RunConfig) -> ring_ladder::Result<RunOptions> {
    let mut solver = SolverOptions::default();
    if let Some(tol) = solve.tol.or(file.tol) {
        if !(tol > 0.0) {
            return Err(Error::Domain(format!("tol must be positive, got {tol}")));
        }
        solver.tol = tol;
    }
    if let Some(seed) = solve.seed.or(file.seed) {
        solver.seed = seed;
    }
    let tie_break = match (solve.tiebreak, &file.tiebreak) {
        (Some(t), _) => t,
        (None, Some(s)) => s.parse::<TieBreak>()?,
        (None, None) => TieBreak::default(),
    };
    let scan = match (solve.scan, &file.scan) {
        (Some(s), _) => s,
        (None, Some(s)) => s.parse::<SectorScan>()?,
        (None, None) => SectorScan::default(),
    };
    let workers = match solve.workers.or(file.workers) {
        Some(0) => return Err(Error::Domain("workers must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let cache_dir = std::env::var_os(CACHE_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .or_else(|| solve.cache_dir.clone())
        .or_else(|| file.cache_dir.clone());
    Ok(RunOptions {
        solver,
        scan,
        tie_break,
        oracle: solve.oracle || file.oracle.unwrap_or(false),
        cache_dir,
        workers,
    })
}

/// Merges a config file (if any) with flags; flags win.
pub fn resolve(args: &SweepArgs) -> ring_ladder::Result<Resolved> {
    let file = match &args.config {
        Some(p) => load(p)?,
        None => RunConfig::default(),
    };
    let theta_grid = match theta_from_flags(&args.grid)? {
        Some(t) => t,
        None => file
            .theta_grid
            .as_ref()
            .ok_or_else(|| missing("theta_grid", "--theta or --theta-grid"))?
            .resolve()?,
    };
    let l_list = if args.grid.l.is_empty() {
        file.l_list.clone().ok_or_else(|| missing("L_list", "--L"))?
    } else {
        args.grid.l.clone()
    };
    let mut sweep = SweepConfig::new(theta_grid, l_list);
    if !args.grid.bond.is_empty() {
        sweep.bonds = args.grid.bond.clone();
    } else if let Some(b) = &file.bonds {
        sweep.bonds = b.clone();
    }
    if let Some(n) = args.grid.levels.or(file.levels) {
        sweep.levels = n;
    }
    if let Some(d) = args.delta.or(file.delta) {
        sweep.delta = d;
    }
    sweep.validate()?;

    let out = args.out.clone().or_else(|| file.out.clone());
    let format = args
        .format
        .or(file.format)
        .or_else(|| format_from_extension(out.as_deref()))
        .unwrap_or(Format::Csv);
    Ok(Resolved {
        sweep,
        run: run_options(&args.solve, &file)?,
        out,
        format,
    })
}

pub fn format_from_extension(path: Option<&Path>) -> Option<Format> {
    match path?.extension()?.to_str()? {
        "json" => Some(Format::Json),
        "csv" => Some(Format::Csv),
        _ => None,
    }
}
