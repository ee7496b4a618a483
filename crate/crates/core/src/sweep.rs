//! θ × L sweeps of two-spin correlations and the tabular format they are
//! stored in.
//!
//! θ is measured in units of π everywhere in this module.

use std::io::{Read, Write};
use std::path::PathBuf;

use crate::correlations::correlations;
use crate::eigensolver::{low_levels, SectorScan, SolverOptions, TieBreak};
use crate::error::{Error, Result};
use crate::hamiltonian::LadderParams;
use crate::lattice::check_ladder_length;
use crate::reduced::{level_density, BondFamily};

/// Rung/leg/diagonal bonds are evaluated at this (1-based) rung.
pub const REFERENCE_RUNG: usize = 1;

/// Two θ values closer than this (in units of π) are the same grid point.
pub const THETA_EPS: f64 = 1e-9;

fn snap(v: f64) -> f64 {
    let r = (v * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Parses an inclusive `start:stop:step` grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Domain(format!("grid {spec:?} is not of the form start:stop:step")));
    }
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|e| Error::Domain(format!("bad number {s:?} in grid {spec:?}: {e}")))
    };
    let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
    grid(start, stop, step)
}

/// `start, start + step, …` up to and including `stop` (within rounding).
pub fn grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::Domain(format!("invalid grid {start}:{stop}:{step}")));
    }
    if stop < start {
        return Ok(Vec::new());
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| snap(start + k as f64 * step)).collect())
}

/// Parses a comma-separated list of θ values.
pub fn parse_list(spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Domain(format!("bad θ value {s:?}: {e}")))
        })
        .collect()
}

/// What to sweep.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Strictly increasing, units of π.
    pub theta_grid: Vec<f64>,
    /// Strictly increasing even ladder lengths, each at least 4.
    #[serde(rename = "L_list")]
    pub l_list: Vec<usize>,
    #[serde(default = "default_bonds")]
    pub bonds: Vec<BondFamily>,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_bonds() -> Vec<BondFamily> {
    vec![BondFamily::Rung]
}

fn default_levels() -> usize {
    2
}

fn default_delta() -> f64 {
    1e-4
}

impl SweepConfig {
    pub fn new(theta_grid: Vec<f64>, l_list: Vec<usize>) -> Self {
        Self {
            theta_grid,
            l_list,
            bonds: default_bonds(),
            levels: default_levels(),
            delta: default_delta(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(w) = self.theta_grid.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::Domain(format!(
                "theta_grid must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if self.theta_grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::Domain("theta_grid contains a non-finite value".into()));
        }
        if self.l_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("L_list must be strictly increasing".into()));
        }
        for &l in &self.l_list {
            check_ladder_length(l)?;
        }
        if self.bonds.is_empty() {
            return Err(Error::Domain("at least one bond family is required".into()));
        }
        if self.levels == 0 {
            return Err(Error::Domain("levels must be at least 1".into()));
        }
        if !(self.delta > 0.0) {
            return Err(Error::Domain(format!("delta must be positive, got {}", self.delta)));
        }
        Ok(())
    }
}

/// How to run a sweep.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub solver: SolverOptions,
    pub scan: SectorScan,
    pub tie_break: TieBreak,
    /// Also evaluate discord with the measurement-grid oracle.
    pub oracle: bool,
    pub cache_dir: Option<PathBuf>,
    /// Worker threads for independent cells; 0 means the global pool.
    pub workers: usize,
}

/// One line of a sweep table.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SweepRow {
    pub theta_over_pi: f64,
    #[serde(rename = "L")]
    pub l: usize,
    pub bond: BondFamily,
    pub level: usize,
    pub n_up: usize,
    pub energy: f64,
    pub discord: f64,
    pub classical_corr: f64,
    pub mutual_info: f64,
    pub concurrence: f64,
    pub entropy_ab: f64,
    pub degenerate_flag: bool,
}

/// Column names of the CSV format, in order.
pub const CSV_COLUMNS: [&str; 12] = [
    "theta_over_pi",
    "L",
    "bond",
    "level",
    "n_up",
    "energy",
    "discord",
    "classical_corr",
    "mutual_info",
    "concurrence",
    "entropy_ab",
    "degenerate_flag",
];

/// A `(θ, L)` cell that could not be computed.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CellFailure {
    pub theta_over_pi: f64,
    #[serde(rename = "L")]
    pub l: usize,
    pub reason: String,
}

/// Rows of a sweep plus the cells that failed.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    #[serde(default)]
    pub failures: Vec<CellFailure>,
}

impl SweepTable {
    pub fn from_rows(rows: Vec<SweepRow>) -> Self {
        Self {
            rows,
            failures: Vec::new(),
        }
    }

    pub fn find(&self, theta_over_pi: f64, l: usize, bond: BondFamily, level: usize) -> Option<&SweepRow> {
        self.rows.iter().find(|r| {
            r.l == l && r.bond == bond && r.level == level && (r.theta_over_pi - theta_over_pi).abs() < THETA_EPS
        })
    }

    /// Ladder lengths present, ascending.
    pub fn lengths(&self) -> Vec<usize> {
        let mut ls: Vec<usize> = self.rows.iter().map(|r| r.l).collect();
        ls.sort_unstable();
        ls.dedup();
        ls
    }

    /// `(θ, value)` of one `(L, bond, level)` curve, sorted by θ.
    pub fn series(
        &self,
        l: usize,
        bond: BondFamily,
        level: usize,
        value: impl Fn(&SweepRow) -> f64,
    ) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.l == l && r.bond == bond && r.level == level)
            .map(|r| (r.theta_over_pi, value(r)))
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    /// Ground-level discord curve of `family` at length `l`.
    pub fn discord_series(&self, l: usize, family: BondFamily) -> Vec<(f64, f64)> {
        self.series(l, family, 0, |r| r.discord)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(CSV_COLUMNS)?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        let headers = rd.headers()?.clone();
        if headers.iter().ne(CSV_COLUMNS.iter().copied()) {
            return Err(Error::Validation(format!(
                "unexpected CSV header {:?}, expected {:?}",
                headers.iter().collect::<Vec<_>>(),
                CSV_COLUMNS
            )));
        }
        let rows = rd.deserialize().collect::<std::result::Result<Vec<SweepRow>, _>>()?;
        Ok(Self::from_rows(rows))
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }
}

/// Every row of one `(θ, L)` cell.
pub fn run_cell(config: &SweepConfig, options: &RunOptions, theta_over_pi: f64, l: usize) -> Result<Vec<SweepRow>> {
    let params = LadderParams::from_theta_over_pi(l, theta_over_pi)?;
    let levels = low_levels(
        &params,
        config.levels,
        options.scan,
        options.tie_break,
        &options.solver,
        options.cache_dir.as_deref(),
    )?;
    let mut rows = Vec::with_capacity(config.bonds.len() * config.levels);
    for &bond in &config.bonds {
        for level in 0..config.levels {
            let rho = level_density(&levels, level, bond.at(REFERENCE_RUNG))?;
            let rec = correlations(&rho, options.oracle)?;
            rows.push(SweepRow {
                theta_over_pi,
                l,
                bond,
                level,
                n_up: levels.representative(level).n_up,
                energy: levels.energy(level),
                discord: rec.discord,
                classical_corr: rec.classical_corr,
                mutual_info: rec.mutual_info,
                concurrence: rec.concurrence,
                entropy_ab: rec.entropy_ab,
                degenerate_flag: levels.levels[level].degenerate,
            });
        }
    }
    if let Some(bad) = rows.iter().find(|r| {
        [r.energy, r.discord, r.classical_corr, r.mutual_info, r.concurrence, r.entropy_ab]
            .iter()
            .any(|v| !v.is_finite())
    }) {
        return Err(Error::Validation(format!("non-finite value in row {bad:?}")));
    }
    Ok(rows)
}

/// Runs every `(θ, L)` cell of `config`. Cells that fail are listed in
/// [`SweepTable::failures`] and the sweep carries on. Row order is θ-major,
/// then L, bond and level, independent of scheduling.
pub fn run_sweep(config: &SweepConfig, options: &RunOptions) -> Result<SweepTable> {
    config.validate()?;
    let cells: Vec<(f64, usize)> = config
        .theta_grid
        .iter()
        .flat_map(|&t| config.l_list.iter().map(move |&l| (t, l)))
        .collect();
    let work = |&(t, l): &(f64, usize)| {
        let out = run_cell(config, options, t, l);
        match &out {
            Ok(_) => log::info!("cell θ = {t}π, L = {l} done"),
            Err(e) => log::warn!("cell θ = {t}π, L = {l} failed: {e}"),
        }
        out
    };
    let results = map_cells(&cells, options.workers, work)?;

    let mut table = SweepTable::default();
    for ((t, l), res) in cells.into_iter().zip(results) {
        match res {
            Ok(rows) => table.rows.extend(rows),
            Err(e) => table.failures.push(CellFailure {
                theta_over_pi: t,
                l,
                reason: e.to_string(),
            }),
        }
    }
    Ok(table)
}

#[cfg(feature = "parallel")]
fn map_cells<F>(cells: &[(f64, usize)], workers: usize, work: F) -> Result<Vec<Result<Vec<SweepRow>>>>
where
    F: Fn(&(f64, usize)) -> Result<Vec<SweepRow>> + Sync,
{
    use rayon::prelude::*;
    if workers == 0 {
        return Ok(cells.par_iter().map(&work).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Precondition(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(|| cells.par_iter().map(&work).collect()))
}

#[cfg(not(feature = "parallel"))]
fn map_cells<F>(cells: &[(f64, usize)], _workers: usize, work: F) -> Result<Vec<Result<Vec<SweepRow>>>>
where
    F: Fn(&(f64, usize)) -> Result<Vec<SweepRow>>,
{
    Ok(cells.iter().map(work).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_inclusive() {
        let g = parse_grid("-1.0:1.0:0.05").unwrap();
        assert_eq!(g.len(), 41);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[40], 1.0);
        assert_eq!(g[20], 0.0);
        assert_eq!(grid(0.0, 0.5, 0.01).unwrap()[7], 0.07);
        assert_eq!(grid(-1.0, 0.99, 0.01).unwrap().len(), 200);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(grid(1.0, 0.0, 0.1).unwrap().is_empty());
        assert_eq!(parse_list("0.2, -0.75").unwrap(), vec![0.2, -0.75]);
    }

    #[test]
    fn config_validation() {
        assert!(SweepConfig::new(vec![0.0, 0.1], vec![4, 6]).validate().is_ok());
        assert!(SweepConfig::new(vec![0.1, 0.1], vec![4]).validate().is_err());
        assert!(SweepConfig::new(vec![0.0], vec![6, 4]).validate().is_err());
        assert!(SweepConfig::new(vec![0.0], vec![5]).validate().is_err());
        assert!(SweepConfig::new(vec![0.0], vec![2]).validate().is_err());
        let mut c = SweepConfig::new(vec![0.0], vec![4]);
        c.delta = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn empty_grid_gives_empty_table() {
        let t = run_sweep(&SweepConfig::new(vec![], vec![4]), &RunOptions::default()).unwrap();
        assert!(t.rows.is_empty() && t.failures.is_empty());
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let row = SweepRow {
            theta_over_pi: 0.07,
            l: 8,
            bond: BondFamily::Diag,
            level: 1,
            n_up: 8,
            energy: -13.719608501234567,
            discord: 0.1 + 0.2,
            classical_corr: 1.0 / 3.0,
            mutual_info: 2.0f64.sqrt(),
            concurrence: 0.0,
            entropy_ab: 1e-300,
            degenerate_flag: true,
        };
        let table = SweepTable::from_rows(vec![row.clone(), SweepRow { level: 0, ..row }]);
        let text = table.to_csv_string().unwrap();
        assert!(text.starts_with(&CSV_COLUMNS.join(",")));
        assert!(text.contains(",diag,"));
        let back = SweepTable::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back, table);
        assert!(SweepTable::read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn config_json_uses_defaults() {
        let c: SweepConfig = serde_json::from_str(r#"{"theta_grid":[0.0],"L_list":[4]}"#).unwrap();
        assert_eq!(c.levels, 2);
        assert_eq!(c.bonds, vec![BondFamily::Rung]);
        assert_eq!(c.delta, 1e-4);
        assert!(serde_json::from_str::<SweepConfig>(r#"{"theta_grid":[0.0],"L_list":[4],"x":1}"#).is_err());
    }
}
