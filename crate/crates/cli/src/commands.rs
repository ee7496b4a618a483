use std::path::Path;

use ring_ladder::correlations::correlations;
use ring_ladder::detect::{boundaries, odd_even_report, JumpOptions};
use ring_ladder::reduced::{BondFamily, TwoQubitDM, TwoQubitX};
use ring_ladder::sweep::{run_sweep, SweepConfig, SweepTable};
use ring_ladder::validation::{run_suite, SuiteOptions};
use ring_ladder::Error;

use crate::args::{BoundaryArgs, DiscordArgs, Format, OddEvenArgs, SweepArgs, ValidateArgs};
use crate::config::{self, RunConfig};
use crate::output::{emit, json_line, Failure, EXIT_CONVERGENCE, EXIT_VALIDATION};

pub type Outcome = Result<(), Failure>;

fn encode(table: &SweepTable, config: &SweepConfig, format: Format) -> ring_ladder::Result<Vec<u8>> {
    match format {
        Format::Csv => Ok(table.to_csv_string()?.into_bytes()),
        Format::Json => json_line(&serde_json::json!({
            "config": config,
            "rows": table.rows,
            "failures": table.failures,
        })),
    }
}

pub fn sweep(args: &SweepArgs) -> Outcome {
    let r = config::resolve(args)?;
    log::info!(
        "sweeping {} θ values × L {:?} with {} workers",
        r.sweep.theta_grid.len(),
        r.sweep.l_list,
        r.run.workers
    );
    let table = run_sweep(&r.sweep, &r.run)?;
    emit(r.out.as_deref(), &encode(&table, &r.sweep, r.format)?)?;
    if table.failures.is_empty() {
        return Ok(());
    }
    let mut f = Failure::new(
        "incomplete",
        EXIT_CONVERGENCE,
        format!("{} cell(s) failed; the table holds the rest", table.failures.len()),
    );
    f.missing = table
        .failures
        .iter()
        .map(|c| format!("(θ = {}π, L = {}): {}", c.theta_over_pi, c.l, c.reason))
        .collect();
    Err(f)
}

/// Reads a CSV table, or the JSON written by `sweep --format json`.
pub fn read_table(path: &Path) -> ring_ladder::Result<SweepTable> {
    let file = std::fs::File::open(path)?;
    if config::format_from_extension(Some(path)) == Some(Format::Json) {
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    } else {
        SweepTable::read_csv(std::io::BufReader::new(file))
    }
}

pub fn boundaries_cmd(args: &BoundaryArgs) -> Outcome {
    let table = read_table(&args.table)?;
    let l = match args.l {
        Some(l) => l,
        None => *table
            .lengths()
            .last()
            .ok_or_else(|| Error::Coverage { missing: vec!["table has no rows".into()] })?,
    };
    let jump = JumpOptions {
        factor: args.jump_factor,
        window: args.jump_window,
        min_jump: args.min_jump,
    };
    let report = boundaries(&table, l, args.delta, &jump)?;
    emit(None, &json_line(&report)?)?;
    Ok(())
}

#[derive(serde::Deserialize)]
#[serde(untagged)]
enum StateFile {
    X(TwoQubitX),
    Matrix([[f64; 4]; 4]),
}

fn parse_rho(spec: &str) -> ring_ladder::Result<TwoQubitX> {
    let v: Vec<f64> = spec
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Domain(format!("bad --rho entry {s:?}: {e}")))
        })
        .collect::<ring_ladder::Result<_>>()?;
    let [u, x, y, v, z, w] = v[..] else {
        return Err(Error::Domain(format!(
            "--rho takes six values u,x,y,v,z,w, got {}",
            v.len()
        )));
    };
    Ok(TwoQubitX { u, x, y, v, z, w })
}

pub fn discord(args: &DiscordArgs) -> Outcome {
    let rho = match (&args.rho, &args.file) {
        (Some(s), _) => parse_rho(s)?.to_dm(),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(Error::from)?;
            let state: StateFile = serde_json::from_str(&text).map_err(|e| {
                Error::Domain(format!("malformed state file {}: {e}", path.display()))
            })?;
            match state {
                StateFile::X(x) => x.to_dm(),
                StateFile::Matrix(m) => TwoQubitDM::from_real(m),
            }
        }
        (None, None) => return Err(Error::Domain("one of --rho or --file is required".into()).into()),
    };
    let record = correlations(&rho, args.oracle)?;
    emit(None, &json_line(&record)?)?;
    Ok(())
}

pub fn oddeven(args: &OddEvenArgs) -> Outcome {
    let theta = match (&args.grid.theta, &args.grid.theta_grid) {
        (Some(t), _) => ring_ladder::sweep::parse_list(t)?,
        (None, Some(_)) => return Err(Error::Domain("oddeven takes a single --theta".into()).into()),
        (None, None) => return Err(Error::Domain("--theta is required".into()).into()),
    };
    let [theta] = theta[..] else {
        return Err(Error::Domain("oddeven takes a single --theta".into()).into());
    };
    let bond = match args.grid.bond[..] {
        [] => BondFamily::Rung,
        [b] => b,
        _ => return Err(Error::Domain("oddeven takes a single --bond".into()).into()),
    };

    let (table, l_list) = match &args.table {
        Some(path) => {
            let table = read_table(path)?;
            let l_list = if args.grid.l.is_empty() { table.lengths() } else { args.grid.l.clone() };
            (table, l_list)
        }
        None => {
            if args.grid.l.is_empty() {
                return Err(Error::Domain("--L is required without --table".into()).into());
            }
            let mut cfg = SweepConfig::new(vec![theta], args.grid.l.clone());
            cfg.bonds = vec![bond];
            cfg.levels = args.grid.levels.unwrap_or(2).max(2);
            let run = config::run_options(&args.solve, &RunConfig::default())?;
            let table = run_sweep(&cfg, &run)?;
            if let Some(f) = table.failures.first() {
                return Err(Failure::new(
                    "convergence",
                    EXIT_CONVERGENCE,
                    format!("cell (θ = {}π, L = {}) failed: {}", f.theta_over_pi, f.l, f.reason),
                ));
            }
            (table, args.grid.l.clone())
        }
    };
    let report = odd_even_report(&table, theta, &l_list, bond, args.eps_deg)?;
    emit(args.out.as_deref(), &json_line(&report)?)?;
    Ok(())
}

pub fn validate(args: &ValidateArgs) -> Outcome {
    let results = run_suite(&SuiteOptions {
        quick: args.quick,
        seed: args.seed,
    });
    for r in &results {
        println!("{r}");
    }
    let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| r.name.clone()).collect();
    println!("{} of {} checks passed", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        return Ok(());
    }
    let mut f = Failure::new("validation", EXIT_VALIDATION, format!("{} check(s) failed", failed.len()));
    f.missing = failed;
    Err(f)
}
