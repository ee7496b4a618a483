//! WebAssembly bindings for the browser demo. Every entry point returns a
//! JSON string so the page needs no generated type glue.

use ring_ladder::correlations::correlations;
use ring_ladder::detect::odd_even_report;
use ring_ladder::reduced::{BondFamily, TwoQubitX};
use ring_ladder::sweep::{grid, run_sweep, RunOptions, SweepConfig};
use ring_ladder::{Error, Result};
use wasm_bindgen::prelude::*;

/// Largest ladder the page will diagonalize; beyond it a browser tab stalls.
pub const MAX_L: usize = 8;
/// Longest θ curve the page will compute.
pub const MAX_POINTS: usize = 201;

/// Lanczos even for small sectors: dense solves of a few hundred states are
/// much slower than a short Krylov run once compiled to wasm.
fn run_options() -> RunOptions {
    let mut opts = RunOptions::default();
    opts.solver.dense_threshold = 64;
    opts
}

fn check_l(l: usize) -> Result<()> {
    if l > MAX_L {
        return Err(Error::Capacity(format!("the demo stops at L = {MAX_L}, got {l}")));
    }
    Ok(())
}

/// All correlation measures of the X state with parameters `u, x, y, v, z, w`.
pub fn x_state_json(u: f64, x: f64, y: f64, v: f64, z: f64, w: f64, oracle: bool) -> Result<String> {
    let state = TwoQubitX::new(u, x, y, v, z, w)?;
    let record = correlations(&state.to_dm(), oracle)?;
    Ok(serde_json::to_string(&record)?)
}

#[derive(serde::Serialize)]
struct CurvePoint {
    theta_over_pi: f64,
    energy: f64,
    discord: f64,
    concurrence: f64,
    mutual_info: f64,
}

/// Ground-state discord of one bond family across a θ grid (units of π).
pub fn discord_curve_json(l: usize, start: f64, stop: f64, step: f64, bond: &str) -> Result<String> {
    check_l(l)?;
    let thetas = grid(start, stop, step)?;
    if thetas.len() > MAX_POINTS {
        return Err(Error::Capacity(format!(
            "{} θ points requested, the demo allows {MAX_POINTS}",
            thetas.len()
        )));
    }
    let mut cfg = SweepConfig::new(thetas, vec![l]);
    cfg.bonds = vec![bond.parse::<BondFamily>()?];
    cfg.levels = 1;
    let table = run_sweep(&cfg, &run_options())?;
    if let Some(f) = table.failures.first() {
        return Err(Error::Domain(format!("θ = {}π failed: {}", f.theta_over_pi, f.reason)));
    }
    let points: Vec<CurvePoint> = table
        .rows
        .iter()
        .map(|r| CurvePoint {
            theta_over_pi: r.theta_over_pi,
            energy: r.energy,
            discord: r.discord,
            concurrence: r.concurrence,
            mutual_info: r.mutual_info,
        })
        .collect();
    Ok(serde_json::to_string(&points)?)
}

/// Two lowest levels of the rung state at `θ` for each length in `lengths`
/// (comma list).
pub fn odd_even_json(theta_over_pi: f64, lengths: &str) -> Result<String> {
    let l_list: Vec<usize> = lengths
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| Error::Domain(format!("bad length {s:?}: {e}")))
        })
        .collect::<Result<_>>()?;
    for &l in &l_list {
        check_l(l)?;
    }
    let mut cfg = SweepConfig::new(vec![theta_over_pi], l_list.clone());
    cfg.levels = 2;
    let table = run_sweep(&cfg, &run_options())?;
    if let Some(f) = table.failures.first() {
        return Err(Error::Domain(format!("L = {} failed: {}", f.l, f.reason)));
    }
    let report = odd_even_report(&table, theta_over_pi, &l_list, BondFamily::Rung, 1e-8)?;
    Ok(serde_json::to_string(&report)?)
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = xStateCorrelations)]
#[allow(clippy::too_many_arguments)]
pub fn x_state_correlations(
    u: f64,
    x: f64,
    y: f64,
    v: f64,
    z: f64,
    w: f64,
    oracle: bool,
) -> std::result::Result<String, JsError> {
    js(x_state_json(u, x, y, v, z, w, oracle))
}

#[wasm_bindgen(js_name = discordCurve)]
pub fn discord_curve(l: usize, start: f64, stop: f64, step: f64, bond: &str) -> std::result::Result<String, JsError> {
    js(discord_curve_json(l, start, stop, step, bond))
}

#[wasm_bindgen(js_name = oddEven)]
pub fn odd_even(theta_over_pi: f64, lengths: &str) -> std::result::Result<String, JsError> {
    js(odd_even_json(theta_over_pi, lengths))
}
