//! End-to-end acceptance checks. Each test prints one `[PASS]`/`[FAIL]` line
//! straight to stdout (bypassing the harness capture) and then asserts.
//!
//! The sweeps behind criteria 1, 2, 4 and 5 take from minutes to many hours
//! on one core and are `#[ignore]`d; run them with
//! `cargo test --release --test acceptance -- --ignored`. Eigenvectors are
//! cached on disk (under `RING_LADDER_CACHE` when set), so the tests share
//! their diagonalizations.

use std::io::Write;
use std::path::PathBuf;

use ring_ladder::detect::{
    boundaries, detect_first_order, detect_sb_region, odd_even_report, Alternation, BoundaryReport, JumpOptions,
    SbRegion,
};
use ring_ladder::reduced::BondFamily;
use ring_ladder::sweep::{grid, run_sweep, RunOptions, SweepConfig, SweepTable};
use ring_ladder::validation::{run_suite, SuiteOptions};

const STEP: f64 = 0.01;
const EPS: f64 = 1e-9;

fn cache_dir() -> PathBuf {
    std::env::var_os("RING_LADDER_CACHE")
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-cache"))
}

fn sweep(thetas: Vec<f64>, l_list: &[usize], levels: usize) -> SweepTable {
    let mut cfg = SweepConfig::new(thetas, l_list.to_vec());
    cfg.levels = levels;
    let opts = RunOptions {
        cache_dir: Some(cache_dir()),
        ..RunOptions::default()
    };
    let table = run_sweep(&cfg, &opts).expect("sweep config is valid");
    assert!(table.failures.is_empty(), "failed cells: {:?}", table.failures);
    table
}

fn sb_window() -> Vec<f64> {
    grid(0.0, 0.5, STEP).unwrap()
}

fn verdict(n: u32, name: &str, passed: bool, detail: &str) {
    let tag = if passed { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "[{tag}] criterion {n} ({name}): {detail}");
    let _ = out.flush();
    assert!(passed, "criterion {n} ({name}) failed: {detail}");
}

fn interval(r: &SbRegion) -> Option<(f64, f64)> {
    r.theta3_hat.zip(r.theta5_hat)
}

fn within(x: Option<f64>, target: f64) -> bool {
    x.is_some_and(|v| (v - target).abs() <= STEP + EPS)
}

fn report_l10() -> (SweepTable, BoundaryReport) {
    let table = sweep(sb_window(), &[6, 8, 10], 2);
    let report = boundaries(&table, 10, 1e-4, &JumpOptions::default()).unwrap();
    (table, report)
}

#[test]
#[ignore = "L = 12 over 51 θ points: many hours on one core"]
fn criterion_1_boundary_reproduction() {
    let table = sweep(sb_window(), &[10, 12], 1);
    let r = boundaries(&table, 12, 1e-4, &JumpOptions::default()).unwrap();
    let ok = within(r.theta3_hat, 0.07) && within(r.theta5_hat, 0.39);
    verdict(
        1,
        "boundary reproduction",
        ok,
        &format!("theta3_hat = {:?}, theta5_hat = {:?} (want 0.07, 0.39 ± 0.01)", r.theta3_hat, r.theta5_hat),
    );
}

#[test]
#[ignore = "L = 10 over 51 θ points: about 15 minutes on one core"]
fn criterion_2_desk_scale_bounds() {
    let table = sweep(sb_window(), &[6, 8, 10], 2);
    let r8 = detect_sb_region(&table, 8, 1e-4).unwrap();
    let r10 = detect_sb_region(&table, 10, 1e-4).unwrap();
    let inside = |r: &SbRegion| interval(r).is_some_and(|(a, b)| a >= 0.05 - EPS && b <= 0.41 + EPS);
    let nested = match (interval(&r8), interval(&r10)) {
        (Some((a8, b8)), Some((a10, b10))) => a10 <= a8 + STEP + EPS && b10 >= b8 - STEP - EPS,
        _ => false,
    };
    verdict(
        2,
        "desk-scale bound check",
        inside(&r8) && inside(&r10) && nested,
        &format!(
            "L=8 interval {:?}, L=10 interval {:?}; need both within [0.05, 0.41] and L=10 ⊇ L=8",
            interval(&r8),
            interval(&r10)
        ),
    );
}

#[test]
fn criterion_3_first_order_discontinuity() {
    let table = sweep(grid(-1.0, 0.99, STEP).unwrap(), &[6, 8], 1);
    let opts = JumpOptions::default();
    let j6 = detect_first_order(&table.discord_series(6, BondFamily::Rung), &opts).jumps;
    let j8 = detect_first_order(&table.discord_series(8, BondFamily::Rung), &opts).jumps;
    // each L = 8 interval against the nearest L = 6 one
    let shifts: Vec<f64> = j8
        .iter()
        .map(|a| j6.iter().map(|b| (a.midpoint - b.midpoint).abs()).fold(f64::INFINITY, f64::min))
        .collect();
    let ok = j8.len() == 2 && shifts.iter().all(|&s| s <= 0.02 + EPS);
    let mids = |j: &[ring_ladder::detect::Jump]| j.iter().map(|x| x.midpoint).collect::<Vec<_>>();
    verdict(
        3,
        "first-order discontinuity",
        ok,
        &format!("L=8 jumps at {:?}, L=6 jumps at {:?}, shifts {:?}", mids(&j8), mids(&j6), shifts),
    );
}

#[test]
#[ignore = "L = 10 over 51 θ points: about 15 minutes on one core"]
fn criterion_4_size_independent_extremum() {
    let (_, r) = report_l10();
    let locs: Option<Vec<f64>> = r.extrema.iter().map(|p| p.1).collect();
    let region = r.theta3_hat.zip(r.theta5_hat);
    let ok = match (&locs, region) {
        (Some(v), Some((a, b))) => {
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            v.len() == 3 && hi - lo <= STEP + EPS && lo >= a - EPS && hi <= b + EPS
        }
        _ => false,
    };
    verdict(
        4,
        "size-independent extremum",
        ok,
        &format!("per-L extrema {:?} inside region {:?}, theta4_hat = {:?}", r.extrema, region, r.theta4_hat),
    );
}

/// Grid point at or below `x`.
fn grid_floor(x: f64) -> f64 {
    ((x + EPS) / STEP).floor() * STEP
}

#[test]
#[ignore = "needs L = 12 diagonalizations: about an hour on one core"]
fn criterion_5_odd_even_alternation() {
    let (_, r) = report_l10();
    let (Some(t3), Some(t4), Some(t5)) = (r.theta3_hat, r.theta4_hat, r.theta5_hat) else {
        verdict(5, "odd-even alternation", false, &format!("no SD/SC split detected: {r:?}"));
        return;
    };
    let sd = grid_floor(0.5 * (t3 + t4));
    let sc = grid_floor(0.5 * (t4 + t5));
    let lengths = [6, 8, 10, 12];
    let table = sweep(vec![0.0, sd, sc, 0.45], &lengths, 2);
    let flag = |t: f64| {
        odd_even_report(&table, t, &lengths, BondFamily::Rung, 1e-8)
            .unwrap()
            .alternation
    };
    let got = [flag(sd), flag(sc), flag(0.0), flag(0.45)];
    let want = [Alternation::Yes, Alternation::Yes, Alternation::No, Alternation::No];
    verdict(
        5,
        "odd-even alternation",
        got == want,
        &format!("flags at SD θ={sd:.2}, SC θ={sc:.2}, 0, 0.45: {got:?} (want {want:?})"),
    );
}

#[test]
fn criterion_6_discord_beyond_entanglement() {
    let table = sweep(grid(0.2, 0.39, STEP).unwrap(), &[8], 1);
    let hit = table
        .rows
        .iter()
        .find(|r| r.bond == BondFamily::Rung && r.level == 0 && r.concurrence < 1e-12 && r.discord > 1e-3);
    let detail = match hit {
        Some(r) => format!("θ = {}π: C = {:e}, Q = {:.6}", r.theta_over_pi, r.concurrence, r.discord),
        None => "no θ in [0.2, 0.39] with C = 0 and Q > 1e-3".to_string(),
    };
    verdict(6, "discord beyond entanglement", hit.is_some(), &detail);
}

fn suite_verdict(n: u32, name: &str, wanted: &[&str]) {
    let results = run_suite(&SuiteOptions::default());
    let picked: Vec<_> = results
        .iter()
        .filter(|r| wanted.iter().any(|w| r.name.starts_with(w)))
        .collect();
    assert_eq!(picked.len(), wanted.len(), "suite is missing checks: {wanted:?}");
    let failed: Vec<String> = picked.iter().filter(|r| !r.passed).map(|r| r.to_string()).collect();
    let detail = if failed.is_empty() {
        format!("{} checks passed", picked.len())
    } else {
        failed.join("; ")
    };
    verdict(n, name, failed.is_empty(), &detail);
}

#[test]
fn criterion_7_oracle_equivalences() {
    suite_verdict(
        7,
        "oracle equivalences",
        &[
            "Lanczos vs dense",
            "sector vs full-space partial trace",
            "closed-form vs oracle discord",
            "hermiticity",
            "[H, Sz]",
            "[H, S^2]",
            "P^4",
        ],
    );
}

#[test]
fn criterion_8_analytic_anchors() {
    suite_verdict(8, "analytic anchors", &["singlet", "ferromagnetic anchor"]);
}
