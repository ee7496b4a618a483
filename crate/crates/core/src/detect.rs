//! Phase-boundary detectors working on assembled sweep tables.
//!
//! * [`detect_sb_region`]: the finite-size indicator `q_L(θ) = |Q_L(θ) - Q_{L-2}(θ)|`
//!   against a threshold δ. Its first and last crossings bound the region where
//!   translation symmetry is broken; the lower end is an upper bound for the
//!   true boundary and the upper end a lower bound.
//! * [`detect_first_order`]: jumps of `Q(θ)` far above the local typical step.
//! * [`detect_extremum`]: an interior extremum shared by every ladder length.
//! * [`odd_even_report`]: energies and discord of the two lowest levels across
//!   lengths, with a heuristic flag for ground-state alternation.

use crate::error::{Error, Result};
use crate::reduced::BondFamily;
use crate::sweep::{SweepTable, THETA_EPS};

/// θ interval (units of π) scanned for the symmetry-broken region.
pub const SB_WINDOW: (f64, f64) = (0.0, 0.5);

fn missing_cell(theta: f64, l: usize) -> String {
    format!("(θ = {theta}π, L = {l})")
}

/// `|Q_L(θ) - Q_{L-2}(θ)|` of the ground-level rung discord.
pub fn size_effect(table: &SweepTable, theta_over_pi: f64, l: usize) -> Result<f64> {
    let q = |l: usize| {
        table
            .find(theta_over_pi, l, BondFamily::Rung, 0)
            .map(|r| r.discord)
            .ok_or_else(|| Error::Lookup(format!("no ground-level rung row at {}", missing_cell(theta_over_pi, l))))
    };
    if l < 6 {
        return Err(Error::Lookup(format!("no ladder of length {} below L = {l}", l.saturating_sub(2))));
    }
    Ok((q(l)? - q(l - 2)?).abs())
}

/// Grid step of an increasing θ list, if uniform.
pub fn uniform_step(thetas: &[f64]) -> Option<f64> {
    if thetas.len() < 2 {
        return None;
    }
    let step = thetas[1] - thetas[0];
    thetas
        .windows(2)
        .all(|w| ((w[1] - w[0]) - step).abs() < THETA_EPS.max(1e-9 * step.abs()))
        .then_some(step)
}

/// Lower and upper end of the symmetry-broken region at one length.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SbRegion {
    pub theta3_hat: Option<f64>,
    pub theta5_hat: Option<f64>,
    pub grid_step: f64,
}

/// `(θ, q_L(θ))` over the θ values of the `L` rung curve inside `window`.
/// Every θ must also be present at `L - 2`.
pub fn q_series(table: &SweepTable, l: usize, window: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    let upper = table.discord_series(l, BondFamily::Rung);
    if l < 6 {
        return Err(Error::Coverage {
            missing: vec![format!("L = {} (needed as L - 2)", l as isize - 2)],
        });
    }
    let mut missing = Vec::new();
    let in_window: Vec<(f64, f64)> = upper
        .into_iter()
        .filter(|(t, _)| *t >= window.0 - THETA_EPS && *t <= window.1 + THETA_EPS)
        .collect();
    if in_window.is_empty() {
        missing.push(format!("L = {l} over θ ∈ [{}π, {}π]", window.0, window.1));
    } else {
        if (in_window[0].0 - window.0).abs() > THETA_EPS {
            missing.push(missing_cell(window.0, l));
        }
        if (in_window[in_window.len() - 1].0 - window.1).abs() > THETA_EPS {
            missing.push(missing_cell(window.1, l));
        }
    }
    let mut out = Vec::with_capacity(in_window.len());
    for &(t, q) in &in_window {
        match table.find(t, l - 2, BondFamily::Rung, 0) {
            Some(r) => out.push((t, (q - r.discord).abs())),
            None => missing.push(missing_cell(t, l - 2)),
        }
    }
    if !missing.is_empty() {
        return Err(Error::Coverage { missing });
    }
    Ok(out)
}

/// First and last grid θ of `window` where `q_L > delta`; absent when `q_L`
/// never exceeds `delta`.
pub fn detect_sb_region(table: &SweepTable, l: usize, delta: f64) -> Result<SbRegion> {
    detect_sb_region_in(table, l, delta, SB_WINDOW)
}

pub fn detect_sb_region_in(table: &SweepTable, l: usize, delta: f64, window: (f64, f64)) -> Result<SbRegion> {
    let q = q_series(table, l, window)?;
    let thetas: Vec<f64> = q.iter().map(|p| p.0).collect();
    let grid_step = uniform_step(&thetas).ok_or_else(|| Error::Coverage {
        missing: vec![format!("a uniform θ grid over [{}π, {}π] at L = {l}", window.0, window.1)],
    })?;
    let above: Vec<f64> = q.iter().filter(|p| p.1 > delta).map(|p| p.0).collect();
    Ok(SbRegion {
        theta3_hat: above.first().copied(),
        theta5_hat: above.last().copied(),
        grid_step,
    })
}

/// Settings of the discontinuity detector.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct JumpOptions {
    /// A step must exceed this multiple of the local median step.
    pub factor: f64,
    /// Half width (units of π) of the window the median is taken over.
    pub window: f64,
    /// Steps at or below this size are never jumps, however flat the
    /// neighbourhood.
    pub min_jump: f64,
}

impl Default for JumpOptions {
    fn default() -> Self {
        Self {
            factor: 10.0,
            window: 0.05,
            min_jump: 1e-3,
        }
    }
}

/// A grid interval across which `Q` jumps.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Jump {
    pub lower: f64,
    pub upper: f64,
    pub midpoint: f64,
    pub size: f64,
    pub local_median: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FirstOrder {
    pub jumps: Vec<Jump>,
    /// Midpoint of the first jump (of the only one, if it lies at θ < 0).
    pub theta1_hat: Option<f64>,
    /// Midpoint of the last jump (of the only one, if it lies at θ ≥ 0).
    pub theta2_hat: Option<f64>,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Flags adjacent-θ intervals whose `|ΔQ|` exceeds `factor` times the median
/// `|ΔQ|` of the other intervals within `± window`. Consecutive flagged
/// intervals merge into one jump whose size is the summed `|ΔQ|`.
pub fn detect_first_order(series: &[(f64, f64)], opts: &JumpOptions) -> FirstOrder {
    let steps: Vec<(f64, f64, f64)> = series
        .windows(2)
        .map(|w| (w[0].0, w[1].0, (w[1].1 - w[0].1).abs()))
        .collect();
    let mid = |s: &(f64, f64, f64)| 0.5 * (s.0 + s.1);
    let mut jumps: Vec<Jump> = Vec::new();
    for (k, s) in steps.iter().enumerate() {
        let m = mid(s);
        let local = median(
            steps
                .iter()
                .enumerate()
                .filter(|(j, o)| *j != k && (mid(o) - m).abs() <= opts.window + THETA_EPS)
                .map(|(_, o)| o.2)
                .collect(),
        );
        if s.2 > opts.min_jump && s.2 > opts.factor * local {
            // a run of flagged steps (the state passes through an
            // intermediate branch for a grid point or two) is one interval
            match jumps.last_mut() {
                Some(prev) if (prev.upper - s.0).abs() <= THETA_EPS => {
                    prev.upper = s.1;
                    prev.midpoint = 0.5 * (prev.lower + s.1);
                    prev.size += s.2;
                    prev.local_median = prev.local_median.max(local);
                }
                _ => jumps.push(Jump {
                    lower: s.0,
                    upper: s.1,
                    midpoint: m,
                    size: s.2,
                    local_median: local,
                }),
            }
        }
    }
    let (theta1_hat, theta2_hat) = match jumps.as_slice() {
        [] => (None, None),
        [only] if only.midpoint < 0.0 => (Some(only.midpoint), None),
        [only] => (None, Some(only.midpoint)),
        [first, .., last] => (Some(first.midpoint), Some(last.midpoint)),
    };
    FirstOrder {
        jumps,
        theta1_hat,
        theta2_hat,
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Extremum {
    /// Extremum of each length: the one matched to the common location when
    /// there is one, otherwise the strongest.
    pub per_l: Vec<(usize, Option<f64>)>,
    /// Location at the largest length of an extremum that every length shows
    /// within one grid step.
    pub theta4_hat: Option<f64>,
}

/// Interior turning points inside `window` as `(θ, |second difference|)`.
pub fn interior_extrema(series: &[(f64, f64)], window: Option<(f64, f64)>) -> Vec<(f64, f64)> {
    let inside = |t: f64| window.is_none_or(|(a, b)| t >= a - THETA_EPS && t <= b + THETA_EPS);
    (1..series.len().saturating_sub(1))
        .filter(|&k| inside(series[k].0))
        .filter_map(|k| {
            let d1 = series[k].1 - series[k - 1].1;
            let d2 = series[k + 1].1 - series[k].1;
            let turns = (d1 > 0.0 && d2 <= 0.0) || (d1 < 0.0 && d2 >= 0.0);
            turns.then_some((series[k].0, (d2 - d1).abs()))
        })
        .collect()
}

/// Interior extremum with the largest `|second difference|`, inside `window`.
pub fn strongest_extremum(series: &[(f64, f64)], window: Option<(f64, f64)>) -> Option<f64> {
    interior_extrema(series, window)
        .into_iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|e| e.0)
}

/// Common interior extremum of several `(L, series)` curves.
///
/// A curve may turn more than once (the odd-even effect adds dips that move
/// with `L`), so every extremum of the largest length is tried and kept when
/// each other length has one within a grid step. Among several such, the one
/// with the largest summed curvature wins.
pub fn detect_extremum(curves: &[(usize, Vec<(f64, f64)>)], window: Option<(f64, f64)>) -> Extremum {
    let all: Vec<(usize, Vec<(f64, f64)>)> = curves
        .iter()
        .map(|(l, s)| (*l, interior_extrema(s, window)))
        .collect();
    let strongest = |e: &[(f64, f64)]| e.iter().max_by(|a, b| a.1.total_cmp(&b.1)).map(|p| p.0);
    let step = curves
        .iter()
        .filter_map(|(_, s)| uniform_step(&s.iter().map(|p| p.0).collect::<Vec<_>>()))
        .fold(f64::INFINITY, f64::min);
    let fallback = || Extremum {
        per_l: all.iter().map(|(l, e)| (*l, strongest(e))).collect(),
        theta4_hat: None,
    };
    let Some((_, top)) = all.iter().max_by_key(|p| p.0) else {
        return fallback();
    };
    if all.len() < 2 || !step.is_finite() {
        return fallback();
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    for &(t, _) in top {
        let matched: Option<Vec<(f64, f64)>> = all
            .iter()
            .map(|(_, e)| {
                e.iter()
                    .filter(|p| (p.0 - t).abs() <= step + THETA_EPS)
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .copied()
            })
            .collect();
        let Some(matched) = matched else { continue };
        let lo = matched.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi = matched.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        if hi - lo > step + THETA_EPS {
            continue;
        }
        let score: f64 = matched.iter().map(|p| p.1).sum();
        if best.as_ref().is_none_or(|b| score > b.0) {
            best = Some((score, matched.iter().map(|p| p.0).collect()));
        }
    }
    match best {
        Some((_, locs)) => {
            let top_l = all.iter().map(|p| p.0).max().expect("non-empty");
            let per_l: Vec<(usize, Option<f64>)> = all.iter().map(|p| p.0).zip(locs.iter().map(|&t| Some(t))).collect();
            let theta4_hat = per_l.iter().find(|p| p.0 == top_l).and_then(|p| p.1);
            Extremum { per_l, theta4_hat }
        }
        None => fallback(),
    }
}

/// Whether the ground state switches between two branches with `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alternation {
    Yes,
    No,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OddEvenRow {
    #[serde(rename = "L")]
    pub l: usize,
    pub e0: f64,
    pub e1: f64,
    pub q0: f64,
    pub q1: f64,
    pub n_up0: usize,
    pub n_up1: usize,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OddEvenReport {
    pub theta_over_pi: f64,
    pub bond: BondFamily,
    pub rows: Vec<OddEvenRow>,
    /// Heuristic: `Yes` when the sign of `Q0 - Q1` flips between every pair of
    /// consecutive lengths. The rows are the authoritative data.
    pub alternation: Alternation,
}

/// Two lowest levels at `θ` for every length of `l_list`. The flag is
/// indeterminate when some length has `|E1 - E0| < eps_deg`, when a sign of
/// `Q0 - Q1` is zero, or when fewer than two lengths are given.
pub fn odd_even_report(
    table: &SweepTable,
    theta_over_pi: f64,
    l_list: &[usize],
    bond: BondFamily,
    eps_deg: f64,
) -> Result<OddEvenReport> {
    let mut rows = Vec::new();
    let mut missing = Vec::new();
    for &l in l_list {
        match (table.find(theta_over_pi, l, bond, 0), table.find(theta_over_pi, l, bond, 1)) {
            (Some(a), Some(b)) => rows.push(OddEvenRow {
                l,
                e0: a.energy,
                e1: b.energy,
                q0: a.discord,
                q1: b.discord,
                n_up0: a.n_up,
                n_up1: b.n_up,
            }),
            (a, _) => {
                let which = if a.is_none() { "levels 0 and 1" } else { "level 1" };
                missing.push(format!("{} {which}", missing_cell(theta_over_pi, l)));
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::Coverage { missing });
    }
    Ok(OddEvenReport {
        theta_over_pi,
        bond,
        alternation: alternation_flag(&rows, eps_deg),
        rows,
    })
}

pub fn alternation_flag(rows: &[OddEvenRow], eps_deg: f64) -> Alternation {
    if rows.len() < 2 || rows.iter().any(|r| (r.e1 - r.e0).abs() < eps_deg || r.q0 == r.q1) {
        return Alternation::Indeterminate;
    }
    let signs: Vec<bool> = rows.iter().map(|r| r.q0 > r.q1).collect();
    if signs.windows(2).all(|w| w[0] != w[1]) {
        Alternation::Yes
    } else {
        Alternation::No
    }
}

/// How a [`BoundaryReport`] was obtained.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ReportMethod {
    pub delta: f64,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "L_list")]
    pub l_list: Vec<usize>,
    pub grid_step: f64,
    pub window: (f64, f64),
    pub jump: JumpOptions,
}

/// Estimated transition points in units of π.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoundaryReport {
    pub theta3_hat: Option<f64>,
    pub theta5_hat: Option<f64>,
    pub theta1_hat: Option<f64>,
    pub theta2_hat: Option<f64>,
    pub theta4_hat: Option<f64>,
    pub jumps: Vec<Jump>,
    pub extrema: Vec<(usize, Option<f64>)>,
    pub method: ReportMethod,
    pub bound_direction: String,
}

pub const BOUND_DIRECTION: &str = "theta3_hat is an upper bound and theta5_hat a lower bound for the \
     critical points: the threshold region shrinks toward the true one as L grows";

/// Runs every detector on the rung data of `table` at length `l`.
///
/// The symmetry-broken region needs `L` and `L - 2` over [`SB_WINDOW`]. The
/// jump detector uses the whole `L` curve, and the extremum search every
/// length of the table, restricted to the detected region when there is one.
pub fn boundaries(table: &SweepTable, l: usize, delta: f64, jump: &JumpOptions) -> Result<BoundaryReport> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    let region = detect_sb_region(table, l, delta)?;
    let first = detect_first_order(&table.discord_series(l, BondFamily::Rung), jump);
    let l_list = table.lengths();
    let curves: Vec<(usize, Vec<(f64, f64)>)> = l_list
        .iter()
        .map(|&m| (m, table.discord_series(m, BondFamily::Rung)))
        .filter(|(_, s)| s.len() >= 3)
        .collect();
    let window = match (region.theta3_hat, region.theta5_hat) {
        (Some(a), Some(b)) => Some((a, b)),
        _ => None,
    };
    let ext = detect_extremum(&curves, window);
    Ok(BoundaryReport {
        theta3_hat: region.theta3_hat,
        theta5_hat: region.theta5_hat,
        theta1_hat: first.theta1_hat,
        theta2_hat: first.theta2_hat,
        theta4_hat: ext.theta4_hat,
        jumps: first.jumps,
        extrema: ext.per_l,
        method: ReportMethod {
            delta,
            l,
            l_list,
            grid_step: region.grid_step,
            window: SB_WINDOW,
            jump: *jump,
        },
        bound_direction: BOUND_DIRECTION.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::{grid, SweepRow};
    use proptest::prelude::*;

    fn row(t: f64, l: usize, level: usize, q: f64, e: f64) -> SweepRow {
        SweepRow {
            theta_over_pi: t,
            l,
            bond: BondFamily::Rung,
            level,
            n_up: l,
            energy: e,
            discord: q,
            classical_corr: 0.0,
            mutual_info: q,
            concurrence: 0.0,
            entropy_ab: 0.0,
            degenerate_flag: false,
        }
    }

    /// Ground-level table where `Q_{L-2} = 0` and `Q_L = q(θ)`.
    fn q_table(l: usize, thetas: &[f64], q: impl Fn(f64) -> f64) -> SweepTable {
        let mut rows = Vec::new();
        for &t in thetas {
            rows.push(row(t, l - 2, 0, 0.0, -1.0));
            rows.push(row(t, l, 0, q(t), -1.0));
        }
        SweepTable::from_rows(rows)
    }

    #[test]
    fn size_effect_arithmetic() {
        let t = SweepTable::from_rows(vec![row(0.1, 10, 0, 0.20, -1.0), row(0.1, 12, 0, 0.35, -1.0)]);
        assert!((size_effect(&t, 0.1, 12).unwrap() - 0.15).abs() < 1e-15);
        let same = SweepTable::from_rows(vec![row(0.1, 10, 0, 0.3, -1.0), row(0.1, 12, 0, 0.3, -1.0)]);
        assert_eq!(size_effect(&same, 0.1, 12).unwrap(), 0.0);
        assert!(matches!(size_effect(&t, 0.2, 12), Err(Error::Lookup(_))));
        assert!(matches!(size_effect(&t, 0.1, 10), Err(Error::Lookup(_))));
    }

    #[test]
    fn sb_region_on_synthetic_tables() {
        let g = grid(0.0, 0.5, 0.01).unwrap();
        let zero = q_table(12, &g, |_| 0.0);
        let r = detect_sb_region(&zero, 12, 1e-4).unwrap();
        assert_eq!((r.theta3_hat, r.theta5_hat), (None, None));
        assert!((r.grid_step - 0.01).abs() < 1e-12);

        let step = q_table(12, &g, |t| if (0.1 - 1e-9..=0.3 + 1e-9).contains(&t) { 1e-3 } else { 0.0 });
        let r = detect_sb_region(&step, 12, 1e-4).unwrap();
        assert_eq!((r.theta3_hat, r.theta5_hat), (Some(0.1), Some(0.3)));
    }

    #[test]
    fn sb_region_reports_missing_cells() {
        let g = grid(0.0, 0.5, 0.01).unwrap();
        let mut t = q_table(12, &g, |_| 0.0);
        t.rows.retain(|r| r.l == 12);
        match detect_sb_region(&t, 12, 1e-4) {
            Err(Error::Coverage { missing }) => {
                assert_eq!(missing.len(), 51);
                assert!(missing[0].contains("L = 10"));
            }
            other => panic!("{other:?}"),
        }
        let short = q_table(12, &grid(0.0, 0.3, 0.01).unwrap(), |_| 0.0);
        assert!(matches!(detect_sb_region(&short, 12, 1e-4), Err(Error::Coverage { .. })));
    }

    proptest! {
        #[test]
        fn sb_region_returns_constructed_support(
            mask in proptest::collection::vec(any::<bool>(), 51),
            heights in proptest::collection::vec(1.0f64..1e3, 51),
        ) {
            let g = grid(0.0, 0.5, 0.01).unwrap();
            let delta = 1e-4;
            let table = q_table(12, &g, |t| {
                let k = (t / 0.01).round() as usize;
                if mask[k] { delta * (1.0 + heights[k]) } else { delta * 0.5 }
            });
            let r = detect_sb_region(&table, 12, delta).unwrap();
            let support: Vec<f64> = g.iter().zip(&mask).filter(|(_, m)| **m).map(|(t, _)| *t).collect();
            prop_assert_eq!(r.theta3_hat, support.first().copied());
            prop_assert_eq!(r.theta5_hat, support.last().copied());
        }

        #[test]
        fn refinement_moves_bounds_by_at_most_one_coarse_step(
            a in 0.02f64..0.2, width in 0.05f64..0.25, height in 1e-3f64..1e-1,
        ) {
            // smooth bump with q > δ exactly on (a, a + width)
            let q = |t: f64| {
                let s = (t - a) / width;
                if s > 0.0 && s < 1.0 { height * (std::f64::consts::PI * s).sin() } else { 0.0 }
            };
            let coarse = detect_sb_region(&q_table(12, &grid(0.0, 0.5, 0.02).unwrap(), q), 12, 1e-4).unwrap();
            let fine = detect_sb_region(&q_table(12, &grid(0.0, 0.5, 0.01).unwrap(), q), 12, 1e-4).unwrap();
            if let (Some(c3), Some(f3)) = (coarse.theta3_hat, fine.theta3_hat) {
                prop_assert!((c3 - f3).abs() <= 0.02 + 1e-9);
            }
            if let (Some(c5), Some(f5)) = (coarse.theta5_hat, fine.theta5_hat) {
                prop_assert!((c5 - f5).abs() <= 0.02 + 1e-9);
            }
        }

        #[test]
        fn q_is_symmetric_and_nonnegative(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let t = SweepTable::from_rows(vec![row(0.0, 6, 0, a, -1.0), row(0.0, 8, 0, b, -1.0)]);
            let swapped = SweepTable::from_rows(vec![row(0.0, 6, 0, b, -1.0), row(0.0, 8, 0, a, -1.0)]);
            let q = size_effect(&t, 0.0, 8).unwrap();
            prop_assert!(q >= 0.0);
            prop_assert_eq!(q, size_effect(&swapped, 0.0, 8).unwrap());
        }
    }

    #[test]
    fn step_function_gives_its_midpoint() {
        let g = grid(-1.0, 0.99, 0.01).unwrap();
        let series: Vec<(f64, f64)> = g.iter().map(|&t| (t, if t < 0.3 { 0.1 + 0.01 * t } else { 0.5 })).collect();
        let f = detect_first_order(&series, &JumpOptions::default());
        assert_eq!(f.jumps.len(), 1);
        assert!((f.jumps[0].midpoint - 0.295).abs() < 1e-9);
        assert_eq!(f.theta2_hat, Some(f.jumps[0].midpoint));
        assert_eq!(f.theta1_hat, None);

        let two: Vec<(f64, f64)> = g
            .iter()
            .map(|&t| (t, if (-0.4..0.8).contains(&t) { 0.3 } else { 0.0 }))
            .collect();
        let f = detect_first_order(&two, &JumpOptions::default());
        assert_eq!(f.jumps.len(), 2);
        assert!((f.theta1_hat.unwrap() + 0.405).abs() < 1e-9);

        // a one-point intermediate plateau still gives a single interval
        let staircase: Vec<(f64, f64)> = g
            .iter()
            .map(|&t| (t, if t < 0.3 { 0.1 } else if t < 0.305 { 0.3 } else { 0.5 }))
            .collect();
        let f = detect_first_order(&staircase, &JumpOptions::default());
        assert_eq!(f.jumps.len(), 1);
        assert!((f.jumps[0].lower - 0.29).abs() < 1e-9 && (f.jumps[0].upper - 0.31).abs() < 1e-9);
        assert!((f.jumps[0].midpoint - 0.3).abs() < 1e-9);
        assert!((f.jumps[0].size - 0.4).abs() < 1e-9);
        let f = detect_first_order(&two, &JumpOptions::default());
        assert!((f.theta1_hat.unwrap() + 0.405).abs() < 1e-9);
        assert!((f.theta2_hat.unwrap() - 0.795).abs() < 1e-9);
    }

    #[test]
    fn smooth_curve_has_no_jumps() {
        let series: Vec<(f64, f64)> = grid(-1.0, 0.99, 0.01)
            .unwrap()
            .iter()
            .map(|&t| (t, 0.2 + 0.1 * (3.0 * t).sin()))
            .collect();
        let f = detect_first_order(&series, &JumpOptions::default());
        assert!(f.jumps.is_empty());
        assert_eq!((f.theta1_hat, f.theta2_hat), (None, None));
        // flat curve: zero median, but nothing above the floor either
        let flat: Vec<(f64, f64)> = series.iter().map(|p| (p.0, 0.1)).collect();
        assert!(detect_first_order(&flat, &JumpOptions::default()).jumps.is_empty());
    }

    #[test]
    fn shared_extremum() {
        let g = grid(0.0, 0.5, 0.01).unwrap();
        let parabola: Vec<(f64, f64)> = g.iter().map(|&t| (t, (t - 0.15).powi(2))).collect();
        let curves = vec![(6, parabola.clone()), (8, parabola.clone()), (10, parabola)];
        let e = detect_extremum(&curves, None);
        assert!((e.theta4_hat.unwrap() - 0.15).abs() < 1e-12);

        let shifted = |c: f64| -> Vec<(f64, f64)> { g.iter().map(|&t| (t, (t - c).powi(2))).collect() };
        let e = detect_extremum(&[(6, shifted(0.15)), (8, shifted(0.16))], None);
        assert!((e.theta4_hat.unwrap() - 0.16).abs() < 1e-12);
        let e = detect_extremum(&[(6, shifted(0.15)), (8, shifted(0.18))], None);
        assert_eq!(e.theta4_hat, None);
        assert_eq!(e.per_l[1].1, Some(0.18));
        // extremum outside the window is ignored
        let e = detect_extremum(&[(6, shifted(0.15)), (8, shifted(0.15))], Some((0.2, 0.4)));
        assert_eq!(e.theta4_hat, None);
        assert_eq!(detect_extremum(&[(6, shifted(0.15))], None).theta4_hat, None);

        // a sharper dip at one length only does not hide the shared extremum
        let dipped: Vec<(f64, f64)> = g
            .iter()
            .map(|&t| (t, -(t - 0.15).powi(2) + if (t - 0.05).abs() < 0.005 { -0.5 } else { 0.0 }))
            .collect();
        assert_eq!(strongest_extremum(&dipped, None), Some(0.05));
        let e = detect_extremum(&[(6, shifted(0.15)), (8, dipped), (10, shifted(0.14))], None);
        assert_eq!(e.theta4_hat, Some(0.14));
        assert_eq!(e.per_l[1], (8, Some(0.15)));
    }

    fn oe_table(values: &[(usize, f64, f64, f64, f64)]) -> SweepTable {
        let mut rows = Vec::new();
        for &(l, e0, e1, q0, q1) in values {
            rows.push(row(0.2, l, 0, q0, e0));
            rows.push(row(0.2, l, 1, q1, e1));
        }
        SweepTable::from_rows(rows)
    }

    #[test]
    fn alternation_flags() {
        let ls = [6, 8, 10, 12];
        let alt = oe_table(&[
            (6, -2.0, -1.0, 0.1, 0.2),
            (8, -2.0, -1.0, 0.2, 0.1),
            (10, -2.0, -1.0, 0.1, 0.2),
            (12, -2.0, -1.0, 0.2, 0.1),
        ]);
        let r = odd_even_report(&alt, 0.2, &ls, BondFamily::Rung, 1e-8).unwrap();
        assert_eq!(r.alternation, Alternation::Yes);
        assert_eq!(r.rows.len(), 4);

        let constant = oe_table(&[
            (6, -2.0, -1.0, 0.2, 0.1),
            (8, -2.0, -1.0, 0.2, 0.1),
            (10, -2.0, -1.0, 0.2, 0.1),
            (12, -2.0, -1.0, 0.2, 0.1),
        ]);
        assert_eq!(
            odd_even_report(&constant, 0.2, &ls, BondFamily::Rung, 1e-8).unwrap().alternation,
            Alternation::No
        );

        let degenerate = oe_table(&[(6, -2.0, -2.0, 0.1, 0.2), (8, -2.0, -1.0, 0.2, 0.1)]);
        assert_eq!(
            odd_even_report(&degenerate, 0.2, &[6, 8], BondFamily::Rung, 1e-8).unwrap().alternation,
            Alternation::Indeterminate
        );
        assert!(matches!(
            odd_even_report(&constant, 0.2, &[6, 14], BondFamily::Rung, 1e-8),
            Err(Error::Coverage { .. })
        ));
    }

    #[test]
    fn boundary_report_on_synthetic_table() {
        let g = grid(0.0, 0.5, 0.01).unwrap();
        let table = q_table(12, &g, |t| if (0.07 - 1e-9..=0.39 + 1e-9).contains(&t) { 1e-2 } else { 0.0 });
        let r = boundaries(&table, 12, 1e-4, &JumpOptions::default()).unwrap();
        assert_eq!((r.theta3_hat, r.theta5_hat), (Some(0.07), Some(0.39)));
        assert_eq!(r.method.l_list, vec![10, 12]);
        let none = boundaries(&table, 12, 1e9, &JumpOptions::default()).unwrap();
        assert_eq!((none.theta3_hat, none.theta5_hat), (None, None));
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"theta3_hat\":0.07"));
    }
}
