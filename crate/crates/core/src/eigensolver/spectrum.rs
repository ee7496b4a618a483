//! Low-lying levels of the ladder across magnetization sectors.
//!
//! With `2L` spins every SU(2) multiplet has exactly one member in the
//! `S^z = 0` sector (`n_up = L`), so level `ℓ` is identified with the `ℓ`-th
//! eigenstate of that sector. Its other members live in sectors
//! `n_up = L ± 1, …, L ± S`; only `n_up ≥ L` is ever materialized and the
//! `n_up < L` copies are counted through the `S^z → -S^z` mirror.

use std::path::Path;

use crate::cache::VectorCache;
use crate::eigensolver::{derive_seed, lowest_complete, rayleigh_residual, LinearOperator, RitzPair, SolverOptions};
use crate::error::{Error, Result};
use crate::hamiltonian::{raise, total_spin, Hamiltonian, LadderParams};
use crate::lattice::{enumerate_sector, SectorBasis};
use crate::vector;

/// How the sectors other than `S^z = 0` are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SectorScan {
    /// Solve `S^z = 0` only and generate the remaining multiplet members
    /// with the total raising operator.
    #[default]
    Multiplet,
    /// Solve every sector `n_up = L, …, 2L` independently.
    All,
}

/// Which member of a degenerate level represents it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    /// Sector closest to `S^z = 0`, ties toward larger `n_up`.
    #[default]
    MinAbsSz,
    /// Member with the largest `n_up`.
    MaxPolarized,
    /// Equal-weight average over the whole degenerate group (applied to
    /// reduced density matrices downstream).
    Average,
}

impl std::str::FromStr for SectorScan {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multiplet" => Ok(Self::Multiplet),
            "all" => Ok(Self::All),
            other => Err(Error::Domain(format!("unknown sector scan {other:?}"))),
        }
    }
}

impl std::str::FromStr for TieBreak {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min-abs-sz" => Ok(Self::MinAbsSz),
            "max-polarized" => Ok(Self::MaxPolarized),
            "average" => Ok(Self::Average),
            other => Err(Error::Domain(format!("unknown tie-break mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for TieBreak {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::MinAbsSz => "min-abs-sz",
            Self::MaxPolarized => "max-polarized",
            Self::Average => "average",
        })
    }
}

/// An eigenpair of the ladder Hamiltonian within one sector.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub energy: f64,
    pub n_up: usize,
    pub vector: Vec<f64>,
    pub residual: f64,
    /// Total spin estimated from `<S^2>`.
    pub total_spin: f64,
    /// Index of the `S^z = 0` level this state belongs to.
    pub level: usize,
}

impl EigenPair {
    /// Number of states this pair stands for once the `n_up < L` mirror is counted.
    pub fn mirrored_count(&self, l: usize) -> usize {
        if self.n_up == l {
            1
        } else {
            2
        }
    }
}

/// Eigenpairs from all solved sectors, ascending in energy, grouped into
/// degenerate levels.
#[derive(Debug, Clone)]
pub struct SpectrumSlice {
    pub l: usize,
    pub pairs: Vec<EigenPair>,
    pub groups: Vec<Vec<usize>>,
    pub degeneracy_tol: f64,
}

impl SpectrumSlice {
    fn new(l: usize, mut pairs: Vec<EigenPair>, degeneracy_tol: f64) -> Self {
        pairs.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.n_up.cmp(&b.n_up)));
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut floor = f64::NEG_INFINITY;
        for (i, p) in pairs.iter().enumerate() {
            match groups.last_mut() {
                Some(g) if p.energy - floor < degeneracy_tol => g.push(i),
                _ => {
                    groups.push(vec![i]);
                    floor = p.energy;
                }
            }
        }
        Self {
            l,
            pairs,
            groups,
            degeneracy_tol,
        }
    }

    /// Number of states in a group, mirror copies included.
    pub fn multiplicity(&self, group: usize) -> usize {
        self.groups[group]
            .iter()
            .map(|&i| self.pairs[i].mirrored_count(self.l))
            .sum()
    }

    pub fn group_of(&self, pair: usize) -> usize {
        self.groups
            .iter()
            .position(|g| g.contains(&pair))
            .expect("every pair belongs to a group")
    }

    /// Eigenvalues found in one sector, ascending.
    pub fn sector_energies(&self, n_up: usize) -> Vec<f64> {
        self.pairs
            .iter()
            .filter(|p| p.n_up == n_up)
            .map(|p| p.energy)
            .collect()
    }
}

/// One of the lowest levels, resolved to a representative state.
#[derive(Debug, Clone)]
pub struct Level {
    pub level: usize,
    /// Index into [`SpectrumSlice::pairs`].
    pub representative: usize,
    pub group: usize,
    pub multiplicity: usize,
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct LowLevels {
    pub slice: SpectrumSlice,
    pub levels: Vec<Level>,
    pub tie_break: TieBreak,
}

impl LowLevels {
    pub fn representative(&self, level: usize) -> &EigenPair {
        &self.slice.pairs[self.levels[level].representative]
    }

    pub fn energy(&self, level: usize) -> f64 {
        self.representative(level).energy
    }

    /// Pairs in the degenerate group of `level`.
    pub fn group_members(&self, level: usize) -> impl Iterator<Item = &EigenPair> {
        self.slice.groups[self.levels[level].group]
            .iter()
            .map(move |&i| &self.slice.pairs[i])
    }
}

/// Ground state and first excited state, see [`low_levels`].
pub fn two_lowest_states(
    params: &LadderParams,
    scan: SectorScan,
    tie_break: TieBreak,
    opts: &SolverOptions,
) -> Result<LowLevels> {
    low_levels(params, 2, scan, tie_break, opts, None)
}

fn sector_seed(opts: &SolverOptions, params: &LadderParams, n_up: usize) -> SolverOptions {
    SolverOptions {
        seed: derive_seed(
            opts.seed,
            &[params.l() as u64, params.theta().to_bits(), n_up as u64],
        ),
        ..opts.clone()
    }
}

fn solve_sector(
    params: &LadderParams,
    basis: &SectorBasis,
    count: usize,
    opts: &SolverOptions,
    cache: Option<&VectorCache>,
) -> Result<Vec<RitzPair>> {
    let h = Hamiltonian::new(*params, basis)?;
    let count = count.min(basis.dim());
    if let Some(cache) = cache {
        if let Some(vectors) = cache.load_levels(params, basis.n_up(), basis.dim(), count)? {
            return Ok(vectors
                .into_iter()
                .map(|v| {
                    let (energy, residual) = rayleigh_residual(&h, &v);
                    RitzPair {
                        energy,
                        vector: v,
                        residual,
                    }
                })
                .collect());
        }
    }
    let pairs = lowest_complete(&h, count, &sector_seed(opts, params, basis.n_up()))?;
    if let Some(cache) = cache {
        let vectors: Vec<&[f64]> = pairs.iter().map(|p| p.vector.as_slice()).collect();
        cache.store_levels(params, basis.n_up(), &vectors)?;
    }
    Ok(pairs)
}

/// The `count` lowest levels of the ladder at `params`.
///
/// Level `ℓ` is the `ℓ`-th state of the `S^z = 0` sector. The sector solve is
/// extended until its highest level is complete, and the rest of each level's
/// degenerate group is collected from the other sectors according to `scan`.
pub fn low_levels(
    params: &LadderParams,
    count: usize,
    scan: SectorScan,
    tie_break: TieBreak,
    opts: &SolverOptions,
    cache_dir: Option<&Path>,
) -> Result<LowLevels> {
    if count == 0 {
        return Err(Error::Precondition("at least one level must be requested".into()));
    }
    let l = params.l();
    let cache = cache_dir.map(VectorCache::new).transpose()?;
    let center = enumerate_sector(l, l)?;
    let zero = solve_sector(params, &center, count, opts, cache.as_ref())?;
    if zero.len() < count {
        return Err(Error::Precondition(format!(
            "only {} states available in the S^z = 0 sector",
            zero.len()
        )));
    }

    let mut pairs = Vec::new();
    let mut spins = Vec::with_capacity(zero.len());
    for (level, p) in zero.into_iter().enumerate() {
        let s = total_spin(&center, &p.vector)?;
        spins.push(s);
        pairs.push(EigenPair {
            energy: p.energy,
            n_up: l,
            vector: p.vector,
            residual: p.residual,
            total_spin: s,
            level,
        });
    }

    match scan {
        SectorScan::Multiplet => {
            let mut members = Vec::new();
            for p in &pairs {
                members.extend(raise_multiplet(params, &center, p)?);
            }
            pairs.extend(members);
        }
        SectorScan::All => {
            let top = pairs.last().map(|p| p.energy).unwrap_or(f64::INFINITY);
            let zero_levels: Vec<(f64, f64)> = pairs.iter().map(|p| (p.energy, p.total_spin)).collect();
            for n_up in l + 1..=2 * l {
                let basis = enumerate_sector(l, n_up)?;
                for p in solve_sector(params, &basis, count, opts, cache.as_ref())? {
                    let s = total_spin(&basis, &p.vector)?;
                    // attach to the S^z = 0 level with matching energy and spin
                    let level = zero_levels
                        .iter()
                        .position(|&(e, zs)| {
                            (e - p.energy).abs() < opts.degeneracy_tol && (zs - s).abs() < 0.5
                        })
                        .unwrap_or(usize::MAX);
                    if p.energy > top + opts.degeneracy_tol && level == usize::MAX {
                        continue;
                    }
                    pairs.push(EigenPair {
                        energy: p.energy,
                        n_up,
                        vector: p.vector,
                        residual: p.residual,
                        total_spin: s,
                        level,
                    });
                }
            }
        }
    }

    let slice = SpectrumSlice::new(l, pairs, opts.degeneracy_tol);
    let mut levels = Vec::with_capacity(count);
    for level in 0..count {
        let zero_index = slice
            .pairs
            .iter()
            .position(|p| p.n_up == l && p.level == level)
            .expect("every level has an S^z = 0 member");
        let group = slice.group_of(zero_index);
        let representative = match tie_break {
            TieBreak::MinAbsSz | TieBreak::Average => zero_index,
            TieBreak::MaxPolarized => slice
                .pairs
                .iter()
                .enumerate()
                .filter(|(_, p)| p.level == level)
                .max_by_key(|(_, p)| p.n_up)
                .map(|(i, _)| i)
                .unwrap_or(zero_index),
        };
        let multiplicity = slice.multiplicity(group);
        levels.push(Level {
            level,
            representative,
            group,
            multiplicity,
            degenerate: multiplicity > 1,
        });
    }

    Ok(LowLevels {
        slice,
        levels,
        tie_break,
    })
}

/// Members `S^z = 1, 2, …` of the multiplet of an `S^z = 0` eigenstate,
/// generated by repeated application of `S^+`.
fn raise_multiplet(params: &LadderParams, center: &SectorBasis, p: &EigenPair) -> Result<Vec<EigenPair>> {
    let l = params.l();
    let mut out = Vec::new();
    let mut current_basis = center.clone();
    let mut current = p.vector.clone();
    for n_up in l + 1..=2 * l {
        let next_basis = enumerate_sector(l, n_up)?;
        let mut v = raise(&current_basis, &next_basis, &current)?;
        // ||S^+ |S, m>||^2 = S(S+1) - m(m+1) >= 2(m+1) whenever S > m
        if vector::norm(&v) < 1e-4 {
            break;
        }
        vector::normalize(&mut v);
        vector::canonical_sign(&mut v);
        let h = Hamiltonian::new(*params, &next_basis)?;
        let (energy, residual) = rayleigh_residual(&h as &dyn LinearOperator, &v);
        out.push(EigenPair {
            energy,
            n_up,
            vector: v.clone(),
            residual,
            total_spin: p.total_spin,
            level: p.level,
        });
        current = v;
        current_basis = next_basis;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ferromagnetic_multiplet_l4() {
        let params = LadderParams::new(4, -0.75 * PI).unwrap();
        let e_fm = params.ferromagnetic_energy();
        for scan in [SectorScan::Multiplet, SectorScan::All] {
            let levels = two_lowest_states(&params, scan, TieBreak::MinAbsSz, &SolverOptions::default()).unwrap();
            let ground = &levels.levels[0];
            assert_eq!(ground.multiplicity, 9, "{scan:?}");
            assert!(ground.degenerate);
            assert!((levels.energy(0) - e_fm).abs() < 1e-10);
            assert_eq!(levels.representative(0).n_up, 4);
            assert!((levels.representative(0).total_spin - 4.0).abs() < 1e-9);
            assert!(levels.energy(0) <= levels.energy(1));
        }
        let polarized =
            two_lowest_states(&params, SectorScan::Multiplet, TieBreak::MaxPolarized, &SolverOptions::default()).unwrap();
        assert_eq!(polarized.representative(0).n_up, 8);
    }

    #[test]
    fn rung_singlet_ground_state_is_unique() {
        let params = LadderParams::new(4, 0.0).unwrap();
        let levels = two_lowest_states(&params, SectorScan::All, TieBreak::MinAbsSz, &SolverOptions::default()).unwrap();
        assert!(!levels.levels[0].degenerate);
        assert_eq!(levels.representative(0).n_up, 4);
        assert!(levels.representative(0).total_spin.abs() < 1e-9);
        assert!(levels.energy(0) < levels.energy(1));
    }

    #[test]
    fn scans_agree_at_l6() {
        let params = LadderParams::new(6, 0.2 * PI).unwrap();
        let opts = SolverOptions::default();
        let a = low_levels(&params, 3, SectorScan::Multiplet, TieBreak::MinAbsSz, &opts, None).unwrap();
        let b = low_levels(&params, 3, SectorScan::All, TieBreak::MinAbsSz, &opts, None).unwrap();
        for lv in 0..3 {
            assert!((a.energy(lv) - b.energy(lv)).abs() < 1e-10);
            assert_eq!(a.levels[lv].multiplicity, b.levels[lv].multiplicity, "level {lv}");
        }
    }

    #[test]
    fn tie_break_parsing() {
        for t in [TieBreak::MinAbsSz, TieBreak::MaxPolarized, TieBreak::Average] {
            assert_eq!(t.to_string().parse::<TieBreak>().unwrap(), t);
        }
        assert!("closest".parse::<TieBreak>().is_err());
    }
}
