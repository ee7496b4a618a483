//! Site labelling on the L×2 ladder and fixed-magnetization computational bases.
//!
//! Sites are packed into the bits of a `u64`: the spin on leg `leg` of rung `i`
//! (1-based) sits at bit `2(i-1) + leg`, with the upper leg at offset 0 and the
//! lower leg at offset 1. A set bit is spin up.
//!
//! Since the Hamiltonian conserves total `S^z`, states are grouped into sectors
//! labelled by the number of up spins `n_up`; the physical magnetization is
//! `S^z = n_up - L`.

use crate::error::{Error, Result};

/// Largest supported ladder length. The rank tables hold `2^L` entries each and
/// the largest sector at this size already has ~6·10^8 states.
pub const MAX_RUNGS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Leg {
    Upper,
    Lower,
}

impl Leg {
    fn offset(self) -> usize {
        match self {
            Leg::Upper => 0,
            Leg::Lower => 1,
        }
    }
}

/// A site `(leg, rung)` with a 1-based rung label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SiteId {
    pub leg: Leg,
    pub rung: usize,
}

impl SiteId {
    pub fn new(leg: Leg, rung: usize) -> Self {
        Self { leg, rung }
    }

    pub fn upper(rung: usize) -> Self {
        Self::new(Leg::Upper, rung)
    }

    pub fn lower(rung: usize) -> Self {
        Self::new(Leg::Lower, rung)
    }

    /// The same leg on the next rung, wrapping rung `L` back to rung 1.
    pub fn next_rung(self, l: usize) -> Self {
        Self::new(self.leg, self.rung % l + 1)
    }
}

/// Checks that `l` is a supported ladder length.
pub fn check_ladder_length(l: usize) -> Result<()> {
    if l % 2 == 1 {
        return Err(Error::OddLadder(l));
    }
    if l < 4 {
        return Err(Error::LadderTooShort(l));
    }
    if l > MAX_RUNGS {
        return Err(Error::Capacity(format!(
            "ladder length {l} exceeds the supported maximum of {MAX_RUNGS} rungs"
        )));
    }
    Ok(())
}

/// Bit position of `site` on a ladder of `l` rungs.
pub fn site_index(site: SiteId, l: usize) -> Result<usize> {
    if site.rung == 0 || site.rung > l {
        return Err(Error::Domain(format!(
            "rung {} outside [1, {l}]",
            site.rung
        )));
    }
    Ok(2 * (site.rung - 1) + site.leg.offset())
}

/// Inverse of [`site_index`].
pub fn site_at(index: usize, l: usize) -> Result<SiteId> {
    if index >= 2 * l {
        return Err(Error::Domain(format!("bit index {index} outside [0, {})", 2 * l)));
    }
    let leg = if index % 2 == 0 { Leg::Upper } else { Leg::Lower };
    Ok(SiteId::new(leg, index / 2 + 1))
}

/// A computational basis state: bit `b` set means the spin at site `b` is up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BasisState(pub u64);

impl BasisState {
    #[inline]
    pub fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn is_up(self, site: usize) -> bool {
        (self.0 >> site) & 1 == 1
    }

    pub fn fully_polarized(l: usize) -> Self {
        BasisState(low_mask(2 * l))
    }
}

#[inline]
pub(crate) fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Number of up spins among the low `2L` bits.
pub fn sector_of(state: BasisState, l: usize) -> usize {
    (state.0 & low_mask(2 * l)).count_ones() as usize
}

/// Binomial coefficient, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    Some(acc as u64)
}

/// Rank of `bits` among all patterns with the same popcount, in ascending
/// integer order (the combinatorial number system).
pub fn combinatorial_rank(bits: u64) -> u64 {
    let mut rank = 0;
    let mut seen = 0;
    let mut rest = bits;
    while rest != 0 {
        let pos = rest.trailing_zeros() as u64;
        seen += 1;
        rank += binomial(pos, seen).expect("rank of a 64-bit pattern fits in u64");
        rest &= rest - 1;
    }
    rank
}

/// All states of one magnetization sector, sorted ascending, with O(1) ranking.
///
/// Ranking uses two tables over the upper and lower `L` bits: a state's rank
/// is the number of sector states with a smaller upper half plus the rank of
/// its lower half among `L`-bit patterns of the same popcount.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    l: usize,
    n_up: usize,
    states: Vec<BasisState>,
    hi_start: Vec<u64>,
    lo_rank: Vec<u32>,
}

impl SectorBasis {
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn n_up(&self) -> usize {
        self.n_up
    }

    pub fn n_sites(&self) -> usize {
        2 * self.l
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// Total `S^z` of every state in the sector.
    pub fn magnetization(&self) -> i64 {
        self.n_up as i64 - self.l as i64
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    #[inline]
    pub fn state(&self, rank: usize) -> BasisState {
        self.states[rank]
    }

    pub fn contains(&self, state: BasisState) -> bool {
        state.0 & !low_mask(2 * self.l) == 0 && state.0.count_ones() as usize == self.n_up
    }

    /// Rank of `state`, or `None` when it lies outside the sector.
    pub fn index_of(&self, state: BasisState) -> Option<usize> {
        if self.contains(state) {
            Some(self.rank_unchecked(state))
        } else {
            None
        }
    }

    /// Rank of a state known to belong to this sector.
    #[inline]
    pub fn rank_unchecked(&self, state: BasisState) -> usize {
        debug_assert!(self.contains(state), "state {:#b} outside sector", state.0);
        let lo = state.0 & low_mask(self.l);
        let hi = state.0 >> self.l;
        (self.hi_start[hi as usize] + u64::from(self.lo_rank[lo as usize])) as usize
    }

    /// Rank by binary search over the sorted state list.
    pub fn index_by_search(&self, state: BasisState) -> Option<usize> {
        self.states.binary_search(&state).ok()
    }
}

/// Enumerates the sector of `n_up` up spins on a ladder of `l` rungs.
pub fn enumerate_sector(l: usize, n_up: usize) -> Result<SectorBasis> {
    check_ladder_length(l)?;
    let n_sites = 2 * l;
    if n_up > n_sites {
        return Err(Error::Domain(format!(
            "n_up = {n_up} outside [0, {n_sites}]"
        )));
    }
    let dim = binomial(n_sites as u64, n_up as u64)
        .filter(|&d| usize::try_from(d).is_ok() && d <= u64::from(u32::MAX))
        .ok_or_else(|| {
            Error::Capacity(format!("sector ({l}, {n_up}) does not fit the host index width"))
        })? as usize;

    let mut states = Vec::with_capacity(dim);
    if n_up == 0 {
        states.push(BasisState(0));
    } else {
        let limit = 1u64 << n_sites;
        let mut x = low_mask(n_up);
        while x < limit {
            states.push(BasisState(x));
            // Gosper's hack: next larger integer with the same popcount.
            let c = x & x.wrapping_neg();
            let r = x + c;
            x = (((r ^ x) >> 2) / c) | r;
        }
    }
    debug_assert_eq!(states.len(), dim);

    let half = 1usize << l;
    let mut lo_rank = vec![0u32; half];
    let mut per_popcount = vec![0u32; l + 1];
    for (lo, slot) in lo_rank.iter_mut().enumerate() {
        let p = lo.count_ones() as usize;
        *slot = per_popcount[p];
        per_popcount[p] += 1;
    }
    let mut hi_start = vec![0u64; half];
    let mut offset = 0u64;
    for (hi, slot) in hi_start.iter_mut().enumerate() {
        *slot = offset;
        let p = hi.count_ones() as usize;
        if p <= n_up && n_up - p <= l {
            offset += u64::from(per_popcount[n_up - p]);
        }
    }
    debug_assert_eq!(offset as usize, dim);

    Ok(SectorBasis {
        l,
        n_up,
        states,
        hi_start,
        lo_rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn site_index_anchors() {
        assert_eq!(site_index(SiteId::upper(1), 6).unwrap(), 0);
        assert_eq!(site_index(SiteId::lower(1), 6).unwrap(), 1);
        assert_eq!(site_index(SiteId::upper(3), 6).unwrap(), 4);
        assert!(matches!(site_index(SiteId::upper(0), 6), Err(Error::Domain(_))));
        assert!(matches!(site_index(SiteId::lower(7), 6), Err(Error::Domain(_))));
    }

    #[test]
    fn site_index_is_a_bijection() {
        for l in (4..=12).step_by(2) {
            let mut seen = vec![false; 2 * l];
            for rung in 1..=l {
                for leg in [Leg::Upper, Leg::Lower] {
                    let site = SiteId::new(leg, rung);
                    let b = site_index(site, l).unwrap();
                    assert!(!seen[b]);
                    seen[b] = true;
                    assert_eq!(site_at(b, l).unwrap(), site);
                }
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn rejects_short_and_odd_ladders() {
        assert!(matches!(enumerate_sector(2, 2), Err(Error::LadderTooShort(2))));
        assert!(matches!(enumerate_sector(5, 2), Err(Error::OddLadder(5))));
        assert!(matches!(enumerate_sector(4, 9), Err(Error::Domain(_))));
        assert!(matches!(enumerate_sector(18, 18), Err(Error::Capacity(_))));
    }

    #[test]
    fn small_sector_dimensions() {
        let empty = enumerate_sector(4, 0).unwrap();
        assert_eq!(empty.dim(), 1);
        assert_eq!(empty.states(), &[BasisState(0)]);
        assert_eq!(enumerate_sector(4, 4).unwrap().dim(), 70);
        assert_eq!(enumerate_sector(4, 8).unwrap().states(), &[BasisState(0xff)]);
    }

    #[test]
    #[ignore = "allocates the 2.7M-state sector"]
    fn largest_paper_sector() {
        assert_eq!(enumerate_sector(12, 12).unwrap().dim(), 2_704_156);
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(8, 4), Some(70));
        assert_eq!(binomial(24, 12), Some(2_704_156));
        assert_eq!(binomial(3, 5), Some(0));
        assert_eq!(binomial(64, 32), Some(1_832_624_140_942_590_534));
    }

    #[test]
    fn sector_of_counts_low_bits() {
        assert_eq!(sector_of(BasisState(0), 4), 0);
        assert_eq!(sector_of(BasisState(0xff), 4), 8);
        assert_eq!(sector_of(BasisState(0b1010_1010), 4), 4);
        assert_eq!(sector_of(BasisState(0x1ff), 4), 8);
    }

    #[test]
    fn rank_round_trip_exhaustive() {
        for l in [4, 6] {
            let mut total = 0;
            for n_up in 0..=2 * l {
                let basis = enumerate_sector(l, n_up).unwrap();
                assert_eq!(basis.dim() as u64, binomial(2 * l as u64, n_up as u64).unwrap());
                for (k, &s) in basis.states().iter().enumerate() {
                    assert_eq!(basis.index_of(s), Some(k));
                    assert_eq!(basis.index_by_search(s), Some(k));
                    assert_eq!(combinatorial_rank(s.0), k as u64);
                    assert_eq!(sector_of(s, l), n_up);
                }
                assert!(basis.states().windows(2).all(|w| w[0] < w[1]));
                total += basis.dim();
            }
            assert_eq!(total, 1 << (2 * l));
        }
    }

    #[test]
    fn rank_round_trip_sampled_l10() {
        let basis = enumerate_sector(10, 11).unwrap();
        for k in (0..basis.dim()).step_by(997) {
            let s = basis.state(k);
            assert_eq!(basis.index_of(s), Some(k));
            assert_eq!(combinatorial_rank(s.0), k as u64);
        }
        assert_eq!(basis.index_of(BasisState(0b111)), None);
    }
}
