//! Matrix-free Hamiltonian of the two-leg ladder with four-spin ring exchange:
//!
//! ```text
//! H = J_r Σ_i S_{u,i}·S_{d,i}
//!   + J_l Σ_i (S_{u,i}·S_{u,i+1} + S_{d,i}·S_{d,i+1})
//!   + K   Σ_i (P_{i,i+1} + P_{i,i+1}^{-1})
//! ```
//!
//! with `J_r = J_l = cos θ`, `K = sin θ` and periodic closure: rung `L + 1` is
//! rung 1, so bond `(L, 1)` closes each leg and plaquette `L` spans rungs `L`
//! and 1.
//!
//! The ring term is applied as the permutation it is. On the plaquette
//!
//! ```text
//!   a b        (u,i)   (u,i+1)
//!   d c        (d,i)   (d,i+1)
//! ```
//!
//! `P` sends the spin values `(a b / d c)` to `(d a / c b)` and `P^{-1}` sends
//! them to `(b c / a d)`.

use arrayvec::ArrayVec;
use nalgebra::DMatrix;

use crate::eigensolver::LinearOperator;
use crate::error::{Error, Result};
use crate::lattice::{check_ladder_length, site_index, BasisState, SectorBasis, SiteId};
use crate::vector;

/// Couplings of one point on the `J_r = J_l = cos θ`, `K = sin θ` circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderParams {
    l: usize,
    theta: f64,
    j_rung: f64,
    j_leg: f64,
    k_ring: f64,
}

impl LadderParams {
    /// `theta` in radians.
    pub fn new(l: usize, theta: f64) -> Result<Self> {
        check_ladder_length(l)?;
        if !theta.is_finite() {
            return Err(Error::Domain(format!("theta must be finite, got {theta}")));
        }
        let (s, c) = theta.sin_cos();
        Ok(Self {
            l,
            theta,
            j_rung: c,
            j_leg: c,
            k_ring: s,
        })
    }

    /// `theta_over_pi` in units of π, as used on every external surface.
    pub fn from_theta_over_pi(l: usize, theta_over_pi: f64) -> Result<Self> {
        Self::new(l, theta_over_pi * std::f64::consts::PI)
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn theta_over_pi(&self) -> f64 {
        self.theta / std::f64::consts::PI
    }

    pub fn j_rung(&self) -> f64 {
        self.j_rung
    }

    pub fn j_leg(&self) -> f64 {
        self.j_leg
    }

    pub fn k_ring(&self) -> f64 {
        self.k_ring
    }

    /// Energy of the fully polarized state, `L (3 cos θ / 4 + 2 sin θ)`.
    pub fn ferromagnetic_energy(&self) -> f64 {
        let l = self.l as f64;
        l * self.j_rung / 4.0 + 2.0 * l * self.j_leg / 4.0 + 2.0 * l * self.k_ring
    }
}

/// The four bit positions of plaquette `i`: `a = (u,i)`, `b = (u,i+1)`,
/// `c = (d,i+1)`, `d = (d,i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Plaquette {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
}

impl Plaquette {
    /// Plaquette between rung `i` and rung `i + 1` (periodic), 1-based.
    pub fn new(i: usize, l: usize) -> Result<Self> {
        check_ladder_length(l)?;
        let ua = SiteId::upper(i);
        let dd = SiteId::lower(i);
        Ok(Self {
            a: site_index(ua, l)?,
            b: site_index(ua.next_rung(l), l)?,
            c: site_index(dd.next_rung(l), l)?,
            d: site_index(dd, l)?,
        })
    }

    pub fn all(l: usize) -> Result<Vec<Self>> {
        (1..=l).map(|i| Self::new(i, l)).collect()
    }

    fn mask(&self) -> u64 {
        (1 << self.a) | (1 << self.b) | (1 << self.c) | (1 << self.d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingDirection {
    /// `P`: clockwise rotation of the four spins.
    Clockwise,
    /// `P^{-1}`.
    CounterClockwise,
}

/// Expansion of `(S_i · S_j)|state>` into at most two basis states.
pub fn heisenberg_apply(state: BasisState, i: usize, j: usize) -> ArrayVec<(BasisState, f64), 2> {
    debug_assert_ne!(i, j);
    let mut out = ArrayVec::new();
    if state.is_up(i) == state.is_up(j) {
        out.push((state, 0.25));
    } else {
        out.push((state, -0.25));
        out.push((BasisState(state.0 ^ ((1 << i) | (1 << j))), 0.5));
    }
    out
}

/// Applies `P` or `P^{-1}` on plaquette `p`; always a single state with amplitude 1.
#[inline]
pub fn ring_apply(state: BasisState, p: &Plaquette, direction: RingDirection) -> BasisState {
    let s = state.0;
    let va = (s >> p.a) & 1;
    let vb = (s >> p.b) & 1;
    let vc = (s >> p.c) & 1;
    let vd = (s >> p.d) & 1;
    let (na, nb, nc, nd) = match direction {
        RingDirection::Clockwise => (vd, va, vb, vc),
        RingDirection::CounterClockwise => (vb, vc, vd, va),
    };
    BasisState((s & !p.mask()) | (na << p.a) | (nb << p.b) | (nc << p.c) | (nd << p.d))
}

#[derive(Debug, Clone, Copy)]
struct Bond {
    mask: u64,
    coupling: f64,
}

/// Rung bonds followed by upper-leg and lower-leg bonds, as `(i, j)` bit pairs.
pub fn ladder_bonds(l: usize) -> Result<(Vec<(usize, usize)>, Vec<(usize, usize)>)> {
    check_ladder_length(l)?;
    let mut rungs = Vec::with_capacity(l);
    let mut legs = Vec::with_capacity(2 * l);
    for i in 1..=l {
        rungs.push((site_index(SiteId::upper(i), l)?, site_index(SiteId::lower(i), l)?));
    }
    for i in 1..=l {
        let u = SiteId::upper(i);
        legs.push((site_index(u, l)?, site_index(u.next_rung(l), l)?));
    }
    for i in 1..=l {
        let d = SiteId::lower(i);
        legs.push((site_index(d, l)?, site_index(d.next_rung(l), l)?));
    }
    Ok((rungs, legs))
}

/// The Hamiltonian restricted to one magnetization sector.
pub struct Hamiltonian<'a> {
    params: LadderParams,
    basis: &'a SectorBasis,
    bonds: Vec<Bond>,
    plaquettes: Vec<Plaquette>,
}

impl<'a> Hamiltonian<'a> {
    pub fn new(params: LadderParams, basis: &'a SectorBasis) -> Result<Self> {
        if params.l() != basis.l() {
            return Err(Error::Precondition(format!(
                "parameters for L = {} applied to a basis for L = {}",
                params.l(),
                basis.l()
            )));
        }
        let (rungs, legs) = ladder_bonds(params.l())?;
        let bonds = rungs
            .iter()
            .map(|&(i, j)| Bond {
                mask: (1 << i) | (1 << j),
                coupling: params.j_rung(),
            })
            .chain(legs.iter().map(|&(i, j)| Bond {
                mask: (1 << i) | (1 << j),
                coupling: params.j_leg(),
            }))
            .collect();
        Ok(Self {
            params,
            basis,
            bonds,
            plaquettes: Plaquette::all(params.l())?,
        })
    }

    pub fn params(&self) -> &LadderParams {
        &self.params
    }

    pub fn basis(&self) -> &SectorBasis {
        self.basis
    }

    /// `(H x)[row]`, gathered from the states connected to row `row`.
    #[inline]
    fn row(&self, row: usize, x: &[f64]) -> f64 {
        let basis = self.basis;
        let s = basis.state(row).0;
        let mut diag = 0.0;
        let mut acc = 0.0;
        for bond in &self.bonds {
            let pair = s & bond.mask;
            if pair == 0 || pair == bond.mask {
                diag += 0.25 * bond.coupling;
            } else {
                diag -= 0.25 * bond.coupling;
                let t = BasisState(s ^ bond.mask);
                acc += 0.5 * bond.coupling * x[basis.rank_unchecked(t)];
            }
        }
        let k = self.params.k_ring();
        if k != 0.0 {
            for p in &self.plaquettes {
                for dir in [RingDirection::Clockwise, RingDirection::CounterClockwise] {
                    let t = ring_apply(BasisState(s), p, dir);
                    if t.0 == s {
                        diag += k;
                    } else {
                        acc += k * x[basis.rank_unchecked(t)];
                    }
                }
            }
        }
        diag * x[row] + acc
    }
}

impl LinearOperator for Hamiltonian<'_> {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        vector::fill_rows(y, |row| self.row(row, x));
    }
}

fn check_len(basis: &SectorBasis, v: &[f64]) -> Result<()> {
    if v.len() != basis.dim() {
        return Err(Error::Precondition(format!(
            "vector of length {} does not match sector dimension {}",
            v.len(),
            basis.dim()
        )));
    }
    Ok(())
}

/// `H v` within the sector of `basis`.
pub fn apply_h(params: &LadderParams, basis: &SectorBasis, v: &[f64]) -> Result<Vec<f64>> {
    check_len(basis, v)?;
    let h = Hamiltonian::new(*params, basis)?;
    let mut out = vec![0.0; v.len()];
    h.apply(v, &mut out);
    Ok(out)
}

/// `<v|H|v>` for a unit vector `v`.
pub fn energy_expectation(params: &LadderParams, basis: &SectorBasis, v: &[f64]) -> Result<f64> {
    check_len(basis, v)?;
    let n = vector::norm(v);
    if (n - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!("vector norm {n} is not 1")));
    }
    let hv = apply_h(params, basis, v)?;
    Ok(vector::dot(v, &hv))
}

/// Total raising operator `S^+ = Σ_i S_i^+` from sector `n_up` to `n_up + 1`.
pub fn raise(from: &SectorBasis, to: &SectorBasis, v: &[f64]) -> Result<Vec<f64>> {
    check_len(from, v)?;
    if to.l() != from.l() || to.n_up() != from.n_up() + 1 {
        return Err(Error::Precondition(format!(
            "raising needs sectors n_up and n_up + 1, got {} and {}",
            from.n_up(),
            to.n_up()
        )));
    }
    let mut out = vec![0.0; to.dim()];
    vector::fill_rows(&mut out, |row| {
        let t = to.state(row).0;
        let mut acc = 0.0;
        let mut rest = t;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            acc += v[from.rank_unchecked(BasisState(t ^ bit))];
            rest ^= bit;
        }
        acc
    });
    Ok(out)
}

/// `S^2 v` within one sector, as `3N/4 + 2 Σ_{i<j} S_i·S_j`.
pub fn apply_total_spin_squared(basis: &SectorBasis, v: &[f64]) -> Result<Vec<f64>> {
    check_len(basis, v)?;
    let n = basis.n_sites();
    let mut out = vec![0.0; v.len()];
    vector::fill_rows(&mut out, |row| {
        let s = basis.state(row);
        let mut acc = 0.75 * n as f64 * v[row];
        for i in 0..n {
            for j in i + 1..n {
                for (t, amp) in heisenberg_apply(s, i, j) {
                    acc += 2.0 * amp * v[basis.rank_unchecked(t)];
                }
            }
        }
        acc
    });
    Ok(out)
}

/// Total spin `S` of an eigenvector from `||S^+ v||^2 = S(S+1) - m(m+1)`.
///
/// Returns the (generally non-integer) solution of `S(S+1) = ||S^+ v||^2 + m(m+1)`.
pub fn total_spin(basis: &SectorBasis, v: &[f64]) -> Result<f64> {
    let m = basis.magnetization() as f64;
    let s2 = if basis.n_up() == basis.n_sites() {
        m * (m + 1.0)
    } else {
        let up = crate::lattice::enumerate_sector(basis.l(), basis.n_up() + 1)?;
        let raised = raise(basis, &up, v)?;
        vector::dot(&raised, &raised) + m * (m + 1.0)
    };
    Ok(0.5 * ((1.0 + 4.0 * s2.max(0.0)).sqrt() - 1.0))
}

/// A four-spin ring term: target state and amplitude of `P` or `P^{-1}`
/// acting on a basis state.
pub type RingTerm = dyn Fn(BasisState, &Plaquette, RingDirection) -> (BasisState, f64) + Sync;

/// [`ring_apply`] with unit amplitude.
pub fn standard_ring(state: BasisState, p: &Plaquette, direction: RingDirection) -> (BasisState, f64) {
    (ring_apply(state, p, direction), 1.0)
}

/// Dense matrix of `H` on the full `4^L`-dimensional space, scattered directly
/// from [`heisenberg_apply`] and [`ring_apply`]. Intended for small `L`.
pub fn dense_full_space(params: &LadderParams) -> Result<DMatrix<f64>> {
    dense_full_space_with(params, &standard_ring)
}

/// [`dense_full_space`] with a replacement ring term.
pub fn dense_full_space_with(params: &LadderParams, ring: &RingTerm) -> Result<DMatrix<f64>> {
    let l = params.l();
    if l > 6 {
        return Err(Error::Capacity(format!("full-space dense matrix for L = {l}")));
    }
    let dim = 1usize << (2 * l);
    let (rungs, legs) = ladder_bonds(l)?;
    let plaquettes = Plaquette::all(l)?;
    let mut h = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let s = BasisState(col as u64);
        for &(i, j) in &rungs {
            for (t, amp) in heisenberg_apply(s, i, j) {
                h[(t.0 as usize, col)] += params.j_rung() * amp;
            }
        }
        for &(i, j) in &legs {
            for (t, amp) in heisenberg_apply(s, i, j) {
                h[(t.0 as usize, col)] += params.j_leg() * amp;
            }
        }
        for p in &plaquettes {
            for dir in [RingDirection::Clockwise, RingDirection::CounterClockwise] {
                let (t, amp) = ring(s, p, dir);
                h[(t.0 as usize, col)] += params.k_ring() * amp;
            }
        }
    }
    Ok(h)
}

/// Dense total `S²` on the full space of `n_sites` spins.
pub fn dense_total_spin_squared(n_sites: usize) -> Result<DMatrix<f64>> {
    if n_sites > 12 {
        return Err(Error::Capacity(format!("full-space S^2 for {n_sites} spins")));
    }
    let dim = 1usize << n_sites;
    let mut m = DMatrix::identity(dim, dim) * (0.75 * n_sites as f64);
    for col in 0..dim {
        let s = BasisState(col as u64);
        for i in 0..n_sites {
            for j in i + 1..n_sites {
                for (t, amp) in heisenberg_apply(s, i, j) {
                    m[(t.0 as usize, col)] += 2.0 * amp;
                }
            }
        }
    }
    Ok(m)
}
