//! Two-spin reduced density matrices of sector-resident states.
//!
//! Qubit order inside `ρ`: the first tensor factor is the first-listed site of
//! the bond, the second factor the other site; the basis order is
//! `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩`.

use nalgebra::{Complex, Matrix4, SymmetricEigen};

use crate::eigensolver::{LowLevels, TieBreak};
use crate::error::{Error, Result};
use crate::lattice::{enumerate_sector, site_index, BasisState, SectorBasis, SiteId};

pub type C64 = Complex<f64>;

/// Bond families, labelled as in the tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BondFamily {
    Rung,
    Leg,
    Diag,
}

impl BondFamily {
    pub const ALL: [BondFamily; 3] = [BondFamily::Rung, BondFamily::Leg, BondFamily::Diag];

    pub fn at(self, i: usize) -> BondKind {
        match self {
            BondFamily::Rung => BondKind::Rung(i),
            BondFamily::Leg => BondKind::Leg(i),
            BondFamily::Diag => BondKind::Diagonal(i),
        }
    }
}

impl std::fmt::Display for BondFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BondFamily::Rung => "rung",
            BondFamily::Leg => "leg",
            BondFamily::Diag => "diag",
        })
    }
}

impl std::str::FromStr for BondFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rung" => Ok(BondFamily::Rung),
            "leg" => Ok(BondFamily::Leg),
            "diag" | "diagonal" => Ok(BondFamily::Diag),
            other => Err(Error::Domain(format!("unknown bond {other:?}"))),
        }
    }
}

/// A two-spin subsystem with 1-based rung index; rung `L + 1` wraps to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BondKind {
    /// `(u,i)`, `(d,i)`
    Rung(usize),
    /// `(u,i)`, `(u,i+1)`
    Leg(usize),
    /// `(u,i)`, `(d,i+1)`
    Diagonal(usize),
}

impl BondKind {
    pub fn sites(self, l: usize) -> (SiteId, SiteId) {
        match self {
            BondKind::Rung(i) => (SiteId::upper(i), SiteId::lower(i)),
            BondKind::Leg(i) => (SiteId::upper(i), SiteId::upper(i).next_rung(l)),
            BondKind::Diagonal(i) => (SiteId::upper(i), SiteId::lower(i).next_rung(l)),
        }
    }

    pub fn bit_indices(self, l: usize) -> Result<(usize, usize)> {
        let (a, b) = self.sites(l);
        Ok((site_index(a, l)?, site_index(b, l)?))
    }
}

/// A 4×4 two-qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitDM(pub Matrix4<C64>);

impl TwoQubitDM {
    pub fn from_real(m: [[f64; 4]; 4]) -> Self {
        Self(Matrix4::from_fn(|r, c| C64::new(m[r][c], 0.0)))
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.0[(i, i)].re).sum()
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let h = (self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(h);
        let mut e = [0.0; 4];
        for (slot, v) in e.iter_mut().zip(eig.eigenvalues.iter()) {
            *slot = *v;
        }
        e.sort_by(|a, b| a.total_cmp(b));
        e
    }

    /// Checks Hermiticity, unit trace and positivity.
    pub fn validate(&self) -> Result<()> {
        let herm = (self.0 - self.0.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > 1e-12 {
            return Err(Error::Validation(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!("trace {tr} differs from 1")));
        }
        let min = self.eigenvalues()[0];
        if min < -1e-10 {
            return Err(Error::Validation(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// The state with every spin reversed, `(X⊗X) ρ (X⊗X)`.
    pub fn spin_flipped(&self) -> Self {
        Self(Matrix4::from_fn(|r, c| self.0[(3 - r, 3 - c)]))
    }

    pub fn average(items: &[TwoQubitDM]) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::Precondition("cannot average zero density matrices".into()));
        }
        let sum = items.iter().fold(Matrix4::zeros(), |acc, m| acc + m.0);
        Ok(Self(sum / C64::new(items.len() as f64, 0.0)))
    }

    /// Single-qubit marginals `(ρ_A, ρ_B)` as 2×2 matrices.
    pub fn marginals(&self) -> (nalgebra::Matrix2<C64>, nalgebra::Matrix2<C64>) {
        let m = &self.0;
        let a = nalgebra::Matrix2::from_fn(|r, c| m[(2 * r, 2 * c)] + m[(2 * r + 1, 2 * c + 1)]);
        let b = nalgebra::Matrix2::from_fn(|r, c| m[(r, c)] + m[(2 + r, 2 + c)]);
        (a, b)
    }
}

/// The six real parameters of an X-shaped density matrix:
///
/// ```text
/// u . . w
/// . x z .
/// . z y .
/// w . . v
/// ```
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TwoQubitX {
    pub u: f64,
    pub x: f64,
    pub y: f64,
    pub v: f64,
    pub z: f64,
    pub w: f64,
}

impl TwoQubitX {
    /// Validated constructor.
    pub fn new(u: f64, x: f64, y: f64, v: f64, z: f64, w: f64) -> Result<Self> {
        let s = Self { u, x, y, v, z, w };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { u, x, y, v, z, w } = *self;
        if [u, x, y, v, z, w].iter().any(|t| !t.is_finite()) {
            return Err(Error::Validation("non-finite X-state parameter".into()));
        }
        if [u, x, y, v].iter().any(|&d| d < -1e-10) {
            return Err(Error::Validation("negative diagonal entry".into()));
        }
        if (u + x + y + v - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!("trace {} differs from 1", u + x + y + v)));
        }
        if z.abs() > (x.max(0.0) * y.max(0.0)).sqrt() + 1e-10 {
            return Err(Error::Validation(format!("|z| = {} exceeds sqrt(xy)", z.abs())));
        }
        if w.abs() > (u.max(0.0) * v.max(0.0)).sqrt() + 1e-10 {
            return Err(Error::Validation(format!("|w| = {} exceeds sqrt(uv)", w.abs())));
        }
        Ok(())
    }

    pub fn to_dm(&self) -> TwoQubitDM {
        let Self { u, x, y, v, z, w } = *self;
        TwoQubitDM::from_real([
            [u, 0.0, 0.0, w],
            [0.0, x, z, 0.0],
            [0.0, z, y, 0.0],
            [w, 0.0, 0.0, v],
        ])
    }
}

fn on_x_pattern(r: usize, c: usize) -> bool {
    r == c || r + c == 3
}

/// Extracts the X-state parameters, failing if any element off the X pattern
/// (or an imaginary part of `z`, `w`) exceeds `tol`.
pub fn to_x_form(rho: &TwoQubitDM, tol: f64) -> Result<TwoQubitX> {
    let m = &rho.0;
    for r in 0..4 {
        for c in 0..4 {
            let mag = if on_x_pattern(r, c) {
                m[(r, c)].im.abs() * if r == c { 0.0 } else { 1.0 }
            } else {
                m[(r, c)].norm()
            };
            if mag > tol {
                return Err(Error::XFormViolation {
                    magnitude: mag,
                    row: r,
                    col: c,
                });
            }
        }
    }
    Ok(TwoQubitX {
        u: m[(0, 0)].re,
        x: m[(1, 1)].re,
        y: m[(2, 2)].re,
        v: m[(3, 3)].re,
        z: 0.5 * (m[(1, 2)].re + m[(2, 1)].re),
        w: 0.5 * (m[(0, 3)].re + m[(3, 0)].re),
    })
}

/// Position of `(bit_a, bit_b)` in the `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩` order.
#[inline]
fn pair_index(a_up: bool, b_up: bool) -> usize {
    2 * usize::from(!a_up) + usize::from(!b_up)
}

/// Reduced density matrix of `bond` for a real state vector living in `basis`.
///
/// One pass over the vector: each basis state contributes to the diagonal and,
/// when the two spins are antiparallel, to the coherence with the state that
/// has them exchanged.
pub fn partial_trace_two(vector: &[f64], basis: &SectorBasis, bond: BondKind) -> Result<TwoQubitDM> {
    if vector.len() != basis.dim() {
        return Err(Error::Precondition(format!(
            "vector of length {} does not match sector dimension {}",
            vector.len(),
            basis.dim()
        )));
    }
    let (sa, sb) = bond.bit_indices(basis.l())?;
    let mask = (1u64 << sa) | (1u64 << sb);
    let mut acc = [[0.0f64; 4]; 4];
    for (k, &amp) in vector.iter().enumerate() {
        if amp == 0.0 {
            continue;
        }
        let s = basis.state(k);
        let p = pair_index(s.is_up(sa), s.is_up(sb));
        acc[p][p] += amp * amp;
        if s.is_up(sa) != s.is_up(sb) {
            let t = BasisState(s.0 ^ mask);
            let q = pair_index(t.is_up(sa), t.is_up(sb));
            acc[p][q] += amp * vector[basis.rank_unchecked(t)];
        }
    }
    Ok(TwoQubitDM::from_real(acc))
}

/// Reduced density matrix of one low-lying level under its tie-break rule.
///
/// With [`TieBreak::Average`] the matrices of every state in the level's
/// degenerate group are averaged with equal weights; members with `n_up > L`
/// stand in for their `S^z → -S^z` mirrors through [`TwoQubitDM::spin_flipped`].
pub fn level_density(levels: &LowLevels, level: usize, bond: BondKind) -> Result<TwoQubitDM> {
    let l = levels.slice.l;
    match levels.tie_break {
        TieBreak::MinAbsSz | TieBreak::MaxPolarized => {
            let rep = levels.representative(level);
            let basis = enumerate_sector(l, rep.n_up)?;
            partial_trace_two(&rep.vector, &basis, bond)
        }
        TieBreak::Average => {
            let mut items = Vec::new();
            for pair in levels.group_members(level) {
                let basis = enumerate_sector(l, pair.n_up)?;
                let rho = partial_trace_two(&pair.vector, &basis, bond)?;
                items.push(rho);
                if pair.n_up != l {
                    items.push(rho.spin_flipped());
                }
            }
            TwoQubitDM::average(&items)
        }
    }
}
