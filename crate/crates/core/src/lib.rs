//! Matrix-free exact diagonalization of the spin-1/2 two-leg ladder with
//! four-spin ring exchange, and two-spin correlation measures of its low
//! lying eigenstates.

pub mod cache;
pub mod correlations;
pub mod detect;
pub mod eigensolver;
pub mod error;
pub mod hamiltonian;
pub mod lattice;
pub mod reduced;
pub mod sweep;
pub mod validation;
pub mod vector;

pub use error::{Error, Result};
pub use hamiltonian::LadderParams;
pub use lattice::{enumerate_sector, SectorBasis};
