//! Lowest eigenpairs of large real symmetric operators.
//!
//! [`lanczos_lowest`] runs a thick-restart Lanczos iteration with full
//! reorthogonalization. A single Krylov sequence cannot resolve an eigenvalue's
//! multiplicity, so every converged set is followed by a deflated probe run in
//! the orthogonal complement of the vectors found so far; any state the probe
//! finds below (or degenerate with) the current highest level is refined and
//! inserted. Operators of dimension up to [`SolverOptions::dense_threshold`]
//! are diagonalized densely instead.

mod spectrum;

pub use spectrum::{
    low_levels, two_lowest_states, EigenPair, Level, LowLevels, SectorScan, SpectrumSlice,
    TieBreak,
};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::vector;

/// A real symmetric operator applied matrix-free.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = A x`; `y` is overwritten.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Wraps a closure as a [`LinearOperator`].
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F> FnOperator<F>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> LinearOperator for FnOperator<F>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (r, slot) in y.iter_mut().enumerate() {
            *slot = self.row(r).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

/// Assembles the dense matrix of `op` column by column.
pub fn dense_matrix(op: &dyn LinearOperator) -> DMatrix<f64> {
    let n = op.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for c in 0..n {
        e[c] = 1.0;
        op.apply(&e, &mut col);
        e[c] = 0.0;
        for (r, v) in col.iter().enumerate() {
            m[(r, c)] = *v;
        }
    }
    m
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Convergence threshold on `||A y - θ y|| / max(1, |θ|_max)`.
    pub tol: f64,
    /// Looser threshold for the deflated degeneracy probe.
    pub probe_tol: f64,
    /// Operator applications allowed per run; default `5 k sqrt(dim)`,
    /// clamped to `[200, 10000]`.
    pub max_iterations: Option<usize>,
    /// Largest Krylov basis kept in memory.
    pub max_basis: usize,
    /// Soft cap on the bytes held by the Krylov basis and restart vectors.
    pub memory_budget: usize,
    /// Operators of at most this dimension are solved densely.
    pub dense_threshold: usize,
    /// Levels closer than this are treated as degenerate.
    pub degeneracy_tol: f64,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            probe_tol: 1e-6,
            max_iterations: None,
            max_basis: 64,
            memory_budget: 1_500_000_000,
            dense_threshold: 1024,
            degeneracy_tol: 1e-8,
            seed: 0x5eed,
        }
    }
}

impl SolverOptions {
    fn iteration_cap(&self, k: usize, dim: usize) -> usize {
        self.max_iterations.unwrap_or_else(|| {
            let n = 5.0 * k as f64 * (dim as f64).sqrt();
            (n.ceil() as usize).clamp(200, 10_000)
        })
    }

    fn basis_size(&self, nev: usize, available: usize, dim: usize) -> usize {
        let by_memory = (self.memory_budget / (8 * dim.max(1))).max(2 * nev + 6);
        // basis + tail + restart vectors ≈ 1.5 m
        let m = self.max_basis.min(by_memory * 2 / 3).max(nev + 6);
        m.min(available)
    }
}

/// An approximate eigenpair of a bare operator.
#[derive(Debug, Clone)]
pub struct RitzPair {
    pub energy: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

/// Rayleigh quotient and explicit residual `||A v - (v·Av) v||` of a unit vector.
pub fn rayleigh_residual(op: &dyn LinearOperator, v: &[f64]) -> (f64, f64) {
    let mut av = vec![0.0; v.len()];
    op.apply(v, &mut av);
    let e = vector::dot(v, &av);
    vector::axpy(-e, v, &mut av);
    (e, vector::norm(&av))
}

fn finalize(op: &dyn LinearOperator, mut v: Vec<f64>) -> RitzPair {
    vector::normalize(&mut v);
    vector::canonical_sign(&mut v);
    let (energy, residual) = rayleigh_residual(op, &v);
    RitzPair {
        energy,
        vector: v,
        residual,
    }
}

/// The `k` lowest eigenpairs by dense diagonalization.
pub fn dense_lowest(op: &dyn LinearOperator, k: usize) -> Vec<RitzPair> {
    let n = op.dim();
    let m = dense_matrix(op);
    let m = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order
        .into_iter()
        .take(k.min(n))
        .map(|i| finalize(op, eig.eigenvectors.column(i).iter().copied().collect()))
        .collect()
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Mixes extra words into a seed.
pub fn derive_seed(seed: u64, words: &[u64]) -> u64 {
    words.iter().fold(splitmix(seed), |acc, &w| splitmix(acc ^ w))
}

fn project_out(basis: &[&[f64]], w: &mut [f64]) {
    for b in basis {
        let c = vector::dot(b, w);
        vector::axpy(-c, b, w);
    }
}

fn random_unit(dim: usize, rng: &mut ChaCha8Rng, against: &[&[f64]]) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        project_out(against, &mut v);
        project_out(against, &mut v);
        if vector::normalize(&mut v) > 1e-8 {
            return v;
        }
    }
}

/// Thick-restart Lanczos for the `nev` lowest eigenpairs of `op` restricted to
/// the orthogonal complement of `locked`.
fn thick_restart(
    op: &dyn LinearOperator,
    nev: usize,
    locked: &[&[f64]],
    start: Option<&[f64]>,
    tol: f64,
    seed: u64,
    opts: &SolverOptions,
) -> Result<Vec<RitzPair>> {
    let n = op.dim();
    let available = n - locked.len();
    assert!(nev >= 1 && nev <= available, "nev = {nev} with {available} free dimensions");
    let m = opts.basis_size(nev, available, n);
    let keep = (nev + (m - nev) / 2).min(m - 1).max(nev);
    let max_iter = opts.iteration_cap(nev, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut v0 = match start {
        Some(s) => s.to_vec(),
        None => random_unit(n, &mut rng, locked),
    };
    project_out(locked, &mut v0);
    project_out(locked, &mut v0);
    if vector::normalize(&mut v0) < 1e-8 {
        v0 = random_unit(n, &mut rng, locked);
    }

    let mut basis: Vec<Vec<f64>> = vec![v0];
    let mut t = DMatrix::<f64>::zeros(m, m);
    let mut next = 0usize;
    let mut applications = 0usize;
    let mut w = vec![0.0; n];
    let mut best_residual = f64::INFINITY;

    loop {
        // Expand the basis to m vectors; `tail` is the unnormalized residual
        // direction coupling the last basis vector to the rest of the space.
        let mut tail_norm = 0.0;
        let mut tail: Option<Vec<f64>> = None;
        let mut active = m;
        while next < m {
            op.apply(&basis[next], &mut w);
            applications += 1;
            project_out(locked, &mut w);
            for pass in 0..2 {
                for (i, b) in basis.iter().enumerate() {
                    let c = vector::dot(b, &w);
                    vector::axpy(-c, b, &mut w);
                    if i <= next {
                        t[(i, next)] += c;
                    }
                }
                if pass == 0 {
                    project_out(locked, &mut w);
                }
            }
            let beta = vector::norm(&w);
            let scale = t[(next, next)].abs().max(1.0);
            if next + 1 == m {
                tail_norm = beta;
                if beta > 0.0 {
                    let mut r = w.clone();
                    vector::scale(1.0 / beta, &mut r);
                    tail = Some(r);
                }
                break;
            }
            if beta <= 1e-12 * scale {
                // Invariant subspace reached.
                if basis.len() == available {
                    active = basis.len();
                    break;
                }
                let mut against: Vec<&[f64]> = locked.to_vec();
                against.extend(basis.iter().map(|b| b.as_slice()));
                let fresh = random_unit(n, &mut rng, &against);
                basis.push(fresh);
            } else {
                let mut v = w.clone();
                vector::scale(1.0 / beta, &mut v);
                basis.push(v);
            }
            next += 1;
        }

        let sub = t.view((0, 0), (active, active)).into_owned();
        let mut sym = sub.clone();
        for i in 0..active {
            for j in i + 1..active {
                sym[(j, i)] = sub[(i, j)];
            }
        }
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..active).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let theta: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let z = |row: usize, col: usize| eig.eigenvectors[(row, order[col])];
        let spread = theta.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let residuals: Vec<f64> = (0..nev).map(|i| (tail_norm * z(active - 1, i)).abs()).collect();
        let worst = residuals.iter().cloned().fold(0.0, f64::max) / spread;
        best_residual = best_residual.min(worst);
        let exhausted = active == available;
        let converged = worst <= tol || exhausted;

        let ritz = |count: usize| -> Vec<Vec<f64>> {
            (0..count)
                .map(|i| {
                    let mut y = vec![0.0; n];
                    for (c, b) in basis.iter().take(active).enumerate() {
                        vector::axpy(z(c, i), b, &mut y);
                    }
                    y
                })
                .collect()
        };

        if converged {
            return Ok(ritz(nev).into_iter().map(|y| finalize(op, y)).collect());
        }
        if applications >= max_iter {
            return Err(Error::Convergence {
                iterations: applications,
                best_residual,
            });
        }
        let Some(tail) = tail else {
            return Err(Error::Convergence {
                iterations: applications,
                best_residual,
            });
        };

        let mut restarted = ritz(keep);
        restarted.push(tail);
        basis = restarted;
        t.fill(0.0);
        for (i, th) in theta.iter().take(keep).enumerate() {
            t[(i, i)] = *th;
        }
        next = keep;
    }
}

/// The `k` lowest eigenpairs of `op`, counting multiplicity.
pub fn lanczos_lowest(op: &dyn LinearOperator, k: usize, opts: &SolverOptions) -> Result<Vec<RitzPair>> {
    lowest(op, k, false, opts)
}

/// Like [`lanczos_lowest`], but extended with every further eigenpair
/// degenerate with the `k`-th one, so the highest returned level is complete.
pub fn lowest_complete(op: &dyn LinearOperator, k: usize, opts: &SolverOptions) -> Result<Vec<RitzPair>> {
    lowest(op, k, true, opts)
}

fn lowest(op: &dyn LinearOperator, k: usize, complete: bool, opts: &SolverOptions) -> Result<Vec<RitzPair>> {
    let n = op.dim();
    if k == 0 || n == 0 {
        return Err(Error::Precondition(format!("need k >= 1 and dim >= 1, got k = {k}, dim = {n}")));
    }
    let k = k.min(n);
    if n <= opts.dense_threshold {
        let all = dense_lowest(op, n);
        let mut take = k;
        if complete {
            let top = all[k - 1].energy;
            while take < n && all[take].energy - top < opts.degeneracy_tol {
                take += 1;
            }
        }
        return Ok(all.into_iter().take(take).collect());
    }

    let mut found = thick_restart(op, k, &[], None, opts.tol, derive_seed(opts.seed, &[0]), opts)?;
    sort_pairs(&mut found);
    let mut round = 1u64;
    while found.len() < n {
        let top = found[found.len().min(k) - 1].energy;
        let locked: Vec<&[f64]> = found.iter().map(|p| p.vector.as_slice()).collect();
        let seed = derive_seed(opts.seed, &[round]);
        let probe = thick_restart(op, 1, &locked, None, opts.probe_tol, seed, opts)?;
        let candidate = &probe[0];
        let threshold = if complete {
            top + opts.degeneracy_tol
        } else {
            top - opts.degeneracy_tol
        };
        if candidate.energy >= threshold {
            break;
        }
        let refined = thick_restart(
            op,
            1,
            &locked,
            Some(&candidate.vector),
            opts.tol,
            derive_seed(seed, &[1]),
            opts,
        )?;
        found.extend(refined);
        sort_pairs(&mut found);
        if !complete {
            found.truncate(k);
        }
        round += 1;
    }
    if !complete {
        found.truncate(k);
    }
    Ok(found)
}

fn sort_pairs(pairs: &mut [RitzPair]) {
    pairs.sort_by(|a, b| a.energy.total_cmp(&b.energy));
}
