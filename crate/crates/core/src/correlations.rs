//! Entropies, mutual information, classical correlation, quantum discord and
//! concurrence of two-qubit states. All logarithms are base 2.
//!
//! The classical correlation maximizes `S(ρ_A) - Σ_k p_k S(ρ_{A|k})` over
//! projective measurements on qubit B (the second site of a bond). For X
//! states the closed form compares a measurement along `z` with the best
//! transverse axis; [`discord_oracle`] searches the whole Bloch sphere instead.

use nalgebra::{DMatrix, Matrix2, Matrix4, SymmetricEigen};

use crate::error::{Error, Result};
use crate::reduced::{to_x_form, TwoQubitDM, TwoQubitX, C64};

/// Eigenvalues within this distance of `[0, 1]` are clipped before logs.
pub const EIGENVALUE_CLIP: f64 = 1e-10;
/// Off-X elements larger than this reject the closed form.
pub const X_FORM_TOL: f64 = 1e-9;

fn xlog2x(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * p.log2()
    }
}

/// `-Σ λ log2 λ` over eigenvalues clipped to `[0, 1]`.
pub fn entropy_of_spectrum(eigenvalues: &[f64]) -> f64 {
    // `0 - x` rather than `-x` so that a pure state reports +0
    0.0 - eigenvalues.iter().map(|&l| xlog2x(l.clamp(0.0, 1.0))).sum::<f64>()
}

fn binary_entropy(p: f64) -> f64 {
    entropy_of_spectrum(&[p, 1.0 - p])
}

fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    SymmetricEigen::new(h).eigenvalues.iter().copied().collect()
}

/// Von Neumann entropy of a density matrix of dimension at most 4.
pub fn von_neumann_entropy(rho: &DMatrix<C64>) -> Result<f64> {
    let n = rho.nrows();
    if n == 0 || n > 4 || rho.ncols() != n {
        return Err(Error::Precondition(format!("expected a square matrix of size <= 4, got {}x{}", n, rho.ncols())));
    }
    let herm = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if herm > 1e-12 {
        return Err(Error::Precondition(format!("matrix is not Hermitian (deviation {herm:e})")));
    }
    let tr: f64 = (0..n).map(|i| rho[(i, i)].re).sum();
    if (tr - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition(format!("trace {tr} differs from 1")));
    }
    let eigs = hermitian_eigenvalues(rho);
    if eigs.iter().any(|&e| e < -EIGENVALUE_CLIP) {
        return Err(Error::Precondition("matrix is not positive semidefinite".into()));
    }
    Ok(entropy_of_spectrum(&eigs))
}

fn dyn2(m: &Matrix2<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(2, 2, |r, c| m[(r, c)])
}

fn dyn4(m: &Matrix4<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(4, 4, |r, c| m[(r, c)])
}

/// `(S_A, S_B, S_AB)`.
pub fn entropies(rho: &TwoQubitDM) -> Result<(f64, f64, f64)> {
    let (a, b) = rho.marginals();
    Ok((
        von_neumann_entropy(&dyn2(&a))?,
        von_neumann_entropy(&dyn2(&b))?,
        von_neumann_entropy(&dyn4(rho.matrix()))?,
    ))
}

/// `I = S(ρ_A) + S(ρ_B) - S(ρ_AB)`.
pub fn mutual_information(rho: &TwoQubitDM) -> Result<f64> {
    let (sa, sb, sab) = entropies(rho)?;
    Ok(sa + sb - sab)
}

/// Bloch angles of the measurement axis on qubit B.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MeasurementAngles {
    /// In `[0, π]`.
    pub polar: f64,
    /// In `[0, 2π)`.
    pub azimuth: f64,
}

impl MeasurementAngles {
    pub const Z: Self = Self {
        polar: 0.0,
        azimuth: 0.0,
    };
    pub const X: Self = Self {
        polar: std::f64::consts::FRAC_PI_2,
        azimuth: 0.0,
    };
    pub const Y: Self = Self {
        polar: std::f64::consts::FRAC_PI_2,
        azimuth: std::f64::consts::FRAC_PI_2,
    };
}

fn eig2_hermitian(m: &Matrix2<C64>) -> [f64; 2] {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    [mean - rad, mean + rad]
}

/// `Σ_k p_k S(ρ_{A|k})` after a projective measurement of B along `angles`.
pub fn measured_conditional_entropy(rho: &TwoQubitDM, angles: MeasurementAngles) -> f64 {
    let (st, ct) = angles.polar.sin_cos();
    let (sp, cp) = angles.azimuth.sin_cos();
    let (nx, ny, nz) = (st * cp, st * sp, ct);
    let m = rho.matrix();
    let mut total = 0.0;
    for sign in [1.0, -1.0] {
        // Π = (I + sign n·σ) / 2
        let proj = Matrix2::new(
            C64::new(0.5 * (1.0 + sign * nz), 0.0),
            C64::new(0.5 * sign * nx, -0.5 * sign * ny),
            C64::new(0.5 * sign * nx, 0.5 * sign * ny),
            C64::new(0.5 * (1.0 - sign * nz), 0.0),
        );
        // Tr_B[(I⊗Π) ρ]_{rc} = Σ_{b,b'} Π_{b b'} ρ_{(r b'), (c b)}
        let cond = Matrix2::from_fn(|r, c| {
            let mut acc = C64::new(0.0, 0.0);
            for b in 0..2 {
                for bp in 0..2 {
                    acc += proj[(b, bp)] * m[(2 * r + bp, 2 * c + b)];
                }
            }
            acc
        });
        let p = cond[(0, 0)].re + cond[(1, 1)].re;
        if p <= 1e-15 {
            continue;
        }
        let [l0, l1] = eig2_hermitian(&(cond / C64::new(p, 0.0)));
        total += p * entropy_of_spectrum(&[l0, l1]);
    }
    total
}

fn x_spectrum(x: &TwoQubitX) -> [f64; 4] {
    let outer = (0.25 * (x.u - x.v).powi(2) + x.w * x.w).sqrt();
    let inner = (0.25 * (x.x - x.y).powi(2) + x.z * x.z).sqrt();
    [
        0.5 * (x.u + x.v) + outer,
        0.5 * (x.u + x.v) - outer,
        0.5 * (x.x + x.y) + inner,
        0.5 * (x.x + x.y) - inner,
    ]
}

/// Measured conditional entropy of an X state for a measurement of B at
/// polar angle `t` in the plane of its largest transverse correlation.
///
/// With `T = diag(c1, c2, c3)` the correlation tensor and `a3`, `b3` the
/// z-components of the marginal Bloch vectors, outcome `±` occurs with
/// probability `(1 ± b3 cos t)/2` and leaves A with Bloch vector
/// `(±c⊥ sin t, 0, a3 ± c3 cos t) / (1 ± b3 cos t)`.
fn x_conditional_entropy(x: &TwoQubitX, t: f64) -> f64 {
    let a3 = x.u + x.x - x.y - x.v;
    let b3 = x.u + x.y - x.x - x.v;
    let c3 = x.u - x.x - x.y + x.v;
    let c_perp = 2.0 * (x.z.abs() + x.w.abs());
    let (st, ct) = t.sin_cos();
    let mut total = 0.0;
    for sign in [1.0, -1.0] {
        let norm = 1.0 + sign * b3 * ct;
        let p = 0.5 * norm;
        if p <= 1e-15 {
            continue;
        }
        let r = ((c_perp * st).powi(2) + (a3 + sign * c3 * ct).powi(2)).sqrt() / norm;
        total += p * binary_entropy(0.5 * (1.0 + r.min(1.0)));
    }
    total
}

/// Polar samples scanned before refinement in [`classical_correlation_x`].
const POLAR_SCAN: usize = 64;

/// Classical correlation of an X state.
///
/// The optimal measurement axis lies in the plane spanned by `z` and the
/// transverse axis (`x` or `y`) carrying the larger two-point correlation, and
/// the conditional entropy depends on the polar angle only through `cos² t`.
/// The closed-form candidates `t = 0` (z) and `t = π/2` (transverse) are
/// compared with an interior minimum found by a scan of `[0, π/2]` followed
/// by golden-section refinement, which covers the states where neither axis
/// is optimal.
pub fn classical_correlation_x(x: &TwoQubitX) -> (f64, MeasurementAngles) {
    let s_a = binary_entropy(x.u + x.x);
    let azimuth = if (x.z + x.w).abs() >= (x.z - x.w).abs() {
        0.0
    } else {
        std::f64::consts::FRAC_PI_2
    };
    let half = std::f64::consts::FRAC_PI_2;
    let step = half / POLAR_SCAN as f64;
    // z and transverse candidates, exact
    let s_z = entropy_of_spectrum(&[x.u, x.x, x.y, x.v]) - binary_entropy(x.u + x.y);
    let s_perp = x_conditional_entropy(x, half);
    let (mut best, mut polar) = if s_z <= s_perp { (s_z, 0.0) } else { (s_perp, half) };

    let scan: Vec<f64> = (0..=POLAR_SCAN).map(|k| x_conditional_entropy(x, k as f64 * step)).collect();
    let k = scan
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    if k > 0 && k < POLAR_SCAN {
        let (t, s) = golden_section(|t| x_conditional_entropy(x, t), (k - 1) as f64 * step, (k + 1) as f64 * step, 80);
        if s < best {
            best = s;
            polar = t;
        }
    }
    let angles = if polar == 0.0 {
        MeasurementAngles::Z
    } else {
        MeasurementAngles { polar, azimuth }
    };
    (s_a - best, angles)
}

/// Mutual information of an X state from its closed-form spectrum.
pub fn mutual_information_x(x: &TwoQubitX) -> f64 {
    let s_a = binary_entropy(x.u + x.x);
    let s_b = binary_entropy(x.u + x.y);
    s_a + s_b - entropy_of_spectrum(&x_spectrum(x))
}

/// Quantum discord `I - J` of an X state; tiny negative rounding is clamped to 0.
pub fn discord_x(x: &TwoQubitX) -> f64 {
    let q = mutual_information_x(x) - classical_correlation_x(x).0;
    if q < 0.0 && q > -1e-12 {
        0.0
    } else {
        q
    }
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iterations: usize) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iterations {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Discord by direct minimization of the measured conditional entropy over
/// the Bloch sphere of B: a `grid_n × grid_n` grid followed by coordinate-wise
/// golden-section refinement (40 iterations per coordinate).
pub fn discord_oracle(rho: &TwoQubitDM, grid_n: usize) -> Result<(f64, MeasurementAngles)> {
    if grid_n < 64 {
        return Err(Error::Precondition(format!("grid_n must be at least 64, got {grid_n}")));
    }
    rho.validate()?;
    let (s_a, s_b, s_ab) = entropies(rho)?;
    let mi = s_a + s_b - s_ab;
    let pi = std::f64::consts::PI;
    let polar_step = pi / (grid_n - 1) as f64;
    let azimuth_step = 2.0 * pi / grid_n as f64;

    let row_best = |i: usize| -> (f64, MeasurementAngles) {
        let polar = i as f64 * polar_step;
        (0..grid_n)
            .map(|j| {
                let a = MeasurementAngles {
                    polar,
                    azimuth: j as f64 * azimuth_step,
                };
                (measured_conditional_entropy(rho, a), a)
            })
            .fold((f64::INFINITY, MeasurementAngles::Z), |best, cur| if cur.0 < best.0 { cur } else { best })
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<(f64, MeasurementAngles)> = {
        use rayon::prelude::*;
        (0..grid_n).into_par_iter().map(row_best).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<(f64, MeasurementAngles)> = (0..grid_n).map(row_best).collect();
    let (mut best, mut angles) = rows
        .into_iter()
        .fold((f64::INFINITY, MeasurementAngles::Z), |b, c| if c.0 < b.0 { c } else { b });

    for _ in 0..4 {
        let az = angles.azimuth;
        let (p, fp) = golden_section(
            |t| measured_conditional_entropy(rho, MeasurementAngles { polar: t, azimuth: az }),
            (angles.polar - polar_step).max(0.0),
            (angles.polar + polar_step).min(pi),
            40,
        );
        if fp < best {
            best = fp;
            angles.polar = p;
        }
        let po = angles.polar;
        let (a, fa) = golden_section(
            |t| measured_conditional_entropy(rho, MeasurementAngles { polar: po, azimuth: t }),
            angles.azimuth - azimuth_step,
            angles.azimuth + azimuth_step,
            40,
        );
        if fa < best {
            best = fa;
            angles.azimuth = a.rem_euclid(2.0 * pi);
        }
    }
    let j = s_a - best;
    Ok((mi - j, angles))
}

/// Wootters concurrence `max(0, λ1 - λ2 - λ3 - λ4)`, with `λ` the decreasing
/// square roots of the eigenvalues of `ρ (σy⊗σy) ρ* (σy⊗σy)`.
pub fn concurrence(rho: &TwoQubitDM) -> Result<f64> {
    rho.validate()?;
    let m = dyn4(rho.matrix());
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let sqrt_diag = DMatrix::from_fn(4, 4, |r, c| {
        if r == c {
            C64::new(eig.eigenvalues[r].max(0.0).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let sqrt_rho = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.adjoint();
    let flip = DMatrix::from_fn(4, 4, |r, c| match (r, c) {
        (0, 3) | (3, 0) => C64::new(-1.0, 0.0),
        (1, 2) | (2, 1) => C64::new(1.0, 0.0),
        _ => C64::new(0.0, 0.0),
    });
    let tilde = &flip * m.map(|z| z.conj()) * &flip;
    let inner = &sqrt_rho * tilde * &sqrt_rho;
    let mut lambdas: Vec<f64> = hermitian_eigenvalues(&inner).into_iter().map(|e| e.max(0.0).sqrt()).collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0))
}

/// Concurrence of an X state, `2 max(0, |z| - sqrt(uv), |w| - sqrt(xy))`.
pub fn concurrence_x(x: &TwoQubitX) -> f64 {
    let a = x.z.abs() - (x.u.max(0.0) * x.v.max(0.0)).sqrt();
    let b = x.w.abs() - (x.x.max(0.0) * x.y.max(0.0)).sqrt();
    (2.0 * a.max(b).max(0.0)).min(1.0)
}

/// Random valid X state: `(u, x, y, v)` uniform on the probability simplex,
/// `z` and `w` uniform within their positivity bounds `|z| ≤ √(xy)`, `|w| ≤ √(uv)`.
pub fn sample_x_state<R: rand::Rng + ?Sized>(rng: &mut R) -> TwoQubitX {
    let e: [f64; 4] = std::array::from_fn(|_| -(1.0 - rng.random::<f64>()).ln());
    let sum: f64 = e.iter().sum();
    let [u, x, y, v] = e.map(|t| t / sum);
    let z = (x * y).sqrt() * rng.random_range(-1.0..=1.0);
    let w = (u * v).sqrt() * rng.random_range(-1.0..=1.0);
    TwoQubitX { u, x, y, v, z, w }
}

/// All correlation measures of one two-spin state.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CorrelationRecord {
    pub mutual_info: f64,
    pub classical_corr: f64,
    pub discord: f64,
    pub concurrence: f64,
    pub entropy_a: f64,
    pub entropy_b: f64,
    pub entropy_ab: f64,
    pub measurement: MeasurementAngles,
    /// Discord from [`discord_oracle`], when requested.
    pub oracle_discord: Option<f64>,
}

/// Closed-form record of an X state.
pub fn correlations_x(x: &TwoQubitX) -> CorrelationRecord {
    let (classical, measurement) = classical_correlation_x(x);
    let entropy_a = binary_entropy(x.u + x.x);
    let entropy_b = binary_entropy(x.u + x.y);
    let entropy_ab = entropy_of_spectrum(&x_spectrum(x));
    CorrelationRecord {
        mutual_info: entropy_a + entropy_b - entropy_ab,
        classical_corr: classical,
        discord: discord_x(x),
        concurrence: concurrence_x(x),
        entropy_a,
        entropy_b,
        entropy_ab,
        measurement,
        oracle_discord: None,
    }
}

/// Grid size used when the oracle runs alongside the closed form.
pub const ORACLE_GRID: usize = 64;
/// Closed-form/oracle disagreement above this is logged.
pub const ORACLE_AGREEMENT: f64 = 1e-6;

/// Validates `rho`, reduces it to X form and evaluates every measure; with
/// `oracle` the grid search runs too and disagreements are logged.
pub fn correlations(rho: &TwoQubitDM, oracle: bool) -> Result<CorrelationRecord> {
    rho.validate()?;
    let x = to_x_form(rho, X_FORM_TOL)?;
    let mut record = correlations_x(&x);
    if oracle {
        let (q, angles) = discord_oracle(rho, ORACLE_GRID)?;
        if (q - record.discord).abs() > ORACLE_AGREEMENT {
            log::warn!(
                "closed-form discord {} differs from oracle {} (optimal axis {:?}) for {:?}",
                record.discord,
                q,
                angles,
                x
            );
        }
        record.oracle_discord = Some(q);
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn singlet() -> TwoQubitX {
        TwoQubitX::new(0.0, 0.5, 0.5, 0.0, -0.5, 0.0).unwrap()
    }

    fn werner(p: f64) -> TwoQubitX {
        // p |singlet><singlet| + (1 - p) I/4
        let q = (1.0 - p) / 4.0;
        TwoQubitX::new(q, q + p / 2.0, q + p / 2.0, q, -p / 2.0, 0.0).unwrap()
    }

    #[test]
    fn entropy_anchors() {
        assert!(entropy_of_spectrum(&[1.0, 0.0, 0.0, 0.0]).abs() < 1e-15);
        assert!((entropy_of_spectrum(&[0.25; 4]) - 2.0).abs() < 1e-15);
        assert!((entropy_of_spectrum(&[0.5, 0.5, 0.0, 0.0]) - 1.0).abs() < 1e-15);
        let diag = DMatrix::from_fn(4, 4, |r, c| C64::new(if r == c && r < 2 { 0.5 } else { 0.0 }, 0.0));
        assert!((von_neumann_entropy(&diag).unwrap() - 1.0).abs() < 1e-14);
        let bad = DMatrix::from_fn(2, 2, |r, c| C64::new(if r == c { 0.7 } else { 0.0 }, 0.0));
        assert!(matches!(von_neumann_entropy(&bad), Err(Error::Precondition(_))));
    }

    #[test]
    fn singlet_record() {
        let r = correlations_x(&singlet());
        assert!((r.mutual_info - 2.0).abs() < 1e-12);
        assert!((r.classical_corr - 1.0).abs() < 1e-12);
        assert!((r.discord - 1.0).abs() < 1e-12);
        assert!((r.concurrence - 1.0).abs() < 1e-12);
        let (q, _) = discord_oracle(&singlet().to_dm(), 64).unwrap();
        assert!((q - 1.0).abs() < 1e-8);
        assert!((concurrence(&singlet().to_dm()).unwrap() - 1.0).abs() < 1e-10);
        assert!((mutual_information(&singlet().to_dm()).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn product_and_classical_states() {
        let product = TwoQubitX::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let r = correlations_x(&product);
        assert!(r.mutual_info.abs() < 1e-12 && r.discord.abs() < 1e-12 && r.concurrence == 0.0);
        let (q, _) = discord_oracle(&product.to_dm(), 64).unwrap();
        assert!(q.abs() < 1e-8);

        let classical = TwoQubitX::new(0.4, 0.1, 0.2, 0.3, 0.0, 0.0).unwrap();
        assert!(discord_x(&classical).abs() < 1e-12);
        assert!(classical_correlation_x(&classical).0 > 0.0);

        let mixed = TwoQubitX::new(0.25, 0.25, 0.25, 0.25, 0.0, 0.0).unwrap();
        let r = correlations_x(&mixed);
        assert!(r.mutual_info.abs() < 1e-12 && r.discord.abs() < 1e-12);
        assert!((r.entropy_ab - 2.0).abs() < 1e-12);
    }

    #[test]
    fn werner_half() {
        let x = werner(0.5);
        let rho = x.to_dm();
        // spectrum {5/8, 1/8, 1/8, 1/8}, marginals maximally mixed
        let expected_mi = 2.0 + 0.625 * 0.625f64.log2() + 0.375 * 0.125f64.log2();
        assert!((mutual_information(&rho).unwrap() - expected_mi).abs() < 1e-12);
        assert!((mutual_information_x(&x) - expected_mi).abs() < 1e-12);
        assert!((concurrence(&rho).unwrap() - 0.25).abs() < 1e-10);
        assert!((concurrence_x(&x) - 0.25).abs() < 1e-12);
        let (q, _) = discord_oracle(&rho, 64).unwrap();
        assert!((discord_x(&x) - q).abs() < 1e-9);
    }

    #[test]
    fn general_measurement_matches_closed_form_axes() {
        let x = TwoQubitX::new(0.6, 0.2, 0.2, 0.0, 0.2, 0.0).unwrap();
        let rho = x.to_dm();
        let s_z = measured_conditional_entropy(&rho, MeasurementAngles::Z);
        let expected = entropy_of_spectrum(&[0.6, 0.2, 0.2, 0.0]) - binary_entropy(0.8);
        assert!((s_z - expected).abs() < 1e-12);
        let (j, _) = classical_correlation_x(&x);
        let s_a = binary_entropy(0.8);
        let best_axis = measured_conditional_entropy(&rho, MeasurementAngles::Z)
            .min(measured_conditional_entropy(&rho, MeasurementAngles::X))
            .min(measured_conditional_entropy(&rho, MeasurementAngles::Y));
        assert!(j >= s_a - best_axis - 1e-12);
        let (q, _) = discord_oracle(&rho, 64).unwrap();
        assert!((discord_x(&x) - q).abs() < 1e-9);
    }

    #[test]
    fn interior_optimum_beats_both_axes() {
        let x = TwoQubitX::new(
            0.8851547268335878,
            0.061496427195931805,
            0.027666668382973963,
            0.02568217758750642,
            0.03550282789678552,
            -0.06393152290553378,
        )
        .unwrap();
        let rho = x.to_dm();
        let axes = measured_conditional_entropy(&rho, MeasurementAngles::Z)
            .min(measured_conditional_entropy(&rho, MeasurementAngles::Y));
        let (j, angles) = classical_correlation_x(&x);
        let s_a = binary_entropy(x.u + x.x);
        assert!(j > s_a - axes + 1e-6);
        assert!(angles.polar > 0.1 && angles.polar < 1.5);
        assert_eq!(angles.azimuth, std::f64::consts::FRAC_PI_2);
        assert!((measured_conditional_entropy(&rho, angles) - (s_a - j)).abs() < 1e-12);
        let (q, _) = discord_oracle(&rho, 64).unwrap();
        assert!((discord_x(&x) - q).abs() < 1e-8);
    }

    #[test]
    fn sampled_states_are_valid() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let x = sample_x_state(&mut rng);
            x.validate().unwrap();
            let r = correlations_x(&x);
            assert!(r.discord >= -1e-10 && r.classical_corr >= -1e-10);
            assert!(r.mutual_info >= r.classical_corr - 1e-10);
            assert!((0.0..=1.0).contains(&r.concurrence));
            assert!((r.concurrence - concurrence(&x.to_dm()).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn transverse_axis_follows_sign_of_w() {
        let x = TwoQubitX::new(0.3, 0.2, 0.2, 0.3, 0.15, -0.2).unwrap();
        let (_, axis) = classical_correlation_x(&x);
        assert_eq!(axis, MeasurementAngles::Y);
        let (q, _) = discord_oracle(&x.to_dm(), 64).unwrap();
        assert!((discord_x(&x) - q).abs() < 1e-8);
    }

    #[test]
    fn oracle_rejects_coarse_grid() {
        assert!(matches!(discord_oracle(&singlet().to_dm(), 16), Err(Error::Precondition(_))));
    }

    #[test]
    fn record_from_density_matrix() {
        let r = correlations(&singlet().to_dm(), true).unwrap();
        assert!((r.discord - 1.0).abs() < 1e-12);
        assert!((r.oracle_discord.unwrap() - 1.0).abs() < 1e-8);
        let mut m = [[0.0; 4]; 4];
        m[0][0] = 0.4;
        m[1][1] = 0.1;
        m[2][2] = 0.1;
        m[3][3] = 0.4;
        m[0][1] = 0.01;
        m[1][0] = 0.01;
        assert!(matches!(
            correlations(&TwoQubitDM::from_real(m), false),
            Err(Error::XFormViolation { .. })
        ));
    }

    fn random_unitary<R: rand::Rng>(rng: &mut R) -> Matrix2<C64> {
        // Haar-like SU(2) from a random unit quaternion
        let q: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        let [a, b, c, d] = q.map(|v| v / n);
        Matrix2::new(C64::new(a, b), C64::new(c, d), C64::new(-c, d), C64::new(a, -b))
    }

    #[test]
    fn oracle_is_local_unitary_invariant() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..3 {
            let x = sample_x_state(&mut rng);
            let rho = x.to_dm();
            let (q, _) = discord_oracle(&rho, 64).unwrap();
            for _ in 0..20 {
                let u = random_unitary(&mut rng).kronecker(&random_unitary(&mut rng));
                let rotated = TwoQubitDM(u * rho.matrix() * u.adjoint());
                let (qr, _) = discord_oracle(&rotated, 64).unwrap();
                assert!((q - qr).abs() < 1e-6, "{q} vs {qr}");
            }
        }
    }
}
