//! Dense vector kernels shared by the eigensolver and the observables.
//!
//! Reductions are split into fixed-size chunks whose partial sums are added in
//! chunk order, so results do not depend on the worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

const CHUNK: usize = 1 << 14;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    #[cfg(feature = "parallel")]
    {
        if a.len() > CHUNK {
            let partial: Vec<f64> = a
                .par_chunks(CHUNK)
                .zip(b.par_chunks(CHUNK))
                .map(|(x, y)| dot_serial(x, y))
                .collect();
            return partial.iter().sum();
        }
    }
    a.chunks(CHUNK)
        .zip(b.chunks(CHUNK))
        .map(|(x, y)| dot_serial(x, y))
        .sum()
}

fn dot_serial(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    #[cfg(feature = "parallel")]
    {
        if y.len() > CHUNK {
            y.par_chunks_mut(CHUNK)
                .zip(x.par_chunks(CHUNK))
                .for_each(|(yc, xc)| yc.iter_mut().zip(xc).for_each(|(yi, xi)| *yi += alpha * xi));
            return;
        }
    }
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

pub fn scale(alpha: f64, y: &mut [f64]) {
    y.iter_mut().for_each(|v| *v *= alpha);
}

/// Normalizes in place and returns the previous norm.
pub fn normalize(y: &mut [f64]) -> f64 {
    let n = norm(y);
    if n > 0.0 {
        scale(1.0 / n, y);
    }
    n
}

/// Fixes the global sign so the first component of largest magnitude is positive.
pub fn canonical_sign(y: &mut [f64]) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &v in y.iter() {
        if v.abs() > best * (1.0 + 1e-12) {
            best = v.abs();
            sign = v.signum();
        }
    }
    if sign < 0.0 {
        scale(-1.0, y);
    }
}

/// Fills `out[row]` for every row with `f(row)`, in parallel when enabled.
pub fn fill_rows<F>(out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if out.len() > CHUNK {
            out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
                let base = c * CHUNK;
                for (k, slot) in chunk.iter_mut().enumerate() {
                    *slot = f(base + k);
                }
            });
            return;
        }
    }
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = f(k);
    }
}
