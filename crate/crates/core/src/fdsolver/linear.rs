//! Shortley–Weller operator and a Jacobi-preconditioned BiCGSTAB solver.
//!
//! All reductions run in a fixed order so repeated solves are bit-identical.

use rayon::prelude::*;

use super::grid::{Grid, NONE};
use crate::error::{bail, Result};

const PAR_THRESHOLD: usize = 16_384;

#[derive(Clone, Copy, Debug)]
pub struct LinearOptions {
    /// Required `‖-Δ_h u - rhs‖_∞ / ‖rhs‖_∞`.
    pub rel_tol: f64,
    pub max_iters: usize,
}

impl Default for LinearOptions {
    fn default() -> Self {
        LinearOptions { rel_tol: 1e-13, max_iters: 20_000 }
    }
}

/// Precomputed `-Δ_h` in compressed 5-point form.
pub(crate) struct Operator {
    diag: Vec<f64>,
    off: Vec<[f64; 4]>,
    nb: Vec<[u32; 4]>,
}

impl Operator {
    pub(crate) fn new(grid: &Grid) -> Self {
        let n = grid.len();
        let mut diag = Vec::with_capacity(n);
        let mut off = Vec::with_capacity(n);
        let mut nb = Vec::with_capacity(n);
        for k in 0..n {
            let (d, mut o) = grid.stencil(k);
            let raw = grid.raw_neighbors(k);
            for j in 0..4 {
                if raw[j] == NONE {
                    o[j] = 0.0;
                }
            }
            diag.push(d);
            off.push(o);
            nb.push(raw);
        }
        Operator { diag, off, nb }
    }

    /// Largest `|A| |x|` row sum, the scale of round-off in a residual.
    pub(crate) fn abs_row_max(&self, x: &[f64]) -> f64 {
        (0..x.len())
            .map(|k| {
                let mut acc = (self.diag[k] * x[k]).abs();
                for j in 0..4 {
                    if self.nb[k][j] != NONE {
                        acc += (self.off[k][j] * x[self.nb[k][j] as usize]).abs();
                    }
                }
                acc
            })
            .fold(0.0, f64::max)
    }

    fn row(&self, k: usize, x: &[f64]) -> f64 {
        let mut acc = self.diag[k] * x[k];
        let nb = &self.nb[k];
        let off = &self.off[k];
        for j in 0..4 {
            if nb[j] != NONE {
                acc += off[j] * x[nb[j] as usize];
            }
        }
        acc
    }

    /// `y = -Δ_h x`
    pub(crate) fn apply(&self, x: &[f64], y: &mut [f64]) {
        if y.len() >= PAR_THRESHOLD {
            y.par_iter_mut().enumerate().for_each(|(k, yk)| *yk = self.row(k, x));
        } else {
            for (k, yk) in y.iter_mut().enumerate() {
                *yk = self.row(k, x);
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    // fixed chunking keeps the summation order independent of the thread count
    const CHUNK: usize = 4096;
    if a.len() >= PAR_THRESHOLD {
        let partial: Vec<f64> = a
            .par_chunks(CHUNK)
            .zip(b.par_chunks(CHUNK))
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
            .collect();
        partial.iter().sum()
    } else {
        a.iter().zip(b).map(|(p, q)| p * q).sum()
    }
}

fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
}

/// Residual `‖A x - b‖_∞`.
pub(crate) fn residual_sup(op: &Operator, x: &[f64], b: &[f64]) -> f64 {
    let mut ax = vec![0.0; x.len()];
    op.apply(x, &mut ax);
    ax.iter().zip(b).fold(0.0, |m: f64, (p, q)| m.max((p - q).abs()))
}

/// Solve `A x = b` starting from the contents of `x`.
pub(crate) fn bicgstab(op: &Operator, b: &[f64], x: &mut [f64], opts: LinearOptions) -> Result<usize> {
    const OP: &str = "solve_linear_poisson";
    let n = b.len();
    let mut target = opts.rel_tol * sup(b);
    if target == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(0);
    }
    let inv_diag: Vec<f64> = op.diag.iter().map(|d| 1.0 / d).collect();
    let mut r = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut iters = 0;

    // outer loop restarts after breakdown or a stale recurrence residual
    for _restart in 0..50 {
        op.apply(x, &mut r);
        for k in 0..n {
            r[k] = b[k] - r[k];
        }
        // never ask for less than the round-off floor of the residual itself
        target = target.max(64.0 * f64::EPSILON * op.abs_row_max(x));
        if sup(&r) <= target {
            return Ok(iters);
        }
        let r_hat = r.clone();
        let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        p.iter_mut().for_each(|e| *e = 0.0);
        v.iter_mut().for_each(|e| *e = 0.0);
        loop {
            if iters >= opts.max_iters {
                bail!(Solver, OP, "no convergence after {} iterations (residual {:e})", iters, sup(&r));
            }
            iters += 1;
            let rho_new = dot(&r_hat, &r);
            if rho_new.abs() < 1e-300 || omega == 0.0 {
                break;
            }
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for k in 0..n {
                p[k] = r[k] + beta * (p[k] - omega * v[k]);
                y[k] = inv_diag[k] * p[k];
            }
            op.apply(&y, &mut v);
            let denom = dot(&r_hat, &v);
            if denom == 0.0 {
                break;
            }
            alpha = rho / denom;
            for k in 0..n {
                s[k] = r[k] - alpha * v[k];
            }
            if sup(&s) <= 0.5 * target {
                for k in 0..n {
                    x[k] += alpha * y[k];
                }
                break;
            }
            for k in 0..n {
                z[k] = inv_diag[k] * s[k];
            }
            op.apply(&z, &mut t);
            let tt = dot(&t, &t);
            omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
            for k in 0..n {
                x[k] += alpha * y[k] + omega * z[k];
                r[k] = s[k] - omega * t[k];
            }
            if x.iter().any(|e| !e.is_finite()) {
                bail!(Solver, OP, "non-finite iterate");
            }
            if sup(&r) <= 0.5 * target {
                break;
            }
        }
    }
    let res = residual_sup(op, x, b);
    if res <= target {
        Ok(iters)
    } else {
        bail!(Solver, OP, "stagnated with residual {res:e} above {target:e}")
    }
}
