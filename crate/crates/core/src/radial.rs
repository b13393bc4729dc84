//! Radial problems on balls in any dimension.
//!
//! A radial solution of `u'' + (n-1)/r u' = -f(u)`, `u'(0) = 0`, `u(R) = 0` is
//! a fixed point of
//!
//! ```text
//! u(r) = ∫_r^R s^{1-n} ∫_0^s t^{n-1} f(u(t)) dt ds.
//! ```
//!
//! The inner integral is evaluated exactly for a source that is piecewise
//! linear in `t`; the outer one uses the trapezoid rule.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::geometry::GeometryStats;
use crate::io;
use crate::nonlinearity::{unit_ball_volume, Nonlinearity};

pub const DEFAULT_NODES: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialSolution {
    pub n: u32,
    pub radius: f64,
    pub r_nodes: Vec<f64>,
    pub values: Vec<f64>,
    /// `u'(R)`
    pub derivative_at_r: f64,
    pub picard_iters: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub nodes: usize,
}

impl Default for RadialOptions {
    fn default() -> Self {
        RadialOptions { tol: 1e-12, max_iters: 100_000, nodes: DEFAULT_NODES }
    }
}

/// Uniform mesh `0 = r_0 < ... < r_{m-1} = R`.
pub fn radial_mesh(radius: f64, nodes: usize) -> Vec<f64> {
    let dr = radius / (nodes - 1) as f64;
    (0..nodes).map(|i| if i + 1 == nodes { radius } else { i as f64 * dr }).collect()
}

/// `∫_a^b t^{n-1} g(t) dt` for `g` linear between `g(a) = ga` and `g(b) = gb`.
fn weighted_panel(a: f64, b: f64, ga: f64, gb: f64, n: u32) -> f64 {
    let n = n as i32;
    let slope = (gb - ga) / (b - a);
    let m0 = (b.powi(n) - a.powi(n)) / n as f64;
    let m1 = (b.powi(n + 1) - a.powi(n + 1)) / (n + 1) as f64;
    (ga - slope * a) * m0 + slope * m1
}

/// Inner integrals `I(r_i) = ∫_0^{r_i} t^{n-1} g(t) dt` for nodal `g`, linear between nodes.
pub fn inner_integrals(r: &[f64], g: &[f64], n: u32) -> Vec<f64> {
    let mut out = vec![0.0; r.len()];
    for i in 1..r.len() {
        out[i] = out[i - 1] + weighted_panel(r[i - 1], r[i], g[i - 1], g[i], n);
    }
    out
}

/// `u(r_i) = ∫_{r_i}^R s^{1-n} I(s) ds` by the trapezoid rule, given `I` at the nodes.
pub fn outer_integrals(r: &[f64], inner: &[f64], n: u32) -> Vec<f64> {
    let m = r.len();
    let integrand: Vec<f64> =
        r.iter().zip(inner).map(|(&s, &i)| if s == 0.0 { 0.0 } else { s.powi(1 - n as i32) * i }).collect();
    let mut u = vec![0.0; m];
    for i in (0..m - 1).rev() {
        u[i] = u[i + 1] + 0.5 * (r[i + 1] - r[i]) * (integrand[i] + integrand[i + 1]);
    }
    u
}

fn check_ball(op: &'static str, radius: f64, n: u32, nodes: usize) -> Result<()> {
    if !(radius > 0.0 && radius.is_finite()) {
        bail!(Radial, op, "radius must be positive, got {radius}");
    }
    if n < 1 {
        bail!(Radial, op, "dimension must be at least 1");
    }
    if nodes < 3 {
        bail!(Radial, op, "need at least 3 radial nodes, got {nodes}");
    }
    Ok(())
}

/// Radial solution of `-Δψ = f(ψ)` in the ball of radius `radius` in `R^n`.
pub fn solve_radial(f: &Nonlinearity, radius: f64, n: u32, tol: f64) -> Result<RadialSolution> {
    solve_radial_with(f, radius, n, RadialOptions { tol, ..RadialOptions::default() })
}

pub fn solve_radial_with(f: &Nonlinearity, radius: f64, n: u32, opts: RadialOptions) -> Result<RadialSolution> {
    const OP: &str = "solve_radial";
    check_ball(OP, radius, n, opts.nodes)?;
    let r = radial_mesh(radius, opts.nodes);
    let mut u = vec![0.0; r.len()];
    for iter in 1..=opts.max_iters {
        let g: Vec<f64> = u.iter().map(|&v| f.value(v)).collect();
        let inner = inner_integrals(&r, &g, n);
        let next = outer_integrals(&r, &inner, n);
        let mut update = 0.0f64;
        for (a, b) in u.iter().zip(&next) {
            update = update.max((a - b).abs());
        }
        if !update.is_finite() {
            bail!(Radial, OP, "non-finite iterate at Picard iteration {iter}");
        }
        u = next;
        if update <= opts.tol {
            let derivative_at_r = -radius.powi(1 - n as i32) * inner[inner.len() - 1];
            return Ok(RadialSolution { n, radius, r_nodes: r, values: u, derivative_at_r, picard_iters: iter });
        }
    }
    bail!(Radial, OP, "no convergence after {} Picard iterations", opts.max_iters)
}

/// Solution of the linear problem `-Δv = g` for a fixed radial source `g` given
/// at the mesh nodes.
pub fn solve_radial_source(r: &[f64], g: &[f64], n: u32) -> Result<RadialSolution> {
    const OP: &str = "solve_radial_source";
    if r.len() != g.len() || r.len() < 3 || r[0] != 0.0 {
        bail!(Radial, OP, "mesh must start at 0 and match the source length");
    }
    let radius = r[r.len() - 1];
    check_ball(OP, radius, n, r.len())?;
    let inner = inner_integrals(r, g, n);
    let values = outer_integrals(r, &inner, n);
    let derivative_at_r = -radius.powi(1 - n as i32) * inner[inner.len() - 1];
    Ok(RadialSolution { n, radius, r_nodes: r.to_vec(), values, derivative_at_r, picard_iters: 0 })
}

/// Maximum of a radial solution, attained at the center.
pub fn radial_max(sol: &RadialSolution) -> f64 {
    sol.values[0]
}

impl RadialSolution {
    /// Linear interpolation in `r`; clamps to `[0, R]`.
    pub fn eval(&self, r: f64) -> f64 {
        let m = self.r_nodes.len();
        let x = (r / self.radius).clamp(0.0, 1.0) * (m - 1) as f64;
        let i = (x.floor() as usize).min(m - 2);
        let t = x - i as f64;
        (1.0 - t) * self.values[i] + t * self.values[i + 1]
    }

    /// Three-point residual of `u'' + (n-1)/r u' + f(u)` at interior mesh nodes.
    pub fn ode_residual(&self, f: &Nonlinearity) -> Vec<(f64, f64)> {
        let r = &self.r_nodes;
        let u = &self.values;
        (1..r.len() - 1)
            .map(|i| {
                let dr = r[i + 1] - r[i];
                let d2 = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (dr * dr);
                let d1 = (u[i + 1] - u[i - 1]) / (2.0 * dr);
                (r[i], d2 + (self.n as f64 - 1.0) / r[i] * d1 + f.value(u[i]))
            })
            .collect()
    }

    pub fn csv(&self) -> String {
        io::csv_string(&["r", "value"], self.r_nodes.iter().zip(&self.values).map(|(&r, &v)| [r, v]))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.csv())?;
        Ok(())
    }
}

/// Upper bound `|Ω|^{2/n} / (n ω_n^{2/n})` on the expected exit time from `Ω`.
pub fn exit_time_bound(stats: &GeometryStats, n: u32) -> f64 {
    let e = 2.0 / n as f64;
    stats.area.powf(e) / (n as f64 * unit_ball_volume(n).powf(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats_with_area(area: f64) -> GeometryStats {
        GeometryStats { area, inradius: 1.0, diameter: 2.0, boundary_length: 1.0, smooth_boundary: true }
    }

    #[test]
    fn constant_sources_are_exact() {
        for n in 1..=4 {
            for (c, radius) in [(1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (0.7, 1.3)] {
                let sol = solve_radial(&Nonlinearity::constant(c), radius, n, 1e-12).unwrap();
                for (&r, &v) in sol.r_nodes.iter().zip(&sol.values) {
                    let exact = c * (radius * radius - r * r) / (2.0 * n as f64);
                    assert!((v - exact).abs() < 1e-10, "n={n} r={r}: {v} vs {exact}");
                }
                assert!((sol.derivative_at_r + c * radius / n as f64).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn radial_maxima() {
        let f2 = Nonlinearity::constant(2.0);
        assert!((radial_max(&solve_radial(&Nonlinearity::constant(1.0), 1.0, 2, 1e-12).unwrap()) - 0.25).abs() < 1e-12);
        assert!((radial_max(&solve_radial(&f2, 1.0, 3, 1e-12).unwrap()) - 1.0 / 3.0).abs() < 1e-12);
        assert!((radial_max(&solve_radial(&f2, 2.0, 2, 1e-12).unwrap()) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exit_time_bounds() {
        let pi = std::f64::consts::PI;
        assert!((exit_time_bound(&stats_with_area(pi), 2) - 0.5).abs() < 1e-15);
        assert!((exit_time_bound(&stats_with_area(4.0 * pi), 2) - 2.0).abs() < 1e-14);
        let b3 = exit_time_bound(&stats_with_area(1.0), 3);
        assert!((b3 - (3.0 / (4.0 * pi)).powf(2.0 / 3.0) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn residual_and_shape() {
        for f in Nonlinearity::catalog() {
            let Ok(sol) = solve_radial(&f, 1.0, 2, 1e-12) else { continue };
            assert_eq!(*sol.values.last().unwrap(), 0.0);
            assert!(sol.values.windows(2).all(|w| w[0] >= w[1]), "{}", f.name());
            for (r, res) in sol.ode_residual(&f) {
                if r > 0.05 {
                    assert!(res.abs() < 1e-6, "{} r={r} res={res}", f.name());
                }
            }
        }
    }

    #[test]
    fn fixed_source_matches_picard() {
        let f = Nonlinearity::affine(1.0, 1.0);
        let sol = solve_radial(&f, 1.0, 2, 1e-13).unwrap();
        let g: Vec<f64> = sol.values.iter().map(|&v| f.value(v)).collect();
        let lin = solve_radial_source(&sol.r_nodes, &g, 2).unwrap();
        for (a, b) in sol.values.iter().zip(&lin.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_round_trip() {
        let sol = solve_radial_with(
            &Nonlinearity::affine(1.0, 0.3),
            1.0,
            2,
            RadialOptions { nodes: 65, ..Default::default() },
        )
        .unwrap();
        let t = io::parse_csv(&sol.csv()).unwrap();
        assert_eq!(t.column("r").unwrap(), sol.r_nodes);
        assert_eq!(t.column("value").unwrap(), sol.values);
    }
}
