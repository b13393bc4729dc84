//! Cut-cell finite differences for `-Δu = f(u)` with zero Dirichlet data,
//! solved by Picard iteration.
//!
//! The contraction factor of the Picard map is `sup f' · max((-Δ_h)^{-1} 1)`,
//! the discrete counterpart of the Lipschitz threshold in
//! [`crate::nonlinearity::lipschitz_threshold`]. When that factor is below one
//! the iteration is certified; otherwise it falls back to a damped update.

mod field;
mod grid;
mod linear;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::geometry::Domain;
use crate::nonlinearity::Nonlinearity;
pub use field::{Field, NodalSampler};
pub use grid::{Grid, EAST, NORTH, SOUTH, WEST};
pub use linear::LinearOptions;
use linear::{bicgstab, residual_sup, Operator};

/// Damping used when the contraction is not certified.
pub const UNCERTIFIED_DAMPING: f64 = 0.5;

pub fn build_grid(domain: &Domain, h: f64) -> Result<Arc<Grid>> {
    Grid::build(domain, h)
}

/// Shortley–Weller discrete Laplacian `Δ_h u` (zero boundary values).
pub fn apply_laplacian(u: &Field) -> Field {
    let op = Operator::new(u.grid());
    let mut out = vec![0.0; u.values().len()];
    op.apply(u.values(), &mut out);
    out.iter_mut().for_each(|v| *v = -*v);
    Field::new(u.grid().clone(), out)
}

/// Solve `-Δ_h u = rhs` with zero boundary values.
pub fn solve_linear_poisson(rhs: &Field) -> Result<Field> {
    solve_linear_poisson_with(rhs, LinearOptions::default())
}

pub fn solve_linear_poisson_with(rhs: &Field, opts: LinearOptions) -> Result<Field> {
    let op = Operator::new(rhs.grid());
    let mut x = vec![0.0; rhs.values().len()];
    bicgstab(&op, rhs.values(), &mut x, opts)?;
    Ok(Field::new(rhs.grid().clone(), x))
}

/// Torsion function: `-Δ_h u = 1`.
pub fn torsion(grid: &Arc<Grid>) -> Result<Field> {
    let ones = Field::new(grid.clone(), vec![1.0; grid.len()]);
    solve_linear_poisson(&ones)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemilinearOptions {
    /// Stop when the sup-norm Picard increment and the residual are both below this
    /// (the residual test is relaxed to the floating-point floor of `Δ_h u`).
    pub tol: f64,
    pub max_iters: usize,
    /// Relative residual of the inner linear solves.
    pub linear_rel_tol: f64,
}

impl Default for SemilinearOptions {
    fn default() -> Self {
        SemilinearOptions { tol: 1e-10, max_iters: 10_000, linear_rel_tol: 1e-12 }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub field: Field,
    pub picard_iters: usize,
    pub final_update: f64,
    /// `‖-Δ_h u - f(u)‖_∞`
    pub residual: f64,
    /// `sup f' · max((-Δ_h)^{-1} 1)`
    pub certified_contraction: f64,
    pub certified: bool,
    /// Relaxation parameter used by the iteration (1 when certified).
    pub damping: f64,
    pub torsion_max: f64,
}

/// Summary of a [`SolveReport`] without the field, for JSON output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub nodes: usize,
    pub h: f64,
    pub picard_iters: usize,
    pub final_update: f64,
    pub residual: f64,
    pub certified_contraction: f64,
    pub certified: bool,
    pub damping: f64,
    pub max_value: f64,
}

impl SolveReport {
    pub fn summary(&self) -> SolveSummary {
        SolveSummary {
            nodes: self.field.values().len(),
            h: self.field.grid().h,
            picard_iters: self.picard_iters,
            final_update: self.final_update,
            residual: self.residual,
            certified_contraction: self.certified_contraction,
            certified: self.certified,
            damping: self.damping,
            max_value: self.field.max(),
        }
    }
}

/// Consecutive growing Picard updates after which an uncertified run is declared divergent.
pub const DIVERGENCE_WINDOW: usize = 25;

/// Picard iteration `u_{k+1} = (-Δ_h)^{-1} f(u_k)` from `u_0 = 0`.
pub fn solve_semilinear(grid: &Arc<Grid>, f: &Nonlinearity, opts: SemilinearOptions) -> Result<SolveReport> {
    const OP: &str = "solve_semilinear";
    if !f.is_positive {
        bail!(Solver, OP, "source {} is not positive on [0, ∞)", f.name());
    }
    let op = Operator::new(grid);
    let lin = LinearOptions { rel_tol: opts.linear_rel_tol, ..LinearOptions::default() };
    let n = grid.len();

    let mut tors = vec![0.0; n];
    bicgstab(&op, &vec![1.0; n], &mut tors, lin)?;
    let torsion_max = tors.iter().copied().fold(0.0, f64::max);
    let certified_contraction = f.sup_d1 * torsion_max;
    let certified = certified_contraction < 1.0;
    let beta = if certified { 1.0 } else { UNCERTIFIED_DAMPING };

    let mut u = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut final_update = f64::INFINITY;
    let mut growing = 0;
    for iter in 1..=opts.max_iters {
        for k in 0..n {
            rhs[k] = f.value(u[k]);
        }
        next.copy_from_slice(&u);
        if let Err(e) = bicgstab(&op, &rhs, &mut next, lin) {
            if certified {
                return Err(e);
            }
            bail!(Solver, OP, "Picard iterates diverge at iteration {iter} (contraction {certified_contraction:.3}); no bounded solution found");
        }
        let mut update = 0.0f64;
        for k in 0..n {
            let new = (1.0 - beta) * u[k] + beta * next[k];
            if !new.is_finite() {
                bail!(Solver, OP, "NaN detected at Picard iteration {iter}");
            }
            update = update.max((new - u[k]).abs());
            u[k] = new;
        }
        growing = if update > final_update { growing + 1 } else { 0 };
        if !certified && growing >= DIVERGENCE_WINDOW {
            bail!(Solver, OP, "Picard iterates diverge at iteration {iter} (contraction {certified_contraction:.3}); no bounded solution found");
        }
        final_update = update;
        if update <= opts.tol {
            for k in 0..n {
                rhs[k] = f.value(u[k]);
            }
            let residual = residual_sup(&op, &u, &rhs);
            // large solutions cannot beat the round-off floor of the stencil
            let floor = 128.0 * f64::EPSILON * op.abs_row_max(&u);
            if residual <= opts.tol.max(floor) {
                return Ok(SolveReport {
                    field: Field::new(grid.clone(), u),
                    picard_iters: iter,
                    final_update,
                    residual,
                    certified_contraction,
                    certified,
                    damping: beta,
                    torsion_max,
                });
            }
        }
    }
    bail!(
        Solver,
        OP,
        "max_iters {} exceeded (last update {final_update:e}, contraction {certified_contraction:.3})",
        opts.max_iters
    )
}

/// Picard iterates `u_1, u_2, ...` (undamped), for inspecting monotonicity.
pub fn picard_iterates(grid: &Arc<Grid>, f: &Nonlinearity, count: usize) -> Result<Vec<Field>> {
    let op = Operator::new(grid);
    let lin = LinearOptions { rel_tol: 1e-13, ..LinearOptions::default() };
    let n = grid.len();
    let mut u = vec![0.0; n];
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let rhs: Vec<f64> = u.iter().map(|&v| f.value(v)).collect();
        bicgstab(&op, &rhs, &mut u, lin)?;
        out.push(Field::new(grid.clone(), u.clone()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DomainSpec, Point};

    fn disk_grid(h: f64) -> Arc<Grid> {
        build_grid(&Domain::new(DomainSpec::disk(1.0)).unwrap(), h).unwrap()
    }

    #[test]
    fn grid_node_count_tracks_area() {
        let g = disk_grid(1.0 / 64.0);
        let expected = std::f64::consts::PI * 64.0 * 64.0;
        assert!((g.len() as f64 - expected).abs() / expected < 0.02, "{}", g.len());
    }

    #[test]
    fn grid_rejects_coarse_spacing() {
        let d = Domain::new(DomainSpec::disk(1.0)).unwrap();
        assert!(build_grid(&d, 0.5).is_err());
        assert!(build_grid(&d, 0.25).is_err());
    }

    #[test]
    fn grid_invariants() {
        for spec in [DomainSpec::disk(1.0), DomainSpec::equilateral_triangle(1.0), DomainSpec::ellipse(2.0, 1.0)] {
            let d = Domain::new(spec).unwrap();
            let g = build_grid(&d, 1.0 / 40.0).unwrap();
            for k in 0..g.len() {
                assert!(d.sdf(g.position(k)) <= -1e-9 * g.h);
                let nb = g.neighbors(k);
                for (j, a) in g.arms(k).iter().enumerate() {
                    assert!(*a > 0.0 && *a <= 1.0);
                    if nb[j].is_some() {
                        assert_eq!(*a, 1.0);
                    }
                }
            }
        }
    }

    #[test]
    fn rectangle_arms_cut_only_at_walls() {
        let d = Domain::new(DomainSpec::rectangle(2.0, 1.0)).unwrap();
        let g = build_grid(&d, 1.0 / 32.0).unwrap();
        for k in 0..g.len() {
            let p = g.position(k);
            for (j, &a) in g.arms(k).iter().enumerate() {
                if a < 1.0 {
                    let gap = match j {
                        EAST => 1.0 - p.x,
                        WEST => p.x + 1.0,
                        NORTH => 0.5 - p.y,
                        _ => p.y + 0.5,
                    };
                    assert!(gap < g.h, "node {p:?} arm {j}");
                }
            }
        }
    }

    #[test]
    fn laplacian_exact_on_quadratics() {
        let g = disk_grid(1.0 / 32.0);
        let u = Field::from_fn(g.clone(), |p| p.x * p.x + p.y * p.y);
        let lap = apply_laplacian(&u);
        for k in 0..g.len() {
            if g.neighbors(k).iter().all(Option::is_some) {
                assert!((lap.values()[k] - 4.0).abs() < 1e-9);
            }
        }
        let zero = apply_laplacian(&Field::zeros(g.clone()));
        assert!(zero.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn laplacian_of_disk_torsion_is_minus_one() {
        // (1 - r^2)/4 vanishes on the circle, so the cut-cell stencil sees exact data
        let g = disk_grid(1.0 / 32.0);
        let u = Field::from_fn(g.clone(), |p| 0.25 * (1.0 - p.norm_sq()));
        let lap = apply_laplacian(&u);
        for &v in lap.values() {
            assert!((v + 1.0).abs() < 1e-8, "{v}");
        }
    }

    #[test]
    fn linear_solve_is_linear() {
        let g = disk_grid(1.0 / 32.0);
        let rhs = Field::from_fn(g.clone(), |p| 1.0 + p.x * p.x);
        let rhs3 = rhs.map(|v| 3.0 * v);
        let opts = LinearOptions { rel_tol: 1e-13, ..Default::default() };
        let a = solve_linear_poisson_with(&rhs, opts).unwrap();
        let b = solve_linear_poisson_with(&rhs3, opts).unwrap();
        let scale = a.sup_norm();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((3.0 * x - y).abs() <= 1e-12 * 3.0 * scale);
        }
    }

    #[test]
    fn disk_torsion_center() {
        let g = disk_grid(1.0 / 64.0);
        let u = torsion(&g).unwrap();
        let c = g.index_of((g.nx as i64 - 1) / 2, (g.ny as i64 - 1) / 2).unwrap();
        assert_eq!(g.position(c), Point::ORIGIN);
        assert!((u.values()[c] - 0.25).abs() < 1e-4);
        let twice = solve_linear_poisson(&Field::new(g.clone(), vec![2.0; g.len()])).unwrap();
        assert!((twice.values()[c] - 0.5).abs() < 2e-4);
    }

    #[test]
    fn constant_source_needs_one_productive_iteration() {
        let g = disk_grid(1.0 / 32.0);
        let rep = solve_semilinear(&g, &Nonlinearity::constant(1.0), SemilinearOptions::default()).unwrap();
        assert_eq!(rep.picard_iters, 2);
        assert_eq!(rep.certified_contraction, 0.0);
        let lin = torsion(&g).unwrap();
        for (a, b) in rep.field.values().iter().zip(lin.values()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn certification_flags() {
        let g = disk_grid(1.0 / 32.0);
        let ok = solve_semilinear(&g, &Nonlinearity::affine(1.0, 1.0), SemilinearOptions::default()).unwrap();
        assert!(ok.certified && (ok.certified_contraction - 0.25).abs() < 1e-3);
        assert!(ok.residual <= 1e-10);
        let bad = solve_semilinear(&g, &Nonlinearity::affine(1.0, 5.0), SemilinearOptions::default()).unwrap();
        assert!(!bad.certified && bad.certified_contraction >= 1.0);
        assert_eq!(bad.damping, UNCERTIFIED_DAMPING);
        assert!(bad.residual <= 1e-9, "{}", bad.residual);
    }
}
