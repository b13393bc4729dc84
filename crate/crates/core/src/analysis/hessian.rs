use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_local, Degree, LocalFit};
use crate::fdsolver::{Field, Grid};
use crate::geometry::{Domain, Point};

/// Second-order data of `u` at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeHessian {
    pub uxx: f64,
    pub uxy: f64,
    pub uyy: f64,
    pub ux: f64,
    pub uy: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

/// Eigenvalues `(λ_min, λ_max)` of `[[a, b], [b, c]]`.
pub fn eigen2(a: f64, b: f64, c: f64) -> (f64, f64) {
    let m = 0.5 * (a + c);
    let r = (0.5 * (a - c)).hypot(b);
    (m - r, m + r)
}

impl NodeHessian {
    pub fn new(uxx: f64, uxy: f64, uyy: f64, ux: f64, uy: f64) -> Self {
        let (lambda_min, lambda_max) = eigen2(uxx, uxy, uyy);
        NodeHessian { uxx, uxy, uyy, ux, uy, lambda_min, lambda_max }
    }

    fn from_fit(f: LocalFit) -> Self {
        NodeHessian::new(f.uxx, f.uxy, f.uyy, f.ux, f.uy)
    }

    pub fn trace(&self) -> f64 {
        self.uxx + self.uyy
    }

    /// `d^T D²u d`
    pub fn second_directional(&self, d: Point) -> f64 {
        self.uxx * d.x * d.x + 2.0 * self.uxy * d.x * d.y + self.uyy * d.y * d.y
    }

    /// `∇u · d`
    pub fn directional(&self, d: Point) -> f64 {
        self.ux * d.x + self.uy * d.y
    }
}

/// Gradient and Hessian at every node where they can be evaluated.
///
/// Nodes whose eight lattice neighbors are interior use centered differences.
/// Other nodes use a least-squares quadratic over the interior nodes within
/// `3h` plus the boundary values at the arm intersections; a fit whose normal
/// matrix is too ill-conditioned leaves the node non-evaluable.
#[derive(Clone, Debug)]
pub struct HessianField {
    grid: Arc<Grid>,
    entries: Vec<Option<NodeHessian>>,
}

impl HessianField {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn get(&self, k: usize) -> Option<&NodeHessian> {
        self.entries[k].as_ref()
    }

    pub fn is_evaluable(&self, k: usize) -> bool {
        self.entries[k].is_some()
    }

    pub fn entries(&self) -> &[Option<NodeHessian>] {
        &self.entries
    }

    pub fn evaluable_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_some()).count()
    }

    /// Rows `(x, y, lambda_min, lambda_max)` of evaluable nodes in grid order.
    pub fn spectrum_rows(&self) -> Vec<[f64; 4]> {
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(k, e)| {
                e.map(|h| {
                    let p = self.grid.position(k);
                    [p.x, p.y, h.lambda_min, h.lambda_max]
                })
            })
            .collect()
    }

    /// A nodal component over all nodes, with `fill` at non-evaluable ones.
    pub fn component(&self, pick: impl Fn(&NodeHessian) -> f64, fill: f64) -> Field {
        let values = self.entries.iter().map(|e| e.as_ref().map_or(fill, &pick)).collect();
        Field::new(self.grid.clone(), values)
    }
}

/// Hessian field of a solution with zero Dirichlet data.
pub fn hessian_field(u: &Field) -> HessianField {
    hessian_field_with(u.grid(), u.values(), Some(0.0))
}

/// Hessian field of nodal data whose boundary value is `boundary_value` (if known).
pub fn hessian_field_with(grid: &Arc<Grid>, values: &[f64], boundary_value: Option<f64>) -> HessianField {
    let h = grid.h;
    let entries = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            if grid.has_full_stencil(k) {
                let (ix, iy) = grid.node(k);
                let v = |dx: i64, dy: i64| values[grid.index_of(ix + dx, iy + dy).unwrap()];
                let c = values[k];
                let h2 = h * h;
                Some(NodeHessian::new(
                    (v(1, 0) - 2.0 * c + v(-1, 0)) / h2,
                    (v(1, 1) - v(-1, 1) - v(1, -1) + v(-1, -1)) / (4.0 * h2),
                    (v(0, 1) - 2.0 * c + v(0, -1)) / h2,
                    (v(1, 0) - v(-1, 0)) / (2.0 * h),
                    (v(0, 1) - v(0, -1)) / (2.0 * h),
                ))
            } else {
                let p = grid.position(k);
                let samples = local_samples(grid, values, boundary_value, p, 3.0 * h);
                fit_local(p, h, &samples, Degree::Quadratic).map(NodeHessian::from_fit)
            }
        })
        .collect();
    HessianField { grid: grid.clone(), entries }
}

/// Interior nodes within `radius` of `p`, plus arm intersections within `radius`
/// carrying `boundary_value`.
fn local_samples(grid: &Grid, values: &[f64], boundary_value: Option<f64>, p: Point, radius: f64) -> Vec<(Point, f64)> {
    let mut out = Vec::new();
    let near = grid.nodes_within(p, radius + grid.h);
    for &j in &near {
        let q = grid.position(j);
        if q.dist(p) <= radius {
            out.push((q, values[j]));
        }
    }
    if let Some(bv) = boundary_value {
        for &j in &near {
            for q in grid.arm_boundary_points(j) {
                if q.dist(p) <= radius {
                    out.push((q, bv));
                }
            }
        }
    }
    out
}

/// Settings of the boundary fits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFitOptions {
    /// Fit radius in units of `h`.
    pub radius_cells: f64,
    /// Use a cubic instead of a quadratic.
    pub cubic: bool,
}

impl Default for BoundaryFitOptions {
    fn default() -> Self {
        BoundaryFitOptions { radius_cells: 3.0, cubic: false }
    }
}

/// Hessian data at one boundary probe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryHessian {
    pub arclength: f64,
    pub point: Point,
    /// Inward unit normal.
    pub normal: Point,
    /// `None` when the local fit failed.
    pub hessian: Option<NodeHessian>,
}

impl BoundaryHessian {
    pub fn lambda_max(&self) -> Option<f64> {
        self.hessian.map(|h| h.lambda_max)
    }

    pub fn lambda_min(&self) -> Option<f64> {
        self.hessian.map(|h| h.lambda_min)
    }

    /// `∂²u/∂n²` along the inward normal.
    pub fn normal_second(&self) -> Option<f64> {
        self.hessian.map(|h| h.second_directional(self.normal))
    }
}

/// Hessian of `u` at `m` boundary points equispaced in arclength.
pub fn boundary_hessian(domain: &Domain, u: &Field, m: usize) -> Vec<BoundaryHessian> {
    boundary_hessian_with(domain, u, m, BoundaryFitOptions::default())
}

/// [`boundary_hessian`] with explicit fit settings.
///
/// Each fit uses the interior nodes near the probe, the zero values at nearby
/// arm intersections, and zero values along the boundary arc itself.
pub fn boundary_hessian_with(domain: &Domain, u: &Field, m: usize, opts: BoundaryFitOptions) -> Vec<BoundaryHessian> {
    let grid = u.grid();
    let h = grid.h;
    let radius = opts.radius_cells * h;
    let degree = if opts.cubic { Degree::Cubic } else { Degree::Quadratic };
    domain
        .boundary_sample(m)
        .into_par_iter()
        .map(|b| {
            let mut samples = local_samples(grid, u.values(), Some(0.0), b.point, radius);
            let steps = (2.0 * opts.radius_cells).ceil() as i64 + 1;
            for j in -steps..=steps {
                let (q, _) = domain.boundary_point(b.arclength + 0.5 * h * j as f64);
                if q.dist(b.point) <= radius {
                    samples.push((q, 0.0));
                }
            }
            let hessian = fit_local(b.point, h, &samples, degree).map(NodeHessian::from_fit);
            BoundaryHessian { arclength: b.arclength, point: b.point, normal: b.normal, hessian }
        })
        .collect()
}

/// Default number of boundary probes: one per `h` of perimeter, at least 64.
pub fn default_probe_count(domain: &Domain, h: f64) -> usize {
    ((domain.boundary_length() / h).ceil() as usize).max(64)
}

/// Periodic arclength interpolation of a scalar taken from boundary probes.
#[derive(Clone, Debug)]
pub struct BoundaryProfile {
    period: f64,
    s: Vec<f64>,
    values: Vec<f64>,
}

impl BoundaryProfile {
    /// Built from the probes where `pick` gives a value; `None` if there are fewer than two.
    pub fn new(domain: &Domain, probes: &[BoundaryHessian], pick: impl Fn(&BoundaryHessian) -> Option<f64>) -> Option<Self> {
        let (s, values): (Vec<f64>, Vec<f64>) = probes.iter().filter_map(|p| pick(p).map(|v| (p.arclength, v))).unzip();
        (s.len() >= 2).then(|| BoundaryProfile { period: domain.boundary_length(), s, values })
    }

    /// `∂²u/∂n²` along the inward normal.
    pub fn normal_second(domain: &Domain, probes: &[BoundaryHessian]) -> Option<Self> {
        Self::new(domain, probes, BoundaryHessian::normal_second)
    }

    /// `d^T D²u d` for a fixed direction `d`.
    pub fn directional_second(domain: &Domain, probes: &[BoundaryHessian], d: Point) -> Option<Self> {
        Self::new(domain, probes, |p| p.hessian.map(|h| h.second_directional(d)))
    }

    /// Periodic linear interpolation at arclength `s`.
    pub fn eval(&self, s: f64) -> f64 {
        let s = s.rem_euclid(self.period);
        let n = self.s.len();
        let i = self.s.partition_point(|&t| t <= s);
        let (lo, hi) = if i == 0 || i == n { (n - 1, 0) } else { (i - 1, i) };
        let (s0, mut s1) = (self.s[lo], self.s[hi]);
        let mut x = s;
        if hi <= lo {
            s1 += self.period;
            if x < s0 {
                x += self.period;
            }
        }
        let t = if s1 > s0 { (x - s0) / (s1 - s0) } else { 0.0 };
        (1.0 - t) * self.values[lo] + t * self.values[hi]
    }
}
