//! Symmetric decreasing rearrangement of grid fields on the equal-area disk,
//! the comparison `v ≥ u*` against the disk problem with rearranged source,
//! and the ordering `max u ≤ max ψ` against the radial solution on the
//! equal-area disk.
//!
//! Every interior node carries the cell measure `h²`. After sorting the
//! values in decreasing order, node `k` occupies the annulus between radii
//! `√(k h²/π)` and `√((k+1) h²/π)`.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::fdsolver::{build_grid, solve_semilinear, Field, SemilinearOptions};
use crate::geometry::Domain;
use crate::io;
use crate::nonlinearity::{check_condition, ConditionReport, Nonlinearity, Theorem};
use crate::radial::{radial_max, solve_radial_with, RadialOptions};

/// Default number of points of the uniform radial mesh of a profile.
pub const PROFILE_POINTS: usize = 1025;

/// Step-function rearrangement `u*` on a disk of prescribed area.
///
/// Sorted node values fill the inner annuli, one cell measure each; the rest
/// of the disk (the boundary strip not covered by cells) carries `pad_value`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RearrangedProfile {
    /// Node values sorted in decreasing order.
    pub sorted: Vec<f64>,
    /// Area of one cell.
    pub cell_measure: f64,
    /// Value on the uncovered outer annulus.
    pub pad_value: f64,
    /// Radius of the disk, `√(area/π)`.
    pub radius: f64,
    /// Uniform mesh on `[0, radius]`.
    pub radii: Vec<f64>,
    /// `u*` sampled at `radii`; `values[0]` is the maximum.
    pub values: Vec<f64>,
}

impl RearrangedProfile {
    /// Outer radius of the annulus of sorted node `k`.
    pub fn outer_radius(&self, k: usize) -> f64 {
        ((k + 1) as f64 * self.cell_measure / PI).sqrt()
    }

    /// Radius of the disk covered by node cells.
    pub fn covered_radius(&self) -> f64 {
        (self.sorted.len() as f64 * self.cell_measure / PI).sqrt()
    }

    /// `u*(r)`; zero outside the disk.
    pub fn eval(&self, r: f64) -> f64 {
        if r > self.radius {
            return 0.0;
        }
        let k = (PI * r * r / self.cell_measure).floor() as usize;
        self.sorted.get(k).copied().unwrap_or(self.pad_value)
    }

    /// `|{u* > t}|`
    pub fn measure_above(&self, t: f64) -> f64 {
        let nodes = self.sorted.partition_point(|&v| v > t) as f64 * self.cell_measure;
        if self.pad_value > t {
            PI * self.radius * self.radius
        } else {
            nodes
        }
    }

    /// `∫ u* dA`
    pub fn integral(&self) -> f64 {
        let covered = self.sorted.len() as f64 * self.cell_measure;
        self.sorted.iter().sum::<f64>() * self.cell_measure + self.pad_value * (PI * self.radius * self.radius - covered)
    }

    pub fn max(&self) -> f64 {
        self.sorted.first().copied().unwrap_or(0.0).max(self.pad_value)
    }

    /// Squared annulus edges and the value on each annulus, innermost first.
    fn annuli(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.sorted.len();
        let mut edges: Vec<f64> = (0..=n).map(|k| k as f64 * self.cell_measure / PI).collect();
        let mut values = self.sorted.clone();
        let r2 = self.radius * self.radius;
        if r2 > edges[n] {
            edges.push(r2);
            values.push(self.pad_value);
        }
        (edges, values)
    }
}

/// Rearrangement of nodal values with cell measure `cell` onto the disk of
/// area `area` (at least the covered area `N · cell`), padding with `pad_value`.
pub fn rearrange_values(values: &[f64], cell: f64, area: f64, pad_value: f64, points: usize) -> Result<RearrangedProfile> {
    const OP: &str = "rearrange_field";
    if values.is_empty() {
        bail!(Rearrange, OP, "empty field");
    }
    if let Some(v) = values.iter().chain([&pad_value]).find(|v| !(**v >= 0.0)) {
        bail!(Rearrange, OP, "values must be non-negative, found {v:e}");
    }
    if points < 2 {
        bail!(Rearrange, OP, "profile needs at least 2 points");
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let radius = (area.max(sorted.len() as f64 * cell) / PI).sqrt();
    let mut p = RearrangedProfile { sorted, cell_measure: cell, pad_value, radius, radii: Vec::new(), values: Vec::new() };
    p.radii = (0..points).map(|i| radius * i as f64 / (points - 1) as f64).collect();
    p.values = p.radii.iter().map(|&r| p.eval(r)).collect();
    Ok(p)
}

/// Symmetric decreasing rearrangement of a grid field with zero boundary
/// values, on the disk of the domain's area.
pub fn rearrange_field(u: &Field) -> Result<RearrangedProfile> {
    let h = u.grid().h;
    let area = u.grid().domain().stats().area;
    rearrange_values(u.values(), h * h, area, 0.0, PROFILE_POINTS)
}

/// Exact solution of `-Δv = g*` on the disk carrying the step function `g*`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepPotential {
    /// Squared annulus edges, `edges[0] = 0`.
    edges: Vec<f64>,
    source: Vec<f64>,
    /// `∫_0^{r_k} t g*(t) dt` at the outer edge of annulus `k`.
    inner: Vec<f64>,
    /// `v` at the outer edge of annulus `k`.
    pub at_outer: Vec<f64>,
}

impl StepPotential {
    pub fn new(g: &RearrangedProfile) -> Self {
        let (edges, source) = g.annuli();
        let m = source.len();
        let mut inner = vec![0.0; m];
        let mut acc = 0.0;
        for k in 0..m {
            acc += 0.5 * source[k] * (edges[k + 1] - edges[k]);
            inner[k] = acc;
        }
        let mut at_outer = vec![0.0; m];
        for k in (0..m.saturating_sub(1)).rev() {
            let j = k + 1;
            at_outer[k] = at_outer[j] + annulus_integral(inner[k], source[j], edges[j], edges[j + 1]);
        }
        StepPotential { edges, source, inner, at_outer }
    }

    /// `v(r)`; zero outside the disk.
    pub fn eval(&self, r: f64) -> f64 {
        let r2 = r * r;
        let m = self.source.len();
        if r2 >= self.edges[m] {
            return 0.0;
        }
        let k = (self.edges.partition_point(|&e| e <= r2) - 1).min(m - 1);
        let before = if k == 0 { 0.0 } else { self.inner[k - 1] };
        let (a2, b2) = (self.edges[k], self.edges[k + 1]);
        self.at_outer[k] + annulus_integral(before, self.source[k], a2, b2)
            - annulus_integral(before, self.source[k], a2, r2.max(a2))
    }
}

/// `∫_a^x I(s)/s ds` with `I(s) = before + g (s² - a²)/2`, from squared radii.
fn annulus_integral(before: f64, g: f64, a2: f64, x2: f64) -> f64 {
    let c = before - 0.5 * g * a2;
    let log_part = if c == 0.0 || x2 == a2 { 0.0 } else { c * 0.5 * (x2 / a2).ln() };
    log_part + 0.25 * g * (x2 - a2)
}

/// Output of [`talenti_compare`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TalentiReport {
    pub h: f64,
    pub u_star: RearrangedProfile,
    /// `v` sampled on `u_star.radii`.
    pub v: Vec<f64>,
    /// `min (v - u*)` over all annuli.
    pub min_gap: f64,
    /// Outer radius of the annulus attaining `min_gap`.
    pub min_gap_radius: f64,
    pub max_u: f64,
    pub max_v: f64,
}

/// Compare `u*` with the solution of `-Δv = (f(u))*` on the disk of the same measure.
pub fn talenti_compare(domain: &Domain, f: &Nonlinearity, h: f64) -> Result<TalentiReport> {
    let grid = build_grid(domain, h)?;
    let rep = solve_semilinear(&grid, f, SemilinearOptions::default())?;
    talenti_from_solution(&rep.field, f)
}

/// [`talenti_compare`] for an already solved field.
pub fn talenti_from_solution(u: &Field, f: &Nonlinearity) -> Result<TalentiReport> {
    let h = u.grid().h;
    let u_star = rearrange_field(u)?;
    let pot = StepPotential::new(&rearranged_source(u, f)?);
    // v decreases, so within annulus k the gap v - u*_k is smallest at the outer radius
    let (mut min_gap, mut min_k) = (f64::INFINITY, 0);
    for (k, (&v, &us)) in pot.at_outer.iter().zip(&u_star.sorted).enumerate() {
        if v - us < min_gap {
            min_gap = v - us;
            min_k = k;
        }
    }
    let v: Vec<f64> = u_star.radii.iter().map(|&r| pot.eval(r)).collect();
    Ok(TalentiReport {
        h,
        min_gap,
        min_gap_radius: u_star.outer_radius(min_k),
        max_u: u_star.max(),
        max_v: v[0],
        v,
        u_star,
    })
}

/// `(f(u))*` on the disk of the domain's area, padded with `f(0)`.
fn rearranged_source(u: &Field, f: &Nonlinearity) -> Result<RearrangedProfile> {
    let h = u.grid().h;
    let source: Vec<f64> = u.values().iter().map(|&v| f.value(v)).collect();
    rearrange_values(&source, h * h, u.grid().domain().stats().area, f.value(0.0), 2)
}

/// Output of [`theorem2_experiment`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Report {
    pub h: f64,
    pub max_u: f64,
    pub max_psi: f64,
    /// `√(|Ω|/π)`
    pub ball_radius: f64,
    pub condition: ConditionReport,
    /// False when the condition fails; the comparison is then exploratory.
    pub certified: bool,
    /// `5h²` plus the radial quadrature error estimate.
    pub tol: f64,
    /// `max_u ≤ max_psi + tol`
    pub pass: bool,
    /// `u*(r) ≤ ψ(r) + tol` at every profile radius.
    pub profile_pass: bool,
    pub radii: Vec<f64>,
    pub u_star: Vec<f64>,
    pub psi: Vec<f64>,
    pub v: Vec<f64>,
}

impl Theorem2Report {
    /// Rows `(r, u_star, psi, v)`.
    pub fn profile_csv(&self) -> String {
        io::csv_string(
            &["r", "u_star", "psi", "v"],
            (0..self.radii.len()).map(|i| [self.radii[i], self.u_star[i], self.psi[i], self.v[i]]),
        )
    }

    pub fn write_profile_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.profile_csv())?;
        Ok(())
    }
}

/// Grid maximum of `u` on `domain` against `max ψ` on the equal-area disk.
pub fn theorem2_experiment(domain: &Domain, f: &Nonlinearity, h: f64) -> Result<Theorem2Report> {
    let grid = build_grid(domain, h)?;
    let rep = solve_semilinear(&grid, f, SemilinearOptions::default())?;
    theorem2_from_solution(domain, &rep.field, f)
}

pub fn theorem2_from_solution(domain: &Domain, u: &Field, f: &Nonlinearity) -> Result<Theorem2Report> {
    let h = u.grid().h;
    let stats = domain.stats();
    let condition = check_condition(f, &stats, 2, Theorem::T2);
    let ball_radius = (stats.area / PI).sqrt();
    let opts = RadialOptions::default();
    let psi = solve_radial_with(f, ball_radius, 2, opts)?;
    let coarse = solve_radial_with(f, ball_radius, 2, RadialOptions { nodes: opts.nodes / 2 + 1, ..opts })?;
    let quad_err = (radial_max(&psi) - radial_max(&coarse)).abs();
    let tol = 5.0 * h * h + quad_err;

    let talenti = talenti_from_solution(u, f)?;
    let outer = ball_radius.max(talenti.u_star.radius);
    let m = PROFILE_POINTS;
    let radii: Vec<f64> = (0..m).map(|i| outer * i as f64 / (m - 1) as f64).collect();
    let pot = StepPotential::new(&rearranged_source(u, f)?);
    let psi_at = |r: f64| if r <= ball_radius { psi.eval(r) } else { 0.0 };
    let u_star: Vec<f64> = radii.iter().map(|&r| talenti.u_star.eval(r)).collect();
    let psi_v: Vec<f64> = radii.iter().map(|&r| psi_at(r)).collect();
    let v: Vec<f64> = radii.iter().map(|&r| pot.eval(r)).collect();
    let max_u = u.max();
    let max_psi = radial_max(&psi);
    Ok(Theorem2Report {
        h,
        max_u,
        max_psi,
        ball_radius,
        certified: condition.passes,
        condition,
        tol,
        pass: max_u <= max_psi + tol,
        profile_pass: u_star.iter().zip(&psi_v).all(|(a, b)| *a <= b + tol),
        radii,
        u_star,
        psi: psi_v,
        v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;

    #[test]
    fn constants_rearrange_to_constants() {
        let p = rearrange_values(&[2.0; 50], 0.01, 0.5, 2.0, 11).unwrap();
        assert!(p.values.iter().all(|&v| v == 2.0));
        assert!((p.radius - (0.5 / PI).sqrt()).abs() < 1e-15);
        assert!((p.integral() - 1.0).abs() < 1e-12);
        let padded = rearrange_values(&[2.0; 50], 0.01, 0.6, 0.0, 11).unwrap();
        assert!((padded.integral() - 1.0).abs() < 1e-12);
        assert_eq!(padded.eval(padded.radius), 0.0);
        assert!(rearrange_values(&[1.0, -0.1], 0.01, 0.0, 0.0, 11).is_err());
        assert!(rearrange_values(&[], 0.01, 0.0, 0.0, 11).is_err());
    }

    #[test]
    fn step_potential_of_constant_source() {
        // g* ≡ 1 on a disk of radius R gives v = (R² - r²)/4
        let g = rearrange_values(&vec![1.0; 4000], 1e-3, 4.5, 1.0, 2).unwrap();
        let pot = StepPotential::new(&g);
        let rr = g.radius * g.radius;
        for &r in &[0.0, 0.1, 0.37, 0.5, g.radius] {
            assert!((pot.eval(r) - (rr - r * r) / 4.0).abs() < 1e-12, "{r}");
        }
        for k in [0, 10, 3999, 4000] {
            let r = if k < 4000 { g.outer_radius(k) } else { g.radius };
            assert!((pot.at_outer[k] - (rr - r * r) / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn disk_is_the_equality_case() {
        let d = Domain::new(DomainSpec::disk(1.0)).unwrap();
        let h = 1.0 / 64.0;
        let t = talenti_compare(&d, &Nonlinearity::constant(1.0), h).unwrap();
        assert!(t.min_gap.abs() <= 5.0 * h * h, "{}", t.min_gap);
        let e = theorem2_experiment(&d, &Nonlinearity::affine(1.0, 1.0), h).unwrap();
        assert!(e.certified && e.pass);
        assert!((e.max_u - e.max_psi).abs() <= e.tol, "{} {} {}", e.max_u, e.max_psi, e.tol);
    }
}
