//! Gradient and Hessian fields of solved fields, concavity verdicts on the
//! boundary and in the interior, transformed concavity, and the aspect-ratio
//! sweep of `λ_max` at the peak.

mod fit;
mod hessian;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::fdsolver::Field;
use crate::geometry::{Domain, Point};
use crate::nonlinearity::Nonlinearity;
use fit::{fit_local, Degree};
pub use hessian::{
    boundary_hessian, boundary_hessian_with, default_probe_count, eigen2, hessian_field, hessian_field_with,
    BoundaryFitOptions, BoundaryHessian, BoundaryProfile, HessianField, NodeHessian,
};
pub use sweep::{eccentricity_sweep, eccentricity_sweep_with, fit_line, LineFit, SweepResult, SweepRow};

/// Verdict tolerances for `λ_max ≤ τ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tau_int: f64,
    pub tau_bdy: f64,
}

impl Tolerances {
    /// `τ_int = 5h ‖f(u)‖_∞` and `τ_bdy = 20h ‖f(u)‖_∞`.
    pub fn for_solution(u: &Field, f: &Nonlinearity) -> Self {
        let h = u.grid().h;
        let fmax = u.values().iter().fold(0.0f64, |m, &v| m.max(f.value(v).abs()));
        Tolerances { tau_int: 5.0 * h * fmax, tau_bdy: 20.0 * h * fmax }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteriorWitness {
    pub value: f64,
    pub point: Point,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryWitness {
    pub value: f64,
    pub arclength: f64,
    pub point: Point,
}

/// Location of the maximum of `u` and the Hessian there.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub point: Point,
    pub value: f64,
    pub hessian: NodeHessian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcavityReport {
    /// `λ_max ≤ τ_bdy` at every evaluable boundary probe.
    pub boundary_nsd: bool,
    /// `λ_max < -τ_bdy` at every evaluable boundary probe.
    pub boundary_strict_nsd: bool,
    /// `λ_max ≤ τ_int` at every evaluable node.
    pub interior_nsd: bool,
    pub max_lambda_interior: Option<InteriorWitness>,
    pub max_lambda_boundary: Option<BoundaryWitness>,
    /// Boundary probes with `λ_max > τ_bdy`.
    pub boundary_violations: Vec<BoundaryWitness>,
    /// Number of nodes with `λ_max > τ_int`.
    pub interior_violations: usize,
    pub lambda_max_at_peak: f64,
    pub peak: Point,
    pub tolerances: Tolerances,
    pub evaluable_nodes: usize,
    pub non_evaluable_nodes: usize,
    pub boundary_probes: usize,
    pub non_evaluable_probes: usize,
}

/// Concavity verdicts from precomputed interior and boundary Hessians.
pub fn concavity_report(
    u: &Field,
    hess: &HessianField,
    boundary: &[BoundaryHessian],
    tol: Tolerances,
) -> ConcavityReport {
    let grid = u.grid();
    let mut max_int: Option<InteriorWitness> = None;
    let mut interior_violations = 0;
    for (k, e) in hess.entries().iter().enumerate() {
        let Some(e) = e else { continue };
        if e.lambda_max > tol.tau_int {
            interior_violations += 1;
        }
        if max_int.is_none_or(|w| e.lambda_max > w.value) {
            max_int = Some(InteriorWitness { value: e.lambda_max, point: grid.position(k) });
        }
    }
    let mut max_bdy: Option<BoundaryWitness> = None;
    let mut boundary_violations = Vec::new();
    let mut strict = true;
    for b in boundary {
        let Some(l) = b.lambda_max() else { continue };
        let w = BoundaryWitness { value: l, arclength: b.arclength, point: b.point };
        if l > tol.tau_bdy {
            boundary_violations.push(w);
        }
        if l >= -tol.tau_bdy {
            strict = false;
        }
        if max_bdy.is_none_or(|m| l > m.value) {
            max_bdy = Some(w);
        }
    }
    let peak = locate_peak(u);
    let evaluable_nodes = hess.evaluable_count();
    let non_evaluable_probes = boundary.iter().filter(|b| b.hessian.is_none()).count();
    ConcavityReport {
        boundary_nsd: boundary_violations.is_empty(),
        boundary_strict_nsd: strict,
        interior_nsd: interior_violations == 0,
        max_lambda_interior: max_int,
        max_lambda_boundary: max_bdy,
        boundary_violations,
        interior_violations,
        lambda_max_at_peak: peak.hessian.lambda_max,
        peak: peak.point,
        tolerances: tol,
        evaluable_nodes,
        non_evaluable_nodes: u.values().len() - evaluable_nodes,
        boundary_probes: boundary.len(),
        non_evaluable_probes,
    }
}

/// Everything [`concavity_report`] needs, computed with default settings.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub hessian: HessianField,
    pub boundary: Vec<BoundaryHessian>,
    pub report: ConcavityReport,
}

pub fn analyze(domain: &Domain, u: &Field, f: &Nonlinearity) -> Analysis {
    let hessian = hessian_field(u);
    let boundary = boundary_hessian(domain, u, default_probe_count(domain, u.grid().h));
    let report = concavity_report(u, &hessian, &boundary, Tolerances::for_solution(u, f));
    Analysis { hessian, boundary, report }
}

/// Peak of `u` from a quadratic fit to the 3×3 patch around the discrete maximum.
pub fn locate_peak(u: &Field) -> Peak {
    let grid = u.grid();
    let k = u.argmax();
    let (ix, iy) = grid.node(k);
    let p = grid.position(k);
    let mut samples = Vec::with_capacity(9);
    for dy in -1..=1 {
        for dx in -1..=1 {
            if let Some(j) = grid.index_of(ix + dx, iy + dy) {
                samples.push((grid.position(j), u.values()[j]));
            }
        }
    }
    if let Some(fit) = fit_local(p, grid.h, &samples, Degree::Quadratic) {
        let hess = NodeHessian::new(fit.uxx, fit.uxy, fit.uyy, fit.ux, fit.uy);
        let det = fit.uxx * fit.uyy - fit.uxy * fit.uxy;
        if det > 0.0 && hess.lambda_max < 0.0 {
            // stationary point of the fitted quadratic, kept inside the patch
            let dx = -(fit.uyy * fit.ux - fit.uxy * fit.uy) / det;
            let dy = -(-fit.uxy * fit.ux + fit.uxx * fit.uy) / det;
            if dx.abs() <= grid.h && dy.abs() <= grid.h {
                let value = fit.value
                    + 0.5 * (fit.ux * dx + fit.uy * dy);
                let hessian = NodeHessian::new(fit.uxx, fit.uxy, fit.uyy, 0.0, 0.0);
                return Peak { point: Point::new(p.x + dx, p.y + dy), value, hessian };
            }
        }
        return Peak { point: p, value: u.values()[k], hessian: hess };
    }
    let e = hessian_field(u).entries()[k].unwrap_or(NodeHessian::new(0.0, 0.0, 0.0, 0.0, 0.0));
    Peak { point: p, value: u.values()[k], hessian: e }
}

/// Pointwise transform applied before a concavity check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Transform {
    Sqrt,
    Power { alpha: f64 },
    Log,
}

impl Transform {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Transform::Sqrt => v.sqrt(),
            Transform::Power { alpha } => v.powf(alpha),
            Transform::Log => v.ln(),
        }
    }

    fn is_identity(self) -> bool {
        matches!(self, Transform::Power { alpha } if alpha == 1.0)
    }

    /// True when the tested property is convexity (`√u`), false for concavity.
    pub fn tests_convexity(self) -> bool {
        matches!(self, Transform::Sqrt)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformReport {
    pub transform: Transform,
    pub tau: f64,
    /// Nodes with `u ≥ min_value` are evaluated.
    pub min_value: f64,
    pub evaluated_nodes: usize,
    /// `λ_min ≥ -τ` on the evaluated set.
    pub convex: bool,
    /// `λ_max ≤ τ` on the evaluated set.
    pub concave: bool,
    /// The property tested for this transform (`convex` for sqrt, `concave` otherwise).
    pub verdict: bool,
    pub min_lambda_min: Option<InteriorWitness>,
    pub max_lambda_max: Option<InteriorWitness>,
}

/// Concavity or convexity of `T(u)` on the nodes where `u ≥ min_value`.
///
/// `min_value` defaults to `10 τ`, except for the identity where every node is
/// evaluated. The transformed field is differentiated like any other field,
/// with boundary value `T(0)` when that is finite.
pub fn transform_concavity(u: &Field, transform: Transform, tau: f64, min_value: Option<f64>) -> Result<TransformReport> {
    const OP: &str = "transform_concavity";
    let min_value = min_value.unwrap_or(if transform.is_identity() { f64::NEG_INFINITY } else { 10.0 * tau });
    let needs_positive = !transform.is_identity();
    let grid = u.grid();
    let mut selected = Vec::new();
    for (k, &v) in u.values().iter().enumerate() {
        if v >= min_value {
            if needs_positive && v <= 0.0 {
                bail!(Analysis, OP, "non-positive value {v:e} at {:?} inside the evaluation set", grid.position(k));
            }
            selected.push(k);
        }
    }
    let values: Vec<f64> = u.values().iter().map(|&v| transform.apply(v.max(0.0))).collect();
    let b0 = transform.apply(0.0);
    let hess = hessian_field_with(grid, &values, b0.is_finite().then_some(b0));
    let mut min_lmin: Option<InteriorWitness> = None;
    let mut max_lmax: Option<InteriorWitness> = None;
    let mut evaluated = 0;
    for &k in &selected {
        let Some(e) = hess.get(k) else { continue };
        evaluated += 1;
        let p = grid.position(k);
        if min_lmin.is_none_or(|w| e.lambda_min < w.value) {
            min_lmin = Some(InteriorWitness { value: e.lambda_min, point: p });
        }
        if max_lmax.is_none_or(|w| e.lambda_max > w.value) {
            max_lmax = Some(InteriorWitness { value: e.lambda_max, point: p });
        }
    }
    let convex = min_lmin.is_none_or(|w| w.value >= -tau);
    let concave = max_lmax.is_none_or(|w| w.value <= tau);
    Ok(TransformReport {
        transform,
        tau,
        min_value,
        evaluated_nodes: evaluated,
        convex,
        concave,
        verdict: if transform.tests_convexity() { convex } else { concave },
        min_lambda_min: min_lmin,
        max_lambda_max: max_lmax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdsolver::{build_grid, torsion};
    use crate::geometry::DomainSpec;

    fn torsion_on(spec: DomainSpec, h: f64) -> (Domain, Field) {
        let d = Domain::new(spec).unwrap();
        let u = torsion(&build_grid(&d, h).unwrap()).unwrap();
        (d, u)
    }

    #[test]
    fn disk_torsion_is_concave() {
        let (d, u) = torsion_on(DomainSpec::disk(1.0), 1.0 / 64.0);
        let a = analyze(&d, &u, &Nonlinearity::constant(1.0));
        assert!(a.report.boundary_nsd && a.report.interior_nsd && a.report.boundary_strict_nsd, "{:#?}", a.report);
        assert!((a.report.lambda_max_at_peak + 0.5).abs() < 1e-6);
        assert!(a.report.peak.norm() < 1e-9);
    }

    #[test]
    fn triangle_torsion_is_not_concave_at_corners() {
        let (d, u) = torsion_on(DomainSpec::equilateral_triangle(1.0), 1.0 / 64.0);
        let a = analyze(&d, &u, &Nonlinearity::constant(1.0));
        assert!(!a.report.boundary_nsd);
        for v in d.corners() {
            assert!(a.report.boundary_violations.iter().any(|w| w.point.dist(v) < 0.05), "{v:?}");
        }
    }

    #[test]
    fn identity_transform_matches_interior_verdict() {
        let (d, u) = torsion_on(DomainSpec::ellipse(2.0, 1.0), 1.0 / 32.0);
        let a = analyze(&d, &u, &Nonlinearity::constant(1.0));
        let t = transform_concavity(&u, Transform::Power { alpha: 1.0 }, a.report.tolerances.tau_int, None).unwrap();
        assert_eq!(t.verdict, a.report.interior_nsd);
        assert_eq!(t.evaluated_nodes, a.report.evaluable_nodes);
    }

    #[test]
    fn sqrt_of_disk_torsion_is_concave_not_convex() {
        let (_, u) = torsion_on(DomainSpec::disk(1.0), 1.0 / 32.0);
        let t = transform_concavity(&u, Transform::Sqrt, 1e-3, Some(0.05)).unwrap();
        assert!(t.evaluated_nodes > 100);
        assert!(t.concave && !t.convex && !t.verdict, "{t:#?}");
        let mut z = u.clone();
        z.values_mut()[0] = 0.0;
        assert!(transform_concavity(&z, Transform::Log, 1e-3, Some(-1.0)).is_err());
    }
}
