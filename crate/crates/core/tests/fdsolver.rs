use std::f64::consts::PI;

use concavity_lab::fdsolver::{build_grid, picard_iterates, solve_linear_poisson, solve_semilinear, torsion, Field, SemilinearOptions};
use concavity_lab::{Domain, DomainSpec, Nonlinearity, Point};

fn disk() -> Domain {
    Domain::new(DomainSpec::disk(1.0)).unwrap()
}

fn max_error(u: &Field, exact: impl Fn(Point) -> f64) -> f64 {
    (0..u.grid().len()).map(|k| (u.values()[k] - exact(u.grid().position(k))).abs()).fold(0.0, f64::max)
}

/// Least-squares slope of log(error) against log(h).
fn observed_order(hs: &[f64], errs: &[f64]) -> f64 {
    let x: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let y: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let (mx, my) = (x.iter().sum::<f64>() / x.len() as f64, y.iter().sum::<f64>() / y.len() as f64);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// J0 by its power series; accurate to round-off for |x| <= 2.
fn bessel_j0(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 1..40 {
        term *= q / (k * k) as f64;
        sum += term;
    }
    sum
}

/// Torsion of `[-a, a] × [-b, b]` by its single sine series in y.
fn rectangle_torsion(a: f64, b: f64, p: Point) -> f64 {
    let mut u = 0.5 * (b * b - p.y * p.y);
    for j in 0..200 {
        let k = (2 * j + 1) as f64;
        let w = k * PI / (2.0 * b);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        // cosh ratio written to avoid overflow
        let ratio = ((w * (p.x.abs() - a)).exp() + (-w * (p.x.abs() + a)).exp()) / (1.0 + (-2.0 * w * a).exp());
        u -= 16.0 * b * b / (PI * k).powi(3) * sign * ratio * (w * p.y).cos();
    }
    u
}

#[test]
fn disk_torsion_is_reproduced_to_round_off() {
    for k in [16, 32, 64, 128] {
        let u = torsion(&build_grid(&disk(), 1.0 / k as f64).unwrap()).unwrap();
        let err = max_error(&u, |p| 0.25 * (1.0 - p.norm_sq()));
        assert!(err < 1e-10, "h = 1/{k}: {err}");
    }
}

#[test]
fn manufactured_solution_converges_at_second_order() {
    let exact = |p: Point| (0.5 * PI * p.norm_sq()).cos();
    let rhs = |p: Point| {
        let s = 0.5 * PI * p.norm_sq();
        PI * PI * p.norm_sq() * s.cos() + 2.0 * PI * s.sin()
    };
    let hs = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    let errs: Vec<f64> = hs
        .iter()
        .map(|&h| {
            let g = build_grid(&disk(), h).unwrap();
            let u = solve_linear_poisson(&Field::from_fn(g, rhs)).unwrap();
            max_error(&u, exact)
        })
        .collect();
    let order = observed_order(&hs, &errs);
    assert!(order >= 1.8, "order {order}, errors {errs:?}");
}

#[test]
fn affine_source_matches_bessel_solution_at_second_order() {
    // -Δu = 1 + u on the unit disk: u = J0(r)/J0(1) - 1
    let f = Nonlinearity::affine(1.0, 1.0);
    let exact = |p: Point| bessel_j0(p.norm()) / bessel_j0(1.0) - 1.0;
    let hs = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    let mut errs = Vec::new();
    for &h in &hs {
        let rep = solve_semilinear(&build_grid(&disk(), h).unwrap(), &f, SemilinearOptions::default()).unwrap();
        assert!(rep.certified);
        assert!((rep.certified_contraction - 0.25).abs() < 0.01);
        errs.push(max_error(&rep.field, exact));
    }
    let order = observed_order(&hs, &errs);
    assert!(order >= 1.8, "order {order}, errors {errs:?}");
    assert!(errs[2] < 1e-4);
}

#[test]
fn rectangle_torsion_matches_fourier_series() {
    for (len, wid, h) in [(2.0, 1.0, 1.0 / 64.0), (10.0, 1.0, 1.0 / 32.0)] {
        let d = Domain::new(DomainSpec::rectangle(len, wid)).unwrap();
        let u = torsion(&build_grid(&d, h).unwrap()).unwrap();
        let exact = |p: Point| rectangle_torsion(len / 2.0, wid / 2.0, p);
        let centre = u.values()[u.argmax()];
        assert!((centre - exact(Point::ORIGIN)).abs() < 1e-4, "{len}x{wid}: {centre} vs {}", exact(Point::ORIGIN));
        assert!(max_error(&u, exact) < 2e-4);
    }
    // the long rectangle approaches the strip value 1/8 from below
    let strip = rectangle_torsion(5.0, 0.5, Point::ORIGIN);
    assert!(strip < 0.125 && 0.125 - strip < 1e-6);
}

#[test]
fn linear_solve_scales_linearly() {
    let g = build_grid(&Domain::new(DomainSpec::ellipse(2.0, 1.0)).unwrap(), 1.0 / 32.0).unwrap();
    let rhs = Field::from_fn(g.clone(), |p| 1.0 + p.x * p.x - 0.3 * p.y);
    let u = solve_linear_poisson(&rhs).unwrap();
    for alpha in [2.0, -0.5, 1e3] {
        let ua = solve_linear_poisson(&rhs.map(|v| alpha * v)).unwrap();
        let scale = alpha.abs() * u.sup_norm();
        for (a, b) in ua.values().iter().zip(u.values()) {
            assert!((a - alpha * b).abs() <= 1e-12 * scale, "alpha {alpha}");
        }
    }
}

/// The solution, or `None` when the slope of `f` exceeds what the domain supports.
fn solvable(g: &std::sync::Arc<concavity_lab::fdsolver::Grid>, f: &Nonlinearity) -> Option<Field> {
    match solve_semilinear(g, f, SemilinearOptions::default()) {
        Ok(rep) => Some(rep.field),
        Err(e) => {
            let msg = e.to_string();
            assert!(msg.contains("diverge"), "{msg}");
            // only the steep affine entry may blow up on the catalog domains
            assert!(f.sup_d1 >= 5.0, "{}: {msg}", f.name());
            None
        }
    }
}

fn symmetric_domains() -> Vec<(DomainSpec, bool)> {
    // (domain, symmetric under y -> -y)
    vec![
        (DomainSpec::disk(1.0), true),
        (DomainSpec::ellipse(2.0, 1.0), true),
        (DomainSpec::rectangle(2.0, 1.0), true),
        (DomainSpec::rounded_rectangle(2.0, 1.0, 0.25), true),
        (DomainSpec::stadium(2.0, 1.0), true),
        (DomainSpec::equilateral_triangle(1.0), false),
    ]
}

#[test]
fn catalog_solutions_are_positive_and_symmetric() {
    for (spec, y_mirror) in symmetric_domains() {
        let d = Domain::new(spec).unwrap();
        let g = build_grid(&d, 1.0 / 32.0).unwrap();
        for f in Nonlinearity::catalog() {
            let Some(u) = solvable(&g, &f) else { continue };
            assert!(u.values().iter().all(|&v| v > 0.0), "{}", f.name());
            let scale = u.sup_norm();
            for k in 0..g.len() {
                let (ix, iy) = g.node(k);
                let mirrors = [Some((g.nx as i64 - 1 - ix, iy)), y_mirror.then_some((ix, g.ny as i64 - 1 - iy))];
                for (jx, jy) in mirrors.into_iter().flatten() {
                    let j = g.index_of(jx, jy).expect("mirror node is interior");
                    assert!((u.values()[k] - u.values()[j]).abs() <= 1e-9 * scale, "{:?} {}", d.kind(), f.name());
                }
            }
        }
    }
}

#[test]
fn picard_iterates_increase_pointwise() {
    for spec in [DomainSpec::ellipse(2.0, 1.0), DomainSpec::equilateral_triangle(1.0)] {
        let g = build_grid(&Domain::new(spec).unwrap(), 1.0 / 32.0).unwrap();
        for f in Nonlinearity::catalog() {
            let its = picard_iterates(&g, &f, 6).unwrap();
            for pair in its.windows(2) {
                let slack = 1e-11 * pair[1].sup_norm();
                for (a, b) in pair[0].values().iter().zip(pair[1].values()) {
                    assert!(b >= &(a - slack), "{}: {b} < {a}", f.name());
                }
            }
        }
    }
}
