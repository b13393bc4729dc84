use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use concavity_lab::analysis::{
    analyze, boundary_hessian_with, default_probe_count, eccentricity_sweep, hessian_field, transform_concavity, Tolerances, Transform,
};
use concavity_lab::cli::REPRESENTATION_FIT;
use concavity_lab::fdsolver::{build_grid, solve_semilinear, torsion, Field, SemilinearOptions};
use concavity_lab::nonlinearity::{check_condition, Theorem};
use concavity_lab::radial::exit_time_bound;
use concavity_lab::rearrange::{talenti_compare, theorem2_experiment};
use concavity_lab::stochastic::{
    brownian_unit_tests, estimate_exit_time, estimate_occupation, exit_histogram, source_integrand, verify_representation, Estimate,
    RepresentationCheck, WalkConfig,
};
use concavity_lab::{Domain, DomainSpec, Nonlinearity, Point, Result};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Criteria whose statement is checked as written and is known not to hold.
const EXPECTED_FAILURES: &[u32] = &[10];

const WALKS: usize = 100_000;
const SEED: u64 = 42;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn domain(spec: DomainSpec) -> Domain {
    Domain::new(spec).expect("catalog domain")
}

fn solve(d: &Domain, f: &Nonlinearity, h: f64) -> Result<Field> {
    Ok(solve_semilinear(&build_grid(d, h)?, f, SemilinearOptions::default())?.field)
}

fn walks(workers: usize) -> WalkConfig {
    WalkConfig::default().with_walks(WALKS).with_seed(SEED).with_workers(workers)
}

fn within(e: &Estimate, target: f64, slack: f64) -> bool {
    (e.mean - target).abs() <= 3.0 * e.std_error + slack
}

fn disk_torsion() -> Result<Outcome> {
    let h = 1.0 / 128.0;
    let start = Instant::now();
    let d = domain(DomainSpec::disk(1.0));
    let u = torsion(&build_grid(&d, h)?)?;
    let hess = hessian_field(&u);
    let elapsed = start.elapsed();
    let grid = u.grid();
    let err = (0..grid.len()).map(|k| (u.values()[k] - (1.0 - grid.position(k).norm_sq()) / 4.0).abs()).fold(0.0, f64::max);
    let mut hess_err: f64 = 0.0;
    let mut deep = 0;
    for k in 0..grid.len() {
        if grid.position(k).norm() > 1.0 - 4.0 * h {
            continue;
        }
        let e = hess.get(k).expect("deep node is evaluable");
        deep += 1;
        hess_err = hess_err.max((e.uxx + 0.5).abs()).max((e.uyy + 0.5).abs()).max(e.uxy.abs());
    }
    outcome(
        err <= 1e-3 && hess_err <= 5.0 * h * h && elapsed <= Duration::from_secs(30),
        format!("sup error {err:.2e}, Hessian error {hess_err:.2e} over {deep} nodes, {:.1} s", elapsed.as_secs_f64()),
    )
}

fn triangle_corners() -> Result<Outcome> {
    let h = 1.0 / 128.0;
    let f = Nonlinearity::constant(1.0);
    let d = domain(DomainSpec::equilateral_triangle(1.0));
    let r = analyze(&d, &solve(&d, &f, h)?, &f).report;
    let near = |c: Point| r.boundary_violations.iter().filter(|w| w.value > 0.0 && (w.point - c).norm() <= 0.05).count();
    let counts: Vec<usize> = d.corners().into_iter().map(near).collect();
    outcome(
        !r.boundary_nsd && counts.iter().all(|&n| n > 0),
        format!("boundary_nsd {}, positive witnesses near each vertex {counts:?}", r.boundary_nsd),
    )
}

fn theorem1_implication() -> Result<Outcome> {
    let h = 1.0 / 64.0;
    let start = Instant::now();
    let (mut premises, mut cases, mut counter) = (0, 0, Vec::new());
    for spec in [DomainSpec::disk(1.0), DomainSpec::ellipse(2.0, 1.0), DomainSpec::rounded_rectangle(2.0, 1.0, 0.25), DomainSpec::stadium(2.0, 1.0)] {
        let d = domain(spec);
        for f in Nonlinearity::catalog() {
            if !check_condition(&f, &d.stats(), 2, Theorem::T1).passes {
                continue;
            }
            cases += 1;
            let r = analyze(&d, &solve(&d, &f, h)?, &f).report;
            if r.boundary_nsd {
                premises += 1;
                if !r.interior_nsd {
                    counter.push(format!("{:?}/{}", d.kind(), f.name()));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        counter.is_empty() && elapsed <= Duration::from_secs(300),
        format!("{cases} cases, {premises} with boundary NSD, counterexamples {counter:?}, {:.1} s", elapsed.as_secs_f64()),
    )
}

fn eccentricity() -> Result<Outcome> {
    let s = eccentricity_sweep(&[2.0, 4.0, 6.0, 8.0], 1.0 / 64.0, &Nonlinearity::constant(1.0))?;
    let fit = s.fit.expect("four aspects");
    let values: Vec<String> = s.rows.iter().map(|r| format!("{:.4e}", r.lambda_max)).collect();
    outcome(
        s.all_negative && fit.slope < 0.0 && fit.r_squared >= 0.95,
        format!("lambda_max {values:?}, slope {:.4}, R² {:.5}", fit.slope, fit.r_squared),
    )
}

fn exit_times(workers: usize) -> Result<Vec<Estimate>> {
    let cfg = walks(workers);
    let disk = domain(DomainSpec::disk(1.0));
    let rect = domain(DomainSpec::rectangle(2.0, 1.0));
    Ok(vec![estimate_exit_time(&disk, disk.center(), &cfg)?, estimate_exit_time(&rect, rect.center(), &cfg)?])
}

fn exit_time_criterion(est: &[Estimate], elapsed: Duration) -> Result<Outcome> {
    let rect = domain(DomainSpec::rectangle(2.0, 1.0));
    let bound = exit_time_bound(&rect.stats(), 2);
    let (disk, rect) = (&est[0], &est[1]);
    outcome(
        within(disk, 0.5, 0.0) && rect.mean <= bound + 3.0 * rect.std_error && elapsed <= Duration::from_secs(60),
        format!(
            "disk {:.5} ± {:.1e}, rectangle {:.5} ± {:.1e} against bound {bound:.5}, {:.1} s",
            disk.mean,
            disk.std_error,
            rect.mean,
            rect.std_error,
            elapsed.as_secs_f64()
        ),
    )
}

fn representation(workers: usize) -> Result<Vec<RepresentationCheck>> {
    let h = 1.0 / 128.0;
    let cfg = walks(workers);
    let mut out = Vec::new();
    let cases = [
        (DomainSpec::disk(1.0), Nonlinearity::affine(1.0, 0.3), vec![(0.0, 0.0), (0.4, 0.2), (-0.3, -0.5)]),
        (DomainSpec::ellipse(2.0, 1.0), Nonlinearity::affine(1.0, 0.3), vec![(0.5, 0.2), (0.0, 0.0), (-1.0, -0.4)]),
        (DomainSpec::disk(1.0), Nonlinearity::constant(1.0), vec![(0.4, 0.2)]),
    ];
    for (spec, f, probes) in cases {
        let d = domain(spec);
        let u = solve(&d, &f, h)?;
        let hess = hessian_field(&u);
        let bdy = boundary_hessian_with(&d, &u, default_probe_count(&d, h), REPRESENTATION_FIT);
        for (x, y) in probes {
            for dir in [Point::new(1.0, 0.0), Point::new(0.0, 1.0)] {
                out.push(verify_representation(&d, &f, &u, &hess, &bdy, Point::new(x, y), dir, &cfg)?);
            }
        }
    }
    Ok(out)
}

fn representation_criterion(checks: &[RepresentationCheck]) -> Result<Outcome> {
    let (affine, constant) = checks.split_at(12);
    let worst = affine.iter().fold(0.0f64, |w, c| w.max(c.z_score.abs()));
    let exact_zero = constant.iter().all(|c| c.rhs_occupation.mean == 0.0 && c.rhs_occupation.std_error == 0.0);
    let worst_const = constant.iter().fold(0.0f64, |w, c| w.max(c.z_score.abs()));
    outcome(
        worst <= 3.0 && exact_zero && worst_const <= 3.0,
        format!("max |z| {worst:.3} over {} checks; f = 1: occupation term exactly 0 {exact_zero}, max |z| {worst_const:.3}", affine.len()),
    )
}

const OCCUPATION_H: f64 = 1.0 / 64.0;

fn occupation(workers: usize) -> Result<Vec<(Estimate, f64)>> {
    let f = Nonlinearity::affine(1.0, 0.3);
    let cfg = walks(workers);
    let mut out = Vec::new();
    for (spec, probes) in [
        (DomainSpec::disk(1.0), [(0.0, 0.0), (0.5, 0.0), (-0.3, 0.6), (0.1, -0.8), (-0.7, -0.2)]),
        (DomainSpec::ellipse(2.0, 1.0), [(0.0, 0.0), (1.2, 0.3), (-0.8, -0.5), (0.3, 0.7), (-1.6, 0.1)]),
    ] {
        let d = domain(spec);
        let u = solve(&d, &f, OCCUPATION_H)?;
        let sample = u.sampler(Some(0.0));
        for (x, y) in probes {
            let p = Point::new(x, y);
            let target = sample.eval(p).expect("probe inside the grid");
            out.push((estimate_occupation(&d, p, source_integrand(&u, &f), &cfg)?, target));
        }
    }
    Ok(out)
}

fn occupation_criterion(est: &[(Estimate, f64)]) -> Result<Outcome> {
    let slack = 5.0 * OCCUPATION_H * OCCUPATION_H;
    let worst = est.iter().map(|(e, t)| (e.mean - t).abs() / (3.0 * e.std_error + slack)).fold(0.0, f64::max);
    outcome(worst <= 1.0, format!("{} probes, worst |estimate - u| / (3σ + 5h²) = {worst:.3}", est.len()))
}

fn talenti() -> Result<Outcome> {
    let h = 1.0 / 64.0;
    let mut gaps = Vec::new();
    for spec in [DomainSpec::rectangle(2.0, 1.0), DomainSpec::ellipse(2.0, 1.0)] {
        let d = domain(spec);
        for f in [Nonlinearity::constant(1.0), Nonlinearity::affine(1.0, 0.3)] {
            gaps.push(talenti_compare(&d, &f, h)?.min_gap);
        }
    }
    let shown: Vec<String> = gaps.iter().map(|g| format!("{g:.2e}")).collect();
    outcome(gaps.iter().all(|&g| g >= -5.0 * h * h), format!("min(v - u*) {shown:?} against -5h² = {:.2e}", -5.0 * h * h))
}

fn theorem2() -> Result<Outcome> {
    let h = 1.0 / 64.0;
    let (mut cases, mut violations) = (0, Vec::new());
    for spec in [DomainSpec::ellipse(2.0, 1.0), DomainSpec::rounded_rectangle(4.0, 1.0, 0.25)] {
        let d = domain(spec);
        for f in Nonlinearity::catalog() {
            if check_condition(&f, &d.stats(), 2, Theorem::T2).margin <= 0.0 {
                continue;
            }
            cases += 1;
            let r = theorem2_experiment(&d, &f, h)?;
            if r.max_u > r.max_psi + 5.0 * h * h {
                violations.push(format!("{:?}/{}: {:.6} > {:.6}", d.kind(), f.name(), r.max_u, r.max_psi));
            }
        }
    }
    outcome(violations.is_empty(), format!("{cases} cases, violations {violations:?}"))
}

fn sqrt_convexity() -> Result<(Outcome, Outcome)> {
    let h = 1.0 / 128.0;
    let d = domain(DomainSpec::ellipse(2.0, 1.0));
    let u = torsion(&build_grid(&d, h)?)?;
    let tau = Tolerances::for_solution(&u, &Nonlinearity::constant(1.0)).tau_int;
    let r = transform_concavity(&u, Transform::Sqrt, tau, None)?;
    let lmin = r.min_lambda_min.map_or(f64::NAN, |w| w.value);
    let lmax = r.max_lambda_max.map_or(f64::NAN, |w| w.value);
    let nodes = r.evaluated_nodes;
    Ok((
        Outcome { pass: nodes > 0 && r.convex, detail: format!("√u convex: min lambda_min {lmin:.4} against -τ_int = {:.4} over {nodes} nodes", -tau) },
        Outcome { pass: nodes > 0 && r.concave, detail: format!("√u concave: max lambda_max {lmax:.4} against τ_int = {tau:.4}") },
    ))
}

/// Harmonic measure, seen from `(rho, 0)`, of the unit-circle arc from angle 0 to `t`.
fn poisson_arc(rho: f64, t: f64) -> f64 {
    let k = (t / (2.0 * PI)).round();
    let r = t - 2.0 * PI * k;
    k + ((1.0 + rho) / (1.0 - rho) * (0.5 * r).tan()).atan() / PI
}

fn brownian() -> Result<Outcome> {
    let cfg = walks(0);
    let b = brownian_unit_tests(&cfg)?;
    let worst_z = b.second_moment.iter().chain(&b.quadratic_form).fold(0.0f64, |w, c| w.max(c.z_score.abs()));

    let d = domain(DomainSpec::disk(1.0));
    let (rho, theta, bins) = (0.6, 0.7, 36);
    let hist = exit_histogram(&d, Point::from_angle(theta) * rho, bins, &cfg)?;
    let kept = (cfg.n_walks - hist.discarded) as f64;
    let angle = |s: f64| {
        let (p, _) = d.boundary_point(s);
        p.y.atan2(p.x) - theta
    };
    let mut chi2 = 0.0;
    for b in 0..bins {
        let a0 = angle(hist.bin_starts[b]);
        let mut a1 = angle(hist.bin_starts[b] + hist.bin_width);
        while a1 <= a0 {
            a1 += 2.0 * PI;
        }
        let expected = kept * (poisson_arc(rho, a1) - poisson_arc(rho, a0));
        chi2 += (hist.counts[b] as f64 - expected).powi(2) / expected;
    }
    let p = 1.0 - ChiSquared::new((bins - 1) as f64).expect("positive dof").cdf(chi2);
    outcome(b.pass && p > 1e-3, format!("moment identities max |z| {worst_z:.3}; exit histogram chi² {chi2:.1}, p {p:.3}"))
}

fn main() -> ExitCode {
    let mut lines: Vec<(u32, Outcome)> = Vec::new();
    let mut companion_ok = false;
    let mut record = |n: u32, r: Result<Outcome>| {
        let o = r.unwrap_or_else(|e| Outcome { pass: false, detail: format!("error: {e}") });
        println!("criterion {n:>2}: {} | {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        lines.push((n, o));
    };

    record(1, disk_torsion());
    record(2, triangle_corners());
    record(3, theorem1_implication());
    record(4, eccentricity());

    let start = Instant::now();
    let exits = exit_times(0);
    let elapsed = start.elapsed();
    let exits = match exits {
        Ok(e) => {
            record(5, exit_time_criterion(&e, elapsed));
            Some(e)
        }
        Err(e) => {
            record(5, Err(e));
            None
        }
    };
    let reps = match representation(0) {
        Ok(r) => {
            record(6, representation_criterion(&r));
            Some(r)
        }
        Err(e) => {
            record(6, Err(e));
            None
        }
    };
    let occ = match occupation(0) {
        Ok(o) => {
            record(7, occupation_criterion(&o));
            Some(o)
        }
        Err(e) => {
            record(7, Err(e));
            None
        }
    };

    record(8, talenti());
    record(9, theorem2());
    match sqrt_convexity() {
        Ok((convex, concave)) => {
            record(10, Ok(convex));
            println!("       companion: {} | {}", if concave.pass { "PASS" } else { "FAIL" }, concave.detail);
            companion_ok = concave.pass;
        }
        Err(e) => record(10, Err(e)),
    }
    record(11, brownian());

    let determinism = match (exits, reps, occ) {
        (Some(exits), Some(reps), Some(occ)) => (|| {
            let bits = |e: &Estimate| (e.mean.to_bits(), e.std_error.to_bits(), e.n_walks, e.seed, e.discarded);
            let mut same = Vec::new();
            for workers in [1, 3] {
                let a = exit_times(workers)?.iter().map(bits).eq(exits.iter().map(bits));
                let r = representation(workers)?;
                let b = r.iter().map(|c| c.z_score.to_bits()).eq(reps.iter().map(|c| c.z_score.to_bits())) && r == reps;
                let c = occupation(workers)?.iter().map(|(e, _)| bits(e)).eq(occ.iter().map(|(e, _)| bits(e)));
                same.push((workers, a && b && c));
            }
            outcome(same.iter().all(|s| s.1), format!("bit-identical to the default pool for worker counts {same:?}"))
        })(),
        _ => outcome(false, "criteria 5 to 7 did not produce estimates".to_string()),
    };
    record(12, determinism);

    drop(record);
    let failed: Vec<u32> = lines.iter().filter(|(_, o)| !o.pass).map(|(n, _)| *n).collect();
    let unexpected: Vec<u32> = failed.iter().copied().filter(|n| !EXPECTED_FAILURES.contains(n)).collect();
    println!("acceptance: {} of 12 criteria pass; failing {failed:?}; expected to fail {EXPECTED_FAILURES:?}", 12 - failed.len());
    if unexpected.is_empty() && companion_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
