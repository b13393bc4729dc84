//! Walk-on-spheres estimators for harmonic measure, exit times and occupation
//! functionals, and a check of the stochastic representation of second
//! directional derivatives.
//!
//! Walk `i` draws from its own ChaCha8 stream (`seed`, stream `i`) and the
//! per-walk results are reduced in walk order, so estimates do not depend on
//! the number of worker threads.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{BoundaryHessian, BoundaryProfile, HessianField};
use crate::error::{bail, Result};
use crate::fdsolver::Field;
use crate::geometry::{Domain, Point};
use crate::io;
use crate::nonlinearity::Nonlinearity;

/// Largest tolerated fraction of discarded walks.
pub const DISCARD_BUDGET: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkConfig {
    pub n_walks: usize,
    /// Absorption distance; `None` means `1e-4 · diameter`.
    pub eps_shell: Option<f64>,
    pub max_steps: usize,
    pub seed: u64,
    /// Worker threads; 0 uses all available cores.
    pub workers: usize,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig { n_walks: 100_000, eps_shell: None, max_steps: 1_000_000, seed: 0, workers: 0 }
    }
}

impl WalkConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_walks(mut self, n_walks: usize) -> Self {
        self.n_walks = n_walks;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    /// Effective shell width for `domain`, after validation.
    pub fn shell(&self, domain: &Domain) -> Result<f64> {
        const OP: &str = "walk_config";
        let stats = domain.stats();
        let eps = self.eps_shell.unwrap_or(1e-4 * stats.diameter);
        if !(eps > 0.0 && eps <= stats.inradius / 10.0) {
            bail!(Stochastic, OP, "eps_shell {eps} must lie in (0, inradius/10 = {}]", stats.inradius / 10.0);
        }
        if self.n_walks < 2 {
            bail!(Stochastic, OP, "need at least 2 walks, got {}", self.n_walks);
        }
        if self.max_steps == 0 {
            bail!(Stochastic, OP, "max_steps must be positive");
        }
        Ok(eps)
    }
}

/// Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation over `√n_walks`.
    pub std_error: f64,
    /// Walks that contributed.
    pub n_walks: usize,
    pub seed: u64,
    pub discarded: usize,
}

impl Estimate {
    /// Mean and standard error of `samples` in order.
    pub fn from_samples(samples: &[f64], seed: u64, discarded: usize) -> Estimate {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        Estimate { mean, std_error: (var / n as f64).sqrt(), n_walks: n, seed, discarded }
    }

    /// `(value - mean) / std_error`, infinite when the error is zero and the values differ.
    pub fn z_score(&self, value: f64) -> f64 {
        let d = value - self.mean;
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d == 0.0 {
            0.0
        } else {
            d.signum() * f64::INFINITY
        }
    }
}

/// Independent random stream of walk `index`.
pub fn walk_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Exit point of one walk and the spheres it jumped across.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkPath {
    pub exit: Point,
    pub exit_arclength: f64,
    /// `(center, radius)` per step.
    pub spheres: Vec<(Point, f64)>,
}

/// Core walk loop; `on_step` sees every sphere and may draw from the same stream.
fn walk<R: Rng>(
    domain: &Domain,
    x: Point,
    rng: &mut R,
    eps: f64,
    max_steps: usize,
    mut on_step: impl FnMut(Point, f64, &mut R),
) -> Option<(Point, f64)> {
    let mut y = x;
    for _ in 0..max_steps {
        let rho = -domain.sdf(y);
        if rho <= eps {
            return Some(domain.closest_boundary(y));
        }
        on_step(y, rho, rng);
        let theta = rng.random::<f64>() * 2.0 * PI;
        y = y + Point::from_angle(theta) * rho;
    }
    None
}

fn check_start(op: &'static str, domain: &Domain, x: Point, eps: f64) -> Result<()> {
    if !(domain.sdf(x) < -eps) {
        bail!(Stochastic, op, "start point {x:?} is not inside the domain by more than eps_shell = {eps:e}");
    }
    Ok(())
}

/// One walk from `x`: jump to a uniform point on the largest inscribed circle
/// until within `eps` of the boundary, then project onto it.
pub fn wos_exit<R: Rng>(domain: &Domain, x: Point, rng: &mut R, eps: f64, max_steps: usize) -> Result<WalkPath> {
    const OP: &str = "wos_exit";
    check_start(OP, domain, x, eps)?;
    let mut spheres = Vec::new();
    match walk(domain, x, rng, eps, max_steps, |c, r, _| spheres.push((c, r))) {
        Some((exit, exit_arclength)) => Ok(WalkPath { exit, exit_arclength, spheres }),
        None => bail!(Stochastic, OP, "walk from {x:?} exceeded {max_steps} steps"),
    }
}

/// Run `per_walk` for every walk index on the configured pool, in walk order.
fn run_walks<T: Send>(cfg: &WalkConfig, per_walk: impl Fn(u64) -> Option<T> + Sync + Send) -> Result<Vec<Option<T>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| crate::Error::Stochastic { op: "run_walks", msg: e.to_string() })?;
    Ok(pool.install(|| (0..cfg.n_walks as u64).into_par_iter().map(&per_walk).collect()))
}

fn summarize(op: &'static str, cfg: &WalkConfig, results: &[Option<f64>]) -> Result<Estimate> {
    let samples: Vec<f64> = results.iter().flatten().copied().collect();
    let discarded = results.len() - samples.len();
    check_discards(op, cfg, discarded)?;
    Ok(Estimate::from_samples(&samples, cfg.seed, discarded))
}

fn check_discards(op: &'static str, cfg: &WalkConfig, discarded: usize) -> Result<()> {
    if discarded as f64 > DISCARD_BUDGET * cfg.n_walks as f64 {
        bail!(Stochastic, op, "{discarded} of {} walks discarded, above the {}% budget", cfg.n_walks, DISCARD_BUDGET * 100.0);
    }
    Ok(())
}

/// `∫_{∂Ω} g dω_x` from walk exit points; `g` gets the exit point and its arclength.
pub fn estimate_harmonic_integral(
    domain: &Domain,
    x: Point,
    g: impl Fn(Point, f64) -> f64 + Sync + Send,
    cfg: &WalkConfig,
) -> Result<Estimate> {
    const OP: &str = "estimate_harmonic_integral";
    let eps = cfg.shell(domain)?;
    check_start(OP, domain, x, eps)?;
    let results = run_walks(cfg, |i| {
        let mut rng = walk_rng(cfg.seed, i);
        walk(domain, x, &mut rng, eps, cfg.max_steps, |_, _, _| {}).map(|(p, s)| g(p, s))
    })?;
    summarize(OP, cfg, &results)
}

/// `𝔼 τ` for Brownian motion from `x`, using the exact mean `ρ²/2` of each sphere step.
pub fn estimate_exit_time(domain: &Domain, x: Point, cfg: &WalkConfig) -> Result<Estimate> {
    const OP: &str = "estimate_exit_time";
    let eps = cfg.shell(domain)?;
    check_start(OP, domain, x, eps)?;
    let results = run_walks(cfg, |i| {
        let mut rng = walk_rng(cfg.seed, i);
        let mut tau = 0.0;
        walk(domain, x, &mut rng, eps, cfg.max_steps, |_, r, _| tau += 0.5 * r * r).map(|_| tau)
    })?;
    summarize(OP, cfg, &results)
}

/// Radius fraction `s ∈ (0, 1]` with density `4 s ln(1/s)`, the normalized
/// Green's function of the disk seen from its center, at CDF level `u`.
pub fn green_radius(u: f64) -> f64 {
    // CDF in v = s²: v (1 - ln v), increasing and concave on (0, 1]
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let g = |v: f64| v * (1.0 - v.ln()) - u;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut v = u;
    for _ in 0..200 {
        let gv = g(v);
        if gv.abs() <= 4.0 * f64::EPSILON * u || hi - lo <= f64::EPSILON * hi {
            break;
        }
        if gv > 0.0 {
            hi = v;
        } else {
            lo = v;
        }
        let next = v + gv / v.ln();
        v = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
    }
    v.sqrt()
}

/// Point of the disk `(center, rho)` drawn from its normalized Green density.
fn green_point<R: Rng>(center: Point, rho: f64, rng: &mut R) -> Point {
    let s = green_radius(rng.random::<f64>());
    let theta = rng.random::<f64>() * 2.0 * PI;
    center + Point::from_angle(theta) * (s * rho)
}

/// `𝔼 ½∫₀^τ F(ω_x(s)) ds`; one Green-density sample per sphere step.
/// Walks where `F` is unavailable are discarded.
pub fn estimate_occupation(
    domain: &Domain,
    x: Point,
    integrand: impl Fn(Point) -> Option<f64> + Sync + Send,
    cfg: &WalkConfig,
) -> Result<Estimate> {
    const OP: &str = "estimate_occupation";
    let eps = cfg.shell(domain)?;
    check_start(OP, domain, x, eps)?;
    let results = run_walks(cfg, |i| {
        let mut rng = walk_rng(cfg.seed, i);
        let mut acc = Some(0.0);
        walk(domain, x, &mut rng, eps, cfg.max_steps, |c, r, rng| {
            let xi = green_point(c, r, rng);
            acc = acc.and_then(|a| integrand(xi).map(|v| a + 0.25 * r * r * v));
        })?;
        acc
    })?;
    summarize(OP, cfg, &results)
}

/// Occupation integrand `f(u)` from a solved field.
pub fn source_integrand<'a>(u: &'a Field, f: &'a Nonlinearity) -> impl Fn(Point) -> Option<f64> + Sync + Send + 'a {
    move |p| u.sampler(Some(0.0)).eval(p).map(|v| f.value(v))
}

/// Exit-point histogram over arclength bins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExitHistogram {
    pub bin_starts: Vec<f64>,
    pub bin_width: f64,
    pub counts: Vec<u64>,
    pub discarded: usize,
}

impl ExitHistogram {
    pub fn csv(&self) -> String {
        io::csv_string(&["bin_start_arclength", "count"], self.bin_starts.iter().zip(&self.counts).map(|(&s, &c)| [s, c as f64]))
    }
}

pub fn exit_histogram(domain: &Domain, x: Point, bins: usize, cfg: &WalkConfig) -> Result<ExitHistogram> {
    const OP: &str = "exit_histogram";
    if bins == 0 {
        bail!(Stochastic, OP, "need at least one bin");
    }
    let eps = cfg.shell(domain)?;
    check_start(OP, domain, x, eps)?;
    let total = domain.boundary_length();
    let width = total / bins as f64;
    let results = run_walks(cfg, |i| {
        let mut rng = walk_rng(cfg.seed, i);
        walk(domain, x, &mut rng, eps, cfg.max_steps, |_, _, _| {}).map(|(_, s)| ((s.rem_euclid(total) / width) as usize).min(bins - 1))
    })?;
    let mut counts = vec![0u64; bins];
    let mut discarded = 0;
    for r in &results {
        match r {
            Some(b) => counts[*b] += 1,
            None => discarded += 1,
        }
    }
    check_discards(OP, cfg, discarded)?;
    Ok(ExitHistogram { bin_starts: (0..bins).map(|b| b as f64 * width).collect(), bin_width: width, counts, discarded })
}

/// Relative floor on the combined standard error used in the z-score, for
/// integrands that are constant up to round-off.
pub const STD_ERROR_FLOOR: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepresentationCheck {
    pub x: Point,
    pub direction: Point,
    /// `∂²u/∂e²` at `x` from the grid Hessian field.
    pub lhs: f64,
    /// `𝔼 ½∫₀^τ [f''(u)(∂_e u)² + f'(u) ∂²_e u] ds`
    pub rhs_occupation: Estimate,
    /// `∫_{∂Ω} ∂²_e u dω_x`
    pub rhs_boundary: Estimate,
    /// Sum of the two means; error from the per-walk totals.
    pub rhs_total: Estimate,
    pub z_score: f64,
}

/// Compare `∂²u/∂e²(x)` with its representation through the occupation and
/// boundary terms, both computed from the same walks.
#[allow(clippy::too_many_arguments)]
pub fn verify_representation(
    domain: &Domain,
    f: &Nonlinearity,
    u: &Field,
    hess: &HessianField,
    boundary: &[BoundaryHessian],
    x: Point,
    direction: Point,
    cfg: &WalkConfig,
) -> Result<RepresentationCheck> {
    const OP: &str = "verify_representation";
    let e = direction.normalized();
    if !e.norm().is_finite() || e.norm() == 0.0 {
        bail!(Stochastic, OP, "direction must be non-zero");
    }
    let eps = cfg.shell(domain)?;
    check_start(OP, domain, x, eps)?;

    let d1 = hess.component(|h| h.directional(e), f64::NAN);
    let d2 = hess.component(|h| h.second_directional(e), f64::NAN);
    let (su, s1, s2) = (u.sampler(Some(0.0)), d1.sampler(None), d2.sampler(None));
    let finite = |v: Option<f64>| v.filter(|v| v.is_finite());
    let Some(lhs) = finite(s2.eval(x)) else {
        bail!(Stochastic, OP, "Hessian not evaluable at {x:?}");
    };
    let Some(profile) = BoundaryProfile::directional_second(domain, boundary, e) else {
        bail!(Stochastic, OP, "fewer than two evaluable boundary probes");
    };
    let integrand = |p: Point| -> Option<f64> {
        let uv = finite(su.eval(p))?;
        let a = f.d2(uv);
        let b = f.d1(uv);
        // skip derivative lookups whose coefficient vanishes identically
        let t1 = if a == 0.0 { 0.0 } else { a * finite(s1.eval(p))?.powi(2) };
        let t2 = if b == 0.0 { 0.0 } else { b * finite(s2.eval(p))? };
        Some(t1 + t2)
    };

    let results = run_walks(cfg, |i| {
        let mut rng = walk_rng(cfg.seed, i);
        let mut acc = Some(0.0);
        let (_, s) = walk(domain, x, &mut rng, eps, cfg.max_steps, |c, r, rng| {
            let xi = green_point(c, r, rng);
            acc = acc.and_then(|a| integrand(xi).map(|v| a + 0.25 * r * r * v));
        })?;
        Some((acc?, profile.eval(s)))
    })?;
    let kept: Vec<(f64, f64)> = results.iter().flatten().copied().collect();
    let discarded = results.len() - kept.len();
    check_discards(OP, cfg, discarded)?;
    let occ: Vec<f64> = kept.iter().map(|p| p.0).collect();
    let bdy: Vec<f64> = kept.iter().map(|p| p.1).collect();
    let tot: Vec<f64> = kept.iter().map(|p| p.0 + p.1).collect();
    let rhs_occupation = Estimate::from_samples(&occ, cfg.seed, discarded);
    let rhs_boundary = Estimate::from_samples(&bdy, cfg.seed, discarded);
    let mut rhs_total = Estimate::from_samples(&tot, cfg.seed, discarded);
    rhs_total.mean = rhs_occupation.mean + rhs_boundary.mean;
    let se = rhs_total.std_error.max(STD_ERROR_FLOOR * lhs.abs().max(1.0));
    Ok(RepresentationCheck {
        x,
        direction: e,
        lhs,
        rhs_occupation,
        rhs_boundary,
        z_score: (lhs - rhs_total.mean) / se,
        rhs_total,
    })
}

/// One Monte Carlo identity check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub label: String,
    pub expected: f64,
    pub estimate: Estimate,
    pub z_score: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrownianReport {
    /// `𝔼‖ω(t)‖² = n t` for `t ∈ {0.1, 1}`.
    pub second_moment: Vec<IdentityCheck>,
    /// `𝔼⟨X, AX⟩ = tr(A)/n` for `X` uniform on the unit circle.
    pub quadratic_form: Vec<IdentityCheck>,
    pub pass: bool,
}

/// Increments per sampled Brownian path in [`brownian_unit_tests`].
pub const BROWNIAN_INCREMENTS: usize = 16;

/// Checks of the two moment identities behind the representation formula.
pub fn brownian_unit_tests(cfg: &WalkConfig) -> Result<BrownianReport> {
    const N: f64 = 2.0;
    let check = |label: String, expected: f64, samples: Vec<Option<f64>>| -> Result<IdentityCheck> {
        let estimate = summarize("brownian_unit_tests", cfg, &samples)?;
        let z = estimate.z_score(expected);
        // round-off slack for identities that hold sample by sample
        let pass = (estimate.mean - expected).abs() <= 3.0 * estimate.std_error + 1e-12 * expected.abs().max(1.0);
        Ok(IdentityCheck { label, expected, estimate, z_score: z, pass })
    };
    let mut second_moment = Vec::new();
    for (j, t) in [0.1, 1.0].into_iter().enumerate() {
        let samples = run_walks(cfg, |i| {
            let mut rng = walk_rng(cfg.seed ^ (0x5eed_0000 + j as u64), i);
            let dt = t / BROWNIAN_INCREMENTS as f64;
            let (mut x, mut y) = (0.0, 0.0);
            for _ in 0..BROWNIAN_INCREMENTS {
                x += dt.sqrt() * rng.sample::<f64, _>(StandardNormal);
                y += dt.sqrt() * rng.sample::<f64, _>(StandardNormal);
            }
            Some(x * x + y * y)
        })?;
        second_moment.push(check(format!("E|w(t)|^2, t = {t}"), N * t, samples)?);
    }
    let mut quadratic_form = Vec::new();
    let matrices = [("diag(1, -1)", [1.0, 0.0, -1.0]), ("identity", [1.0, 0.0, 1.0]), ("[[2, 0.5], [0.5, -1]]", [2.0, 0.5, -1.0])];
    for (j, (name, [a, b, c])) in matrices.into_iter().enumerate() {
        let samples = run_walks(cfg, |i| {
            let mut rng = walk_rng(cfg.seed ^ (0xa11c_0000 + j as u64), i);
            let p = Point::from_angle(rng.random::<f64>() * 2.0 * PI);
            Some(a * p.x * p.x + 2.0 * b * p.x * p.y + c * p.y * p.y)
        })?;
        quadratic_form.push(check(format!("E<X, AX>, A = {name}"), (a + c) / N, samples)?);
    }
    let pass = second_moment.iter().chain(&quadratic_form).all(|c| c.pass);
    Ok(BrownianReport { second_moment, quadratic_form, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;

    fn disk() -> Domain {
        Domain::new(DomainSpec::disk(1.0)).unwrap()
    }

    #[test]
    fn green_radius_inverts_cdf() {
        for &u in &[1e-12, 1e-6, 0.01, 0.25, 0.5, 0.9, 0.999999] {
            let s = green_radius(u);
            let cdf = s * s * (1.0 - 2.0 * s.ln());
            assert!((cdf - u).abs() < 1e-13, "{u} -> {s} -> {cdf}");
        }
        assert_eq!(green_radius(0.0), 0.0);
        assert_eq!(green_radius(1.0), 1.0);
    }

    #[test]
    fn first_sphere_from_center_is_the_disk() {
        let mut rng = walk_rng(1, 0);
        let path = wos_exit(&disk(), Point::ORIGIN, &mut rng, 1e-4, 1000).unwrap();
        assert!((path.spheres[0].1 - 1.0).abs() < 1e-15);
        assert!((path.exit.norm() - 1.0).abs() < 1e-12);
        assert!(wos_exit(&disk(), Point::new(2.0, 0.0), &mut rng, 1e-4, 1000).is_err());
    }

    #[test]
    fn constant_boundary_data() {
        let cfg = WalkConfig::default().with_walks(2000);
        let e = estimate_harmonic_integral(&disk(), Point::ORIGIN, |_, _| 1.0, &cfg).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn disk_exit_time_and_occupation() {
        let cfg = WalkConfig::default().with_walks(20_000).with_seed(7);
        let e = estimate_exit_time(&disk(), Point::ORIGIN, &cfg).unwrap();
        assert!(e.z_score(0.5).abs() <= 4.0, "{e:?}");
        let o = estimate_occupation(&disk(), Point::new(0.5, 0.0), |_| Some(1.0), &cfg).unwrap();
        assert!(o.z_score(0.1875).abs() <= 4.0, "{o:?}");
    }

    #[test]
    fn results_do_not_depend_on_workers() {
        let base = WalkConfig::default().with_walks(3000).with_seed(11);
        let a = estimate_exit_time(&disk(), Point::new(0.3, 0.1), &base.with_workers(1)).unwrap();
        let b = estimate_exit_time(&disk(), Point::new(0.3, 0.1), &base.with_workers(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    }

    #[test]
    fn discard_budget() {
        let cfg = WalkConfig { max_steps: 1, ..WalkConfig::default().with_walks(100) };
        assert!(estimate_exit_time(&disk(), Point::new(0.5, 0.0), &cfg).is_err());
        let bad = WalkConfig { eps_shell: Some(0.5), ..WalkConfig::default() };
        assert!(bad.shell(&disk()).is_err());
    }

    #[test]
    fn brownian_identities() {
        let rep = brownian_unit_tests(&WalkConfig::default().with_walks(20_000).with_seed(3)).unwrap();
        assert!(rep.pass, "{rep:#?}");
        // the identity quadratic form is 1 for every sample up to round-off
        assert!(rep.quadratic_form[1].estimate.std_error < 1e-15);
    }
}
