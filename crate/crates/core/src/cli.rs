//! Experiment runner: JSON config in, CSV/JSON/SVG artifacts out.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{self, BoundaryFitOptions, ConcavityReport, LineFit};
use crate::contour;
use crate::error::{bail, Error, Result};
use crate::fdsolver::{build_grid, solve_semilinear, Field, SemilinearOptions};
use crate::geometry::{Domain, DomainSpec, GeometryStats, Point};
use crate::io;
use crate::nonlinearity::{check_condition, ConditionReport, Nonlinearity, NonlinearitySpec, Theorem};
use crate::radial::exit_time_bound;
use crate::rearrange::{talenti_from_solution, theorem2_from_solution};
use crate::stochastic::{self, Estimate, RepresentationCheck, WalkConfig};

pub use crate::contour::render_contours;

/// Number of contour levels in emitted SVGs.
pub const CONTOUR_LEVELS: usize = 10;

/// Boundary fits used by `verify-representation`.
pub const REPRESENTATION_FIT: BoundaryFitOptions = BoundaryFitOptions { radius_cells: 4.0, cubic: true };

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_THEOREM: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Analyze,
    VerifyRepresentation,
    ExitTime,
    Rearrange,
    SweepAspect,
    CheckConditions,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Analyze => "analyze",
            Command::VerifyRepresentation => "verify-representation",
            Command::ExitTime => "exit-time",
            Command::Rearrange => "rearrange",
            Command::SweepAspect => "sweep-aspect",
            Command::CheckConditions => "check-conditions",
        }
    }

    fn required(self) -> &'static [&'static str] {
        match self {
            Command::Solve | Command::Analyze | Command::Rearrange => &["domain", "f", "h"],
            Command::VerifyRepresentation => &["domain", "f", "h", "walk", "probes"],
            Command::ExitTime => &["domain", "walk"],
            Command::SweepAspect => &["f", "h"],
            Command::CheckConditions => &["domain", "f"],
        }
    }

    fn optional(self) -> &'static [&'static str] {
        match self {
            Command::ExitTime => &["probes"],
            Command::SweepAspect => &["aspects"],
            _ => &[],
        }
    }
}

/// A start point and the directions to test there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Probe {
    pub point: Point,
    /// Empty means both coordinate axes.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub directions: Vec<Point>,
}

impl Probe {
    pub fn new(point: Point) -> Self {
        Probe { point, directions: Vec::new() }
    }

    fn directions(&self) -> Vec<Point> {
        if self.directions.is_empty() {
            vec![Point::new(1.0, 0.0), Point::new(0.0, 1.0)]
        } else {
            self.directions.clone()
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the command given on the command line when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<NonlinearitySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walk: Option<WalkConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<Vec<Probe>>,
    /// Defaults to the current directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub emit_svg: bool,
    /// Rounded-rectangle aspects for `sweep-aspect`; default `[2, 4, 6, 8]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aspects: Option<Vec<f64>>,
}

/// Command-line values that replace config entries.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub h: Option<f64>,
    pub seed: Option<u64>,
    pub n_walks: Option<usize>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config { op: "load", msg: format!("{}: {e}", path.display()) })?;
        Self::from_json(&text)
    }

    fn present(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let fields: [(&'static str, bool); 6] = [
            ("domain", self.domain.is_some()),
            ("f", self.f.is_some()),
            ("h", self.h.is_some()),
            ("walk", self.walk.is_some()),
            ("probes", self.probes.is_some()),
            ("aspects", self.aspects.is_some()),
        ];
        for (name, set) in fields {
            if set {
                out.push(name);
            }
        }
        out
    }

    /// Check the config against `command`: required fields present, no fields the command ignores.
    pub fn validate(&self, command: Command) -> Result<()> {
        const OP: &str = "validate";
        if let Some(c) = self.command {
            if c != command {
                bail!(Config, OP, "config is for command `{}` but `{}` was requested", c.name(), command.name());
            }
        }
        for field in command.required() {
            if !self.present().contains(field) {
                bail!(Config, OP, "command `{}` requires field `{field}`", command.name());
            }
        }
        for field in self.present() {
            if !command.required().contains(&field) && !command.optional().contains(&field) {
                bail!(Config, OP, "field `{field}` is not used by command `{}`", command.name());
            }
        }
        if matches!(&self.probes, Some(p) if p.is_empty()) && command == Command::VerifyRepresentation {
            bail!(Config, OP, "field `probes` must not be empty");
        }
        if let Some(a) = &self.aspects {
            if a.len() < 2 || a.iter().any(|&x| !(x >= 1.0 && x.is_finite())) {
                bail!(Config, OP, "field `aspects` needs at least two values >= 1");
            }
        }
        Ok(())
    }

    /// Apply command-line overrides; a walk override creates a default `walk`.
    pub fn with_overrides(mut self, command: Command, o: &Overrides) -> Result<Self> {
        const OP: &str = "overrides";
        let uses = |field: &str| command.required().contains(&field) || command.optional().contains(&field);
        if let Some(h) = o.h {
            if !uses("h") {
                bail!(Config, OP, "--h is not used by command `{}`", command.name());
            }
            self.h = Some(h);
        }
        if o.seed.is_some() || o.n_walks.is_some() || o.workers.is_some() {
            if uses("walk") {
                let mut w = self.walk.unwrap_or_default();
                if let Some(s) = o.seed {
                    w.seed = s;
                }
                if let Some(n) = o.n_walks {
                    w.n_walks = n;
                }
                if let Some(k) = o.workers {
                    w.workers = k;
                }
                self.walk = Some(w);
            } else if o.seed.is_some() || o.n_walks.is_some() {
                bail!(Config, OP, "--seed/--n-walks are not used by command `{}`", command.name());
            }
        }
        if let Some(out) = &o.out {
            self.output_dir = Some(out.clone());
        }
        Ok(self)
    }
}

/// What a run produced.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub command: Command,
    pub artifacts: Vec<PathBuf>,
    /// False when a checked mathematical statement failed.
    pub theorem_ok: bool,
    pub message: String,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.theorem_ok {
            EXIT_OK
        } else {
            EXIT_THEOREM
        }
    }
}

pub fn exit_code(result: &Result<RunOutcome>) -> i32 {
    match result {
        Ok(o) => o.exit_code(),
        Err(e) if e.is_validation() => EXIT_VALIDATION,
        Err(_) => EXIT_SOLVER,
    }
}

/// `check-conditions` output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionsOutput {
    pub f: NonlinearitySpec,
    pub stats: GeometryStats,
    pub t1: ConditionReport,
    pub t2: ConditionReport,
}

/// `exit-time` output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExitTimeOutput {
    /// `|Ω|^{2/n} / (n ω_n^{2/n})`
    pub bound: f64,
    pub probes: Vec<ExitTimeProbe>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExitTimeProbe {
    pub point: Point,
    pub estimate: Estimate,
    /// `mean ≤ bound + 3σ`
    pub within_bound: bool,
}

/// `rearrange` output; profiles go to the CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RearrangeOutput {
    pub h: f64,
    pub max_u: f64,
    pub max_psi: f64,
    pub ball_radius: f64,
    pub condition: ConditionReport,
    pub certified: bool,
    pub tol: f64,
    pub ordering_pass: bool,
    pub profile_pass: bool,
    pub talenti_min_gap: f64,
    pub talenti_min_gap_radius: f64,
    pub talenti_max_v: f64,
    /// `min (v - u*) ≥ -5h²`
    pub talenti_pass: bool,
}

/// `sweep-aspect` output; rows go to the CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepFitOutput {
    pub f: NonlinearitySpec,
    pub h: f64,
    pub aspects: Vec<f64>,
    pub all_negative: bool,
    pub fit: Option<LineFit>,
}

struct Ctx {
    dir: PathBuf,
    artifacts: Vec<PathBuf>,
}

impl Ctx {
    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.artifacts.push(p.clone());
        p
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let p = self.path(name);
        io::write_json(&p, value)
    }

    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(p, text)?;
        Ok(())
    }
}

fn need<T: Clone>(v: &Option<T>, field: &str) -> Result<T> {
    match v {
        Some(v) => Ok(v.clone()),
        None => Err(Error::Config { op: "run", msg: format!("missing field `{field}`") }),
    }
}

/// Rows `(x, y, value)` for the nodes where `value` is finite.
fn partial_field_csv(u: &Field) -> String {
    let grid = u.grid();
    let rows = (0..grid.len()).filter(|&k| u.values()[k].is_finite()).map(|k| {
        let p = grid.position(k);
        [p.x, p.y, u.values()[k]]
    });
    io::csv_string(&["x", "y", "value"], rows)
}

fn contour_svg(csv: &str, outside: Option<f64>) -> Result<String> {
    let samples = io::parse_field_csv(csv)?;
    Ok(contour::contour_set(&samples, CONTOUR_LEVELS, outside)?.to_svg())
}

/// Run `command` with a validated config and write its artifacts.
pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate(command)?;
    let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    let mut ctx = Ctx { dir, artifacts: Vec::new() };
    let domain = cfg.domain.clone().map(Domain::new).transpose()?;
    let f = cfg.f.map(Nonlinearity::new).transpose()?;
    let solve = |domain: &Domain, f: &Nonlinearity| -> Result<_> {
        let grid = build_grid(domain, need(&cfg.h, "h")?)?;
        solve_semilinear(&grid, f, SemilinearOptions::default())
    };

    let (theorem_ok, message) = match command {
        Command::Solve => {
            let (domain, f) = (domain.unwrap(), f.unwrap());
            let rep = solve(&domain, &f)?;
            let csv = io::field_csv(&rep.field);
            ctx.text("solution.csv", &csv)?;
            ctx.json("solve.json", &rep.summary())?;
            if cfg.emit_svg {
                ctx.text("solution.svg", &contour_svg(&csv, Some(0.0))?)?;
            }
            (true, format!("max u = {} after {} Picard iterations", io::fmt_f64(rep.field.max()), rep.picard_iters))
        }
        Command::Analyze => {
            let (domain, f) = (domain.unwrap(), f.unwrap());
            let rep = solve(&domain, &f)?;
            let a = analysis::analyze(&domain, &rep.field, &f);
            ctx.json("concavity_report.json", &a.report)?;
            let lam = a.hessian.component(|h| h.lambda_max, f64::NAN);
            let lam_csv = partial_field_csv(&lam);
            ctx.text("lambda_max.csv", &lam_csv)?;
            if cfg.emit_svg {
                ctx.text("solution.svg", &contour_svg(&io::field_csv(&rep.field), Some(0.0))?)?;
                ctx.text("lambda_max.svg", &contour_svg(&lam_csv, None)?)?;
            }
            let r: &ConcavityReport = &a.report;
            let t1 = check_condition(&f, &domain.stats(), 2, Theorem::T1);
            let ok = !(t1.passes && r.boundary_nsd && !r.interior_nsd);
            (ok, format!("boundary_nsd = {}, interior_nsd = {}, T1 condition = {}", r.boundary_nsd, r.interior_nsd, t1.passes))
        }
        Command::VerifyRepresentation => {
            let (domain, f) = (domain.unwrap(), f.unwrap());
            let walk = need(&cfg.walk, "walk")?;
            let rep = solve(&domain, &f)?;
            let u = &rep.field;
            let hess = analysis::hessian_field(u);
            let m = analysis::default_probe_count(&domain, u.grid().h);
            let bdy = analysis::boundary_hessian_with(&domain, u, m, REPRESENTATION_FIT);
            let mut worst: f64 = 0.0;
            for (i, probe) in need(&cfg.probes, "probes")?.iter().enumerate() {
                let checks = probe
                    .directions()
                    .into_iter()
                    .map(|d| stochastic::verify_representation(&domain, &f, u, &hess, &bdy, probe.point, d, &walk))
                    .collect::<Result<Vec<RepresentationCheck>>>()?;
                worst = checks.iter().fold(worst, |w, c| w.max(c.z_score.abs()));
                ctx.json(&format!("representation_{i}.json"), &checks)?;
            }
            (worst <= 3.0, format!("max |z| = {worst:.3}"))
        }
        Command::ExitTime => {
            let domain = domain.unwrap();
            let walk = need(&cfg.walk, "walk")?;
            let bound = exit_time_bound(&domain.stats(), 2);
            let probes = cfg.probes.clone().unwrap_or_else(|| vec![Probe::new(domain.center())]);
            let mut out = ExitTimeOutput { bound, probes: Vec::new() };
            for p in &probes {
                let estimate = stochastic::estimate_exit_time(&domain, p.point, &walk)?;
                let within_bound = estimate.mean <= bound + 3.0 * estimate.std_error;
                out.probes.push(ExitTimeProbe { point: p.point, estimate, within_bound });
            }
            ctx.json("exit_time.json", &out)?;
            let ok = out.probes.iter().all(|p| p.within_bound);
            (ok, format!("bound = {}, all within = {ok}", io::fmt_f64(bound)))
        }
        Command::Rearrange => {
            let (domain, f) = (domain.unwrap(), f.unwrap());
            let rep = solve(&domain, &f)?;
            let t2 = theorem2_from_solution(&domain, &rep.field, &f)?;
            let tal = talenti_from_solution(&rep.field, &f)?;
            let h = rep.field.grid().h;
            ctx.text("profiles.csv", &t2.profile_csv())?;
            let out = RearrangeOutput {
                h,
                max_u: t2.max_u,
                max_psi: t2.max_psi,
                ball_radius: t2.ball_radius,
                condition: t2.condition.clone(),
                certified: t2.certified,
                tol: t2.tol,
                ordering_pass: t2.pass,
                profile_pass: t2.profile_pass,
                talenti_min_gap: tal.min_gap,
                talenti_min_gap_radius: tal.min_gap_radius,
                talenti_max_v: tal.max_v,
                talenti_pass: tal.min_gap >= -5.0 * h * h,
            };
            ctx.json("rearrange.json", &out)?;
            let ok = out.talenti_pass && (!out.certified || out.ordering_pass);
            (ok, format!("max u = {}, max psi = {}, certified = {}", io::fmt_f64(out.max_u), io::fmt_f64(out.max_psi), out.certified))
        }
        Command::SweepAspect => {
            let f = f.unwrap();
            let aspects = cfg.aspects.clone().unwrap_or_else(|| vec![2.0, 4.0, 6.0, 8.0]);
            let sweep = analysis::eccentricity_sweep(&aspects, need(&cfg.h, "h")?, &f)?;
            ctx.text("sweep.csv", &sweep.csv())?;
            let out = SweepFitOutput { f: f.spec(), h: sweep.h, aspects, all_negative: sweep.all_negative, fit: sweep.fit };
            ctx.json("sweep_fit.json", &out)?;
            let ok = out.all_negative && out.fit.is_some_and(|l| l.slope < 0.0);
            let slope = out.fit.map(|l| l.slope).unwrap_or(f64::NAN);
            (ok, format!("all negative = {}, slope = {slope:.4}", out.all_negative))
        }
        Command::CheckConditions => {
            let (domain, f) = (domain.unwrap(), f.unwrap());
            let stats = domain.stats();
            let out = ConditionsOutput {
                f: f.spec(),
                stats,
                t1: check_condition(&f, &stats, 2, Theorem::T1),
                t2: check_condition(&f, &stats, 2, Theorem::T2),
            };
            ctx.json("conditions.json", &out)?;
            (true, format!("threshold = {}, T1 = {}, T2 = {}", io::fmt_f64(out.t1.threshold), out.t1.passes, out.t2.passes))
        }
    };
    Ok(RunOutcome { command, artifacts: ctx.artifacts, theorem_ok, message })
}

/// `concavity-lab <command> --config <path> [--h ..] [--seed ..] [--n-walks ..] [--out ..]`
#[derive(Debug, Parser)]
#[command(name = "concavity-lab", version, about = "Concavity experiments for -Δu = f(u) on planar convex domains")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON experiment config.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "n-walks")]
    pub n_walks: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parse `CONCAVITY_LAB_WORKERS`.
pub fn workers_from_env(value: Option<OsString>) -> Result<Option<usize>> {
    let Some(v) = value else { return Ok(None) };
    match v.to_str().and_then(|s| s.trim().parse().ok()) {
        Some(n) => Ok(Some(n)),
        None => bail!(Config, "env", "CONCAVITY_LAB_WORKERS must be a non-negative integer, got {v:?}"),
    }
}

fn run_cli(cli: Cli, workers: Option<OsString>) -> Result<RunOutcome> {
    let overrides = Overrides { h: cli.h, seed: cli.seed, n_walks: cli.n_walks, out: cli.out, workers: workers_from_env(workers)? };
    let cfg = ExperimentConfig::load(&cli.config)?.with_overrides(cli.command, &overrides)?;
    run(cli.command, &cfg)
}

/// Entry point of the binary; returns the process exit status.
pub fn main_with_args<I, T>(args: I, workers: Option<OsString>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    let result = run_cli(cli, workers);
    match &result {
        Ok(o) => {
            for a in &o.artifacts {
                println!("wrote {}", a.display());
            }
            println!("{}: {}", o.command.name(), o.message);
            if !o.theorem_ok {
                eprintln!("{}: check failed", o.command.name());
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    exit_code(&result)
}
