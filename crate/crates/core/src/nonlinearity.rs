//! Source terms `f` for `-Δu = f(u)` and the admissibility thresholds of the
//! concavity-propagation and rearrangement theorems.

use serde::{Deserialize, Serialize};

use crate::error::{bail, Error, Result};
use crate::geometry::GeometryStats;

/// JSON form of a source term, e.g. `{"kind": "affine", "c": 1.0, "a": 0.5}`.
///
/// - `constant`: `c`
/// - `affine`: `c + a t`, `a >= 0`
/// - `log-shift`: `c + a log(1 + t)`
/// - `sqrt-shift`: `c + a (sqrt(1 + t) - 1)`
/// - `saturating`: `c + a t / (1 + t)`
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NonlinearitySpec {
    Constant { c: f64 },
    Affine { c: f64, a: f64 },
    LogShift { c: f64, a: f64 },
    SqrtShift { c: f64, a: f64 },
    Saturating { c: f64, a: f64 },
}

impl NonlinearitySpec {
    fn coefficients(self) -> (f64, f64) {
        match self {
            NonlinearitySpec::Constant { c } => (c, 0.0),
            NonlinearitySpec::Affine { c, a }
            | NonlinearitySpec::LogShift { c, a }
            | NonlinearitySpec::SqrtShift { c, a }
            | NonlinearitySpec::Saturating { c, a } => (c, a),
        }
    }

    pub fn name(self) -> String {
        match self {
            NonlinearitySpec::Constant { c } => format!("constant({c})"),
            NonlinearitySpec::Affine { c, a } => format!("affine({c}, {a})"),
            NonlinearitySpec::LogShift { c, a } => format!("log-shift({c}, {a})"),
            NonlinearitySpec::SqrtShift { c, a } => format!("sqrt-shift({c}, {a})"),
            NonlinearitySpec::Saturating { c, a } => format!("saturating({c}, {a})"),
        }
    }
}

/// A validated source term with its structural attributes precomputed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NonlinearitySpec", into = "NonlinearitySpec")]
pub struct Nonlinearity {
    spec: NonlinearitySpec,
    /// `f(0)`
    pub f0: f64,
    /// `f'(0)`
    pub d1_at_0: f64,
    /// `sup_{t >= 0} f'(t)`, computed in closed form.
    pub sup_d1: f64,
    pub is_positive: bool,
    pub is_monotone: bool,
    pub is_concave: bool,
}

impl TryFrom<NonlinearitySpec> for Nonlinearity {
    type Error = Error;
    fn try_from(spec: NonlinearitySpec) -> Result<Self> {
        Nonlinearity::new(spec)
    }
}

impl From<Nonlinearity> for NonlinearitySpec {
    fn from(f: Nonlinearity) -> Self {
        f.spec
    }
}

impl Nonlinearity {
    pub fn new(spec: NonlinearitySpec) -> Result<Self> {
        const OP: &str = "new";
        let (c, a) = spec.coefficients();
        if !(c.is_finite() && a.is_finite()) {
            bail!(Nonlinearity, OP, "coefficients must be finite");
        }
        if c <= 0.0 {
            bail!(Nonlinearity, OP, "c must be positive (f(0) > 0), got {c}");
        }
        if matches!(spec, NonlinearitySpec::Affine { .. }) && a < 0.0 {
            bail!(Nonlinearity, OP, "affine slope must be non-negative, got {a}");
        }
        let mut f = Nonlinearity {
            spec,
            f0: c,
            d1_at_0: 0.0,
            sup_d1: 0.0,
            is_positive: true,
            is_monotone: a >= 0.0,
            is_concave: true,
        };
        f.d1_at_0 = f.eval_unchecked(0.0, 1);
        // f' is monotone in t for every catalog entry: decreasing when a >= 0,
        // increasing towards 0 when a < 0.
        f.sup_d1 = if a >= 0.0 { f.d1_at_0 } else { 0.0 };
        f.is_concave = a >= 0.0 || matches!(spec, NonlinearitySpec::Constant { .. });
        f.is_positive = match spec {
            NonlinearitySpec::Constant { .. } | NonlinearitySpec::Affine { .. } => true,
            NonlinearitySpec::LogShift { .. } | NonlinearitySpec::SqrtShift { .. } => a >= 0.0,
            // inf_t f = c + min(a, 0)
            NonlinearitySpec::Saturating { .. } => c + a.min(0.0) >= 0.0,
        };
        Ok(f)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(NonlinearitySpec::Constant { c }).expect("constant source")
    }

    pub fn affine(c: f64, a: f64) -> Self {
        Self::new(NonlinearitySpec::Affine { c, a }).expect("affine source")
    }

    pub fn log_shift(c: f64, a: f64) -> Self {
        Self::new(NonlinearitySpec::LogShift { c, a }).expect("log-shift source")
    }

    pub fn sqrt_shift(c: f64, a: f64) -> Self {
        Self::new(NonlinearitySpec::SqrtShift { c, a }).expect("sqrt-shift source")
    }

    pub fn saturating(c: f64, a: f64) -> Self {
        Self::new(NonlinearitySpec::Saturating { c, a }).expect("saturating source")
    }

    /// Standard set of source terms used by catalog sweeps.
    pub fn catalog() -> Vec<Nonlinearity> {
        vec![
            Self::constant(1.0),
            Self::affine(1.0, 0.3),
            Self::affine(1.0, 1.0),
            Self::affine(1.0, 5.0),
            Self::log_shift(1.0, 0.5),
            Self::log_shift(1.0, 2.0),
            Self::sqrt_shift(1.0, 1.0),
            Self::saturating(1.0, 0.5),
        ]
    }

    pub fn spec(&self) -> NonlinearitySpec {
        self.spec
    }

    pub fn name(&self) -> String {
        self.spec.name()
    }

    /// `f`, `f'` or `f''` at `t >= 0`.
    pub fn eval(&self, t: f64, order: u8) -> Result<f64> {
        if !(t >= 0.0) {
            bail!(Nonlinearity, "eval", "argument must be non-negative, got {t}");
        }
        if order > 2 {
            bail!(Nonlinearity, "eval", "derivative order {order} not supported");
        }
        Ok(self.eval_unchecked(t, order))
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        self.eval_unchecked(t, 0)
    }

    #[inline]
    pub fn d1(&self, t: f64) -> f64 {
        self.eval_unchecked(t, 1)
    }

    #[inline]
    pub fn d2(&self, t: f64) -> f64 {
        self.eval_unchecked(t, 2)
    }

    /// Evaluation without the sign check. Negative `t` is clamped to 0, which
    /// only matters for round-off-level negatives from numerical fields.
    pub(crate) fn eval_unchecked(&self, t: f64, order: u8) -> f64 {
        let t = t.max(0.0);
        let (c, a) = self.spec.coefficients();
        match (self.spec, order) {
            (NonlinearitySpec::Constant { .. }, 0) => c,
            (NonlinearitySpec::Constant { .. }, _) => 0.0,
            (NonlinearitySpec::Affine { .. }, 0) => c + a * t,
            (NonlinearitySpec::Affine { .. }, 1) => a,
            (NonlinearitySpec::Affine { .. }, _) => 0.0,
            (NonlinearitySpec::LogShift { .. }, 0) => c + a * t.ln_1p(),
            (NonlinearitySpec::LogShift { .. }, 1) => a / (1.0 + t),
            (NonlinearitySpec::LogShift { .. }, _) => -a / ((1.0 + t) * (1.0 + t)),
            (NonlinearitySpec::SqrtShift { .. }, 0) => c + a * ((1.0 + t).sqrt() - 1.0),
            (NonlinearitySpec::SqrtShift { .. }, 1) => 0.5 * a / (1.0 + t).sqrt(),
            (NonlinearitySpec::SqrtShift { .. }, _) => -0.25 * a / (1.0 + t).powf(1.5),
            (NonlinearitySpec::Saturating { .. }, 0) => c + a * t / (1.0 + t),
            (NonlinearitySpec::Saturating { .. }, 1) => a / ((1.0 + t) * (1.0 + t)),
            (NonlinearitySpec::Saturating { .. }, _) => -2.0 * a / (1.0 + t).powi(3),
        }
    }
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: u32) -> f64 {
    // ω_n = ω_{n-2} · 2π / n with ω_0 = 1, ω_1 = 2
    let (mut w, start) = if n % 2 == 0 { (1.0, 2) } else { (2.0, 3) };
    let mut k = start;
    while k <= n {
        w *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    w
}

/// The common threshold `2 n ω_n^{2/n} / |Ω|^{2/n}` of both theorems.
pub fn lipschitz_threshold(area: f64, n: u32) -> f64 {
    let e = 2.0 / n as f64;
    2.0 * n as f64 * unit_ball_volume(n).powf(e) / area.powf(e)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theorem {
    /// Concavity propagates from the boundary: `f'(0) <= threshold`, f monotone and concave.
    T1,
    /// Rearrangement comparison: `sup f' < threshold`, f monotone.
    T2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub theorem: Theorem,
    pub threshold: f64,
    pub tested_value: f64,
    pub margin: f64,
    pub passes: bool,
    /// Structural hypotheses that fail (`is_positive`, `is_monotone`, `is_concave`).
    pub violated: Vec<String>,
}

pub fn check_condition(f: &Nonlinearity, stats: &GeometryStats, n: u32, theorem: Theorem) -> ConditionReport {
    let threshold = lipschitz_threshold(stats.area, n);
    let tested_value = match theorem {
        Theorem::T1 => f.d1_at_0,
        Theorem::T2 => f.sup_d1,
    };
    let mut violated = Vec::new();
    if !f.is_positive {
        violated.push("is_positive".to_string());
    }
    if !f.is_monotone {
        violated.push("is_monotone".to_string());
    }
    if theorem == Theorem::T1 && !f.is_concave {
        violated.push("is_concave".to_string());
    }
    let bound_ok = match theorem {
        Theorem::T1 => tested_value <= threshold,
        Theorem::T2 => tested_value < threshold,
    };
    ConditionReport {
        theorem,
        threshold,
        tested_value,
        margin: threshold - tested_value,
        passes: bound_ok && violated.is_empty(),
        violated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_disk() -> GeometryStats {
        GeometryStats { area: PI, inradius: 1.0, diameter: 2.0, boundary_length: 2.0 * PI, smooth_boundary: true }
    }

    #[test]
    fn eval_examples() {
        assert_eq!(Nonlinearity::affine(1.0, 0.0).eval(7.0, 0).unwrap(), 1.0);
        assert_eq!(Nonlinearity::affine(1.0, 0.5).eval(3.0, 1).unwrap(), 0.5);
        assert_eq!(Nonlinearity::log_shift(1.0, 2.0).eval(0.0, 2).unwrap(), -2.0);
        assert!(Nonlinearity::constant(1.0).eval(-0.1, 0).is_err());
    }

    #[test]
    fn unit_ball_volumes() {
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn unit_disk_threshold_is_four() {
        assert!((lipschitz_threshold(PI, 2) - 4.0).abs() < 1e-14);
        let r = check_condition(&Nonlinearity::affine(1.0, 1.0), &unit_disk(), 2, Theorem::T2);
        assert_eq!(r.tested_value, 1.0);
        assert!((r.margin - 3.0).abs() < 1e-14);
        assert!(r.passes);
        let r = check_condition(&Nonlinearity::affine(1.0, 5.0), &unit_disk(), 2, Theorem::T2);
        assert!(!r.passes);
    }

    #[test]
    fn t1_is_inclusive_t2_strict() {
        let stats = GeometryStats { area: PI, ..unit_disk() };
        let t = lipschitz_threshold(stats.area, 2);
        let f_eq = Nonlinearity::affine(1.0, t);
        assert!(check_condition(&f_eq, &stats, 2, Theorem::T1).passes);
        assert!(!check_condition(&f_eq, &stats, 2, Theorem::T2).passes);
    }

    #[test]
    fn structural_flags_are_named() {
        let f = Nonlinearity::log_shift(1.0, -0.5);
        assert!(!f.is_monotone && !f.is_positive && !f.is_concave);
        let r = check_condition(&f, &unit_disk(), 2, Theorem::T1);
        assert!(!r.passes);
        assert_eq!(r.violated, vec!["is_positive", "is_monotone", "is_concave"]);
        let s = Nonlinearity::saturating(1.0, -0.5);
        assert!(s.is_positive && !s.is_monotone);
    }

    #[test]
    fn rejects_invalid() {
        assert!(Nonlinearity::new(NonlinearitySpec::Constant { c: 0.0 }).is_err());
        assert!(Nonlinearity::new(NonlinearitySpec::Affine { c: 1.0, a: -1.0 }).is_err());
    }

    #[test]
    fn json_form() {
        let f: Nonlinearity = serde_json::from_str(r#"{"kind": "affine", "c": 1.0, "a": 0.5}"#).unwrap();
        assert_eq!(f, Nonlinearity::affine(1.0, 0.5));
        assert!(serde_json::from_str::<Nonlinearity>(r#"{"kind": "affine", "c": 1.0, "a": 0.5, "b": 1}"#).is_err());
        assert!(serde_json::from_str::<Nonlinearity>(r#"{"kind": "constant", "c": -1.0}"#).is_err());
        let back = serde_json::to_string(&f).unwrap();
        assert_eq!(back, r#"{"kind":"affine","c":1.0,"a":0.5}"#);
    }

    #[test]
    fn sup_d1_matches_d1_at_0_for_concave_entries() {
        for f in Nonlinearity::catalog() {
            assert!(f.is_concave && f.is_monotone);
            assert_eq!(f.sup_d1, f.d1_at_0, "{}", f.name());
        }
    }
}
