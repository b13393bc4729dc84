use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::locate_peak;
use crate::error::{bail, Result};
use crate::fdsolver::{build_grid, solve_semilinear, SemilinearOptions};
use crate::geometry::{Domain, DomainSpec};
use crate::io;
use crate::nonlinearity::Nonlinearity;

pub const SWEEP_WIDTH: f64 = 1.0;
pub const SWEEP_CORNER_RADIUS: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub aspect: f64,
    pub lambda_max: f64,
    pub log_abs_lambda_max: f64,
}

/// Least-squares line `y = intercept + slope x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LineFit { slope, intercept: my - slope * mx, r_squared })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub source: Nonlinearity,
    pub h: f64,
    /// Rows sorted by aspect.
    pub rows: Vec<SweepRow>,
    pub all_negative: bool,
    /// Fit of `log|λ_max|` against aspect; `None` with fewer than two rows.
    pub fit: Option<LineFit>,
}

impl SweepResult {
    pub fn csv(&self) -> String {
        io::csv_string(
            &["aspect", "lambda_max", "log_abs_lambda_max"],
            self.rows.iter().map(|r| [r.aspect, r.lambda_max, r.log_abs_lambda_max]),
        )
    }
}

/// `λ_max(D²u(x₀))` at the peak `x₀` over rounded rectangles of width 1,
/// corner radius 1/4 and length `aspect`.
pub fn eccentricity_sweep(aspects: &[f64], h: f64, f: &Nonlinearity) -> Result<SweepResult> {
    let opts = SemilinearOptions { linear_rel_tol: 1e-13, ..SemilinearOptions::default() };
    eccentricity_sweep_with(aspects, h, f, opts)
}

pub fn eccentricity_sweep_with(aspects: &[f64], h: f64, f: &Nonlinearity, opts: SemilinearOptions) -> Result<SweepResult> {
    for &a in aspects {
        if !(a >= 1.0 && a.is_finite()) {
            bail!(Analysis, "eccentricity_sweep", "aspects must be finite and at least 1, got {a}");
        }
    }
    let mut rows = aspects
        .par_iter()
        .map(|&aspect| -> Result<SweepRow> {
            let domain = Domain::new(DomainSpec::rounded_rectangle(aspect * SWEEP_WIDTH, SWEEP_WIDTH, SWEEP_CORNER_RADIUS))?;
            let grid = build_grid(&domain, h)?;
            let rep = solve_semilinear(&grid, f, opts)?;
            let lambda_max = locate_peak(&rep.field).hessian.lambda_max;
            Ok(SweepRow { aspect, lambda_max, log_abs_lambda_max: lambda_max.abs().ln() })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.aspect.total_cmp(&b.aspect));
    let x: Vec<f64> = rows.iter().map(|r| r.aspect).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.log_abs_lambda_max).collect();
    Ok(SweepResult {
        source: *f,
        h,
        all_negative: rows.iter().all(|r| r.lambda_max < 0.0),
        fit: fit_line(&x, &y),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_exact() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let fit = fit_line(&x, &y).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-14 && (fit.intercept - 2.0).abs() < 1e-14);
        assert!((fit.r_squared - 1.0).abs() < 1e-14);
        assert!(fit_line(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn square_like_peak_is_concave() {
        let res = eccentricity_sweep(&[1.0], 1.0 / 32.0, &Nonlinearity::constant(1.0)).unwrap();
        let l = res.rows[0].lambda_max;
        assert!(l < -0.1 && l > -1.0, "{l}");
    }
}
