use nalgebra::{DMatrix, DVector};

use crate::geometry::Point;

/// Polynomial degree of a local least-squares fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Degree {
    Quadratic,
    Cubic,
}

impl Degree {
    fn terms(self) -> usize {
        match self {
            Degree::Quadratic => 6,
            Degree::Cubic => 10,
        }
    }
}

/// Value and derivatives up to second order at the fit center, in physical units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct LocalFit {
    pub value: f64,
    pub ux: f64,
    pub uy: f64,
    pub uxx: f64,
    pub uxy: f64,
    pub uyy: f64,
}

pub(crate) const MAX_CONDITION: f64 = 1e8;

fn basis(x: f64, y: f64, degree: Degree, out: &mut [f64]) {
    out[..6].copy_from_slice(&[1.0, x, y, x * x, x * y, y * y]);
    if degree == Degree::Cubic {
        out[6..10].copy_from_slice(&[x * x * x, x * x * y, x * y * y, y * y * y]);
    }
}

/// Least-squares polynomial through `samples`, in coordinates centered at
/// `center` and scaled by `scale`. `None` if the normal matrix is singular or
/// its condition number exceeds [`MAX_CONDITION`].
pub(crate) fn fit_local(center: Point, scale: f64, samples: &[(Point, f64)], degree: Degree) -> Option<LocalFit> {
    let m = degree.terms();
    if samples.len() < m {
        return None;
    }
    let mut normal = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    let mut phi = [0.0; 10];
    for &(p, v) in samples {
        basis((p.x - center.x) / scale, (p.y - center.y) / scale, degree, &mut phi);
        for i in 0..m {
            rhs[i] += phi[i] * v;
            for j in 0..m {
                normal[(i, j)] += phi[i] * phi[j];
            }
        }
    }
    let eig = normal.clone().symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    if !(lo > 0.0) || hi / lo > MAX_CONDITION {
        return None;
    }
    let c = normal.cholesky()?.solve(&rhs);
    let s2 = scale * scale;
    Some(LocalFit {
        value: c[0],
        ux: c[1] / scale,
        uy: c[2] / scale,
        uxx: 2.0 * c[3] / s2,
        uxy: c[4] / s2,
        uyy: 2.0 * c[5] / s2,
    })
}
