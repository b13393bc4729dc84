//! Exact closest-point queries and arclength parametrization for an axis-aligned
//! ellipse centered at the origin.

use std::f64::consts::TAU;

use super::Point;

const TABLE_PANELS: usize = 2048;

/// Adaptive Simpson quadrature with Richardson correction.
pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[derive(Clone, Debug)]
pub(crate) struct Ellipse {
    pub a: f64,
    pub b: f64,
    /// Cumulative arclength at `k * TAU / TABLE_PANELS`.
    table: Vec<f64>,
}

impl Ellipse {
    pub(crate) fn new(a: f64, b: f64) -> Self {
        let mut e = Ellipse { a, b, table: Vec::new() };
        let dt = TAU / TABLE_PANELS as f64;
        let mut acc = 0.0;
        e.table.push(0.0);
        for k in 0..TABLE_PANELS {
            let t0 = k as f64 * dt;
            acc += e.arc_between(t0, t0 + dt);
            e.table.push(acc);
        }
        e
    }

    #[inline]
    fn speed(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        (self.a * s).hypot(self.b * c)
    }

    fn arc_between(&self, t0: f64, t1: f64) -> f64 {
        let scale = self.a.max(self.b) * (t1 - t0).abs();
        adaptive_simpson(&|t| self.speed(t), t0, t1, 1e-15 * scale.max(f64::MIN_POSITIVE))
    }

    pub(crate) fn perimeter(&self) -> f64 {
        self.table[TABLE_PANELS]
    }

    /// Arclength from parameter angle 0 to `t` (t in [0, TAU)).
    pub(crate) fn arclength_at(&self, t: f64) -> f64 {
        let t = t.rem_euclid(TAU);
        let dt = TAU / TABLE_PANELS as f64;
        let k = ((t / dt) as usize).min(TABLE_PANELS - 1);
        self.table[k] + self.arc_between(k as f64 * dt, t)
    }

    /// Parameter angle whose arclength from 0 equals `s`.
    pub(crate) fn param_at(&self, s: f64) -> f64 {
        let total = self.perimeter();
        let s = s.rem_euclid(total);
        let k = self.table[1..].partition_point(|&v| v <= s).min(TABLE_PANELS - 1);
        let dt = TAU / TABLE_PANELS as f64;
        let (lo, hi) = (k as f64 * dt, (k + 1) as f64 * dt);
        let mut t = lo + dt * (s - self.table[k]) / (self.table[k + 1] - self.table[k]);
        for _ in 0..30 {
            let err = self.table[k] + self.arc_between(lo, t) - s;
            let step = err / self.speed(t);
            t = (t - step).clamp(lo, hi);
            if step.abs() < 1e-16 {
                break;
            }
        }
        t
    }

    pub(crate) fn point_at_param(&self, t: f64) -> Point {
        Point::new(self.a * t.cos(), self.b * t.sin())
    }

    pub(crate) fn inward_normal(&self, p: Point) -> Point {
        (-Point::new(p.x / (self.a * self.a), p.y / (self.b * self.b))).normalized()
    }

    pub(crate) fn contains(&self, p: Point) -> bool {
        (p.x / self.a).powi(2) + (p.y / self.b).powi(2) < 1.0
    }

    /// Closest point on the ellipse to `p`.
    pub(crate) fn closest(&self, p: Point) -> Point {
        // Work with e0 >= e1 in the first quadrant, then undo the symmetries.
        let swap = self.a < self.b;
        let (e0, e1) = if swap { (self.b, self.a) } else { (self.a, self.b) };
        let (px, py) = if swap { (p.y, p.x) } else { (p.x, p.y) };
        let (x0, x1) = closest_first_quadrant(e0, e1, px.abs(), py.abs());
        let (qx, qy) = (x0.copysign(px), x1.copysign(py));
        if swap {
            Point::new(qy, qx)
        } else {
            Point::new(qx, qy)
        }
    }

    pub(crate) fn sdf(&self, p: Point) -> f64 {
        let d = p.dist(self.closest(p));
        if self.contains(p) {
            -d
        } else {
            d
        }
    }
}

fn closest_first_quadrant(e0: f64, e1: f64, y0: f64, y1: f64) -> (f64, f64) {
    if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g != 0.0 {
                let r0 = (e0 / e1) * (e0 / e1);
                let sbar = root(r0, z0, z1, g);
                (r0 * y0 / (sbar + r0), y1 / (sbar + 1.0))
            } else {
                (y0, y1)
            }
        } else {
            (0.0, e1)
        }
    } else {
        let numer0 = e0 * y0;
        let denom0 = e0 * e0 - e1 * e1;
        if numer0 < denom0 {
            let xde0 = numer0 / denom0;
            (e0 * xde0, e1 * (1.0 - xde0 * xde0).max(0.0).sqrt())
        } else {
            (e0, 0.0)
        }
    }
}

/// Bisection for the unique root of the closest-point secular equation.
fn root(r0: f64, z0: f64, z1: f64, g: f64) -> f64 {
    let n0 = r0 * z0;
    let mut s0 = z1 - 1.0;
    let mut s1 = if g < 0.0 { 0.0 } else { n0.hypot(z1) - 1.0 };
    let mut s = 0.0;
    for _ in 0..1100 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let ratio0 = n0 / (s + r0);
        let ratio1 = z1 / (s + 1.0);
        let g = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
        if g > 0.0 {
            s0 = s;
        } else if g < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}
