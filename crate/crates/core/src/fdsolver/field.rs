use std::sync::Arc;

use super::grid::Grid;
use crate::geometry::Point;

/// One scalar value per interior node of a [`Grid`].
#[derive(Clone, Debug)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Self {
        assert_eq!(grid.len(), values.len(), "field length must match the grid");
        Field { grid, values }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        Field { grid, values: vec![0.0; n] }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(Point) -> f64) -> Self {
        let values = (0..grid.len()).map(|k| f(grid.position(k))).collect();
        Field { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// Index of the (first) maximal node value.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = k;
            }
        }
        best
    }

    pub fn at_node(&self, ix: i64, iy: i64) -> Option<f64> {
        self.grid.index_of(ix, iy).map(|k| self.values[k])
    }

    /// Sampler over these values; see [`NodalSampler`].
    pub fn sampler(&self, boundary_value: Option<f64>) -> NodalSampler<'_> {
        NodalSampler::new(&self.grid, &self.values, boundary_value)
    }
}

/// Point evaluation of nodal data inside the domain.
///
/// Bilinear on cells whose four corners are interior. In cut cells the value
/// comes from a least-squares plane through the interior nodes within `2h`,
/// plus the arm intersection points carrying `boundary_value` when one is
/// known. Returns `None` when neither applies.
pub struct NodalSampler<'a> {
    grid: &'a Grid,
    values: &'a [f64],
    boundary_value: Option<f64>,
}

impl<'a> NodalSampler<'a> {
    pub fn new(grid: &'a Grid, values: &'a [f64], boundary_value: Option<f64>) -> Self {
        assert_eq!(grid.len(), values.len());
        NodalSampler { grid, values, boundary_value }
    }

    pub fn grid(&self) -> &Grid {
        self.grid
    }

    pub fn eval(&self, p: Point) -> Option<f64> {
        let g = self.grid;
        let fx = (p.x - g.origin.x) / g.h;
        let fy = (p.y - g.origin.y) / g.h;
        let ix = fx.floor() as i64;
        let iy = fy.floor() as i64;
        let (tx, ty) = (fx - ix as f64, fy - iy as f64);
        if let (Some(a), Some(b), Some(c), Some(d)) = (
            g.index_of(ix, iy),
            g.index_of(ix + 1, iy),
            g.index_of(ix, iy + 1),
            g.index_of(ix + 1, iy + 1),
        ) {
            let v = self.values;
            return Some(
                (1.0 - ty) * ((1.0 - tx) * v[a] + tx * v[b]) + ty * ((1.0 - tx) * v[c] + tx * v[d]),
            );
        }
        self.plane_fit(p)
    }

    fn plane_fit(&self, p: Point) -> Option<f64> {
        let g = self.grid;
        let h = g.h;
        let near = g.nodes_within(p, 2.0 * h);
        if near.is_empty() {
            return None;
        }
        // normal equations for v ≈ c0 + c1 dx + c2 dy in units of h
        let mut m = [[0.0f64; 3]; 3];
        let mut rhs = [0.0f64; 3];
        let mut add = |q: Point, v: f64| {
            let phi = [1.0, (q.x - p.x) / h, (q.y - p.y) / h];
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += phi[i] * phi[j];
                }
                rhs[i] += phi[i] * v;
            }
        };
        for &k in &near {
            add(g.position(k), self.values[k]);
        }
        if let Some(bv) = self.boundary_value {
            for &k in &near {
                for q in g.arm_boundary_points(k) {
                    if (q - p).norm() <= 2.0 * h {
                        add(q, bv);
                    }
                }
            }
        }
        solve3(m, rhs).map(|c| c[0])
    }
}

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |a: &[[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let d = det(&m);
    let scale = m[0][0].abs().max(1.0).powi(3);
    if d.abs() <= 1e-10 * scale {
        return None;
    }
    let mut out = [0.0; 3];
    for (col, o) in out.iter_mut().enumerate() {
        let mut a = m;
        for row in 0..3 {
            a[row][col] = b[row];
        }
        *o = det(&a) / d;
    }
    Some(out)
}
