use std::collections::VecDeque;
use std::sync::Arc;

use crate::error::{bail, Result};
use crate::geometry::{Domain, Point};

pub(crate) const NONE: u32 = u32::MAX;

/// Axis directions in arm order.
pub const EAST: usize = 0;
pub const WEST: usize = 1;
pub const NORTH: usize = 2;
pub const SOUTH: usize = 3;

const DIRS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// Uniform Cartesian grid clipped to a domain, with Shortley–Weller arm data.
///
/// Nodes sit at `origin + (ix, iy) * h`. The grid is laid out symmetrically
/// about the domain center so the center is always a node.
#[derive(Debug)]
pub struct Grid {
    domain: Domain,
    pub h: f64,
    pub origin: Point,
    pub nx: usize,
    pub ny: usize,
    index: Vec<u32>,
    nodes: Vec<(u32, u32)>,
    arms: Vec<[f64; 4]>,
    neighbors: Vec<[u32; 4]>,
}

impl Grid {
    pub fn build(domain: &Domain, h: f64) -> Result<Arc<Grid>> {
        const OP: &str = "build_grid";
        let inradius = domain.stats().inradius;
        if !(h > 0.0 && h.is_finite()) {
            bail!(Solver, OP, "spacing must be positive, got {h}");
        }
        if h >= inradius / 4.0 {
            bail!(Solver, OP, "spacing {h} must be below inradius/4 = {}", inradius / 4.0);
        }
        let half = ((domain.circumradius() + 2.0 * h) / h).ceil() as usize;
        let n = 2 * half + 1;
        let c = domain.center();
        let origin = Point::new(c.x - half as f64 * h, c.y - half as f64 * h);
        let pos = |ix: usize, iy: usize| Point::new(origin.x + ix as f64 * h, origin.y + iy as f64 * h);

        let inside_tol = -1e-9 * h;
        let mut index = vec![NONE; n * n];
        let mut nodes = Vec::new();
        for iy in 0..n {
            for ix in 0..n {
                if domain.sdf(pos(ix, iy)) <= inside_tol {
                    index[iy * n + ix] = nodes.len() as u32;
                    nodes.push((ix as u32, iy as u32));
                }
            }
        }
        if nodes.is_empty() {
            bail!(Solver, OP, "no interior nodes at spacing {h}");
        }

        let mut arms = Vec::with_capacity(nodes.len());
        let mut neighbors = Vec::with_capacity(nodes.len());
        for &(ix, iy) in &nodes {
            let p = pos(ix as usize, iy as usize);
            let mut arm = [1.0; 4];
            let mut nb = [NONE; 4];
            for (d, &(dx, dy)) in DIRS.iter().enumerate() {
                let jx = ix as i64 + dx;
                let jy = iy as i64 + dy;
                let j = if (0..n as i64).contains(&jx) && (0..n as i64).contains(&jy) {
                    index[jy as usize * n + jx as usize]
                } else {
                    NONE
                };
                if j != NONE {
                    nb[d] = j;
                } else {
                    let dir = Point::new(dx as f64, dy as f64);
                    arm[d] = crossing_fraction(domain, p, dir, h);
                }
            }
            arms.push(arm);
            neighbors.push(nb);
        }

        let grid = Grid { domain: domain.clone(), h, origin, nx: n, ny: n, index, nodes, arms, neighbors };
        if !grid.is_connected() {
            bail!(Solver, OP, "interior node set is disconnected at spacing {h}");
        }
        Ok(Arc::new(grid))
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([0u32]);
        seen[0] = true;
        let mut count = 1;
        while let Some(k) = queue.pop_front() {
            for &j in &self.neighbors[k as usize] {
                if j != NONE && !seen[j as usize] {
                    seen[j as usize] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        count == self.len()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Number of interior nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Interior index of node `(ix, iy)`, if it is interior.
    pub fn index_of(&self, ix: i64, iy: i64) -> Option<usize> {
        if ix < 0 || iy < 0 || ix >= self.nx as i64 || iy >= self.ny as i64 {
            return None;
        }
        let k = self.index[iy as usize * self.nx + ix as usize];
        (k != NONE).then_some(k as usize)
    }

    /// Lattice coordinates of interior node `k`.
    pub fn node(&self, k: usize) -> (i64, i64) {
        let (ix, iy) = self.nodes[k];
        (ix as i64, iy as i64)
    }

    pub fn position(&self, k: usize) -> Point {
        let (ix, iy) = self.node(k);
        self.lattice_point(ix, iy)
    }

    pub fn lattice_point(&self, ix: i64, iy: i64) -> Point {
        Point::new(self.origin.x + ix as f64 * self.h, self.origin.y + iy as f64 * self.h)
    }

    /// Arm fractions `[east, west, north, south]` of node `k`, each in (0, 1].
    pub fn arms(&self, k: usize) -> [f64; 4] {
        self.arms[k]
    }

    /// Interior neighbors `[east, west, north, south]` of node `k`.
    pub fn neighbors(&self, k: usize) -> [Option<usize>; 4] {
        self.neighbors[k].map(|j| (j != NONE).then_some(j as usize))
    }

    pub(crate) fn raw_neighbors(&self, k: usize) -> [u32; 4] {
        self.neighbors[k]
    }

    /// True when all eight surrounding lattice nodes are interior.
    pub fn has_full_stencil(&self, k: usize) -> bool {
        let (ix, iy) = self.node(k);
        (-1..=1).all(|dy| (-1..=1).all(|dx| self.index_of(ix + dx, iy + dy).is_some()))
    }

    /// Boundary intersection points along the cut arms of node `k`.
    pub fn arm_boundary_points(&self, k: usize) -> impl Iterator<Item = Point> + '_ {
        let p = self.position(k);
        let h = self.h;
        (0..4).filter(move |&d| self.neighbors[k][d] == NONE).map(move |d| {
            let (dx, dy) = DIRS[d];
            p + Point::new(dx as f64, dy as f64) * (self.arms[k][d] * h)
        })
    }

    /// Interior nodes within Euclidean distance `radius` of `p`.
    pub fn nodes_within(&self, p: Point, radius: f64) -> Vec<usize> {
        let h = self.h;
        let lo_x = ((p.x - radius - self.origin.x) / h).floor() as i64;
        let hi_x = ((p.x + radius - self.origin.x) / h).ceil() as i64;
        let lo_y = ((p.y - radius - self.origin.y) / h).floor() as i64;
        let hi_y = ((p.y + radius - self.origin.y) / h).ceil() as i64;
        let r2 = radius * radius;
        let mut out = Vec::new();
        for iy in lo_y..=hi_y {
            for ix in lo_x..=hi_x {
                if let Some(k) = self.index_of(ix, iy) {
                    if (self.lattice_point(ix, iy) - p).norm_sq() <= r2 {
                        out.push(k);
                    }
                }
            }
        }
        out
    }

    /// Shortley–Weller coefficients of `-Δ_h` at node `k`: `(diag, [off_E, off_W, off_N, off_S])`.
    /// Off-diagonal entries for boundary arms are reported but multiply the zero boundary value.
    pub fn stencil(&self, k: usize) -> (f64, [f64; 4]) {
        let a = self.arms[k];
        let s = 2.0 / (self.h * self.h);
        let diag = s * (1.0 / (a[EAST] * a[WEST]) + 1.0 / (a[NORTH] * a[SOUTH]));
        let off = [
            -s / (a[EAST] * (a[EAST] + a[WEST])),
            -s / (a[WEST] * (a[EAST] + a[WEST])),
            -s / (a[NORTH] * (a[NORTH] + a[SOUTH])),
            -s / (a[SOUTH] * (a[NORTH] + a[SOUTH])),
        ];
        (diag, off)
    }
}

/// Fraction of the arm from `p` towards `p + h dir` that stays inside the domain.
fn crossing_fraction(domain: &Domain, p: Point, dir: Point, h: f64) -> f64 {
    let at = |t: f64| domain.sdf(p + dir * (t * h));
    if at(1.0) <= 0.0 {
        // the neighbor sits within the exclusion band at the boundary
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if at(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).max(1e-12)
}
