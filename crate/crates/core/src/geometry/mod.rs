//! Catalog of planar convex domains with exact signed distance, closest-point,
//! and arclength queries.
//!
//! Every shape is described in a local frame centered at the origin and placed
//! in the plane by a [`DomainSpec::center`] and [`DomainSpec::rotation`].

mod ellipse;
mod path;
mod point;

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use ellipse::Ellipse;
use path::{BoundaryPath, Piece};
pub use point::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeKind {
    Disk,
    Ellipse,
    Rectangle,
    RoundedRectangle,
    EquilateralTriangle,
    Stadium,
}

impl ShapeKind {
    fn param_names(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            ShapeKind::Disk => (&["radius"], &[]),
            ShapeKind::Ellipse => (&["a", "b"], &[]),
            ShapeKind::Rectangle => (&["length", "width"], &[]),
            ShapeKind::RoundedRectangle => (&["length", "width"], &["corner_radius"]),
            ShapeKind::EquilateralTriangle => (&["side"], &[]),
            ShapeKind::Stadium => (&["length", "radius"], &[]),
        }
    }
}

/// Serializable description of a domain: `{"kind": "disk", "params": {"radius": 1.0}}`.
///
/// Parameter names per kind:
/// - `disk`: `radius`
/// - `ellipse`: semi-axes `a` (along x) and `b` (along y)
/// - `rectangle`: `length` (x extent), `width` (y extent)
/// - `rounded-rectangle`: `length`, `width`, optional `corner_radius` (default `width / 4`)
/// - `equilateral-triangle`: `side`
/// - `stadium`: straight `length` and cap `radius`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub kind: ShapeKind,
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub center: Point,
    /// Counterclockwise rotation of the local frame, radians.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub rotation: f64,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

impl DomainSpec {
    fn with(kind: ShapeKind, params: &[(&str, f64)]) -> Self {
        DomainSpec {
            kind,
            params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            center: Point::ORIGIN,
            rotation: 0.0,
        }
    }

    pub fn disk(radius: f64) -> Self {
        Self::with(ShapeKind::Disk, &[("radius", radius)])
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        Self::with(ShapeKind::Ellipse, &[("a", a), ("b", b)])
    }

    pub fn rectangle(length: f64, width: f64) -> Self {
        Self::with(ShapeKind::Rectangle, &[("length", length), ("width", width)])
    }

    pub fn rounded_rectangle(length: f64, width: f64, corner_radius: f64) -> Self {
        Self::with(
            ShapeKind::RoundedRectangle,
            &[("length", length), ("width", width), ("corner_radius", corner_radius)],
        )
    }

    pub fn equilateral_triangle(side: f64) -> Self {
        Self::with(ShapeKind::EquilateralTriangle, &[("side", side)])
    }

    pub fn stadium(length: f64, radius: f64) -> Self {
        Self::with(ShapeKind::Stadium, &[("length", length), ("radius", radius)])
    }

    pub fn with_center(mut self, center: Point) -> Self {
        self.center = center;
        self
    }

    pub fn rotated(mut self, radians: f64) -> Self {
        self.rotation = radians;
        self
    }

    fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryStats {
    pub area: f64,
    pub inradius: f64,
    pub diameter: f64,
    pub boundary_length: f64,
    /// False for shapes with corners (rectangle, triangle).
    pub smooth_boundary: bool,
}

/// One boundary probe: position, inward unit normal, arclength parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub point: Point,
    pub normal: Point,
    pub arclength: f64,
}

#[derive(Clone, Debug)]
enum Shape {
    Disk { r: f64 },
    Ellipse(Box<Ellipse>),
    Rectangle { hx: f64, hy: f64 },
    RoundedRectangle { hx: f64, hy: f64, rho: f64 },
    Triangle { verts: [Point; 3] },
    Stadium { hl: f64, r: f64 },
}

/// Immutable, queryable domain built from a [`DomainSpec`].
#[derive(Clone, Debug)]
pub struct Domain {
    spec: DomainSpec,
    shape: Shape,
    path: Option<BoundaryPath>,
    cos: f64,
    sin: f64,
    stats: GeometryStats,
}

impl Domain {
    pub fn new(spec: DomainSpec) -> Result<Self> {
        const OP: &str = "make_domain";
        let (required, optional) = spec.kind.param_names();
        for name in spec.params.keys() {
            if !required.contains(&name.as_str()) && !optional.contains(&name.as_str()) {
                bail!(Geometry, OP, "unknown parameter `{name}` for {:?}", spec.kind);
            }
        }
        for name in required {
            if spec.param(name).is_none() {
                bail!(Geometry, OP, "missing parameter `{name}` for {:?}", spec.kind);
            }
        }
        for (name, &v) in &spec.params {
            if !(v.is_finite() && v > 0.0) {
                bail!(Geometry, OP, "parameter `{name}` must be positive and finite, got {v}");
            }
        }
        if !(spec.center.x.is_finite() && spec.center.y.is_finite() && spec.rotation.is_finite()) {
            bail!(Geometry, OP, "center and rotation must be finite");
        }
        let p = |n: &str| spec.param(n).unwrap();
        let (shape, path, stats) = match spec.kind {
            ShapeKind::Disk => {
                let r = p("radius");
                let path = BoundaryPath::new(vec![Piece::Arc {
                    center: Point::ORIGIN,
                    radius: r,
                    start: 0.0,
                    sweep: TAU,
                }]);
                let stats = GeometryStats {
                    area: PI * r * r,
                    inradius: r,
                    diameter: 2.0 * r,
                    boundary_length: TAU * r,
                    smooth_boundary: true,
                };
                (Shape::Disk { r }, Some(path), stats)
            }
            ShapeKind::Ellipse => {
                let (a, b) = (p("a"), p("b"));
                let e = Ellipse::new(a, b);
                let stats = GeometryStats {
                    area: PI * a * b,
                    inradius: a.min(b),
                    diameter: 2.0 * a.max(b),
                    boundary_length: e.perimeter(),
                    smooth_boundary: true,
                };
                (Shape::Ellipse(Box::new(e)), None, stats)
            }
            ShapeKind::Rectangle => {
                let (hx, hy) = (0.5 * p("length"), 0.5 * p("width"));
                let c = [
                    Point::new(hx, 0.0),
                    Point::new(hx, hy),
                    Point::new(-hx, hy),
                    Point::new(-hx, -hy),
                    Point::new(hx, -hy),
                    Point::new(hx, 0.0),
                ];
                let path = BoundaryPath::new(
                    c.windows(2).map(|w| Piece::Segment { a: w[0], b: w[1] }).collect(),
                );
                let stats = GeometryStats {
                    area: 4.0 * hx * hy,
                    inradius: hx.min(hy),
                    diameter: 2.0 * hx.hypot(hy),
                    boundary_length: 4.0 * (hx + hy),
                    smooth_boundary: false,
                };
                (Shape::Rectangle { hx, hy }, Some(path), stats)
            }
            ShapeKind::RoundedRectangle => {
                let (l, w) = (p("length"), p("width"));
                let rho = spec.param("corner_radius").unwrap_or(0.25 * w);
                if rho > 0.5 * l.min(w) {
                    bail!(Geometry, OP, "corner_radius {rho} exceeds min(length, width)/2");
                }
                let (hx, hy) = (0.5 * l, 0.5 * w);
                let (cx, cy) = (hx - rho, hy - rho);
                let seg = |a: (f64, f64), b: (f64, f64)| Piece::Segment {
                    a: Point::new(a.0, a.1),
                    b: Point::new(b.0, b.1),
                };
                let arc = |x: f64, y: f64, start: f64| Piece::Arc {
                    center: Point::new(x, y),
                    radius: rho,
                    start,
                    sweep: FRAC_PI_2,
                };
                let path = BoundaryPath::new(vec![
                    seg((hx, 0.0), (hx, cy)),
                    arc(cx, cy, 0.0),
                    seg((cx, hy), (-cx, hy)),
                    arc(-cx, cy, FRAC_PI_2),
                    seg((-hx, cy), (-hx, -cy)),
                    arc(-cx, -cy, PI),
                    seg((-cx, -hy), (cx, -hy)),
                    arc(cx, -cy, 3.0 * FRAC_PI_2),
                    seg((hx, -cy), (hx, 0.0)),
                ]);
                let stats = GeometryStats {
                    area: l * w - (4.0 - PI) * rho * rho,
                    inradius: hx.min(hy),
                    diameter: 2.0 * (cx.hypot(cy) + rho),
                    boundary_length: 2.0 * (l + w) - 8.0 * rho + TAU * rho,
                    smooth_boundary: true,
                };
                (Shape::RoundedRectangle { hx, hy, rho }, Some(path), stats)
            }
            ShapeKind::EquilateralTriangle => {
                let s = p("side");
                let verts = [
                    Point::new(0.0, s / 3f64.sqrt()),
                    Point::new(-0.5 * s, -s / (2.0 * 3f64.sqrt())),
                    Point::new(0.5 * s, -s / (2.0 * 3f64.sqrt())),
                ];
                let path = BoundaryPath::new(
                    (0..3)
                        .map(|i| Piece::Segment { a: verts[i], b: verts[(i + 1) % 3] })
                        .collect(),
                );
                let stats = GeometryStats {
                    area: 3f64.sqrt() / 4.0 * s * s,
                    inradius: s / (2.0 * 3f64.sqrt()),
                    diameter: s,
                    boundary_length: 3.0 * s,
                    smooth_boundary: false,
                };
                (Shape::Triangle { verts }, Some(path), stats)
            }
            ShapeKind::Stadium => {
                let (l, r) = (p("length"), p("radius"));
                let hl = 0.5 * l;
                let path = BoundaryPath::new(vec![
                    Piece::Arc { center: Point::new(hl, 0.0), radius: r, start: 0.0, sweep: FRAC_PI_2 },
                    Piece::Segment { a: Point::new(hl, r), b: Point::new(-hl, r) },
                    Piece::Arc { center: Point::new(-hl, 0.0), radius: r, start: FRAC_PI_2, sweep: PI },
                    Piece::Segment { a: Point::new(-hl, -r), b: Point::new(hl, -r) },
                    Piece::Arc {
                        center: Point::new(hl, 0.0),
                        radius: r,
                        start: 3.0 * FRAC_PI_2,
                        sweep: FRAC_PI_2,
                    },
                ]);
                let stats = GeometryStats {
                    area: 2.0 * r * l + PI * r * r,
                    inradius: r,
                    diameter: l + 2.0 * r,
                    boundary_length: 2.0 * l + TAU * r,
                    smooth_boundary: true,
                };
                (Shape::Stadium { hl, r }, Some(path), stats)
            }
        };
        let (sin, cos) = spec.rotation.sin_cos();
        Ok(Domain { spec, shape, path, cos, sin, stats })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn kind(&self) -> ShapeKind {
        self.spec.kind
    }

    pub fn center(&self) -> Point {
        self.spec.center
    }

    pub fn stats(&self) -> GeometryStats {
        self.stats
    }

    #[inline]
    fn to_local(&self, p: Point) -> Point {
        let d = p - self.spec.center;
        Point::new(self.cos * d.x + self.sin * d.y, -self.sin * d.x + self.cos * d.y)
    }

    #[inline]
    fn rotate(&self, v: Point) -> Point {
        Point::new(self.cos * v.x - self.sin * v.y, self.sin * v.x + self.cos * v.y)
    }

    #[inline]
    fn to_world(&self, q: Point) -> Point {
        self.rotate(q) + self.spec.center
    }

    /// Signed distance to the boundary, negative inside.
    pub fn sdf(&self, p: Point) -> f64 {
        let q = self.to_local(p);
        match &self.shape {
            Shape::Disk { r } => q.norm() - r,
            Shape::Ellipse(e) => e.sdf(q),
            Shape::Rectangle { hx, hy } => box_sdf(q, *hx, *hy),
            Shape::RoundedRectangle { hx, hy, rho } => box_sdf(q, hx - rho, hy - rho) - rho,
            Shape::Triangle { verts } => {
                let mut d = f64::INFINITY;
                let mut inside = true;
                for i in 0..3 {
                    let (a, b) = (verts[i], verts[(i + 1) % 3]);
                    let e = b - a;
                    let t = ((q - a).dot(e) / e.norm_sq()).clamp(0.0, 1.0);
                    d = d.min(q.dist(a + e * t));
                    // counterclockwise: interior lies to the left of every edge
                    if e.perp().dot(q - a) <= 0.0 {
                        inside = false;
                    }
                }
                if inside {
                    -d
                } else {
                    d
                }
            }
            Shape::Stadium { hl, r } => {
                let x = q.x.clamp(-hl, *hl);
                q.dist(Point::new(x, 0.0)) - r
            }
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.sdf(p) < 0.0
    }

    /// Closest boundary point and its arclength parameter.
    pub fn closest_boundary(&self, p: Point) -> (Point, f64) {
        let q = self.to_local(p);
        match (&self.shape, &self.path) {
            (Shape::Ellipse(e), _) => {
                let c = e.closest(q);
                let t = (c.y / e.b).atan2(c.x / e.a);
                (self.to_world(c), e.arclength_at(t))
            }
            (_, Some(path)) => {
                let (c, s, _) = path.closest(q);
                (self.to_world(c), s)
            }
            _ => unreachable!("non-ellipse shapes carry a boundary path"),
        }
    }

    /// Boundary point and inward unit normal at arclength `s` (taken modulo the perimeter).
    pub fn boundary_point(&self, s: f64) -> (Point, Point) {
        let (q, n) = match (&self.shape, &self.path) {
            (Shape::Ellipse(e), _) => {
                let q = e.point_at_param(e.param_at(s));
                (q, e.inward_normal(q))
            }
            (_, Some(path)) => path.eval(s),
            _ => unreachable!("non-ellipse shapes carry a boundary path"),
        };
        (self.to_world(q), self.rotate(n))
    }

    /// `m` points equispaced in arclength, starting at arclength 0.
    pub fn boundary_sample(&self, m: usize) -> Vec<BoundarySample> {
        let total = self.boundary_length();
        (0..m)
            .map(|k| {
                let s = total * k as f64 / m as f64;
                let (point, normal) = self.boundary_point(s);
                BoundarySample { point, normal, arclength: s }
            })
            .collect()
    }

    /// Perimeter used for the arclength parametrization.
    pub fn boundary_length(&self) -> f64 {
        self.stats.boundary_length
    }

    /// Vertices of polygonal shapes (rectangle, triangle) in world coordinates.
    pub fn corners(&self) -> Vec<Point> {
        match &self.shape {
            Shape::Triangle { verts } => verts.iter().map(|&v| self.to_world(v)).collect(),
            Shape::Rectangle { hx, hy } => [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]
                .iter()
                .map(|&(sx, sy)| self.to_world(Point::new(sx * hx, sy * hy)))
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Largest distance from the domain center to the boundary.
    pub fn circumradius(&self) -> f64 {
        match &self.shape {
            Shape::Disk { r } => *r,
            Shape::Ellipse(e) => e.a.max(e.b),
            Shape::Rectangle { hx, hy } => hx.hypot(*hy),
            Shape::RoundedRectangle { hx, hy, rho } => (hx - rho).hypot(hy - rho) + rho,
            Shape::Triangle { verts } => verts[0].norm(),
            Shape::Stadium { hl, r } => hl + r,
        }
    }
}

fn box_sdf(q: Point, hx: f64, hy: f64) -> f64 {
    let dx = q.x.abs() - hx;
    let dy = q.y.abs() - hy;
    let outside = dx.max(0.0).hypot(dy.max(0.0));
    outside + dx.max(dy).min(0.0)
}

/// Free-function form of [`Domain::new`].
pub fn make_domain(spec: DomainSpec) -> Result<Domain> {
    Domain::new(spec)
}

/// Free-function form of [`Domain::stats`].
pub fn geometry_stats(domain: &Domain) -> GeometryStats {
    domain.stats()
}
