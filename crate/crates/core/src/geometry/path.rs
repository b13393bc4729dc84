//! Piecewise boundary curves built from straight segments and circular arcs,
//! traversed counterclockwise.

use std::f64::consts::TAU;

use super::Point;

#[derive(Clone, Debug)]
pub(crate) enum Piece {
    Segment { a: Point, b: Point },
    /// Counterclockwise arc; `sweep > 0`.
    Arc { center: Point, radius: f64, start: f64, sweep: f64 },
}

impl Piece {
    fn length(&self) -> f64 {
        match *self {
            Piece::Segment { a, b } => a.dist(b),
            Piece::Arc { radius, sweep, .. } => radius * sweep,
        }
    }

    /// Point and inward unit normal at local arclength `t`.
    fn eval(&self, t: f64) -> (Point, Point) {
        match *self {
            Piece::Segment { a, b } => {
                let len = a.dist(b);
                let dir = (b - a) * (1.0 / len);
                (a + dir * t, dir.perp())
            }
            Piece::Arc { center, radius, start, sweep: _ } => {
                let u = Point::from_angle(start + t / radius);
                (center + u * radius, -u)
            }
        }
    }

    /// Closest point on the piece and its local arclength.
    fn closest(&self, p: Point) -> (Point, f64) {
        match *self {
            Piece::Segment { a, b } => {
                let d = b - a;
                let len2 = d.norm_sq();
                let t = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
                (a + d * t, t * len2.sqrt())
            }
            Piece::Arc { center, radius, start, sweep } => {
                let v = p - center;
                let ang = if v.norm_sq() == 0.0 { start } else { v.y.atan2(v.x) };
                let rel = (ang - start).rem_euclid(TAU);
                if rel <= sweep {
                    (center + Point::from_angle(start + rel) * radius, rel * radius)
                } else {
                    let e0 = center + Point::from_angle(start) * radius;
                    let e1 = center + Point::from_angle(start + sweep) * radius;
                    if p.dist(e0) <= p.dist(e1) {
                        (e0, 0.0)
                    } else {
                        (e1, sweep * radius)
                    }
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct BoundaryPath {
    pieces: Vec<Piece>,
    /// `offsets[i]` is the arclength at the start of piece `i`; last entry is the total length.
    offsets: Vec<f64>,
}

impl BoundaryPath {
    pub(crate) fn new(pieces: Vec<Piece>) -> Self {
        let pieces: Vec<Piece> = pieces.into_iter().filter(|p| p.length() > 0.0).collect();
        let mut offsets = Vec::with_capacity(pieces.len() + 1);
        let mut acc = 0.0;
        offsets.push(0.0);
        for p in &pieces {
            acc += p.length();
            offsets.push(acc);
        }
        BoundaryPath { pieces, offsets }
    }

    pub(crate) fn length(&self) -> f64 {
        *self.offsets.last().unwrap()
    }

    pub(crate) fn eval(&self, s: f64) -> (Point, Point) {
        let s = s.rem_euclid(self.length());
        // partition_point returns the first piece whose start exceeds s
        let i = self.offsets[1..].partition_point(|&o| o <= s).min(self.pieces.len() - 1);
        self.pieces[i].eval(s - self.offsets[i])
    }

    /// Closest boundary point, its arclength parameter, and the distance.
    pub(crate) fn closest(&self, p: Point) -> (Point, f64, f64) {
        let mut best = (p, 0.0, f64::INFINITY);
        for (piece, &off) in self.pieces.iter().zip(&self.offsets) {
            let (q, t) = piece.closest(p);
            let d = p.dist(q);
            if d < best.2 {
                best = (q, off + t, d);
            }
        }
        let total = self.length();
        if best.1 >= total {
            best.1 -= total;
        }
        best
    }
}
