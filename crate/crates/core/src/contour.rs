//! Marching-squares level curves of nodal fields, written as SVG.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{bail, Result};
use crate::geometry::Point;
use crate::io::{self, FieldSamples};

/// Polylines of one level.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelCurves {
    pub level: f64,
    pub polylines: Vec<Polyline>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    pub points: Vec<Point>,
    pub closed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContourSet {
    pub levels: Vec<LevelCurves>,
    pub min: Point,
    pub max: Point,
}

/// Samples placed back on their lattice.
struct Lattice {
    origin: Point,
    h: f64,
    nx: usize,
    ny: usize,
    values: Vec<Option<f64>>,
}

impl Lattice {
    fn from_samples(s: &FieldSamples) -> Result<Lattice> {
        const OP: &str = "render_contours";
        if s.points.is_empty() {
            bail!(Format, OP, "empty field");
        }
        let spacing = |coord: fn(&Point) -> f64| {
            let mut c: Vec<f64> = s.points.iter().map(coord).collect();
            c.sort_by(f64::total_cmp);
            c.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 1e-12).fold(f64::INFINITY, f64::min)
        };
        let h = spacing(|p| p.x).min(spacing(|p| p.y));
        if !h.is_finite() {
            bail!(Format, OP, "field needs at least two distinct x and y coordinates");
        }
        let min_x = s.points.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let min_y = s.points.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
        // one ring of empty nodes around the samples so curves can close
        let origin = Point::new(min_x - h, min_y - h);
        let ix: Vec<usize> = s.points.iter().map(|p| ((p.x - origin.x) / h).round() as usize).collect();
        let iy: Vec<usize> = s.points.iter().map(|p| ((p.y - origin.y) / h).round() as usize).collect();
        let nx = ix.iter().max().unwrap() + 2;
        let ny = iy.iter().max().unwrap() + 2;
        let mut values = vec![None; nx * ny];
        for k in 0..s.points.len() {
            let v = s.values[k];
            if !v.is_finite() {
                bail!(Format, OP, "non-finite value at row {}", k + 1);
            }
            values[iy[k] * nx + ix[k]] = Some(v);
        }
        Ok(Lattice { origin, h, nx, ny, values })
    }

    fn point(&self, ix: usize, iy: usize) -> Point {
        Point::new(self.origin.x + ix as f64 * self.h, self.origin.y + iy as f64 * self.h)
    }
}

/// Key of a lattice edge: lower-left node and direction (0 horizontal, 1 vertical).
type EdgeKey = (usize, usize, u8);

/// Level curves at `levels` equispaced values strictly between `min(0, min u)`
/// and `max u`. Nodes missing from the samples count as `outside` when given,
/// otherwise cells touching them are skipped.
pub fn contour_set(samples: &FieldSamples, levels: usize, outside: Option<f64>) -> Result<ContourSet> {
    let lat = Lattice::from_samples(samples)?;
    if levels == 0 {
        bail!(Format, "render_contours", "need at least one level");
    }
    let hi = samples.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = samples.values.iter().copied().fold(0.0, f64::min);
    let value = |ix: usize, iy: usize| lat.values[iy * lat.nx + ix].or(outside);
    let mut out = Vec::with_capacity(levels);
    for i in 1..=levels {
        let level = lo + (hi - lo) * i as f64 / (levels + 1) as f64;
        let crossing = |a: (usize, usize), b: (usize, usize), va: f64, vb: f64| {
            let t = (level - va) / (vb - va);
            let (pa, pb) = (lat.point(a.0, a.1), lat.point(b.0, b.1));
            pa + (pb - pa) * t
        };
        let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();
        let mut points: BTreeMap<EdgeKey, Point> = BTreeMap::new();
        for iy in 0..lat.ny - 1 {
            for ix in 0..lat.nx - 1 {
                let corners = [(ix, iy), (ix + 1, iy), (ix + 1, iy + 1), (ix, iy + 1)];
                let vals: Vec<Option<f64>> = corners.iter().map(|&(x, y)| value(x, y)).collect();
                let Some(v) = vals.iter().copied().collect::<Option<Vec<f64>>>() else { continue };
                // edges: bottom, right, top, left
                let edges: [EdgeKey; 4] = [(ix, iy, 0), (ix + 1, iy, 1), (ix, iy + 1, 0), (ix, iy, 1)];
                let mut cuts = Vec::new();
                for e in 0..4 {
                    let (a, b) = (e, (e + 1) % 4);
                    if (v[a] >= level) != (v[b] >= level) {
                        points.entry(edges[e]).or_insert_with(|| crossing(corners[a], corners[b], v[a], v[b]));
                        cuts.push(e);
                    }
                }
                match cuts.len() {
                    2 => segments.push((edges[cuts[0]], edges[cuts[1]])),
                    4 => {
                        // saddle: the cell average decides which corners connect
                        let center = 0.25 * (v[0] + v[1] + v[2] + v[3]);
                        if (center >= level) == (v[0] >= level) {
                            segments.push((edges[0], edges[1]));
                            segments.push((edges[2], edges[3]));
                        } else {
                            segments.push((edges[0], edges[3]));
                            segments.push((edges[1], edges[2]));
                        }
                    }
                    _ => {}
                }
            }
        }
        let polylines = stitch(&segments).into_iter().map(|(keys, closed)| Polyline { points: keys.iter().map(|k| points[k]).collect(), closed }).collect();
        out.push(LevelCurves { level, polylines });
    }
    let min = lat.point(0, 0);
    let max = lat.point(lat.nx - 1, lat.ny - 1);
    Ok(ContourSet { levels: out, min, max })
}

/// Join segments sharing edge keys into maximal chains, in scan order.
fn stitch(segments: &[(EdgeKey, EdgeKey)]) -> Vec<(Vec<EdgeKey>, bool)> {
    let mut adj: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
    for (i, (a, b)) in segments.iter().enumerate() {
        adj.entry(*a).or_default().push(i);
        adj.entry(*b).or_default().push(i);
    }
    let mut used = vec![false; segments.len()];
    let other = |i: usize, k: EdgeKey| if segments[i].0 == k { segments[i].1 } else { segments[i].0 };
    let next_unused = |k: EdgeKey, used: &[bool]| adj[&k].iter().copied().find(|&j| !used[j]);
    let mut out = Vec::new();
    // open chains start at keys with a single segment
    let mut starts: Vec<usize> = (0..segments.len()).filter(|&i| adj[&segments[i].0].len() == 1 || adj[&segments[i].1].len() == 1).collect();
    starts.extend(0..segments.len());
    for s in starts {
        if used[s] {
            continue;
        }
        used[s] = true;
        let (a, b) = segments[s];
        let (first, mut cur) = if adj[&b].len() == 1 && adj[&a].len() != 1 { (b, a) } else { (a, b) };
        let mut chain = vec![first, cur];
        while let Some(j) = next_unused(cur, &used) {
            used[j] = true;
            cur = other(j, cur);
            chain.push(cur);
        }
        let closed = chain.len() > 2 && chain[0] == *chain.last().unwrap();
        if closed {
            chain.pop();
        }
        out.push((chain, closed));
    }
    out
}

impl ContourSet {
    /// SVG document with one path per polyline; `y` points up.
    pub fn to_svg(&self) -> String {
        let (w, hgt) = (self.max.x - self.min.x, self.max.y - self.min.y);
        let scale = 600.0 / w.max(hgt);
        let (pw, ph) = (w * scale, hgt * scale);
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{pw:.3}" height="{ph:.3}" viewBox="0 0 {pw:.3} {ph:.3}">"#);
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let n = self.levels.len().max(1);
        for (i, lc) in self.levels.iter().enumerate() {
            let shade = 40 + (180 * i) / n;
            let _ = writeln!(s, r#"<g stroke="rgb({shade},{},{})" fill="none" stroke-width="1.2" data-level="{}">"#, 60, 220 - shade / 2, io::fmt_f64(lc.level));
            for pl in &lc.polylines {
                s.push_str("<path d=\"");
                for (j, p) in pl.points.iter().enumerate() {
                    let x = (p.x - self.min.x) * scale;
                    let y = (self.max.y - p.y) * scale;
                    let _ = write!(s, "{}{x:.3} {y:.3}", if j == 0 { "M" } else { " L" });
                }
                if pl.closed {
                    s.push_str(" Z");
                }
                s.push_str("\"/>\n");
            }
            s.push_str("</g>\n");
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Read a field CSV and write its level curves as SVG. Nothing is written on error.
pub fn render_contours(csv: &Path, levels: usize, svg: &Path) -> Result<ContourSet> {
    let samples = io::read_field_csv(csv)?;
    let set = contour_set(&samples, levels, Some(0.0))?;
    std::fs::write(svg, set.to_svg())?;
    Ok(set)
}
