//! Planar geometry for rooms and sensor coverage.

use std::fmt;

use crate::error::{Error, Result};

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, o: Point) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    /// Bearing from `self` to `o` in degrees, counter-clockwise from +x.
    pub fn bearing_to(self, o: Point) -> f64 {
        (o.y - self.y).atan2(o.x - self.x).to_degrees()
    }

    /// Point `d` metres away along `heading` degrees.
    pub fn step(self, heading: f64, d: f64) -> Point {
        let r = heading.to_radians();
        Point::new(self.x + d * r.cos(), self.y + d * r.sin())
    }

    pub fn lerp(self, o: Point, f: f64) -> Point {
        Point::new(self.x + (o.x - self.x) * f, self.y + (o.y - self.y) * f)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.3}, {:.3})", self.x, self.y)
    }
}

/// Signed smallest difference `a − b` in degrees, in `(-180, 180]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

pub fn normalize_heading(h: f64) -> f64 {
    h.rem_euclid(360.0)
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn on_segment(p: Point, a: Point, b: Point) -> bool {
    let len = a.dist(b);
    cross(a, b, p).abs() <= EPS * len.max(1.0)
        && p.x >= a.x.min(b.x) - EPS
        && p.x <= a.x.max(b.x) + EPS
        && p.y >= a.y.min(b.y) - EPS
        && p.y <= a.y.max(b.y) + EPS
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    on_segment(a, c, d) || on_segment(b, c, d) || on_segment(c, a, b) || on_segment(d, a, b)
}

/// Simple polygon with counter-clockwise vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    /// Validates simplicity and reorders clockwise input to counter-clockwise.
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        let n = vertices.len();
        if n < 3 {
            return Err(Error::Polygon(format!("need at least 3 vertices, got {n}")));
        }
        if vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::Polygon("non-finite vertex".into()));
        }
        for i in 0..n {
            for j in i + 1..n {
                if vertices[i].dist(vertices[j]) <= EPS {
                    return Err(Error::Polygon(format!("vertices {i} and {j} coincide")));
                }
            }
        }
        for i in 0..n {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                if segments_intersect(a, b, c, d) {
                    return Err(Error::Polygon(format!("edges {i} and {j} intersect")));
                }
            }
        }
        let mut poly = Polygon { vertices };
        let a = poly.signed_area();
        if a.abs() <= EPS {
            return Err(Error::Polygon("zero area".into()));
        }
        if a < 0.0 {
            poly.vertices.reverse();
        }
        Ok(poly)
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Polygon::new(vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
        .expect("axis-aligned rectangle")
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    fn signed_area(&self) -> f64 {
        self.edges().map(|(a, b)| a.x * b.y - b.x * a.y).sum::<f64>() / 2.0
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// `(min, max)` corners of the bounding box.
    pub fn bbox(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    pub fn on_boundary(&self, p: Point) -> bool {
        self.edges().any(|(a, b)| on_segment(p, a, b))
    }

    /// Inside or on the boundary (winding-number test).
    pub fn contains(&self, p: Point) -> bool {
        if self.on_boundary(p) {
            return true;
        }
        let mut wn = 0i32;
        for (a, b) in self.edges() {
            if a.y <= p.y {
                if b.y > p.y && cross(a, b, p) > 0.0 {
                    wn += 1;
                }
            } else if b.y <= p.y && cross(a, b, p) < 0.0 {
                wn -= 1;
            }
        }
        wn != 0
    }

    /// Nearest point on the boundary.
    pub fn closest_boundary_point(&self, p: Point) -> Point {
        let mut best = self.vertices[0];
        let mut bd = f64::INFINITY;
        for (a, b) in self.edges() {
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
            let q = a.lerp(b, t);
            let d = q.dist(p);
            if d < bd {
                bd = d;
                best = q;
            }
        }
        best
    }

    /// Whether the straight segment from `a` to `b` stays inside the polygon.
    pub fn contains_segment(&self, a: Point, b: Point) -> bool {
        if !self.contains(a) || !self.contains(b) {
            return false;
        }
        let steps = (a.dist(b) / 0.05).ceil().max(1.0) as usize;
        (1..steps).all(|k| self.contains(a.lerp(b, k as f64 / steps as f64)))
    }
}

/// Circular sector: apex, heading (degrees), full opening angle and radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    pub apex: Point,
    pub heading: f64,
    pub fov: f64,
    pub range: f64,
}

impl Sector {
    pub fn contains(&self, p: Point) -> bool {
        let d = self.apex.dist(p);
        if d > self.range + EPS {
            return false;
        }
        if d <= EPS || self.fov >= 360.0 {
            return true;
        }
        angle_diff(self.apex.bearing_to(p), self.heading).abs() <= self.fov / 2.0 + 1e-7
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clockwise_input_is_reordered() {
        let cw = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, 5.0),
            Point::new(8.0, 5.0),
            Point::new(8.0, 0.0),
        ])
        .unwrap();
        assert!(cw.signed_area() > 0.0);
        assert_eq!(cw.area(), 40.0);
    }

    #[test]
    fn bowtie_is_rejected() {
        let r = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(4.0, 4.0),
            Point::new(4.0, 0.0),
            Point::new(0.0, 4.0),
        ]);
        assert!(matches!(r, Err(Error::Polygon(_))));
    }

    #[test]
    fn containment_includes_boundary() {
        let p = Polygon::rect(0.0, 0.0, 8.0, 5.0);
        assert!(p.contains(Point::new(0.0, 2.0)));
        assert!(p.contains(Point::new(4.0, 2.5)));
        assert!(!p.contains(Point::new(8.01, 2.5)));
        let l = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(4.0, 0.0),
            Point::new(4.0, 2.0),
            Point::new(2.0, 2.0),
            Point::new(2.0, 4.0),
            Point::new(0.0, 4.0),
        ])
        .unwrap();
        assert!(!l.contains(Point::new(3.0, 3.0)));
        assert!(l.contains(Point::new(1.0, 3.0)));
        assert!(!l.contains_segment(Point::new(3.5, 1.5), Point::new(1.5, 3.5)));
        assert!(l.contains_segment(Point::new(0.5, 0.5), Point::new(1.5, 3.5)));
    }

    #[test]
    fn sector_membership() {
        let s = Sector {
            apex: Point::new(0.0, 0.0),
            heading: 45.0,
            fov: 90.0,
            range: 3.0,
        };
        assert!(s.contains(s.apex));
        assert!(s.contains(Point::new(2.0, 0.0)));
        assert!(s.contains(Point::new(1.0, 1.0)));
        assert!(!s.contains(Point::new(-1.0, -1.0)));
        assert!(!s.contains(Point::new(2.5, 2.5)));
    }

    #[test]
    fn angle_diff_wraps() {
        assert_eq!(angle_diff(10.0, 350.0), 20.0);
        assert_eq!(angle_diff(350.0, 10.0), -20.0);
        assert_eq!(angle_diff(180.0, 0.0), 180.0);
    }
}
