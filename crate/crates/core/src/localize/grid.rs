//! Square-cell rasterization of a room.

use crate::error::{Error, Result};
use crate::sim::{Point, Polygon};

/// Default cell edge, metres.
pub const DEFAULT_CELL_M: f64 = 0.25;

const OVERLAP_EPS: f64 = 1e-9;

/// Area of a polygon clipped to an axis-aligned box.
fn overlap_area(poly: &[Point], lo: Point, hi: Point) -> f64 {
    let mut pts = poly.to_vec();
    // Each clip keeps points with `inside(p) >= 0`.
    let planes: [&dyn Fn(Point) -> f64; 4] = [&|p| p.x - lo.x, &|p| hi.x - p.x, &|p| p.y - lo.y, &|p| hi.y - p.y];
    for side in planes {
        if pts.is_empty() {
            return 0.0;
        }
        let mut out = Vec::with_capacity(pts.len() + 2);
        for k in 0..pts.len() {
            let a = pts[k];
            let b = pts[(k + 1) % pts.len()];
            let (da, db) = (side(a), side(b));
            if da >= 0.0 {
                out.push(a);
            }
            if (da >= 0.0) != (db >= 0.0) {
                out.push(a.lerp(b, da / (da - db)));
            }
        }
        pts = out;
    }
    let n = pts.len();
    (0..n)
        .map(|k| {
            let (a, b) = (pts[k], pts[(k + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
        .abs()
        / 2.0
}

/// A set of grid cells over a room's bounding box.
///
/// The room mask holds every cell that overlaps the room polygon, so each
/// point of the room falls in some cell.
/// Every region derived from the same grid shares origin, cell size and
/// dimensions, so set operations are plain mask operations.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRegion {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    mask: Vec<bool>,
}

impl GridRegion {
    /// All cells of `room` at the given cell size.
    pub fn from_room(room: &Polygon, cell: f64) -> Result<Self> {
        if !(cell.is_finite() && cell > 0.0) {
            return Err(Error::Config(format!("cell size {cell} must be positive")));
        }
        let (lo, hi) = room.bbox();
        let nx = (((hi.x - lo.x) / cell).ceil() as usize).max(1);
        let ny = (((hi.y - lo.y) / cell).ceil() as usize).max(1);
        let mut g = GridRegion {
            origin: lo,
            cell,
            nx,
            ny,
            mask: vec![false; nx * ny],
        };
        for i in 0..nx * ny {
            let [lo, _, hi, _] = g.corners(i);
            g.mask[i] = overlap_area(room.vertices(), lo, hi) > OVERLAP_EPS * cell * cell;
        }
        Ok(g)
    }

    /// Same grid, no cells.
    pub fn empty_like(&self) -> Self {
        GridRegion {
            mask: vec![false; self.mask.len()],
            ..self.clone()
        }
    }

    /// Same grid, cells selected by `f` among the cells of `self`.
    pub fn filter(&self, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut out = self.empty_like();
        for i in self.iter() {
            out.mask[i] = f(i);
        }
        out
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Total number of grid positions, selected or not.
    pub fn capacity(&self) -> usize {
        self.mask.len()
    }

    pub fn contains_cell(&self, i: usize) -> bool {
        self.mask.get(i).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, i: usize) {
        self.mask[i] = true;
    }

    pub fn remove(&mut self, i: usize) {
        self.mask[i] = false;
    }

    /// Indices of selected cells in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i)
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    pub fn area(&self) -> f64 {
        self.count() as f64 * self.cell * self.cell
    }

    /// Column and row of a cell index.
    pub fn ij(&self, i: usize) -> (usize, usize) {
        (i % self.nx, i / self.nx)
    }

    pub fn center(&self, i: usize) -> Point {
        let (cx, cy) = self.ij(i);
        Point::new(
            self.origin.x + (cx as f64 + 0.5) * self.cell,
            self.origin.y + (cy as f64 + 0.5) * self.cell,
        )
    }

    /// Corners of a cell, counter-clockwise from the lower left.
    pub fn corners(&self, i: usize) -> [Point; 4] {
        let (cx, cy) = self.ij(i);
        let x0 = self.origin.x + cx as f64 * self.cell;
        let y0 = self.origin.y + cy as f64 * self.cell;
        let x1 = x0 + self.cell;
        let y1 = y0 + self.cell;
        [
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ]
    }

    /// Grid position containing `p`, clamped onto the grid.
    pub fn cell_of(&self, p: Point) -> usize {
        let clamp = |v: f64, n: usize| (v.floor().max(0.0) as usize).min(n - 1);
        let cx = clamp((p.x - self.origin.x) / self.cell, self.nx);
        let cy = clamp((p.y - self.origin.y) / self.cell, self.ny);
        cy * self.nx + cx
    }

    /// Selected cell containing `p`, or the selected cell with the nearest centre.
    pub fn nearest_cell(&self, p: Point) -> Option<usize> {
        let c = self.cell_of(p);
        if self.contains_cell(c) {
            return Some(c);
        }
        self.iter()
            .min_by(|&a, &b| self.center(a).dist(p).total_cmp(&self.center(b).dist(p)))
    }

    /// Distance from `p` to the nearest point of cell `i`.
    pub fn cell_dist(&self, i: usize, p: Point) -> f64 {
        let [lo, _, hi, _] = self.corners(i);
        let dx = (lo.x - p.x).max(0.0).max(p.x - hi.x);
        let dy = (lo.y - p.y).max(0.0).max(p.y - hi.y);
        dx.hypot(dy)
    }

    /// Mean of selected cell centres.
    pub fn centroid(&self) -> Option<Point> {
        let n = self.count();
        if n == 0 {
            return None;
        }
        let (sx, sy) = self.iter().fold((0.0, 0.0), |(sx, sy), i| {
            let c = self.center(i);
            (sx + c.x, sy + c.y)
        });
        Some(Point::new(sx / n as f64, sy / n as f64))
    }

    /// Axis-aligned box around the selected cells, as (min corner, max corner).
    pub fn bbox(&self) -> Option<(Point, Point)> {
        let mut it = self.iter();
        let first = it.next()?;
        let [mut lo, _, mut hi, _] = self.corners(first);
        for i in it {
            let [a, _, b, _] = self.corners(i);
            lo = Point::new(lo.x.min(a.x), lo.y.min(a.y));
            hi = Point::new(hi.x.max(b.x), hi.y.max(b.y));
        }
        Some((lo, hi))
    }

    pub fn intersection(&self, o: &GridRegion) -> GridRegion {
        self.filter(|i| o.contains_cell(i))
    }

    pub fn difference(&self, o: &GridRegion) -> GridRegion {
        self.filter(|i| !o.contains_cell(i))
    }

    pub fn is_subset(&self, o: &GridRegion) -> bool {
        self.iter().all(|i| o.contains_cell(i))
    }

    /// Selected cells as `column,row` pairs.
    pub fn cell_list(&self) -> Vec<(usize, usize)> {
        self.iter().map(|i| self.ij(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_rasterizes_fully() {
        let g = GridRegion::from_room(&Polygon::rect(0.0, 0.0, 8.0, 5.0), 0.25).unwrap();
        assert_eq!(g.count(), 32 * 20);
        assert!((g.area() - 40.0).abs() < 1e-9);
    }

    #[test]
    fn triangle_keeps_interior_centres() {
        let tri = Polygon::new(vec![Point::new(0.0, 0.0), Point::new(4.0, 0.0), Point::new(0.0, 4.0)]).unwrap();
        let g = GridRegion::from_room(&tri, 0.5).unwrap();
        assert!(g.area() >= 8.0 && g.area() < 10.0, "{}", g.area());
        assert!(!g.contains_cell(g.cell_of(Point::new(3.9, 3.9))));
    }

    #[test]
    fn boundary_points_clamp_onto_grid() {
        let g = GridRegion::from_room(&Polygon::rect(0.0, 0.0, 2.0, 1.0), 0.25).unwrap();
        assert_eq!(g.ij(g.cell_of(Point::new(2.0, 1.0))), (7, 3));
        assert_eq!(g.ij(g.cell_of(Point::new(0.0, 0.0))), (0, 0));
        assert_eq!(g.cell_dist(0, Point::new(0.1, 0.1)), 0.0);
        assert!((g.cell_dist(0, Point::new(1.25, 0.1)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sliver_columns_are_kept() {
        let g = GridRegion::from_room(&Polygon::rect(0.0, 0.0, 2.001, 1.0), 0.25).unwrap();
        assert_eq!(g.dims(), (9, 4));
        assert_eq!(g.count(), 36);
        assert!(
            overlap_area(
                &[Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)],
                Point::new(0.0, 0.0),
                Point::new(0.5, 0.5)
            ) > 0.12
        );
    }

    #[test]
    fn rejects_bad_cell_size() {
        assert!(GridRegion::from_room(&Polygon::rect(0.0, 0.0, 1.0, 1.0), 0.0).is_err());
    }
}
