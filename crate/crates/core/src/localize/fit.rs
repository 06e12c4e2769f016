//! Most likely sensor pose given an estimated coverage region.

use std::fmt;

use super::grid::GridRegion;
use crate::sim::{angle_diff, Point, Polygon};

const HEADING_STEP: f64 = 5.0;
const FOVS: [f64; 3] = [70.0, 90.0, 120.0];
const RANGES: [f64; 4] = [2.0, 3.0, 4.0, 5.0];

/// Shape family of a fitted coverage model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitShape {
    /// Wall-mounted sector; the pose position is the apex.
    Sector { fov: f64, range: f64 },
    /// Omnidirectional blob; the pose position is the centre.
    Ellipse { semi_major: f64, semi_minor: f64 },
}

/// Fitted sensor pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Point,
    /// Sector axis or ellipse major axis, degrees.
    pub heading: f64,
    pub shape: FitShape,
    /// Cells of the fit inside the region minus cells outside it.
    pub score: i64,
}

impl fmt::Display for Pose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.shape {
            FitShape::Sector { fov, range } => write!(
                f,
                "sector,{:.3},{:.3},{:.1},{fov},{range}",
                self.position.x, self.position.y, self.heading
            ),
            FitShape::Ellipse { semi_major, semi_minor } => write!(
                f,
                "ellipse,{:.3},{:.3},{:.1},{semi_major:.3},{semi_minor:.3}",
                self.position.x, self.position.y, self.heading
            ),
        }
    }
}

fn apex_candidates(room: &Polygon, step: f64) -> Vec<Point> {
    let mut out = Vec::new();
    for (a, b) in room.edges() {
        let n = (a.dist(b) / step).ceil().max(1.0) as usize;
        for k in 0..n {
            out.push(a.lerp(b, k as f64 / n as f64));
        }
    }
    out
}

fn better(score: i64, fov: f64, range: f64, b: &Pose) -> bool {
    let FitShape::Sector { fov: bf, range: br } = b.shape else {
        return true;
    };
    score > b.score || (score == b.score && (fov < bf || (fov == bf && range < br)))
}

/// Best sector with its apex on the room boundary; equal scores favour the
/// narrower, then shorter, sector.
pub fn fit_sector(included: &GridRegion, room: &Polygon) -> Option<Pose> {
    if included.is_empty() {
        return None;
    }
    let all = GridRegion::from_room(room, included.cell_size()).ok()?;
    let cells: Vec<(Point, bool)> = all.iter().map(|i| (all.center(i), included.contains_cell(i))).collect();
    let inc: Vec<Point> = included.iter().map(|i| included.center(i)).collect();
    let rmax = RANGES[RANGES.len() - 1];
    let mut best: Option<Pose> = None;
    let mut near = Vec::new();
    let mut diffs = Vec::new();
    for apex in apex_candidates(room, included.cell_size()) {
        if !inc.iter().any(|c| c.dist(apex) <= rmax) {
            continue;
        }
        near.clear();
        near.extend(cells.iter().filter(|(c, _)| c.dist(apex) <= rmax).map(|&(c, m)| {
            (
                c.dist(apex),
                if c.dist(apex) == 0.0 { 0.0 } else { apex.bearing_to(c) },
                m,
            )
        }));
        for k in 0..(360.0 / HEADING_STEP) as usize {
            let heading = k as f64 * HEADING_STEP;
            if !room.contains(apex.step(heading, 0.05)) {
                continue;
            }
            diffs.clear();
            diffs.extend(
                near.iter()
                    .map(|&(d, b, m)| (d, if d == 0.0 { 0.0 } else { angle_diff(b, heading).abs() }, m)),
            );
            for &fov in &FOVS {
                for &range in &RANGES {
                    let mut score = 0i64;
                    for &(d, a, m) in &diffs {
                        if d <= range && a <= fov / 2.0 {
                            score += if m { 1 } else { -1 };
                        }
                    }
                    if best.is_none_or(|b| better(score, fov, range, &b)) {
                        best = Some(Pose {
                            position: apex,
                            heading,
                            shape: FitShape::Sector { fov, range },
                            score,
                        });
                    }
                }
            }
        }
    }
    best
}

/// Two-sigma covariance ellipse of the region's cell centres.
pub fn fit_ellipse(included: &GridRegion, room: &Polygon) -> Option<Pose> {
    let c = included.centroid()?;
    let n = included.count() as f64;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for i in included.iter() {
        let p = included.center(i);
        sxx += (p.x - c.x).powi(2);
        syy += (p.y - c.y).powi(2);
        sxy += (p.x - c.x) * (p.y - c.y);
    }
    let (sxx, syy, sxy) = (sxx / n, syy / n, sxy / n);
    let tr = sxx + syy;
    let disc = ((sxx - syy).powi(2) / 4.0 + sxy * sxy).sqrt();
    let l1 = tr / 2.0 + disc;
    let l2 = (tr / 2.0 - disc).max(0.0);
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let floor = included.cell_size() / 2.0;
    let a = (2.0 * l1.sqrt()).max(floor);
    let b = (2.0 * l2.sqrt()).max(floor);
    let (ct, st) = (theta.cos(), theta.sin());
    let all = GridRegion::from_room(room, included.cell_size()).ok()?;
    let mut score = 0i64;
    for i in all.iter() {
        let p = all.center(i);
        let (dx, dy) = (p.x - c.x, p.y - c.y);
        let u = dx * ct + dy * st;
        let v = -dx * st + dy * ct;
        if (u / a).powi(2) + (v / b).powi(2) <= 1.0 + 1e-9 {
            score += if included.contains_cell(i) { 1 } else { -1 };
        }
    }
    Some(Pose {
        position: c,
        heading: crate::sim::geometry::normalize_heading(theta.to_degrees()),
        shape: FitShape::Ellipse {
            semi_major: a,
            semi_minor: b,
        },
        score,
    })
}

/// Better of the sector and ellipse fits; ties favour the sector.
pub fn most_likely_location(included: &GridRegion, room: &Polygon) -> Option<Pose> {
    match (fit_sector(included, room), fit_ellipse(included, room)) {
        (Some(s), Some(e)) => Some(if e.score > s.score { e } else { s }),
        (s, e) => s.or(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Sector;

    fn room() -> Polygon {
        Polygon::rect(0.0, 0.0, 8.0, 5.0)
    }

    #[test]
    fn wedge_fits_a_sector_at_its_apex() {
        let r = room();
        let all = GridRegion::from_room(&r, 0.25).unwrap();
        let s = Sector {
            apex: Point::new(0.0, 0.0),
            heading: 45.0,
            fov: 90.0,
            range: 4.0,
        };
        let inc = all.filter(|i| s.contains(all.center(i)));
        let p = most_likely_location(&inc, &r).unwrap();
        assert!(matches!(p.shape, FitShape::Sector { .. }), "{p}");
        assert!(p.position.dist(Point::new(0.0, 0.0)) < 0.3);
        assert!(angle_diff(p.heading, 45.0).abs() <= 10.0, "{p}");
    }

    #[test]
    fn disk_fits_an_ellipse_at_its_centre() {
        let r = room();
        let all = GridRegion::from_room(&r, 0.25).unwrap();
        let c = Point::new(4.0, 2.5);
        let inc = all.filter(|i| all.center(i).dist(c) <= 1.5);
        let p = most_likely_location(&inc, &r).unwrap();
        assert!(matches!(p.shape, FitShape::Ellipse { .. }));
        assert!(p.position.dist(c) <= 0.25);
    }

    #[test]
    fn empty_region_has_no_fit() {
        let r = room();
        let all = GridRegion::from_room(&r, 0.25).unwrap();
        assert!(most_likely_location(&all.empty_like(), &r).is_none());
    }
}
