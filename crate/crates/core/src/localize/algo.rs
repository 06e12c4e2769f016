//! Coverage mapping, trial planning and region elimination.

use std::collections::BTreeSet;

use super::fit::{most_likely_location, Pose};
use super::grid::{GridRegion, DEFAULT_CELL_M};
use super::world::{trial_stimulus, ProbeWorld, TrialSpec, TRIAL_DURATION_S};
use crate::error::{Error, Result};
use crate::sim::{angle_diff, Modality, Point, Polygon, STIMULUS_REACH};

/// Radius around a positive probe counted as covered, metres.
pub const COVERAGE_RADIUS_M: f64 = 0.5;
/// Sparse-coverage threshold: fewer positives than one per this many square metres.
pub const DENSITY_M2_PER_POSITIVE: f64 = 4.0;
const DENSIFY_ROUNDS: usize = 2;
const DENSIFY_NEIGHBOUR_M: f64 = 2.25;
const HEADINGS: usize = 72;
const EPS: f64 = 1e-9;

/// Farthest a sensor of the modality can perceive an S5 perturbation, metres.
pub fn modality_reach(m: Modality) -> f64 {
    match m {
        Modality::Camera => 5.0,
        Modality::Rf => 4.0,
        Modality::Motion => 4.6,
        Modality::Audio => 8.0,
    }
}

/// Coverage evidence gathered by walking the room.
#[derive(Debug, Clone, PartialEq)]
pub struct BBoxState {
    /// Every cell of the room.
    pub room_grid: GridRegion,
    /// Cells believed to be inside the sensor's coverage.
    pub included: GridRegion,
    pub positives: Vec<Point>,
    pub negatives: Vec<Point>,
    pub trials_run: usize,
    pub mle: Option<Pose>,
}

impl BBoxState {
    fn covered(grid: &GridRegion, positives: &[Point]) -> GridRegion {
        grid.filter(|i| {
            let c = grid.center(i);
            positives.iter().any(|p| c.dist(*p) <= COVERAGE_RADIUS_M)
        })
    }

    /// Positive probes per square metre of the included region's bounding box.
    pub fn density(&self) -> f64 {
        match self.included.bbox() {
            Some((lo, hi)) => self.positives.len() as f64 / ((hi.x - lo.x) * (hi.y - lo.y)),
            None => 0.0,
        }
    }
}

/// Probes each traversal point with an S5 perturbation and rasterizes the positives.
///
/// When positives are sparse relative to the extent they span, midpoints
/// between a positive and its probed neighbours are probed as well.
pub fn map_coverage<W: ProbeWorld>(world: &mut W, probes: &[Point], cell: f64) -> Result<BBoxState> {
    let room = world.room().clone();
    let grid = GridRegion::from_room(&room, cell)?;
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    let mut probed: Vec<Point> = Vec::new();
    let probe = |world: &mut W, p: Point, positives: &mut Vec<Point>, negatives: &mut Vec<Point>| -> Result<()> {
        if world.probe(p)? {
            positives.push(p);
        } else {
            negatives.push(p);
        }
        Ok(())
    };
    for &p in probes {
        if !room.contains(p) {
            return Err(Error::Scenario(format!("probe point {p} lies outside the room")));
        }
        probe(world, p, &mut positives, &mut negatives)?;
        probed.push(p);
    }
    for _ in 0..DENSIFY_ROUNDS {
        let included = BBoxState::covered(&grid, &positives);
        let state_density = match included.bbox() {
            Some((lo, hi)) => positives.len() as f64 / ((hi.x - lo.x) * (hi.y - lo.y)),
            None => break,
        };
        if state_density >= 1.0 / DENSITY_M2_PER_POSITIVE {
            break;
        }
        let mut extra = Vec::new();
        for &p in &positives {
            for &q in &probed {
                let d = p.dist(q);
                if d == 0.0 || d > DENSIFY_NEIGHBOUR_M {
                    continue;
                }
                let m = p.lerp(q, 0.5);
                if room.contains(m) && !probed.iter().chain(&extra).any(|o: &Point| o.dist(m) < 0.1) {
                    extra.push(m);
                }
            }
        }
        if extra.is_empty() {
            break;
        }
        for m in extra {
            probe(world, m, &mut positives, &mut negatives)?;
            probed.push(m);
        }
    }
    if positives.is_empty() {
        return Err(Error::NotLocalizable("no traversal point produced a detection".into()));
    }
    let included = BBoxState::covered(&grid, &positives);
    let mle = most_likely_location(&included, &room);
    Ok(BBoxState {
        room_grid: grid,
        included,
        positives,
        negatives,
        trials_run: 0,
        mle,
    })
}

/// Position of a cell relative to the region a directional stimulus reaches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visibility {
    /// The whole cell is reached.
    Inside,
    /// No part of the cell is reached.
    Outside,
    /// The cell straddles the reach boundary.
    Partial,
}

/// Classifies a cell against the half-disk reached from `from` along `heading`.
pub fn visibility(grid: &GridRegion, i: usize, from: Point, heading: f64) -> Visibility {
    let tip = from.step(heading, 1.0);
    let (ux, uy) = (tip.x - from.x, tip.y - from.y);
    let corners = grid.corners(i);
    let dots = corners.map(|c| (c.x - from.x) * ux + (c.y - from.y) * uy);
    if dots.iter().all(|&d| d <= EPS) || grid.cell_dist(i, from) > STIMULUS_REACH + EPS {
        Visibility::Outside
    } else if dots.iter().all(|&d| d >= -EPS) && corners.iter().all(|c| c.dist(from) <= STIMULUS_REACH + EPS) {
        Visibility::Inside
    } else {
        Visibility::Partial
    }
}

/// Cells of `c` fully and not at all reached by a trial.
pub fn partition(c: &GridRegion, from: Point, heading: f64) -> (usize, usize) {
    let mut inside = 0;
    let mut outside = 0;
    for i in c.iter() {
        match visibility(c, i, from, heading) {
            Visibility::Inside => inside += 1,
            Visibility::Outside => outside += 1,
            Visibility::Partial => {}
        }
    }
    (inside, outside)
}

/// Applies a trial outcome to the candidate set.
///
/// A detection rules out cells the stimulus cannot reach; a miss rules out
/// cells it certainly reaches. Straddling cells are kept either way.
pub fn apply_outcome(c: &GridRegion, from: Point, heading: f64, outcome: bool) -> GridRegion {
    c.filter(|i| {
        let v = visibility(c, i, from, heading);
        if outcome {
            v != Visibility::Outside
        } else {
            v != Visibility::Inside
        }
    })
}

/// Trial placed from the region's centroid, aimed at the most likely location.
///
/// The position slides along the centroid-to-estimate axis until the trial
/// splits the region. `None` when the region has one cell or no split exists.
pub fn generate_trial(mle: &Pose, included: &GridRegion, room: &Polygon) -> Option<(Point, f64)> {
    if included.count() <= 1 {
        return None;
    }
    let c = included.centroid()?;
    let heading = if c.dist(mle.position) > EPS {
        c.bearing_to(mle.position)
    } else {
        mle.heading
    };
    let (lo, hi) = room.bbox();
    let diag = lo.dist(hi);
    let step = included.cell_size() / 2.0;
    let n = (diag / step).ceil() as i64;
    for k in 0..=n {
        for s in [k, -k] {
            let p = c.step(heading, s as f64 * step);
            if !room.contains(p) {
                continue;
            }
            let (f, o) = partition(included, p, heading);
            if f > 0 && o > 0 {
                return Some((p, heading));
            }
            if k == 0 {
                break;
            }
        }
    }
    None
}

/// Settings for trial-based elimination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizeConfig {
    /// Stop once the candidate area is at most this fraction of the room.
    pub threshold: f64,
    /// Added to the modality reach when seeding candidates, metres.
    pub margin: f64,
    pub max_trials: Option<usize>,
    pub trial_duration_s: f64,
    pub cell: f64,
}

impl Default for LocalizeConfig {
    fn default() -> Self {
        LocalizeConfig {
            threshold: 0.10,
            margin: 0.5,
            max_trials: None,
            trial_duration_s: TRIAL_DURATION_S,
            cell: DEFAULT_CELL_M,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalizeStatus {
    /// Candidate area fell under the threshold or to a single cell.
    Converged,
    /// No available trial splits the remaining candidates.
    Stalled,
    /// The trial budget ran out.
    Exhausted,
}

impl LocalizeStatus {
    pub fn name(self) -> &'static str {
        match self {
            LocalizeStatus::Converged => "converged",
            LocalizeStatus::Stalled => "stalled",
            LocalizeStatus::Exhausted => "exhausted",
        }
    }
}

/// One performed trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    pub spec: TrialSpec,
    pub outcome: bool,
    /// Candidate area after the update, square metres.
    pub area_after: f64,
    /// The outcome contradicted every remaining candidate and was discarded.
    pub rolled_back: bool,
}

/// Result of localizing one sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Localization {
    pub room_area: f64,
    pub initial: GridRegion,
    pub candidates: GridRegion,
    pub mle: Option<Pose>,
    pub trials: Vec<TrialRecord>,
    pub status: LocalizeStatus,
    /// Some outcome was inconsistent with all candidates.
    pub inconsistent: bool,
}

impl Localization {
    pub fn initial_area(&self) -> f64 {
        self.initial.area()
    }

    pub fn final_area(&self) -> f64 {
        self.candidates.area()
    }
}

/// Candidate sensor cells: every cell within reach of all positive probes.
pub fn initial_candidates(state: &BBoxState, reach: f64) -> GridRegion {
    let g = &state.room_grid;
    g.filter(|i| state.positives.iter().all(|&p| g.cell_dist(i, p) <= reach))
}

fn converged(c: &GridRegion, room_area: f64, threshold: f64) -> bool {
    c.count() <= 1 || c.area() <= threshold * room_area
}

/// Narrows the sensor position with directional trials performed at
/// positions already known to be inside its coverage.
pub fn localize<W: ProbeWorld>(world: &mut W, state: &mut BBoxState, cfg: &LocalizeConfig) -> Result<Localization> {
    if state.positives.is_empty() {
        return Err(Error::NotLocalizable("no positive probes".into()));
    }
    let modality = world.modality();
    if modality == Modality::Audio {
        return Err(Error::NotLocalizable(
            "audio sensors are localized by volume descent".into(),
        ));
    }
    let stimulus = trial_stimulus(modality);
    let room_area = state.room_grid.area();
    let initial = initial_candidates(state, modality_reach(modality) + cfg.margin);
    let mut c = initial.clone();
    let budget = cfg
        .max_trials
        .unwrap_or(usize::MAX)
        .min(initial.count().saturating_sub(1));
    let mut anchors: Vec<Point> = state.positives.clone();
    let mut used: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut trials = Vec::new();
    let mut inconsistent = false;
    let status = loop {
        if converged(&c, room_area, cfg.threshold) {
            break LocalizeStatus::Converged;
        }
        if trials.len() >= budget {
            break LocalizeStatus::Exhausted;
        }
        let centroid = c.centroid().unwrap_or(anchors[0]);
        let mut best: Option<(usize, f64, f64, usize, usize)> = None;
        for (ai, &a) in anchors.iter().enumerate() {
            let toward = state.mle.map(|m| a.bearing_to(m.position));
            for k in 0..HEADINGS {
                if used.contains(&(ai, k)) {
                    continue;
                }
                let h = k as f64 * 360.0 / HEADINGS as f64;
                let (f, o) = partition(&c, a, h);
                let split = f.min(o);
                if split == 0 {
                    continue;
                }
                let ang = toward.map_or(0.0, |t| angle_diff(h, t).abs());
                let d = a.dist(centroid);
                let better = match best {
                    None => true,
                    Some((s, ba, bd, _, _)) => {
                        split > s || (split == s && (ang < ba - EPS || ((ang - ba).abs() <= EPS && d < bd - EPS)))
                    }
                };
                if better {
                    best = Some((split, ang, d, ai, k));
                }
            }
        }
        let Some((_, _, _, ai, k)) = best else {
            break LocalizeStatus::Stalled;
        };
        used.insert((ai, k));
        let spec = TrialSpec {
            position: anchors[ai],
            heading: k as f64 * 360.0 / HEADINGS as f64,
            stimulus,
            duration_s: cfg.trial_duration_s,
        };
        let outcome = world.trial(&spec)?;
        let next = apply_outcome(&c, spec.position, spec.heading, outcome);
        let rolled_back = next.is_empty();
        if rolled_back {
            inconsistent = true;
        } else {
            c = next;
        }
        state.trials_run += 1;
        trials.push(TrialRecord {
            spec,
            outcome,
            area_after: c.area(),
            rolled_back,
        });
        if outcome && !anchors.iter().any(|p| p.dist(spec.position) < EPS) {
            anchors.push(spec.position);
        }
    };
    Ok(Localization {
        room_area,
        initial,
        candidates: c,
        mle: state.mle,
        trials,
        status,
        inconsistent,
    })
}

/// Result of locating an assistant by lowering playback volume.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioLocalization {
    pub room_area: f64,
    pub region: GridRegion,
    /// Volume level and region area after each pass.
    pub passes: Vec<(u32, f64)>,
}

/// Plays the wake phrase at every candidate cell, keeping responders, from
/// the loudest level down.
///
/// Stops early once the region is under `threshold` of the room. A level at
/// which nothing responds leaves the region unchanged.
pub fn audio_localize<W: ProbeWorld>(
    world: &mut W,
    levels: &[u32],
    cell: f64,
    threshold: f64,
) -> Result<AudioLocalization> {
    let room = world.room().clone();
    let grid = GridRegion::from_room(&room, cell)?;
    let room_area = grid.area();
    let mut levels = levels.to_vec();
    levels.sort_unstable_by(|a, b| b.cmp(a));
    let mut region = grid.clone();
    let mut passes = Vec::new();
    for (n, &level) in levels.iter().enumerate() {
        let mut next = region.empty_like();
        for i in region.iter() {
            if world.playback(region.center(i), level)? {
                next.insert(i);
            }
        }
        if next.is_empty() {
            if n == 0 {
                return Err(Error::NotLocalizable("the assistant never responded".into()));
            }
        } else {
            region = next;
        }
        passes.push((level, region.area()));
        if region.area() <= threshold * room_area {
            break;
        }
    }
    Ok(AudioLocalization {
        room_area,
        region,
        passes,
    })
}
