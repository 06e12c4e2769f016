//! User position and activity over time, compiled from a script.

use super::geometry::{angle_diff, Point};
use super::scenario::{Action, Modality, ScriptStep, SensorPlacement};

/// What the user is doing at an instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activity {
    Still,
    Walk,
    JumpingJacks,
    HandWave { heading: f64 },
    LaptopFlash { heading: f64 },
    Speak,
    Absent,
}

impl Activity {
    pub fn is_moving(self) -> bool {
        matches!(
            self,
            Activity::Walk | Activity::JumpingJacks | Activity::HandWave { .. }
        )
    }
}

/// Distance beyond which directional stimuli have no effect, metres.
pub const STIMULUS_REACH: f64 = 3.0;

const JJ_SPEED: f64 = 2.0;
const WALK_SPEED_FACTOR: f64 = 1.2;
const WAVE_SPEED: f64 = 1.0;
const FLASH_INTENSITY: f64 = 2.0;

/// Whether a stimulus aimed along `heading` from `from` can reach `target`.
pub fn stimulus_reaches(from: Point, heading: f64, target: Point) -> bool {
    let d = from.dist(target);
    d <= STIMULUS_REACH && (d == 0.0 || angle_diff(from.bearing_to(target), heading).abs() <= 90.0)
}

/// Scene-change intensity a sensor perceives from the user at `user` doing `act`.
///
/// Zero outside the sensor's sector; otherwise activity speed scaled by
/// `1 − d/range`. Directional stimuli are blocked when the sensor sits more
/// than 90° off the stimulus heading or beyond [`STIMULUS_REACH`].
pub fn intensity(sensor: &SensorPlacement, user: Point, act: Activity) -> f64 {
    if act == Activity::Absent || !sensor.sector().contains(user) {
        return 0.0;
    }
    let falloff = (1.0 - user.dist(sensor.position) / sensor.range).max(0.0);
    let light = sensor.modality() == Modality::Camera;
    match act {
        Activity::Walk => WALK_SPEED_FACTOR * falloff,
        Activity::JumpingJacks => JJ_SPEED * falloff,
        Activity::HandWave { heading } if stimulus_reaches(user, heading, sensor.position) => WAVE_SPEED * falloff,
        Activity::LaptopFlash { heading } if light && stimulus_reaches(user, heading, sensor.position) => {
            FLASH_INTENSITY
        }
        _ => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Motion {
    Stay(Activity),
    Move { to: Point, speed: f64 },
    Pace { to: Point, speed: f64 },
}

#[derive(Debug, Clone, PartialEq)]
struct Piece {
    t0: f64,
    t1: f64,
    from: Point,
    motion: Motion,
}

impl Piece {
    fn position(&self, t: f64) -> Point {
        let tau = (t - self.t0).max(0.0);
        match &self.motion {
            Motion::Stay(_) => self.from,
            Motion::Move { to, speed } => {
                let d = self.from.dist(*to);
                if d == 0.0 {
                    return *to;
                }
                self.from.lerp(*to, (tau * speed / d).min(1.0))
            }
            Motion::Pace { to, speed } => {
                let d = self.from.dist(*to);
                if d == 0.0 {
                    return self.from;
                }
                let s = (tau * speed).rem_euclid(2.0 * d);
                let along = if s <= d { s } else { 2.0 * d - s };
                self.from.lerp(*to, along / d)
            }
        }
    }

    fn activity(&self) -> Activity {
        match &self.motion {
            Motion::Stay(a) => *a,
            Motion::Move { to, .. } | Motion::Pace { to, .. } if self.from.dist(*to) > 0.0 => Activity::Walk,
            _ => Activity::Still,
        }
    }
}

/// A spoken phrase and where it was spoken.
#[derive(Debug, Clone, PartialEq)]
pub struct Speech {
    pub phrase: String,
    pub volume: u32,
    pub start: f64,
    pub end: f64,
    pub position: Point,
}

/// Piecewise description of the user's position and activity on `[0, end)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    pieces: Vec<Piece>,
    speeches: Vec<Speech>,
    end: f64,
}

impl Timeline {
    /// Steps run from their start time until their natural end or the next step,
    /// whichever is first; the user stays still in between.
    pub fn build(start: Point, script: &[ScriptStep], end: f64) -> Self {
        let mut pieces = Vec::new();
        let mut speeches = Vec::new();
        let mut pos = start;
        let mut cursor = 0.0;
        for (i, step) in script.iter().enumerate() {
            if step.time >= end {
                break;
            }
            if step.time > cursor {
                pieces.push(Piece {
                    t0: cursor,
                    t1: step.time,
                    from: pos,
                    motion: Motion::Stay(Activity::Still),
                });
            }
            let natural = step.time + step.action.duration(pos);
            let next = script.get(i + 1).map_or(f64::INFINITY, |s| s.time);
            let t1 = natural.min(next).min(end);
            let motion = match &step.action {
                Action::MoveTo { to, speed } => Motion::Move { to: *to, speed: *speed },
                Action::Pace { to, speed, .. } => Motion::Pace { to: *to, speed: *speed },
                Action::Still { .. } => Motion::Stay(Activity::Still),
                Action::JumpingJacks { .. } => Motion::Stay(Activity::JumpingJacks),
                Action::Speak { phrase, volume, .. } => {
                    speeches.push(Speech {
                        phrase: phrase.clone(),
                        volume: *volume,
                        start: step.time,
                        end: t1,
                        position: pos,
                    });
                    Motion::Stay(Activity::Speak)
                }
                Action::LaptopFlash { heading, .. } => Motion::Stay(Activity::LaptopFlash { heading: *heading }),
                Action::HandWave { heading, .. } => Motion::Stay(Activity::HandWave { heading: *heading }),
                Action::LeaveRoom { .. } => Motion::Stay(Activity::Absent),
            };
            let piece = Piece {
                t0: step.time,
                t1,
                from: pos,
                motion,
            };
            pos = piece.position(t1);
            pieces.push(piece);
            cursor = t1;
        }
        if cursor < end {
            pieces.push(Piece {
                t0: cursor,
                t1: end,
                from: pos,
                motion: Motion::Stay(Activity::Still),
            });
        }
        Timeline { pieces, speeches, end }
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    fn piece(&self, t: f64) -> Option<&Piece> {
        let i = self.pieces.partition_point(|p| p.t1 <= t);
        self.pieces.get(i).filter(|p| p.t0 <= t)
    }

    /// Position and activity at `t` seconds. Gaps between steps are still.
    pub fn at(&self, t: f64) -> (Point, Activity) {
        match self.piece(t) {
            Some(p) => (p.position(t), p.activity()),
            None => {
                let last = self.pieces.last();
                (last.map_or(Point::default(), |p| p.position(p.t1)), Activity::Still)
            }
        }
    }

    pub fn speeches(&self) -> &[Speech] {
        &self.speeches
    }

    /// Start times of the pieces, the points where dead-reckoning error is redrawn.
    pub fn waypoint_times(&self) -> Vec<f64> {
        self.pieces.iter().map(|p| p.t0).collect()
    }

    /// `(start, end)` of every interval the user is moving.
    pub fn motion_intervals(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for p in &self.pieces {
            if !p.activity().is_moving() {
                continue;
            }
            match out.last_mut() {
                Some((_, e)) if (*e - p.t0).abs() < 1e-9 => *e = p.t1,
                _ => out.push((p.t0, p.t1)),
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::scenario::{sequential, WALK_SPEED};

    #[test]
    fn move_then_still() {
        let script = sequential(
            2.0,
            vec![
                Action::MoveTo {
                    to: Point::new(4.0, 0.0),
                    speed: WALK_SPEED,
                },
                Action::JumpingJacks { duration: 5.0 },
            ],
            Point::new(0.0, 0.0),
        );
        let tl = Timeline::build(Point::new(0.0, 0.0), &script, 20.0);
        assert_eq!(tl.at(1.0), (Point::new(0.0, 0.0), Activity::Still));
        let (p, a) = tl.at(4.0);
        assert!((p.x - 2.0).abs() < 1e-12);
        assert_eq!(a, Activity::Walk);
        assert_eq!(tl.at(7.0).1, Activity::JumpingJacks);
        assert_eq!(tl.at(12.0), (Point::new(4.0, 0.0), Activity::Still));
        assert_eq!(tl.motion_intervals(), vec![(2.0, 11.0)]);
    }

    #[test]
    fn pacing_stays_between_endpoints() {
        let script = vec![ScriptStep {
            time: 0.0,
            action: Action::Pace {
                to: Point::new(2.0, 0.0),
                duration: 30.0,
                speed: 1.0,
            },
        }];
        let tl = Timeline::build(Point::new(0.0, 0.0), &script, 30.0);
        for k in 0..300 {
            let (p, a) = tl.at(k as f64 * 0.1);
            assert!(p.x >= -1e-12 && p.x <= 2.0 + 1e-12);
            assert_eq!(a, Activity::Walk);
        }
        assert!((tl.at(3.0).0.x - 1.0).abs() < 1e-12);
    }

    #[test]
    fn intensity_falls_off_and_is_blocked_behind() {
        let cam = SensorPlacement::new(
            "02:00:00:00:00:01".parse().unwrap(),
            Modality::Camera,
            Point::new(0.0, 0.0),
            0.0,
        );
        assert!((intensity(&cam, Point::new(1.5, 0.0), Activity::JumpingJacks) - 1.0).abs() < 1e-12);
        assert_eq!(intensity(&cam, Point::new(5.0, 0.0), Activity::JumpingJacks), 0.0);
        assert_eq!(intensity(&cam, Point::new(-1.0, 0.0), Activity::JumpingJacks), 0.0);
        assert_eq!(intensity(&cam, Point::new(1.0, 0.0), Activity::Still), 0.0);
        let towards = Activity::LaptopFlash { heading: 180.0 };
        let away = Activity::LaptopFlash { heading: 0.0 };
        assert_eq!(intensity(&cam, Point::new(2.0, 0.0), towards), 2.0);
        assert_eq!(intensity(&cam, Point::new(2.0, 0.0), away), 0.0);
    }
}
