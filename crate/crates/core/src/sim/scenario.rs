//! Scenario description: room, sensors, devices, user script, countermeasures.

use std::collections::BTreeSet;

use super::geometry::{Point, Polygon, Sector};
use crate::error::{Error, Result};
use crate::trace::Mac;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Modality {
    Camera,
    Rf,
    Motion,
    Audio,
}

impl Modality {
    pub fn name(self) -> &'static str {
        match self {
            Modality::Camera => "camera",
            Modality::Rf => "rf",
            Modality::Motion => "motion",
            Modality::Audio => "audio",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "camera" => Modality::Camera,
            "rf" => Modality::Rf,
            "motion" => Modality::Motion,
            "audio" => Modality::Audio,
            _ => return None,
        })
    }

    pub fn default_fov(self) -> f64 {
        match self {
            Modality::Camera => 90.0,
            Modality::Rf => 120.0,
            Modality::Motion => 100.0,
            Modality::Audio => 360.0,
        }
    }

    pub fn default_range(self) -> f64 {
        match self {
            Modality::Camera => 3.0,
            Modality::Rf => 4.0,
            Modality::Motion => 4.6,
            Modality::Audio => 8.0,
        }
    }
}

/// Variable-bit-rate video uplink.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraParams {
    /// Static-scene bit rate, bytes per second.
    pub base_rate: f64,
    pub keyframe_period_s: f64,
    /// Extra bytes per second per unit of scene-change intensity.
    pub motion_gain: f64,
    pub fps: f64,
    /// Encoder and uplink delay, seconds.
    pub latency_s: f64,
    /// Relative standard deviation of frame sizes.
    pub noise: f64,
}

impl Default for CameraParams {
    fn default() -> Self {
        CameraParams {
            base_rate: 30_000.0,
            keyframe_period_s: 2.0,
            motion_gain: 30_000.0,
            fps: 20.0,
            latency_s: 0.3,
            noise: 0.08,
        }
    }
}

/// Radar point-cloud uplink.
#[derive(Debug, Clone, PartialEq)]
pub struct RfParams {
    pub frame_hz: f64,
    /// Points reported from static clutter.
    pub clutter_points: f64,
    /// Extra points per unit of motion intensity.
    pub gain_points: f64,
    pub point_noise: f64,
    pub bytes_per_point: u32,
    pub header_bytes: u32,
    pub latency_s: f64,
}

impl Default for RfParams {
    fn default() -> Self {
        RfParams {
            frame_hz: 10.0,
            clutter_points: 20.0,
            gain_points: 120.0,
            point_noise: 3.0,
            bytes_per_point: 12,
            header_bytes: 64,
            latency_s: 0.2,
        }
    }
}

/// Inferred-event motion sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionParams {
    /// Minimum spacing between event uploads, seconds.
    pub timeout_s: f64,
    pub latency_s: f64,
    pub event_bytes: u32,
    /// Cloud status uploads unrelated to motion, seconds since start.
    pub status_times_s: Vec<f64>,
}

impl Default for MotionParams {
    fn default() -> Self {
        MotionParams {
            timeout_s: 60.0,
            latency_s: 0.4,
            event_bytes: 6_000,
            status_times_s: Vec::new(),
        }
    }
}

/// Voice assistant with wake-phrase gating.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioParams {
    pub wake_phrase: String,
    /// Hearing radius at volume level `k` is `radii[k − 1]`, metres.
    pub radii: Vec<f64>,
    /// Live-listening sessions as `(start_s, duration_s)`.
    pub drop_ins: Vec<(f64, f64)>,
    pub keepalive_period_s: f64,
}

impl Default for AudioParams {
    fn default() -> Self {
        AudioParams {
            wake_phrase: "hey assistant".into(),
            radii: vec![2.0, 4.0, 8.0],
            drop_ins: Vec::new(),
            keepalive_period_s: 15.0,
        }
    }
}

impl AudioParams {
    /// Hearing radius at a volume level; level 0 is silence.
    pub fn radius(&self, level: u32) -> f64 {
        match level {
            0 => 0.0,
            k => self
                .radii
                .get(k as usize - 1)
                .or(self.radii.last())
                .copied()
                .unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModalityParams {
    Camera(CameraParams),
    Rf(RfParams),
    Motion(MotionParams),
    Audio(AudioParams),
}

impl ModalityParams {
    pub fn default_for(m: Modality) -> Self {
        match m {
            Modality::Camera => ModalityParams::Camera(Default::default()),
            Modality::Rf => ModalityParams::Rf(Default::default()),
            Modality::Motion => ModalityParams::Motion(Default::default()),
            Modality::Audio => ModalityParams::Audio(Default::default()),
        }
    }

    pub fn modality(&self) -> Modality {
        match self {
            ModalityParams::Camera(_) => Modality::Camera,
            ModalityParams::Rf(_) => Modality::Rf,
            ModalityParams::Motion(_) => Modality::Motion,
            ModalityParams::Audio(_) => Modality::Audio,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorPlacement {
    pub mac: Mac,
    pub position: Point,
    /// Degrees counter-clockwise from +x.
    pub heading: f64,
    pub fov: f64,
    pub range: f64,
    pub channel: u8,
    pub params: ModalityParams,
}

impl SensorPlacement {
    pub fn new(mac: Mac, modality: Modality, position: Point, heading: f64) -> Self {
        SensorPlacement {
            mac,
            position,
            heading,
            fov: modality.default_fov(),
            range: modality.default_range(),
            channel: 6,
            params: ModalityParams::default_for(modality),
        }
    }

    pub fn modality(&self) -> Modality {
        self.params.modality()
    }

    pub fn sector(&self) -> Sector {
        Sector {
            apex: self.position,
            heading: self.heading,
            fov: self.fov,
            range: self.range,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fov > 0.0 && self.fov <= 360.0) {
            return Err(Error::Scenario(format!(
                "{}: fov {} outside (0, 360]",
                self.mac, self.fov
            )));
        }
        if !(self.range > 0.0 && self.range.is_finite()) {
            return Err(Error::Scenario(format!("{}: range must be positive", self.mac)));
        }
        if self.modality() == Modality::Audio && self.fov != 360.0 {
            return Err(Error::Scenario(format!(
                "{}: audio sensors are omnidirectional",
                self.mac
            )));
        }
        match &self.params {
            ModalityParams::Camera(c) if c.base_rate <= 0.0 || c.fps <= 0.0 || c.keyframe_period_s <= 0.0 => {
                Err(Error::Scenario(format!("{}: camera rates must be positive", self.mac)))
            }
            ModalityParams::Motion(m) if m.timeout_s <= 0.0 => {
                Err(Error::Scenario(format!("{}: timeout must be positive", self.mac)))
            }
            ModalityParams::Audio(a) if a.radii.is_empty() || a.radii.iter().any(|r| *r <= 0.0) => {
                Err(Error::Scenario(format!("{}: audio radii must be positive", self.mac)))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeviceKind {
    Phone,
    Laptop,
    Router,
    SmartLight,
}

impl DeviceKind {
    pub fn name(self) -> &'static str {
        match self {
            DeviceKind::Phone => "phone",
            DeviceKind::Laptop => "laptop",
            DeviceKind::Router => "router",
            DeviceKind::SmartLight => "smart-light",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "phone" => DeviceKind::Phone,
            "laptop" => DeviceKind::Laptop,
            "router" => DeviceKind::Router,
            "smart-light" => DeviceKind::SmartLight,
            _ => return None,
        })
    }
}

/// A device whose traffic is unrelated to anything in the room.
#[derive(Debug, Clone, PartialEq)]
pub struct InnocuousDevice {
    pub mac: Mac,
    pub kind: DeviceKind,
    /// Multiplier on the kind's default traffic rate.
    pub rate_scale: f64,
    pub channel: u8,
}

impl InnocuousDevice {
    pub fn new(mac: Mac, kind: DeviceKind) -> Self {
        InnocuousDevice {
            mac,
            kind,
            rate_scale: 1.0,
            channel: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    /// Walk in a straight line at `speed` m/s.
    MoveTo {
        to: Point,
        speed: f64,
    },
    /// Walk back and forth between the current position and `to`.
    Pace {
        to: Point,
        duration: f64,
        speed: f64,
    },
    Still {
        duration: f64,
    },
    JumpingJacks {
        duration: f64,
    },
    Speak {
        phrase: String,
        volume: u32,
        duration: f64,
    },
    LaptopFlash {
        heading: f64,
        duration: f64,
    },
    HandWave {
        heading: f64,
        duration: f64,
    },
    LeaveRoom {
        duration: f64,
    },
}

pub const WALK_SPEED: f64 = 1.0;

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Action::MoveTo { .. } => "move-to",
            Action::Pace { .. } => "pace",
            Action::Still { .. } => "still",
            Action::JumpingJacks { .. } => "jumping-jacks",
            Action::Speak { .. } => "speak",
            Action::LaptopFlash { .. } => "laptop-flash",
            Action::HandWave { .. } => "hand-wave",
            Action::LeaveRoom { .. } => "leave-room",
        }
    }

    /// Natural duration when started at `from`.
    pub fn duration(&self, from: Point) -> f64 {
        match self {
            Action::MoveTo { to, speed } => from.dist(*to) / speed,
            Action::Pace { duration, .. }
            | Action::Still { duration }
            | Action::JumpingJacks { duration }
            | Action::Speak { duration, .. }
            | Action::LaptopFlash { duration, .. }
            | Action::HandWave { duration, .. }
            | Action::LeaveRoom { duration } => *duration,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptStep {
    /// Start time, seconds.
    pub time: f64,
    pub action: Action,
}

/// Script steps laid end to end from `start` seconds.
pub fn sequential(start: f64, actions: Vec<Action>, from: Point) -> Vec<ScriptStep> {
    let mut t = start;
    let mut pos = from;
    let mut out = Vec::with_capacity(actions.len());
    for a in actions {
        let d = a.duration(pos);
        if let Action::MoveTo { to, .. } = &a {
            pos = *to;
        }
        out.push(ScriptStep { time: t, action: a });
        t += d;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum Countermeasure {
    /// Fill every window up to `target_bytes`, or to the largest window when unset.
    Padding {
        target_bytes: Option<u64>,
    },
    /// Random decoy bursts.
    Noise {
        rate_hz: f64,
        min_bytes: u32,
        max_bytes: u32,
    },
    /// Payload rescaling that switches level every few seconds.
    Resolution {
        min_interval_s: f64,
        max_interval_s: f64,
        levels: Vec<f64>,
    },
    TapeDelay {
        delay_s: f64,
    },
}

impl Countermeasure {
    pub fn kind(&self) -> &'static str {
        match self {
            Countermeasure::Padding { .. } => "padding",
            Countermeasure::Noise { .. } => "noise",
            Countermeasure::Resolution { .. } => "resolution",
            Countermeasure::TapeDelay { .. } => "tape-delay",
        }
    }

    /// Default parameters for a named kind.
    pub fn default_for(kind: &str) -> Result<Self> {
        Ok(match kind {
            "padding" => Countermeasure::Padding { target_bytes: None },
            "noise" => Countermeasure::Noise {
                rate_hz: 0.125,
                min_bytes: 3_000,
                max_bytes: 20_000,
            },
            "resolution" => Countermeasure::Resolution {
                min_interval_s: 5.0,
                max_interval_s: 15.0,
                levels: vec![0.5, 0.75, 1.0, 1.5, 2.0],
            },
            "tape-delay" => Countermeasure::TapeDelay { delay_s: 30.0 },
            other => return Err(Error::UnknownCountermeasure(other.to_string())),
        })
    }

    fn validate(&self) -> Result<()> {
        let bad = match self {
            Countermeasure::Padding { .. } => false,
            Countermeasure::Noise {
                rate_hz,
                min_bytes,
                max_bytes,
            } => *rate_hz <= 0.0 || min_bytes > max_bytes,
            Countermeasure::Resolution {
                min_interval_s,
                max_interval_s,
                levels,
            } => {
                *min_interval_s <= 0.0
                    || max_interval_s < min_interval_s
                    || levels.is_empty()
                    || levels.iter().any(|l| *l <= 0.0)
            }
            Countermeasure::TapeDelay { delay_s } => *delay_s < 0.0,
        };
        if bad {
            return Err(Error::Scenario(format!("invalid {} parameters", self.kind())));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountermeasureSpec {
    pub mac: Mac,
    pub countermeasure: Countermeasure,
}

/// A neighbouring room with its own sensors and occupant.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacentRoom {
    pub room: Polygon,
    pub sensors: Vec<SensorPlacement>,
    pub start: Point,
    pub script: Vec<ScriptStep>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub seed: u64,
    pub duration_s: f64,
    pub room: Polygon,
    pub sensors: Vec<SensorPlacement>,
    pub devices: Vec<InnocuousDevice>,
    pub user_start: Point,
    /// Standard deviation of the dead-reckoned position per waypoint, metres.
    pub dead_reckoning_sigma: f64,
    pub script: Vec<ScriptStep>,
    pub countermeasures: Vec<CountermeasureSpec>,
    pub adjacent_rooms: Vec<AdjacentRoom>,
    /// Traversal points for coverage mapping during localization.
    pub probes: Vec<Point>,
}

pub const DEFAULT_DEAD_RECKONING_SIGMA: f64 = 0.15;

/// End time of a script started at `start`.
pub fn script_end(script: &[ScriptStep], start: Point) -> f64 {
    let mut pos = start;
    let mut end: f64 = 0.0;
    for s in script {
        end = end.max(s.time + s.action.duration(pos));
        if let Action::MoveTo { to, .. } = &s.action {
            pos = *to;
        }
    }
    end
}

impl Scenario {
    /// Empty scenario in `room` with the user standing at `start`.
    pub fn new(seed: u64, room: Polygon, start: Point) -> Self {
        Scenario {
            seed,
            duration_s: 0.0,
            room,
            sensors: Vec::new(),
            devices: Vec::new(),
            user_start: start,
            dead_reckoning_sigma: DEFAULT_DEAD_RECKONING_SIGMA,
            script: Vec::new(),
            countermeasures: Vec::new(),
            adjacent_rooms: Vec::new(),
            probes: Vec::new(),
        }
    }

    /// Sets the duration to the end of the script when it was left at zero.
    pub fn with_script(mut self, script: Vec<ScriptStep>) -> Self {
        self.script = script;
        if self.duration_s <= 0.0 {
            self.duration_s = script_end(&self.script, self.user_start).ceil().max(1.0);
        }
        self
    }

    pub fn sensor(&self, mac: Mac) -> Option<&SensorPlacement> {
        self.sensors
            .iter()
            .chain(self.adjacent_rooms.iter().flat_map(|r| r.sensors.iter()))
            .find(|s| s.mac == mac)
    }

    pub fn all_macs(&self) -> Vec<Mac> {
        self.sensors
            .iter()
            .map(|s| s.mac)
            .chain(self.devices.iter().map(|d| d.mac))
            .chain(self.adjacent_rooms.iter().flat_map(|r| r.sensors.iter().map(|s| s.mac)))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(Error::Scenario("duration must be positive".into()));
        }
        if self.dead_reckoning_sigma < 0.0 {
            return Err(Error::Scenario("dead-reckoning sigma must be non-negative".into()));
        }
        let mut seen = BTreeSet::new();
        for m in self.all_macs() {
            if !seen.insert(m) {
                return Err(Error::Scenario(format!("duplicate MAC {m}")));
            }
        }
        for s in &self.sensors {
            s.validate()?;
            if !self.room.contains(s.position) {
                return Err(Error::Scenario(format!("sensor {} outside the room", s.mac)));
            }
        }
        validate_script(&self.room, self.user_start, &self.script)?;
        for r in &self.adjacent_rooms {
            for s in &r.sensors {
                s.validate()?;
                if !r.room.contains(s.position) {
                    return Err(Error::Scenario(format!("sensor {} outside its room", s.mac)));
                }
            }
            validate_script(&r.room, r.start, &r.script)?;
        }
        for c in &self.countermeasures {
            c.countermeasure.validate()?;
            if !seen.contains(&c.mac) {
                return Err(Error::Scenario(format!(
                    "countermeasure targets unknown device {}",
                    c.mac
                )));
            }
        }
        Ok(())
    }
}

/// Checks step ordering, durations and that all motion stays inside `room`.
pub fn validate_script(room: &Polygon, start: Point, script: &[ScriptStep]) -> Result<()> {
    check_script(room, start, script).map_err(|(i, msg)| match i {
        Some(i) => Error::Scenario(format!("step {i}: {msg}")),
        None => Error::Scenario(msg),
    })
}

/// Like [`validate_script`] but reports the offending step index separately.
pub(crate) fn check_script(
    room: &Polygon,
    start: Point,
    script: &[ScriptStep],
) -> std::result::Result<(), (Option<usize>, String)> {
    if !room.contains(start) {
        return Err((None, format!("start position {start} outside the room")));
    }
    let mut pos = start;
    let mut prev = f64::NEG_INFINITY;
    for (i, s) in script.iter().enumerate() {
        let fail = |msg: String| Err((Some(i), msg));
        if !(s.time >= 0.0 && s.time.is_finite()) {
            return fail("time must be non-negative".into());
        }
        if s.time <= prev {
            return fail("times must be strictly increasing".into());
        }
        prev = s.time;
        match &s.action {
            Action::MoveTo { to, speed } | Action::Pace { to, speed, .. } => {
                if !(*speed > 0.0) {
                    return fail("speed must be positive".into());
                }
                if !room.contains_segment(pos, *to) {
                    return fail(format!("path to {to} leaves the room"));
                }
            }
            Action::Speak { volume: 0, .. } => return fail("volume levels start at 1".into()),
            _ => {}
        }
        let d = s.action.duration(pos);
        if !(d >= 0.0 && d.is_finite()) {
            return fail("invalid duration".into());
        }
        if let Action::MoveTo { to, .. } = &s.action {
            pos = *to;
        }
    }
    Ok(())
}
