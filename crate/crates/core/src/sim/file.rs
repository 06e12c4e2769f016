//! TOML scenario files.

use std::path::Path;

use serde::Deserialize;
use toml::Spanned;

use super::geometry::{Point, Polygon};
use super::scenario::*;
use crate::error::{Error, Result};
use crate::trace::Mac;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    seed: u64,
    duration_s: Option<f64>,
    dead_reckoning_sigma: Option<f64>,
    room: RawRoom,
    user: RawUser,
    #[serde(default)]
    sensors: Vec<Spanned<RawSensor>>,
    #[serde(default)]
    devices: Vec<Spanned<RawDevice>>,
    #[serde(default)]
    countermeasures: Vec<Spanned<RawCountermeasure>>,
    #[serde(default)]
    adjacent_rooms: Vec<Spanned<RawAdjacent>>,
    probes: Option<Spanned<Vec<[f64; 2]>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRoom {
    vertices: Spanned<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUser {
    start: Spanned<[f64; 2]>,
    #[serde(default)]
    script: Vec<Spanned<RawStep>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSensor {
    mac: String,
    modality: String,
    position: [f64; 2],
    #[serde(default)]
    heading: f64,
    fov: Option<f64>,
    range: Option<f64>,
    channel: Option<u8>,
    base_rate: Option<f64>,
    keyframe_period_s: Option<f64>,
    motion_gain: Option<f64>,
    fps: Option<f64>,
    latency_s: Option<f64>,
    noise: Option<f64>,
    frame_hz: Option<f64>,
    clutter_points: Option<f64>,
    gain_points: Option<f64>,
    point_noise: Option<f64>,
    timeout_s: Option<f64>,
    event_bytes: Option<u32>,
    status_times_s: Option<Vec<f64>>,
    wake_phrase: Option<String>,
    radii: Option<Vec<f64>>,
    drop_ins: Option<Vec<[f64; 2]>>,
    keepalive_period_s: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDevice {
    mac: String,
    kind: String,
    rate_scale: Option<f64>,
    channel: Option<u8>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStep {
    time: f64,
    action: String,
    duration: Option<f64>,
    to: Option<[f64; 2]>,
    speed: Option<f64>,
    phrase: Option<String>,
    volume: Option<u32>,
    heading: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCountermeasure {
    mac: String,
    kind: String,
    target_bytes: Option<u64>,
    rate_hz: Option<f64>,
    min_bytes: Option<u32>,
    max_bytes: Option<u32>,
    min_interval_s: Option<f64>,
    max_interval_s: Option<f64>,
    levels: Option<Vec<f64>>,
    delay_s: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAdjacent {
    vertices: Vec<[f64; 2]>,
    start: [f64; 2],
    #[serde(default)]
    sensors: Vec<Spanned<RawSensor>>,
    #[serde(default)]
    script: Vec<Spanned<RawStep>>,
}

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn line(&self, offset: usize) -> usize {
        let end = offset.min(self.text.len());
        self.text[..end].matches('\n').count() + 1
    }

    fn err<T>(&self, span: std::ops::Range<usize>, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            line: self.line(span.start),
            msg: msg.into(),
        })
    }
}

fn pt(p: [f64; 2]) -> Point {
    Point::new(p[0], p[1])
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl RawSensor {
    fn foreign_fields(&self, m: Modality) -> Vec<&'static str> {
        let mut f = Vec::new();
        let mut check = |present: bool, name: &'static str, owner: Modality| {
            if present && owner != m {
                f.push(name);
            }
        };
        check(self.base_rate.is_some(), "base_rate", Modality::Camera);
        check(self.keyframe_period_s.is_some(), "keyframe_period_s", Modality::Camera);
        check(self.motion_gain.is_some(), "motion_gain", Modality::Camera);
        check(self.fps.is_some(), "fps", Modality::Camera);
        check(self.noise.is_some(), "noise", Modality::Camera);
        check(self.frame_hz.is_some(), "frame_hz", Modality::Rf);
        check(self.clutter_points.is_some(), "clutter_points", Modality::Rf);
        check(self.gain_points.is_some(), "gain_points", Modality::Rf);
        check(self.point_noise.is_some(), "point_noise", Modality::Rf);
        check(self.timeout_s.is_some(), "timeout_s", Modality::Motion);
        check(self.event_bytes.is_some(), "event_bytes", Modality::Motion);
        check(self.status_times_s.is_some(), "status_times_s", Modality::Motion);
        check(self.wake_phrase.is_some(), "wake_phrase", Modality::Audio);
        check(self.radii.is_some(), "radii", Modality::Audio);
        check(self.drop_ins.is_some(), "drop_ins", Modality::Audio);
        check(self.keepalive_period_s.is_some(), "keepalive_period_s", Modality::Audio);
        if self.latency_s.is_some() && m == Modality::Audio {
            f.push("latency_s");
        }
        f
    }
}

fn sensor(ctx: &Ctx, room: &Polygon, raw: Spanned<RawSensor>) -> Result<SensorPlacement> {
    let span = raw.span();
    let r = raw.into_inner();
    let Some(m) = Modality::parse(&r.modality) else {
        return ctx.err(span, format!("unknown modality {:?}", r.modality));
    };
    let foreign = r.foreign_fields(m);
    if !foreign.is_empty() {
        return ctx.err(
            span,
            format!("fields {foreign:?} do not apply to a {} sensor", m.name()),
        );
    }
    let mac: Mac = match r.mac.parse() {
        Ok(m) => m,
        Err(e) => return ctx.err(span, e.to_string()),
    };
    let mut s = SensorPlacement::new(mac, m, pt(r.position), r.heading);
    set(&mut s.fov, r.fov);
    set(&mut s.range, r.range);
    set(&mut s.channel, r.channel);
    match &mut s.params {
        ModalityParams::Camera(c) => {
            set(&mut c.base_rate, r.base_rate);
            set(&mut c.keyframe_period_s, r.keyframe_period_s);
            set(&mut c.motion_gain, r.motion_gain);
            set(&mut c.fps, r.fps);
            set(&mut c.latency_s, r.latency_s);
            set(&mut c.noise, r.noise);
        }
        ModalityParams::Rf(c) => {
            set(&mut c.frame_hz, r.frame_hz);
            set(&mut c.clutter_points, r.clutter_points);
            set(&mut c.gain_points, r.gain_points);
            set(&mut c.point_noise, r.point_noise);
            set(&mut c.latency_s, r.latency_s);
        }
        ModalityParams::Motion(c) => {
            set(&mut c.timeout_s, r.timeout_s);
            set(&mut c.latency_s, r.latency_s);
            set(&mut c.event_bytes, r.event_bytes);
            set(&mut c.status_times_s, r.status_times_s);
        }
        ModalityParams::Audio(c) => {
            set(&mut c.wake_phrase, r.wake_phrase);
            set(&mut c.radii, r.radii);
            set(&mut c.keepalive_period_s, r.keepalive_period_s);
            if let Some(d) = r.drop_ins {
                c.drop_ins = d.iter().map(|p| (p[0], p[1])).collect();
            }
            if r.range.is_none() {
                s.range = c.radii.iter().copied().fold(0.0, f64::max);
            }
        }
    }
    if let Err(e) = s.validate() {
        return ctx.err(span, e.to_string());
    }
    if !room.contains(s.position) {
        return ctx.err(span, format!("sensor {} outside the room", s.mac));
    }
    Ok(s)
}

fn step(ctx: &Ctx, raw: &Spanned<RawStep>) -> Result<ScriptStep> {
    let span = raw.span();
    let r = raw.get_ref();
    let need_f = |v: Option<f64>, name: &str| match v {
        Some(v) => Ok(v),
        None => ctx.err(span.clone(), format!("{} step needs `{name}`", r.action)),
    };
    let action = match r.action.as_str() {
        "move-to" => Action::MoveTo {
            to: pt(r
                .to
                .map_or_else(|| ctx.err(span.clone(), "move-to step needs `to`"), Ok)?),
            speed: r.speed.unwrap_or(WALK_SPEED),
        },
        "pace" => Action::Pace {
            to: pt(r.to.map_or_else(|| ctx.err(span.clone(), "pace step needs `to`"), Ok)?),
            duration: need_f(r.duration, "duration")?,
            speed: r.speed.unwrap_or(WALK_SPEED),
        },
        "still" => Action::Still {
            duration: need_f(r.duration, "duration")?,
        },
        "jumping-jacks" => Action::JumpingJacks {
            duration: need_f(r.duration, "duration")?,
        },
        "speak" => Action::Speak {
            phrase: r
                .phrase
                .clone()
                .map_or_else(|| ctx.err(span.clone(), "speak step needs `phrase`"), Ok)?,
            volume: r.volume.unwrap_or(1),
            duration: r.duration.unwrap_or(1.5),
        },
        "laptop-flash" => Action::LaptopFlash {
            heading: need_f(r.heading, "heading")?,
            duration: need_f(r.duration, "duration")?,
        },
        "hand-wave" => Action::HandWave {
            heading: need_f(r.heading, "heading")?,
            duration: need_f(r.duration, "duration")?,
        },
        "leave-room" => Action::LeaveRoom {
            duration: need_f(r.duration, "duration")?,
        },
        other => return ctx.err(span, format!("unknown action {other:?}")),
    };
    Ok(ScriptStep { time: r.time, action })
}

fn script(ctx: &Ctx, room: &Polygon, start: Point, raw: &[Spanned<RawStep>]) -> Result<Vec<ScriptStep>> {
    let steps = raw.iter().map(|s| step(ctx, s)).collect::<Result<Vec<_>>>()?;
    if let Err((i, msg)) = check_script(room, start, &steps) {
        let line = i.map_or(1, |i| ctx.line(raw[i].span().start));
        return Err(Error::Parse { line, msg });
    }
    Ok(steps)
}

fn countermeasure(ctx: &Ctx, raw: Spanned<RawCountermeasure>) -> Result<CountermeasureSpec> {
    let span = raw.span();
    let r = raw.into_inner();
    let mac: Mac = match r.mac.parse() {
        Ok(m) => m,
        Err(e) => return ctx.err(span, e.to_string()),
    };
    let mut c = match Countermeasure::default_for(&r.kind) {
        Ok(c) => c,
        Err(e) => return ctx.err(span, e.to_string()),
    };
    match &mut c {
        Countermeasure::Padding { target_bytes } => *target_bytes = r.target_bytes.or(*target_bytes),
        Countermeasure::Noise {
            rate_hz,
            min_bytes,
            max_bytes,
        } => {
            set(rate_hz, r.rate_hz);
            set(min_bytes, r.min_bytes);
            set(max_bytes, r.max_bytes);
        }
        Countermeasure::Resolution {
            min_interval_s,
            max_interval_s,
            levels,
        } => {
            set(min_interval_s, r.min_interval_s);
            set(max_interval_s, r.max_interval_s);
            set(levels, r.levels);
        }
        Countermeasure::TapeDelay { delay_s } => set(delay_s, r.delay_s),
    }
    Ok(CountermeasureSpec { mac, countermeasure: c })
}

/// Parses and validates a scenario. Errors carry the 1-based line of the offending entry.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let ctx = Ctx { text };
    let raw: RawScenario = toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map_or(1, |s| ctx.line(s.start)),
        msg: e.message().to_string(),
    })?;

    let vspan = raw.room.vertices.span();
    let room = match Polygon::new(raw.room.vertices.into_inner().into_iter().map(pt).collect()) {
        Ok(p) => p,
        Err(e) => return ctx.err(vspan, e.to_string()),
    };
    let start_span = raw.user.start.span();
    let start = pt(*raw.user.start.get_ref());
    if !room.contains(start) {
        return ctx.err(start_span, "user start outside the room");
    }
    let mut sc = Scenario::new(raw.seed, room, start);
    if let Some(s) = raw.dead_reckoning_sigma {
        sc.dead_reckoning_sigma = s;
    }
    sc.sensors = raw
        .sensors
        .into_iter()
        .map(|s| sensor(&ctx, &sc.room, s))
        .collect::<Result<_>>()?;
    for d in raw.devices {
        let span = d.span();
        let d = d.into_inner();
        let Some(kind) = DeviceKind::parse(&d.kind) else {
            return ctx.err(span, format!("unknown device kind {:?}", d.kind));
        };
        let mac: Mac = match d.mac.parse() {
            Ok(m) => m,
            Err(e) => return ctx.err(span, e.to_string()),
        };
        let mut dev = InnocuousDevice::new(mac, kind);
        set(&mut dev.rate_scale, d.rate_scale);
        set(&mut dev.channel, d.channel);
        if !(dev.rate_scale > 0.0) {
            return ctx.err(span, "rate_scale must be positive");
        }
        sc.devices.push(dev);
    }
    for a in raw.adjacent_rooms {
        let span = a.span();
        let a = a.into_inner();
        let room = match Polygon::new(a.vertices.into_iter().map(pt).collect()) {
            Ok(p) => p,
            Err(e) => return ctx.err(span, e.to_string()),
        };
        let start = pt(a.start);
        let sensors = a
            .sensors
            .into_iter()
            .map(|s| sensor(&ctx, &room, s))
            .collect::<Result<_>>()?;
        let script = script(&ctx, &room, start, &a.script)?;
        sc.adjacent_rooms.push(AdjacentRoom {
            room,
            sensors,
            start,
            script,
        });
    }
    if let Some(p) = raw.probes {
        let span = p.span();
        sc.probes = p.into_inner().into_iter().map(pt).collect();
        if let Some(q) = sc.probes.iter().find(|q| !sc.room.contains(**q)) {
            return ctx.err(span, format!("probe point {q} outside the room"));
        }
    }
    let steps = script(&ctx, &sc.room, start, &raw.user.script)?;
    sc = sc.with_script(steps);
    if let Some(d) = raw.duration_s {
        sc.duration_s = d;
    }
    let cm_spans: Vec<_> = raw.countermeasures.iter().map(|c| c.span()).collect();
    sc.countermeasures = raw
        .countermeasures
        .into_iter()
        .map(|c| countermeasure(&ctx, c))
        .collect::<Result<_>>()?;
    if let Err(e) = sc.validate() {
        let line = match &e {
            Error::Scenario(m) if m.starts_with("countermeasure") || m.starts_with("invalid") => {
                cm_spans.first().map_or(1, |s| ctx.line(s.start))
            }
            _ => 1,
        };
        return Err(Error::Parse {
            line,
            msg: e.to_string(),
        });
    }
    Ok(sc)
}

pub fn read_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text)
}
