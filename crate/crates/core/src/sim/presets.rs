//! Ready-made scenarios used by the evaluation suites and tests.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::geometry::{Point, Polygon};
use super::scenario::*;
use super::world::rng_stream;
use crate::trace::Mac;

pub const OUI_CAMERA: u32 = 0xaabbcc;
pub const OUI_RF: u32 = 0xaabbd0;
pub const OUI_MOTION: u32 = 0xaabbd1;
pub const OUI_ASSISTANT: u32 = 0xaabbd2;
pub const OUI_LIGHT: u32 = 0xaabbd3;
pub const OUI_PHONE: u32 = 0x021000;
pub const OUI_LAPTOP: u32 = 0x022000;
pub const OUI_ROUTER: u32 = 0x023000;

pub fn mac(oui: u32, n: u32) -> Mac {
    Mac::from_u64(((oui as u64) << 24) | (n as u64 & 0xff_ffff))
}

pub const WAKE_PHRASE: &str = "hey assistant";

const TAG_LAYOUT: u64 = 7 << 56;

fn layout_rng(seed: u64) -> ChaCha8Rng {
    rng_stream(seed, TAG_LAYOUT)
}

/// Stop-start-stop-start-stop with fixed phase lengths (38 s).
pub fn s5_actions() -> Vec<Action> {
    vec![
        Action::Still { duration: 8.0 },
        Action::JumpingJacks { duration: 7.0 },
        Action::Still { duration: 8.0 },
        Action::JumpingJacks { duration: 7.0 },
        Action::Still { duration: 8.0 },
    ]
}

/// S5 with phase lengths jittered by up to a second (35 to 43 s overall).
pub fn s5_actions_jittered(rng: &mut ChaCha8Rng) -> Vec<Action> {
    let mut still = || Action::Still {
        duration: rng.random_range(7.0..9.0),
    };
    let a = still();
    let b = still();
    let c = still();
    let mut jj = || Action::JumpingJacks {
        duration: rng.random_range(6.0..8.0),
    };
    let (j1, j2) = (jj(), jj());
    vec![a, j1, b, j2, c]
}

fn random_room(rng: &mut ChaCha8Rng) -> (Polygon, f64, f64) {
    let w = rng.random_range(6.0..9.0);
    let h = rng.random_range(4.0..6.0);
    (Polygon::rect(0.0, 0.0, w, h), w, h)
}

/// A point on the wall of a `w × h` rectangle and an inward heading.
fn wall_mount(rng: &mut ChaCha8Rng, w: f64, h: f64) -> (Point, f64) {
    let side = rng.random_range(0..4);
    let f = rng.random_range(0.1..0.9);
    let (p, inward) = match side {
        0 => (Point::new(f * w, 0.0), 90.0),
        1 => (Point::new(w, f * h), 180.0),
        2 => (Point::new(f * w, h), 270.0),
        _ => (Point::new(0.0, f * h), 0.0),
    };
    (p, inward + rng.random_range(-30.0..30.0))
}

/// A random point inside both the room and the sensor's sector.
fn point_in_view(rng: &mut ChaCha8Rng, room: &Polygon, s: &SensorPlacement, dmin: f64, dmax: f64) -> Point {
    for _ in 0..10_000 {
        let d = rng.random_range(dmin..dmax);
        let a = s.heading + rng.random_range(-0.8..0.8) * s.fov / 2.0;
        let p = s.position.step(a, d);
        let (lo, hi) = room.bbox();
        let margin = 0.3;
        if p.x > lo.x + margin && p.x < hi.x - margin && p.y > lo.y + margin && p.y < hi.y - margin {
            return p;
        }
    }
    s.position.step(s.heading, 0.5)
}

/// One sensor of `modality` on a wall, the user performing S5 inside its coverage.
pub fn s5_in_coverage(seed: u64, modality: Modality) -> Scenario {
    let mut rng = layout_rng(seed);
    let (room, w, h) = random_room(&mut rng);
    let (pos, heading) = wall_mount(&mut rng, w, h);
    let oui = match modality {
        Modality::Camera => OUI_CAMERA,
        Modality::Rf => OUI_RF,
        Modality::Motion => OUI_MOTION,
        Modality::Audio => OUI_ASSISTANT,
    };
    let mut s = SensorPlacement::new(mac(oui, seed as u32), modality, pos, heading);
    if modality == Modality::Camera {
        s.fov = rng.random_range(70.0..=90.0);
    }
    let user = point_in_view(&mut rng, &room, &s, 0.8, 0.6 * s.range);
    let script = sequential(0.0, s5_actions_jittered(&mut rng), user);
    let mut sc = Scenario::new(seed, room, user);
    sc.sensors.push(s);
    sc.devices
        .push(InnocuousDevice::new(mac(OUI_ROUTER, seed as u32), DeviceKind::Router));
    sc.devices
        .push(InnocuousDevice::new(mac(OUI_PHONE, seed as u32), DeviceKind::Phone));
    sc.with_script(script)
}

/// Pacing bouts inside `view` separated by pauses, for about `total` seconds.
pub fn walk_with_pauses(
    rng: &mut ChaCha8Rng,
    room: &Polygon,
    view: &SensorPlacement,
    start: Point,
    total: f64,
    lead: std::ops::Range<f64>,
) -> Vec<ScriptStep> {
    let mut actions = vec![Action::Still {
        duration: rng.random_range(lead),
    }];
    let mut t = 0.0;
    while t < total - 15.0 {
        let to = point_in_view(rng, room, view, 0.8, 0.65 * view.range);
        let walk = rng.random_range(4.0..9.0);
        let pause = rng.random_range(6.0..11.0);
        actions.push(Action::Pace {
            to,
            duration: walk,
            speed: WALK_SPEED,
        });
        actions.push(Action::Still { duration: pause });
        t += walk + pause;
    }
    sequential(0.0, actions, start)
}

/// Natural motion in front of a camera for about 90 s.
pub fn background_in_coverage(seed: u64) -> Scenario {
    let mut rng = layout_rng(seed);
    let (room, w, h) = random_room(&mut rng);
    let (pos, heading) = wall_mount(&mut rng, w, h);
    let mut cam = SensorPlacement::new(mac(OUI_CAMERA, seed as u32), Modality::Camera, pos, heading);
    cam.range = 4.0;
    let start = point_in_view(&mut rng, &room, &cam, 0.8, 0.6 * cam.range);
    let script = walk_with_pauses(&mut rng, &room, &cam, start, 90.0, 6.0..9.0);
    let mut sc = Scenario::new(seed, room, start);
    sc.sensors.push(cam);
    sc.with_script(script)
}

/// Continuous walking with no stops.
pub fn continuous_walking(seed: u64) -> Scenario {
    let base = background_in_coverage(seed);
    let cam = base.sensors[0].clone();
    let mut rng = layout_rng(seed ^ 1);
    let mut to = point_in_view(&mut rng, &base.room, &cam, 0.8, 0.6 * cam.range);
    for _ in 0..100 {
        if to.dist(base.user_start) >= 1.0 {
            break;
        }
        to = point_in_view(&mut rng, &base.room, &cam, 0.8, 0.6 * cam.range);
    }
    let mut sc = Scenario::new(seed, base.room, base.user_start);
    sc.sensors.push(cam);
    sc.with_script(vec![ScriptStep {
        time: 0.0,
        action: Action::Pace {
            to,
            duration: 90.0,
            speed: WALK_SPEED,
        },
    }])
}

/// Only innocuous devices in the user's room, plus a camera next door watching
/// another person. The user performs S5 (`active`) or natural motion.
pub fn innocuous_only(seed: u64, active: bool) -> Scenario {
    let mut rng = layout_rng(seed);
    let (room, w, h) = random_room(&mut rng);
    let user = Point::new(rng.random_range(1.0..w - 1.0), rng.random_range(1.0..h - 1.0));

    let nw = rng.random_range(4.0..7.0);
    let next = Polygon::rect(w + 0.2, 0.0, w + 0.2 + nw, h);
    let cam_pos = Point::new(w + 0.2, h / 2.0);
    let mut cam = SensorPlacement::new(mac(OUI_CAMERA, 0x800000 | seed as u32), Modality::Camera, cam_pos, 0.0);
    cam.range = 4.0;
    let mover = point_in_view(&mut rng, &next, &cam, 0.8, 0.6 * cam.range);
    let mover_script = walk_with_pauses(&mut rng, &next, &cam, mover, 100.0, 0.5..20.0);

    let mut sc = Scenario::new(seed, room.clone(), user);
    let n = seed as u32;
    sc.devices = vec![
        InnocuousDevice::new(mac(OUI_PHONE, n), DeviceKind::Phone),
        InnocuousDevice::new(mac(OUI_LAPTOP, n), DeviceKind::Laptop),
        InnocuousDevice::new(mac(OUI_ROUTER, n), DeviceKind::Router),
        InnocuousDevice::new(mac(OUI_LIGHT, n), DeviceKind::SmartLight),
    ];
    sc.adjacent_rooms.push(AdjacentRoom {
        room: next,
        sensors: vec![cam],
        start: mover,
        script: mover_script,
    });
    let script = if active {
        sequential(0.0, s5_actions_jittered(&mut rng), user)
    } else {
        let mut walker = SensorPlacement::new(mac(0, 0), Modality::Rf, Point::new(0.0, h / 2.0), 0.0);
        walker.fov = 180.0;
        walker.range = w.max(h);
        walk_with_pauses(&mut rng, &room, &walker, user, 90.0, 6.0..9.0)
    };
    sc.with_script(script)
}

/// Motion sensor with the given timeout; move, wait, move.
/// `status` adds a cloud status upload while the user is still.
pub fn motion_timeout(seed: u64, timeout_s: f64, status: bool) -> Scenario {
    let mut rng = layout_rng(seed);
    let (room, w, h) = random_room(&mut rng);
    let (pos, heading) = wall_mount(&mut rng, w, h);
    let mut s = SensorPlacement::new(mac(OUI_MOTION, seed as u32), Modality::Motion, pos, heading);
    let a = point_in_view(&mut rng, &room, &s, 0.8, 0.7 * s.range);
    let b = point_in_view(&mut rng, &room, &s, 0.8, 0.7 * s.range);
    let first = timeout_s + 10.0;
    let actions = vec![
        Action::Still { duration: 10.0 },
        Action::Pace {
            to: b,
            duration: first,
            speed: WALK_SPEED,
        },
        Action::Still { duration: 15.0 },
        Action::Pace {
            to: a,
            duration: 20.0,
            speed: WALK_SPEED,
        },
        Action::Still { duration: 10.0 },
    ];
    if let ModalityParams::Motion(m) = &mut s.params {
        m.timeout_s = timeout_s;
        if status {
            m.status_times_s.push(10.0 + first + rng.random_range(6.0..12.0));
        }
    }
    let mut sc = Scenario::new(seed, room, a);
    sc.sensors.push(s);
    sc.with_script(sequential(0.0, actions, a))
}

fn assistant(seed: u64, rng: &mut ChaCha8Rng, w: f64, h: f64) -> SensorPlacement {
    let pos = Point::new(rng.random_range(0.5..w - 0.5), rng.random_range(0.5..h - 0.5));
    let mut s = SensorPlacement::new(mac(OUI_ASSISTANT, seed as u32), Modality::Audio, pos, 0.0);
    if let ModalityParams::Audio(a) = &mut s.params {
        a.wake_phrase = WAKE_PHRASE.into();
        s.range = a.radii.iter().copied().fold(0.0, f64::max);
    }
    s
}

/// `count` utterances of a phrase at volumes the assistant can hear.
pub fn audio_phrases(seed: u64, count: usize, wake: bool) -> Scenario {
    let mut rng = layout_rng(seed);
    let (room, w, h) = random_room(&mut rng);
    let s = assistant(seed, &mut rng, w, h);
    let radii = match &s.params {
        ModalityParams::Audio(a) => a.radii.clone(),
        _ => unreachable!(),
    };
    let user = Point::new(rng.random_range(0.5..w - 0.5), rng.random_range(0.5..h - 0.5));
    let d = user.dist(s.position);
    let level = radii.iter().position(|r| *r >= d).unwrap_or(radii.len() - 1) as u32 + 1;
    let phrase = if wake { WAKE_PHRASE } else { "what time is it" };
    let mut actions = vec![Action::Still { duration: 5.0 }];
    for _ in 0..count {
        actions.push(Action::Speak {
            phrase: phrase.into(),
            volume: level,
            duration: rng.random_range(1.2..2.0),
        });
        actions.push(Action::Still {
            duration: rng.random_range(10.0..16.0),
        });
    }
    let mut sc = Scenario::new(seed, room, user);
    sc.sensors.push(s);
    sc.devices
        .push(InnocuousDevice::new(mac(OUI_ROUTER, seed as u32), DeviceKind::Router));
    sc.with_script(sequential(0.0, actions, user))
}

/// An assistant with `count` live-listening sessions.
pub fn drop_ins(seed: u64, count: usize) -> Scenario {
    let mut rng = layout_rng(seed);
    let (room, w, h) = random_room(&mut rng);
    let mut s = assistant(seed, &mut rng, w, h);
    let mut t = rng.random_range(10.0..20.0);
    let mut sessions = Vec::new();
    for _ in 0..count {
        let d = rng.random_range(20.0..40.0);
        sessions.push((t, d));
        t += d + rng.random_range(25.0..45.0);
    }
    if let ModalityParams::Audio(a) = &mut s.params {
        a.drop_ins = sessions;
    }
    let start = Point::new(w / 2.0, h / 2.0);
    let mut sc = Scenario::new(seed, room, start);
    sc.sensors.push(s);
    sc.duration_s = t.ceil();
    sc
}

/// The 8 m × 5 m room with a corner camera used for the localization walk-through.
pub fn fig8_room() -> Polygon {
    Polygon::rect(0.0, 0.0, 8.0, 5.0)
}

pub fn fig8_camera() -> SensorPlacement {
    let mut s = SensorPlacement::new(mac(OUI_CAMERA, 0x000f8), Modality::Camera, Point::new(0.05, 0.05), 45.0);
    s.fov = 90.0;
    s.range = 4.5;
    s
}

/// Six traversal points spread over the room.
pub fn fig8_probes() -> Vec<Point> {
    vec![
        Point::new(1.5, 1.5),
        Point::new(3.5, 1.0),
        Point::new(1.0, 3.5),
        Point::new(4.0, 4.0),
        Point::new(6.5, 1.5),
        Point::new(6.5, 3.5),
    ]
}

/// A sensor to localize, its room and a traversal.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationCase {
    pub room: Polygon,
    pub sensor: SensorPlacement,
    pub probes: Vec<Point>,
}

/// Random wall-mounted camera, RF or motion sensor and a 1.5 m probe grid.
pub fn localization_case(seed: u64) -> LocalizationCase {
    let mut rng = layout_rng(seed);
    let w = rng.random_range(5.0..9.0);
    let h = rng.random_range(4.0..6.0);
    let room = Polygon::rect(0.0, 0.0, w, h);
    let (pos, heading) = wall_mount(&mut rng, w, h);
    let modality = [Modality::Camera, Modality::Rf, Modality::Motion][(seed % 3) as usize];
    let oui = [OUI_CAMERA, OUI_RF, OUI_MOTION][(seed % 3) as usize];
    let mut sensor = SensorPlacement::new(mac(oui, seed as u32), modality, pos, heading);
    if modality == Modality::Camera {
        sensor.fov = rng.random_range(60.0..=120.0);
        sensor.range = rng.random_range(3.0..=5.0);
    }
    let mut probes = Vec::new();
    let mut y = 0.75;
    while y < h {
        let mut x = 0.75;
        while x < w {
            probes.push(Point::new(x, y));
            x += 1.5;
        }
        y += 1.5;
    }
    LocalizationCase { room, sensor, probes }
}

/// S5 in front of a camera or radar, followed by `tail_s` of stillness, with
/// a countermeasure on the sensor.
pub fn countermeasure_case(seed: u64, modality: Modality, cm: Countermeasure, tail_s: f64) -> Scenario {
    let base = s5_in_coverage(seed, modality);
    let mac = base.sensors[0].mac;
    let mut script = base.script.clone();
    let end = script_end(&script, base.user_start);
    if tail_s > 0.0 {
        script.push(ScriptStep {
            time: end,
            action: Action::Still { duration: tail_s },
        });
    }
    let mut sc = Scenario::new(seed, base.room.clone(), base.user_start);
    sc.sensors = base.sensors.clone();
    sc.devices = base.devices.clone();
    sc.countermeasures.push(CountermeasureSpec {
        mac,
        countermeasure: cm,
    });
    sc.with_script(script)
}

/// A busy 60 s capture: ten devices and roughly fifty thousand packets.
pub fn performance_scenario(seed: u64) -> Scenario {
    let room = fig8_room();
    let user = Point::new(2.5, 2.0);
    let mut sc = Scenario::new(seed, room, user);
    for k in 0..3u32 {
        let mut cam = SensorPlacement::new(
            mac(OUI_CAMERA, k),
            Modality::Camera,
            Point::new(0.0, 0.5 + 2.0 * k as f64),
            0.0,
        );
        cam.range = 5.0;
        if let ModalityParams::Camera(c) = &mut cam.params {
            c.base_rate = 180_000.0;
            c.motion_gain = 180_000.0;
        }
        sc.sensors.push(cam);
    }
    sc.sensors.push(SensorPlacement::new(
        mac(OUI_RF, 0),
        Modality::Rf,
        Point::new(5.0, 0.0),
        135.0,
    ));
    sc.sensors.push(SensorPlacement::new(
        mac(OUI_MOTION, 0),
        Modality::Motion,
        Point::new(5.0, 5.0),
        225.0,
    ));
    let mut hub = SensorPlacement::new(mac(OUI_ASSISTANT, 0), Modality::Audio, Point::new(7.5, 2.5), 0.0);
    hub.range = 8.0;
    sc.sensors.push(hub);
    let mut laptop = InnocuousDevice::new(mac(OUI_LAPTOP, 0), DeviceKind::Laptop);
    laptop.rate_scale = 4.0;
    let mut router = InnocuousDevice::new(mac(OUI_ROUTER, 0), DeviceKind::Router);
    router.rate_scale = 2.0;
    sc.devices = vec![
        InnocuousDevice::new(mac(OUI_PHONE, 0), DeviceKind::Phone),
        laptop,
        router,
        InnocuousDevice::new(mac(OUI_LIGHT, 0), DeviceKind::SmartLight),
    ];
    sc.duration_s = 60.0;
    sc.with_script(sequential(0.0, s5_actions(), user))
}
