//! Seeded generation of traffic, ground truth and user path.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use super::countermeasure::apply_countermeasure;
use super::scenario::*;
use super::timeline::{intensity, Activity, Timeline};
use crate::error::Result;
use crate::trace::{DeviceTrace, GroundTruthTrace, ImuSample, Mac, PacketRecord, Span, Utterance, US_PER_S};

pub const MTU_PAYLOAD: u32 = 1400;
const GRAVITY: f64 = 9.81;
const IMU_PERIOD_US: u64 = 20_000;
const PATH_PERIOD_US: u64 = 100_000;
const RETRANSMIT_PROB: f64 = 0.01;
const PACKET_GAP_US: u64 = 150;

/// Independent deterministic random stream for one component of a scenario.
pub fn rng_stream(seed: u64, tag: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(tag);
    r
}

const TAG_IMU: u64 = 1 << 60;
const TAG_PATH: u64 = 2 << 60;

fn device_tag(mac: Mac, k: u64) -> u64 {
    mac.as_u64() * 4 + k
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// An application-level message before it is split into link-layer frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frame {
    pub t_us: u64,
    pub bytes: u32,
}

fn us(t: f64) -> u64 {
    (t.max(0.0) * US_PER_S as f64).round() as u64
}

/// Dead-reckoned user position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub timestamp_us: u64,
    pub x: f64,
    pub y: f64,
}

/// A countermeasure output for one scenario entry.
#[derive(Debug, Clone, PartialEq)]
pub struct CountermeasureTrace {
    /// Position of the entry in the scenario's countermeasure list.
    pub index: usize,
    pub kind: &'static str,
    pub trace: DeviceTrace,
}

/// Everything a scenario produces.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub span: Span,
    pub traces: BTreeMap<Mac, DeviceTrace>,
    pub imu: GroundTruthTrace,
    pub audio: GroundTruthTrace,
    pub path: Vec<PathPoint>,
    pub countermeasures: Vec<CountermeasureTrace>,
}

impl World {
    /// All packet records of all devices, ordered by time then MAC.
    pub fn all_records(&self) -> Vec<PacketRecord> {
        let mut v: Vec<PacketRecord> = self.traces.values().flat_map(|t| t.records().iter().copied()).collect();
        v.sort_by_key(|r| (r.timestamp_us, r.mac, r.seq));
        v
    }
}

/// Splits messages into MTU-sized frames with sequence numbers and occasional retransmissions.
pub fn packetize(frames: &[Frame], mac: Mac, channel: u8, end_us: u64, rng: &mut ChaCha8Rng) -> DeviceTrace {
    let mut frames = frames.to_vec();
    frames.sort_by_key(|f| f.t_us);
    let mut seq: u16 = rng.random_range(0..4096);
    let mut out = Vec::new();
    for f in &frames {
        let mut left = f.bytes;
        let mut t = f.t_us;
        while left > 0 {
            let p = left.min(MTU_PAYLOAD);
            out.push(PacketRecord::new(t, mac, Some(seq), p, channel));
            if rng.random::<f64>() < RETRANSMIT_PROB {
                let dt = rng.random_range(1_000..5_000);
                out.push(PacketRecord::new(t + dt, mac, Some(seq), p, channel));
            }
            seq = (seq + 1) & 0x0fff;
            t += PACKET_GAP_US;
            left -= p;
        }
    }
    out.retain(|r| r.timestamp_us < end_us);
    DeviceTrace::new(mac, out).expect("records carry the trace MAC")
}

fn burst_frames(out: &mut Vec<Frame>, start: f64, bytes: u32, spread_s: f64) {
    let n = bytes.div_ceil(MTU_PAYLOAD).max(1);
    let mut left = bytes;
    for k in 0..n {
        let b = left.min(MTU_PAYLOAD);
        left -= b;
        out.push(Frame {
            t_us: us(start + spread_s * k as f64 / n as f64),
            bytes: b,
        });
    }
}

/// Application messages of one sensor. Scene input is read `delay_s` late.
pub fn sensor_frames(
    s: &SensorPlacement,
    tl: &Timeline,
    duration: f64,
    delay_s: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<Frame> {
    let scene = |t: f64| {
        let tt = t - delay_s;
        if tt < 0.0 {
            return 0.0;
        }
        let (p, a) = tl.at(tt);
        intensity(s, p, a)
    };
    let mut out = Vec::new();
    match &s.params {
        ModalityParams::Camera(c) => {
            let dt = 1.0 / c.fps;
            let n = (duration * c.fps).floor() as usize;
            let mut next_kf = rng.random_range(0.5..1.0) * c.keyframe_period_s;
            let alpha = 1.0 - (-dt / 0.2f64).exp();
            let mut ema = 0.0;
            for k in 0..n {
                let t = k as f64 * dt;
                ema += alpha * (scene(t - c.latency_s) - ema);
                let mut mean = (c.base_rate + c.motion_gain * ema) * dt;
                if t >= next_kf {
                    next_kf += c.keyframe_period_s;
                    mean += c.base_rate;
                }
                let bytes = mean * (1.0 + c.noise * gauss(rng)).max(0.2);
                let jitter = rng.random_range(0..2_000);
                out.push(Frame {
                    t_us: us(t) + jitter,
                    bytes: bytes.round() as u32,
                });
            }
        }
        ModalityParams::Rf(r) => {
            let dt = 1.0 / r.frame_hz;
            let n = (duration * r.frame_hz).floor() as usize;
            for k in 0..n {
                let t = k as f64 * dt;
                let pts = r.clutter_points + r.gain_points * scene(t - r.latency_s) + r.point_noise * gauss(rng);
                let pts = pts.round().max(0.0) as u32;
                out.push(Frame {
                    t_us: us(t) + rng.random_range(0..2_000),
                    bytes: r.header_bytes + r.bytes_per_point * pts,
                });
            }
        }
        ModalityParams::Motion(m) => {
            let timeout = us(m.timeout_s);
            let mut last: Option<u64> = None;
            let ticks = us(duration) / IMU_PERIOD_US;
            for k in 0..ticks {
                let t = k * IMU_PERIOD_US;
                let armed = last.is_none_or(|l| t - l >= timeout);
                if armed && scene(t as f64 / US_PER_S as f64) > 0.0 {
                    last = Some(t);
                    let at = t as f64 / US_PER_S as f64 + m.latency_s;
                    burst_frames(&mut out, at, m.event_bytes, 0.3);
                }
            }
            for &st in &m.status_times_s {
                burst_frames(&mut out, st + delay_s, 3_000, 0.2);
            }
            keepalives(&mut out, duration, 30.0, 120, rng);
        }
        ModalityParams::Audio(a) => {
            for sp in tl.speeches() {
                let heard = sp.position.dist(s.position) <= a.radius(sp.volume);
                if heard && sp.phrase == a.wake_phrase {
                    let mut t = sp.start + delay_s + 0.3;
                    while t < sp.end + delay_s + 1.0 {
                        let b = 1_200.0 * (1.0 + 0.1 * gauss(rng));
                        out.push(Frame {
                            t_us: us(t),
                            bytes: b.round().max(600.0) as u32,
                        });
                        t += 0.1;
                    }
                }
            }
            for &(start, dur) in &a.drop_ins {
                let mut t = start + delay_s;
                while t < start + delay_s + dur {
                    let b = 300.0 * (1.0 + 0.2 * gauss(rng));
                    out.push(Frame {
                        t_us: us(t),
                        bytes: b.round().max(50.0) as u32,
                    });
                    t += 0.05;
                }
            }
            keepalives(&mut out, duration, a.keepalive_period_s, 100, rng);
        }
    }
    out
}

fn keepalives(out: &mut Vec<Frame>, duration: f64, period: f64, bytes: u32, rng: &mut ChaCha8Rng) {
    if period <= 0.0 {
        return;
    }
    let mut t = rng.random_range(0.0..period);
    while t < duration {
        out.push(Frame { t_us: us(t), bytes });
        t += period;
    }
}

/// Application messages of a device with no relation to the room.
pub fn innocuous_frames(d: &InnocuousDevice, duration: f64, rng: &mut ChaCha8Rng) -> Vec<Frame> {
    let mut out = Vec::new();
    match d.kind {
        DeviceKind::Router => {
            let period = 0.1 / d.rate_scale;
            let mut t = rng.random_range(0.0..period);
            while t < duration {
                out.push(Frame {
                    t_us: us(t),
                    bytes: 250,
                });
                t += period;
            }
        }
        DeviceKind::SmartLight => keepalives(&mut out, duration, 10.0 / d.rate_scale, 900, rng),
        DeviceKind::Phone => {
            let gap = Exp::new(d.rate_scale / 6.0).expect("positive rate");
            let mut t = gap.sample(rng);
            while t < duration {
                let bytes = rng.random_range(2_000..20_000);
                let spread = rng.random_range(0.2..1.0);
                burst_frames(&mut out, t, bytes, spread);
                t += gap.sample(rng);
            }
        }
        DeviceKind::Laptop => {
            let mut level = 0.0f64;
            let secs = duration.ceil() as usize;
            for s in 0..secs {
                level = 0.8 * level + 0.6 * gauss(rng);
                let rate = 20.0 * d.rate_scale * level.exp();
                let n = Exp::new(1.0).expect("unit rate");
                let mut t = s as f64 + n.sample(rng) / rate;
                while t < (s + 1) as f64 && t < duration {
                    out.push(Frame {
                        t_us: us(t),
                        bytes: rng.random_range(100..=MTU_PAYLOAD),
                    });
                    t += n.sample(rng) / rate;
                }
            }
        }
    }
    out
}

fn imu_accel(act: Activity, t: f64, rng: &mut ChaCha8Rng) -> [f64; 3] {
    // (tilt rad, frequency Hz, amplitudes x/y/z, noise)
    let (tilt, hz, amp, noise): (f64, f64, [f64; 3], f64) = match act {
        Activity::JumpingJacks => (0.35, 1.6, [3.0, 2.0, 12.0], 0.3),
        Activity::Walk => (0.15, 2.0, [1.5, 1.0, 3.0], 0.2),
        Activity::HandWave { .. } => (0.1, 1.5, [2.0, 1.0, 1.0], 0.1),
        _ => (0.0, 0.0, [0.0; 3], 0.05),
    };
    let ph = 2.0 * std::f64::consts::PI * hz * t;
    let base = [GRAVITY * tilt.sin(), 0.0, GRAVITY * tilt.cos()];
    let osc = [ph.sin(), (ph + 1.0).sin(), ph.sin()];
    let mut a = [0.0; 3];
    for k in 0..3 {
        a[k] = base[k] + amp[k] * osc[k] + noise * gauss(rng);
    }
    a
}

/// IMU trace at 50 Hz for a timeline.
pub fn imu_trace(tl: &Timeline, duration: f64, rng: &mut ChaCha8Rng) -> Vec<ImuSample> {
    let n = us(duration) / IMU_PERIOD_US;
    (0..n)
        .map(|k| {
            let ts = k * IMU_PERIOD_US;
            let t = ts as f64 / US_PER_S as f64;
            ImuSample {
                timestamp_us: ts,
                accel: imu_accel(tl.at(t).1, t, rng),
            }
        })
        .collect()
}

fn user_path(tl: &Timeline, duration: f64, sigma: f64, rng: &mut ChaCha8Rng) -> Vec<PathPoint> {
    let wp = tl.waypoint_times();
    let offsets: Vec<(f64, f64)> = wp.iter().map(|_| (sigma * gauss(rng), sigma * gauss(rng))).collect();
    let n = us(duration).div_ceil(PATH_PERIOD_US);
    (0..n)
        .map(|k| {
            let ts = k * PATH_PERIOD_US;
            let t = ts as f64 / US_PER_S as f64;
            let p = tl.at(t).0;
            let i = wp.partition_point(|&w| w <= t).saturating_sub(1);
            let (dx, dy) = offsets.get(i).copied().unwrap_or((0.0, 0.0));
            PathPoint {
                timestamp_us: ts,
                x: p.x + dx,
                y: p.y + dy,
            }
        })
        .collect()
}

/// Generates all traces of a scenario. Identical scenarios give bit-identical worlds.
pub fn generate(sc: &Scenario) -> Result<World> {
    sc.validate()?;
    let duration = sc.duration_s;
    let end_us = us(duration);
    let span = Span::new(0, end_us);
    let tl = Timeline::build(sc.user_start, &sc.script, duration);
    let rooms: Vec<(Timeline, &[SensorPlacement])> = std::iter::once((tl.clone(), sc.sensors.as_slice()))
        .chain(
            sc.adjacent_rooms
                .iter()
                .map(|r| (Timeline::build(r.start, &r.script, duration), r.sensors.as_slice())),
        )
        .collect();

    let sensor_trace = |s: &SensorPlacement, tl: &Timeline, delay: f64| {
        let mut r = rng_stream(sc.seed, device_tag(s.mac, 0));
        let frames = sensor_frames(s, tl, duration, delay, &mut r);
        let mut link = rng_stream(sc.seed, device_tag(s.mac, 1));
        packetize(&frames, s.mac, s.channel, end_us, &mut link)
    };

    let mut traces = BTreeMap::new();
    for (tl, sensors) in &rooms {
        for s in sensors.iter() {
            traces.insert(s.mac, sensor_trace(s, tl, 0.0));
        }
    }
    for d in &sc.devices {
        let mut r = rng_stream(sc.seed, device_tag(d.mac, 0));
        let frames = innocuous_frames(d, duration, &mut r);
        let mut link = rng_stream(sc.seed, device_tag(d.mac, 1));
        traces.insert(d.mac, packetize(&frames, d.mac, d.channel, end_us, &mut link));
    }

    let mut cms = Vec::new();
    for (index, spec) in sc.countermeasures.iter().enumerate() {
        let sensor = rooms
            .iter()
            .find_map(|(tl, ss)| ss.iter().find(|s| s.mac == spec.mac).map(|s| (tl, s)));
        let trace = match (&spec.countermeasure, sensor) {
            (Countermeasure::TapeDelay { delay_s }, Some((tl, s))) => sensor_trace(s, tl, *delay_s),
            (cm, _) => {
                let base = &traces[&spec.mac];
                let seed = sc.seed ^ device_tag(spec.mac, 2).wrapping_add(index as u64);
                let t = apply_countermeasure(base, cm, span, seed)?;
                let kept = t
                    .into_records()
                    .into_iter()
                    .filter(|r| r.timestamp_us < end_us)
                    .collect();
                DeviceTrace::new(spec.mac, kept)?
            }
        };
        cms.push(CountermeasureTrace {
            index,
            kind: spec.countermeasure.kind(),
            trace,
        });
    }

    let imu = imu_trace(&tl, duration, &mut rng_stream(sc.seed, TAG_IMU));
    let audio = tl
        .speeches()
        .iter()
        .map(|s| Utterance {
            label: s.phrase.clone(),
            start_us: us(s.start),
            end_us: us(s.end),
        })
        .collect();
    let path = user_path(
        &tl,
        duration,
        sc.dead_reckoning_sigma,
        &mut rng_stream(sc.seed, TAG_PATH),
    );
    Ok(World {
        span,
        traces,
        imu: GroundTruthTrace::Imu(imu),
        audio: GroundTruthTrace::Audio(audio),
        path,
        countermeasures: cms,
    })
}
