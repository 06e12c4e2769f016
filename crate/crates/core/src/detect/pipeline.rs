//! Background and active detection phases.

use std::collections::BTreeMap;

use super::oui::{oui_lookup, Category, DiscoveryLog, OuiDatabase};
use crate::causality::{
    audio_matching, detect_bursts, event_causality, granger_sweep, BurstConfig, CausalityVerdict, EventCausality,
    MotionConfig, MotionProfile, SweepConfig,
};
use crate::error::{Error, Result};
use crate::trace::{
    deduplicate, resample_ground_truth, suppress_iframes, windowize, DeviceTrace, GroundTruthTrace, Mac, Span,
    TimeSeries, DEFAULT_WINDOW_US, US_PER_S,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Background,
    Active,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Background => "background",
            Phase::Active => "active",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "background" => Some(Phase::Background),
            "active" => Some(Phase::Active),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviceClass {
    /// Transmits continuously; tested with Granger causality.
    Raw,
    /// Transmits in bursts; tested by event matching.
    Event,
    Silent,
}

impl DeviceClass {
    pub fn name(self) -> &'static str {
        match self {
            DeviceClass::Raw => "raw",
            DeviceClass::Event => "event",
            DeviceClass::Silent => "silent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectConfig {
    pub window_us: u64,
    pub sweep: SweepConfig,
    pub bursts: BurstConfig,
    pub motion: MotionConfig,
    /// Minimum ground-truth length for the background phase, seconds.
    pub min_background_s: f64,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            window_us: DEFAULT_WINDOW_US,
            sweep: SweepConfig::default(),
            bursts: BurstConfig::default(),
            motion: MotionConfig::default(),
            min_background_s: 60.0,
        }
    }
}

/// Classifies a device over the first `horizon_s` seconds of capture.
///
/// Raw when more than half the windows carry traffic, event when at least
/// one burst occurs, silent otherwise.
pub fn classify_device(trace: &DeviceTrace, horizon_s: f64) -> Result<DeviceClass> {
    if !(horizon_s >= 30.0) {
        return Err(Error::Config(format!(
            "classification horizon {horizon_s} s is below 30 s"
        )));
    }
    let span = Span::new(0, (horizon_s * US_PER_S as f64).round() as u64);
    let series = windowize::<f64>(&deduplicate(trace), span, DEFAULT_WINDOW_US)?;
    Ok(classify_series(&series, &BurstConfig::default()))
}

pub fn classify_series(series: &TimeSeries<f64>, bursts: &BurstConfig) -> DeviceClass {
    let nonzero = series.values.iter().filter(|&&v| v > 0.0).count();
    if 2 * nonzero > series.len() {
        DeviceClass::Raw
    } else if !detect_bursts(series, bursts).is_empty() {
        DeviceClass::Event
    } else {
        DeviceClass::Silent
    }
}

/// How a device's verdict was reached.
#[derive(Debug, Clone, PartialEq)]
pub enum Evidence {
    Raw {
        verdict: CausalityVerdict<f64>,
        /// Traffic activity lined up with the motion segments.
        aligned: bool,
    },
    Event(EventCausality),
    Silent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceReport {
    pub mac: Mac,
    pub class: DeviceClass,
    pub monitoring: bool,
    pub evidence: Evidence,
    pub vendor: String,
    pub category: Category,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    pub phase: Phase,
    /// One entry per input MAC, in MAC order.
    pub devices: Vec<DeviceReport>,
}

impl DetectionReport {
    pub fn device(&self, mac: Mac) -> Option<&DeviceReport> {
        self.devices.iter().find(|d| d.mac == mac)
    }

    pub fn flagged(&self) -> impl Iterator<Item = &DeviceReport> {
        self.devices.iter().filter(|d| d.monitoring)
    }
}

const SMOOTH_WINDOWS: usize = 10;
const MOTION_LEAD_IN_US: u64 = 500_000;
const MOTION_TAIL_US: u64 = US_PER_S;
const STILL_SETTLE_US: u64 = 2 * US_PER_S;
const MOTION_ACTIVE: f64 = 0.5;
const STILL_ACTIVE: f64 = 0.10;
const ONSET_US: u64 = 2 * US_PER_S;
const ONSET_LOOKBACK_US: u64 = 3 * US_PER_S;
const OFFSET_EARLY_US: u64 = US_PER_S;
const OFFSET_LATE_US: u64 = 1_500_000;

/// How the traffic's activity lines up with one motion segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentActivity {
    pub moving: bool,
    /// Fraction of active windows over the segment's measurement span.
    pub fraction: f64,
    /// Activity state at the edge check point agrees with the segment.
    pub edge: bool,
}

/// Per-segment activity of a traffic series against a motion profile.
///
/// The traffic is smoothed over 1 s and split at the midpoint between its
/// 20th and 95th percentiles. Motion segments are measured over
/// `[start + 0.5 s, end + 1 s)`. Their edge check requires the traffic to
/// turn active within 2 s after the segment starts, having been quiet for the
/// 3 s before, and to turn quiet again no later than 1.5 s after it ends.
/// Still segments are measured over `[start + 2 s, end)`. `None` when the
/// traffic is flat or there is no motion.
pub fn activity_fractions(series: &TimeSeries<f64>, profile: &MotionProfile) -> Option<Vec<SegmentActivity>> {
    let v = &series.values;
    let n = v.len().min(profile.moving.len());
    if n == 0 || profile.motion_segments().next().is_none() {
        return None;
    }
    let half = SMOOTH_WINDOWS / 2;
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            v[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let mut sorted = smooth.clone();
    sorted.sort_by(f64::total_cmp);
    let pct = |q: f64| sorted[((n - 1) as f64 * q).round() as usize];
    let (l0, l1) = (pct(0.20), pct(0.95));
    if l1 <= l0 {
        return None;
    }
    let thr = l0 + 0.5 * (l1 - l0);
    let w = series.window;
    let frac = |a: usize, b: usize| {
        let b = b.min(n);
        (a < b).then(|| smooth[a..b].iter().filter(|&&s| s > thr).count() as f64 / (b - a) as f64)
    };
    let win = |us: u64| (us / w) as usize;
    let active = |i: usize| smooth[i] > thr;
    Some(
        profile
            .segments
            .iter()
            .filter_map(|s| {
                if s.moving {
                    let fraction = frac(s.start + win(MOTION_LEAD_IN_US), s.end + win(MOTION_TAIL_US))?;
                    let from = s.start.saturating_sub(win(ONSET_LOOKBACK_US));
                    let onset = (from..n).find(|&i| active(i));
                    let onset_ok = onset.is_some_and(|i| i >= s.start && i <= s.start + win(ONSET_US));
                    let from = s.end.saturating_sub(win(OFFSET_EARLY_US)).min(n);
                    let offset = (from..n).find(|&i| !active(i));
                    let offset_ok = s.end >= n || offset.is_some_and(|i| i <= s.end + win(OFFSET_LATE_US));
                    Some(SegmentActivity {
                        moving: true,
                        fraction,
                        edge: onset_ok && offset_ok,
                    })
                } else {
                    Some(SegmentActivity {
                        moving: false,
                        fraction: frac(s.start + win(STILL_SETTLE_US), s.end)?,
                        edge: true,
                    })
                }
            })
            .collect(),
    )
}

/// Whether the traffic's high-activity windows line up with the motion segments.
///
/// Every motion segment must be active for at least half of its span and
/// every still segment at most a tenth, with each edge check passing, as
/// measured by [`activity_fractions`].
pub fn activity_aligned(series: &TimeSeries<f64>, profile: &MotionProfile) -> bool {
    activity_fractions(series, profile).is_some_and(|fs| {
        fs.iter().any(|f| f.moving)
            && fs.iter().all(|f| {
                f.edge
                    && if f.moving {
                        f.fraction >= MOTION_ACTIVE
                    } else {
                        f.fraction <= STILL_ACTIVE
                    }
            })
    })
}

/// Inputs shared by both phases.
pub struct Observation<'a> {
    pub traces: &'a BTreeMap<Mac, DeviceTrace>,
    pub imu: &'a GroundTruthTrace,
    /// Utterances played during the capture, for assistants.
    pub audio: Option<&'a GroundTruthTrace>,
}

struct Prepared {
    axes: [TimeSeries<f64>; 3],
    profile: MotionProfile,
    /// First ground-truth window, microseconds.
    start: u64,
    offset: usize,
}

fn prepare(obs: &Observation, cfg: &DetectConfig) -> Result<Prepared> {
    obs.imu.validate()?;
    // Traffic past the end of the capture is unobserved, so an offset sweep
    // only has truth for the windows whose shifted traffic was captured.
    let full = obs.imu.span();
    let shift = cfg.sweep.lag_offset as u64 * cfg.window_us;
    let span = Span::new(full.start, full.end.saturating_sub(shift).max(full.start));
    let axes = resample_ground_truth::<f64>(obs.imu, span, cfg.window_us)?.axes;
    let profile = MotionProfile::from_imu(obs.imu, span, cfg.window_us, &cfg.motion)?;
    Ok(Prepared {
        axes,
        profile,
        start: span.start,
        offset: cfg.sweep.lag_offset,
    })
}

fn evaluate_device(
    trace: &DeviceTrace,
    obs: &Observation,
    prep: &Prepared,
    cfg: &DetectConfig,
) -> Result<(DeviceClass, bool, Evidence)> {
    let n = prep.axes[0].len();
    let o = prep.offset;
    // Traffic is windowized over the ground-truth span extended by the offset,
    // then advanced by the offset so window i of traffic pairs with window i of truth.
    let span = Span::new(prep.start, prep.start + (n + o) as u64 * cfg.window_us);
    let full = windowize::<f64>(&deduplicate(trace), span, cfg.window_us)?;
    let traffic = full.slice(o, o + n);
    let traffic = TimeSeries::new(prep.start, cfg.window_us, traffic.values)?;
    let class = classify_series(&traffic, &cfg.bursts);
    Ok(match class {
        DeviceClass::Raw => {
            let y = suppress_iframes(&traffic)?;
            let sweep = SweepConfig {
                lag_offset: 0,
                ..cfg.sweep
            };
            let verdict = granger_sweep(&y, &prep.axes, &sweep)?;
            let aligned = activity_aligned(&y, &prep.profile);
            (class, verdict.monitoring && aligned, Evidence::Raw { verdict, aligned })
        }
        DeviceClass::Event => {
            let motion = event_causality(trace.mac, &prep.profile, &traffic, &cfg.bursts);
            let ev = match obs.audio {
                Some(a) if !motion.verdict => {
                    let audio = audio_matching(trace.mac, a, &traffic, &cfg.bursts);
                    if audio.verdict {
                        audio
                    } else {
                        motion
                    }
                }
                _ => motion,
            };
            (class, ev.verdict, Evidence::Event(ev))
        }
        DeviceClass::Silent => (class, false, Evidence::Silent),
    })
}

fn run(
    phase: Phase,
    obs: &Observation,
    prep: &Prepared,
    db: &OuiDatabase,
    log: &mut DiscoveryLog,
    cfg: &DetectConfig,
) -> Result<DetectionReport> {
    let mut devices = Vec::with_capacity(obs.traces.len());
    for (mac, trace) in obs.traces {
        let (class, monitoring, evidence) = evaluate_device(trace, obs, prep, cfg)?;
        let (vendor, category) = oui_lookup(db, *mac, log);
        devices.push(DeviceReport {
            mac: *mac,
            class,
            monitoring,
            evidence,
            vendor,
            category,
        });
    }
    Ok(DetectionReport { phase, devices })
}

/// Detection over natural user motion.
///
/// Requires at least `min_background_s` of ground truth containing both
/// motion and a stop of at least 5 s.
pub fn background_detect(
    obs: &Observation,
    db: &OuiDatabase,
    log: &mut DiscoveryLog,
    cfg: &DetectConfig,
) -> Result<DetectionReport> {
    let prep = prepare(obs, cfg)?;
    let secs = obs.imu.span().len_us() as f64 / US_PER_S as f64;
    if secs < cfg.min_background_s {
        return Err(Error::InsufficientActivity(format!(
            "ground truth covers {secs:.1} s, need {:.0} s",
            cfg.min_background_s
        )));
    }
    prep.profile.require_natural_activity()?;
    run(Phase::Background, obs, &prep, db, log, cfg)
}

/// Detection over a stop-start-stop-start-stop perturbation.
pub fn active_detect(
    obs: &Observation,
    db: &OuiDatabase,
    log: &mut DiscoveryLog,
    cfg: &DetectConfig,
) -> Result<DetectionReport> {
    let prep = prepare(obs, cfg)?;
    prep.profile.s5_motion()?;
    run(Phase::Active, obs, &prep, db, log, cfg)
}

/// Runs the requested phase.
pub fn detect(
    phase: Phase,
    obs: &Observation,
    db: &OuiDatabase,
    log: &mut DiscoveryLog,
    cfg: &DetectConfig,
) -> Result<DetectionReport> {
    match phase {
        Phase::Background => background_detect(obs, db, log, cfg),
        Phase::Active => active_detect(obs, db, log, cfg),
    }
}
