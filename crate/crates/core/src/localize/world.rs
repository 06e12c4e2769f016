//! Sources of probe and trial outcomes.

use rand_distr::{Distribution, Normal};

use crate::causality::{detect_bursts, BurstConfig};
use crate::detect::{
    active_detect, classify_series, DetectConfig, DeviceClass, DiscoveryLog, Evidence, Observation, OuiDatabase,
};
use crate::error::{Error, Result};
use crate::sim::presets::{s5_actions, WAKE_PHRASE};
use crate::sim::{
    coverage_oracle, generate, rng_stream, sequential, stimulus_reaches, Action, Modality, Point, Polygon, Scenario,
    SensorPlacement, Stimulus, DEFAULT_DEAD_RECKONING_SIGMA,
};
use crate::trace::{deduplicate, windowize, DeviceTrace, Span, DEFAULT_WINDOW_US, US_PER_S};

/// Default length of a directional trial, seconds.
pub const TRIAL_DURATION_S: f64 = 30.0;

/// A directional perturbation performed at a known position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSpec {
    pub position: Point,
    /// Direction the stimulus is aimed, degrees.
    pub heading: f64,
    pub stimulus: Stimulus,
    pub duration_s: f64,
}

/// Stimulus that elicits a directional response from a modality.
pub fn trial_stimulus(m: Modality) -> Stimulus {
    match m {
        Modality::Camera => Stimulus::LaptopFlash,
        Modality::Rf | Modality::Motion => Stimulus::HandWave,
        Modality::Audio => Stimulus::Speak { volume: 1 },
    }
}

/// Something that answers localization questions about one sensor.
pub trait ProbeWorld {
    fn room(&self) -> &Polygon;
    fn modality(&self) -> Modality;
    /// Whether an S5 perturbation performed at `p` is detected.
    fn probe(&mut self, p: Point) -> Result<bool>;
    /// Whether a directional trial is detected.
    fn trial(&mut self, t: &TrialSpec) -> Result<bool>;
    /// Whether the wake phrase played at `p` at `volume` triggers a response.
    fn playback(&mut self, p: Point, volume: u32) -> Result<bool>;
}

/// Noise-free outcomes computed from sensor geometry.
#[derive(Debug, Clone)]
pub struct OracleWorld {
    pub room: Polygon,
    pub sensor: SensorPlacement,
}

impl ProbeWorld for OracleWorld {
    fn room(&self) -> &Polygon {
        &self.room
    }

    fn modality(&self) -> Modality {
        self.sensor.modality()
    }

    fn probe(&mut self, p: Point) -> Result<bool> {
        Ok(coverage_oracle(&self.sensor, p, Stimulus::S5))
    }

    fn trial(&mut self, t: &TrialSpec) -> Result<bool> {
        Ok(coverage_oracle(&self.sensor, t.position, t.stimulus)
            && stimulus_reaches(t.position, t.heading, self.sensor.position))
    }

    fn playback(&mut self, p: Point, volume: u32) -> Result<bool> {
        Ok(coverage_oracle(&self.sensor, p, Stimulus::Speak { volume }))
    }
}

const TAG_LOCALIZE: u64 = 9 << 56;
const TRIAL_RATIO: f64 = 1.5;
const TRIAL_BASELINE_S: f64 = 30.0;
const PLAYBACK_SLACK_S: f64 = 5.0;

/// Outcomes obtained by simulating each experiment and running detection on
/// the resulting traffic.
///
/// The user aims for the requested point but lands off it by a Gaussian
/// dead-reckoning error.
#[derive(Debug, Clone)]
pub struct SimulatedWorld {
    pub room: Polygon,
    pub sensor: SensorPlacement,
    pub seed: u64,
    pub sigma: f64,
    pub detect: DetectConfig,
    runs: u64,
    db: OuiDatabase,
}

impl SimulatedWorld {
    pub fn new(room: Polygon, sensor: SensorPlacement, seed: u64) -> Self {
        SimulatedWorld {
            room,
            sensor,
            seed,
            sigma: DEFAULT_DEAD_RECKONING_SIGMA,
            detect: DetectConfig::default(),
            runs: 0,
            db: OuiDatabase::builtin(),
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    /// Number of experiments simulated so far.
    pub fn runs(&self) -> u64 {
        self.runs
    }

    fn next_seed(&mut self) -> u64 {
        self.runs += 1;
        self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(self.runs)
    }

    fn actual(&self, p: Point, seed: u64) -> Point {
        if self.sigma <= 0.0 {
            return p;
        }
        let mut r = rng_stream(seed, TAG_LOCALIZE);
        let n = Normal::new(0.0, self.sigma).expect("positive sigma");
        let q = Point::new(p.x + n.sample(&mut r), p.y + n.sample(&mut r));
        if self.room.contains(q) {
            q
        } else {
            self.room.closest_boundary_point(q)
        }
    }

    fn run(&mut self, at: Point, actions: Vec<Action>) -> Result<DeviceTrace> {
        let seed = self.next_seed();
        let start = self.actual(at, seed);
        let mut sc = Scenario::new(seed, self.room.clone(), start);
        sc.dead_reckoning_sigma = 0.0;
        sc.sensors.push(self.sensor.clone());
        let sc = sc.with_script(sequential(0.0, actions, start));
        let mut w = generate(&sc)?;
        let trace = w
            .traces
            .remove(&self.sensor.mac)
            .ok_or_else(|| Error::UnknownDevice(self.sensor.mac.to_string()))?;
        Ok(trace)
    }
}

fn window_mean(v: &[f64], from_s: f64, to_s: f64, window_us: u64) -> f64 {
    let per_s = US_PER_S as f64 / window_us as f64;
    let a = ((from_s * per_s) as usize).min(v.len());
    let b = ((to_s * per_s) as usize).min(v.len());
    if b <= a {
        return 0.0;
    }
    v[a..b].iter().sum::<f64>() / (b - a) as f64
}

impl ProbeWorld for SimulatedWorld {
    fn room(&self) -> &Polygon {
        &self.room
    }

    fn modality(&self) -> Modality {
        self.sensor.modality()
    }

    fn probe(&mut self, p: Point) -> Result<bool> {
        let seed = self.next_seed();
        let start = self.actual(p, seed);
        let mut sc = Scenario::new(seed, self.room.clone(), start);
        sc.dead_reckoning_sigma = 0.0;
        sc.sensors.push(self.sensor.clone());
        let sc = sc.with_script(sequential(0.0, s5_actions(), start));
        let w = generate(&sc)?;
        let obs = Observation {
            traces: &w.traces,
            imu: &w.imu,
            audio: None,
        };
        let mut log = DiscoveryLog::default();
        let rep = active_detect(&obs, &self.db, &mut log, &self.detect)?;
        let d = rep
            .device(self.sensor.mac)
            .ok_or_else(|| Error::UnknownDevice(self.sensor.mac.to_string()))?;
        Ok(match &d.evidence {
            Evidence::Raw { .. } => d.monitoring,
            Evidence::Event(e) => e.matched >= 1,
            Evidence::Silent => false,
        })
    }

    fn trial(&mut self, t: &TrialSpec) -> Result<bool> {
        let act = match t.stimulus {
            Stimulus::LaptopFlash => Action::LaptopFlash {
                heading: t.heading,
                duration: t.duration_s,
            },
            Stimulus::HandWave => Action::HandWave {
                heading: t.heading,
                duration: t.duration_s,
            },
            other => return Err(Error::Config(format!("{} is not a directional trial", other.name()))),
        };
        let actions = vec![
            Action::Still {
                duration: TRIAL_BASELINE_S,
            },
            act,
            Action::Still { duration: 2.0 },
        ];
        let trace = self.run(t.position, actions)?;
        let w = self.detect.window_us;
        let end = TRIAL_BASELINE_S + t.duration_s + 2.0;
        let series = windowize::<f64>(&deduplicate(&trace), Span::new(0, (end * US_PER_S as f64) as u64), w)?;
        Ok(match classify_series(&series, &self.detect.bursts) {
            DeviceClass::Raw => {
                let base = window_mean(&series.values, 1.0, TRIAL_BASELINE_S, w);
                let during = window_mean(
                    &series.values,
                    TRIAL_BASELINE_S + 0.5,
                    TRIAL_BASELINE_S + t.duration_s,
                    w,
                );
                during > TRIAL_RATIO * base
            }
            DeviceClass::Event | DeviceClass::Silent => {
                let from = series
                    .index_of((TRIAL_BASELINE_S * US_PER_S as f64) as u64)
                    .unwrap_or(0);
                detect_bursts(&series, &self.detect.bursts)
                    .iter()
                    .any(|b| b.start >= from)
            }
        })
    }

    fn playback(&mut self, p: Point, volume: u32) -> Result<bool> {
        let speak_at = 5.0;
        let dur = 3.0;
        let actions = vec![
            Action::Still { duration: speak_at },
            Action::Speak {
                phrase: WAKE_PHRASE.into(),
                volume,
                duration: dur,
            },
            Action::Still {
                duration: PLAYBACK_SLACK_S + 5.0,
            },
        ];
        let trace = self.run(p, actions)?;
        let end = speak_at + dur + PLAYBACK_SLACK_S + 5.0;
        let w = DEFAULT_WINDOW_US;
        let series = windowize::<f64>(&deduplicate(&trace), Span::new(0, (end * US_PER_S as f64) as u64), w)?;
        let bursts = detect_bursts(&series, &BurstConfig::default());
        let lo = (speak_at * US_PER_S as f64) as u64;
        let hi = ((speak_at + dur + PLAYBACK_SLACK_S) * US_PER_S as f64) as u64;
        Ok(bursts.iter().any(|b| {
            let t = series.window_start(b.start);
            t >= lo && t <= hi
        }))
    }
}
