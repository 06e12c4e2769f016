//! Seeded experiment batches and the acceptance summary table.
//!
//! Every experiment is a pure function of its seeds, so a row printed by
//! `evaluate` can be reproduced from the seed range shown next to it.

use std::fmt::{self, Write as _};
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Deserialize;

use crate::causality::{
    audio_event_causality, detect_bursts, discover_timeout, elevated_intervals, f_cdf, granger_test_slices,
    BurstConfig, ElevatedConfig,
};
use crate::cli::{cmd_detect, simulation_files, DetectArgs};
use crate::detect::{active_detect, DetectConfig, DetectionReport, DiscoveryLog, Observation, OuiDatabase};
use crate::error::{Error, Result};
use crate::localize::{
    localize, map_coverage, LocalizeConfig, LocalizeStatus, OracleWorld, SimulatedWorld, DEFAULT_CELL_M,
};
use crate::sim::presets::{
    audio_phrases, countermeasure_case, drop_ins, fig8_camera, fig8_probes, fig8_room, innocuous_only,
    localization_case, motion_timeout, performance_scenario, s5_in_coverage,
};
use crate::sim::{generate, rng_stream, Countermeasure, Modality, Scenario, World};
use crate::trace::{deduplicate, windowize, Mac, Span, DEFAULT_WINDOW_US, US_PER_S};

/// Hits out of trials.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Rate {
    pub hits: usize,
    pub total: usize,
}

impl Rate {
    pub fn add(&mut self, hit: bool) {
        self.total += 1;
        self.hits += usize::from(hit);
    }

    pub fn fraction(self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.hits as f64 / self.total as f64
        }
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} ({:.1}%)", self.hits, self.total, 100.0 * self.fraction())
    }
}

/// One line of the summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub criterion: u8,
    pub batch: String,
    pub metric: String,
    pub measured: String,
    pub target: String,
    pub seeds: Range<u64>,
    pub pass: bool,
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} | {} | {} | {} | {} | seeds {}..{} | {}",
            self.criterion,
            self.batch,
            self.metric,
            self.measured,
            self.target,
            self.seeds.start,
            self.seeds.end,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Header plus one line per row.
pub fn format_rows(rows: &[Row]) -> String {
    let mut s = String::from("criterion | batch | metric | measured | target | seeds | result\n");
    for r in rows {
        let _ = writeln!(s, "{r}");
    }
    s
}

fn detect_world(
    world: &World,
    traces_override: Option<(Mac, crate::trace::DeviceTrace)>,
    cfg: &DetectConfig,
) -> Result<DetectionReport> {
    let mut traces = world.traces.clone();
    if let Some((mac, t)) = traces_override {
        traces.insert(mac, t);
    }
    let obs = Observation {
        traces: &traces,
        imu: &world.imu,
        audio: None,
    };
    active_detect(&obs, &OuiDatabase::builtin(), &mut DiscoveryLog::default(), cfg)
}

// ---------------------------------------------------------------------------
// Statistics core against an independent implementation.

/// Residual sum of squares by Householder QR on an explicit design matrix.
pub fn qr_rss(columns: &[Vec<f64>], y: &[f64]) -> f64 {
    let rows = y.len();
    let k = columns.len();
    let mut a: Vec<Vec<f64>> = columns.to_vec();
    let mut b = y.to_vec();
    for j in 0..k.min(rows) {
        let norm = (j..rows).map(|i| a[j][i] * a[j][i]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (j..rows).map(|i| a[j][i]).collect();
        v[0] -= alpha;
        let vn = v.iter().map(|x| x * x).sum::<f64>();
        if vn == 0.0 {
            continue;
        }
        for col in a.iter_mut().skip(j) {
            let d = (j..rows).map(|i| v[i - j] * col[i]).sum::<f64>() * 2.0 / vn;
            for i in j..rows {
                col[i] -= d * v[i - j];
            }
        }
        let d = (j..rows).map(|i| v[i - j] * b[i]).sum::<f64>() * 2.0 / vn;
        for i in j..rows {
            b[i] -= d * v[i - j];
        }
    }
    b[k.min(rows)..].iter().map(|x| x * x).sum()
}

/// Granger F statistic computed with [`qr_rss`].
pub fn reference_f(y: &[f64], x: &[f64], n: usize, m: usize) -> f64 {
    let p = n.max(m);
    let rows = y.len() - p;
    let target: Vec<f64> = y[p..].to_vec();
    let mut cols = vec![vec![1.0; rows]];
    for k in 1..=n {
        cols.push((p..y.len()).map(|t| y[t - k]).collect());
    }
    let rss_r = qr_rss(&cols, &target);
    for k in 1..=m {
        cols.push((p..y.len()).map(|t| x[t - k]).collect());
    }
    let rss_a = qr_rss(&cols, &target);
    let df2 = (rows - n - m - 1) as f64;
    ((rss_r - rss_a) / m as f64) / (rss_a / df2)
}

fn ln_gamma_stirling(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    shift + (x - 0.5) * x.ln() - x
        + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// Adaptive Simpson on `[a, b]` given the integrand at `a`, the midpoint and `b`.
fn simpson(f: &dyn Fn(f64) -> f64, (a, b): (f64, f64), [fa, fm, fb]: [f64; 3], tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let flm = f(0.5 * (a + m));
    let frm = f(0.5 * (m + b));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson(f, (a, m), [fa, flm, fm], tol / 2.0, depth - 1) + simpson(f, (m, b), [fm, frm, fb], tol / 2.0, depth - 1)
}

/// F distribution CDF by adaptive Simpson quadrature of the density.
///
/// Integrates in `t = sqrt(u)` so the integrand stays finite at zero.
pub fn reference_f_cdf(f: f64, d1: f64, d2: f64) -> f64 {
    if f <= 0.0 {
        return 0.0;
    }
    let ln_b = ln_gamma_stirling(d1 / 2.0) + ln_gamma_stirling(d2 / 2.0) - ln_gamma_stirling((d1 + d2) / 2.0);
    let dens = move |t: f64| {
        if t <= 0.0 {
            return if d1 == 1.0 {
                2.0 * (0.5 * (1.0 / d2).ln() - ln_b).exp()
            } else {
                0.0
            };
        }
        let u = t * t;
        let ln_p =
            0.5 * d1 * (d1 / d2).ln() + (0.5 * d1 - 1.0) * u.ln() - 0.5 * (d1 + d2) * (1.0 + d1 * u / d2).ln() - ln_b;
        2.0 * t * ln_p.exp()
    };
    let b = f.sqrt();
    simpson(&dens, (0.0, b), [dens(0.0), dens(b / 2.0), dens(b)], 1e-13, 50)
}

/// Worst deviations of the statistics core from the reference implementations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleCheck {
    pub pairs: usize,
    pub max_f_rel_err: f64,
    pub max_cdf_abs_err: f64,
    pub elapsed: Duration,
}

/// Compares `granger_test` and `f_cdf` with [`reference_f`] and
/// [`reference_f_cdf`] on `pairs` random series pairs of length 40 to 200.
pub fn oracle_equivalence(seed: u64, pairs: usize) -> Result<OracleCheck> {
    let start = Instant::now();
    let mut rng = rng_stream(seed, 0x0eac1e);
    let mut max_f: f64 = 0.0;
    let mut max_cdf: f64 = 0.0;
    for _ in 0..pairs {
        let len = rng.random_range(40..=200);
        let n = rng.random_range(1..=4);
        let m = rng.random_range(1..=4);
        let beta: f64 = rng.random_range(-0.8..0.8);
        let mut x = Vec::with_capacity(len);
        let mut y = Vec::with_capacity(len);
        for t in 0..len {
            let e: f64 = StandardNormal.sample(&mut rng);
            let g: f64 = StandardNormal.sample(&mut rng);
            x.push(e);
            let prev = if t > 0 { y[t - 1] } else { 0.0 };
            let xl = if t > 0 { x[t - 1] } else { 0.0 };
            y.push(0.4 * prev + beta * xl + g);
        }
        let r = granger_test_slices(&y, &x, n, m)?;
        let want = reference_f(&y, &x, n, m);
        max_f = max_f.max((r.f_stat - want).abs() / want.abs().max(1e-12));
        let (d1, d2) = (r.df.0 as f64, r.df.1 as f64);
        let q = rng.random_range(0.05..6.0);
        max_cdf = max_cdf.max((f_cdf(q, d1, d2) - reference_f_cdf(q, d1, d2)).abs());
    }
    Ok(OracleCheck {
        pairs,
        max_f_rel_err: max_f,
        max_cdf_abs_err: max_cdf,
        elapsed: start.elapsed(),
    })
}

// ---------------------------------------------------------------------------
// Detection.

/// Modality used for a seed in mixed camera and radar batches.
pub fn mixed_modality(seed: u64) -> Modality {
    if seed.is_multiple_of(2) {
        Modality::Camera
    } else {
        Modality::Rf
    }
}

/// Active-phase detections of a sensor in coverage, one scenario per seed.
pub fn detection_rate(seeds: Range<u64>, modality: Option<Modality>) -> Result<Rate> {
    let mut rate = Rate::default();
    for s in seeds {
        let sc = s5_in_coverage(s, modality.unwrap_or_else(|| mixed_modality(s)));
        let mac = sc.sensors[0].mac;
        let w = generate(&sc)?;
        let r = detect_world(&w, None, &DetectConfig::default())?;
        rate.add(r.device(mac).is_some_and(|d| d.monitoring));
    }
    Ok(rate)
}

/// Scenarios with any device flagged, among rooms holding only innocuous
/// devices and a camera next door; (active phase, background phase).
pub fn false_positive_rates(seeds: Range<u64>) -> Result<(Rate, Rate)> {
    let mut active = Rate::default();
    let mut background = Rate::default();
    let db = OuiDatabase::builtin();
    let cfg = DetectConfig::default();
    for s in seeds {
        for (is_active, rate) in [(true, &mut active), (false, &mut background)] {
            let w = generate(&innocuous_only(s, is_active))?;
            let obs = Observation {
                traces: &w.traces,
                imu: &w.imu,
                audio: None,
            };
            let phase = if is_active {
                crate::detect::Phase::Active
            } else {
                crate::detect::Phase::Background
            };
            let r = crate::detect::detect(phase, &obs, &db, &mut DiscoveryLog::default(), &cfg)?;
            rate.add(r.flagged().next().is_some());
        }
    }
    Ok((active, background))
}

/// Configured timeouts cycled through by the timeout batch.
pub const TIMEOUTS_S: [f64; 4] = [30.0, 60.0, 120.0, 180.0];

/// Seeds whose motion sensor also sends a status upload while the user is still.
pub fn has_status_upload(seed: u64) -> bool {
    seed % 8 == 3
}

/// Timeout recoveries within one window of the configured value.
pub fn timeout_recovery(seeds: Range<u64>) -> Result<Rate> {
    let mut rate = Rate::default();
    let window_s = DEFAULT_WINDOW_US as f64 / US_PER_S as f64;
    for (i, s) in seeds.enumerate() {
        let t = TIMEOUTS_S[i % TIMEOUTS_S.len()];
        let sc = motion_timeout(s, t, has_status_upload(s));
        let w = generate(&sc)?;
        let e = discover_timeout(&w.imu, &w.traces[&sc.sensors[0].mac])?;
        rate.add(e.verdict && e.timeout_s.is_some_and(|x| (x - t).abs() <= window_s + 1e-9));
    }
    Ok(rate)
}

/// Outcomes of the assistant experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AudioCheck {
    /// Matched events and bursts for four wake-phrase utterances.
    pub four: (usize, usize),
    pub phrases: Rate,
    /// Elevated intervals found for three drop-ins.
    pub drop_ins: usize,
}

fn assistant_series(sc: &Scenario, w: &World) -> Result<crate::trace::TimeSeries<f64>> {
    let mac = sc.sensors[0].mac;
    windowize::<f64>(
        &deduplicate(&w.traces[&mac]),
        Span::new(0, w.span.end),
        DEFAULT_WINDOW_US,
    )
}

/// Four-utterance event count, phrase verdicts over `seeds` (three to five
/// utterances each) and the drop-in count for `seeds.start`.
pub fn audio_checks(seeds: Range<u64>) -> Result<AudioCheck> {
    let sc = audio_phrases(seeds.start, 4, true);
    let w = generate(&sc)?;
    let e = audio_event_causality(&w.audio, &w.traces[&sc.sensors[0].mac])?;
    let bursts = detect_bursts(&assistant_series(&sc, &w)?, &BurstConfig::default()).len();
    let mut phrases = Rate::default();
    for s in seeds.clone() {
        let sc = audio_phrases(s, 3 + (s % 3) as usize, true);
        let w = generate(&sc)?;
        phrases.add(audio_event_causality(&w.audio, &w.traces[&sc.sensors[0].mac])?.verdict);
    }
    let sc = drop_ins(seeds.start, 3);
    let w = generate(&sc)?;
    let d = elevated_intervals(&assistant_series(&sc, &w)?, &ElevatedConfig::default()).len();
    Ok(AudioCheck {
        four: (e.matched, bursts),
        phrases,
        drop_ins: d,
    })
}

// ---------------------------------------------------------------------------
// Localization.

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LocalizationCheck {
    pub runs: usize,
    pub not_localizable: usize,
    /// Final area at most the threshold fraction of the room.
    pub small: usize,
    /// True sensor cell still a candidate.
    pub contained: usize,
    /// At most one trial fewer than the initial candidate cells.
    pub within_budget: usize,
    pub worst_area_fraction: f64,
    pub fig8_area: f64,
    pub fig8_trials: usize,
    pub fig8_contained: bool,
}

/// Noise-free localization over random rooms plus the corner-camera walk-through
/// run on simulated traffic.
pub fn localization_check(seeds: Range<u64>) -> Result<LocalizationCheck> {
    let cfg = LocalizeConfig::default();
    let mut c = LocalizationCheck::default();
    for s in seeds.clone() {
        let case = localization_case(s);
        let mut w = OracleWorld {
            room: case.room.clone(),
            sensor: case.sensor.clone(),
        };
        c.runs += 1;
        let mut st = match map_coverage(&mut w, &case.probes, DEFAULT_CELL_M) {
            Ok(st) => st,
            Err(Error::NotLocalizable(_)) => {
                c.not_localizable += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let loc = localize(&mut w, &mut st, &cfg)?;
        let frac = loc.final_area() / loc.room_area;
        c.worst_area_fraction = c.worst_area_fraction.max(frac);
        c.small += usize::from(loc.status == LocalizeStatus::Converged && frac <= cfg.threshold + 1e-12);
        let cell = loc.candidates.cell_of(case.sensor.position);
        c.contained += usize::from(loc.candidates.contains_cell(cell));
        c.within_budget += usize::from(loc.trials.len() < loc.initial.count().max(1));
    }
    let mut w = SimulatedWorld::new(fig8_room(), fig8_camera(), seeds.start);
    let mut st = map_coverage(&mut w, &fig8_probes(), DEFAULT_CELL_M)?;
    let loc = localize(&mut w, &mut st, &cfg)?;
    c.fig8_area = loc.final_area();
    c.fig8_trials = loc.trials.len();
    c.fig8_contained = loc.candidates.contains_cell(loc.candidates.cell_of(w.sensor.position));
    Ok(c)
}

// ---------------------------------------------------------------------------
// Countermeasures.

/// Detections of padded camera and radar traffic.
pub fn padding_rate(seeds: Range<u64>) -> Result<Rate> {
    let mut rate = Rate::default();
    for s in seeds {
        let sc = countermeasure_case(
            s,
            mixed_modality(s),
            Countermeasure::Padding { target_bytes: None },
            0.0,
        );
        let mac = sc.sensors[0].mac;
        let w = generate(&sc)?;
        let padded = w.countermeasures[0].trace.clone();
        let r = detect_world(&w, Some((mac, padded)), &DetectConfig::default())?;
        rate.add(r.device(mac).is_some_and(|d| d.monitoring));
    }
    Ok(rate)
}

/// Tape delay used by the countermeasure batch, seconds.
pub const TAPE_DELAY_S: f64 = 30.0;

/// Detections of tape-delayed traffic at the default lags and with the lag
/// offset set to the delay.
pub fn tape_delay_rates(seeds: Range<u64>) -> Result<(Rate, Rate)> {
    let mut plain = Rate::default();
    let mut shifted = Rate::default();
    let offset = (TAPE_DELAY_S * US_PER_S as f64 / DEFAULT_WINDOW_US as f64).round() as usize;
    for s in seeds {
        let cm = Countermeasure::TapeDelay { delay_s: TAPE_DELAY_S };
        let sc = countermeasure_case(s, mixed_modality(s), cm, TAPE_DELAY_S);
        let mac = sc.sensors[0].mac;
        let w = generate(&sc)?;
        let delayed = w.countermeasures[0].trace.clone();
        let def = DetectConfig::default();
        let r = detect_world(&w, Some((mac, delayed.clone())), &def)?;
        plain.add(r.device(mac).is_some_and(|d| d.monitoring));
        let mut cfg = def;
        cfg.sweep.lag_offset = offset;
        let r = detect_world(&w, Some((mac, delayed)), &cfg)?;
        shifted.add(r.device(mac).is_some_and(|d| d.monitoring));
    }
    Ok((plain, shifted))
}

// ---------------------------------------------------------------------------
// Performance.

#[derive(Debug, Clone, PartialEq)]
pub struct PerfCheck {
    pub devices: usize,
    pub packets: usize,
    /// Slower of the two end-to-end runs.
    pub elapsed: Duration,
    pub identical: bool,
}

fn scratch_dir(seed: u64) -> PathBuf {
    std::env::temp_dir().join(format!("sensorsniff-perf-{}-{seed}", std::process::id()))
}

/// Writes the busy capture to disk and times `detect` on it twice.
pub fn performance_check(seed: u64) -> Result<PerfCheck> {
    let w = generate(&performance_scenario(seed))?;
    let dir = scratch_dir(seed);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let result = (|| {
        for (name, text) in simulation_files(&w)? {
            let p = dir.join(name);
            fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
        }
        let args = DetectArgs {
            traffic: dir.join("traffic.csv"),
            imu: dir.join("imu.csv"),
            audio: None,
            oui: None,
            mode: "active".into(),
            mac: None,
            p_value: 0.08,
            window_ms: 100,
            max_lag: 20,
            lag_offset_ms: 0,
            report: None,
        };
        let t0 = Instant::now();
        let a = cmd_detect(&args)?;
        let e1 = t0.elapsed();
        let t1 = Instant::now();
        let b = cmd_detect(&args)?;
        let e2 = t1.elapsed();
        Ok(PerfCheck {
            devices: w.traces.len(),
            packets: w.traces.values().map(|t| t.len()).sum(),
            elapsed: e1.max(e2),
            identical: a == b,
        })
    })();
    let _ = fs::remove_dir_all(&dir);
    result
}

// ---------------------------------------------------------------------------
// Suites.

/// Experiment families a batch can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchKind {
    Oracle,
    Detection,
    FalsePositive,
    Timeout,
    Audio,
    Localization,
    Padding,
    TapeDelay,
    Performance,
}

impl BatchKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "oracle" => BatchKind::Oracle,
            "detection" => BatchKind::Detection,
            "false-positive" => BatchKind::FalsePositive,
            "timeout" => BatchKind::Timeout,
            "audio" => BatchKind::Audio,
            "localization" => BatchKind::Localization,
            "padding" => BatchKind::Padding,
            "tape-delay" => BatchKind::TapeDelay,
            "performance" => BatchKind::Performance,
            _ => return None,
        })
    }
}

/// A named run of one experiment over `trials` consecutive seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub name: String,
    pub kind: BatchKind,
    pub seed: u64,
    pub trials: u64,
    /// Restricts detection batches to one modality.
    pub modality: Option<Modality>,
}

impl Batch {
    pub fn new(name: &str, kind: BatchKind, seed: u64, trials: u64) -> Self {
        Batch {
            name: name.into(),
            kind,
            seed,
            trials,
            modality: None,
        }
    }

    pub fn seeds(&self) -> Range<u64> {
        self.seed..self.seed + self.trials
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBatch {
    name: String,
    kind: String,
    seed: u64,
    trials: u64,
    modality: Option<String>,
}

/// Parses a batch file.
pub fn parse_batch(text: &str) -> Result<Batch> {
    let raw: RawBatch = toml::from_str(text).map_err(|e| Error::Parse {
        line: e
            .span()
            .map_or(1, |s| text[..s.start.min(text.len())].matches('\n').count() + 1),
        msg: e.message().to_string(),
    })?;
    let kind =
        BatchKind::parse(&raw.kind).ok_or_else(|| Error::Config(format!("unknown batch kind {:?}", raw.kind)))?;
    let modality = match raw.modality {
        Some(m) => Some(Modality::parse(&m).ok_or_else(|| Error::Config(format!("unknown modality {m:?}")))?),
        None => None,
    };
    Ok(Batch {
        name: raw.name,
        kind,
        seed: raw.seed,
        trials: raw.trials,
        modality,
    })
}

/// Reads every `*.toml` batch in `dir`, ordered by batch name.
///
/// Files that cannot be read or parsed are skipped and reported as warnings.
pub fn read_suite(dir: &Path) -> Result<(Vec<Batch>, Vec<String>)> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    let mut batches = Vec::new();
    let mut warnings = Vec::new();
    for p in paths {
        match fs::read_to_string(&p)
            .map_err(|e| Error::io(&p, e))
            .and_then(|t| parse_batch(&t))
        {
            Ok(b) => batches.push(b),
            Err(e) => warnings.push(format!("skipping {}: {e}", p.display())),
        }
    }
    batches.sort_by(|a, b| a.name.cmp(&b.name));
    Ok((batches, warnings))
}

/// The batches covering every acceptance criterion.
pub fn default_suite() -> Vec<Batch> {
    vec![
        Batch::new("c1-oracle", BatchKind::Oracle, 0, 20),
        Batch::new("c2-detection", BatchKind::Detection, 0, 100),
        Batch::new("c3-false-positive", BatchKind::FalsePositive, 0, 50),
        Batch::new("c4-timeout", BatchKind::Timeout, 0, 25),
        Batch::new("c5-audio", BatchKind::Audio, 0, 35),
        Batch::new("c6-localization", BatchKind::Localization, 0, 200),
        Batch::new("c7-padding", BatchKind::Padding, 0, 100),
        Batch::new("c7-tape-delay", BatchKind::TapeDelay, 0, 20),
        Batch::new("c8-performance", BatchKind::Performance, 0, 1),
    ]
}

fn row(criterion: u8, b: &Batch, metric: &str, measured: String, target: &str, pass: bool) -> Row {
    Row {
        criterion,
        batch: b.name.clone(),
        metric: metric.into(),
        measured,
        target: target.into(),
        seeds: b.seeds(),
        pass,
    }
}

/// Runs one batch and returns its table rows.
pub fn run_batch(b: &Batch) -> Result<Vec<Row>> {
    let seeds = b.seeds();
    Ok(match b.kind {
        BatchKind::Oracle => {
            let c = oracle_equivalence(b.seed, b.trials as usize)?;
            vec![
                row(
                    1,
                    b,
                    "F statistic max relative error",
                    format!("{:.2e}", c.max_f_rel_err),
                    "<= 1e-6",
                    c.max_f_rel_err <= 1e-6,
                ),
                row(
                    1,
                    b,
                    "F CDF max absolute error",
                    format!("{:.2e}", c.max_cdf_abs_err),
                    "<= 1e-8",
                    c.max_cdf_abs_err <= 1e-8,
                ),
                row(
                    1,
                    b,
                    "runtime",
                    format!("{:.3} s", c.elapsed.as_secs_f64()),
                    "< 5 s",
                    c.elapsed < Duration::from_secs(5),
                ),
            ]
        }
        BatchKind::Detection => {
            let r = detection_rate(seeds, b.modality)?;
            vec![row(
                2,
                b,
                "active detections",
                r.to_string(),
                ">= 90%",
                r.fraction() >= 0.90,
            )]
        }
        BatchKind::FalsePositive => {
            let (a, g) = false_positive_rates(seeds)?;
            vec![
                row(
                    3,
                    b,
                    "active false positives",
                    a.to_string(),
                    "<= 4%",
                    a.fraction() <= 0.04,
                ),
                row(
                    3,
                    b,
                    "background false positives",
                    g.to_string(),
                    "<= 20%",
                    g.fraction() <= 0.20,
                ),
            ]
        }
        BatchKind::Timeout => {
            let r = timeout_recovery(seeds)?;
            let need = (b.trials as f64 * 22.0 / 25.0).ceil() as usize;
            vec![row(
                4,
                b,
                "timeouts recovered within one window",
                r.to_string(),
                &format!(">= {need}/{}", b.trials),
                r.hits >= need,
            )]
        }
        BatchKind::Audio => {
            let c = audio_checks(seeds)?;
            vec![
                row(
                    5,
                    b,
                    "four utterances: matched, bursts",
                    format!("{}, {}", c.four.0, c.four.1),
                    "4, 4",
                    c.four == (4, 4),
                ),
                row(
                    5,
                    b,
                    "phrase verdicts",
                    c.phrases.to_string(),
                    "100%",
                    c.phrases.hits == c.phrases.total,
                ),
                row(5, b, "drop-in intervals", c.drop_ins.to_string(), "3", c.drop_ins == 3),
            ]
        }
        BatchKind::Localization => {
            let c = localization_check(seeds)?;
            let n = c.runs;
            vec![
                row(
                    6,
                    b,
                    "final area <= 10% of room",
                    format!("{}/{n} (worst {:.1}%)", c.small, 100.0 * c.worst_area_fraction),
                    "all",
                    c.small == n,
                ),
                row(
                    6,
                    b,
                    "sensor cell contained",
                    format!("{}/{n}", c.contained),
                    "all",
                    c.contained == n,
                ),
                row(
                    6,
                    b,
                    "trials <= cells - 1",
                    format!("{}/{n}", c.within_budget),
                    "all",
                    c.within_budget == n && c.not_localizable == 0,
                ),
                row(
                    6,
                    b,
                    "walk-through area, trials",
                    format!(
                        "{:.2} m2, {} (contained {})",
                        c.fig8_area, c.fig8_trials, c.fig8_contained
                    ),
                    "<= 4 m2, <= 6",
                    c.fig8_area <= 4.0 && c.fig8_trials <= 6 && c.fig8_contained,
                ),
            ]
        }
        BatchKind::Padding => {
            let r = padding_rate(seeds)?;
            vec![row(
                7,
                b,
                "padded detections",
                r.to_string(),
                "<= 10%",
                r.fraction() <= 0.10,
            )]
        }
        BatchKind::TapeDelay => {
            let (plain, shifted) = tape_delay_rates(seeds)?;
            vec![
                row(
                    7,
                    b,
                    "delayed detections, default lags",
                    plain.to_string(),
                    "<= 10%",
                    plain.fraction() <= 0.10,
                ),
                row(
                    7,
                    b,
                    "delayed detections, offset lags",
                    shifted.to_string(),
                    ">= 90%",
                    shifted.fraction() >= 0.90,
                ),
            ]
        }
        BatchKind::Performance => {
            let c = performance_check(b.seed)?;
            vec![
                row(
                    8,
                    b,
                    "detect wall time",
                    format!(
                        "{:.3} s ({} devices, {} packets)",
                        c.elapsed.as_secs_f64(),
                        c.devices,
                        c.packets
                    ),
                    "< 1 s",
                    c.elapsed < Duration::from_secs(1),
                ),
                row(8, b, "reports identical", c.identical.to_string(), "true", c.identical),
            ]
        }
    })
}

/// Runs batches in order; rows follow batch order.
pub fn run_suite(batches: &[Batch]) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for b in batches {
        rows.extend(run_batch(b)?);
    }
    Ok(rows)
}
