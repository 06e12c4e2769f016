//! Command-line front end.
//!
//! Each command is a library function returning the text it prints, so the
//! binary and direct callers produce identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::causality::SweepConfig;
use crate::detect::{detect, format_report, DetectConfig, DiscoveryLog, Observation, OuiDatabase, Phase};
use crate::error::{Error, Result};
use crate::eval;
use crate::localize::{
    audio_localize, format_audio_localization, format_localization, localize, map_coverage, LocalizeConfig,
    OracleWorld, ProbeWorld, SimulatedWorld,
};
use crate::sim::{generate, read_scenario, Modality, Point, Polygon, Scenario, World};
use crate::trace::{
    format_audio_events, format_imu, format_packets, group_by_device, read_ground_truth, read_packets, DeviceTrace,
    GroundTruthTrace, Mac, Span,
};

#[derive(Debug, Parser)]
#[command(name = "sensorsniff", version, about = "Detect and localize hidden wireless sensors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate traffic, ground truth and user path from a scenario file.
    Simulate(SimulateArgs),
    /// Flag devices whose traffic is caused by the user's motion or speech.
    Detect(DetectArgs),
    /// Estimate where a sensor is from probes and directional trials.
    Localize(LocalizeArgs),
    /// Run seeded experiment batches and print the summary table.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Replaces the scenario's seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct DetectArgs {
    /// Packet trace of every device.
    #[arg(long)]
    pub traffic: PathBuf,
    /// Accelerometer ground truth.
    #[arg(long)]
    pub imu: PathBuf,
    /// Utterance ground truth for assistants.
    #[arg(long)]
    pub audio: Option<PathBuf>,
    /// Vendor table replacing the built-in one.
    #[arg(long)]
    pub oui: Option<PathBuf>,
    /// `background` or `active`.
    #[arg(long, default_value = "active")]
    pub mode: String,
    /// Only report this device.
    #[arg(long)]
    pub mac: Option<String>,
    #[arg(long = "p-value", default_value_t = 0.08)]
    pub p_value: f64,
    #[arg(long = "window-ms", default_value_t = 100)]
    pub window_ms: u64,
    /// Largest lag tested, in windows.
    #[arg(long = "max-lag", default_value_t = 20)]
    pub max_lag: usize,
    /// Delay between motion and traffic tested on top of the lags, ms.
    #[arg(long = "lag-offset-ms", default_value_t = 0)]
    pub lag_offset_ms: u64,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct LocalizeArgs {
    /// Scenario describing the room, the sensor and the traversal points.
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub mac: String,
    /// Stop once the candidate area is at most this fraction of the room.
    #[arg(long, default_value_t = 0.10)]
    pub threshold: f64,
    #[arg(long = "cell-m", default_value_t = 0.25)]
    pub cell_m: f64,
    /// Replaces the scenario's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Answer probes from sensor geometry instead of simulated traffic.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Directory of batch files; the built-in suite when omitted.
    #[arg(long)]
    pub suite: Option<PathBuf>,
    /// Offsets every batch's first seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Exit status for an error: 2 configuration or input format, 3 not enough
/// user activity, 4 mismatched inputs, 1 anything else.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Parse { .. }
        | Error::Scenario(_)
        | Error::Polygon(_)
        | Error::UnknownCountermeasure(_)
        | Error::BadMac(_)
        | Error::ZeroWindow => 2,
        Error::InsufficientActivity(_) | Error::MalformedS5(_) | Error::InsufficientData { .. } => 3,
        Error::SpanMismatch(_) | Error::LengthMismatch(..) | Error::UnknownDevice(_) => 4,
        _ => 1,
    }
}

/// Validated numeric overrides shared by the commands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub p_value: f64,
    pub window_us: u64,
    pub cell_m: f64,
    pub threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p_value: 0.08,
            window_us: 100_000,
            cell_m: 0.25,
            threshold: 0.10,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_value > 0.0 && self.p_value < 1.0) {
            return Err(Error::Config(format!("p-value {} outside (0, 1)", self.p_value)));
        }
        if !(10_000..=1_000_000).contains(&self.window_us) {
            return Err(Error::Config(format!(
                "window {} ms outside [10, 1000]",
                self.window_us as f64 / 1000.0
            )));
        }
        if !(0.05..=1.0).contains(&self.cell_m) {
            return Err(Error::Config(format!("cell size {} m outside [0.05, 1]", self.cell_m)));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::Config(format!("threshold {} outside (0, 1]", self.threshold)));
        }
        Ok(())
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Text of the user path file: `timestamp_us,x,y` per line.
pub fn format_path(world: &World) -> String {
    let mut s = String::with_capacity(world.path.len() * 24);
    for p in &world.path {
        let _ = writeln!(s, "{},{},{}", p.timestamp_us, p.x, p.y);
    }
    s
}

/// Files written by `simulate`, as (file name, contents).
pub fn simulation_files(world: &World) -> Result<Vec<(String, String)>> {
    let GroundTruthTrace::Imu(imu) = &world.imu else {
        return Err(Error::NotImu);
    };
    let GroundTruthTrace::Audio(audio) = &world.audio else {
        return Err(Error::NotAudio);
    };
    let mut files = vec![
        ("traffic.csv".to_string(), format_packets(&world.all_records())),
        ("imu.csv".to_string(), format_imu(imu)),
        ("audio.csv".to_string(), format_audio_events(audio)?),
        ("userpath.csv".to_string(), format_path(world)),
    ];
    for cm in &world.countermeasures {
        files.push((
            format!("cm_{}_{}.csv", cm.index, cm.kind),
            format_packets(cm.trace.records()),
        ));
    }
    Ok(files)
}

/// Generates a scenario file's world and writes it under `out`.
/// Returns one line per file written.
pub fn cmd_simulate(args: &SimulateArgs) -> Result<String> {
    let mut sc = read_scenario(&args.scenario)?;
    if let Some(s) = args.seed {
        sc.seed = s;
    }
    let world = generate(&sc)?;
    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let mut log = String::new();
    for (name, text) in simulation_files(&world)? {
        let path = args.out.join(&name);
        write_file(&path, &text)?;
        let _ = writeln!(log, "{}", path.display());
    }
    Ok(log)
}

/// Fraction of the ground-truth span covered by the traffic's time range.
pub fn span_overlap(gt: Span, traces: &BTreeMap<Mac, DeviceTrace>) -> f64 {
    let lo = traces
        .values()
        .filter_map(|t| t.records().first())
        .map(|r| r.timestamp_us)
        .min();
    let hi = traces
        .values()
        .filter_map(|t| t.records().last())
        .map(|r| r.timestamp_us)
        .max();
    let (Some(lo), Some(hi)) = (lo, hi) else {
        return 0.0;
    };
    let len = gt.len_us();
    if len == 0 {
        return 0.0;
    }
    let a = lo.max(gt.start);
    let b = (hi + 1).min(gt.end);
    b.saturating_sub(a) as f64 / len as f64
}

/// Minimum overlap between traffic and ground truth accepted by `detect`.
pub const MIN_SPAN_OVERLAP: f64 = 0.5;

fn detect_config(args: &DetectArgs) -> Result<DetectConfig> {
    let rc = RunConfig {
        p_value: args.p_value,
        window_us: args.window_ms * 1000,
        ..RunConfig::default()
    };
    rc.validate()?;
    if args.max_lag == 0 {
        return Err(Error::Config("max lag must be at least 1".into()));
    }
    let d = DetectConfig::default();
    Ok(DetectConfig {
        window_us: rc.window_us,
        sweep: SweepConfig {
            max_lag: args.max_lag,
            p_threshold: rc.p_value,
            lag_offset: (args.lag_offset_ms * 1000 / rc.window_us) as usize,
        },
        ..d
    })
}

/// Runs detection on trace files and returns the report text.
pub fn cmd_detect(args: &DetectArgs) -> Result<String> {
    let phase = Phase::parse(&args.mode)
        .ok_or_else(|| Error::Config(format!("mode {:?} is neither background nor active", args.mode)))?;
    let cfg = detect_config(args)?;
    let db = match &args.oui {
        Some(p) => OuiDatabase::read(p)?,
        None => OuiDatabase::builtin(),
    };
    let records = read_packets(&args.traffic)?;
    let mut traces = group_by_device(&records);
    if let Some(m) = &args.mac {
        let mac: Mac = m.parse()?;
        let t = traces.remove(&mac).ok_or_else(|| Error::UnknownDevice(m.clone()))?;
        traces = BTreeMap::from([(mac, t)]);
    }
    let imu = read_ground_truth(&args.imu)?;
    if !matches!(imu, GroundTruthTrace::Imu(_)) {
        return Err(Error::NotImu);
    }
    imu.validate()?;
    let audio = match &args.audio {
        Some(p) => match read_ground_truth(p)? {
            GroundTruthTrace::Imu(v) if v.is_empty() => Some(GroundTruthTrace::Audio(Vec::new())),
            GroundTruthTrace::Imu(_) => return Err(Error::NotAudio),
            a => Some(a),
        },
        None => None,
    };
    let overlap = span_overlap(imu.span(), &traces);
    if overlap < MIN_SPAN_OVERLAP {
        return Err(Error::SpanMismatch(format!(
            "traffic covers {:.0}% of the ground truth span",
            overlap * 100.0
        )));
    }
    let obs = Observation {
        traces: &traces,
        imu: &imu,
        audio: audio.as_ref(),
    };
    let mut log = DiscoveryLog::default();
    let report = detect(phase, &obs, &db, &mut log, &cfg)?;
    Ok(format_report(&report))
}

/// Traversal points on a 1.5 m lattice inset 0.75 m from the room's bounding box.
pub fn default_probes(room: &Polygon) -> Vec<Point> {
    let (lo, hi) = room.bbox();
    let mut out = Vec::new();
    let mut y = lo.y + 0.75;
    while y < hi.y {
        let mut x = lo.x + 0.75;
        while x < hi.x {
            let p = Point::new(x, y);
            if room.contains(p) {
                out.push(p);
            }
            x += 1.5;
        }
        y += 1.5;
    }
    out
}

fn localize_in<W: ProbeWorld>(world: &mut W, mac: Mac, probes: &[Point], cfg: &LocalizeConfig) -> Result<String> {
    if world.modality() == Modality::Audio {
        let loc = audio_localize(world, &[3, 2, 1], cfg.cell, cfg.threshold)?;
        return Ok(format_audio_localization(mac, &loc));
    }
    let mut state = map_coverage(world, probes, cfg.cell)?;
    let loc = localize(world, &mut state, cfg)?;
    Ok(format_localization(mac, &state, &loc))
}

/// Localizes one sensor of a scenario and returns the report text.
pub fn cmd_localize(args: &LocalizeArgs) -> Result<String> {
    let rc = RunConfig {
        cell_m: args.cell_m,
        threshold: args.threshold,
        ..RunConfig::default()
    };
    rc.validate()?;
    let mut sc: Scenario = read_scenario(&args.scenario)?;
    if let Some(s) = args.seed {
        sc.seed = s;
    }
    let mac: Mac = args.mac.parse()?;
    let sensor = sc
        .sensor(mac)
        .cloned()
        .ok_or_else(|| Error::UnknownDevice(args.mac.clone()))?;
    let probes = if sc.probes.is_empty() {
        default_probes(&sc.room)
    } else {
        sc.probes.clone()
    };
    let cfg = LocalizeConfig {
        threshold: rc.threshold,
        cell: rc.cell_m,
        ..LocalizeConfig::default()
    };
    if args.oracle {
        let mut w = OracleWorld {
            room: sc.room.clone(),
            sensor,
        };
        localize_in(&mut w, mac, &probes, &cfg)
    } else {
        let mut w = SimulatedWorld::new(sc.room.clone(), sensor, sc.seed).with_sigma(sc.dead_reckoning_sigma);
        localize_in(&mut w, mac, &probes, &cfg)
    }
}

/// Runs a suite directory (or the built-in suite) and returns the summary table.
pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<String> {
    let (mut batches, warnings) = match &args.suite {
        Some(dir) if !dir.is_dir() => return Err(Error::Config(format!("suite {} is not a directory", dir.display()))),
        Some(dir) => eval::read_suite(dir)?,
        None => (eval::default_suite(), Vec::new()),
    };
    if let Some(off) = args.seed {
        for b in &mut batches {
            b.seed = b.seed.wrapping_add(off);
        }
    }
    let mut warnings = warnings;
    let mut rows = Vec::new();
    for b in &batches {
        match eval::run_batch(b) {
            Ok(r) => rows.extend(r),
            Err(e) => warnings.push(format!("skipping batch {}: {e}", b.name)),
        }
    }
    let mut out = String::new();
    for w in warnings {
        let _ = writeln!(out, "# warning: {w}");
    }
    out.push_str(&eval::format_rows(&rows));
    Ok(out)
}

/// Runs a parsed command line, returning the text for standard output.
/// Commands with `--report` write it there and return an empty string.
pub fn run(cli: &Cli) -> Result<String> {
    let (text, report) = match &cli.command {
        Command::Simulate(a) => (cmd_simulate(a)?, None),
        Command::Detect(a) => (cmd_detect(a)?, a.report.as_ref()),
        Command::Localize(a) => (cmd_localize(a)?, a.report.as_ref()),
        Command::Evaluate(a) => (cmd_evaluate(a)?, a.report.as_ref()),
    };
    match report {
        Some(p) => {
            write_file(p, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}
