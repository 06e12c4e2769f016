//! Event-level causality for sensors that only transmit on detected events.

use super::motion::MotionProfile;
use crate::error::{Error, Result};
use crate::trace::{
    deduplicate, windowize, DeviceTrace, GroundTruthTrace, Mac, Span, TimeSeries, DEFAULT_WINDOW_US, US_PER_S,
};

/// Plausible upload timeouts of inferred-event sensors, seconds.
pub const TIMEOUT_RANGE_S: (f64, f64) = (30.0, 180.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurstConfig {
    /// A burst starts where a window exceeds this multiple of the trailing mean.
    pub factor: f64,
    /// Trailing mean length, windows.
    pub history: usize,
    /// Windows below this many bytes never start or extend a burst.
    pub min_bytes: f64,
    /// A burst continues while another qualifying window follows within this many windows.
    pub max_gap: usize,
}

impl Default for BurstConfig {
    fn default() -> Self {
        BurstConfig {
            factor: 5.0,
            history: 50,
            min_bytes: 500.0,
            max_gap: 10,
        }
    }
}

/// Windows `[start, end)` of a traffic burst.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Burst {
    pub start: usize,
    pub end: usize,
    pub bytes: f64,
}

/// Finds traffic bursts: onsets over `factor`× the trailing mean, extended across short lulls.
pub fn detect_bursts(series: &TimeSeries<f64>, cfg: &BurstConfig) -> Vec<Burst> {
    let v = &series.values;
    let n = v.len();
    let mut out = Vec::new();
    let mut running = 0.0;
    let mut i = 0;
    let push = |running: &mut f64, j: usize| {
        *running += v[j];
        if j >= cfg.history {
            *running -= v[j - cfg.history];
        }
    };
    while i < n {
        let k = i.min(cfg.history);
        let mean = if k == 0 { 0.0 } else { running / k as f64 };
        if v[i] >= cfg.min_bytes && v[i] > cfg.factor * mean {
            let start = i;
            let mut last = i;
            let mut bytes = 0.0;
            while i < n && i <= last + cfg.max_gap {
                if v[i] >= cfg.min_bytes {
                    last = i;
                }
                bytes += v[i];
                push(&mut running, i);
                i += 1;
            }
            out.push(Burst {
                start,
                end: last + 1,
                bytes,
            });
        } else {
            push(&mut running, i);
            i += 1;
        }
    }
    out
}

/// Outcome of matching an event sensor's bursts against ground-truth events.
#[derive(Debug, Clone, PartialEq)]
pub struct EventCausality {
    pub mac: Mac,
    /// Discovered upload timeout, seconds.
    pub timeout_s: Option<f64>,
    pub matched: usize,
    pub missed: usize,
    pub verdict: bool,
}

fn traffic_series(trace: &DeviceTrace, span: Span, window: u64) -> Result<TimeSeries<f64>> {
    windowize(&deduplicate(trace), span, window)
}

/// Matches bursts against motion.
///
/// A burst is explained when motion occurred in the 5 s before it and it is
/// not closer than the shortest plausible timeout to the previous burst.
/// Unexplained bursts count as missed. The timeout estimate is the smallest
/// gap between consecutive explained bursts with no stop between them.
pub fn event_causality(
    mac: Mac,
    profile: &MotionProfile,
    series: &TimeSeries<f64>,
    cfg: &BurstConfig,
) -> EventCausality {
    let window = series.window;
    let lookback = (5 * US_PER_S / window) as usize;
    let min_spacing = (TIMEOUT_RANGE_S.0 * US_PER_S as f64 / window as f64).round() as usize;
    let bursts = detect_bursts(series, cfg);

    let mut matched = Vec::new();
    let mut missed = 0;
    let mut prev: Option<usize> = None;
    for b in &bursts {
        let lo = b.start.saturating_sub(lookback);
        let hi = b.start.min(profile.moving.len().saturating_sub(1));
        let motion = lo <= hi && profile.moving[lo..=hi].iter().any(|&m| m);
        let spaced = prev.is_none_or(|p| b.start - p >= min_spacing);
        if motion && spaced {
            matched.push(b.start);
        } else {
            missed += 1;
        }
        prev = Some(b.start);
    }

    let timeout_s = matched
        .windows(2)
        .filter(|w| !(w[0]..w[1]).any(|i| profile.is_stop_window(i)))
        .map(|w| (w[1] - w[0]) as f64 * window as f64 / US_PER_S as f64)
        .min_by(f64::total_cmp)
        .and_then(|t| clamp_timeout(t, window));

    EventCausality {
        mac,
        timeout_s,
        matched: matched.len(),
        missed,
        verdict: matched.len() >= 2 && missed == 0,
    }
}

/// Accepts an estimate within one window of the plausible range, clamped into it.
fn clamp_timeout(t: f64, window: u64) -> Option<f64> {
    let w = window as f64 / US_PER_S as f64;
    let (lo, hi) = TIMEOUT_RANGE_S;
    (t >= lo - w && t <= hi + w).then(|| t.clamp(lo, hi))
}

/// Discovers the upload timeout of an inferred-event sensor from an IMU ground truth.
pub fn discover_timeout(gt: &GroundTruthTrace, trace: &DeviceTrace) -> Result<EventCausality> {
    let span = gt.span();
    let profile = MotionProfile::from_imu(gt, span, DEFAULT_WINDOW_US, &Default::default())?;
    let series = traffic_series(trace, span, DEFAULT_WINDOW_US)?;
    Ok(event_causality(trace.mac, &profile, &series, &BurstConfig::default()))
}

/// Matches utterances of a repeated phrase against traffic bursts.
///
/// Each utterance claims the earliest unclaimed burst starting between its
/// onset and 5 s after its end. The verdict holds when every utterance and
/// every burst is paired.
pub fn audio_event_causality(gt: &GroundTruthTrace, trace: &DeviceTrace) -> Result<EventCausality> {
    let utts = gt.utterances()?;
    if utts.len() < 3 {
        return Err(Error::InsufficientActivity(format!(
            "need at least 3 utterances, got {}",
            utts.len()
        )));
    }
    let span = Span::new(0, gt.span().end.max(trace.natural_span().end));
    let series = traffic_series(trace, span, DEFAULT_WINDOW_US)?;
    Ok(audio_matching(trace.mac, gt, &series, &BurstConfig::default()))
}

/// Pairs utterances with bursts of an already windowed series.
pub fn audio_matching(mac: Mac, gt: &GroundTruthTrace, series: &TimeSeries<f64>, cfg: &BurstConfig) -> EventCausality {
    let utts = gt.utterances().unwrap_or(&[]);
    let bursts = detect_bursts(series, cfg);
    let mut used = vec![false; bursts.len()];
    let mut matched = 0;
    for u in utts {
        let lo = u.start_us;
        let hi = u.end_us + 5 * US_PER_S;
        let hit = bursts.iter().enumerate().find(|(k, b)| {
            let t = series.window_start(b.start);
            !used[*k] && t + series.window > lo && t <= hi
        });
        if let Some((k, _)) = hit {
            used[k] = true;
            matched += 1;
        }
    }
    let missed = (utts.len() - matched) + (bursts.len() - matched);
    EventCausality {
        mac,
        timeout_s: None,
        matched,
        missed,
        verdict: !utts.is_empty() && matched == utts.len() && matched == bursts.len(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElevatedConfig {
    /// Smoothing width, windows.
    pub smooth: usize,
    /// Threshold as a multiple of the median smoothed level.
    pub factor: f64,
    /// Threshold floor, bytes per window.
    pub floor: f64,
    /// Shortest reported interval, windows.
    pub min_len: usize,
    /// Intervals separated by fewer windows than this are merged.
    pub merge_gap: usize,
}

impl Default for ElevatedConfig {
    fn default() -> Self {
        ElevatedConfig {
            smooth: 10,
            factor: 3.0,
            floor: 200.0,
            min_len: 50,
            merge_gap: 20,
        }
    }
}

/// Sustained high-traffic intervals `[start, end)` in windows, such as live-listening sessions.
pub fn elevated_intervals(series: &TimeSeries<f64>, cfg: &ElevatedConfig) -> Vec<(usize, usize)> {
    let v = &series.values;
    let n = v.len();
    if n == 0 {
        return Vec::new();
    }
    let half = cfg.smooth / 2;
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            v[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let mut sorted = smooth.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[n / 2];
    let thr = (cfg.factor * median).max(cfg.floor);

    let mut raw: Vec<(usize, usize)> = Vec::new();
    for (i, &s) in smooth.iter().enumerate() {
        if s <= thr {
            continue;
        }
        match raw.last_mut() {
            Some((_, e)) if i - *e < cfg.merge_gap => *e = i + 1,
            _ => raw.push((i, i + 1)),
        }
    }
    raw.retain(|(s, e)| e - s >= cfg.min_len);
    raw
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{PacketRecord, Utterance};

    fn series(v: Vec<f64>) -> TimeSeries<f64> {
        TimeSeries::new(0, 100_000, v).unwrap()
    }

    fn mac() -> Mac {
        "02:00:00:00:00:01".parse().unwrap()
    }

    #[test]
    fn isolated_spikes_are_bursts() {
        let mut v = vec![0.0; 400];
        v[100] = 3000.0;
        v[101] = 2000.0;
        v[300] = 4000.0;
        let b = detect_bursts(&series(v), &BurstConfig::default());
        assert_eq!(b.len(), 2);
        assert_eq!((b[0].start, b[0].end), (100, 102));
        assert_eq!(b[0].bytes, 5000.0);
        assert_eq!(b[1].start, 300);
    }

    #[test]
    fn small_keepalives_are_not_bursts() {
        let mut v = vec![0.0; 400];
        for i in (0..400).step_by(50) {
            v[i] = 120.0;
        }
        assert!(detect_bursts(&series(v), &BurstConfig::default()).is_empty());
    }

    fn labels(moving: &[(usize, usize)], n: usize) -> MotionProfile {
        let mut l = vec![false; n];
        for &(a, b) in moving {
            l[a..b].iter_mut().for_each(|v| *v = true);
        }
        MotionProfile::from_labels(0, 100_000, l, 50)
    }

    #[test]
    fn timeout_is_the_gap_during_continuous_motion() {
        let n = 2000;
        let p = labels(&[(100, 900), (1200, 1400)], n);
        let mut v = vec![0.0; n];
        for &b in &[104, 704, 1204] {
            v[b] = 5000.0;
        }
        let e = event_causality(mac(), &p, &series(v), &BurstConfig::default());
        assert_eq!(e.matched, 3);
        assert_eq!(e.missed, 0);
        assert!(e.verdict);
        assert_eq!(e.timeout_s, Some(60.0));
    }

    #[test]
    fn burst_without_motion_is_missed() {
        let n = 2000;
        let p = labels(&[(100, 300), (1200, 1400)], n);
        let mut v = vec![0.0; n];
        for &b in &[104, 700, 1204] {
            v[b] = 5000.0;
        }
        let e = event_causality(mac(), &p, &series(v), &BurstConfig::default());
        assert_eq!(e.missed, 1);
        assert!(!e.verdict);
    }

    #[test]
    fn empty_trace_is_not_causal() {
        let p = labels(&[(100, 300)], 600);
        let e = event_causality(mac(), &p, &series(vec![0.0; 600]), &BurstConfig::default());
        assert_eq!(e.matched, 0);
        assert!(!e.verdict);
    }

    #[test]
    fn timeout_clamps_within_one_window() {
        assert_eq!(clamp_timeout(180.1, 100_000), Some(180.0));
        assert_eq!(clamp_timeout(29.9, 100_000), Some(30.0));
        assert_eq!(clamp_timeout(10.0, 100_000), None);
        assert_eq!(clamp_timeout(200.0, 100_000), None);
    }

    fn utt(s: f64) -> Utterance {
        Utterance {
            label: "hey".into(),
            start_us: (s * 1e6) as u64,
            end_us: ((s + 1.5) * 1e6) as u64,
        }
    }

    #[test]
    fn four_utterances_four_bursts() {
        let gt = GroundTruthTrace::Audio(vec![utt(5.0), utt(20.0), utt(35.0), utt(50.0)]);
        let recs: Vec<PacketRecord> = [6.5, 21.8, 37.0, 51.9]
            .iter()
            .flat_map(|&t| {
                (0..4).map(move |k| PacketRecord::new(((t + 0.05 * k as f64) * 1e6) as u64, mac(), None, 1200, 6))
            })
            .collect();
        let tr = DeviceTrace::new(mac(), recs).unwrap();
        let e = audio_event_causality(&gt, &tr).unwrap();
        assert_eq!(e.matched, 4);
        assert!(e.verdict);

        let silent = DeviceTrace::empty(mac());
        let e = audio_event_causality(&gt, &silent).unwrap();
        assert_eq!(e.matched, 0);
        assert!(!e.verdict);
    }

    #[test]
    fn elevated_intervals_are_merged_and_filtered() {
        let mut v = vec![20.0; 1200];
        v[100..400].fill(900.0);
        v[410..420].fill(0.0);
        v[420..500].fill(900.0);
        v[800..820].fill(900.0);
        let iv = elevated_intervals(&series(v), &ElevatedConfig::default());
        assert_eq!(iv.len(), 1);
        assert!(iv[0].0 >= 95 && iv[0].1 <= 505);
    }
}
