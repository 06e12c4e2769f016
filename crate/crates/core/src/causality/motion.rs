//! Stop/motion segmentation of an IMU trace.

use crate::error::{Error, Result};
use crate::trace::{GroundTruthTrace, Span, US_PER_S};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionConfig {
    /// Variance of the acceleration magnitude, (m/s²)², above which a window is moving.
    pub variance_threshold: f64,
    /// Width of the centred variance window, µs.
    pub variance_span_us: u64,
    /// Shortest still run that counts as a stop, µs.
    pub min_stop_us: u64,
    /// Still gaps and moving blips shorter than this are absorbed, µs.
    pub debounce_us: u64,
}

impl Default for MotionConfig {
    fn default() -> Self {
        MotionConfig {
            variance_threshold: 0.05,
            variance_span_us: US_PER_S,
            min_stop_us: 5 * US_PER_S,
            debounce_us: US_PER_S,
        }
    }
}

/// A maximal run of windows `[start, end)` that are all moving or all still.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub moving: bool,
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Per-window moving/still labels over a span and their run decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionProfile {
    pub start: u64,
    pub window: u64,
    pub moving: Vec<bool>,
    pub segments: Vec<Segment>,
    min_stop: usize,
}

impl MotionProfile {
    pub fn from_imu(gt: &GroundTruthTrace, span: Span, window: u64, cfg: &MotionConfig) -> Result<Self> {
        if window == 0 {
            return Err(Error::ZeroWindow);
        }
        let samples = gt.imu()?;
        let n = span.window_count(window);
        let mut s1 = vec![0.0f64; n];
        let mut s2 = vec![0.0f64; n];
        let mut cnt = vec![0usize; n];
        for s in samples {
            if s.timestamp_us < span.start || s.timestamp_us >= span.end {
                continue;
            }
            let i = ((s.timestamp_us - span.start) / window) as usize;
            let m = s.magnitude();
            s1[i] += m;
            s2[i] += m * m;
            cnt[i] += 1;
        }
        let half = ((cfg.variance_span_us / window) / 2) as usize;
        let mut moving = vec![false; n];
        for (i, mv) in moving.iter_mut().enumerate() {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n.saturating_sub(1));
            let (mut a, mut b, mut c) = (0.0, 0.0, 0usize);
            for j in lo..=hi {
                a += s1[j];
                b += s2[j];
                c += cnt[j];
            }
            if c >= 2 {
                let mean = a / c as f64;
                let var = (b / c as f64 - mean * mean).max(0.0);
                *mv = var > cfg.variance_threshold;
            }
        }
        let debounce = (cfg.debounce_us / window) as usize;
        fill_short_runs(&mut moving, false, debounce);
        fill_short_runs(&mut moving, true, debounce);
        Ok(Self::from_labels(
            span.start,
            window,
            moving,
            (cfg.min_stop_us / window) as usize,
        ))
    }

    /// Builds a profile from explicit labels; `min_stop` is in windows.
    pub fn from_labels(start: u64, window: u64, moving: Vec<bool>, min_stop: usize) -> Self {
        let segments = runs(&moving);
        MotionProfile {
            start,
            window,
            moving,
            segments,
            min_stop,
        }
    }

    pub fn motion_segments(&self) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(|s| s.moving)
    }

    /// Still runs long enough to count as stops.
    pub fn stops(&self) -> impl Iterator<Item = &Segment> {
        self.segments
            .iter()
            .filter(move |s| !s.moving && s.len() >= self.min_stop)
    }

    pub fn is_stop_window(&self, i: usize) -> bool {
        self.stops().any(|s| s.start <= i && i < s.end)
    }

    /// Checks for a stop-start-stop-start-stop shape and returns the motion segments.
    pub fn s5_motion(&self) -> Result<Vec<Segment>> {
        let segs = &self.segments;
        if segs.len() < 5 {
            return Err(Error::MalformedS5(format!(
                "expected at least 5 alternating segments, found {}",
                segs.len()
            )));
        }
        if segs[0].moving || segs[segs.len() - 1].moving {
            return Err(Error::MalformedS5("script must begin and end still".into()));
        }
        Ok(self.motion_segments().copied().collect())
    }

    /// Errors unless the profile has at least one stop and one motion segment.
    pub fn require_natural_activity(&self) -> Result<()> {
        if self.motion_segments().next().is_none() {
            return Err(Error::InsufficientActivity("no motion in ground truth".into()));
        }
        if self.stops().next().is_none() {
            return Err(Error::InsufficientActivity("no stop of at least 5 s".into()));
        }
        Ok(())
    }

    pub fn time_of(&self, i: usize) -> u64 {
        self.start + i as u64 * self.window
    }
}

/// Flips runs of `value` shorter than `min_len` that sit between runs of the other value.
fn fill_short_runs(labels: &mut [bool], value: bool, min_len: usize) {
    let n = labels.len();
    let mut i = 0;
    while i < n {
        if labels[i] != value {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && labels[i] == value {
            i += 1;
        }
        let interior = start > 0 && i < n;
        if interior && i - start < min_len {
            labels[start..i].iter_mut().for_each(|l| *l = !value);
        }
    }
}

fn runs(labels: &[bool]) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::new();
    for (i, &m) in labels.iter().enumerate() {
        match out.last_mut() {
            Some(s) if s.moving == m => s.end = i + 1,
            _ => out.push(Segment {
                moving: m,
                start: i,
                end: i + 1,
            }),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::ImuSample;

    fn imu(seconds: &[(f64, bool)]) -> GroundTruthTrace {
        let mut out = Vec::new();
        let mut t = 0u64;
        for &(dur, moving) in seconds {
            let n = (dur * 50.0) as usize;
            for k in 0..n {
                let z = if moving {
                    9.81 + 5.0 * (k as f64 * 0.6).sin()
                } else {
                    9.81
                };
                out.push(ImuSample {
                    timestamp_us: t,
                    accel: [0.0, 0.0, z],
                });
                t += 20_000;
            }
        }
        GroundTruthTrace::Imu(out)
    }

    fn profile(gt: &GroundTruthTrace) -> MotionProfile {
        MotionProfile::from_imu(gt, gt.span(), 100_000, &MotionConfig::default()).unwrap()
    }

    #[test]
    fn s5_has_two_motion_segments() {
        let gt = imu(&[(8.0, false), (7.0, true), (8.0, false), (7.0, true), (8.0, false)]);
        let p = profile(&gt);
        let m = p.s5_motion().unwrap();
        assert_eq!(m.len(), 2);
        assert!((m[0].start as i64 - 80).abs() <= 6);
        assert!((m[1].start as i64 - 230).abs() <= 6);
        assert_eq!(p.stops().count(), 3);
    }

    #[test]
    fn too_few_segments_is_malformed() {
        let gt = imu(&[(8.0, false), (7.0, true), (8.0, false)]);
        assert!(matches!(profile(&gt).s5_motion(), Err(Error::MalformedS5(_))));
    }

    #[test]
    fn continuous_motion_has_no_stop() {
        let gt = imu(&[(60.0, true)]);
        assert!(matches!(
            profile(&gt).require_natural_activity(),
            Err(Error::InsufficientActivity(_))
        ));
        let gt = imu(&[(60.0, false)]);
        assert!(profile(&gt).require_natural_activity().is_err());
    }

    #[test]
    fn short_still_gaps_are_absorbed() {
        let mut l = vec![true; 30];
        l[10..14].iter_mut().for_each(|v| *v = false);
        fill_short_runs(&mut l, false, 10);
        assert!(l.iter().all(|&v| v));
    }
}
