use std::collections::HashMap;

use super::{DeviceTrace, GroundTruthTrace, Span, TimeSeries, DEDUP_HORIZON_US};
use crate::error::{Error, Result};
use crate::num::Real;

/// Drops link-layer retransmissions.
///
/// A record is dropped when any earlier record within [`DEDUP_HORIZON_US`]
/// carries the same sequence number and payload size. Records without a
/// sequence number are always kept.
pub fn deduplicate(trace: &DeviceTrace) -> DeviceTrace {
    let mut last_seen: HashMap<(u16, u32), u64> = HashMap::new();
    let mut kept = Vec::with_capacity(trace.len());
    for r in trace.records() {
        let Some(seq) = r.seq else {
            kept.push(*r);
            continue;
        };
        let key = (seq, r.payload);
        let dup = last_seen
            .get(&key)
            .is_some_and(|&t| r.timestamp_us - t < DEDUP_HORIZON_US);
        last_seen.insert(key, r.timestamp_us);
        if !dup {
            kept.push(*r);
        }
    }
    DeviceTrace {
        mac: trace.mac,
        records: kept,
    }
}

/// Sums payload bytes into consecutive windows of `window` microseconds
/// covering `span`. Records outside the span are ignored.
pub fn windowize<T: Real>(trace: &DeviceTrace, span: Span, window: u64) -> Result<TimeSeries<T>> {
    if window == 0 {
        return Err(Error::ZeroWindow);
    }
    let mut bytes = vec![0u64; span.window_count(window)];
    for r in trace.records() {
        if r.timestamp_us < span.start || r.timestamp_us >= span.end {
            continue;
        }
        bytes[((r.timestamp_us - span.start) / window) as usize] += r.payload as u64;
    }
    let values = bytes
        .into_iter()
        .map(|b| T::from_u64(b).expect("byte count representable"))
        .collect();
    TimeSeries::new(span.start, window, values)
}

const IFRAME_HISTORY: usize = 10;
const MIN_IFRAME_WINDOWS: usize = 20;

/// Flattens keyframe spikes: a window larger than 2.5× the mean of the
/// preceding (up to) ten input windows is replaced by that mean.
pub fn suppress_iframes<T: Real>(series: &TimeSeries<T>) -> Result<TimeSeries<T>> {
    let n = series.len();
    if n < MIN_IFRAME_WINDOWS {
        return Err(Error::SeriesTooShort {
            need: MIN_IFRAME_WINDOWS,
            got: n,
        });
    }
    let factor = T::c(2.5);
    let v = &series.values;
    let mut out = v.clone();
    let mut running = T::zero();
    for i in 0..n {
        if i > 0 {
            let k = i.min(IFRAME_HISTORY);
            let mean = running / T::from_usize(k).unwrap();
            if v[i] > factor * mean {
                out[i] = mean;
            }
        }
        running += v[i];
        if i >= IFRAME_HISTORY {
            running -= v[i - IFRAME_HISTORY];
        }
    }
    Ok(TimeSeries {
        start: series.start,
        window: series.window,
        values: out,
    })
}

/// Per-axis window means of an IMU trace.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisSeries<T> {
    pub axes: [TimeSeries<T>; 3],
    /// Windows that held no sample and were filled from a neighbour.
    pub interpolated: Vec<bool>,
}

/// Downsamples IMU readings to window means, one series per axis.
///
/// Empty windows carry the previous window's value forward (leading empty
/// windows take the first available value) and are flagged as interpolated.
pub fn resample_ground_truth<T: Real>(gt: &GroundTruthTrace, span: Span, window: u64) -> Result<AxisSeries<T>> {
    if window == 0 {
        return Err(Error::ZeroWindow);
    }
    let samples = gt.imu()?;
    let n = span.window_count(window);
    let mut sums = vec![[0.0f64; 3]; n];
    let mut counts = vec![0usize; n];
    for s in samples {
        if s.timestamp_us < span.start || s.timestamp_us >= span.end {
            continue;
        }
        let i = ((s.timestamp_us - span.start) / window) as usize;
        for (acc, a) in sums[i].iter_mut().zip(s.accel) {
            *acc += a;
        }
        counts[i] += 1;
    }
    let mut means: Vec<Option<[f64; 3]>> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| (c > 0).then(|| s.map(|v| v / c as f64)))
        .collect();
    let interpolated: Vec<bool> = means.iter().map(Option::is_none).collect();
    let first = means.iter().flatten().next().copied().unwrap_or([0.0; 3]);
    let mut prev = first;
    for m in means.iter_mut() {
        match m {
            Some(v) => prev = *v,
            None => *m = Some(prev),
        }
    }
    let axis = |k: usize| TimeSeries {
        start: span.start,
        window,
        values: means.iter().map(|m| T::c(m.unwrap()[k])).collect(),
    };
    Ok(AxisSeries {
        axes: [axis(0), axis(1), axis(2)],
        interpolated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{ImuSample, Mac, PacketRecord};

    fn rec(t_ms: u64, seq: Option<u16>, payload: u32) -> PacketRecord {
        PacketRecord::new(t_ms * 1000, Mac::from_u64(7), seq, payload, 6)
    }

    fn trace(recs: Vec<PacketRecord>) -> DeviceTrace {
        DeviceTrace::new(Mac::from_u64(7), recs).unwrap()
    }

    #[test]
    fn retransmission_is_dropped() {
        let t = trace(vec![rec(0, Some(7), 1400), rec(2, Some(7), 1400)]);
        assert_eq!(deduplicate(&t).len(), 1);
    }

    #[test]
    fn dedup_keeps_unsequenced_and_distant_repeats() {
        let t = trace(vec![
            rec(0, None, 100),
            rec(1, None, 100),
            rec(10, Some(3), 100),
            rec(70, Some(3), 100),
            rec(71, Some(3), 200),
        ]);
        assert_eq!(deduplicate(&t).len(), 5);
    }

    #[test]
    fn dedup_of_empty_is_empty() {
        let t = DeviceTrace::empty(Mac::from_u64(1));
        assert!(deduplicate(&t).is_empty());
    }

    #[test]
    fn windowize_buckets_by_start_aligned_windows() {
        let t = trace(vec![rec(10, None, 500), rec(120, None, 300)]);
        let s: TimeSeries<f64> = windowize(&t, Span::new(0, 200_000), 100_000).unwrap();
        assert_eq!(s.values, vec![500.0, 300.0]);
    }

    #[test]
    fn windowize_empty_second_gives_ten_zeros() {
        let t = DeviceTrace::empty(Mac::from_u64(1));
        let s: TimeSeries<f64> = windowize(&t, Span::new(0, 1_000_000), 100_000).unwrap();
        assert_eq!(s.values, vec![0.0; 10]);
    }

    #[test]
    fn windowize_rejects_zero_window() {
        let t = DeviceTrace::empty(Mac::from_u64(1));
        assert!(matches!(
            windowize::<f64>(&t, Span::new(0, 10), 0),
            Err(Error::ZeroWindow)
        ));
    }

    #[test]
    fn flat_series_is_untouched() {
        let s = TimeSeries::new(0, 100_000, vec![100.0f64; 30]).unwrap();
        assert_eq!(suppress_iframes(&s).unwrap(), s);
    }

    #[test]
    fn single_spike_is_replaced_by_trailing_mean() {
        let mut v = vec![100.0f64; 10];
        v.push(1000.0);
        v.extend(vec![100.0; 10]);
        let s = TimeSeries::new(0, 100_000, v).unwrap();
        let out = suppress_iframes(&s).unwrap();
        assert_eq!(out.values[10], 100.0);
        assert!(out.values.iter().all(|&x| x == 100.0));
    }

    #[test]
    fn suppression_needs_twenty_windows() {
        let s = TimeSeries::new(0, 100_000, vec![1.0f64; 19]).unwrap();
        assert!(matches!(
            suppress_iframes(&s),
            Err(Error::SeriesTooShort { need: 20, got: 19 })
        ));
    }

    fn imu(values: impl Iterator<Item = [f64; 3]>) -> GroundTruthTrace {
        GroundTruthTrace::Imu(
            values
                .enumerate()
                .map(|(i, a)| ImuSample {
                    timestamp_us: i as u64 * 20_000,
                    accel: a,
                })
                .collect(),
        )
    }

    #[test]
    fn constant_gravity_resamples_to_constant() {
        let gt = imu((0..150).map(|_| [0.0, 0.0, 9.81]));
        let out: AxisSeries<f64> = resample_ground_truth(&gt, gt.span(), 100_000).unwrap();
        assert_eq!(out.axes[2].len(), 30);
        assert!(out.axes[2].values.iter().all(|&v| (v - 9.81).abs() < 1e-12));
    }

    #[test]
    fn block_means_of_ramp() {
        let gt = imu((1..=50).map(|v| [v as f64, 0.0, 0.0]));
        let out: AxisSeries<f64> = resample_ground_truth(&gt, gt.span(), 100_000).unwrap();
        let want: Vec<f64> = (0..10).map(|i| 3.0 + 5.0 * i as f64).collect();
        assert_eq!(out.axes[0].values, want);
        assert!(out.interpolated.iter().all(|&f| !f));
    }

    #[test]
    fn gaps_carry_forward() {
        let gt = GroundTruthTrace::Imu(vec![
            ImuSample {
                timestamp_us: 150_000,
                accel: [1.0, 2.0, 3.0],
            },
            ImuSample {
                timestamp_us: 450_000,
                accel: [4.0, 5.0, 6.0],
            },
        ]);
        let out: AxisSeries<f64> = resample_ground_truth(&gt, Span::new(0, 500_000), 100_000).unwrap();
        assert_eq!(out.axes[0].values, vec![1.0, 1.0, 1.0, 1.0, 4.0]);
        assert_eq!(out.interpolated, vec![true, false, true, true, false]);
    }

    #[test]
    fn audio_truth_cannot_be_resampled() {
        let gt = GroundTruthTrace::Audio(vec![]);
        assert!(matches!(
            resample_ground_truth::<f64>(&gt, Span::new(0, 1), 1),
            Err(Error::NotImu)
        ));
    }

    #[test]
    fn single_precision_windowing_agrees() {
        let t = trace(vec![rec(10, None, 500), rec(120, None, 300)]);
        let s: TimeSeries<f32> = windowize(&t, Span::new(0, 200_000), 100_000).unwrap();
        assert_eq!(s.values, vec![500.0f32, 300.0]);
    }
}
