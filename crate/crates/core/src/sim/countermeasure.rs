//! Traffic-shaping countermeasures applied to a captured trace.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use super::scenario::Countermeasure;
use super::world::{rng_stream, MTU_PAYLOAD};
use crate::error::Result;
use crate::trace::{deduplicate, windowize, DeviceTrace, PacketRecord, Span, DEFAULT_WINDOW_US, US_PER_S};

fn filler(out: &mut Vec<PacketRecord>, trace: &DeviceTrace, t: u64, mut bytes: u64, channel: u8) {
    let mut k = 0;
    while bytes > 0 {
        let p = bytes.min(MTU_PAYLOAD as u64) as u32;
        out.push(PacketRecord::new(t + k * 100, trace.mac, None, p, channel));
        bytes -= p as u64;
        k += 1;
    }
}

/// Applies one countermeasure to `trace` over `span`. Inserted records carry no
/// sequence number; `seed` drives the random variants.
pub fn apply_countermeasure(trace: &DeviceTrace, cm: &Countermeasure, span: Span, seed: u64) -> Result<DeviceTrace> {
    let mut rng = rng_stream(seed, 0);
    let channel = trace.records().first().map_or(6, |r| r.channel);
    let mut out: Vec<PacketRecord> = trace.records().to_vec();
    match cm {
        Countermeasure::Padding { target_bytes } => {
            let w = windowize::<f64>(&deduplicate(trace), span, DEFAULT_WINDOW_US)?;
            let max = w.values.iter().copied().fold(0.0, f64::max) as u64;
            let target = target_bytes.unwrap_or(max);
            for (i, &v) in w.values.iter().enumerate() {
                let deficit = target.saturating_sub(v as u64);
                filler(&mut out, trace, w.window_start(i), deficit, channel);
            }
        }
        Countermeasure::Noise {
            rate_hz,
            min_bytes,
            max_bytes,
        } => {
            let gap = Exp::new(*rate_hz).expect("positive rate");
            let mut t = span.start as f64 / US_PER_S as f64 + gap.sample(&mut rng);
            let end = span.end as f64 / US_PER_S as f64;
            while t < end {
                let bytes = rng.random_range(*min_bytes..=*max_bytes);
                let spread = rng.random_range(0.2..1.0);
                let n = bytes.div_ceil(MTU_PAYLOAD).max(1);
                let mut left = bytes;
                for k in 0..n {
                    let p = left.min(MTU_PAYLOAD);
                    left -= p;
                    let ts = ((t + spread * k as f64 / n as f64) * US_PER_S as f64) as u64;
                    out.push(PacketRecord::new(ts, trace.mac, None, p, channel));
                }
                t += gap.sample(&mut rng);
            }
        }
        Countermeasure::Resolution {
            min_interval_s,
            max_interval_s,
            levels,
        } => {
            let mut bounds = Vec::new();
            let mut t = span.start;
            while t < span.end.max(trace.natural_span().end) {
                let len = rng.random_range(*min_interval_s..=*max_interval_s);
                let level = levels[rng.random_range(0..levels.len())];
                bounds.push((t, level));
                t += (len * US_PER_S as f64) as u64;
            }
            for r in out.iter_mut() {
                let i = bounds.partition_point(|b| b.0 <= r.timestamp_us).saturating_sub(1);
                let level = bounds.get(i).map_or(1.0, |b| b.1);
                r.payload = ((r.payload as f64 * level).round() as u32).max(1);
            }
        }
        Countermeasure::TapeDelay { delay_s } => {
            let d = (delay_s * US_PER_S as f64).round() as u64;
            for r in out.iter_mut() {
                r.timestamp_us += d;
            }
        }
    }
    DeviceTrace::new(trace.mac, out)
}

/// [`apply_countermeasure`] with default parameters for a named kind.
pub fn apply_named(trace: &DeviceTrace, kind: &str, span: Span, seed: u64) -> Result<DeviceTrace> {
    apply_countermeasure(trace, &Countermeasure::default_for(kind)?, span, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::trace::Mac;

    fn mac() -> Mac {
        "02:00:00:00:00:07".parse().unwrap()
    }

    fn trace() -> DeviceTrace {
        let recs = (0..300u64)
            .map(|i| {
                PacketRecord::new(
                    i * 33_000,
                    mac(),
                    Some((i % 4096) as u16),
                    200 + (i as u32 * 37) % 1200,
                    6,
                )
            })
            .collect();
        DeviceTrace::new(mac(), recs).unwrap()
    }

    #[test]
    fn padding_flattens_windows() {
        let span = Span::new(0, 10 * US_PER_S);
        let t = apply_named(&trace(), "padding", span, 1).unwrap();
        let w = windowize::<f64>(&deduplicate(&t), span, DEFAULT_WINDOW_US).unwrap();
        let max = w.values.iter().copied().fold(f64::MIN, f64::max);
        let min = w.values.iter().copied().fold(f64::MAX, f64::min);
        assert!(max - min <= MTU_PAYLOAD as f64);
        assert_eq!(max, min);
    }

    #[test]
    fn tape_delay_shifts_every_record() {
        let t = apply_named(&trace(), "tape-delay", Span::new(0, 10 * US_PER_S), 1).unwrap();
        for (a, b) in trace().records().iter().zip(t.records()) {
            assert_eq!(b.timestamp_us, a.timestamp_us + 30 * US_PER_S);
            assert_eq!(a.payload, b.payload);
        }
    }

    #[test]
    fn noise_only_adds() {
        let span = Span::new(0, 10 * US_PER_S);
        let base = trace();
        let t = apply_named(&base, "noise", span, 3).unwrap();
        assert!(t.total_bytes() >= base.total_bytes());
        assert_eq!(t.records().iter().filter(|r| r.seq.is_some()).count(), base.len());
    }

    #[test]
    fn resolution_rescales_by_listed_levels() {
        let span = Span::new(0, 10 * US_PER_S);
        let base = trace();
        let t = apply_named(&base, "resolution", span, 4).unwrap();
        assert_eq!(t.len(), base.len());
        for (a, b) in base.records().iter().zip(t.records()) {
            let r = b.payload as f64 / a.payload as f64;
            assert!([0.5, 0.75, 1.0, 1.5, 2.0].iter().any(|l| (r - l).abs() < 0.01), "{r}");
        }
    }

    #[test]
    fn unknown_kind_is_rejected() {
        assert!(matches!(
            apply_named(&trace(), "jamming", Span::new(0, 1), 0),
            Err(Error::UnknownCountermeasure(_))
        ));
    }
}
