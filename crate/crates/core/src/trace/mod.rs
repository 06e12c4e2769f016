//! Packet metadata, device traces, windowed series and ground truth.

mod format;
mod ops;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use format::{
    format_audio_events, format_imu, format_packets, parse_ground_truth, parse_packets, read_ground_truth,
    read_packets, write_audio_events, write_imu, write_packets,
};
pub use ops::{deduplicate, resample_ground_truth, suppress_iframes, windowize, AxisSeries};

/// Microseconds per second.
pub const US_PER_S: u64 = 1_000_000;
/// Default aggregation window, 100 ms.
pub const DEFAULT_WINDOW_US: u64 = 100_000;
/// Retransmission horizon for deduplication.
pub const DEDUP_HORIZON_US: u64 = 50_000;

/// 48-bit IEEE 802 hardware address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mac(u64);

impl Mac {
    pub fn new(bytes: [u8; 6]) -> Self {
        Mac(bytes.iter().fold(0u64, |acc, &b| (acc << 8) | b as u64))
    }

    pub fn from_u64(v: u64) -> Self {
        Mac(v & 0xffff_ffff_ffff)
    }

    pub fn as_u64(self) -> u64 {
        self.0
    }

    /// Organizationally unique identifier: the top 24 bits.
    pub fn oui(self) -> u32 {
        (self.0 >> 24) as u32
    }

    pub fn bytes(self) -> [u8; 6] {
        let mut out = [0u8; 6];
        for (i, b) in out.iter_mut().enumerate() {
            *b = (self.0 >> (40 - 8 * i)) as u8;
        }
        out
    }
}

impl fmt::Display for Mac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self.bytes();
        write!(
            f,
            "{:02x}:{:02x}:{:02x}:{:02x}:{:02x}:{:02x}",
            b[0], b[1], b[2], b[3], b[4], b[5]
        )
    }
}

impl FromStr for Mac {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 6 {
            return Err(Error::BadMac(s.to_string()));
        }
        let mut bytes = [0u8; 6];
        for (slot, part) in bytes.iter_mut().zip(&parts) {
            if part.len() != 2 {
                return Err(Error::BadMac(s.to_string()));
            }
            *slot = u8::from_str_radix(part, 16).map_err(|_| Error::BadMac(s.to_string()))?;
        }
        Ok(Mac::new(bytes))
    }
}

/// One captured frame's metadata. Payload contents are never inspected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PacketRecord {
    /// Microseconds since trace start.
    pub timestamp_us: u64,
    pub mac: Mac,
    /// 12-bit WLAN sequence number, when the capture carried one.
    pub seq: Option<u16>,
    pub payload: u32,
    pub channel: u8,
}

impl PacketRecord {
    pub fn new(timestamp_us: u64, mac: Mac, seq: Option<u16>, payload: u32, channel: u8) -> Self {
        PacketRecord {
            timestamp_us,
            mac,
            seq: seq.map(|s| s & 0x0fff),
            payload,
            channel,
        }
    }
}

/// All records of one device, ordered by timestamp then sequence number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviceTrace {
    pub mac: Mac,
    records: Vec<PacketRecord>,
}

impl DeviceTrace {
    pub fn new(mac: Mac, mut records: Vec<PacketRecord>) -> Result<Self> {
        if let Some(r) = records.iter().find(|r| r.mac != mac) {
            return Err(Error::Config(format!("record for {} in trace of {}", r.mac, mac)));
        }
        records.sort_by_key(|r| (r.timestamp_us, r.seq));
        Ok(DeviceTrace { mac, records })
    }

    pub fn empty(mac: Mac) -> Self {
        DeviceTrace {
            mac,
            records: Vec::new(),
        }
    }

    pub fn records(&self) -> &[PacketRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<PacketRecord> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn total_bytes(&self) -> u64 {
        self.records.iter().map(|r| r.payload as u64).sum()
    }

    /// Half-open span from trace start (time zero) to just past the last record.
    pub fn natural_span(&self) -> Span {
        Span::new(0, self.records.last().map_or(0, |r| r.timestamp_us + 1))
    }
}

/// Splits a multiplexed capture into per-device traces, ordered by MAC.
pub fn group_by_device(records: &[PacketRecord]) -> BTreeMap<Mac, DeviceTrace> {
    let mut groups: BTreeMap<Mac, Vec<PacketRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.mac).or_default().push(*r);
    }
    groups
        .into_iter()
        .map(|(mac, recs)| {
            let trace = DeviceTrace::new(mac, recs).expect("grouped by mac");
            (mac, trace)
        })
        .collect()
}

/// Half-open time interval `[start, end)` in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: u64,
    pub end: u64,
}

impl Span {
    pub fn new(start: u64, end: u64) -> Self {
        Span {
            start,
            end: end.max(start),
        }
    }

    pub fn len_us(&self) -> u64 {
        self.end - self.start
    }

    /// Number of windows needed to tile the span, rounding up.
    pub fn window_count(&self, window: u64) -> usize {
        self.len_us().div_ceil(window) as usize
    }
}

/// Uniformly windowed series. Silent windows hold explicit zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    pub start: u64,
    pub window: u64,
    pub values: Vec<T>,
}

impl<T: Copy> TimeSeries<T> {
    pub fn new(start: u64, window: u64, values: Vec<T>) -> Result<Self> {
        if window == 0 {
            return Err(Error::ZeroWindow);
        }
        Ok(TimeSeries { start, window, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Start time of window `i`.
    pub fn window_start(&self, i: usize) -> u64 {
        self.start + i as u64 * self.window
    }

    /// Index of the window containing `t`, if inside the series.
    pub fn index_of(&self, t: u64) -> Option<usize> {
        if t < self.start {
            return None;
        }
        let i = ((t - self.start) / self.window) as usize;
        (i < self.values.len()).then_some(i)
    }

    pub fn map<U>(&self, f: impl FnMut(T) -> U) -> TimeSeries<U> {
        TimeSeries {
            start: self.start,
            window: self.window,
            values: self.values.iter().copied().map(f).collect(),
        }
    }

    /// Windows `[from, to)` as a new series.
    pub fn slice(&self, from: usize, to: usize) -> TimeSeries<T> {
        let to = to.min(self.values.len());
        let from = from.min(to);
        TimeSeries {
            start: self.window_start(from),
            window: self.window,
            values: self.values[from..to].to_vec(),
        }
    }
}

/// One 3-axis accelerometer reading in m/s².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    pub timestamp_us: u64,
    pub accel: [f64; 3],
}

impl ImuSample {
    pub fn magnitude(&self) -> f64 {
        self.accel.iter().map(|a| a * a).sum::<f64>().sqrt()
    }
}

/// A labeled utterance interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance {
    pub label: String,
    pub start_us: u64,
    pub end_us: u64,
}

/// Trusted sensor-side truth the traffic is tested against.
#[derive(Debug, Clone, PartialEq)]
pub enum GroundTruthTrace {
    /// Phone accelerometer, nominally 50 Hz.
    Imu(Vec<ImuSample>),
    /// Labeled speech intervals played or spoken in the room.
    Audio(Vec<Utterance>),
}

/// Nominal IMU rate.
pub const IMU_RATE_HZ: f64 = 50.0;

impl GroundTruthTrace {
    /// Validates timestamp ordering and, for IMU traces, the nominal rate (±10%).
    pub fn validate(&self) -> Result<()> {
        match self {
            GroundTruthTrace::Imu(samples) => {
                if samples.windows(2).any(|w| w[1].timestamp_us <= w[0].timestamp_us) {
                    return Err(Error::Config("IMU timestamps must be strictly increasing".into()));
                }
                if samples.len() >= 2 {
                    let span =
                        (samples[samples.len() - 1].timestamp_us - samples[0].timestamp_us) as f64 / US_PER_S as f64;
                    let rate = (samples.len() - 1) as f64 / span;
                    if (rate - IMU_RATE_HZ).abs() > 0.1 * IMU_RATE_HZ {
                        return Err(Error::Config(format!("IMU rate {rate:.2} Hz outside 50 Hz ±10%")));
                    }
                }
                Ok(())
            }
            GroundTruthTrace::Audio(utts) => {
                if utts.iter().any(|u| u.end_us < u.start_us) {
                    return Err(Error::Config("utterance ends before it starts".into()));
                }
                if utts.windows(2).any(|w| w[1].start_us <= w[0].start_us) {
                    return Err(Error::Config("utterance timestamps must be strictly increasing".into()));
                }
                Ok(())
            }
        }
    }

    /// Half-open span of the trace. IMU spans run from the first to just past
    /// the last sample; audio spans run from time zero to just past the last
    /// utterance end.
    pub fn span(&self) -> Span {
        match self {
            GroundTruthTrace::Imu(s) => match (s.first(), s.last()) {
                (Some(a), Some(b)) => Span::new(a.timestamp_us, b.timestamp_us + 1),
                _ => Span::new(0, 0),
            },
            GroundTruthTrace::Audio(u) => Span::new(0, u.iter().map(|u| u.end_us + 1).max().unwrap_or(0)),
        }
    }

    pub fn imu(&self) -> Result<&[ImuSample]> {
        match self {
            GroundTruthTrace::Imu(s) => Ok(s),
            GroundTruthTrace::Audio(_) => Err(Error::NotImu),
        }
    }

    pub fn utterances(&self) -> Result<&[Utterance]> {
        match self {
            GroundTruthTrace::Audio(u) => Ok(u),
            GroundTruthTrace::Imu(_) => Err(Error::NotAudio),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mac_round_trips_lowercase() {
        let m: Mac = "AA:bb:0c:01:02:ff".parse().unwrap();
        assert_eq!(m.to_string(), "aa:bb:0c:01:02:ff");
        assert_eq!(m.oui(), 0xaabb0c);
    }

    #[test]
    fn mac_rejects_garbage() {
        for s in ["", "aa:bb", "aa:bb:cc:dd:ee:fg", "aabbccddeeff", "a:bb:cc:dd:ee:ff"] {
            assert!(s.parse::<Mac>().is_err(), "{s}");
        }
    }

    #[test]
    fn trace_sorts_by_time_then_seq() {
        let m = Mac::from_u64(1);
        let t = DeviceTrace::new(
            m,
            vec![
                PacketRecord::new(5, m, Some(2), 1, 1),
                PacketRecord::new(5, m, Some(1), 1, 1),
                PacketRecord::new(1, m, None, 1, 1),
            ],
        )
        .unwrap();
        let keys: Vec<_> = t.records().iter().map(|r| (r.timestamp_us, r.seq)).collect();
        assert_eq!(keys, vec![(1, None), (5, Some(1)), (5, Some(2))]);
    }

    #[test]
    fn trace_rejects_foreign_mac() {
        let a = Mac::from_u64(1);
        let b = Mac::from_u64(2);
        assert!(DeviceTrace::new(a, vec![PacketRecord::new(0, b, None, 1, 1)]).is_err());
    }

    #[test]
    fn imu_rate_is_checked() {
        let fast: Vec<_> = (0..100)
            .map(|i| ImuSample {
                timestamp_us: i * 10_000,
                accel: [0.0; 3],
            })
            .collect();
        assert!(GroundTruthTrace::Imu(fast).validate().is_err());
        let ok: Vec<_> = (0..100)
            .map(|i| ImuSample {
                timestamp_us: i * 20_000,
                accel: [0.0; 3],
            })
            .collect();
        GroundTruthTrace::Imu(ok).validate().unwrap();
    }
}
