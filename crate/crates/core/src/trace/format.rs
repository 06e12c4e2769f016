//! Line-oriented text formats for packet traces and ground truth.
//!
//! Packet trace: `timestamp_us,mac,seq,payload,channel`, MAC in lowercase
//! colon-separated hex, `seq` empty when absent.
//! IMU truth: `timestamp_us,ax,ay,az`. Audio truth: `timestamp_us,label,start|end`.
//! Writing then reading reproduces the input exactly; reading canonical text
//! then writing reproduces the text byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{GroundTruthTrace, ImuSample, Mac, PacketRecord, Utterance};
use crate::error::{Error, Result};

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn parse_packets(text: &str) -> Result<Vec<PacketRecord>> {
    let mut out = Vec::new();
    for (n, line) in data_lines(text) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(perr(n, format!("expected 5 fields, found {}", f.len())));
        }
        let ts = f[0].parse::<u64>().map_err(|e| perr(n, format!("timestamp: {e}")))?;
        let mac: Mac = f[1].parse().map_err(|_| perr(n, format!("bad mac {:?}", f[1])))?;
        let seq = if f[2].is_empty() {
            None
        } else {
            let s = f[2].parse::<u16>().map_err(|e| perr(n, format!("seq: {e}")))?;
            if s > 0x0fff {
                return Err(perr(n, format!("seq {s} exceeds 12 bits")));
            }
            Some(s)
        };
        let payload = f[3].parse::<u32>().map_err(|e| perr(n, format!("payload: {e}")))?;
        let channel = f[4].parse::<u8>().map_err(|e| perr(n, format!("channel: {e}")))?;
        out.push(PacketRecord::new(ts, mac, seq, payload, channel));
    }
    Ok(out)
}

pub fn format_packets(records: &[PacketRecord]) -> String {
    let mut s = String::with_capacity(records.len() * 40);
    for r in records {
        let _ = write!(s, "{},{},", r.timestamp_us, r.mac);
        if let Some(seq) = r.seq {
            let _ = write!(s, "{seq}");
        }
        let _ = writeln!(s, ",{},{}", r.payload, r.channel);
    }
    s
}

pub fn parse_ground_truth(text: &str) -> Result<GroundTruthTrace> {
    let mut imu = Vec::new();
    let mut audio: Vec<Utterance> = Vec::new();
    let mut open: Option<(usize, String, u64)> = None;
    for (n, line) in data_lines(text) {
        let f: Vec<&str> = line.split(',').collect();
        let ts = f[0].parse::<u64>().map_err(|e| perr(n, format!("timestamp: {e}")))?;
        match f.len() {
            4 if audio.is_empty() && open.is_none() => {
                let mut accel = [0.0; 3];
                for (k, slot) in accel.iter_mut().enumerate() {
                    *slot = f[k + 1].parse::<f64>().map_err(|e| perr(n, format!("axis {k}: {e}")))?;
                }
                imu.push(ImuSample {
                    timestamp_us: ts,
                    accel,
                });
            }
            3 if imu.is_empty() => {
                let label = f[1].to_string();
                match (f[2], open.take()) {
                    ("start", None) => open = Some((n, label, ts)),
                    ("end", Some((_, l, start))) if l == label => audio.push(Utterance {
                        label,
                        start_us: start,
                        end_us: ts,
                    }),
                    ("end", Some((_, l, _))) => return Err(perr(n, format!("end of {label:?} while {l:?} is open"))),
                    ("start", Some((_, l, _))) => return Err(perr(n, format!("start while {l:?} is still open"))),
                    ("end", None) => return Err(perr(n, "end without start")),
                    (other, _) => return Err(perr(n, format!("expected start|end, got {other:?}"))),
                }
            }
            _ => return Err(perr(n, "mixed or malformed ground-truth record")),
        }
    }
    if let Some((n, l, _)) = open {
        return Err(perr(n, format!("utterance {l:?} never ends")));
    }
    let gt = if audio.is_empty() {
        GroundTruthTrace::Imu(imu)
    } else {
        GroundTruthTrace::Audio(audio)
    };
    Ok(gt)
}

pub fn format_imu(samples: &[ImuSample]) -> String {
    let mut s = String::with_capacity(samples.len() * 48);
    for x in samples {
        let _ = writeln!(s, "{},{},{},{}", x.timestamp_us, x.accel[0], x.accel[1], x.accel[2]);
    }
    s
}

pub fn format_audio_events(utts: &[Utterance]) -> Result<String> {
    let mut s = String::new();
    for u in utts {
        if u.label.contains([',', '\n', '\r']) || u.label.is_empty() {
            return Err(Error::Config(format!("unwritable label {:?}", u.label)));
        }
        let _ = writeln!(s, "{},{},start", u.start_us, u.label);
        let _ = writeln!(s, "{},{},end", u.end_us, u.label);
    }
    Ok(s)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_packets(path: &Path) -> Result<Vec<PacketRecord>> {
    parse_packets(&read(path)?)
}

pub fn write_packets(path: &Path, records: &[PacketRecord]) -> Result<()> {
    write(path, &format_packets(records))
}

pub fn read_ground_truth(path: &Path) -> Result<GroundTruthTrace> {
    parse_ground_truth(&read(path)?)
}

pub fn write_imu(path: &Path, samples: &[ImuSample]) -> Result<()> {
    write(path, &format_imu(samples))
}

pub fn write_audio_events(path: &Path, utts: &[Utterance]) -> Result<()> {
    write(path, &format_audio_events(utts)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn packet_line_layout() {
        let m: Mac = "aa:bb:cc:01:02:03".parse().unwrap();
        let recs = vec![
            PacketRecord::new(10, m, Some(7), 1400, 6),
            PacketRecord::new(11, m, None, 0, 11),
        ];
        let text = format_packets(&recs);
        assert_eq!(text, "10,aa:bb:cc:01:02:03,7,1400,6\n11,aa:bb:cc:01:02:03,,0,11\n");
        assert_eq!(parse_packets(&text).unwrap(), recs);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "1,aa:bb:cc:01:02:03,,5,1\n\n2,zz:bb:cc:01:02:03,,5,1\n";
        match parse_packets(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(parse_packets("1,aa:bb:cc:01:02:03,5000,5,1\n").is_err());
    }

    #[test]
    fn audio_events_round_trip() {
        let utts = vec![
            Utterance {
                label: "alexa what time is it".into(),
                start_us: 1_000_000,
                end_us: 2_500_000,
            },
            Utterance {
                label: "alexa stop".into(),
                start_us: 9_000_000,
                end_us: 9_800_000,
            },
        ];
        let text = format_audio_events(&utts).unwrap();
        assert_eq!(parse_ground_truth(&text).unwrap(), GroundTruthTrace::Audio(utts));
    }

    #[test]
    fn unbalanced_audio_is_rejected() {
        assert!(parse_ground_truth("1,a,end\n").is_err());
        assert!(parse_ground_truth("1,a,start\n2,b,end\n").is_err());
        assert!(parse_ground_truth("1,a,start\n").is_err());
    }

    proptest! {
        #[test]
        fn packet_text_is_bit_exact(
            rows in prop::collection::vec(
                (0u64..1u64 << 40, 0u64..1u64 << 48, prop::option::of(0u16..4096), any::<u32>(), any::<u8>()),
                0..50,
            )
        ) {
            let recs: Vec<_> = rows
                .into_iter()
                .map(|(t, m, s, p, c)| PacketRecord::new(t, Mac::from_u64(m), s, p, c))
                .collect();
            let text = format_packets(&recs);
            let back = parse_packets(&text).unwrap();
            prop_assert_eq!(&back, &recs);
            prop_assert_eq!(format_packets(&back), text);
        }

        #[test]
        fn imu_text_is_bit_exact(
            rows in prop::collection::vec((any::<f64>(), any::<f64>(), any::<f64>()), 1..40)
        ) {
            let samples: Vec<_> = rows
                .into_iter()
                .enumerate()
                .filter(|(_, (a, b, c))| a.is_finite() && b.is_finite() && c.is_finite())
                .map(|(i, (a, b, c))| ImuSample { timestamp_us: i as u64 * 20_000, accel: [a, b, c] })
                .collect();
            let text = format_imu(&samples);
            let back = parse_ground_truth(&text).unwrap();
            prop_assert_eq!(format_imu(back.imu().unwrap()), text.clone());
            let bits = |s: &[ImuSample]| s.iter().flat_map(|x| x.accel.map(f64::to_bits)).collect::<Vec<_>>();
            prop_assert_eq!(bits(back.imu().unwrap()), bits(&samples));
        }
    }
}
