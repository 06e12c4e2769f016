//! Line-oriented detection report.

use std::fmt::Write;

use super::pipeline::{DetectionReport, Evidence};

/// Renders a report: a `#phase=` header, then one line per device.
///
/// Raw devices: `mac,verdict,min_p,best_lag,axis,vendor,category`.
/// Event devices: `mac,event,timeout_s,matched,missed,vendor,category`.
/// Silent devices: `mac,silent,,,,vendor,category`.
pub fn format_report(r: &DetectionReport) -> String {
    let mut s = String::new();
    writeln!(s, "#phase={}", r.phase.name()).unwrap();
    for d in &r.devices {
        let _ = match &d.evidence {
            Evidence::Raw { verdict, .. } => writeln!(
                s,
                "{},{},{},{},{},{},{}",
                d.mac, d.monitoring, verdict.min_p, verdict.best_lag, verdict.best_axis, d.vendor, d.category
            ),
            Evidence::Event(e) => writeln!(
                s,
                "{},event,{},{},{},{},{}",
                d.mac,
                e.timeout_s.map(|t| t.to_string()).unwrap_or_default(),
                e.matched,
                e.missed,
                d.vendor,
                d.category
            ),
            Evidence::Silent => {
                writeln!(s, "{},silent,,,,{},{}", d.mac, d.vendor, d.category)
            }
        };
    }
    s
}
