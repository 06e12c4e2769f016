//! Two-phase detection workflow and vendor identification.

mod oui;
mod pipeline;
mod report;

pub use oui::{oui_lookup, oui_lookup_str, Category, DiscoveryLog, OuiDatabase, UNKNOWN_VENDOR};
pub use pipeline::{
    active_detect, activity_aligned, activity_fractions, background_detect, classify_device, classify_series, detect,
    DetectConfig, DetectionReport, DeviceClass, DeviceReport, Evidence, Observation, Phase, SegmentActivity,
};
pub use report::format_report;
