//! Causality tests between ground truth and device traffic.

mod events;
mod fdist;
mod granger;
mod motion;
mod ols;

pub use events::{
    audio_event_causality, audio_matching, detect_bursts, discover_timeout, elevated_intervals, event_causality, Burst,
    BurstConfig, ElevatedConfig, EventCausality, TIMEOUT_RANGE_S,
};
pub use fdist::{f_cdf, f_sf, ln_gamma, reg_inc_beta};
pub use granger::{
    granger_sweep, granger_test, granger_test_slices, Axis, CausalityVerdict, GrangerResult, SweepConfig,
};
pub use motion::{MotionConfig, MotionProfile, Segment};
pub use ols::{ols_fit, OlsFit};
