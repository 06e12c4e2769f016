//! Hidden wireless sensor detection from packet metadata.
//!
//! The crate correlates a trusted motion or audio ground truth with the
//! per-device traffic volume seen on the air and flags devices whose traffic
//! is Granger-caused by the user. It also ships a seeded world simulator that
//! produces the traces, and a trial-based localizer for flagged sensors.
//!
//! The statistics core is generic over the scalar type (`f32` or `f64`); the
//! simulator, geometry and pipeline work in `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod causality;
pub mod cli;
pub mod detect;
pub mod error;
pub mod eval;
pub mod localize;
pub mod num;
pub mod sim;
pub mod trace;

pub use error::{Error, Result};
pub use num::Real;

/// Windowed series in double precision, the form used by the pipeline.
pub type Series = trace::TimeSeries<f64>;
/// Windowed series in single precision.
pub type Series32 = trace::TimeSeries<f32>;
/// Granger test result in double precision.
pub type Granger = causality::GrangerResult<f64>;
/// Granger test result in single precision.
pub type Granger32 = causality::GrangerResult<f32>;
/// Lag sweep verdict in double precision.
pub type Verdict = causality::CausalityVerdict<f64>;
