//! Deterministic world simulator: rooms, users, sensors and their traffic.

mod countermeasure;
mod coverage;
mod file;
pub mod geometry;
pub mod presets;
mod scenario;
mod timeline;
mod world;

pub use countermeasure::{apply_countermeasure, apply_named};
pub use coverage::{coverage_oracle, Stimulus};
pub use file::{parse_scenario, read_scenario};
pub use geometry::{angle_diff, Point, Polygon, Sector};
pub use scenario::*;
pub use timeline::{intensity, stimulus_reaches, Activity, Speech, Timeline, STIMULUS_REACH};
pub use world::{
    generate, imu_trace, innocuous_frames, packetize, rng_stream, sensor_frames, CountermeasureTrace, Frame, PathPoint,
    World, MTU_PAYLOAD,
};
