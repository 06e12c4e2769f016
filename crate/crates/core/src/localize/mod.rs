//! Estimating where a detected sensor is and what it sees.

mod algo;
mod fit;
mod grid;
mod report;
mod world;

pub use algo::{
    apply_outcome, audio_localize, generate_trial, initial_candidates, localize, map_coverage, modality_reach,
    partition, visibility, AudioLocalization, BBoxState, Localization, LocalizeConfig, LocalizeStatus, TrialRecord,
    Visibility, COVERAGE_RADIUS_M, DENSITY_M2_PER_POSITIVE,
};
pub use fit::{fit_ellipse, fit_sector, most_likely_location, FitShape, Pose};
pub use grid::{GridRegion, DEFAULT_CELL_M};
pub use report::{format_audio_localization, format_localization};
pub use world::{trial_stimulus, OracleWorld, ProbeWorld, SimulatedWorld, TrialSpec, TRIAL_DURATION_S};
