//! Diagnostics computed from fields and time series.

mod fringes;
mod lobes;
mod overlap;
mod revival;
mod sweep;

pub use fringes::{dominant_period, fringe_periods, InterferencePattern, SPECTRAL_FLOOR};
pub use lobes::{angular_density, count_fr_lobes, LobeCounter};
pub use overlap::{
    autocorrelation, cross_section_density, expected_uniform_state, overlap_lambda, ring_profile, survival, Profile,
};
pub use revival::{
    ellipse_circumference, fr_times, measure_revival_time, predicted_revival_time, revival_time_predict,
    revival_window, FrFraction, RevivalEstimate,
};
pub use sweep::{beta_sweep, default_beta_range, BetaSweepConfig, BetaSweepResult};
