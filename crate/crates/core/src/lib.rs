//! Dispersion-managed Gross–Pitaevskii dynamics in elliptical ring
//! waveguides: split-step solvers, ground states, revival and
//! interference diagnostics, and closed-form references.
//!
//! All quantities are in oscillator units (`ħ = m = ω⊥ = 1`, lengths in
//! `a⊥`) unless a function says otherwise; see [`units`] for conversion.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evolution;
pub mod fft;
pub mod field;
pub mod grid;
pub mod observables;
pub mod oracles;
pub mod potentials;
pub mod units;

pub use error::{Error, Result};
pub use evolution::{
    evolve_with_schedule, ground_state_itp, make_initial_state, split_step, DispersionPair, EvolutionConfig,
    EvolutionFailure, EvolutionOutput, GroundState, InitialState, Mode, Snapshot, SplitStepper, TimeSeries,
};
pub use field::{normalize, second_moment_width, Axis, ComplexField2D, RealField2D};
pub use grid::{make_grid, GridSpec};
pub use observables::{
    count_fr_lobes, ellipse_circumference, fringe_periods, measure_revival_time, overlap_lambda, revival_time_predict,
    survival, FrFraction,
};
pub use potentials::{elliptic_ring_potential, harmonic_potential, TrapSchedule, WaveguideParams};
pub use units::{coupling_from_params, PhysicalParams, TimeConvention};
