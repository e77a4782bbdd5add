//! Shaping a classical drive so that a single-photon wavepacket arriving
//! through a structured (Lorentzian) bath is absorbed by a three-level atom
//! in a cavity, plus forward solvers to check the result.

// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dark_state;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod model;
pub mod numerics;
pub mod pulse_design;

pub use num_complex::Complex64;

pub use dark_state::{
    adiabatic_design, adiabatic_simulate, exact_dark_population, DarkComparison, DarkDesign,
};
pub use dynamics::{
    simulate_discrete_bath, simulate_markovian, simulate_nonmarkovian, storage_metrics,
    BathDiscretization, InitialState, StorageMetrics, Trajectory,
};
pub use error::{Error, Result};
pub use grid::{Stage, Staggered, TimeGrid};
pub use model::{DoubleLobePulse, InputPulse, PhysicalParams, SampledPulse, SpectralModel};
pub use pulse_design::{
    coupling_from_bandwidth, design_drive, design_drive_markovian, DesignResult, DriveSeries,
    MarkovianDesignResult, Regime,
};
