//! Click-time statistics of ON/OFF single-photon detectors with timing jitter.
//!
//! A detector is described by its efficiency, a jitter distribution for the
//! delay between photon arrival and click, and an optional dark-count rate.
//! Only the first click counts. From that model the crate computes
//!
//! - first-click densities for any pattern of photon arrival times
//!   ([`firing_density`]), and binned click probabilities;
//! - click densities of single-photon wavepackets ([`detect_wavepacket`]);
//! - joint and start-stop delay densities of photon pairs on two detectors
//!   ([`joint_firing_density`], [`delay_density`], [`delay_density_factorized`]);
//! - the state of one photon of a pair, given the click time of its twin
//!   ([`heralded_state`]);
//! - an event-level Monte Carlo simulator ([`montecarlo`]) used to cross-check
//!   all of the above.
//!
//! ```
//! use jitterpovm::{firing_density, DetectorModel, JitterDistribution, PhotonArrivalPattern, TimeGrid};
//!
//! let jitter = JitterDistribution::lognormal_from_moments(1.0, 0.5)?;
//! let det = DetectorModel::new(0.7, jitter)?;
//! let grid = TimeGrid::new(0.0, 14.0, 14_001)?;
//! let p = firing_density(&det, &PhotonArrivalPattern::simultaneous(2, 0.0)?, &grid)?;
//! assert!((p.mass() - (1.0 - 0.3f64.powi(2))).abs() < 1e-4);
//! # Ok::<(), jitterpovm::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coincidence;
pub mod density;
pub mod error;
pub mod grid;
pub mod heralding;
pub mod jitter;
pub mod montecarlo;
pub mod povm;
pub mod states;

pub use coincidence::{
    default_delay_grid, delay_density, delay_density_factorized, joint_firing_density, DelayIntensity,
    JointDensity,
};
pub use density::{DensityOverDelay, DensityOverTime, PeakStatistics, SampledDensity};
pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use heralding::{heralded_state, heralded_states, herald_time_density, temporal_spread, DiagonalTemporalState, TemporalSpread};
pub use jitter::{JitterDistribution, TAIL_CUTOFF};
pub use povm::{
    add_dark_counts, binned_off_probability, binned_on_probability, detect_wavepacket, firing_density,
    firing_density_simultaneous, on_probability, DetectorModel, PhotonArrivalPattern,
};
pub use states::{intensity, JointTemporalAmplitude, SampledAmplitude, SampledJointAmplitude, TemporalAmplitude};
