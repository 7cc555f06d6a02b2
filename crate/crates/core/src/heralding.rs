//! Heralded single photons: the state left on arm A when the detector on arm
//! B of a simultaneous pair clicks at time `T`.
//!
//! The heralded state is diagonal in time with weights
//! `w(t) = jitter(T - t) |psi(t)|^2 / integral jitter(T - t') |psi(t')|^2 dt'`.
//! A sharp detector pins the emission time; a broad one leaves the envelope
//! almost unchanged.

use rayon::prelude::*;

use crate::density::{DensityOverTime, SampledDensity};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::povm::{detect_wavepacket, kernel_value, DetectorModel};
use crate::states::TemporalAmplitude;

/// Diagonal of a heralded density operator: a unit-area density of the
/// photon's emission time.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalTemporalState {
    weights: SampledDensity,
}

/// First two moments of a [`DiagonalTemporalState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalSpread {
    pub mean: f64,
    pub std: f64,
}

impl DiagonalTemporalState {
    pub fn grid(&self) -> &TimeGrid {
        self.weights.grid()
    }

    pub fn weights(&self) -> &SampledDensity {
        &self.weights
    }

    pub fn values(&self) -> &[f64] {
        self.weights.values()
    }
}

/// State heralded by a click at `herald_time` on a detector facing the twin
/// of a simultaneous pair with envelope `psi`. The herald efficiency cancels.
pub fn heralded_state(
    det_b: &DetectorModel,
    psi: &TemporalAmplitude,
    herald_time: f64,
    grid: &TimeGrid,
) -> Result<DiagonalTemporalState> {
    let (lo, hi) = psi.support();
    grid.require_cover(lo, hi)?;
    let h = grid.step();
    let jitter = det_b.jitter();
    let raw: Vec<f64> = grid
        .points()
        .map(|t| kernel_value(jitter, herald_time - t, h) * psi.intensity_at(t))
        .collect();
    let norm = grid.integrate(&raw);
    if !(norm > 0.0) {
        return Err(Error::ImpossibleHerald { time: herald_time });
    }
    let weights = SampledDensity::from_kernel(*grid, raw.into_iter().map(|v| v / norm).collect());
    Ok(DiagonalTemporalState { weights })
}

/// [`heralded_state`] for many herald times, evaluated in parallel.
pub fn heralded_states(
    det_b: &DetectorModel,
    psi: &TemporalAmplitude,
    herald_times: &[f64],
    grid: &TimeGrid,
) -> Vec<Result<DiagonalTemporalState>> {
    herald_times
        .par_iter()
        .map(|&t| heralded_state(det_b, psi, t, grid))
        .collect()
}

/// Density of herald click times, `eta * (jitter * |psi|^2)(T)`.
pub fn herald_time_density(
    det_b: &DetectorModel,
    psi: &TemporalAmplitude,
    grid: &TimeGrid,
) -> Result<DensityOverTime> {
    detect_wavepacket(det_b, psi, grid)
}

pub fn temporal_spread(state: &DiagonalTemporalState) -> TemporalSpread {
    // a heralded state always has unit mass
    let (mean, std) = state.weights.moments().unwrap_or((f64::NAN, f64::NAN));
    TemporalSpread { mean, std }
}
