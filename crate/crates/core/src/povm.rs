//! Click-time densities of an ON/OFF detector with timing jitter.
//!
//! For `k` photons arriving at times `t_1..t_k`, the detector clicks at the
//! earliest detected photon's signal time (later signals fall in the dead
//! time). The density of that first click is
//!
//! ```text
//! p_on,k(T) = sum_i  eta * jitter(T - t_i) * prod_{j != i} [1 - eta * Jitter(T - t_j)]
//! ```
//!
//! where `Jitter` is the cumulative distribution of the delay.

use crate::density::DensityOverTime;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::jitter::JitterDistribution;
use crate::states::TemporalAmplitude;

/// Above this many photons the survival products are accumulated as logarithms.
const LOG_SPACE_THRESHOLD: usize = 30;

/// Efficiency, timing response and dark-count rate of one detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    efficiency: f64,
    jitter: JitterDistribution,
    dark_count_rate: f64,
}

impl DetectorModel {
    pub fn new(efficiency: f64, jitter: JitterDistribution) -> Result<Self> {
        if !(0.0..=1.0).contains(&efficiency) {
            return Err(Error::Parameter(format!(
                "efficiency must lie in [0, 1], got {efficiency}"
            )));
        }
        Ok(Self {
            efficiency,
            jitter: jitter.validated()?,
            dark_count_rate: 0.0,
        })
    }

    /// Dark counts per unit time.
    pub fn with_dark_count_rate(mut self, rate: f64) -> Result<Self> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::Parameter(format!(
                "dark-count rate must be nonnegative, got {rate}"
            )));
        }
        self.dark_count_rate = rate;
        Ok(self)
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn jitter(&self) -> &JitterDistribution {
        &self.jitter
    }

    pub fn dark_count_rate(&self) -> f64 {
        self.dark_count_rate
    }

    /// Probability that a photon arriving at `t` has not produced a click by `time`,
    /// i.e. it is either lost or its signal comes later.
    #[inline]
    fn no_click_yet(&self, time: f64, t: f64) -> f64 {
        (1.0 - self.efficiency) + self.efficiency * self.jitter.survival(time - t)
    }
}

/// Arrival times of `k` temporally localized photons, one per temporal mode.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonArrivalPattern {
    times: Vec<f64>,
}

impl PhotonArrivalPattern {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if let Some(t) = times.iter().find(|t| !t.is_finite()) {
            return Err(Error::Parameter(format!("arrival time {t} is not finite")));
        }
        Ok(Self { times })
    }

    /// `k` photons all arriving at `t`.
    pub fn simultaneous(k: usize, t: f64) -> Result<Self> {
        Self::new(vec![t; k])
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn span(&self) -> (f64, f64) {
        self.times
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| (lo.min(t), hi.max(t)))
    }
}

fn check_cover(det: &DetectorModel, first: f64, last: f64, grid: &TimeGrid) -> Result<()> {
    let (lo, hi) = det.jitter().support();
    grid.require_cover(first + lo, last + hi)
}

/// First-click density for an arbitrary arrival pattern. Dark counts are not
/// included; see [`add_dark_counts`].
pub fn firing_density(
    det: &DetectorModel,
    arrivals: &PhotonArrivalPattern,
    grid: &TimeGrid,
) -> Result<DensityOverTime> {
    if arrivals.is_empty() {
        return Err(Error::Domain(
            "a firing density needs at least one photon; model vacuum with add_dark_counts".into(),
        ));
    }
    let (first, last) = arrivals.span();
    check_cover(det, first, last, grid)?;

    let times = arrivals.times();
    let eta = det.efficiency();
    let k = times.len();
    let mut factors = vec![0.0; k];
    let mut prefix = vec![0.0; k + 1];
    let values = grid
        .points()
        .map(|time| {
            for (f, &t) in factors.iter_mut().zip(times) {
                *f = det.no_click_yet(time, t);
            }
            // exclusive products from prefix/suffix accumulation
            let mut total = 0.0;
            if k > LOG_SPACE_THRESHOLD {
                prefix[0] = 0.0;
                for j in 0..k {
                    prefix[j + 1] = prefix[j] + factors[j].ln();
                }
                let mut suffix = 0.0;
                for i in (0..k).rev() {
                    let others = (prefix[i] + suffix).exp();
                    total += eta * det.jitter().pdf(time - times[i]) * others;
                    suffix += factors[i].ln();
                }
            } else {
                prefix[0] = 1.0;
                for j in 0..k {
                    prefix[j + 1] = prefix[j] * factors[j];
                }
                let mut suffix = 1.0;
                for i in (0..k).rev() {
                    total += eta * det.jitter().pdf(time - times[i]) * prefix[i] * suffix;
                    suffix *= factors[i];
                }
            }
            total
        })
        .collect();
    Ok(DensityOverTime::from_kernel(*grid, values))
}

/// First-click density for `k` photons all arriving at `t`:
/// `k * eta * jitter(T - t) * [1 - eta * Jitter(T - t)]^(k - 1)`.
pub fn firing_density_simultaneous(
    det: &DetectorModel,
    k: usize,
    t: f64,
    grid: &TimeGrid,
) -> Result<DensityOverTime> {
    if k == 0 {
        return Err(Error::Domain("photon number k must be at least 1".into()));
    }
    if !t.is_finite() {
        return Err(Error::Parameter(format!("arrival time {t} is not finite")));
    }
    check_cover(det, t, t, grid)?;
    let eta = det.efficiency();
    let values = grid
        .points()
        .map(|time| {
            let f = det.no_click_yet(time, t);
            let others = if k > LOG_SPACE_THRESHOLD {
                ((k - 1) as f64 * f.ln()).exp()
            } else {
                f.powi(k as i32 - 1)
            };
            k as f64 * eta * det.jitter().pdf(time - t) * others
        })
        .collect();
    Ok(DensityOverTime::from_kernel(*grid, values))
}

/// Unbinned ON probability, the total mass of the click density.
pub fn on_probability(p: &DensityOverTime) -> f64 {
    p.mass()
}

/// ON probability for a click inside `[lo, hi]`.
pub fn binned_on_probability(p: &DensityOverTime, lo: f64, hi: f64) -> Result<f64> {
    p.integral_between(lo, hi)
}

/// Complement of [`binned_on_probability`] for the same interval.
pub fn binned_off_probability(p: &DensityOverTime, lo: f64, hi: f64) -> Result<f64> {
    Ok(1.0 - binned_on_probability(p, lo, hi)?)
}

/// Adds the detector's constant dark-count density over the grid window.
///
/// Approximation: dark clicks and photon clicks are treated as independent,
/// so a dark click does not blank a later photon click.
pub fn add_dark_counts(p: &DensityOverTime, det: &DetectorModel) -> DensityOverTime {
    let d = det.dark_count_rate();
    DensityOverTime::from_kernel(*p.grid(), p.values().iter().map(|v| v + d).collect())
}

/// Cell-averaged jitter at lag `x`, cut to zero for cells starting beyond the
/// support window so every kernel drops the same tail.
pub(crate) fn kernel_value(jitter: &JitterDistribution, x: f64, h: f64) -> f64 {
    if x - 0.5 * h > jitter.support().1 {
        0.0
    } else {
        jitter.cell_average(x, h)
    }
}

/// [`kernel_value`] at lags `0, h, 2h, ..` up to the end of the support.
pub(crate) fn jitter_kernel(jitter: &JitterDistribution, h: f64, max_len: usize) -> Vec<f64> {
    let reach = (jitter.support().1 / h).ceil() as usize + 2;
    (0..reach.min(max_len)).map(|m| kernel_value(jitter, m as f64 * h, h)).collect()
}

/// `out[I] = h * sum_i w_i kernel[I - i] source[i]` with trapezoid weights `w_i`.
pub(crate) fn causal_convolve(source: &[f64], kernel: &[f64], h: f64) -> Vec<f64> {
    let n = source.len();
    let mut out = vec![0.0; n];
    for (i, &s) in source.iter().enumerate() {
        if s == 0.0 {
            continue;
        }
        let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        let c = w * h * s;
        for (o, k) in out[i..].iter_mut().zip(kernel) {
            *o += c * k;
        }
    }
    out
}

/// Click density of a single photon with temporal amplitude `psi`: the jitter
/// convolved with the arrival-time density, `eta * (jitter * |psi|^2)(T)`.
pub fn detect_wavepacket(
    det: &DetectorModel,
    psi: &TemporalAmplitude,
    grid: &TimeGrid,
) -> Result<DensityOverTime> {
    let (p_lo, p_hi) = psi.support();
    let (j_lo, j_hi) = det.jitter().support();
    grid.require_cover(p_lo, p_hi)?;
    grid.require_cover(p_lo + j_lo, p_hi + j_hi)?;
    let h = grid.step();
    let source: Vec<f64> = grid.points().map(|t| psi.intensity_at(t)).collect();
    let kernel = jitter_kernel(det.jitter(), h, grid.len());
    let eta = det.efficiency();
    let values = causal_convolve(&source, &kernel, h)
        .into_iter()
        .map(|v| eta * v)
        .collect();
    Ok(DensityOverTime::from_kernel(*grid, values))
}
