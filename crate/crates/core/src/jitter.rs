//! Detector response distributions: the density of the delay between a
//! photon hitting the detector and the electrical click it produces.
//!
//! Every distribution is causal (no mass at negative delays) and carries
//! unit mass; detection efficiency lives in [`crate::DetectorModel`].

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};

/// Tail probability dropped when an unbounded distribution is evaluated on a
/// finite window.
pub const TAIL_CUTOFF: f64 = 1e-8;

/// Delay distribution of a detector's click with respect to the photon arrival.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JitterDistribution {
    /// `ln(tau)` is normal with the given location and scale.
    LogNormal { location: f64, scale: f64 },
    /// Normal with `mean` and `std`, restricted to `tau >= 0` and renormalized.
    TruncatedGaussian { mean: f64, std: f64 },
    /// Uniform on `[start, end]`.
    Rectangular { start: f64, end: f64 },
    /// Uniform on `[center - halfwidth, center + halfwidth]` clipped to `tau >= 0`.
    /// Stands in for a jitter-free detector with a fixed latency.
    NearDelta { center: f64, halfwidth: f64 },
}

// Upper-tail probability of the standard normal.
fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

fn normal_sf_inv(q: f64) -> f64 {
    SQRT_2 * erfc_inv(2.0 * q)
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be positive and finite, got {v}")))
    }
}

impl JitterDistribution {
    pub fn log_normal(location: f64, scale: f64) -> Result<Self> {
        Self::LogNormal { location, scale }.validated()
    }

    /// Log-normal whose delay has the given mean and standard deviation.
    pub fn lognormal_from_moments(mean: f64, std: f64) -> Result<Self> {
        positive("log-normal mean", mean)?;
        positive("log-normal std", std)?;
        let variance = (std / mean).powi(2).ln_1p();
        Self::log_normal(mean.ln() - 0.5 * variance, variance.sqrt())
    }

    pub fn truncated_gaussian(mean: f64, std: f64) -> Result<Self> {
        Self::TruncatedGaussian { mean, std }.validated()
    }

    pub fn rectangular(start: f64, end: f64) -> Result<Self> {
        Self::Rectangular { start, end }.validated()
    }

    pub fn near_delta(center: f64, halfwidth: f64) -> Result<Self> {
        Self::NearDelta { center, halfwidth }.validated()
    }

    /// Checks the parameter invariants of the variant.
    pub fn validated(self) -> Result<Self> {
        match self {
            Self::LogNormal { location, scale } => {
                if !location.is_finite() {
                    return Err(Error::Parameter(format!(
                        "log-normal location must be finite, got {location}"
                    )));
                }
                positive("log-normal scale", scale)?;
            }
            Self::TruncatedGaussian { mean, std } => {
                if !mean.is_finite() {
                    return Err(Error::Parameter(format!(
                        "truncated gaussian mean must be finite, got {mean}"
                    )));
                }
                positive("truncated gaussian std", std)?;
                if normal_sf(-mean / std) <= 0.0 {
                    return Err(Error::Parameter(format!(
                        "truncated gaussian ({mean}, {std}) has no mass at positive delays"
                    )));
                }
            }
            Self::Rectangular { start, end } => {
                if !(start >= 0.0 && end > start && end.is_finite()) {
                    return Err(Error::Parameter(format!(
                        "rectangular jitter requires 0 <= start < end, got [{start}, {end}]"
                    )));
                }
            }
            Self::NearDelta { center, halfwidth } => {
                if !(center >= 0.0 && center.is_finite()) {
                    return Err(Error::Parameter(format!(
                        "near-delta center must be >= 0, got {center}"
                    )));
                }
                positive("near-delta halfwidth", halfwidth)?;
            }
        }
        Ok(self)
    }

    fn truncation(mean: f64, std: f64) -> (f64, f64) {
        let alpha = -mean / std;
        (alpha, normal_sf(alpha))
    }

    /// Uniform bounds of the two flat variants.
    fn flat_bounds(&self) -> Option<(f64, f64)> {
        match *self {
            Self::Rectangular { start, end } => Some((start, end)),
            Self::NearDelta { center, halfwidth } => {
                Some(((center - halfwidth).max(0.0), center + halfwidth))
            }
            _ => None,
        }
    }

    /// Density at delay `tau`; zero for negative delays.
    pub fn pdf(&self, tau: f64) -> f64 {
        if tau < 0.0 {
            return 0.0;
        }
        match *self {
            Self::LogNormal { location, scale } => {
                if tau == 0.0 {
                    return 0.0;
                }
                let z = (tau.ln() - location) / scale;
                normal_pdf(z) / (tau * scale)
            }
            Self::TruncatedGaussian { mean, std } => {
                let (_, mass) = Self::truncation(mean, std);
                normal_pdf((tau - mean) / std) / (std * mass)
            }
            Self::Rectangular { .. } | Self::NearDelta { .. } => {
                let (lo, hi) = self.flat_bounds().unwrap();
                if tau >= lo && tau <= hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
        }
    }

    /// Probability that the delay is at most `tau`.
    pub fn cdf(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            return 0.0;
        }
        1.0 - self.survival(tau)
    }

    /// Probability that the delay exceeds `tau`, computed without cancellation.
    pub fn survival(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            return 1.0;
        }
        match *self {
            Self::LogNormal { location, scale } => normal_sf((tau.ln() - location) / scale),
            Self::TruncatedGaussian { mean, std } => {
                let (_, mass) = Self::truncation(mean, std);
                (normal_sf((tau - mean) / std) / mass).min(1.0)
            }
            Self::Rectangular { .. } | Self::NearDelta { .. } => {
                let (lo, hi) = self.flat_bounds().unwrap();
                ((hi - tau) / (hi - lo)).clamp(0.0, 1.0)
            }
        }
    }

    /// Mean density over the cell `[x - h/2, x + h/2]`. Grid convolutions use
    /// this instead of point values so jitters narrower than a cell keep their mass.
    pub fn cell_average(&self, x: f64, h: f64) -> f64 {
        ((self.survival(x - 0.5 * h) - self.survival(x + 0.5 * h)) / h).max(0.0)
    }

    /// Inverse cdf for `p` in `[0, 1)`.
    pub fn quantile(&self, p: f64) -> f64 {
        debug_assert!((0.0..1.0).contains(&p));
        self.upper_quantile(1.0 - p)
    }

    /// Delay exceeded with probability `q`, for `q` in `(0, 1]`.
    pub fn upper_quantile(&self, q: f64) -> f64 {
        match *self {
            Self::LogNormal { location, scale } => (location + scale * normal_sf_inv(q)).exp(),
            Self::TruncatedGaussian { mean, std } => {
                let (_, mass) = Self::truncation(mean, std);
                (mean + std * normal_sf_inv(q * mass)).max(0.0)
            }
            Self::Rectangular { .. } | Self::NearDelta { .. } => {
                let (lo, hi) = self.flat_bounds().unwrap();
                hi - q * (hi - lo)
            }
        }
    }

    /// Window `[lo, hi]` outside which the density is zero or, for unbounded
    /// distributions, carries less than [`TAIL_CUTOFF`] of the mass.
    pub fn support(&self) -> (f64, f64) {
        match self.flat_bounds() {
            Some(bounds) => bounds,
            None => (0.0, self.upper_quantile(TAIL_CUTOFF)),
        }
    }

    /// Mass beyond the upper end of [`Self::support`].
    pub fn dropped_tail_mass(&self) -> f64 {
        match self {
            Self::LogNormal { .. } | Self::TruncatedGaussian { .. } => TAIL_CUTOFF,
            _ => 0.0,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::LogNormal { location, scale } => (location + 0.5 * scale * scale).exp(),
            Self::TruncatedGaussian { mean, std } => {
                let (alpha, mass) = Self::truncation(mean, std);
                mean + std * normal_pdf(alpha) / mass
            }
            Self::Rectangular { .. } | Self::NearDelta { .. } => {
                let (lo, hi) = self.flat_bounds().unwrap();
                0.5 * (lo + hi)
            }
        }
    }

    pub fn std(&self) -> f64 {
        match *self {
            Self::LogNormal { location, scale } => {
                let s2 = scale * scale;
                (s2.exp_m1() * (2.0 * location + s2).exp()).sqrt()
            }
            Self::TruncatedGaussian { mean, std } => {
                let (alpha, mass) = Self::truncation(mean, std);
                let ratio = normal_pdf(alpha) / mass;
                std * (1.0 + alpha * ratio - ratio * ratio).sqrt()
            }
            Self::Rectangular { .. } | Self::NearDelta { .. } => {
                let (lo, hi) = self.flat_bounds().unwrap();
                (hi - lo) / 12f64.sqrt()
            }
        }
    }

    /// Draws one delay. Deterministic given the state of `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::LogNormal { location, scale } => {
                let z: f64 = StandardNormal.sample(rng);
                (location + scale * z).exp()
            }
            Self::TruncatedGaussian { mean, std } => {
                let (_, mass) = Self::truncation(mean, std);
                // u in (0, 1] keeps the inverse finite
                let u = 1.0 - rng.random::<f64>();
                (mean + std * normal_sf_inv(u * mass)).max(0.0)
            }
            Self::Rectangular { .. } | Self::NearDelta { .. } => {
                let (lo, hi) = self.flat_bounds().unwrap();
                lo + (hi - lo) * rng.random::<f64>()
            }
        }
    }
}
