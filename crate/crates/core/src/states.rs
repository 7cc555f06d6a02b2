//! Single-photon wavepackets and two-photon joint temporal amplitudes.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};
use statrs::function::erf::erfc_inv;

use crate::density::DensityOverTime;
use crate::error::{Error, Result};
use crate::grid::{cumulative_trapezoid, TimeGrid};
use crate::jitter::TAIL_CUTOFF;

/// Temporal amplitude `psi(t)` of a single photon, normalized so that
/// `|psi(t)|^2` integrates to one.
#[derive(Debug, Clone, PartialEq)]
pub enum TemporalAmplitude {
    /// Flat intensity `1 / width` on `[center - width/2, center + width/2]`,
    /// half of that exactly on the edges.
    Rectangular { center: f64, width: f64 },
    /// Gaussian amplitude whose intensity is normal with standard deviation `std`.
    Gaussian { center: f64, std: f64 },
    Sampled(SampledAmplitude),
}

/// Amplitude tabulated on a grid, linearly interpolated and zero outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledAmplitude {
    grid: TimeGrid,
    values: Vec<Complex64>,
    norm_deviation: f64,
    cumulative: Vec<f64>,
}

impl SampledAmplitude {
    /// Builds the amplitude and rescales it to unit norm. The relative norm
    /// deviation of the input is kept in [`Self::norm_deviation`].
    pub fn new(grid: TimeGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Parameter(format!(
                "{} amplitude values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Parameter("amplitude values must be finite".into()));
        }
        let norm = grid.integrate(&values.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>());
        if norm <= 0.0 {
            return Err(Error::Domain("amplitude is identically zero".into()));
        }
        let scale = norm.sqrt().recip();
        let values: Vec<Complex64> = values.into_iter().map(|v| v * scale).collect();
        let intensity: Vec<f64> = values.iter().map(|v| v.norm_sqr()).collect();
        Ok(Self {
            grid,
            cumulative: cumulative_trapezoid(&intensity, grid.step()),
            values,
            norm_deviation: norm - 1.0,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `norm - 1` of the values handed to [`Self::new`].
    pub fn norm_deviation(&self) -> f64 {
        self.norm_deviation
    }

    /// Multiplies by `exp(i * phase)`.
    pub fn with_global_phase(&self, phase: f64) -> Self {
        let rot = Complex64::from_polar(1.0, phase);
        Self {
            values: self.values.iter().map(|v| v * rot).collect(),
            ..self.clone()
        }
    }

    fn at(&self, t: f64) -> Complex64 {
        let g = &self.grid;
        if !g.contains(t) {
            return Complex64::new(0.0, 0.0);
        }
        let x = (t - g.t_min()) / g.step();
        let i = (x as usize).min(g.len() - 2);
        let frac = x - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    // Inverts the cumulative of the piecewise-linear intensity.
    fn sample_time(&self, u: f64) -> f64 {
        let total = *self.cumulative.last().unwrap();
        let target = u * total;
        let i = self
            .cumulative
            .partition_point(|&c| c <= target)
            .clamp(1, self.cumulative.len() - 1)
            - 1;
        let h = self.grid.step();
        let (f0, f1) = (self.values[i].norm_sqr(), self.values[i + 1].norm_sqr());
        let rest = target - self.cumulative[i];
        // solve f0 d + (f1 - f0) d^2 / (2h) = rest for d in [0, h]
        let slope = (f1 - f0) / h;
        let d = if slope.abs() < 1e-12 * (f0 + f1).max(f64::MIN_POSITIVE) / h {
            if f0 > 0.0 { rest / f0 } else { 0.5 * h }
        } else {
            let disc = (f0 * f0 + 2.0 * slope * rest).max(0.0);
            (disc.sqrt() - f0) / slope
        };
        self.grid.point(i) + d.clamp(0.0, h)
    }
}

impl TemporalAmplitude {
    pub fn rectangular(center: f64, width: f64) -> Result<Self> {
        if !(center.is_finite() && width > 0.0 && width.is_finite()) {
            return Err(Error::Parameter(format!(
                "rectangular amplitude needs a finite center and positive width, got ({center}, {width})"
            )));
        }
        Ok(Self::Rectangular { center, width })
    }

    pub fn gaussian(center: f64, std: f64) -> Result<Self> {
        if !(center.is_finite() && std > 0.0 && std.is_finite()) {
            return Err(Error::Parameter(format!(
                "gaussian amplitude needs a finite center and positive std, got ({center}, {std})"
            )));
        }
        Ok(Self::Gaussian { center, std })
    }

    pub fn amplitude(&self, t: f64) -> Complex64 {
        match self {
            Self::Rectangular { center, width } => {
                let offset = (t - center).abs();
                if offset < 0.5 * width {
                    Complex64::new(width.sqrt().recip(), 0.0)
                } else if offset == 0.5 * width {
                    Complex64::new((2.0 * width).sqrt().recip(), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Self::Gaussian { center, std } => {
                let z = (t - center) / std;
                let norm = (2.0 * PI * std * std).powf(-0.25);
                Complex64::new(norm * (-0.25 * z * z).exp(), 0.0)
            }
            Self::Sampled(s) => s.at(t),
        }
    }

    /// Arrival-time density `|psi(t)|^2`.
    pub fn intensity_at(&self, t: f64) -> f64 {
        if let Self::Rectangular { center, width } = self {
            let offset = (t - center).abs();
            return match offset.partial_cmp(&(0.5 * width)) {
                Some(std::cmp::Ordering::Less) => width.recip(),
                Some(std::cmp::Ordering::Equal) => 0.5 / width,
                _ => 0.0,
            };
        }
        self.amplitude(t).norm_sqr()
    }

    /// Interval holding the intensity; Gaussians are cut where the two tails
    /// together hold [`TAIL_CUTOFF`].
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Rectangular { center, width } => (center - 0.5 * width, center + 0.5 * width),
            Self::Gaussian { center, std } => {
                let r = std * SQRT_2 * erfc_inv(TAIL_CUTOFF);
                (center - r, center + r)
            }
            Self::Sampled(s) => (s.grid.t_min(), s.grid.t_max()),
        }
    }

    /// Tabulates the amplitude on `grid` without renormalizing.
    pub fn sampled_on(&self, grid: &TimeGrid) -> Result<SampledAmplitude> {
        SampledAmplitude::new(*grid, grid.points().map(|t| self.amplitude(t)).collect())
    }

    /// Draws an arrival time from `|psi|^2`.
    pub fn sample_time(&self, rng: &mut dyn RngCore) -> f64 {
        match self {
            Self::Rectangular { center, width } => center + width * (rng.random::<f64>() - 0.5),
            Self::Gaussian { center, std } => {
                let z: f64 = StandardNormal.sample(rng);
                center + std * z
            }
            Self::Sampled(s) => s.sample_time(rng.random::<f64>()),
        }
    }
}

/// `|psi(t)|^2` sampled on a grid.
pub fn intensity(psi: &TemporalAmplitude, grid: &TimeGrid) -> DensityOverTime {
    DensityOverTime::from_kernel(*grid, grid.points().map(|t| psi.intensity_at(t)).collect())
}

/// Two-photon joint temporal amplitude `phi(t_A, t_B)`.
#[derive(Debug, Clone, PartialEq)]
pub enum JointTemporalAmplitude {
    General(SampledJointAmplitude),
    /// `phi(t_A, t_B) = psi(t_A) * chi(t_B - t_A)`: pair emission envelope
    /// times the amplitude of the delay within a pair.
    Factorized {
        pair_envelope: TemporalAmplitude,
        delay_amplitude: TemporalAmplitude,
    },
}

/// Joint amplitude tabulated on `grid_a x grid_b`, row-major in `t_A`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledJointAmplitude {
    grid_a: TimeGrid,
    grid_b: TimeGrid,
    values: Vec<Complex64>,
}

impl SampledJointAmplitude {
    /// Builds from user values and rescales to unit norm; returns the
    /// relative deviation of the input norm alongside.
    pub fn new(grid_a: TimeGrid, grid_b: TimeGrid, values: Vec<Complex64>) -> Result<(Self, f64)> {
        if values.len() != grid_a.len() * grid_b.len() {
            return Err(Error::Parameter(format!(
                "{} joint amplitude values for a {}x{} grid",
                values.len(),
                grid_a.len(),
                grid_b.len()
            )));
        }
        let raw = Self {
            grid_a,
            grid_b,
            values,
        };
        let norm = raw.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Domain(format!("joint amplitude norm {norm} cannot be normalized")));
        }
        let scale = norm.sqrt().recip();
        let values = raw.values.into_iter().map(|v| v * scale).collect();
        Ok((
            Self {
                grid_a,
                grid_b,
                values,
            },
            norm - 1.0,
        ))
    }

    pub fn grid_a(&self) -> &TimeGrid {
        &self.grid_a
    }

    pub fn grid_b(&self) -> &TimeGrid {
        &self.grid_b
    }

    pub fn value(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.grid_b.len() + j]
    }

    /// `|phi|^2` in row-major order.
    pub fn joint_intensity(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// Double trapezoid of `|phi|^2`.
    pub fn norm(&self) -> f64 {
        let nb = self.grid_b.len();
        let rows: Vec<f64> = self
            .values
            .chunks(nb)
            .map(|row| self.grid_b.integrate(&row.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>()))
            .collect();
        self.grid_a.integrate(&rows)
    }

    /// Marginal arrival density on arm A.
    pub fn marginal_a(&self) -> DensityOverTime {
        let nb = self.grid_b.len();
        let rows = self
            .values
            .chunks(nb)
            .map(|row| self.grid_b.integrate(&row.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>()))
            .collect();
        DensityOverTime::from_kernel(self.grid_a, rows)
    }
}

impl JointTemporalAmplitude {
    /// Uncorrelated photons: `phi(t_A, t_B) = psi_a(t_A) * psi_b(t_B)`.
    pub fn product(
        psi_a: &TemporalAmplitude,
        psi_b: &TemporalAmplitude,
        grid_a: &TimeGrid,
        grid_b: &TimeGrid,
    ) -> Result<Self> {
        let a: Vec<Complex64> = grid_a.points().map(|t| psi_a.amplitude(t)).collect();
        let b: Vec<Complex64> = grid_b.points().map(|t| psi_b.amplitude(t)).collect();
        let values = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
        Ok(Self::General(SampledJointAmplitude::new(*grid_a, *grid_b, values)?.0))
    }

    pub fn factorized(pair_envelope: TemporalAmplitude, delay_amplitude: TemporalAmplitude) -> Self {
        Self::Factorized {
            pair_envelope,
            delay_amplitude,
        }
    }

    /// Tabulates a factorized amplitude on `grid_a x grid_b` and rescales it
    /// to unit norm, so a coarsely sampled delay amplitude does not change the
    /// pair's total probability. The grids must contain the supports of the
    /// envelope and of envelope-plus-delay respectively.
    pub fn expand_factorized(&self, grid_a: &TimeGrid, grid_b: &TimeGrid) -> Result<SampledJointAmplitude> {
        let Self::Factorized {
            pair_envelope,
            delay_amplitude,
        } = self
        else {
            return Err(Error::Domain("expand_factorized needs a factorized amplitude".into()));
        };
        let (a_lo, a_hi) = pair_envelope.support();
        let (d_lo, d_hi) = delay_amplitude.support();
        grid_a.require_cover(a_lo, a_hi)?;
        grid_b.require_cover(a_lo + d_lo, a_hi + d_hi)?;
        let mut values = Vec::with_capacity(grid_a.len() * grid_b.len());
        for ta in grid_a.points() {
            let psi = pair_envelope.amplitude(ta);
            values.extend(grid_b.points().map(|tb| psi * delay_amplitude.amplitude(tb - ta)));
        }
        Ok(SampledJointAmplitude::new(*grid_a, *grid_b, values)?.0)
    }

    /// `phi(t_A, t_B)` for the factorized form, `None` for a tabulated one.
    pub fn amplitude(&self, ta: f64, tb: f64) -> Option<Complex64> {
        match self {
            Self::Factorized {
                pair_envelope,
                delay_amplitude,
            } => Some(pair_envelope.amplitude(ta) * delay_amplitude.amplitude(tb - ta)),
            Self::General(_) => None,
        }
    }
}
