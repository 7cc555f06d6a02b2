//! Nonnegative densities sampled on a [`TimeGrid`].

use crate::error::{Error, Result};
use crate::grid::{cumulative_trapezoid, TimeGrid};

/// A density sampled on a uniform grid, with its trapezoidal mass cached.
///
/// Between grid points the density is taken to be linear, so every partial
/// integral below agrees with the trapezoid rule on the full grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledDensity {
    grid: TimeGrid,
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

/// Click-time density `p_on(T)`.
pub type DensityOverTime = SampledDensity;

/// Start-stop delay density `p_{B-A}(delta)`.
pub type DensityOverDelay = SampledDensity;

/// Location and width summary of a peaked density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakStatistics {
    pub mode: f64,
    pub mean: f64,
    pub std: f64,
    pub fwhm: f64,
}

impl SampledDensity {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Parameter(format!(
                "{} density values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Domain(format!("density value {bad} is not a finite nonnegative number")));
        }
        let cumulative = cumulative_trapezoid(&values, grid.step());
        Ok(Self {
            grid,
            values,
            cumulative,
        })
    }

    /// Values produced by the crate's own kernels; clamps rounding noise below zero.
    pub(crate) fn from_kernel(grid: TimeGrid, mut values: Vec<f64>) -> Self {
        for v in &mut values {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let cumulative = cumulative_trapezoid(&values, grid.step());
        Self {
            grid,
            values,
            cumulative,
        }
    }

    /// Identically zero density, e.g. the photon-induced part for vacuum.
    pub fn zeros(grid: TimeGrid) -> Self {
        Self::from_kernel(grid, vec![0.0; grid.len()])
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mass(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }

    /// Iterator over `(grid point, value)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.points().zip(self.values.iter().copied())
    }

    /// Integral of the density from the start of the grid up to `x`.
    pub fn cumulative_at(&self, x: f64) -> f64 {
        let (lo, hi) = (self.grid.t_min(), self.grid.t_max());
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return self.mass();
        }
        let h = self.grid.step();
        let i = (((x - lo) / h) as usize).min(self.len() - 2);
        let d = x - self.grid.point(i);
        let (f0, f1) = (self.values[i], self.values[i + 1]);
        self.cumulative[i] + f0 * d + (f1 - f0) * d * d / (2.0 * h)
    }

    /// Integral over `[lo, hi]`, clipped to the grid.
    pub fn integral_between(&self, lo: f64, hi: f64) -> Result<f64> {
        if !(lo < hi) {
            return Err(Error::Domain(format!("degenerate interval [{lo}, {hi}]")));
        }
        Ok((self.cumulative_at(hi) - self.cumulative_at(lo)).max(0.0))
    }

    /// Cumulative distribution of the normalized density at `x`.
    pub fn normalized_cdf(&self, x: f64) -> f64 {
        self.cumulative_at(x) / self.mass()
    }

    fn require_mass(&self) -> Result<f64> {
        let mass = self.mass();
        if mass > 0.0 {
            Ok(mass)
        } else {
            Err(Error::Domain("density has zero mass".into()))
        }
    }

    /// Same density scaled to unit mass.
    pub fn normalized(&self) -> Result<Self> {
        let mass = self.require_mass()?;
        Ok(Self::from_kernel(
            self.grid,
            self.values.iter().map(|v| v / mass).collect(),
        ))
    }

    /// Mean and standard deviation of the normalized density.
    pub fn moments(&self) -> Result<(f64, f64)> {
        let mass = self.require_mass()?;
        let g = &self.grid;
        let first: Vec<f64> = self.iter().map(|(t, v)| t * v).collect();
        let mean = g.integrate(&first) / mass;
        let second: Vec<f64> = self.iter().map(|(t, v)| (t - mean).powi(2) * v).collect();
        let var = g.integrate(&second) / mass;
        Ok((mean, var.max(0.0).sqrt()))
    }

    /// Mode, moments and full width at half maximum. The half-maximum
    /// crossings are located by linear interpolation between grid points.
    pub fn peak_statistics(&self) -> Result<PeakStatistics> {
        let (mean, std) = self.moments()?;
        let (imax, &vmax) = self
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let half = 0.5 * vmax;
        let crossing = |i: usize, j: usize| {
            let (ti, tj) = (self.grid.point(i), self.grid.point(j));
            let (vi, vj) = (self.values[i], self.values[j]);
            ti + (half - vi) * (tj - ti) / (vj - vi)
        };
        // outermost crossings, scanning in from the grid edges
        let left = match self.values[..=imax].iter().position(|&v| v >= half) {
            Some(0) | None => self.grid.t_min(),
            Some(i) => crossing(i - 1, i),
        };
        let right = match self.values[imax..].iter().rposition(|&v| v >= half) {
            Some(r) if imax + r + 1 < self.len() => crossing(imax + r, imax + r + 1),
            _ => self.grid.t_max(),
        };
        Ok(PeakStatistics {
            mode: self.grid.point(imax),
            mean,
            std,
            fwhm: right - left,
        })
    }
}
