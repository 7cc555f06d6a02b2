//! Uniform time grids and the trapezoidal quadrature every integral in the
//! crate is computed with.

use crate::error::{Error, Result};

/// Uniform grid `t_min + i * step` for `i` in `0..n_points`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_min: f64,
    t_max: f64,
    n_points: usize,
}

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64, n_points: usize) -> Result<Self> {
        if !(t_min.is_finite() && t_max.is_finite()) {
            return Err(Error::Parameter(format!(
                "grid bounds must be finite, got [{t_min}, {t_max}]"
            )));
        }
        if t_min >= t_max {
            return Err(Error::Parameter(format!(
                "grid requires t_min < t_max, got [{t_min}, {t_max}]"
            )));
        }
        if n_points < 2 {
            return Err(Error::Parameter(format!(
                "grid requires at least 2 points, got {n_points}"
            )));
        }
        Ok(Self {
            t_min,
            t_max,
            n_points,
        })
    }

    /// Grid starting at `t_min` with the given spacing that reaches at least `t_max`.
    pub fn with_step(t_min: f64, t_max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Parameter(format!("grid step must be positive, got {step}")));
        }
        let intervals = ((t_max - t_min) / step - 1e-9).ceil().max(1.0) as usize;
        Self::new(t_min, t_min + intervals as f64 * step, intervals + 1)
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        (self.t_max - self.t_min) / (self.n_points - 1) as f64
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.t_max
        } else {
            self.t_min + i as f64 * self.step()
        }
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.point(i))
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_min && t <= self.t_max
    }

    /// Whether `[lo, hi]` lies inside the grid, allowing a relative slack of
    /// a millionth of a step at either end for rounding in the bounds.
    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        let slack = 1e-6 * self.step();
        lo >= self.t_min - slack && hi <= self.t_max + slack
    }

    pub(crate) fn require_cover(&self, lo: f64, hi: f64) -> Result<()> {
        if self.covers(lo, hi) {
            Ok(())
        } else {
            Err(Error::Coverage {
                grid_min: self.t_min,
                grid_max: self.t_max,
                required_min: lo,
                required_max: hi,
            })
        }
    }

    /// Composite trapezoid of samples taken on this grid.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        trapezoid(values, self.step())
    }
}

/// Composite trapezoid rule for equally spaced samples.
pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => step * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}

/// Running trapezoid integral; element `i` is the integral up to sample `i`.
pub fn cumulative_trapezoid(values: &[f64], step: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.extend(values.first().map(|_| 0.0));
    for pair in values.windows(2) {
        acc += 0.5 * step * (pair[0] + pair[1]);
        out.push(acc);
    }
    out
}
