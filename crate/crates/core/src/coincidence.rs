//! Two-detector click statistics: the joint click-time density of a photon
//! pair and the density of the start-stop delay `T_B - T_A`.
//!
//! The delay density is available by two independent routes. One builds the
//! full joint density and integrates it along lines of constant delay. The
//! other convolves the detectors' response cross-correlation with the
//! intra-pair delay distribution, in which the pair emission envelope never
//! appears. On a common lattice the two agree to rounding.

use rayon::prelude::*;

use crate::density::{DensityOverDelay, PeakStatistics};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::povm::{jitter_kernel, kernel_value, DetectorModel};
use crate::states::{JointTemporalAmplitude, TemporalAmplitude};

/// Joint click-time density `p_on(T_A, T_B)` on `grid_a x grid_b`, row-major in `T_A`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDensity {
    grid_a: TimeGrid,
    grid_b: TimeGrid,
    values: Vec<f64>,
}

impl JointDensity {
    pub fn grid_a(&self) -> &TimeGrid {
        &self.grid_a
    }

    pub fn grid_b(&self) -> &TimeGrid {
        &self.grid_b
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid_b.len() + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn row(&self, i: usize) -> &[f64] {
        let nb = self.grid_b.len();
        &self.values[i * nb..(i + 1) * nb]
    }

    /// Double trapezoid, i.e. the probability that both detectors click.
    pub fn mass(&self) -> f64 {
        let rows: Vec<f64> = (0..self.grid_a.len())
            .map(|i| self.grid_b.integrate(self.row(i)))
            .collect();
        self.grid_a.integrate(&rows)
    }
}

/// Distribution of the delay `t_B - t_A` between the two photons of a pair.
#[derive(Debug, Clone, PartialEq)]
pub enum DelayIntensity {
    /// Perfectly simultaneous photons, `|chi|^2 = delta`.
    Simultaneous,
    /// `|chi(t)|^2` of a normalized delay amplitude.
    Amplitude(TemporalAmplitude),
}

impl DelayIntensity {
    fn support(&self) -> (f64, f64) {
        match self {
            Self::Simultaneous => (0.0, 0.0),
            Self::Amplitude(chi) => chi.support(),
        }
    }

    /// Weights of the delays `k * h`, summing to one, with the first lattice index.
    fn lattice_weights(&self, h: f64) -> (i64, Vec<f64>) {
        match self {
            Self::Simultaneous => (0, vec![1.0]),
            Self::Amplitude(chi) => {
                let (lo, hi) = chi.support();
                // one empty cell on each side so the trapezoid end weights land on zeros
                let k_lo = (lo / h).floor() as i64 - 1;
                let k_hi = (hi / h).ceil() as i64 + 1;
                let raw: Vec<f64> = (k_lo..=k_hi).map(|k| chi.intensity_at(k as f64 * h)).collect();
                let total: f64 = raw.iter().sum();
                (k_lo, raw.into_iter().map(|v| v / total).collect())
            }
        }
    }
}

fn check_general_cover(
    intensity: &[f64],
    grid_a: &TimeGrid,
    grid_b: &TimeGrid,
    det_a: &DetectorModel,
    det_b: &DetectorModel,
) -> Result<()> {
    let nb = grid_b.len();
    // ignore numerically negligible tails of closed-form amplitudes
    let floor = 1e-12 * intensity.iter().cloned().fold(0.0, f64::max);
    let (mut last_a, mut last_b) = (0, 0);
    for (idx, &v) in intensity.iter().enumerate() {
        if v > floor {
            last_a = last_a.max(idx / nb);
            last_b = last_b.max(idx % nb);
        }
    }
    grid_a.require_cover(grid_a.t_min(), grid_a.point(last_a) + det_a.jitter().support().1)?;
    grid_b.require_cover(grid_b.t_min(), grid_b.point(last_b) + det_b.jitter().support().1)
}

/// Joint click density for one photon per arm:
/// `eta_A eta_B * double convolution of the two jitters with |phi|^2`.
///
/// The click grids double as the photon-time grids, so they must contain the
/// photon supports plus the jitter reach of each detector.
pub fn joint_firing_density(
    det_a: &DetectorModel,
    det_b: &DetectorModel,
    phi: &JointTemporalAmplitude,
    grid_a: &TimeGrid,
    grid_b: &TimeGrid,
) -> Result<JointDensity> {
    let intensity = match phi {
        JointTemporalAmplitude::Factorized {
            pair_envelope,
            delay_amplitude,
        } => {
            let (p_lo, p_hi) = pair_envelope.support();
            let (d_lo, d_hi) = delay_amplitude.support();
            let (a_lo, a_hi) = det_a.jitter().support();
            let (b_lo, b_hi) = det_b.jitter().support();
            grid_a.require_cover(p_lo + a_lo, p_hi + a_hi)?;
            grid_b.require_cover(p_lo + d_lo + b_lo, p_hi + d_hi + b_hi)?;
            phi.expand_factorized(grid_a, grid_b)?.joint_intensity()
        }
        JointTemporalAmplitude::General(s) => {
            if s.grid_a() != grid_a || s.grid_b() != grid_b {
                return Err(Error::Parameter(
                    "a tabulated joint amplitude must be evaluated on its own grids".into(),
                ));
            }
            let intensity = s.joint_intensity();
            check_general_cover(&intensity, grid_a, grid_b, det_a, det_b)?;
            intensity
        }
    };

    let (na, nb) = (grid_a.len(), grid_b.len());
    let (ha, hb) = (grid_a.step(), grid_b.step());
    let kernel_a = jitter_kernel(det_a.jitter(), ha, na);
    let kernel_b = jitter_kernel(det_b.jitter(), hb, nb);
    let trapezoid = |i: usize, n: usize| if i == 0 || i + 1 == n { 0.5 } else { 1.0 };

    // convolve along t_B, row by row
    let partial: Vec<Vec<f64>> = intensity
        .par_chunks(nb)
        .map(|row| {
            let mut out = vec![0.0; nb];
            for (j, &v) in row.iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                let c = trapezoid(j, nb) * hb * v;
                for (o, k) in out[j..].iter_mut().zip(&kernel_b) {
                    *o += c * k;
                }
            }
            out
        })
        .collect();

    // then along t_A; each output row sums its sources in a fixed order
    let eta = det_a.efficiency() * det_b.efficiency();
    let values: Vec<f64> = (0..na)
        .into_par_iter()
        .flat_map_iter(|big_i| {
            let mut out = vec![0.0; nb];
            let first = big_i.saturating_sub(kernel_a.len() - 1);
            for i in first..=big_i {
                let c = eta * trapezoid(i, na) * ha * kernel_a[big_i - i];
                if c == 0.0 {
                    continue;
                }
                for (o, m) in out.iter_mut().zip(&partial[i]) {
                    *o += c * m;
                }
            }
            out
        })
        .collect();

    Ok(JointDensity {
        grid_a: *grid_a,
        grid_b: *grid_b,
        values: values.into_iter().map(|v| v.max(0.0)).collect(),
    })
}

/// `p_{B-A}(delta) = integral of p_on(T, T + delta) dT` on the lattice of
/// delays between the two grids. The grids must share their step.
pub fn delay_density(joint: &JointDensity) -> Result<DensityOverDelay> {
    let (ga, gb) = (&joint.grid_a, &joint.grid_b);
    let h = ga.step();
    if ((gb.step() - h) / h).abs() > 1e-9 {
        return Err(Error::Parameter(format!(
            "delay lattice needs equal steps on both arms, got {} and {}",
            h,
            gb.step()
        )));
    }
    let (na, nb) = (ga.len(), gb.len());
    let n = na + nb - 1;
    let start = gb.t_min() - ga.t_min() - (na - 1) as f64 * h;
    let delays = TimeGrid::new(start, start + (n - 1) as f64 * h, n)?;
    let values = (0..n)
        .into_par_iter()
        .map(|m| {
            // delay index m pairs row i with column j = i + m - (na - 1)
            let offset = m as i64 - (na as i64 - 1);
            let i_lo = (-offset).max(0) as usize;
            let i_hi = ((nb as i64 - 1 - offset).min(na as i64 - 1)) as usize;
            let line: Vec<f64> = (i_lo..=i_hi)
                .map(|i| joint.value(i, (i as i64 + offset) as usize))
                .collect();
            h * line.iter().sum::<f64>()
        })
        .collect();
    Ok(DensityOverDelay::from_kernel(delays, values))
}

/// Delay density from the detectors' response cross-correlation and the
/// intra-pair delay distribution:
/// `eta_A eta_B * integral |chi(s)|^2 * C(delta - s) ds` with
/// `C(x) = integral jitter_A(tau) jitter_B(tau + x) dtau`.
///
/// The pair emission envelope does not enter.
pub fn delay_density_factorized(
    det_a: &DetectorModel,
    det_b: &DetectorModel,
    chi: &DelayIntensity,
    delays: &TimeGrid,
) -> Result<DensityOverDelay> {
    let h = delays.step();
    let n = delays.len();
    let d0 = delays.t_min();
    let (k_lo, weights) = chi.lattice_weights(h);
    let k_hi = k_lo + weights.len() as i64 - 1;

    let kernel_a = jitter_kernel(det_a.jitter(), h, usize::MAX);
    let na = kernel_a.len() as i64;
    // cross-correlation at lattice delays d0 + l h for l in [-k_hi, n - 1 - k_lo]
    let l_lo = -k_hi;
    let l_hi = n as i64 - 1 - k_lo;
    // jitter_B cell averages at d0 + m h for m in [l_lo, l_hi + na - 1]
    let jb = det_b.jitter();
    let table_b: Vec<f64> = (l_lo..l_hi + na)
        .map(|m| kernel_value(jb, d0 + m as f64 * h, h))
        .collect();
    let correlation: Vec<f64> = (l_lo..=l_hi)
        .into_par_iter()
        .map(|l| {
            let base = (l - l_lo) as usize;
            h * kernel_a
                .iter()
                .zip(&table_b[base..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
        })
        .collect();

    let eta = det_a.efficiency() * det_b.efficiency();
    let values = (0..n as i64)
        .map(|i| {
            let acc: f64 = weights
                .iter()
                .enumerate()
                .map(|(w_idx, w)| {
                    let k = k_lo + w_idx as i64;
                    w * correlation[(i - k - l_lo) as usize]
                })
                .sum();
            eta * acc
        })
        .collect();
    Ok(DensityOverDelay::from_kernel(*delays, values))
}

/// Symmetric delay grid `[-W, W]` with the given step, where `W` adds the
/// upper support of both jitters and the radius of the delay distribution.
pub fn default_delay_grid(
    det_a: &DetectorModel,
    det_b: &DetectorModel,
    chi: &DelayIntensity,
    step: f64,
) -> Result<TimeGrid> {
    let (c_lo, c_hi) = chi.support();
    let half_width =
        det_a.jitter().support().1 + det_b.jitter().support().1 + c_lo.abs().max(c_hi.abs());
    let cells = (half_width / step).ceil().max(1.0) as usize;
    let w = cells as f64 * step;
    TimeGrid::new(-w, w, 2 * cells + 1)
}

/// Mode, mean, standard deviation and FWHM of a coincidence peak.
pub fn peak_statistics(p: &DensityOverDelay) -> Result<PeakStatistics> {
    p.peak_statistics()
}
