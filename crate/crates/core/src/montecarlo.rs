//! Event-level simulation of the detection story, used as an independent
//! check on the analytic densities.
//!
//! Each photon is detected with probability `eta`; a detected photon clicks
//! after a delay drawn from the jitter distribution; the detector reports
//! only its earliest click. Trial `i` draws from its own ChaCha8 stream
//! `(seed, i)`, so a run gives the same histogram whether trials execute
//! serially or on any number of threads.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::coincidence::DelayIntensity;
use crate::density::SampledDensity;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::povm::{DetectorModel, PhotonArrivalPattern};
use crate::states::{JointTemporalAmplitude, TemporalAmplitude};

const TRIALS_PER_CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

/// Trial count, seed and execution mode of a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarlo {
    pub n_trials: u64,
    pub seed: u64,
    pub execution: Execution,
}

impl MonteCarlo {
    pub fn new(n_trials: u64, seed: u64) -> Self {
        Self {
            n_trials,
            seed,
            execution: Execution::default(),
        }
    }

    pub fn serial(mut self) -> Self {
        self.execution = Execution::Serial;
        self
    }
}

/// Random stream of one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Counts of recorded values in uniform bins, plus the trials that recorded
/// nothing (no click, or not selected by the conditioning) and the values
/// that fell outside the bins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClickHistogram {
    lo: u64,
    hi: u64,
    n_bins: usize,
    counts: Vec<u64>,
    n_trials: u64,
    n_no_click: u64,
    n_underflow: u64,
    n_overflow: u64,
}

impl ClickHistogram {
    /// Empty histogram with `n_bins` uniform bins over `[lo, hi)`.
    pub fn new(lo: f64, hi: f64, n_bins: usize) -> Result<Self> {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) || n_bins == 0 {
            return Err(Error::Parameter(format!(
                "histogram needs lo < hi and at least one bin, got [{lo}, {hi}) with {n_bins}"
            )));
        }
        Ok(Self {
            lo: lo.to_bits(),
            hi: hi.to_bits(),
            n_bins,
            counts: vec![0; n_bins],
            n_trials: 0,
            n_no_click: 0,
            n_underflow: 0,
            n_overflow: 0,
        })
    }

    pub fn lo(&self) -> f64 {
        f64::from_bits(self.lo)
    }

    pub fn hi(&self) -> f64 {
        f64::from_bits(self.hi)
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi() - self.lo()) / self.n_bins as f64
    }

    /// The `n_bins + 1` bin edges.
    pub fn edges(&self) -> TimeGrid {
        TimeGrid::new(self.lo(), self.hi(), self.n_bins + 1).expect("validated on construction")
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n_trials(&self) -> u64 {
        self.n_trials
    }

    pub fn n_no_click(&self) -> u64 {
        self.n_no_click
    }

    pub fn n_underflow(&self) -> u64 {
        self.n_underflow
    }

    pub fn n_overflow(&self) -> u64 {
        self.n_overflow
    }

    /// Recorded values that landed in a bin.
    pub fn n_in_range(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Trials that recorded a value, in range or not.
    pub fn n_recorded(&self) -> u64 {
        self.n_trials - self.n_no_click
    }

    pub fn recorded_fraction(&self) -> f64 {
        self.n_recorded() as f64 / self.n_trials as f64
    }

    pub fn no_click_fraction(&self) -> f64 {
        self.n_no_click as f64 / self.n_trials as f64
    }

    /// `3 / sqrt(n)` over the in-range values.
    pub fn ks_bound(&self) -> f64 {
        3.0 / (self.n_in_range() as f64).sqrt()
    }

    /// Mean of the in-range values, taken at bin centers.
    pub fn binned_mean(&self) -> f64 {
        let w = self.bin_width();
        let total: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(i, &c)| c as f64 * (self.lo() + (i as f64 + 0.5) * w))
            .sum();
        total / self.n_in_range() as f64
    }

    fn record(&mut self, outcome: Option<f64>) {
        self.n_trials += 1;
        let Some(x) = outcome else {
            self.n_no_click += 1;
            return;
        };
        let (lo, hi) = (self.lo(), self.hi());
        if x < lo {
            self.n_underflow += 1;
        } else if x >= hi {
            self.n_overflow += 1;
        } else {
            let bin = (((x - lo) / (hi - lo)) * self.n_bins as f64) as usize;
            self.counts[bin.min(self.n_bins - 1)] += 1;
        }
    }

    fn merge(&mut self, other: &Self) {
        debug_assert_eq!((self.lo, self.hi, self.n_bins), (other.lo, other.hi, other.n_bins));
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.n_trials += other.n_trials;
        self.n_no_click += other.n_no_click;
        self.n_underflow += other.n_underflow;
        self.n_overflow += other.n_overflow;
    }
}

fn run_trials<F>(mc: &MonteCarlo, template: &ClickHistogram, trial: F) -> ClickHistogram
where
    F: Fn(&mut ChaCha8Rng) -> Option<f64> + Sync,
{
    let chunks = mc.n_trials.div_ceil(TRIALS_PER_CHUNK);
    let run_chunk = |c: u64| {
        let mut h = template.clone();
        let end = ((c + 1) * TRIALS_PER_CHUNK).min(mc.n_trials);
        for i in c * TRIALS_PER_CHUNK..end {
            let mut rng = trial_rng(mc.seed, i);
            h.record(trial(&mut rng));
        }
        h
    };
    let parts: Vec<ClickHistogram> = match mc.execution {
        Execution::Serial => (0..chunks).map(run_chunk).collect(),
        Execution::Parallel => (0..chunks).into_par_iter().map(run_chunk).collect(),
    };
    let mut total = template.clone();
    for p in &parts {
        total.merge(p);
    }
    total
}

fn detect<R: Rng + ?Sized>(det: &DetectorModel, t: f64, rng: &mut R) -> Option<f64> {
    if rng.random::<f64>() < det.efficiency() {
        Some(t + det.jitter().sample(rng))
    } else {
        None
    }
}

/// First-click times of a detector hit by the given photons.
pub fn simulate_firing(
    det: &DetectorModel,
    arrivals: &PhotonArrivalPattern,
    bins: &ClickHistogram,
    mc: &MonteCarlo,
) -> ClickHistogram {
    run_trials(mc, bins, |rng| {
        arrivals
            .times()
            .iter()
            .filter_map(|&t| detect(det, t, rng))
            .min_by(f64::total_cmp)
    })
}

/// Source of photon-pair emission times `(t_A, t_B)`.
pub trait PairSampler: Sync {
    fn sample_pair(&self, rng: &mut dyn RngCore) -> (f64, f64);
}

/// Pairs whose first photon follows `|psi|^2` and whose intra-pair delay
/// follows the given delay distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizedPairs {
    pub envelope: TemporalAmplitude,
    pub delay: DelayIntensity,
}

impl FactorizedPairs {
    pub fn simultaneous(envelope: TemporalAmplitude) -> Self {
        Self {
            envelope,
            delay: DelayIntensity::Simultaneous,
        }
    }

    pub fn from_joint(phi: &JointTemporalAmplitude) -> Result<Self> {
        match phi {
            JointTemporalAmplitude::Factorized {
                pair_envelope,
                delay_amplitude,
            } => Ok(Self {
                envelope: pair_envelope.clone(),
                delay: DelayIntensity::Amplitude(delay_amplitude.clone()),
            }),
            JointTemporalAmplitude::General(_) => Err(Error::Domain(
                "pair sampling needs a factorized joint amplitude".into(),
            )),
        }
    }
}

impl PairSampler for FactorizedPairs {
    fn sample_pair(&self, rng: &mut dyn RngCore) -> (f64, f64) {
        let ta = self.envelope.sample_time(rng);
        let delay = match &self.delay {
            DelayIntensity::Simultaneous => 0.0,
            DelayIntensity::Amplitude(chi) => chi.sample_time(rng),
        };
        (ta, ta + delay)
    }
}

/// Start-stop delays `T_B - T_A`, recorded when both detectors click.
pub fn simulate_pair_delays(
    det_a: &DetectorModel,
    det_b: &DetectorModel,
    pairs: &dyn PairSampler,
    bins: &ClickHistogram,
    mc: &MonteCarlo,
) -> ClickHistogram {
    run_trials(mc, bins, |rng| {
        let (ta, tb) = pairs.sample_pair(rng);
        let click_a = detect(det_a, ta, rng);
        let click_b = detect(det_b, tb, rng);
        Some(click_b? - click_a?)
    })
}

/// Emission times of pairs whose herald click on arm B lands in
/// `[center - width/2, center + width/2]`. Photons are simultaneous.
pub fn simulate_heralded(
    det_b: &DetectorModel,
    psi: &TemporalAmplitude,
    window_center: f64,
    window_width: f64,
    bins: &ClickHistogram,
    mc: &MonteCarlo,
) -> Result<ClickHistogram> {
    if !(window_width > 0.0) {
        return Err(Error::Parameter(format!(
            "conditioning window must have positive width, got {window_width}"
        )));
    }
    let half = 0.5 * window_width;
    let hist = run_trials(mc, bins, |rng| {
        let t = psi.sample_time(rng);
        let click = detect(det_b, t, rng)?;
        ((click - window_center).abs() <= half).then_some(t)
    });
    if hist.n_recorded() == 0 {
        return Err(Error::InsufficientStatistics {
            accepted: 0,
            trials: hist.n_trials(),
        });
    }
    Ok(hist)
}

/// Kolmogorov-Smirnov distance between the in-range values of `hist` and
/// the analytic density restricted to the histogram range. The empirical cdf
/// is only known at bin edges, so the supremum is taken there.
pub fn ks_distance(hist: &ClickHistogram, p: &SampledDensity) -> Result<f64> {
    let n = hist.n_in_range();
    if n == 0 {
        return Err(Error::Domain("histogram has no values in range".into()));
    }
    let (lo, hi) = (hist.lo(), hist.hi());
    let base = p.cumulative_at(lo);
    let span = p.cumulative_at(hi) - base;
    if !(span > 0.0) {
        return Err(Error::Domain("density has no mass over the histogram range".into()));
    }
    let edges = hist.edges();
    let mut seen = 0u64;
    let mut worst = 0.0f64;
    for (k, edge) in edges.points().enumerate().skip(1) {
        seen += hist.counts[k - 1];
        let empirical = seen as f64 / n as f64;
        let analytic = (p.cumulative_at(edge) - base) / span;
        worst = worst.max((empirical - analytic).abs());
    }
    Ok(worst)
}

/// Signed distance of an observed fraction from `p` in binomial standard errors.
pub fn binomial_z(successes: u64, trials: u64, p: f64) -> f64 {
    let n = trials as f64;
    let se = (p * (1.0 - p) / n).sqrt();
    let diff = successes as f64 / n - p;
    if se == 0.0 {
        if diff == 0.0 { 0.0 } else { f64::INFINITY.copysign(diff) }
    } else {
        diff / se
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coincidence::delay_density_factorized;
    use crate::heralding::heralded_state;
    use crate::jitter::JitterDistribution;
    use crate::povm::{firing_density, firing_density_simultaneous};

    fn lognormal(eta: f64) -> DetectorModel {
        DetectorModel::new(eta, JitterDistribution::lognormal_from_moments(1.0, 0.5).unwrap()).unwrap()
    }

    #[test]
    fn zero_efficiency_never_clicks() {
        let bins = ClickHistogram::new(0.0, 10.0, 100).unwrap();
        let h = simulate_firing(
            &lognormal(0.0),
            &PhotonArrivalPattern::simultaneous(3, 0.0).unwrap(),
            &bins,
            &MonteCarlo::new(10_000, 1),
        );
        assert_eq!(h.n_no_click(), 10_000);
        assert_eq!(h.n_in_range(), 0);
    }

    #[test]
    fn no_click_fraction_matches_all_miss_probability() {
        let bins = ClickHistogram::new(0.0, 20.0, 200).unwrap();
        let h = simulate_firing(
            &lognormal(0.5),
            &PhotonArrivalPattern::new(vec![0.0, 1.0, 3.0]).unwrap(),
            &bins,
            &MonteCarlo::new(1_000_000, 2),
        );
        let z = binomial_z(h.n_no_click(), h.n_trials(), 0.125);
        assert!(z.abs() < 5.0, "z = {z}");
        assert_eq!(
            h.n_in_range() + h.n_no_click() + h.n_overflow() + h.n_underflow(),
            h.n_trials()
        );
    }

    #[test]
    fn single_photon_matches_the_jitter() {
        let det = lognormal(1.0);
        let bins = ClickHistogram::new(0.0, 14.0, 1400).unwrap();
        let h = simulate_firing(
            &det,
            &PhotonArrivalPattern::simultaneous(1, 0.0).unwrap(),
            &bins,
            &MonteCarlo::new(1_000_000, 3),
        );
        assert_eq!(h.n_no_click(), 0);
        let g = TimeGrid::new(0.0, 14.0, 14_001).unwrap();
        let p = firing_density_simultaneous(&det, 1, 0.0, &g).unwrap();
        let ks = ks_distance(&h, &p).unwrap();
        assert!(ks < h.ks_bound(), "KS {ks}");
    }

    #[test]
    fn two_photons_independent_oracle() {
        // k = 2 simultaneous, eta = 1: the click is the minimum of two jitter draws
        let det = lognormal(1.0);
        let g = TimeGrid::new(0.0, 14.0, 14_001).unwrap();
        let p = firing_density(&det, &PhotonArrivalPattern::simultaneous(2, 0.0).unwrap(), &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 1_000_000;
        let mut mins: Vec<f64> = (0..n)
            .map(|_| det.jitter().sample(&mut rng).min(det.jitter().sample(&mut rng)))
            .collect();
        mins.sort_by(f64::total_cmp);
        let ks = mins
            .iter()
            .enumerate()
            .map(|(i, &x)| (p.normalized_cdf(x) - (i as f64 + 0.5) / n as f64).abs())
            .fold(0.0, f64::max);
        assert!(ks < 3.0 / (n as f64).sqrt(), "KS {ks}");
    }

    #[test]
    fn separated_arrivals_with_half_efficiency() {
        let det = DetectorModel::new(0.5, JitterDistribution::truncated_gaussian(1.0, 0.2).unwrap()).unwrap();
        let arrivals = PhotonArrivalPattern::new(vec![0.0, 10.0]).unwrap();
        let g = TimeGrid::new(0.0, 12.5, 12_501).unwrap();
        let p = firing_density(&det, &arrivals, &g).unwrap();
        let bins = ClickHistogram::new(0.0, 12.5, 1250).unwrap();
        let h = simulate_firing(&det, &arrivals, &bins, &MonteCarlo::new(10_000_000, 4));
        let ks = ks_distance(&h, &p).unwrap();
        assert!(ks < h.ks_bound(), "KS {ks}");
        // early clicks carry eta, late ones eta (1 - eta)
        let early = p.integral_between(0.0, 5.0).unwrap();
        let late = p.integral_between(5.0, 12.5).unwrap();
        assert!((early - 0.5).abs() < 1e-4 && (late - 0.25).abs() < 1e-4);
        let n_early: u64 = h.counts()[..500].iter().sum();
        assert!(binomial_z(n_early, h.n_trials(), 0.5).abs() < 5.0);
    }

    #[test]
    fn serial_and_parallel_runs_are_identical() {
        let det = lognormal(0.7);
        let arrivals = PhotonArrivalPattern::new(vec![0.0, 0.5]).unwrap();
        let bins = ClickHistogram::new(0.0, 15.0, 300).unwrap();
        let mc = MonteCarlo::new(100_000, 42);
        let a = simulate_firing(&det, &arrivals, &bins, &mc);
        let b = simulate_firing(&det, &arrivals, &bins, &mc.serial());
        assert_eq!(a, b);
        let c = simulate_firing(&det, &arrivals, &bins, &MonteCarlo::new(100_000, 43));
        assert_ne!(a, c);
    }

    #[test]
    fn near_delta_pairs_have_no_delay_spread() {
        let eps = 1e-6;
        let det = DetectorModel::new(1.0, JitterDistribution::near_delta(1.0, eps).unwrap()).unwrap();
        let pairs = FactorizedPairs::simultaneous(TemporalAmplitude::rectangular(0.0, 1.0).unwrap());
        let bins = ClickHistogram::new(-2.0 * eps, 2.0 * eps, 4).unwrap();
        let h = simulate_pair_delays(&det, &det, &pairs, &bins, &MonteCarlo::new(100_000, 5));
        assert_eq!(h.n_in_range(), 100_000);
    }

    #[test]
    fn pair_delays_match_cross_correlation() {
        let det = lognormal(0.8);
        let pairs = FactorizedPairs::simultaneous(TemporalAmplitude::gaussian(0.0, 0.5).unwrap());
        let bins = ClickHistogram::new(-8.0, 8.0, 1600).unwrap();
        let h = simulate_pair_delays(&det, &det, &pairs, &bins, &MonteCarlo::new(1_000_000, 6));
        let z = binomial_z(h.n_recorded(), h.n_trials(), 0.64);
        assert!(z.abs() < 5.0, "both-click z = {z}");
        let se = 0.5f64.sqrt() / (h.n_in_range() as f64).sqrt();
        assert!(h.binned_mean().abs() < 5.0 * se, "mean {}", h.binned_mean());
        let grid = TimeGrid::new(-14.0, 14.0, 2801).unwrap();
        let p = delay_density_factorized(&det, &det, &DelayIntensity::Simultaneous, &grid).unwrap();
        let ks = ks_distance(&h, &p).unwrap();
        assert!(ks < h.ks_bound(), "KS {ks}");
    }

    #[test]
    fn heralded_near_delta_concentrates_at_click_minus_latency() {
        let det = DetectorModel::new(1.0, JitterDistribution::near_delta(0.8, 1e-6).unwrap()).unwrap();
        let psi = TemporalAmplitude::rectangular(0.0, 1.0).unwrap();
        let bins = ClickHistogram::new(-0.5, 0.5, 100).unwrap();
        let h = simulate_heralded(&det, &psi, 1.0, 0.01, &bins, &MonteCarlo::new(200_000, 7)).unwrap();
        // emission times within the window minus the latency
        let recorded: Vec<usize> = h.counts().iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, _)| i).collect();
        assert!(recorded.iter().all(|&i| (69..=70).contains(&i)), "{recorded:?}");
    }

    #[test]
    fn heralded_flat_jitter_is_uniform() {
        let det = DetectorModel::new(1.0, JitterDistribution::rectangular(0.0, 10.0).unwrap()).unwrap();
        let psi = TemporalAmplitude::rectangular(0.0, 1.0).unwrap();
        let bins = ClickHistogram::new(-0.5, 0.5, 20).unwrap();
        let h = simulate_heralded(&det, &psi, 5.0, 0.5, &bins, &MonteCarlo::new(2_000_000, 8)).unwrap();
        let n = h.n_in_range() as f64;
        let p = 1.0 / 20.0;
        for &c in h.counts() {
            let z = (c as f64 - n * p) / (n * p * (1.0 - p)).sqrt();
            assert!(z.abs() < 5.0, "bin z = {z}");
        }
    }

    #[test]
    fn heralded_window_shrink_keeps_agreement() {
        let det = lognormal(1.0);
        let psi = TemporalAmplitude::rectangular(0.0, 1.0).unwrap();
        let g = TimeGrid::new(-0.6, 0.6, 1201).unwrap();
        let w = heralded_state(&det, &psi, 1.0, &g).unwrap();
        let bins = ClickHistogram::new(-0.6, 0.6, 240).unwrap();
        let mc = MonteCarlo::new(4_000_000, 9);
        let wide = simulate_heralded(&det, &psi, 1.0, 0.04, &bins, &mc).unwrap();
        let narrow = simulate_heralded(&det, &psi, 1.0, 0.02, &bins, &mc).unwrap();
        let ks_wide = ks_distance(&wide, w.weights()).unwrap();
        let ks_narrow = ks_distance(&narrow, w.weights()).unwrap();
        assert!(ks_wide < wide.ks_bound());
        assert!(ks_narrow < narrow.ks_bound());
        assert!(ks_narrow <= ks_wide + narrow.ks_bound());
    }

    #[test]
    fn empty_conditioning_is_an_error() {
        let det = DetectorModel::new(1.0, JitterDistribution::rectangular(0.0, 1.0).unwrap()).unwrap();
        let psi = TemporalAmplitude::rectangular(0.0, 1.0).unwrap();
        let bins = ClickHistogram::new(-0.5, 0.5, 10).unwrap();
        let err = simulate_heralded(&det, &psi, 50.0, 0.1, &bins, &MonteCarlo::new(1000, 1)).unwrap_err();
        assert_eq!(err, Error::InsufficientStatistics { accepted: 0, trials: 1000 });
    }

    #[test]
    fn ks_distance_has_power_against_a_shifted_density() {
        let det = lognormal(1.0);
        let bins = ClickHistogram::new(0.0, 15.0, 1500).unwrap();
        let arrivals = PhotonArrivalPattern::simultaneous(1, 0.0).unwrap();
        let h = simulate_firing(&det, &arrivals, &bins, &MonteCarlo::new(1_000_000, 10));
        let g = TimeGrid::new(0.0, 15.0, 15_001).unwrap();
        let shifted = firing_density(&det, &PhotonArrivalPattern::simultaneous(1, 0.5).unwrap(), &g).unwrap();
        let ks = ks_distance(&h, &shifted).unwrap();
        assert!(ks > 10.0 * h.ks_bound(), "KS {ks}");
        // a second seed passes against the right density
        let right = firing_density(&det, &arrivals, &g).unwrap();
        let other = simulate_firing(&det, &arrivals, &bins, &MonteCarlo::new(1_000_000, 11));
        assert!(ks_distance(&other, &right).unwrap() < other.ks_bound());
    }

    #[test]
    fn empty_histogram_has_no_ks_distance() {
        let bins = ClickHistogram::new(0.0, 1.0, 10).unwrap();
        let g = TimeGrid::new(0.0, 1.0, 11).unwrap();
        let p = SampledDensity::new(g, vec![1.0; 11]).unwrap();
        assert!(ks_distance(&bins, &p).is_err());
        assert!(ClickHistogram::new(1.0, 0.0, 10).is_err());
    }
}
