//! Scenario files: TOML with fixed sections and typed keys. Unknown keys
//! are rejected. The grammar is described in `docs/config.md`.

use serde::Deserialize;

use super::CliError;
use crate::coincidence::DelayIntensity;
use crate::grid::TimeGrid;
use crate::jitter::JitterDistribution;
use crate::povm::{DetectorModel, PhotonArrivalPattern};
use crate::states::TemporalAmplitude;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub detector: Option<DetectorSection>,
    pub detector_b: Option<DetectorSection>,
    #[serde(default)]
    pub state: StateSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub herald: HeraldSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub oracle: OracleSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JitterKind {
    Lognormal,
    TruncatedGaussian,
    Rectangular,
    NearDelta,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub jitter: JitterKind,
    #[serde(default = "one")]
    pub efficiency: f64,
    #[serde(default)]
    pub dark_rate: f64,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub location: Option<f64>,
    pub scale: Option<f64>,
    pub start: Option<f64>,
    pub end: Option<f64>,
    pub center: Option<f64>,
    pub halfwidth: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Rectangular,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayKind {
    Simultaneous,
    Rectangular,
    Gaussian,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSection {
    pub photons: Option<Vec<usize>>,
    pub arrival: Option<f64>,
    pub arrivals: Option<Vec<f64>>,
    pub wavepacket: Option<ShapeKind>,
    pub center: Option<f64>,
    pub width: Option<f64>,
    pub std: Option<f64>,
    pub delay: Option<DelayKind>,
    pub delay_center: Option<f64>,
    pub delay_width: Option<f64>,
    pub delay_std: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub n_points: Option<usize>,
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub jitter_std: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeraldSection {
    pub time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub trials: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "yes")]
    pub parallel: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            trials: None,
            seed: 0,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub corrupt_efficiency_b: Option<f64>,
    #[serde(default = "two")]
    pub window_steps: f64,
    #[serde(default = "default_bins")]
    pub max_bins: usize,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            corrupt_efficiency_b: None,
            window_steps: two(),
            max_bins: default_bins(),
        }
    }
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

fn yes() -> bool {
    true
}

fn default_bins() -> usize {
    2000
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn need(section: &str, key: &str, value: Option<f64>, context: &str) -> Result<f64, CliError> {
    value.ok_or_else(|| bad(format!("[{section}] missing key `{key}` {context}")))
}

fn forbid(section: &str, keys: &[(&str, bool)], context: &str) -> Result<(), CliError> {
    match keys.iter().find(|(_, present)| *present) {
        Some((key, _)) => Err(bad(format!("[{section}] key `{key}` is not used {context}"))),
        None => Ok(()),
    }
}

fn param<T>(section: &str, result: crate::Result<T>) -> Result<T, CliError> {
    result.map_err(|e| bad(format!("[{section}] {e}")))
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| bad(e.to_string()))
    }

    /// Jitter standard deviations to sweep; a single `None` means "as configured".
    pub fn sweep(&self) -> Result<Vec<Option<f64>>, CliError> {
        match &self.sweep.jitter_std {
            None => Ok(vec![None]),
            Some(v) if v.is_empty() => Err(bad("[sweep] `jitter_std` must not be empty")),
            Some(v) => Ok(v.iter().map(|&s| Some(s)).collect()),
        }
    }

    pub fn detector_a(&self, std: Option<f64>) -> Result<DetectorModel, CliError> {
        let section = self.detector.as_ref().ok_or_else(|| bad("missing section [detector]"))?;
        section.build("detector", std, None)
    }

    /// Arm B: `[detector_b]` if present, otherwise a copy of `[detector]`.
    pub fn detector_b(&self, std: Option<f64>, efficiency: Option<f64>) -> Result<DetectorModel, CliError> {
        match &self.detector_b {
            Some(s) => s.build("detector_b", std, efficiency),
            None => {
                let s = self.detector.as_ref().ok_or_else(|| bad("missing section [detector]"))?;
                s.build("detector", std, efficiency)
            }
        }
    }

    /// Photon patterns for the firing-density series, labelled for headers.
    pub fn arrival_patterns(&self) -> Result<Vec<(String, PhotonArrivalPattern)>, CliError> {
        let s = &self.state;
        match (&s.photons, &s.arrivals) {
            (Some(_), Some(_)) => Err(bad("[state] give either `photons` or `arrivals`, not both")),
            (None, None) => Err(bad("[state] missing key `photons` or `arrivals`")),
            (Some(ks), None) => {
                if ks.is_empty() {
                    return Err(bad("[state] `photons` must not be empty"));
                }
                let t = s.arrival.unwrap_or(0.0);
                ks.iter()
                    .map(|&k| {
                        let p = param("state", PhotonArrivalPattern::simultaneous(k, t))?;
                        Ok((format!("k={k}"), p))
                    })
                    .collect()
            }
            (None, Some(times)) => {
                forbid("state", &[("arrival", s.arrival.is_some())], "together with `arrivals`")?;
                let p = param("state", PhotonArrivalPattern::new(times.clone()))?;
                Ok(vec![(format!("k={}", times.len()), p)])
            }
        }
    }

    pub fn wavepacket(&self) -> Result<TemporalAmplitude, CliError> {
        let s = &self.state;
        let kind = s.wavepacket.ok_or_else(|| bad("[state] missing key `wavepacket`"))?;
        let center = s.center.unwrap_or(0.0);
        match kind {
            ShapeKind::Rectangular => {
                forbid("state", &[("std", s.std.is_some())], "by a rectangular wavepacket")?;
                let w = need("state", "width", s.width, "for a rectangular wavepacket")?;
                param("state", TemporalAmplitude::rectangular(center, w))
            }
            ShapeKind::Gaussian => {
                forbid("state", &[("width", s.width.is_some())], "by a gaussian wavepacket")?;
                let sd = need("state", "std", s.std, "for a gaussian wavepacket")?;
                param("state", TemporalAmplitude::gaussian(center, sd))
            }
        }
    }

    /// Intra-pair delay distribution; simultaneous when `delay` is absent.
    pub fn delay_intensity(&self) -> Result<DelayIntensity, CliError> {
        let s = &self.state;
        let center = s.delay_center.unwrap_or(0.0);
        match s.delay.unwrap_or(DelayKind::Simultaneous) {
            DelayKind::Simultaneous => {
                forbid(
                    "state",
                    &[
                        ("delay_center", s.delay_center.is_some()),
                        ("delay_width", s.delay_width.is_some()),
                        ("delay_std", s.delay_std.is_some()),
                    ],
                    "by simultaneous pairs",
                )?;
                Ok(DelayIntensity::Simultaneous)
            }
            DelayKind::Rectangular => {
                forbid("state", &[("delay_std", s.delay_std.is_some())], "by a rectangular delay")?;
                let w = need("state", "delay_width", s.delay_width, "for a rectangular delay")?;
                Ok(DelayIntensity::Amplitude(param("state", TemporalAmplitude::rectangular(center, w))?))
            }
            DelayKind::Gaussian => {
                forbid("state", &[("delay_width", s.delay_width.is_some())], "by a gaussian delay")?;
                let sd = need("state", "delay_std", s.delay_std, "for a gaussian delay")?;
                Ok(DelayIntensity::Amplitude(param("state", TemporalAmplitude::gaussian(center, sd))?))
            }
        }
    }

    pub fn grid_step(&self) -> Result<Option<f64>, CliError> {
        let g = &self.grid;
        match (g.n_points, g.step) {
            (Some(_), Some(_)) => Err(bad("[grid] give either `n_points` or `step`, not both")),
            (None, Some(h)) if !(h > 0.0 && h.is_finite()) => {
                Err(bad(format!("[grid] `step` must be positive, got {h}")))
            }
            (None, Some(h)) => Ok(Some(h)),
            (Some(n), None) => match (g.t_min, g.t_max) {
                (Some(lo), Some(hi)) => Ok(Some(param("grid", TimeGrid::new(lo, hi, n))?.step())),
                _ => Err(bad("[grid] `n_points` needs `t_min` and `t_max`")),
            },
            (None, None) => Ok(None),
        }
    }

    /// The configured grid, or `[lo, hi]` at the configured step when the
    /// range is left open and `fallback` supplies one.
    pub fn grid(&self, fallback: Option<(f64, f64)>) -> Result<TimeGrid, CliError> {
        let g = &self.grid;
        let step = self.grid_step()?.ok_or_else(|| bad("[grid] missing key `n_points` or `step`"))?;
        match (g.t_min, g.t_max, fallback) {
            (Some(lo), Some(hi), _) => match g.n_points {
                Some(n) => param("grid", TimeGrid::new(lo, hi, n)),
                None => param("grid", TimeGrid::with_step(lo, hi, step)),
            },
            (None, None, Some((lo, hi))) => param("grid", TimeGrid::with_step(lo, hi, step)),
            (None, None, None) => Err(bad("[grid] missing keys `t_min` and `t_max`")),
            _ => Err(bad("[grid] give both `t_min` and `t_max`, or neither")),
        }
    }

    pub fn trials(&self) -> Result<u64, CliError> {
        self.run.trials.ok_or_else(|| bad("[run] missing key `trials`"))
    }
}

impl DetectorSection {
    fn build(&self, section: &str, std_override: Option<f64>, efficiency: Option<f64>) -> Result<DetectorModel, CliError> {
        let jitter = self.jitter(section, std_override)?;
        let eta = efficiency.unwrap_or(self.efficiency);
        let det = param(section, DetectorModel::new(eta, jitter))?;
        param(section, det.with_dark_count_rate(self.dark_rate))
    }

    fn jitter(&self, section: &str, std_override: Option<f64>) -> Result<JitterDistribution, CliError> {
        let swept = |kind: &str| {
            if std_override.is_some() {
                Err(bad(format!("[sweep] `jitter_std` cannot be applied to a {kind} jitter in [{section}]")))
            } else {
                Ok(())
            }
        };
        match self.jitter {
            JitterKind::Lognormal => {
                forbid(
                    section,
                    &[
                        ("start", self.start.is_some()),
                        ("end", self.end.is_some()),
                        ("center", self.center.is_some()),
                        ("halfwidth", self.halfwidth.is_some()),
                    ],
                    "by a lognormal jitter",
                )?;
                if self.location.is_some() || self.scale.is_some() {
                    forbid(
                        section,
                        &[("mean", self.mean.is_some()), ("std", self.std.is_some())],
                        "together with `location`/`scale`",
                    )?;
                    swept("location/scale lognormal")?;
                    let mu = need(section, "location", self.location, "for a lognormal jitter")?;
                    let sigma = need(section, "scale", self.scale, "for a lognormal jitter")?;
                    return param(section, JitterDistribution::log_normal(mu, sigma));
                }
                let mean = need(section, "mean", self.mean, "for a lognormal jitter")?;
                let std = match std_override {
                    Some(s) => s,
                    None => need(section, "std", self.std, "for a lognormal jitter")?,
                };
                param(section, JitterDistribution::lognormal_from_moments(mean, std))
            }
            JitterKind::TruncatedGaussian => {
                forbid(
                    section,
                    &[
                        ("location", self.location.is_some()),
                        ("scale", self.scale.is_some()),
                        ("start", self.start.is_some()),
                        ("end", self.end.is_some()),
                        ("center", self.center.is_some()),
                        ("halfwidth", self.halfwidth.is_some()),
                    ],
                    "by a truncated_gaussian jitter",
                )?;
                let mean = need(section, "mean", self.mean, "for a truncated_gaussian jitter")?;
                let std = match std_override {
                    Some(s) => s,
                    None => need(section, "std", self.std, "for a truncated_gaussian jitter")?,
                };
                param(section, JitterDistribution::truncated_gaussian(mean, std))
            }
            JitterKind::Rectangular => {
                forbid(
                    section,
                    &[
                        ("mean", self.mean.is_some()),
                        ("std", self.std.is_some()),
                        ("location", self.location.is_some()),
                        ("scale", self.scale.is_some()),
                        ("center", self.center.is_some()),
                        ("halfwidth", self.halfwidth.is_some()),
                    ],
                    "by a rectangular jitter",
                )?;
                swept("rectangular")?;
                let a = need(section, "start", self.start, "for a rectangular jitter")?;
                let b = need(section, "end", self.end, "for a rectangular jitter")?;
                param(section, JitterDistribution::rectangular(a, b))
            }
            JitterKind::NearDelta => {
                forbid(
                    section,
                    &[
                        ("mean", self.mean.is_some()),
                        ("std", self.std.is_some()),
                        ("location", self.location.is_some()),
                        ("scale", self.scale.is_some()),
                        ("start", self.start.is_some()),
                        ("end", self.end.is_some()),
                    ],
                    "by a near_delta jitter",
                )?;
                swept("near_delta")?;
                let c = need(section, "center", self.center, "for a near_delta jitter")?;
                let w = need(section, "halfwidth", self.halfwidth, "for a near_delta jitter")?;
                param(section, JitterDistribution::near_delta(c, w))
            }
        }
    }
}
