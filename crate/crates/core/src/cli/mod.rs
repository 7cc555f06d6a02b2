//! Command-line front end. Each command reads a scenario file, evaluates
//! it, and writes a CSV table atomically.

mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::{
    DelayKind, DetectorSection, GridSection, HeraldSection, JitterKind, OracleSection, RunSection,
    ScenarioConfig, ShapeKind, StateSection, SweepSection,
};

use crate::coincidence::{default_delay_grid, delay_density_factorized};
use crate::error::Error;
use crate::grid::TimeGrid;
use crate::heralding::heralded_state;
use crate::montecarlo::{
    binomial_z, ks_distance, simulate_firing, simulate_heralded, simulate_pair_delays, ClickHistogram,
    Execution, FactorizedPairs, MonteCarlo,
};
use crate::povm::{add_dark_counts, firing_density};

/// Smallest trial count accepted by `oracle-check`.
pub const MIN_ORACLE_TRIALS: u64 = 10_000;
/// Click-fraction checks pass within this many binomial standard errors.
pub const FRACTION_Z_BOUND: f64 = 5.0;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for unusable configs, 3 for grids that miss a support, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Model(Error::Parameter(_)) => 2,
            CliError::Model(Error::Coverage { .. }) => 3,
            _ => 1,
        }
    }
}

/// Columns sampled on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub grid: TimeGrid,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    fn new(axis: &str, value: &str, grid: TimeGrid, series: Vec<(String, Vec<f64>)>) -> Self {
        let single = series.len() == 1;
        let mut header = vec![axis.to_string()];
        let mut columns = Vec::with_capacity(series.len());
        for (label, values) in series {
            header.push(if single || label.is_empty() {
                value.to_string()
            } else {
                format!("{value}[{label}]")
            });
            columns.push(values);
        }
        Self { header, grid, columns }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for (i, t) in self.grid.points().enumerate() {
            write!(out, "{t:?}").unwrap();
            for c in &self.columns {
                write!(out, ",{:?}", c[i]).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

fn label(parts: &[Option<String>]) -> String {
    parts.iter().flatten().cloned().collect::<Vec<_>>().join(",")
}

fn std_label(std: Option<f64>) -> Option<String> {
    std.map(|s| format!("std={s}"))
}

/// First-click densities `T,p_on`, one column per photon pattern and swept jitter.
pub fn cmd_density(cfg: &ScenarioConfig) -> Result<Table, CliError> {
    let grid = cfg.grid(None)?;
    let patterns = cfg.arrival_patterns()?;
    let sweep = cfg.sweep()?;
    let mut series = Vec::new();
    for &std in &sweep {
        let det = cfg.detector_a(std)?;
        for (name, arrivals) in &patterns {
            let mut p = firing_density(&det, arrivals, &grid)?;
            if det.dark_count_rate() > 0.0 {
                p = add_dark_counts(&p, &det);
            }
            let multi_k = patterns.len() > 1;
            let l = label(&[multi_k.then(|| name.clone()), std_label(std)]);
            series.push((l, p.values().to_vec()));
        }
    }
    Ok(Table::new("T", "p_on", grid, series))
}

/// Start-stop delay densities `delta,p`, one column per swept jitter.
pub fn cmd_delay(cfg: &ScenarioConfig) -> Result<Table, CliError> {
    let chi = cfg.delay_intensity()?;
    let sweep = cfg.sweep()?;
    let arms = sweep
        .iter()
        .map(|&std| Ok((std, cfg.detector_a(std)?, cfg.detector_b(std, None)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let grid = if cfg.grid.t_min.is_some() || cfg.grid.t_max.is_some() {
        cfg.grid(None)?
    } else {
        let step = cfg.grid_step()?.ok_or_else(|| CliError::Config("[grid] missing key `step`".into()))?;
        let mut widest: Option<TimeGrid> = None;
        for (_, a, b) in &arms {
            let g = default_delay_grid(a, b, &chi, step)?;
            if widest.is_none_or(|w| g.len() > w.len()) {
                widest = Some(g);
            }
        }
        widest.expect("sweep is never empty")
    };
    let mut series = Vec::new();
    for (std, a, b) in &arms {
        let p = delay_density_factorized(a, b, &chi, &grid)?;
        series.push((label(&[std_label(*std)]), p.values().to_vec()));
    }
    Ok(Table::new("delta", "p", grid, series))
}

/// Heralded-state weights `t,w`, one column per swept jitter. The herald
/// time defaults to the mean delay of each jitter.
pub fn cmd_herald(cfg: &ScenarioConfig) -> Result<Table, CliError> {
    let psi = cfg.wavepacket()?;
    let grid = cfg.grid(Some(psi.support()))?;
    let mut series = Vec::new();
    for std in cfg.sweep()? {
        let det = cfg.detector_b(std, None)?;
        let t = cfg.herald.time.unwrap_or_else(|| det.jitter().mean());
        let w = heralded_state(&det, &psi, t, &grid)?;
        series.push((label(&[std_label(std)]), w.values().to_vec()));
    }
    Ok(Table::new("t", "w", grid, series))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub name: String,
    pub statistic: f64,
    pub bound: f64,
    pub n_effective: u64,
    pub seed: u64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub trials: u64,
    pub checks: Vec<OracleCheck>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,statistic,bound,n_effective,seed,pass\n");
        for c in &self.checks {
            writeln!(out, "{},{:?},{:?},{},{},{}", c.name, c.statistic, c.bound, c.n_effective, c.seed, c.pass).unwrap();
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            writeln!(
                out,
                "{:<32} {:>12.6e} {} {:>12.6e}  n={:<9} seed={:<6} {}",
                c.name,
                c.statistic,
                if c.pass { "<" } else { ">=" },
                c.bound,
                c.n_effective,
                c.seed,
                if c.pass { "PASS" } else { "FAIL" }
            )
            .unwrap();
        }
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        writeln!(out, "{} checks, {} failed, {} trials each", self.checks.len(), failed, self.trials).unwrap();
        out
    }
}

struct Checks {
    base_seed: u64,
    simulations: u64,
    list: Vec<OracleCheck>,
}

impl Checks {
    /// Each simulation gets its own seed so the checks are independent.
    fn next_seed(&mut self) -> u64 {
        self.simulations += 1;
        self.base_seed.wrapping_add(self.simulations - 1)
    }

    fn ks(&mut self, name: String, seed: u64, hist: &ClickHistogram, p: &crate::density::SampledDensity) -> crate::Result<()> {
        let statistic = ks_distance(hist, p)?;
        let bound = hist.ks_bound();
        self.list.push(OracleCheck {
            name,
            statistic,
            bound,
            n_effective: hist.n_in_range(),
            seed,
            pass: statistic < bound,
        });
        Ok(())
    }

    fn fraction(&mut self, name: String, seed: u64, successes: u64, trials: u64, p: f64) {
        let statistic = binomial_z(successes, trials, p).abs();
        self.list.push(OracleCheck {
            name,
            statistic,
            bound: FRACTION_Z_BOUND,
            n_effective: trials,
            seed,
            pass: statistic < FRACTION_Z_BOUND,
        });
    }
}

fn bins_over(grid: &TimeGrid, max_bins: usize) -> crate::Result<ClickHistogram> {
    ClickHistogram::new(grid.t_min(), grid.t_max(), (grid.len() - 1).min(max_bins.max(1)))
}

/// Compares Monte Carlo histograms against the analytic densities: first
/// clicks for each photon pattern, pair delays and heralded states for each
/// swept jitter, plus the matching click-fraction identities.
pub fn cmd_oracle_check(cfg: &ScenarioConfig) -> Result<OracleReport, CliError> {
    let trials = cfg.trials()?;
    if trials < MIN_ORACLE_TRIALS {
        return Err(CliError::Config(format!(
            "[run] `trials` must be at least {MIN_ORACLE_TRIALS}, got {trials}"
        )));
    }
    let execution = if cfg.run.parallel { Execution::Parallel } else { Execution::Serial };
    let mc = |seed| MonteCarlo { n_trials: trials, seed, execution };
    let max_bins = cfg.oracle.max_bins;
    let psi = cfg.wavepacket()?;
    let chi = cfg.delay_intensity()?;
    let patterns = cfg.arrival_patterns()?;
    let sweep = cfg.sweep()?;
    let step = cfg.grid_step()?.ok_or_else(|| CliError::Config("[grid] missing key `n_points` or `step`".into()))?;
    let mut checks = Checks { base_seed: cfg.run.seed, simulations: 0, list: Vec::new() };

    let det = cfg.detector_a(None)?;
    if det.dark_count_rate() > 0.0 || cfg.detector_b(None, None)?.dark_count_rate() > 0.0 {
        return Err(CliError::Config("oracle-check does not simulate dark counts; set `dark_rate = 0`".into()));
    }
    let firing_grid = cfg.grid(None)?;
    let bins = bins_over(&firing_grid, max_bins)?;
    for (name, arrivals) in &patterns {
        let p = firing_density(&det, arrivals, &firing_grid)?;
        let seed = checks.next_seed();
        let h = simulate_firing(&det, arrivals, &bins, &mc(seed));
        checks.ks(format!("firing_ks[{name}]"), seed, &h, &p)?;
        let miss = (1.0 - det.efficiency()).powi(arrivals.len() as i32);
        checks.fraction(format!("firing_no_click[{name}]"), seed, h.n_no_click(), h.n_trials(), miss);
    }

    let pairs = FactorizedPairs { envelope: psi.clone(), delay: chi.clone() };
    for &std in &sweep {
        let a = cfg.detector_a(std)?;
        let b = cfg.detector_b(std, None)?;
        let b_sim = cfg.detector_b(std, cfg.oracle.corrupt_efficiency_b)?;
        let grid = default_delay_grid(&a, &b, &chi, step)?;
        let p = delay_density_factorized(&a, &b, &chi, &grid)?;
        let seed = checks.next_seed();
        let h = simulate_pair_delays(&a, &b_sim, &pairs, &bins_over(&grid, max_bins)?, &mc(seed));
        let tag = label(&[std_label(std)]);
        checks.ks(format!("delay_ks[{tag}]"), seed, &h, &p)?;
        let both = a.efficiency() * b.efficiency();
        checks.fraction(format!("delay_both_click[{tag}]"), seed, h.n_recorded(), h.n_trials(), both);
    }

    let (lo, hi) = psi.support();
    let herald_grid = TimeGrid::with_step(lo, hi, step)?;
    let window = cfg.oracle.window_steps * herald_grid.step();
    for &std in &sweep {
        let b = cfg.detector_b(std, None)?;
        let t = cfg.herald.time.unwrap_or_else(|| b.jitter().mean());
        let w = heralded_state(&b, &psi, t, &herald_grid)?;
        let seed = checks.next_seed();
        let h = simulate_heralded(&b, &psi, t, window, &bins_over(&herald_grid, max_bins)?, &mc(seed))?;
        checks.ks(format!("herald_ks[{}]", label(&[std_label(std)])), seed, &h, w.weights())?;
    }

    Ok(OracleReport { trials, checks: checks.list })
}

/// Writes `contents` to a temporary file next to `path`, then renames it
/// into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut builder = tempfile::Builder::new();
    // temporary files default to owner-only access; outputs are ordinary files
    #[cfg(unix)]
    builder.permissions(std::os::unix::fs::PermissionsExt::from_mode(0o644));
    let mut tmp = builder.tempfile_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    ScenarioConfig::parse(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[derive(Debug, Parser)]
#[command(name = "jitterpovm", version, about = "Click-time densities of ON/OFF detectors with timing jitter")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// First-click time densities
    Density(RunArgs),
    /// Start-stop delay densities of photon pairs
    Delay(RunArgs),
    /// Heralded single-photon state weights
    Herald(RunArgs),
    /// Monte Carlo cross-check of the analytic densities
    OracleCheck(RunArgs),
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// Scenario file
    #[arg(long)]
    config: PathBuf,
    /// CSV output path
    #[arg(long)]
    out: PathBuf,
    /// Overrides `[run] seed`
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `[run] trials`
    #[arg(long)]
    trials: Option<u64>,
}

fn execute(command: Command) -> Result<i32, CliError> {
    let (args, kind) = match command {
        Command::Density(a) => (a, 0),
        Command::Delay(a) => (a, 1),
        Command::Herald(a) => (a, 2),
        Command::OracleCheck(a) => (a, 3),
    };
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.run.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.run.trials = Some(trials);
    }
    let table = match kind {
        0 => cmd_density(&cfg)?,
        1 => cmd_delay(&cfg)?,
        2 => cmd_herald(&cfg)?,
        _ => {
            let report = cmd_oracle_check(&cfg)?;
            write_atomic(&args.out, &report.to_csv())?;
            print!("{}", report.to_text());
            return Ok(if report.passed() { 0 } else { 1 });
        }
    };
    write_atomic(&args.out, &table.to_csv())?;
    Ok(0)
}

/// Runs the CLI on explicit arguments (the first is the program name) and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("jitterpovm: {e}");
            e.exit_code()
        }
    }
}

pub fn main() -> ! {
    std::process::exit(run(std::env::args_os()))
}
