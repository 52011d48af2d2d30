//! Command-line flags. Every flag that is set overrides the config value.

use std::path::PathBuf;

use chrono::{NaiveDate, NaiveTime};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fst_core::analysis::{ClockTag, Estimator};
use fst_core::synthetic::Innovation;

use crate::config::{parse_range, ProfileKind, RunConfig, SynthMode};

#[derive(Debug, Parser)]
#[command(name = "fst", version, about = "Financial scaling time: calibration, analysis and synthetic data")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Synth,
    Ingest,
    Calibrate,
    Analyze,
    CompareClocks,
    PairwiseD,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Synth => "synth",
            CommandKind::Ingest => "ingest",
            CommandKind::Calibrate => "calibrate",
            CommandKind::Analyze => "analyze",
            CommandKind::CompareClocks => "compare-clocks",
            CommandKind::PairwiseD => "pairwise-d",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic price series and its ground-truth clock.
    Synth(SynthArgs),
    /// Validate a price CSV, filter incomplete days and write a series cache.
    Ingest,
    /// Calibrate the clock and write the calibration, time map and tables.
    Calibrate(CalibrateArgs),
    /// Moment scaling, Hurst spectra, collapse, volatility and correlations.
    Analyze(AnalyzeArgs),
    /// Compare the KS clock with single-moment clocks.
    CompareClocks(CompareArgs),
    /// Matrix of KS distances between class samples.
    PairwiseD,
}

impl Command {
    pub fn kind(&self) -> CommandKind {
        match self {
            Command::Synth(_) => CommandKind::Synth,
            Command::Ingest => CommandKind::Ingest,
            Command::Calibrate(_) => CommandKind::Calibrate,
            Command::Analyze(_) => CommandKind::Analyze,
            Command::CompareClocks(_) => CommandKind::CompareClocks,
            Command::PairwiseD => CommandKind::PairwiseD,
        }
    }
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON config file, or a manifest from an earlier run.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short = 'o', global = true)]
    pub out: Option<PathBuf>,
    /// Price CSV (`timestamp,price`) or series cache.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Seed of the synthetic generators.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Cap on worker threads; default is the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Exit with a nonzero code when any warning was raised.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Session open, HH:MM:SS.
    #[arg(long, global = true)]
    pub open_time: Option<NaiveTime>,
    /// Bar spacing in seconds.
    #[arg(long, global = true)]
    pub bar_spacing_secs: Option<u32>,
    /// Bars per day including the open and the close.
    #[arg(long, global = true)]
    pub n_points: Option<usize>,
    /// Missing bars tolerated per day; gaps are forward-filled.
    #[arg(long, global = true)]
    pub max_missing_bars: Option<usize>,
    /// Length of the uniform partition intervals.
    #[arg(long, global = true)]
    pub interval_minutes: Option<f64>,
    /// Shortest admissible partition interval.
    #[arg(long, global = true)]
    pub min_interval_minutes: Option<f64>,
    /// Lower end of the duration search range, in fst.
    #[arg(long, global = true)]
    pub dtau_min: Option<f64>,
    /// Upper end of the duration search range, in fst.
    #[arg(long, global = true)]
    pub dtau_max: Option<f64>,
    /// Points of the coarse log-spaced search grid.
    #[arg(long, global = true)]
    pub grid_points: Option<usize>,
    /// Relative tolerance of the golden-section refinement.
    #[arg(long, global = true)]
    pub refine_tol: Option<f64>,
    /// Span of the reference class in days.
    #[arg(long, global = true)]
    pub reference_days: Option<usize>,
    /// Multiday spans for tables, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub multiday: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InnovationKind {
    Gaussian,
    StudentT,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Generator.
    #[arg(long, value_enum)]
    pub mode: Option<SynthMode>,
    /// Intraday activity profile.
    #[arg(long, value_enum)]
    pub profile: Option<ProfileKind>,
    /// Height of the U-shape above the midday level.
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Number of trading days.
    #[arg(long)]
    pub days: Option<usize>,
    /// Innovation law, scaled to unit variance.
    #[arg(long, value_enum)]
    pub innovation: Option<InnovationKind>,
    /// Student-t degrees of freedom.
    #[arg(long)]
    pub nu: Option<f64>,
    /// Lag-1 autocorrelation of bar innovations.
    #[arg(long)]
    pub ar: Option<f64>,
    /// Log-price drift added to every bar.
    #[arg(long)]
    pub drift: Option<f64>,
    /// Cascade levels.
    #[arg(long)]
    pub depth: Option<u32>,
    /// Cascade intermittency.
    #[arg(long)]
    pub lambda2: Option<f64>,
    /// Share of the daily variance carried by the closure.
    #[arg(long)]
    pub overnight_share: Option<f64>,
    /// Total log-return variance of one day.
    #[arg(long)]
    pub daily_variance: Option<f64>,
    /// First trading day, YYYY-MM-DD.
    #[arg(long)]
    pub start_date: Option<NaiveDate>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Only closures spanning this many nights form the overnight class.
    #[arg(long)]
    pub overnight_nights: Option<u32>,
    /// Contiguous-return correlation above which a warning is raised.
    #[arg(long)]
    pub correlation_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Calibration JSON; required for the FST clock.
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    /// Clocks to analyze, comma separated.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub clock: Option<Vec<ClockArg>>,
    /// Moment orders, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<f64>>,
    /// Moment window spans in lattice steps.
    #[arg(long, value_delimiter = ',')]
    pub window_steps: Option<Vec<usize>>,
    /// Steps of the equal-fst lattice per session; default is the bar count.
    #[arg(long)]
    pub fst_steps: Option<usize>,
    /// Hurst fit range in minutes, `lo:hi`; repeatable.
    #[arg(long, value_parser = parse_range)]
    pub fit_range_physical: Vec<(f64, f64)>,
    /// Hurst fit range in fst, `lo:hi`; repeatable.
    #[arg(long, value_parser = parse_range)]
    pub fit_range_fst: Vec<(f64, f64)>,
    /// Exponent used to rescale the collapse densities.
    #[arg(long)]
    pub collapse_hurst: Option<f64>,
    /// Histogram bins of the collapse densities.
    #[arg(long)]
    pub collapse_bins: Option<usize>,
    /// Non-overlapping collapse spans in lattice steps.
    #[arg(long, value_delimiter = ',')]
    pub collapse_steps: Option<Vec<usize>>,
    /// Return span of the physical autocorrelation, in bars.
    #[arg(long)]
    pub vol_span_bars: Option<usize>,
    /// Return span of the FST autocorrelation, in fst.
    #[arg(long)]
    pub vol_span_fst: Option<f64>,
    /// Largest autocorrelation lag, in spans.
    #[arg(long)]
    pub max_lag: Option<usize>,
    /// Autocorrelation estimator.
    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorArg>,
    /// Spans of the contiguous-return correlation, in bars.
    #[arg(long, value_delimiter = ',')]
    pub contiguous_spans: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClockArg {
    Physical,
    Fst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Sliding,
    Ciclostationary,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Calibration whose reference class and search settings are reused.
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    /// Moment orders, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<f64>>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl Cli {
    /// Resolves the config: defaults, then the config file, then flags.
    pub fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut c = match &self.global.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let g = &self.global;
        if g.out.is_some() {
            c.output_dir = g.out.clone().unwrap();
        }
        if g.input.is_some() {
            c.input = g.input.clone();
        }
        set(&mut c.seed, g.seed);
        if g.threads.is_some() {
            c.threads = g.threads;
        }
        c.strict |= g.strict;
        set(&mut c.grid.open_time, g.open_time);
        set(&mut c.grid.bar_spacing_secs, g.bar_spacing_secs);
        set(&mut c.grid.n_points, g.n_points);
        set(&mut c.ingest.max_missing_bars, g.max_missing_bars);
        set(&mut c.partition.interval_minutes, g.interval_minutes);
        set(&mut c.partition.min_interval_minutes, g.min_interval_minutes);
        set(&mut c.search.delta_tau_min, g.dtau_min);
        set(&mut c.search.delta_tau_max, g.dtau_max);
        set(&mut c.search.coarse_grid_points, g.grid_points);
        set(&mut c.search.refine_rel_tol, g.refine_tol);
        set(&mut c.clock.reference_days, g.reference_days);
        set(&mut c.clock.multiday, g.multiday.clone());

        match &self.command {
            Command::Synth(a) => {
                let s = &mut c.synth;
                set(&mut s.mode, a.mode);
                set(&mut s.profile, a.profile);
                set(&mut s.amplitude, a.amplitude);
                set(&mut s.n_days, a.days);
                set(&mut s.ar_coefficient, a.ar);
                set(&mut s.drift_per_bar, a.drift);
                set(&mut s.depth, a.depth);
                set(&mut s.lambda2, a.lambda2);
                set(&mut s.overnight_share, a.overnight_share);
                set(&mut s.daily_variance, a.daily_variance);
                set(&mut s.start_date, a.start_date);
                match (a.innovation, a.nu) {
                    (Some(InnovationKind::Gaussian), _) => s.innovation = Innovation::Gaussian,
                    (Some(InnovationKind::StudentT), nu) => s.innovation = Innovation::StudentT { nu: nu.unwrap_or(4.0) },
                    (None, Some(nu)) => s.innovation = Innovation::StudentT { nu },
                    (None, None) => {}
                }
            }
            Command::Calibrate(a) => {
                if a.overnight_nights.is_some() {
                    c.clock.overnight_nights = a.overnight_nights;
                }
                set(&mut c.clock.correlation_threshold, a.correlation_threshold);
            }
            Command::Analyze(a) => {
                if a.calibration.is_some() {
                    c.calibration = a.calibration.clone();
                }
                let s = &mut c.analysis;
                if let Some(clocks) = &a.clock {
                    s.clocks = clocks
                        .iter()
                        .map(|k| match k {
                            ClockArg::Physical => ClockTag::Physical,
                            ClockArg::Fst => ClockTag::Fst,
                        })
                        .collect();
                }
                set(&mut s.orders, a.orders.clone());
                set(&mut s.window_steps, a.window_steps.clone());
                if a.fst_steps.is_some() {
                    s.fst_steps = a.fst_steps;
                }
                if !a.fit_range_physical.is_empty() {
                    s.fit_ranges_physical = a.fit_range_physical.clone();
                }
                if !a.fit_range_fst.is_empty() {
                    s.fit_ranges_fst = a.fit_range_fst.clone();
                }
                set(&mut s.collapse_hurst, a.collapse_hurst);
                set(&mut s.collapse_bins, a.collapse_bins);
                set(&mut s.collapse_steps, a.collapse_steps.clone());
                set(&mut s.volatility_span_bars, a.vol_span_bars);
                set(&mut s.volatility_span_fst, a.vol_span_fst);
                if let Some(max) = a.max_lag {
                    s.lags = (0..=max).collect();
                }
                set(
                    &mut s.estimator,
                    a.estimator.map(|e| match e {
                        EstimatorArg::Sliding => Estimator::SlidingWindow,
                        EstimatorArg::Ciclostationary => Estimator::Ciclostationary,
                    }),
                );
                set(&mut s.contiguous_spans_bars, a.contiguous_spans.clone());
            }
            Command::CompareClocks(a) => {
                if a.calibration.is_some() {
                    c.calibration = a.calibration.clone();
                }
                set(&mut c.compare.orders, a.orders.clone());
            }
            Command::Ingest | Command::PairwiseD => {}
        }
        Ok(c)
    }
}
