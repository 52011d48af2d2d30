//! Run configuration: JSON on disk, every field overridable by a flag.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::{NaiveDate, NaiveTime};
use fst_core::analysis::{ClockTag, Estimator};
use fst_core::clock::SearchConfig;
use fst_core::synthetic::{Innovation, DEFAULT_DAILY_VARIANCE, DEFAULT_OVERNIGHT_SHARE, DEFAULT_U_AMPLITUDE};
use fst_core::{DayGrid, PartitionSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub calibration: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub strict: bool,
    pub threads: Option<usize>,
    pub grid: GridConfig,
    pub ingest: IngestConfig,
    pub partition: PartitionConfig,
    pub search: SearchConfig,
    pub clock: ClockConfig,
    pub synth: SynthConfig,
    pub analysis: AnalysisConfig,
    pub compare: CompareConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            calibration: None,
            output_dir: PathBuf::from("out"),
            seed: 7,
            strict: false,
            threads: None,
            grid: GridConfig::default(),
            ingest: IngestConfig::default(),
            partition: PartitionConfig::default(),
            search: SearchConfig::default(),
            clock: ClockConfig::default(),
            synth: SynthConfig::default(),
            analysis: AnalysisConfig::default(),
            compare: CompareConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub open_time: NaiveTime,
    pub bar_spacing_secs: u32,
    pub n_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        let g = DayGrid::sp500_minute();
        Self {
            open_time: g.open_time(),
            bar_spacing_secs: g.bar_spacing_secs(),
            n_points: g.n_points(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    /// Days with at most this many missing bars are repaired instead of dropped.
    pub max_missing_bars: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionConfig {
    pub interval_minutes: f64,
    pub min_interval_minutes: f64,
    /// Explicit bar boundaries; overrides `interval_minutes`.
    pub boundaries: Option<Vec<usize>>,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self {
            interval_minutes: 20.0,
            min_interval_minutes: 20.0,
            boundaries: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClockConfig {
    /// Open-to-open span of the reference class, in days.
    pub reference_days: usize,
    /// Restrict the overnight class to closures of exactly this many nights.
    pub overnight_nights: Option<u32>,
    /// Spans (days) of the multiday classes in tables and additivity checks.
    pub multiday: Vec<usize>,
    pub correlation_threshold: f64,
}

impl Default for ClockConfig {
    fn default() -> Self {
        Self {
            reference_days: 1,
            overnight_nights: None,
            multiday: vec![2, 3, 5, 10],
            correlation_threshold: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SynthMode {
    Seasonal,
    Multifractal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Flat,
    UShape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub mode: SynthMode,
    pub profile: ProfileKind,
    pub amplitude: f64,
    pub overnight_share: f64,
    pub daily_variance: f64,
    pub n_days: usize,
    pub innovation: Innovation,
    pub ar_coefficient: f64,
    pub drift_per_bar: f64,
    pub depth: u32,
    pub lambda2: f64,
    pub start_date: NaiveDate,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            mode: SynthMode::Seasonal,
            profile: ProfileKind::UShape,
            amplitude: DEFAULT_U_AMPLITUDE,
            overnight_share: DEFAULT_OVERNIGHT_SHARE,
            daily_variance: DEFAULT_DAILY_VARIANCE,
            n_days: 5000,
            innovation: Innovation::Gaussian,
            ar_coefficient: 0.0,
            drift_per_bar: 0.0,
            depth: 8,
            lambda2: 0.05,
            start_date: NaiveDate::from_ymd_opt(2000, 1, 3).unwrap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub clocks: Vec<ClockTag>,
    pub orders: Vec<f64>,
    /// Sliding-window spans for the moment tables, in lattice steps.
    pub window_steps: Vec<usize>,
    /// Steps of the equal-FST lattice per session; defaults to the bar count.
    pub fst_steps: Option<usize>,
    /// Hurst fit ranges in minutes. Required for the physical clock.
    pub fit_ranges_physical: Vec<(f64, f64)>,
    /// Hurst fit ranges in fst. Required for the FST clock.
    pub fit_ranges_fst: Vec<(f64, f64)>,
    pub collapse_hurst: f64,
    pub collapse_bins: usize,
    /// Non-overlapping spans for the density collapse, in lattice steps.
    pub collapse_steps: Vec<usize>,
    pub volatility_span_bars: usize,
    pub volatility_span_fst: f64,
    pub lags: Vec<usize>,
    pub estimator: Estimator,
    pub contiguous_spans_bars: Vec<usize>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            clocks: vec![ClockTag::Physical],
            orders: vec![0.5, 1.0, 2.0, 3.0, 4.0],
            window_steps: vec![4, 8, 16, 32, 64, 128],
            fst_steps: None,
            fit_ranges_physical: Vec::new(),
            fit_ranges_fst: Vec::new(),
            collapse_hurst: 0.5,
            collapse_bins: 101,
            collapse_steps: vec![20, 76, 190, 380],
            volatility_span_bars: 20,
            volatility_span_fst: 0.037,
            lags: (0..=100).collect(),
            estimator: Estimator::SlidingWindow,
            contiguous_spans_bars: vec![1, 2, 3, 5, 10, 15, 20, 30, 40],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub orders: Vec<f64>,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            orders: vec![1.0, 2.0, 3.0],
        }
    }
}

impl RunConfig {
    /// Reads a config file, or the `config` block of a run manifest.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let value = match value.get("config") {
            Some(inner) if value.get("tool").is_some() => inner.clone(),
            _ => value,
        };
        serde_json::from_value(value).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn day_grid(&self) -> Result<DayGrid> {
        Ok(DayGrid::new(self.grid.open_time, self.grid.bar_spacing_secs, self.grid.n_points)?)
    }

    pub fn partition_spec(&self, grid: &DayGrid) -> Result<PartitionSpec> {
        let p = &self.partition;
        Ok(match &p.boundaries {
            Some(b) => PartitionSpec::new(grid, b.clone(), p.min_interval_minutes)?,
            None => PartitionSpec::uniform(grid, p.interval_minutes, p.min_interval_minutes)?,
        })
    }

    pub fn require_input(&self) -> Result<&Path> {
        match &self.input {
            Some(p) => Ok(p),
            None => bail!("no input given: pass --input or set \"input\" in the config"),
        }
    }
}

/// Parses `lo:hi`.
pub fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got {s}"))?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad lower bound in {s}"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad upper bound in {s}"))?;
    if !(lo > 0.0 && lo < hi) {
        return Err(format!("range {s} must satisfy 0 < lo < hi"));
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_json() {
        let c = RunConfig::default();
        let text = serde_json::to_string_pretty(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        let partial: RunConfig = serde_json::from_str(r#"{"seed": 3, "partition": {"interval_minutes": 38}}"#).unwrap();
        assert_eq!(partial.seed, 3);
        assert_eq!(partial.partition.min_interval_minutes, 20.0);
        assert!(serde_json::from_str::<RunConfig>(r#"{"sed": 3}"#).is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("20:380"), Ok((20.0, 380.0)));
        assert!(parse_range("5").is_err());
        assert!(parse_range("5:1").is_err());
    }
}
