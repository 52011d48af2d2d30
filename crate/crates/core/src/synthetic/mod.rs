//! Ground-truth-labelled synthetic price series.
//!
//! All generators draw from ChaCha8 (`rand_chacha`), seeded with
//! `seed_from_u64(seed)`. Day `l` (or duration index `i` for marginal
//! samples) uses stream `l` of that generator, so output does not depend on
//! how many worker threads run the generation.

mod generate;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::clock::ClockCalibration;
use crate::{DayGrid, Error, PartitionSpec, Result};

pub use generate::{generate, generate_multifractal, generate_seasonal, generate_selfsimilar};

/// Default total variance of one day including the closure.
pub const DEFAULT_DAILY_VARIANCE: f64 = 1e-4;
/// Default share of the daily variance carried by the overnight closure.
pub const DEFAULT_OVERNIGHT_SHARE: f64 = 0.29;
/// Default amplitude of the U-shaped preset.
pub const DEFAULT_U_AMPLITUDE: f64 = 100.0;

/// Expected variance of every bar increment and of the closure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityProfile {
    intraday: Vec<f64>,
    overnight_mass: f64,
}

impl ActivityProfile {
    /// `intraday[n]` is the variance of the increment from bar `n` to `n + 1`.
    pub fn new(intraday: Vec<f64>, overnight_mass: f64) -> Result<Self> {
        if intraday.is_empty() {
            return Err(Error::Config("activity profile needs at least one bar".into()));
        }
        if intraday.iter().chain([&overnight_mass]).any(|&v| !(v >= 0.0 && v.is_finite())) {
            return Err(Error::Config("activity must be nonnegative and finite".into()));
        }
        let p = Self {
            intraday,
            overnight_mass,
        };
        if !(p.day_mass() > 0.0) {
            return Err(Error::Config("total daily activity must be positive".into()));
        }
        Ok(p)
    }

    /// Samples `shape` at bar midpoints `x = (n + 1/2) / N` of the session
    /// and scales the result to `daily_variance`, of which `overnight_share`
    /// falls on the closure.
    pub fn from_shape(grid: &DayGrid, shape: impl Fn(f64) -> f64, overnight_share: f64, daily_variance: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&overnight_share) || !(daily_variance > 0.0) {
            return Err(Error::Config("overnight share must lie in [0, 1) and daily variance be positive".into()));
        }
        let n = grid.close_index();
        let raw: Vec<f64> = (0..n).map(|i| shape((i as f64 + 0.5) / n as f64)).collect();
        let total: f64 = raw.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Config("activity shape integrates to zero".into()));
        }
        let scale = (1.0 - overnight_share) * daily_variance / total;
        Self::new(raw.iter().map(|v| v * scale).collect(), overnight_share * daily_variance)
    }

    /// Constant activity: a discretized Wiener process within the day.
    pub fn flat(grid: &DayGrid) -> Self {
        Self::from_shape(grid, |_| 1.0, DEFAULT_OVERNIGHT_SHARE, DEFAULT_DAILY_VARIANCE).unwrap()
    }

    /// `1 + amplitude * cos^6(pi x)`: active at the open and close, quiet
    /// at midday, and flat near both edges.
    pub fn u_shape(grid: &DayGrid, amplitude: f64) -> Result<Self> {
        Self::u_shape_scaled(grid, amplitude, DEFAULT_OVERNIGHT_SHARE, DEFAULT_DAILY_VARIANCE)
    }

    pub fn u_shape_scaled(grid: &DayGrid, amplitude: f64, overnight_share: f64, daily_variance: f64) -> Result<Self> {
        if !(amplitude >= 0.0) {
            return Err(Error::Config("U-shape amplitude must be nonnegative".into()));
        }
        Self::from_shape(
            grid,
            |x| 1.0 + amplitude * (std::f64::consts::PI * x).cos().powi(6),
            overnight_share,
            daily_variance,
        )
    }

    pub fn intraday(&self) -> &[f64] {
        &self.intraday
    }

    pub fn overnight_mass(&self) -> f64 {
        self.overnight_mass
    }

    pub fn day_mass(&self) -> f64 {
        self.intraday.iter().sum::<f64>() + self.overnight_mass
    }

    fn check_grid(&self, grid: &DayGrid) -> Result<()> {
        if self.intraday.len() != grid.close_index() {
            return Err(Error::Config(format!(
                "profile has {} bars, grid has {}",
                self.intraday.len(),
                grid.close_index()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Innovation {
    Gaussian,
    /// Student-t with `nu` degrees of freedom, scaled to unit variance.
    StudentT { nu: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorMode {
    Seasonal,
    SelfSimilar { hurst: f64 },
    /// Log-normal dyadic cascade of `depth` levels in the intraday
    /// volatility; `lambda2` is the intermittency coefficient.
    Multifractal { depth: u32, lambda2: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub n_days: usize,
    pub seed: u64,
    pub innovation: Innovation,
    pub mode: GeneratorMode,
    /// Lag-1 autocorrelation of consecutive bar innovations within a day.
    pub ar_coefficient: f64,
    /// Deterministic log-price drift added to every bar increment.
    pub drift_per_bar: f64,
    /// First trading day; later days follow on weekdays.
    pub start_date: NaiveDate,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n_days: 5000,
            seed: 7,
            innovation: Innovation::Gaussian,
            mode: GeneratorMode::Seasonal,
            ar_coefficient: 0.0,
            drift_per_bar: 0.0,
            start_date: NaiveDate::from_ymd_opt(2000, 1, 3).unwrap(),
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_days == 0 {
            return Err(Error::Config("n_days must be at least 1".into()));
        }
        if let Innovation::StudentT { nu } = self.innovation {
            if !(nu > 2.0) {
                return Err(Error::Config(format!("Student-t needs nu > 2 for finite variance, got {nu}")));
            }
        }
        if !(self.ar_coefficient.abs() < 1.0) {
            return Err(Error::Config("AR coefficient must lie in (-1, 1)".into()));
        }
        if !self.drift_per_bar.is_finite() {
            return Err(Error::Config("drift must be finite".into()));
        }
        match self.mode {
            GeneratorMode::SelfSimilar { hurst } if !(hurst > 0.0 && hurst < 1.0) => {
                Err(Error::Config(format!("Hurst exponent must lie in (0, 1), got {hurst}")))
            }
            GeneratorMode::Multifractal { depth, lambda2 } if depth == 0 || depth > 20 || !(lambda2 >= 0.0) => {
                Err(Error::Config("cascade needs 1..=20 levels and lambda2 >= 0".into()))
            }
            _ => Ok(()),
        }
    }
}

/// The clock a generator was built on: expected variance shares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// FST duration of every bar; with the overnight these sum to 1.
    pub bar_durations: Vec<f64>,
    pub overnight_duration: f64,
}

impl GroundTruth {
    pub fn from_profile(profile: &ActivityProfile) -> Self {
        let total = profile.day_mass();
        Self {
            bar_durations: profile.intraday().iter().map(|a| a / total).collect(),
            overnight_duration: profile.overnight_mass() / total,
        }
    }

    /// Interval durations: activity integrals over each partition interval.
    pub fn clock(&self, partition: &PartitionSpec) -> Result<ClockCalibration> {
        let b = partition.boundaries();
        if *b.last().unwrap() != self.bar_durations.len() {
            return Err(Error::Spec("partition does not match the generator grid".into()));
        }
        let intraday = b.windows(2).map(|w| self.bar_durations[w[0]..w[1]].iter().sum()).collect();
        ClockCalibration::from_durations(partition, intraday, self.overnight_duration)
    }
}
