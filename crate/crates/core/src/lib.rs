//! Financial scaling time (FST).
//!
//! Builds a deterministic clock for intraday price series in which return
//! distributions over equal spans are identical and obey simple scaling
//! with Hurst exponent 1/2. Each partition interval of the trading day (and
//! the overnight closure) is assigned the duration that minimizes the
//! rescaled two-sample Kolmogorov–Smirnov distance against a one-day
//! open-to-open reference sample; durations are then assembled additively
//! into a time axis.
//!
//! Module map:
//!
//! * [`series`], [`partition`], [`returns`]: ingestion, trading-day grid,
//!   interval classes and detrended return ensembles.
//! * [`ks`]: empirical CDFs and the rescaled two-sample KS statistic.
//! * [`clock`]: interval calibration, clock assembly, time maps and the
//!   additivity report.
//! * [`analysis`]: moment scaling, Hurst spectra, density collapse,
//!   volatility profiles and correlations.
//! * [`moment_clock`]: the single-moment time definition and its
//!   comparison with the KS-based clock.
//! * [`synthetic`]: seeded generators with known ground truth.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod clock;
mod error;
pub mod ks;
pub mod moment_clock;
pub mod partition;
pub mod returns;
pub mod series;
mod stats;
pub mod synthetic;

pub use error::{Error, Result};
pub use partition::{ClassKind, IntervalClass, PartitionSpec};
pub use returns::{detrend, raw_returns, ReturnSample};
pub use series::{DayGrid, PriceSeries, TradingDay};
