//! Calibration of the financial scaling time (FST) and the additive time axis.
//!
//! Every partition interval and the overnight closure receives the duration
//! that best collapses its return distribution onto the one-day reference
//! under `r -> r / sqrt(dtau)`. Durations of longer spans are then obtained by
//! summation, which is what [`TimeMap`] encodes.

mod calibration;
mod search;
mod timemap;

pub use calibration::{
    additivity_report, calibrate_clock, calibrate_clock_with, default_additivity_checks, AdditivityCheck,
    AdditivityRow, ClockCalibration, ClockOptions,
};
pub use search::{calibrate_interval, calibrate_interval_seeded, IntervalFit, SearchConfig, SEED_ORDERS};
pub use timemap::{assemble_time_map, Anchor, TimeMap};
