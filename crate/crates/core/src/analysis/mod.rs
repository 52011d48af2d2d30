//! Validation statistics in physical time and in FST.

pub mod collapse;
pub mod correlation;
pub mod moments;
pub mod resample;
pub mod volatility;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::clock::TimeMap;

pub use collapse::{pdf_collapse_export, CollapseExport, CollapseSet, DEFAULT_COLLAPSE_BINS};
pub use correlation::{
    correlation_gate, linear_correlation_contiguous, volatility_autocorrelation, ContiguousCorrelation,
    CorrelationCurve, Estimator, DEFAULT_CORRELATION_THRESHOLD, MIN_PAIRS,
};
pub use moments::{hurst_slopes, moment_curve, window_samples, HurstSpectrum, MomentTable, TAIL_SENSITIVE_ORDER};
pub use volatility::{intraday_volatility_profile, VolatilityProfile};

/// Which clock an output is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockTag {
    Physical,
    Fst,
}

impl fmt::Display for ClockTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClockTag::Physical => "physical",
            ClockTag::Fst => "fst",
        })
    }
}

/// Clock used to lay out positions and lags.
#[derive(Debug, Clone, Copy)]
pub enum ClockMode<'a> {
    /// Bars of the day grid.
    Physical,
    Fst(&'a TimeMap),
}

impl ClockMode<'_> {
    pub fn tag(&self) -> ClockTag {
        match self {
            ClockMode::Physical => ClockTag::Physical,
            ClockMode::Fst(_) => ClockTag::Fst,
        }
    }
}
