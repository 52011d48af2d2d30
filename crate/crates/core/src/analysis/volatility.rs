//! Intraday volatility profile `sigma(t) = E|r(t)|` over the day ensemble.

use std::io::Write;

use serde::Serialize;

use super::resample::{check_time_map, interpolate};
use super::{ClockMode, ClockTag};
use crate::stats::mean;
use crate::{Error, PartitionSpec, PriceSeries, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolatilityProfile {
    pub clock: ClockTag,
    /// Bin start, in minutes from the open (physical) or fst from the open.
    pub positions: Vec<f64>,
    pub values: Vec<f64>,
    pub n_days: usize,
}

impl VolatilityProfile {
    /// `max / mean` over positions.
    pub fn peak_to_mean(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / mean(&self.values)
    }

    /// CSV with header `position,clock,volatility`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "position,clock,volatility")?;
        for (p, v) in self.positions.iter().zip(&self.values) {
            writeln!(out, "{p},{},{v}", self.clock)?;
        }
        Ok(())
    }
}

fn mean_abs_detrended(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m).abs()).sum::<f64>() / values.len() as f64
}

/// Physical mode: one position per partition interval. FST mode: `m_max`
/// bins of equal FST span, read off the time map.
pub fn intraday_volatility_profile(series: &PriceSeries, partition: &PartitionSpec, clock: ClockMode<'_>) -> Result<VolatilityProfile> {
    let days = series.days();
    let grid = series.grid();
    if *partition.boundaries().last().unwrap() != grid.close_index() {
        return Err(Error::Spec("partition was built for a different day grid".into()));
    }
    let m_max = partition.m_max();
    let (positions, edges): (Vec<f64>, Vec<f64>) = match clock {
        ClockMode::Physical => {
            let b = partition.boundaries();
            (
                b[..m_max].iter().map(|&x| x as f64 * grid.bar_spacing_minutes()).collect(),
                b.iter().map(|&x| x as f64).collect(),
            )
        }
        ClockMode::Fst(tm) => {
            check_time_map(series, tm)?;
            let step = tm.intraday_total() / m_max as f64;
            let mut edges: Vec<f64> = (0..m_max).map(|k| tm.intraday_bar(k as f64 * step)).collect();
            edges.push(grid.close_index() as f64);
            ((0..m_max).map(|k| k as f64 * step).collect(), edges)
        }
    };
    let values = edges
        .windows(2)
        .map(|w| {
            let r: Vec<f64> = days
                .iter()
                .map(|d| interpolate(&d.log_prices, w[1]) - interpolate(&d.log_prices, w[0]))
                .collect();
            mean_abs_detrended(&r)
        })
        .collect();
    Ok(VolatilityProfile {
        clock: clock.tag(),
        positions,
        values,
        n_days: days.len(),
    })
}
