//! Log-prices sampled on an FST lattice.
//!
//! Between bars the log-price is interpolated linearly; across a closure it
//! moves linearly from the close to the next open.

use crate::clock::TimeMap;
use crate::{Error, PriceSeries, Result};

/// Linear interpolation of a day path at a fractional bar position.
pub fn interpolate(log_prices: &[f64], bar: f64) -> f64 {
    let last = log_prices.len() - 1;
    let bar = bar.clamp(0.0, last as f64);
    let i = (bar.floor() as usize).min(last - 1);
    let f = bar - i as f64;
    if f == 0.0 {
        return log_prices[i];
    }
    log_prices[i] + f * (log_prices[i + 1] - log_prices[i])
}

/// Checks that `tm` was assembled on the dates of `series`.
pub fn check_time_map(series: &PriceSeries, tm: &TimeMap) -> Result<()> {
    let per_day = tm.anchors().len() / tm.n_days();
    let matches = tm.n_days() == series.n_days()
        && series
            .days()
            .iter()
            .enumerate()
            .all(|(l, d)| tm.anchors()[l * per_day].t.date() == d.date);
    if !matches {
        return Err(Error::Spec("time map was assembled on different trading days".into()));
    }
    Ok(())
}

/// Per-day paths at `steps + 1` equally spaced FST points from open to close.
pub fn fst_session_paths(series: &PriceSeries, tm: &TimeMap, steps: usize) -> Result<Vec<Vec<f64>>> {
    check_time_map(series, tm)?;
    if steps == 0 {
        return Err(Error::Config("FST lattice needs at least one step".into()));
    }
    let total = tm.intraday_total();
    let bars: Vec<f64> = (0..=steps)
        .map(|k| {
            if k == steps {
                series.grid().close_index() as f64
            } else {
                tm.intraday_bar(k as f64 * total / steps as f64)
            }
        })
        .collect();
    Ok(series
        .days()
        .iter()
        .map(|d| bars.iter().map(|&b| interpolate(&d.log_prices, b)).collect())
        .collect())
}

/// One path through the whole series at FST spacing `step`, from the first
/// open up to the last close, closures included.
pub fn fst_continuous_path(series: &PriceSeries, tm: &TimeMap, step: f64) -> Result<Vec<f64>> {
    check_time_map(series, tm)?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Config("FST step must be positive".into()));
    }
    let days = series.days();
    let (day_total, session) = (tm.day_total(), tm.intraday_total());
    let night = day_total - session;
    let end = tm.tau_range().1;
    let n = (end / step).floor() as usize;
    Ok((0..=n)
        .map(|k| {
            let tau = k as f64 * step;
            let l = ((tau / day_total).floor() as usize).min(days.len() - 1);
            let u = tau - l as f64 * day_total;
            let day = &days[l].log_prices;
            if u <= session || l + 1 == days.len() {
                interpolate(day, tm.intraday_bar(u.min(session)))
            } else {
                let close = *day.last().unwrap();
                close + (u - session) / night * (days[l + 1].log_prices[0] - close)
            }
        })
        .collect())
}
