//! Volatility autocorrelation and the linear correlation of contiguous
//! returns.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::resample::fst_continuous_path;
use super::{ClockMode, ClockTag};
use crate::stats::{mean, pearson};
use crate::{Error, PriceSeries, Result};

/// Lags with fewer pairs are dropped.
pub const MIN_PAIRS: usize = 30;
/// Contiguous-return correlation above which additivity is not expected.
pub const DEFAULT_CORRELATION_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Pearson correlation over every pair at the lag, all start positions pooled.
    SlidingWindow,
    /// Pearson correlation per time-of-day position, averaged over positions.
    Ciclostationary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationCurve {
    pub clock: ClockTag,
    pub estimator: Estimator,
    /// Lag in minutes (physical) or fst.
    pub lags: Vec<f64>,
    pub values: Vec<f64>,
    pub n_pairs: Vec<usize>,
    pub warnings: Vec<String>,
}

impl CorrelationCurve {
    /// CSV with header `lag,clock,corr,n_pairs`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "lag,clock,corr,n_pairs")?;
        for i in 0..self.lags.len() {
            writeln!(out, "{},{},{},{}", self.lags[i], self.clock, self.values[i], self.n_pairs[i])?;
        }
        Ok(())
    }
}

/// Returns of span `span` on a regular lattice, with the time-of-day slot of
/// each return and the number of slots.
struct Lattice {
    returns: Vec<f64>,
    slots: Vec<usize>,
    n_slots: usize,
    lag_unit: f64,
}

fn physical_lattice(series: &PriceSeries, span: f64) -> Result<Lattice> {
    let k = span as usize;
    let close = series.grid().close_index();
    if span.fract() != 0.0 || k == 0 || k > close {
        return Err(Error::Config(format!("physical span must be a whole number of bars in 1..={close}, got {span}")));
    }
    let per_day = close / k;
    let mut blocks: Vec<Vec<f64>> = (0..per_day)
        .map(|j| series.days().iter().map(|d| d.log_prices[(j + 1) * k] - d.log_prices[j * k]).collect())
        .collect();
    for b in &mut blocks {
        let m = mean(b);
        b.iter_mut().for_each(|v| *v -= m);
    }
    let n_days = series.n_days();
    let mut returns = Vec::with_capacity(n_days * per_day);
    let mut slots = Vec::with_capacity(n_days * per_day);
    for l in 0..n_days {
        for (j, b) in blocks.iter().enumerate() {
            returns.push(b[l]);
            slots.push(j);
        }
    }
    Ok(Lattice {
        returns,
        slots,
        n_slots: per_day,
        lag_unit: k as f64 * series.grid().bar_spacing_minutes(),
    })
}

fn fst_lattice(series: &PriceSeries, tm: &crate::clock::TimeMap, span: f64) -> Result<Lattice> {
    let path = fst_continuous_path(series, tm, span)?;
    let mut returns: Vec<f64> = path.windows(2).map(|w| w[1] - w[0]).collect();
    if returns.is_empty() {
        return Err(Error::Config(format!("FST span {span} exceeds the series")));
    }
    let m = mean(&returns);
    returns.iter_mut().for_each(|v| *v -= m);
    let day = tm.day_total();
    let n_slots = (day / span).ceil() as usize;
    let slots = (0..returns.len())
        .map(|t| {
            let u = (t as f64 * span) % day;
            ((u / span).floor() as usize).min(n_slots - 1)
        })
        .collect();
    Ok(Lattice {
        returns,
        slots,
        n_slots,
        lag_unit: span,
    })
}

/// Correlation of `|r(t)|` with `|r(t + lag)|` for returns of span `span`
/// (bars in physical mode, fst in FST mode) at lags given in units of the
/// span.
///
/// Physical returns are non-overlapping blocks inside each session, laid
/// end to end across days and detrended per block position. FST returns
/// cover the whole timeline, closures included.
pub fn volatility_autocorrelation(
    series: &PriceSeries,
    clock: ClockMode<'_>,
    span: f64,
    lags: &[usize],
    estimator: Estimator,
) -> Result<CorrelationCurve> {
    let lattice = match clock {
        ClockMode::Physical => physical_lattice(series, span)?,
        ClockMode::Fst(tm) => fst_lattice(series, tm, span)?,
    };
    let abs: Vec<f64> = lattice.returns.iter().map(|v| v.abs()).collect();
    let n = abs.len();
    let cells: Vec<(usize, Option<f64>, usize)> = lags
        .par_iter()
        .map(|&h| {
            if h >= n {
                return (h, None, 0);
            }
            match estimator {
                Estimator::SlidingWindow => (h, pearson(&abs[..n - h], &abs[h..]), n - h),
                Estimator::Ciclostationary => {
                    let mut a = vec![Vec::new(); lattice.n_slots];
                    let mut b = vec![Vec::new(); lattice.n_slots];
                    for t in 0..n - h {
                        a[lattice.slots[t]].push(abs[t]);
                        b[lattice.slots[t]].push(abs[t + h]);
                    }
                    let per_slot: Vec<f64> = a.iter().zip(&b).filter_map(|(x, y)| pearson(x, y)).collect();
                    let value = (!per_slot.is_empty()).then(|| mean(&per_slot).clamp(-1.0, 1.0));
                    (h, value, n - h)
                }
            }
        })
        .collect();
    let mut curve = CorrelationCurve {
        clock: clock.tag(),
        estimator,
        lags: Vec::new(),
        values: Vec::new(),
        n_pairs: Vec::new(),
        warnings: Vec::new(),
    };
    for (h, value, pairs) in cells {
        match value {
            Some(v) if pairs >= MIN_PAIRS => {
                curve.lags.push(h as f64 * lattice.lag_unit);
                curve.values.push(v);
                curve.n_pairs.push(pairs);
            }
            _ => curve
                .warnings
                .push(format!("lag {h}: {pairs} pairs (at least {MIN_PAIRS} with nonzero variance needed), dropped")),
        }
    }
    Ok(curve)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContiguousCorrelation {
    pub span_bars: usize,
    /// Average over positions.
    pub value: f64,
    /// Normalized day-ensemble product at each position `n = k..=N-k`.
    pub per_position: Vec<f64>,
    pub n_days: usize,
}

/// Linear correlation between the detrended returns over `[n - k, n]` and
/// `[n, n + k]`: the day-ensemble mean of their product normalized by the
/// root mean squares, averaged over every position `n` in `k..=N-k`.
pub fn linear_correlation_contiguous(series: &PriceSeries, span_bars: usize) -> Result<ContiguousCorrelation> {
    let close = series.grid().close_index();
    if span_bars == 0 || 2 * span_bars > close {
        return Err(Error::Config(format!("two contiguous spans of {span_bars} bars do not fit in a {close}-bar day")));
    }
    let k = span_bars;
    let days = series.days();
    let detrended = |a: usize, b: usize| {
        let r: Vec<f64> = days.iter().map(|d| d.log_prices[b] - d.log_prices[a]).collect();
        let m = mean(&r);
        r.into_iter().map(|v| v - m).collect::<Vec<_>>()
    };
    let per_position: Vec<f64> = (k..=close - k)
        .into_par_iter()
        .map(|n| {
            let before = detrended(n - k, n);
            let after = detrended(n, n + k);
            let prod = before.iter().zip(&after).map(|(x, y)| x * y).sum::<f64>() / days.len() as f64;
            let rms = |v: &[f64]| (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt();
            let den = rms(&before) * rms(&after);
            if den > 0.0 {
                (prod / den).clamp(-1.0, 1.0)
            } else {
                0.0
            }
        })
        .collect();
    Ok(ContiguousCorrelation {
        span_bars,
        value: mean(&per_position),
        per_position,
        n_days: days.len(),
    })
}

/// Warning text when `|c|` exceeds `threshold`.
pub fn correlation_gate(c: &ContiguousCorrelation, threshold: f64, bar_minutes: f64) -> Option<String> {
    (c.value.abs() > threshold).then(|| {
        format!(
            "cutoff violation: contiguous-return correlation {:.4} at {} min exceeds {threshold}",
            c.value,
            c.span_bars as f64 * bar_minutes
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{DayGrid, TradingDay};
    use chrono::{NaiveDate, NaiveTime};

    fn series(paths: Vec<Vec<f64>>) -> PriceSeries {
        let grid = DayGrid::new(NaiveTime::from_hms_opt(9, 0, 0).unwrap(), 60, paths[0].len()).unwrap();
        let start = NaiveDate::from_ymd_opt(2001, 1, 1).unwrap();
        let days = paths
            .into_iter()
            .enumerate()
            .map(|(l, log_prices)| TradingDay { date: start + chrono::Days::new(l as u64), log_prices })
            .collect();
        PriceSeries::new(grid, days).unwrap()
    }

    fn pseudo_paths(n_days: usize, n_points: usize) -> Vec<Vec<f64>> {
        let mut state = 12345u64;
        (0..n_days)
            .map(|_| {
                let mut p = vec![0.0];
                for _ in 1..n_points {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let u = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                    p.push(p.last().unwrap() + u);
                }
                p
            })
            .collect()
    }

    #[test]
    fn lag_zero_is_exactly_one() {
        let s = series(pseudo_paths(40, 21));
        for est in [Estimator::SlidingWindow, Estimator::Ciclostationary] {
            let c = volatility_autocorrelation(&s, ClockMode::Physical, 2.0, &[0, 1, 5], est).unwrap();
            assert_eq!(c.values[0], 1.0);
            assert!(c.values.iter().all(|v| v.abs() <= 1.0));
        }
    }

    #[test]
    fn short_series_drops_lags() {
        let s = series(pseudo_paths(2, 11));
        let c = volatility_autocorrelation(&s, ClockMode::Physical, 1.0, &[1, 15], Estimator::SlidingWindow).unwrap();
        assert!(c.lags.is_empty());
        assert_eq!(c.warnings.len(), 2);
    }

    #[test]
    fn contiguous_perfectly_anticorrelated() {
        // Every day goes up by x then back down by x: c = -1.
        let paths: Vec<Vec<f64>> = (0..10).map(|l| vec![0.0, (l as f64) - 4.5, 0.0]).collect();
        let c = linear_correlation_contiguous(&series(paths), 1).unwrap();
        assert_eq!(c.per_position.len(), 1);
        assert!((c.value + 1.0).abs() < 1e-12);
        assert!(correlation_gate(&c, 0.05, 1.0).is_some());
        assert!(linear_correlation_contiguous(&series(pseudo_paths(3, 3)), 2).is_err());
    }
}
