//! Return ensembles per interval class.

use serde::Serialize;

use crate::partition::ClassKind;
use crate::stats::mean;
use crate::{Error, IntervalClass, PriceSeries, Result};

/// Log-returns sampled over one interval class, one per admissible day
/// (or day window).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnSample {
    values: Vec<f64>,
    class: IntervalClass,
    detrended: bool,
}

impl ReturnSample {
    pub fn new(values: Vec<f64>, class: IntervalClass) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite return {v} in class {class}")));
        }
        Ok(Self {
            values,
            class,
            detrended: false,
        })
    }

    /// Convenience for ad-hoc samples (tests, synthetic marginals).
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::new(values, IntervalClass::intraday(0, 1).with_label("sample"))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn class(&self) -> &IntervalClass {
        &self.class
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn is_detrended(&self) -> bool {
        self.detrended
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    /// Elementwise product with `c`; keeps class and flag.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
            class: self.class.clone(),
            detrended: self.detrended,
        }
    }

    pub fn with_class(mut self, class: IntervalClass) -> Self {
        self.class = class;
        self
    }
}

/// Returns `ln s(end) - ln s(start)` for every admissible day of `series`.
///
/// Overnight returns run from the close of each retained day to the open of
/// the next retained day, whatever the calendar gap between them. Multiday
/// returns are open-to-open, in non-overlapping windows unless the class
/// asks otherwise.
pub fn raw_returns(series: &PriceSeries, class: &IntervalClass) -> Result<ReturnSample> {
    class.validate(series.grid())?;
    let days = series.days();
    let values: Vec<f64> = match class.kind {
        ClassKind::Intraday { start_bar, end_bar } => days
            .iter()
            .map(|d| d.log_prices[end_bar] - d.log_prices[start_bar])
            .collect(),
        ClassKind::Overnight { nights } => days
            .windows(2)
            .filter(|w| match nights {
                None => true,
                Some(k) => (w[1].date - w[0].date).num_days() == k as i64,
            })
            .map(|w| w[1].open() - w[0].close())
            .collect(),
        ClassKind::Multiday { days: span, overlapping } => {
            let step = if overlapping { 1 } else { span };
            (0..days.len())
                .step_by(step)
                .take_while(|&l| l + span < days.len())
                .map(|l| days[l + span].open() - days[l].open())
                .collect()
        }
    };
    if values.is_empty() {
        return Err(Error::Spec(format!(
            "class {class} has no admissible returns in a {}-day series",
            days.len()
        )));
    }
    ReturnSample::new(values, class.clone())
}

/// Subtracts the ensemble mean over all days sharing the sample's interval
/// class (same intraday indices and day offset).
pub fn detrend(sample: &ReturnSample) -> ReturnSample {
    let m = sample.mean();
    ReturnSample {
        values: sample.values.iter().map(|v| v - m).collect(),
        class: sample.class.clone(),
        detrended: true,
    }
}

/// [`raw_returns`] followed by [`detrend`].
pub fn detrended_returns(series: &PriceSeries, class: &IntervalClass) -> Result<ReturnSample> {
    raw_returns(series, class).map(|s| detrend(&s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{DayGrid, TradingDay};
    use chrono::{NaiveDate, NaiveTime};

    fn grid() -> DayGrid {
        DayGrid::new(NaiveTime::from_hms_opt(9, 40, 0).unwrap(), 60, 3).unwrap()
    }

    fn series(dates: &[(i32, u32, u32)], prices: &[[f64; 3]]) -> PriceSeries {
        let days = dates
            .iter()
            .zip(prices)
            .map(|(&(y, m, d), p)| TradingDay {
                date: NaiveDate::from_ymd_opt(y, m, d).unwrap(),
                log_prices: p.iter().map(|v: &f64| v.ln()).collect(),
            })
            .collect();
        PriceSeries::new(grid(), days).unwrap()
    }

    #[test]
    fn two_point_return() {
        let s = series(&[(2010, 1, 4)], &[[100.0, 110.0, 110.0]]);
        let r = raw_returns(&s, &IntervalClass::intraday(0, 1)).unwrap();
        assert!((r.values()[0] - 1.1f64.ln()).abs() < 1e-15);
        assert!((r.values()[0] - 0.0953).abs() < 1e-4);
    }

    #[test]
    fn constant_day_gives_zero_returns() {
        let s = series(&[(2010, 1, 4), (2010, 1, 5)], &[[50.0; 3], [50.0; 3]]);
        for class in [IntervalClass::intraday(0, 1), IntervalClass::intraday(1, 2), IntervalClass::intraday(0, 2)] {
            assert!(raw_returns(&s, &class).unwrap().values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn overnight_merges_and_separates_closures() {
        // Fri 2010-01-08 -> Mon 2010-01-11 is a 3-night closure.
        let s = series(
            &[(2010, 1, 7), (2010, 1, 8), (2010, 1, 11)],
            &[[1.0, 1.0, 2.0], [4.0, 4.0, 8.0], [16.0, 16.0, 16.0]],
        );
        let all = raw_returns(&s, &IntervalClass::overnight()).unwrap();
        assert_eq!(all.n(), 2);
        assert!((all.values()[0] - 2f64.ln()).abs() < 1e-15);
        assert!((all.values()[1] - 2f64.ln()).abs() < 1e-15);
        assert_eq!(raw_returns(&s, &IntervalClass::overnight_spanning(1)).unwrap().n(), 1);
        assert_eq!(raw_returns(&s, &IntervalClass::overnight_spanning(3)).unwrap().n(), 1);
        assert!(raw_returns(&s, &IntervalClass::overnight_spanning(2)).is_err());
    }

    #[test]
    fn multiday_windows() {
        let dates: Vec<(i32, u32, u32)> = (4..=8).map(|d| (2010, 1, d)).collect();
        let prices: Vec<[f64; 3]> = (0..5).map(|i| [2f64.powi(i); 3]).collect();
        let s = series(&dates, &prices);
        let two = raw_returns(&s, &IntervalClass::multiday(2)).unwrap();
        assert_eq!(two.n(), 2); // windows 0->2, 2->4
        let ov = raw_returns(&s, &IntervalClass::multiday_overlapping(2)).unwrap();
        assert_eq!(ov.n(), 3);
        assert!(raw_returns(&s, &IntervalClass::multiday(5)).is_err());
    }

    #[test]
    fn out_of_grid_class_is_spec_error() {
        let s = series(&[(2010, 1, 4)], &[[1.0; 3]]);
        assert!(matches!(raw_returns(&s, &IntervalClass::intraday(0, 3)), Err(Error::Spec(_))));
    }

    #[test]
    fn detrend_subtracts_mean() {
        let s = ReturnSample::from_values(vec![0.01, 0.03]).unwrap();
        let d = detrend(&s);
        assert!((d.values()[0] + 0.01).abs() < 1e-15);
        assert!((d.values()[1] - 0.01).abs() < 1e-15);
        assert!(d.is_detrended());
        let z = ReturnSample::from_values(vec![-1.0, 1.0]).unwrap();
        assert_eq!(detrend(&z).values(), z.values());
    }

    #[test]
    fn empty_and_nonfinite_rejected() {
        assert!(matches!(ReturnSample::from_values(vec![]), Err(Error::EmptySample)));
        assert!(ReturnSample::from_values(vec![f64::NAN]).is_err());
    }
}
