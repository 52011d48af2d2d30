//! Absolute moments across durations and the Hurst slopes fitted to them.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::ClockTag;
use crate::stats::{abs_moment, mean, ols};
use crate::{Error, IntervalClass, Result, ReturnSample};

/// Orders at or above this value depend strongly on the tails.
pub const TAIL_SENSITIVE_ORDER: f64 = 3.0;

/// `moments[i][j] = E|r|^{orders[j]}` over the sample of `durations[i]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentTable {
    pub clock: ClockTag,
    pub durations: Vec<f64>,
    pub orders: Vec<f64>,
    pub moments: Vec<Vec<f64>>,
    pub sample_sizes: Vec<usize>,
}

pub fn moment_curve(samples: &[(f64, ReturnSample)], orders: &[f64], clock: ClockTag) -> Result<MomentTable> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if orders.is_empty() || orders.iter().any(|&q| !(q > 0.0 && q.is_finite())) {
        return Err(Error::Domain("moment orders must be positive".into()));
    }
    if samples.iter().any(|(d, _)| !(*d > 0.0)) {
        return Err(Error::Domain("durations must be positive".into()));
    }
    let moments = samples
        .par_iter()
        .map(|(_, s)| orders.iter().map(|&q| abs_moment(s.values(), q)).collect())
        .collect();
    Ok(MomentTable {
        clock,
        durations: samples.iter().map(|(d, _)| *d).collect(),
        orders: orders.to_vec(),
        moments,
        sample_sizes: samples.iter().map(|(_, s)| s.n()).collect(),
    })
}

impl MomentTable {
    /// CSV with header `duration,clock,q,moment`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "duration,clock,q,moment")?;
        for (d, row) in self.durations.iter().zip(&self.moments) {
            for (q, m) in self.orders.iter().zip(row) {
                writeln!(out, "{d},{},{q},{m}", self.clock)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HurstSpectrum {
    pub clock: ClockTag,
    pub fit_range: (f64, f64),
    pub orders: Vec<f64>,
    /// `H(q)`: the log-log slope divided by `q`.
    pub slopes: Vec<f64>,
    /// `log A_q`.
    pub intercepts: Vec<f64>,
    pub residuals: Vec<f64>,
    pub points_used: Vec<usize>,
    pub tail_sensitive: Vec<bool>,
    pub warnings: Vec<String>,
}

/// Least squares on `(ln duration, ln moment)` for every order, using the
/// durations inside `fit_range` (inclusive).
pub fn hurst_slopes(table: &MomentTable, fit_range: (f64, f64)) -> Result<HurstSpectrum> {
    let (lo, hi) = fit_range;
    if !(lo > 0.0 && lo < hi) {
        return Err(Error::Spec(format!("fit range ({lo}, {hi}) must satisfy 0 < lo < hi")));
    }
    let inside: Vec<usize> = (0..table.durations.len())
        .filter(|&i| (lo..=hi).contains(&table.durations[i]))
        .collect();
    let mut spectrum = HurstSpectrum {
        clock: table.clock,
        fit_range,
        orders: table.orders.clone(),
        slopes: Vec::new(),
        intercepts: Vec::new(),
        residuals: Vec::new(),
        points_used: Vec::new(),
        tail_sensitive: table.orders.iter().map(|&q| q >= TAIL_SENSITIVE_ORDER).collect(),
        warnings: Vec::new(),
    };
    for (j, &q) in table.orders.iter().enumerate() {
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for &i in &inside {
            let m = table.moments[i][j];
            if m > 0.0 && m.is_finite() {
                x.push(table.durations[i].ln());
                y.push(m.ln());
            } else {
                spectrum
                    .warnings
                    .push(format!("q={q}: moment at duration {} is not positive, point excluded", table.durations[i]));
            }
        }
        if x.len() < 3 {
            return Err(Error::Spec(format!(
                "q={q}: {} usable durations in [{lo}, {hi}], at least 3 needed",
                x.len()
            )));
        }
        let fit = ols(&x, &y).ok_or_else(|| Error::Spec("fit range holds a single duration".into()))?;
        spectrum.slopes.push(fit.slope / q);
        spectrum.intercepts.push(fit.intercept);
        spectrum.residuals.push(fit.rms_residual);
        spectrum.points_used.push(x.len());
    }
    Ok(spectrum)
}

impl HurstSpectrum {
    /// CSV with header `q,clock,hurst,log_amplitude,rms_residual,points,tail_sensitive,fit_lo,fit_hi`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "q,clock,hurst,log_amplitude,rms_residual,points,tail_sensitive,fit_lo,fit_hi")?;
        for j in 0..self.orders.len() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                self.orders[j],
                self.clock,
                self.slopes[j],
                self.intercepts[j],
                self.residuals[j],
                self.points_used[j],
                self.tail_sensitive[j],
                self.fit_range.0,
                self.fit_range.1
            )?;
        }
        Ok(())
    }
}

/// Sliding-window returns over `lag` lattice steps for every lag, pooled
/// over all start positions of every path and centred on their pooled mean.
/// The duration attached to a lag is `lag * step_duration`.
pub fn window_samples(paths: &[Vec<f64>], lags: &[usize], step_duration: f64) -> Result<Vec<(f64, ReturnSample)>> {
    if !(step_duration > 0.0) {
        return Err(Error::Domain("step duration must be positive".into()));
    }
    lags.par_iter()
        .map(|&lag| {
            if lag == 0 {
                return Err(Error::Domain("window lag must be positive".into()));
            }
            let mut values: Vec<f64> = paths
                .iter()
                .flat_map(|p| p.windows(lag + 1).map(|w| w[lag] - w[0]))
                .collect();
            if values.is_empty() {
                return Err(Error::Spec(format!("lag {lag} exceeds every path length")));
            }
            let m = mean(&values);
            values.iter_mut().for_each(|v| *v -= m);
            let duration = lag as f64 * step_duration;
            let class = IntervalClass::intraday(0, lag).with_label(format!("window {duration}"));
            Ok((duration, ReturnSample::new(values, class)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(v: &[f64]) -> ReturnSample {
        ReturnSample::from_values(v.to_vec()).unwrap()
    }

    #[test]
    fn small_moments() {
        let t = moment_curve(&[(1.0, sample(&[-1.0, 1.0])), (2.0, sample(&[-2.0, 2.0]))], &[1.0, 2.0], ClockTag::Physical).unwrap();
        assert_eq!(t.moments[0], vec![1.0, 1.0]);
        assert_eq!(t.moments[1][0], 2.0);
        assert!(moment_curve(&[(1.0, sample(&[1.0]))], &[0.0], ClockTag::Physical).is_err());
    }

    #[test]
    fn exact_power_law_gives_half() {
        let durations = [1.0, 2.0, 4.0, 8.0, 16.0];
        let orders = [0.5, 1.0, 2.0, 3.0, 4.0];
        let table = MomentTable {
            clock: ClockTag::Fst,
            durations: durations.to_vec(),
            orders: orders.to_vec(),
            moments: durations.iter().map(|d: &f64| orders.iter().map(|q| d.powf(q / 2.0)).collect()).collect(),
            sample_sizes: vec![1; 5],
        };
        let h = hurst_slopes(&table, (1.0, 16.0)).unwrap();
        for (hq, r) in h.slopes.iter().zip(&h.residuals) {
            assert!((hq - 0.5).abs() < 1e-12);
            assert!(*r < 1e-12);
        }
        assert!(h.intercepts.iter().all(|a| a.abs() < 1e-12));
        assert_eq!(h.tail_sensitive, vec![false, false, false, true, true]);
        assert!(hurst_slopes(&table, (1.0, 3.0)).is_err());
    }

    #[test]
    fn zero_moment_is_excluded_with_warning() {
        let table = MomentTable {
            clock: ClockTag::Physical,
            durations: vec![1.0, 2.0, 3.0, 4.0],
            orders: vec![2.0],
            moments: vec![vec![1.0], vec![2.0], vec![0.0], vec![4.0]],
            sample_sizes: vec![1; 4],
        };
        let h = hurst_slopes(&table, (1.0, 4.0)).unwrap();
        assert_eq!(h.points_used, vec![3]);
        assert_eq!(h.warnings.len(), 1);
    }

    #[test]
    fn windows_are_centred() {
        let paths = vec![vec![0.0, 1.0, 3.0, 6.0]];
        let s = window_samples(&paths, &[1, 2], 0.5).unwrap();
        assert_eq!(s[0].0, 0.5);
        assert_eq!(s[0].1.values(), &[-1.0, 0.0, 1.0]);
        assert_eq!(s[1].1.values(), &[-1.0, 1.0]);
        assert!(window_samples(&paths, &[4], 1.0).is_err());
    }
}
