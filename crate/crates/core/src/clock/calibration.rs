use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::search::{calibrate_interval, IntervalFit, SearchConfig};
use crate::partition::ClassKind;
use crate::returns::detrended_returns;
use crate::{DayGrid, Error, IntervalClass, PartitionSpec, PriceSeries, Result};

/// Which classes define the unit and the closure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClockOptions {
    /// Its duration is 1 fst by definition.
    pub reference: IntervalClass,
    pub overnight: IntervalClass,
}

impl Default for ClockOptions {
    fn default() -> Self {
        Self {
            reference: IntervalClass::one_day(),
            overnight: IntervalClass::overnight(),
        }
    }
}

/// Durations of the partition intervals and of the overnight closure.
///
/// The serialized form is the calibration document written by the CLI; its
/// key order is fixed by the field order below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClockCalibration {
    pub reference_class: IntervalClass,
    #[serde(rename = "delta_tau_intraday")]
    pub intraday_durations: Vec<f64>,
    #[serde(rename = "delta_tau_night")]
    pub overnight_duration: f64,
    /// Minimized D for each intraday interval followed by the overnight.
    /// Empty for clocks that were not fitted (ground truth).
    pub d_values: Vec<f64>,
    pub search_config: SearchConfig,
    pub boundary_warnings: Vec<String>,
    pub partition_boundaries: Vec<usize>,
    pub overnight_class: IntervalClass,
    /// How the time map interpolates between anchors.
    pub interpolation: String,
}

impl ClockCalibration {
    /// Clock with known durations and no fit diagnostics.
    pub fn from_durations(
        partition: &PartitionSpec,
        intraday_durations: Vec<f64>,
        overnight_duration: f64,
    ) -> Result<Self> {
        let cal = Self {
            reference_class: IntervalClass::one_day(),
            intraday_durations,
            overnight_duration,
            d_values: Vec::new(),
            search_config: SearchConfig::default(),
            boundary_warnings: Vec::new(),
            partition_boundaries: partition.boundaries().to_vec(),
            overnight_class: IntervalClass::overnight(),
            interpolation: "linear".into(),
        };
        cal.validate()?;
        Ok(cal)
    }

    pub fn validate(&self) -> Result<()> {
        let m_max = self.partition_boundaries.len().saturating_sub(1);
        if m_max == 0 || self.intraday_durations.len() != m_max {
            return Err(Error::Spec(format!(
                "{} intraday durations for a partition of {m_max} intervals",
                self.intraday_durations.len()
            )));
        }
        if !self.d_values.is_empty() && self.d_values.len() != m_max + 1 {
            return Err(Error::Spec("d_values must cover every interval and the overnight".into()));
        }
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !self.intraday_durations.iter().all(|&v| positive(v)) || !positive(self.overnight_duration) {
            return Err(Error::Spec("all clock durations must be positive and finite".into()));
        }
        Ok(())
    }

    pub fn m_max(&self) -> usize {
        self.intraday_durations.len()
    }

    pub fn intraday_total(&self) -> f64 {
        self.intraday_durations.iter().sum()
    }

    /// `sum_m dtau_m + dtau_night`.
    pub fn day_total(&self) -> f64 {
        self.intraday_total() + self.overnight_duration
    }

    pub fn intraday_d(&self) -> &[f64] {
        let m = self.m_max().min(self.d_values.len());
        &self.d_values[..m]
    }

    pub fn overnight_d(&self) -> Option<f64> {
        self.d_values.get(self.m_max()).copied()
    }

    /// Known duration of a class without refitting, if the calibration
    /// already determines it.
    fn lookup(&self, kind: &ClassKind) -> Option<f64> {
        if *kind == self.reference_class.kind {
            return Some(1.0);
        }
        if *kind == self.overnight_class.kind {
            return Some(self.overnight_duration);
        }
        if let ClassKind::Intraday { start_bar, end_bar } = *kind {
            let b = &self.partition_boundaries;
            let m = b.iter().position(|&x| x == start_bar)?;
            if b.get(m + 1) == Some(&end_bar) {
                return Some(self.intraday_durations[m]);
            }
        }
        None
    }
}

fn check_partition(series: &PriceSeries, partition: &PartitionSpec) -> Result<()> {
    let grid = series.grid();
    if partition.bar_spacing_secs() != grid.bar_spacing_secs()
        || *partition.boundaries().last().unwrap() != grid.close_index()
    {
        return Err(Error::Spec("partition was built for a different day grid".into()));
    }
    Ok(())
}

fn boundary_warning(class: &IntervalClass, fit: &IntervalFit, cfg: &SearchConfig) -> String {
    format!(
        "class {class}: minimum dtau={} at the edge of the search range [{}, {}]",
        fit.delta_tau, cfg.delta_tau_min, cfg.delta_tau_max
    )
}

/// Calibrates against the detrended one-day open-to-open reference.
pub fn calibrate_clock(series: &PriceSeries, partition: &PartitionSpec, cfg: &SearchConfig) -> Result<ClockCalibration> {
    calibrate_clock_with(series, partition, cfg, &ClockOptions::default())
}

pub fn calibrate_clock_with(
    series: &PriceSeries,
    partition: &PartitionSpec,
    cfg: &SearchConfig,
    opts: &ClockOptions,
) -> Result<ClockCalibration> {
    cfg.validate()?;
    check_partition(series, partition)?;
    let x_ref = detrended_returns(series, &opts.reference)?;
    let mut classes = partition.intervals();
    classes.push(opts.overnight.clone());
    let fits = classes
        .par_iter()
        .map(|c| calibrate_interval(&detrended_returns(series, c)?, &x_ref, cfg))
        .collect::<Result<Vec<_>>>()?;

    let boundary_warnings = classes
        .iter()
        .zip(&fits)
        .filter(|(_, f)| f.boundary_hit)
        .map(|(c, f)| boundary_warning(c, f, cfg))
        .collect();
    let (night, intraday) = fits.split_last().unwrap();
    let cal = ClockCalibration {
        reference_class: opts.reference.clone(),
        intraday_durations: intraday.iter().map(|f| f.delta_tau).collect(),
        overnight_duration: night.delta_tau,
        d_values: fits.iter().map(|f| f.ks.d).collect(),
        search_config: *cfg,
        boundary_warnings,
        partition_boundaries: partition.boundaries().to_vec(),
        overnight_class: opts.overnight.clone(),
        interpolation: "linear".into(),
    };
    cal.validate()?;
    Ok(cal)
}

/// A union class compared with the sum of its parts.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditivityCheck {
    pub union: IntervalClass,
    pub parts: Vec<IntervalClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdditivityRow {
    pub union: String,
    pub measured: f64,
    pub sum_of_parts: f64,
    /// `measured / sum_of_parts`.
    pub ratio: f64,
}

/// One day against morning + afternoon + overnight, the trading day
/// against the partition intervals, and `k` days against `k` single days.
pub fn default_additivity_checks(grid: &DayGrid, partition: &PartitionSpec, multiday: &[usize]) -> Vec<AdditivityCheck> {
    let mut checks = vec![
        AdditivityCheck {
            union: IntervalClass::one_day(),
            parts: vec![
                IntervalClass::morning(grid),
                IntervalClass::afternoon(grid),
                IntervalClass::overnight(),
            ],
        },
        AdditivityCheck {
            union: IntervalClass::trading_day(grid),
            parts: partition.intervals(),
        },
    ];
    checks.extend(multiday.iter().map(|&k| AdditivityCheck {
        union: IntervalClass::multiday(k),
        parts: vec![IntervalClass::one_day(); k],
    }));
    checks
}

/// Calibrates every union directly and compares it with the summed
/// durations of its parts. Parts already fixed by `cal` are not refitted.
pub fn additivity_report(
    series: &PriceSeries,
    cal: &ClockCalibration,
    checks: &[AdditivityCheck],
    cfg: &SearchConfig,
) -> Result<Vec<AdditivityRow>> {
    let mut pending: Vec<&IntervalClass> = Vec::new();
    for class in checks.iter().flat_map(|c| std::iter::once(&c.union).chain(&c.parts)) {
        if cal.lookup(&class.kind).is_none() && !pending.iter().any(|p| p.kind == class.kind) {
            pending.push(class);
        }
    }
    let x_ref = detrended_returns(series, &cal.reference_class)?;
    let fitted = pending
        .par_iter()
        .map(|c| Ok((c.kind.clone(), calibrate_interval(&detrended_returns(series, c)?, &x_ref, cfg)?.delta_tau)))
        .collect::<Result<Vec<_>>>()?;
    let duration = |class: &IntervalClass| {
        cal.lookup(&class.kind)
            .or_else(|| fitted.iter().find(|(k, _)| *k == class.kind).map(|(_, d)| *d))
            .unwrap()
    };
    Ok(checks
        .iter()
        .map(|c| {
            let measured = duration(&c.union);
            let sum_of_parts: f64 = c.parts.iter().map(duration).sum();
            AdditivityRow {
                union: c.union.label.clone(),
                measured,
                sum_of_parts,
                ratio: measured / sum_of_parts,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn partition() -> PartitionSpec {
        PartitionSpec::uniform(&DayGrid::sp500_minute(), 20.0, 20.0).unwrap()
    }

    #[test]
    fn totals_and_validation() {
        let p = partition();
        let cal = ClockCalibration::from_durations(&p, vec![0.05; 19], 0.05).unwrap();
        assert!((cal.day_total() - 1.0).abs() < 1e-12);
        assert!((cal.intraday_total() - 0.95).abs() < 1e-12);
        assert!(cal.intraday_d().is_empty());
        assert_eq!(cal.overnight_d(), None);
        assert!(ClockCalibration::from_durations(&p, vec![0.05; 18], 0.05).is_err());
        assert!(ClockCalibration::from_durations(&p, vec![0.0; 19], 0.05).is_err());
    }

    #[test]
    fn lookup_matches_partition_classes() {
        let p = partition();
        let mut durations = vec![0.05; 19];
        durations[2] = 0.2;
        let cal = ClockCalibration::from_durations(&p, durations, 0.1).unwrap();
        assert_eq!(cal.lookup(&p.interval(3).kind), Some(0.2));
        assert_eq!(cal.lookup(&IntervalClass::overnight().kind), Some(0.1));
        assert_eq!(cal.lookup(&IntervalClass::one_day().kind), Some(1.0));
        assert_eq!(cal.lookup(&IntervalClass::intraday(0, 40).kind), None);
    }

    #[test]
    fn document_keys_are_ordered() {
        let cal = ClockCalibration::from_durations(&partition(), vec![0.05; 19], 0.05).unwrap();
        let json = serde_json::to_string(&cal).unwrap();
        let keys = ["reference_class", "delta_tau_intraday", "delta_tau_night", "d_values", "search_config", "boundary_warnings"];
        let pos: Vec<usize> = keys.iter().map(|k| json.find(&format!("\"{k}\"")).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        let back: ClockCalibration = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cal);
    }
}
