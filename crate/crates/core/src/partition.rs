//! Day partitions and the interval classes that returns are sampled over.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{DayGrid, Error, Result};

/// What a return spans.
///
/// Intraday bounds are bar indices on the [`DayGrid`]; a partition interval
/// `m` of a [`PartitionSpec`] maps to the bars between its boundaries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassKind {
    Intraday { start_bar: usize, end_bar: usize },
    /// Close of one retained day to the open of the next. `nights` restricts
    /// the sample to closures spanning exactly that many calendar days; `None`
    /// merges single nights, weekends and holidays.
    Overnight { nights: Option<u32> },
    /// Open of day `l` to open of day `l + days`.
    Multiday { days: usize, overlapping: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntervalClass {
    pub kind: ClassKind,
    pub label: String,
}

impl IntervalClass {
    pub fn intraday(start_bar: usize, end_bar: usize) -> Self {
        Self {
            kind: ClassKind::Intraday { start_bar, end_bar },
            label: format!("bars {start_bar}-{end_bar}"),
        }
    }

    pub fn overnight() -> Self {
        Self {
            kind: ClassKind::Overnight { nights: None },
            label: "overnights".into(),
        }
    }

    pub fn overnight_spanning(nights: u32) -> Self {
        Self {
            kind: ClassKind::Overnight { nights: Some(nights) },
            label: if nights == 1 {
                "1 night".into()
            } else {
                format!("{nights} nights")
            },
        }
    }

    pub fn multiday(days: usize) -> Self {
        Self {
            kind: ClassKind::Multiday {
                days,
                overlapping: false,
            },
            label: if days == 1 {
                "1 day".into()
            } else {
                format!("{days} days")
            },
        }
    }

    /// Overlapping open-to-open windows. Consecutive returns share
    /// `days - 1` daily increments and are therefore dependent.
    pub fn multiday_overlapping(days: usize) -> Self {
        Self {
            kind: ClassKind::Multiday {
                days,
                overlapping: true,
            },
            label: format!("{days} days (overlapping)"),
        }
    }

    /// The one-day open-to-open reference class.
    pub fn one_day() -> Self {
        Self::multiday(1)
    }

    /// Open to the session midpoint bar.
    pub fn morning(grid: &DayGrid) -> Self {
        Self::intraday(0, grid.close_index() / 2).with_label("morning")
    }

    /// Session midpoint bar to the close.
    pub fn afternoon(grid: &DayGrid) -> Self {
        Self::intraday(grid.close_index() / 2, grid.close_index()).with_label("afternoon")
    }

    /// Open-to-close.
    pub fn trading_day(grid: &DayGrid) -> Self {
        Self::intraday(0, grid.close_index()).with_label("trading day")
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Checks the class against a grid.
    pub fn validate(&self, grid: &DayGrid) -> Result<()> {
        match self.kind {
            ClassKind::Intraday { start_bar, end_bar } => {
                if start_bar >= end_bar || end_bar > grid.close_index() {
                    return Err(Error::Spec(format!(
                        "intraday class {start_bar}..{end_bar} outside grid 0..{}",
                        grid.close_index()
                    )));
                }
            }
            ClassKind::Overnight { nights: Some(0) } => {
                return Err(Error::Spec("overnight span must be at least one night".into()))
            }
            ClassKind::Multiday { days: 0, .. } => {
                return Err(Error::Spec("multiday class needs at least one day".into()))
            }
            _ => {}
        }
        Ok(())
    }
}

impl fmt::Display for IntervalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Intraday partition `{t_m}`, `m = 0..=m_max`, as bar indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSpec {
    boundaries: Vec<usize>,
    min_interval_minutes: f64,
    bar_spacing_secs: u32,
}

impl PartitionSpec {
    /// Boundary 0 must be the open and the last the close. Every interval
    /// must last at least `min_interval_minutes`.
    pub fn new(grid: &DayGrid, boundaries: Vec<usize>, min_interval_minutes: f64) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(Error::Spec("partition needs at least one interval".into()));
        }
        if boundaries[0] != 0 || *boundaries.last().unwrap() != grid.close_index() {
            return Err(Error::Spec(format!(
                "partition must run from bar 0 to the close (bar {})",
                grid.close_index()
            )));
        }
        if !(min_interval_minutes >= 0.0) {
            return Err(Error::Spec("minimum interval must be nonnegative".into()));
        }
        for w in boundaries.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Spec("partition boundaries must increase".into()));
            }
            let minutes = (w[1] - w[0]) as f64 * grid.bar_spacing_minutes();
            if minutes + 1e-9 < min_interval_minutes {
                return Err(Error::Spec(format!(
                    "interval bars {}..{} lasts {minutes} min, below the {min_interval_minutes} min cutoff",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self {
            boundaries,
            min_interval_minutes,
            bar_spacing_secs: grid.bar_spacing_secs(),
        })
    }

    /// Equal intervals of `interval_minutes`, which must tile the session.
    pub fn uniform(grid: &DayGrid, interval_minutes: f64, min_interval_minutes: f64) -> Result<Self> {
        let bars = interval_minutes * 60.0 / grid.bar_spacing_secs() as f64;
        if bars < 1.0 || bars.fract() != 0.0 {
            return Err(Error::Spec(format!(
                "{interval_minutes} min is not a whole number of bars"
            )));
        }
        let bars = bars as usize;
        if !grid.close_index().is_multiple_of(bars) {
            return Err(Error::Spec(format!(
                "{interval_minutes} min intervals do not tile the {} min session",
                grid.session_secs() / 60
            )));
        }
        let boundaries = (0..=grid.close_index()).step_by(bars).collect();
        Self::new(grid, boundaries, min_interval_minutes)
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn m_max(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn min_interval_minutes(&self) -> f64 {
        self.min_interval_minutes
    }

    /// Shortest interval, in bars.
    pub fn min_interval_bars(&self) -> usize {
        self.boundaries.windows(2).map(|w| w[1] - w[0]).min().unwrap()
    }

    /// Interval `m` (1-based, `1..=m_max`), from boundary `m - 1` to `m`.
    pub fn interval(&self, m: usize) -> IntervalClass {
        assert!((1..=self.m_max()).contains(&m), "interval index {m} outside 1..={}", self.m_max());
        IntervalClass::intraday(self.boundaries[m - 1], self.boundaries[m]).with_label(format!("m={m}"))
    }

    pub fn intervals(&self) -> Vec<IntervalClass> {
        (1..=self.m_max()).map(|m| self.interval(m)).collect()
    }

    pub(crate) fn bar_spacing_secs(&self) -> u32 {
        self.bar_spacing_secs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_minute_partition_of_sp500_day() {
        let g = DayGrid::sp500_minute();
        let p = PartitionSpec::uniform(&g, 20.0, 20.0).unwrap();
        assert_eq!(p.m_max(), 19);
        assert_eq!(p.boundaries()[0], 0);
        assert_eq!(*p.boundaries().last().unwrap(), 380);
        assert_eq!(p.interval(1).kind, ClassKind::Intraday { start_bar: 0, end_bar: 20 });
        assert_eq!(p.interval(19).kind, ClassKind::Intraday { start_bar: 360, end_bar: 380 });
    }

    #[test]
    fn below_cutoff_rejected() {
        let g = DayGrid::sp500_minute();
        assert!(matches!(PartitionSpec::uniform(&g, 10.0, 20.0), Err(Error::Spec(_))));
        assert!(PartitionSpec::uniform(&g, 10.0, 10.0).is_ok());
        assert!(PartitionSpec::new(&g, vec![0, 20, 25, 380], 20.0).is_err());
    }

    #[test]
    fn partition_must_span_session() {
        let g = DayGrid::sp500_minute();
        assert!(PartitionSpec::new(&g, vec![0, 200], 20.0).is_err());
        assert!(PartitionSpec::new(&g, vec![5, 380], 20.0).is_err());
        assert!(PartitionSpec::new(&g, vec![0, 200, 200, 380], 0.0).is_err());
        assert!(PartitionSpec::uniform(&g, 23.0, 20.0).is_err());
    }

    #[test]
    fn class_validation() {
        let g = DayGrid::sp500_minute();
        assert!(IntervalClass::intraday(0, 380).validate(&g).is_ok());
        assert!(IntervalClass::intraday(0, 381).validate(&g).is_err());
        assert!(IntervalClass::intraday(5, 5).validate(&g).is_err());
        assert!(IntervalClass::multiday(0).validate(&g).is_err());
        assert!(IntervalClass::overnight_spanning(0).validate(&g).is_err());
    }
}
