use std::io::Write;

use chrono::{Duration, NaiveDate, NaiveDateTime};
use serde::Serialize;

use super::ClockCalibration;
use crate::{DayGrid, Error, Result};

/// Partition point `m` of day `l` and its FST coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Anchor {
    pub l: usize,
    pub m: usize,
    pub t: NaiveDateTime,
    pub tau: f64,
}

/// Piecewise-linear map between physical instants and FST.
///
/// Anchors sit at `tau_{l,m} = sum_{n<=m} dtau_n + l * day_total`. Between
/// anchors the map is linear in physical time, the overnight closure
/// included. The mapped range runs from the first open to the last close.
#[derive(Debug, Clone)]
pub struct TimeMap {
    anchors: Vec<Anchor>,
    boundaries: Vec<usize>,
    prefix: Vec<f64>,
    day_total: f64,
}

pub fn assemble_time_map(cal: &ClockCalibration, grid: &DayGrid, dates: &[NaiveDate]) -> Result<TimeMap> {
    cal.validate()?;
    if dates.is_empty() {
        return Err(Error::Spec("time map needs at least one day".into()));
    }
    if dates.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Spec("time map dates must increase strictly".into()));
    }
    let boundaries = cal.partition_boundaries.clone();
    if *boundaries.last().unwrap() != grid.close_index() {
        return Err(Error::Spec("calibration partition does not match the day grid".into()));
    }
    let mut prefix = Vec::with_capacity(boundaries.len());
    prefix.push(0.0);
    for d in &cal.intraday_durations {
        prefix.push(prefix.last().unwrap() + d);
    }
    let day_total = cal.day_total();
    let anchors = dates
        .iter()
        .enumerate()
        .flat_map(|(l, &date)| {
            let prefix = &prefix;
            boundaries.iter().enumerate().map(move |(m, &bar)| Anchor {
                l,
                m,
                t: grid.bar_datetime(date, bar),
                tau: prefix[m] + l as f64 * day_total,
            })
        })
        .collect();
    Ok(TimeMap {
        anchors,
        boundaries,
        prefix,
        day_total,
    })
}

fn span_nanos(a: NaiveDateTime, b: NaiveDateTime) -> f64 {
    (b - a).num_nanoseconds().expect("time span overflows i64 nanoseconds") as f64
}

impl TimeMap {
    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn day_total(&self) -> f64 {
        self.day_total
    }

    pub fn n_days(&self) -> usize {
        self.anchors.last().unwrap().l + 1
    }

    pub fn intraday_total(&self) -> f64 {
        *self.prefix.last().unwrap()
    }

    /// `(first open, last close)` in FST.
    pub fn tau_range(&self) -> (f64, f64) {
        (self.anchors[0].tau, self.anchors.last().unwrap().tau)
    }

    pub fn map_time(&self, t: NaiveDateTime) -> Result<f64> {
        let (first, last) = (self.anchors[0].t, self.anchors.last().unwrap().t);
        if t < first || t > last {
            return Err(Error::Range(format!("{t} outside the mapped range {first} .. {last}")));
        }
        let i = self.anchors.partition_point(|a| a.t <= t);
        let a = self.anchors[i - 1];
        if a.t == t {
            return Ok(a.tau);
        }
        let b = self.anchors[i];
        let frac = span_nanos(a.t, t) / span_nanos(a.t, b.t);
        Ok(a.tau + frac * (b.tau - a.tau))
    }

    pub fn map_tau(&self, tau: f64) -> Result<NaiveDateTime> {
        let (lo, hi) = self.tau_range();
        if !(tau >= lo && tau <= hi) {
            return Err(Error::Range(format!("tau={tau} outside the mapped range [{lo}, {hi}]")));
        }
        let i = self.anchors.partition_point(|a| a.tau <= tau);
        let a = self.anchors[i - 1];
        if a.tau == tau {
            return Ok(a.t);
        }
        let b = self.anchors[i];
        let frac = (tau - a.tau) / (b.tau - a.tau);
        let offset = (frac * span_nanos(a.t, b.t)).round() as i64;
        Ok(a.t + Duration::nanoseconds(offset))
    }

    /// FST elapsed since the open at a fractional bar position of any day.
    pub fn intraday_tau(&self, bar: f64) -> f64 {
        let m = self
            .boundaries
            .partition_point(|&b| (b as f64) < bar)
            .clamp(1, self.boundaries.len() - 1);
        let (b0, b1) = (self.boundaries[m - 1] as f64, self.boundaries[m] as f64);
        self.prefix[m - 1] + (bar - b0) / (b1 - b0) * (self.prefix[m] - self.prefix[m - 1])
    }

    /// Inverse of [`Self::intraday_tau`] for `u` in `[0, intraday_total]`.
    pub fn intraday_bar(&self, u: f64) -> f64 {
        let m = self.prefix.partition_point(|&p| p < u).clamp(1, self.prefix.len() - 1);
        let (p0, p1) = (self.prefix[m - 1], self.prefix[m]);
        let (b0, b1) = (self.boundaries[m - 1] as f64, self.boundaries[m] as f64);
        b0 + (u - p0) / (p1 - p0) * (b1 - b0)
    }

    /// FST coordinate of a bar of day `l`.
    pub fn bar_tau(&self, l: usize, bar: f64) -> f64 {
        l as f64 * self.day_total + self.intraday_tau(bar)
    }

    /// CSV with header `l,m,t_iso,tau_fst`, one row per anchor.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "l,m,t_iso,tau_fst")?;
        for a in &self.anchors {
            writeln!(out, "{},{},{},{}", a.l, a.m, a.t.format("%Y-%m-%dT%H:%M:%S"), a.tau)?;
        }
        Ok(())
    }
}
