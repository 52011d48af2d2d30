use std::io::Write;

use anyhow::{Context, Result};
use fst_core::analysis::{correlation_gate, linear_correlation_contiguous};
use fst_core::clock::{
    additivity_report, assemble_time_map, calibrate_clock_with, calibrate_interval, default_additivity_checks,
    ClockCalibration, ClockOptions,
};
use fst_core::returns::detrended_returns;
use fst_core::{IntervalClass, PriceSeries};
use rayon::prelude::*;

use super::tables::average;
use super::{load_series, read_text, table_groups, Run};
use crate::config::RunConfig;

pub const CALIBRATION: &str = "calibration.json";
pub const TIME_MAP: &str = "time_map.csv";
pub const TABLE2: &str = "table2.csv";
pub const ADDITIVITY: &str = "additivity.csv";
pub const GATE: &str = "correlation_gate.csv";

pub(super) fn clock_options(cfg: &RunConfig) -> ClockOptions {
    ClockOptions {
        reference: IntervalClass::multiday(cfg.clock.reference_days),
        overnight: match cfg.clock.overnight_nights {
            Some(k) => IntervalClass::overnight_spanning(k),
            None => IntervalClass::overnight(),
        },
    }
}

/// Gate on the contiguous-return correlation at the partition scale.
pub(super) fn check_gate(run: &mut Run, series: &PriceSeries, span_bars: usize) -> Result<(f64, bool)> {
    let c = linear_correlation_contiguous(series, span_bars)?;
    let warning = correlation_gate(&c, run.cfg.clock.correlation_threshold, series.grid().bar_spacing_minutes());
    let violated = warning.is_some();
    run.warnings.extend(warning);
    Ok((c.value, violated))
}

struct Row {
    label: String,
    n: usize,
    dtau: f64,
    d: f64,
}

pub(super) fn run(run: &mut Run) -> Result<()> {
    let cfg = run.cfg;
    let (series, _) = load_series(cfg)?;
    run.inputs.push(cfg.require_input()?.to_path_buf());
    let grid = *series.grid();
    let partition = cfg.partition_spec(&grid)?;
    let opts = clock_options(cfg);
    let cal = calibrate_clock_with(&series, &partition, &cfg.search, &opts).context("calibrating the clock")?;
    run.warnings.extend(cal.boundary_warnings.iter().cloned());
    let tm = assemble_time_map(&cal, &grid, &series.dates())?;

    let x_ref = detrended_returns(&series, &opts.reference)?;
    let groups = table_groups(&grid, &opts.overnight, &cfg.clock.multiday, series.n_days());
    let rows = groups
        .par_iter()
        .map(|g| {
            let fits = g
                .members
                .iter()
                .map(|c| {
                    let y = detrended_returns(&series, c)?;
                    Ok((y.n(), calibrate_interval(&y, &x_ref, &cfg.search)?))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Row {
                label: g.label.clone(),
                n: fits[0].0,
                dtau: average(fits.iter().map(|(_, f)| f.delta_tau)),
                d: average(fits.iter().map(|(_, f)| f.ks.d)),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let multiday: Vec<usize> = cfg.clock.multiday.iter().copied().filter(|&k| k < series.n_days()).collect();
    let checks = default_additivity_checks(&grid, &partition, &multiday);
    let additivity = additivity_report(&series, &cal, &checks, &cfg.search)?;

    let span = partition.min_interval_bars();
    let (corr, violated) = check_gate(run, &series, span)?;

    run.out.write_json(CALIBRATION, &cal)?;
    run.out.write(TIME_MAP, |w| Ok(tm.write_csv(w)?))?;
    run.out.write(TABLE2, |w| {
        writeln!(w, "class,n,dtau,D")?;
        for r in &rows {
            writeln!(w, "{},{},{},{}", r.label, r.n, r.dtau, r.d)?;
        }
        Ok(())
    })?;
    run.out.write(ADDITIVITY, |w| {
        writeln!(w, "union,measured,sum_of_parts,ratio")?;
        for r in &additivity {
            writeln!(w, "{},{},{},{}", r.union, r.measured, r.sum_of_parts, r.ratio)?;
        }
        Ok(())
    })?;
    run.out.write(GATE, |w| {
        writeln!(w, "span_bars,span_minutes,corr,threshold,violation")?;
        writeln!(
            w,
            "{span},{},{corr},{},{violated}",
            span as f64 * grid.bar_spacing_minutes(),
            cfg.clock.correlation_threshold
        )?;
        Ok(())
    })?;
    Ok(())
}

pub(super) fn summary(run: &Run) -> Result<String> {
    let cal: ClockCalibration = serde_json::from_str(&read_text(&run.output(CALIBRATION))?)?;
    let mut s = format!(
        "calibrated {} intervals: trading day {:.4} fst, overnight {:.4} fst, day total {:.4} fst\n\n",
        cal.m_max(),
        cal.intraday_total(),
        cal.overnight_duration,
        cal.day_total()
    );
    s.push_str(&read_text(&run.output(TABLE2))?);
    s.push('\n');
    s.push_str(&read_text(&run.output(ADDITIVITY))?);
    Ok(s)
}
