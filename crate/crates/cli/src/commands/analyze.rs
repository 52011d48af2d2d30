use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use fst_core::analysis::resample::fst_session_paths;
use fst_core::analysis::{
    hurst_slopes, intraday_volatility_profile, linear_correlation_contiguous, moment_curve, pdf_collapse_export,
    volatility_autocorrelation, window_samples, ClockMode, ClockTag,
};
use fst_core::clock::{assemble_time_map, ClockCalibration, TimeMap};
use fst_core::{IntervalClass, PriceSeries, ReturnSample};

use super::calibrate::check_gate;
use super::{load_series, read_text, Run};

pub const CONTIGUOUS: &str = "contiguous_correlation.csv";

fn hurst_name(clock: ClockTag) -> String {
    format!("hurst_{clock}.csv")
}

pub(super) fn load_calibration(path: &Path) -> Result<ClockCalibration> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading calibration {}", path.display()))?;
    let cal: ClockCalibration =
        serde_json::from_str(&text).with_context(|| format!("parsing calibration {}", path.display()))?;
    cal.validate()?;
    Ok(cal)
}

/// Non-overlapping windows of `steps` lattice steps inside each path,
/// centred on their pooled mean.
fn block_samples(paths: &[Vec<f64>], steps: &[usize], step_duration: f64) -> Result<Vec<(f64, ReturnSample)>> {
    steps
        .iter()
        .map(|&s| {
            let mut values: Vec<f64> = paths
                .iter()
                .flat_map(|p| (0..(p.len() - 1) / s.max(1)).map(move |j| p[(j + 1) * s] - p[j * s]))
                .collect();
            if s == 0 || values.is_empty() {
                bail!("collapse span of {s} steps does not fit in a session");
            }
            let m = values.iter().sum::<f64>() / values.len() as f64;
            values.iter_mut().for_each(|v| *v -= m);
            let duration = s as f64 * step_duration;
            let class = IntervalClass::intraday(0, s).with_label(format!("block {duration}"));
            Ok((duration, ReturnSample::new(values, class)?))
        })
        .collect()
}

fn analyze_clock(run: &mut Run, series: &PriceSeries, clock: ClockMode<'_>) -> Result<()> {
    let a = &run.cfg.analysis;
    let grid = series.grid();
    let tag = clock.tag();
    let (paths, step, fit_ranges) = match clock {
        ClockMode::Physical => (
            series.days().iter().map(|d| d.log_prices.clone()).collect::<Vec<_>>(),
            grid.bar_spacing_minutes(),
            &a.fit_ranges_physical,
        ),
        ClockMode::Fst(tm) => {
            let steps = a.fst_steps.unwrap_or(grid.close_index());
            (fst_session_paths(series, tm, steps)?, tm.intraday_total() / steps as f64, &a.fit_ranges_fst)
        }
    };
    if fit_ranges.is_empty() {
        bail!("no Hurst fit range for the {tag} clock: pass --fit-range-{tag} lo:hi or set analysis.fit_ranges_{tag}");
    }

    let windows = window_samples(&paths, &a.window_steps, step)?;
    let table = moment_curve(&windows, &a.orders, tag)?;
    let spectra = fit_ranges
        .iter()
        .map(|&r| hurst_slopes(&table, r))
        .collect::<fst_core::Result<Vec<_>>>()?;
    for s in &spectra {
        run.warnings.extend(s.warnings.iter().map(|w| format!("{tag} Hurst fit: {w}")));
    }

    let blocks = block_samples(&paths, &a.collapse_steps, step)?;
    let collapse = pdf_collapse_export(&blocks, a.collapse_hurst, a.collapse_bins)?;

    let partition = run.cfg.partition_spec(grid)?;
    let profile = intraday_volatility_profile(series, &partition, clock)?;
    let span = match clock {
        ClockMode::Physical => a.volatility_span_bars as f64,
        ClockMode::Fst(_) => a.volatility_span_fst,
    };
    let autocorr = volatility_autocorrelation(series, clock, span, &a.lags, a.estimator)?;
    run.warnings.extend(autocorr.warnings.iter().map(|w| format!("{tag} autocorrelation: {w}")));

    run.out.write(&format!("moments_{tag}.csv"), |w| Ok(table.write_csv(w)?))?;
    run.out.write(&hurst_name(tag), |w| {
        for (i, s) in spectra.iter().enumerate() {
            let mut buf = Vec::new();
            s.write_csv(&mut buf)?;
            let text = String::from_utf8(buf)?;
            // One header for all fit ranges.
            let body = if i == 0 { &text[..] } else { text.split_once('\n').map_or("", |(_, b)| b) };
            w.write_all(body.as_bytes())?;
        }
        Ok(())
    })?;
    run.out.write(&format!("collapse_density_{tag}.csv"), |w| Ok(collapse.write_density_csv(w)?))?;
    run.out.write(&format!("collapse_values_{tag}.csv"), |w| Ok(collapse.write_values_csv(w)?))?;
    run.out.write(&format!("volatility_{tag}.csv"), |w| Ok(profile.write_csv(w)?))?;
    run.out.write(&format!("vol_autocorr_{tag}.csv"), |w| Ok(autocorr.write_csv(w)?))?;
    Ok(())
}

pub(super) fn run(run: &mut Run) -> Result<()> {
    let cfg = run.cfg;
    let (series, _) = load_series(cfg)?;
    run.inputs.push(cfg.require_input()?.to_path_buf());
    let mut clocks = cfg.analysis.clocks.clone();
    clocks.dedup();
    if clocks.is_empty() {
        bail!("no clock selected for the analysis");
    }

    let time_map: Option<TimeMap> = if clocks.contains(&ClockTag::Fst) {
        let path = cfg.calibration.as_ref().ok_or_else(|| {
            anyhow!("FST analyses need calibration.json from `fst calibrate`: pass --calibration <path> or set \"calibration\"")
        })?;
        let cal = load_calibration(path)?;
        run.inputs.push(path.clone());
        Some(assemble_time_map(&cal, series.grid(), &series.dates())?)
    } else {
        None
    };
    for tag in &clocks {
        let mode = match tag {
            ClockTag::Physical => ClockMode::Physical,
            ClockTag::Fst => ClockMode::Fst(time_map.as_ref().unwrap()),
        };
        analyze_clock(run, &series, mode)?;
    }

    let grid = *series.grid();
    let close = grid.close_index();
    let contiguous = cfg
        .analysis
        .contiguous_spans_bars
        .iter()
        .filter(|&&k| k >= 1 && 2 * k <= close)
        .map(|&k| linear_correlation_contiguous(&series, k))
        .collect::<fst_core::Result<Vec<_>>>()?;
    let span = cfg.partition_spec(&grid)?.min_interval_bars();
    check_gate(run, &series, span)?;
    run.out.write(CONTIGUOUS, |w| {
        writeln!(w, "span_bars,span_minutes,corr,n_days")?;
        for c in &contiguous {
            writeln!(w, "{},{},{},{}", c.span_bars, c.span_bars as f64 * grid.bar_spacing_minutes(), c.value, c.n_days)?;
        }
        Ok(())
    })?;
    Ok(())
}

pub(super) fn summary(run: &Run) -> Result<String> {
    let mut s = String::new();
    for tag in &run.cfg.analysis.clocks {
        let path = run.output(&hurst_name(*tag));
        if path.exists() {
            s.push_str(&format!("Hurst spectrum ({tag} clock)\n"));
            s.push_str(&read_text(&path)?);
            s.push('\n');
        }
    }
    s.push_str("contiguous-return correlation\n");
    s.push_str(&read_text(&run.output(CONTIGUOUS))?);
    Ok(s)
}
