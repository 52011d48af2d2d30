use std::io::Write;

use anyhow::{bail, Result};
use fst_core::ks::ks_distance;
use fst_core::moment_clock::compare_clocks;
use fst_core::returns::detrended_returns;
use fst_core::{IntervalClass, ReturnSample};

use super::analyze::load_calibration;
use super::calibrate::clock_options;
use super::tables::average;
use super::{load_series, read_text, table_groups, Run};

pub const TABLE3: &str = "table3.csv";
pub const TABLE1: &str = "table1.csv";

pub(super) fn run_compare(run: &mut Run) -> Result<()> {
    let cfg = run.cfg;
    let (series, _) = load_series(cfg)?;
    run.inputs.push(cfg.require_input()?.to_path_buf());
    let mut opts = clock_options(cfg);
    let mut search = cfg.search;
    if let Some(path) = &cfg.calibration {
        let cal = load_calibration(path)?;
        opts.reference = cal.reference_class;
        opts.overnight = cal.overnight_class;
        search = cal.search_config;
        run.inputs.push(path.clone());
    }
    let orders = &cfg.compare.orders;
    if orders.is_empty() {
        bail!("compare-clocks needs at least one moment order");
    }
    let x_ref = detrended_returns(&series, &opts.reference)?;
    let groups = table_groups(series.grid(), &opts.overnight, &cfg.clock.multiday, series.n_days());

    let mut lines = Vec::new();
    for g in &groups {
        let classes = g
            .members
            .iter()
            .map(|c| Ok((c.label.clone(), detrended_returns(&series, c)?)))
            .collect::<Result<Vec<_>>>()?;
        let rows = compare_clocks(&classes, &x_ref, orders, &search)?;
        let optimal = rows.iter().all(|r| r.fst_is_optimal());
        if !optimal {
            run.warnings.push(format!(
                "class {}: a moment clock reaches a lower D than the KS minimizer (moment duration outside the search range?)",
                g.label
            ));
        }
        let mut line = format!(
            "{},{},{}",
            g.label,
            average(rows.iter().map(|r| r.fst_delta_tau)),
            average(rows.iter().map(|r| r.fst_d))
        );
        for i in 0..orders.len() {
            line.push_str(&format!(
                ",{},{}",
                average(rows.iter().map(|r| r.moment[i].delta_tau_q)),
                average(rows.iter().map(|r| r.moment[i].d_under_moment_rescaling))
            ));
        }
        line.push_str(&format!(",{optimal}"));
        lines.push(line);
    }

    run.out.write(TABLE3, |w| {
        write!(w, "class,fst_dtau,fst_D")?;
        for q in orders {
            write!(w, ",q{q}_dtau,q{q}_D")?;
        }
        writeln!(w, ",fst_optimal")?;
        for l in &lines {
            writeln!(w, "{l}")?;
        }
        Ok(())
    })?;
    Ok(())
}

pub(super) fn summary_compare(run: &Run) -> Result<String> {
    read_text(&run.output(TABLE3))
}

pub(super) fn run_pairwise(run: &mut Run) -> Result<()> {
    let cfg = run.cfg;
    let (series, _) = load_series(cfg)?;
    run.inputs.push(cfg.require_input()?.to_path_buf());
    let grid = *series.grid();
    let partition = cfg.partition_spec(&grid)?;
    let first = partition.interval(1);
    let first_minutes = partition.boundaries()[1] as f64 * grid.bar_spacing_minutes();
    let candidates = [
        first.with_label(format!("first {first_minutes} min")),
        IntervalClass::overnight_spanning(1),
        IntervalClass::overnight_spanning(3),
        IntervalClass::morning(&grid),
        IntervalClass::afternoon(&grid),
        IntervalClass::trading_day(&grid),
        IntervalClass::one_day(),
        IntervalClass::multiday(2),
    ];
    let mut samples: Vec<ReturnSample> = Vec::new();
    for class in &candidates {
        match detrended_returns(&series, class) {
            Ok(s) => samples.push(s),
            Err(fst_core::Error::Spec(msg)) => run.warnings.push(format!("class {class} skipped: {msg}")),
            Err(e) => return Err(e.into()),
        }
    }
    if samples.len() < 2 {
        bail!("pairwise D needs at least two classes with admissible returns");
    }
    let n = samples.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            d[i][j] = ks_distance(&samples[i], &samples[j]).d;
            d[j][i] = d[i][j];
        }
    }
    run.out.write(TABLE1, |w| {
        write!(w, "class")?;
        for s in &samples {
            write!(w, ",{}", s.class().label)?;
        }
        writeln!(w)?;
        for (s, row) in samples.iter().zip(&d) {
            write!(w, "{}", s.class().label)?;
            for v in row {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    })?;
    Ok(())
}

pub(super) fn summary_pairwise(run: &Run) -> Result<String> {
    read_text(&run.output(TABLE1))
}
