use std::io::Write;

use anyhow::Result;
use fst_core::clock::ClockCalibration;
use fst_core::synthetic::{generate, ActivityProfile, GeneratorConfig, GeneratorMode, GroundTruth};
use serde::{Deserialize, Serialize};

use super::{read_text, Run};
use crate::config::{ProfileKind, SynthMode};

pub const PRICES: &str = "prices.csv";
pub const GROUND_TRUTH: &str = "ground_truth.json";

/// The generator settings and the clock the series was built on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruthDoc {
    pub generator: GeneratorConfig,
    pub bar_durations: Vec<f64>,
    pub overnight_duration: f64,
    pub clock: ClockCalibration,
    pub day_total: f64,
}

pub(super) fn run(run: &mut Run) -> Result<()> {
    let cfg = run.cfg;
    let s = &cfg.synth;
    let grid = cfg.day_grid()?;
    let partition = cfg.partition_spec(&grid)?;
    let profile = match s.profile {
        ProfileKind::Flat => ActivityProfile::from_shape(&grid, |_| 1.0, s.overnight_share, s.daily_variance)?,
        ProfileKind::UShape => ActivityProfile::u_shape_scaled(&grid, s.amplitude, s.overnight_share, s.daily_variance)?,
    };
    let generator = GeneratorConfig {
        n_days: s.n_days,
        seed: cfg.seed,
        innovation: s.innovation,
        mode: match s.mode {
            SynthMode::Seasonal => GeneratorMode::Seasonal,
            SynthMode::Multifractal => GeneratorMode::Multifractal {
                depth: s.depth,
                lambda2: s.lambda2,
            },
        },
        ar_coefficient: s.ar_coefficient,
        drift_per_bar: s.drift_per_bar,
        start_date: s.start_date,
    };
    let (series, truth) = generate(&profile, &generator, &grid)?;

    run.out.write(PRICES, |w| {
        writeln!(w, "timestamp,price")?;
        for day in series.days() {
            for (i, lp) in day.log_prices.iter().enumerate() {
                writeln!(w, "{},{}", grid.bar_datetime(day.date, i).format("%Y-%m-%d %H:%M:%S"), lp.exp())?;
            }
        }
        Ok(())
    })?;
    let clock = truth.clock(&partition)?;
    let GroundTruth {
        bar_durations,
        overnight_duration,
    } = truth;
    let doc = GroundTruthDoc {
        generator,
        bar_durations,
        overnight_duration,
        day_total: clock.day_total(),
        clock,
    };
    run.out.write_json(GROUND_TRUTH, &doc)?;
    Ok(())
}

pub(super) fn summary(run: &Run) -> Result<String> {
    let doc: GroundTruthDoc = serde_json::from_str(&read_text(&run.output(GROUND_TRUTH))?)?;
    let rows = read_text(&run.output(PRICES))?.lines().count() - 1;
    let c = &doc.clock;
    Ok(format!(
        "synthetic series: {} days, {rows} price rows, seed {}\nground-truth clock: {} intervals, trading day {:.4} fst, overnight {:.4} fst\n",
        doc.generator.n_days,
        doc.generator.seed,
        c.m_max(),
        c.intraday_total(),
        c.overnight_duration
    ))
}
