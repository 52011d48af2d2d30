//! Subcommand implementations. Each writes its files, then the manifest,
//! and builds its stdout summary by reading the files back.

mod analyze;
mod calibrate;
mod compare;
mod ingest;
mod synth;
mod tables;

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fst_core::series::{filter_complete_days, ingest_csv, is_cache_preamble, read_cache};
use fst_core::PriceSeries;
use serde::Serialize;

use crate::args::CommandKind;
use crate::config::RunConfig;
use crate::output::{write_manifest, Outputs};

pub use tables::{table_groups, ClassGroup};

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub files: Vec<String>,
    pub warnings: Vec<String>,
    pub summary: String,
}

impl RunReport {
    /// Process exit code: nonzero under `strict` when warnings were raised.
    pub fn exit_code(&self, strict: bool) -> i32 {
        if strict && !self.warnings.is_empty() {
            2
        } else {
            0
        }
    }
}

/// Closure counts from reading a price CSV.
#[derive(Debug, Clone, Serialize)]
pub struct IngestSummary {
    pub source: String,
    pub off_session_rows: usize,
    pub days_read: usize,
    pub days_retained: usize,
    pub days_dropped: usize,
    pub days_repaired: usize,
    pub first_date: String,
    pub last_date: String,
}

/// Reads a series cache or a price CSV (filtered for completeness).
pub(crate) fn load_series(cfg: &RunConfig) -> Result<(PriceSeries, Option<IngestSummary>)> {
    let path = cfg.require_input()?;
    let open = || File::open(path).with_context(|| format!("opening input {}", path.display()));
    let mut first = String::new();
    BufReader::new(open()?).read_line(&mut first)?;
    if is_cache_preamble(&first) {
        let series = read_cache(BufReader::new(open()?)).with_context(|| format!("reading cache {}", path.display()))?;
        return Ok((series, None));
    }
    let grid = cfg.day_grid()?;
    let ingested = ingest_csv(BufReader::new(open()?), &grid).with_context(|| format!("ingesting {}", path.display()))?;
    let days_read = ingested.series.n_days();
    let filtered = filter_complete_days(ingested.series, cfg.ingest.max_missing_bars)?;
    let s = &filtered.series;
    let summary = IngestSummary {
        source: path.display().to_string(),
        off_session_rows: ingested.off_session_rows,
        days_read,
        days_retained: s.n_days(),
        days_dropped: filtered.dropped.len(),
        days_repaired: filtered.repaired.len(),
        first_date: s.days()[0].date.to_string(),
        last_date: s.days().last().unwrap().date.to_string(),
    };
    Ok((filtered.series, Some(summary)))
}

/// Context handed to each command.
pub(crate) struct Run<'a> {
    pub cfg: &'a RunConfig,
    pub out: Outputs,
    pub inputs: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

impl Run<'_> {
    fn output(&self, name: &str) -> PathBuf {
        self.out.path(name)
    }
}

pub fn execute(kind: CommandKind, cfg: &RunConfig) -> Result<RunReport> {
    let mut run = Run {
        cfg,
        out: Outputs::create(&cfg.output_dir)?,
        inputs: Vec::new(),
        warnings: Vec::new(),
    };
    let summary_of: fn(&Run) -> Result<String> = match kind {
        CommandKind::Synth => {
            synth::run(&mut run)?;
            synth::summary
        }
        CommandKind::Ingest => {
            ingest::run(&mut run)?;
            ingest::summary
        }
        CommandKind::Calibrate => {
            calibrate::run(&mut run)?;
            calibrate::summary
        }
        CommandKind::Analyze => {
            analyze::run(&mut run)?;
            analyze::summary
        }
        CommandKind::CompareClocks => {
            compare::run_compare(&mut run)?;
            compare::summary_compare
        }
        CommandKind::PairwiseD => {
            compare::run_pairwise(&mut run)?;
            compare::summary_pairwise
        }
    };
    write_manifest(&mut run.out, kind.name(), cfg, &run.inputs, &run.warnings)?;
    let summary = summary_of(&run)?;
    Ok(RunReport {
        output_dir: cfg.output_dir.clone(),
        files: run.out.names().to_vec(),
        warnings: run.warnings,
        summary,
    })
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading back {}", path.display()))
}
