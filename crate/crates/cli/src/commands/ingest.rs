use anyhow::Result;
use fst_core::series::write_cache;

use super::{load_series, read_text, IngestSummary, Run};

pub const CACHE: &str = "series.cache.csv";
pub const REPORT: &str = "ingest_report.json";

pub(super) fn run(run: &mut Run) -> Result<()> {
    let (series, summary) = load_series(run.cfg)?;
    run.inputs.push(run.cfg.require_input()?.to_path_buf());
    let summary = summary.unwrap_or_else(|| IngestSummary {
        source: run.cfg.require_input().map(|p| p.display().to_string()).unwrap_or_default(),
        off_session_rows: 0,
        days_read: series.n_days(),
        days_retained: series.n_days(),
        days_dropped: 0,
        days_repaired: 0,
        first_date: series.days()[0].date.to_string(),
        last_date: series.days().last().unwrap().date.to_string(),
    });
    if summary.days_repaired > 0 {
        run.warnings.push(format!(
            "{} days had missing bars filled with the previous price",
            summary.days_repaired
        ));
    }
    run.out.write(CACHE, |w| Ok(write_cache(&series, w)?))?;
    run.out.write_json(REPORT, &summary)?;
    Ok(())
}

pub(super) fn summary(run: &Run) -> Result<String> {
    let r: serde_json::Value = serde_json::from_str(&read_text(&run.output(REPORT))?)?;
    Ok(format!(
        "read {} days from {}: {} retained, {} dropped, {} repaired, {} off-session rows skipped ({} to {})\n",
        r["days_read"],
        r["source"].as_str().unwrap_or_default(),
        r["days_retained"],
        r["days_dropped"],
        r["days_repaired"],
        r["off_session_rows"],
        r["first_date"].as_str().unwrap_or_default(),
        r["last_date"].as_str().unwrap_or_default()
    ))
}
