//! Trading-day grids and per-day log-price series.
//!
//! A [`PriceSeries`] holds one [`TradingDay`] per calendar date, each with a
//! log-price slot for every bar of the shared [`DayGrid`]. Missing bars are
//! stored as NaN until [`filter_complete_days`] drops or repairs the day.
//!
//! The cache format written by [`write_cache`] is plain CSV with a one-line
//! metadata preamble:
//!
//! ```text
//! #fst-series v1,open=09:40:00,bar_spacing_s=60,n_points=381
//! date,bar,log_price
//! 1985-09-30,0,5.2311086168...
//! ```
//!
//! Values are written with the shortest representation that parses back to
//! the same `f64`, so the round trip is lossless.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};

use chrono::{NaiveDate, NaiveDateTime, NaiveTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const SECS_PER_DAY: u32 = 86_400;
const CACHE_MAGIC: &str = "#fst-series v1";

/// The bar layout shared by every trading day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayGrid {
    open_time: NaiveTime,
    bar_spacing_secs: u32,
    n_points: usize,
}

impl DayGrid {
    pub fn new(open_time: NaiveTime, bar_spacing_secs: u32, n_points: usize) -> Result<Self> {
        if bar_spacing_secs == 0 {
            return Err(Error::Config("bar spacing must be positive".into()));
        }
        if n_points < 2 {
            return Err(Error::Config("a day grid needs at least two bars".into()));
        }
        let session = (n_points as u64 - 1) * bar_spacing_secs as u64;
        if open_time.num_seconds_from_midnight() as u64 + session >= SECS_PER_DAY as u64 {
            return Err(Error::Config("session close falls past midnight".into()));
        }
        Ok(Self {
            open_time,
            bar_spacing_secs,
            n_points,
        })
    }

    /// 09:40 to 16:00 at one-minute spacing: 381 index values per day.
    pub fn sp500_minute() -> Self {
        Self {
            open_time: NaiveTime::from_hms_opt(9, 40, 0).unwrap(),
            bar_spacing_secs: 60,
            n_points: 381,
        }
    }

    pub fn open_time(&self) -> NaiveTime {
        self.open_time
    }

    pub fn bar_spacing_secs(&self) -> u32 {
        self.bar_spacing_secs
    }

    pub fn bar_spacing_minutes(&self) -> f64 {
        self.bar_spacing_secs as f64 / 60.0
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn close_index(&self) -> usize {
        self.n_points - 1
    }

    pub fn session_secs(&self) -> u32 {
        (self.n_points as u32 - 1) * self.bar_spacing_secs
    }

    pub fn close_time(&self) -> NaiveTime {
        self.bar_time(self.close_index())
    }

    pub fn bar_time(&self, index: usize) -> NaiveTime {
        let secs = self.open_time.num_seconds_from_midnight() + index as u32 * self.bar_spacing_secs;
        NaiveTime::from_num_seconds_from_midnight_opt(secs, 0).unwrap()
    }

    pub fn bar_datetime(&self, date: NaiveDate, index: usize) -> NaiveDateTime {
        date.and_time(self.bar_time(index))
    }

    /// Locates a wall-clock time on the grid.
    pub fn locate(&self, t: NaiveTime) -> BarSlot {
        let secs = t.num_seconds_from_midnight() as i64;
        let open = self.open_time.num_seconds_from_midnight() as i64;
        let offset = secs - open;
        if offset < 0 || offset > self.session_secs() as i64 || t.nanosecond() != 0 {
            if (0..=self.session_secs() as i64).contains(&offset) {
                return BarSlot::Misaligned;
            }
            return BarSlot::OffSession;
        }
        if offset % self.bar_spacing_secs as i64 != 0 {
            return BarSlot::Misaligned;
        }
        BarSlot::Bar((offset / self.bar_spacing_secs as i64) as usize)
    }
}

/// Where a timestamp falls relative to a [`DayGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarSlot {
    Bar(usize),
    Misaligned,
    OffSession,
}

/// One calendar day of log-prices on the grid. Missing bars hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct TradingDay {
    pub date: NaiveDate,
    pub log_prices: Vec<f64>,
}

impl TradingDay {
    pub fn missing_bars(&self) -> usize {
        self.log_prices.iter().filter(|v| v.is_nan()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.missing_bars() == 0
    }

    pub fn open(&self) -> f64 {
        self.log_prices[0]
    }

    pub fn close(&self) -> f64 {
        *self.log_prices.last().unwrap()
    }
}

/// Days on a shared grid, ordered by date with no duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    grid: DayGrid,
    days: Vec<TradingDay>,
}

impl PriceSeries {
    pub fn new(grid: DayGrid, days: Vec<TradingDay>) -> Result<Self> {
        for d in &days {
            if d.log_prices.len() != grid.n_points {
                return Err(Error::Data(format!(
                    "day {} has {} bars, grid expects {}",
                    d.date,
                    d.log_prices.len(),
                    grid.n_points
                )));
            }
            if d.log_prices.iter().any(|v| v.is_infinite()) {
                return Err(Error::Data(format!("day {} holds a non-finite log-price", d.date)));
            }
        }
        if let Some(w) = days.windows(2).find(|w| w[0].date >= w[1].date) {
            return Err(Error::Data(format!(
                "days out of order or duplicated: {} then {}",
                w[0].date, w[1].date
            )));
        }
        Ok(Self { grid, days })
    }

    pub fn grid(&self) -> &DayGrid {
        &self.grid
    }

    pub fn days(&self) -> &[TradingDay] {
        &self.days
    }

    pub fn n_days(&self) -> usize {
        self.days.len()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.days.iter().map(|d| d.date).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.days.iter().all(TradingDay::is_complete)
    }
}

/// Result of [`ingest_csv`].
#[derive(Debug, Clone)]
pub struct Ingested {
    pub series: PriceSeries,
    /// Rows with timestamps outside the session window, skipped.
    pub off_session_rows: usize,
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    const FORMATS: [&str; 4] = [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ];
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s.trim(), f).ok())
}

/// Reads `timestamp,price` rows into a [`PriceSeries`] on `grid`.
///
/// Prices are stored as natural logs. Rows outside the session window are
/// skipped and counted; bars absent from the input stay NaN and mark the
/// day incomplete.
pub fn ingest_csv<R: Read>(source: R, grid: &DayGrid) -> Result<Ingested> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let header = reader.headers()?.clone();
    if header.len() != 2 || &header[0] != "timestamp" || &header[1] != "price" {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header `timestamp,price`, found `{}`", header.iter().collect::<Vec<_>>().join(",")),
        });
    }

    let mut days: BTreeMap<NaiveDate, (Vec<f64>, Option<usize>)> = BTreeMap::new();
    let mut off_session_rows = 0;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 2 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let ts = parse_timestamp(&record[0]).ok_or_else(|| Error::Parse {
            line,
            msg: format!("bad timestamp `{}`", &record[0]),
        })?;
        let price: f64 = record[1].parse().map_err(|_| Error::Parse {
            line,
            msg: format!("bad price `{}`", &record[1]),
        })?;
        if !(price > 0.0) || !price.is_finite() {
            return Err(Error::Data(format!("line {line}: non-positive price {price}")));
        }
        let bar = match grid.locate(ts.time()) {
            BarSlot::Bar(b) => b,
            BarSlot::OffSession => {
                off_session_rows += 1;
                continue;
            }
            BarSlot::Misaligned => {
                return Err(Error::Data(format!(
                    "line {line}: timestamp {ts} is not on the {}s bar grid",
                    grid.bar_spacing_secs
                )))
            }
        };
        let (prices, last) = days
            .entry(ts.date())
            .or_insert_with(|| (vec![f64::NAN; grid.n_points], None));
        if let Some(prev) = *last {
            if bar <= prev {
                return Err(Error::Data(format!(
                    "line {line}: non-monotone timestamp {ts} within day {}",
                    ts.date()
                )));
            }
        }
        *last = Some(bar);
        prices[bar] = price.ln();
    }

    let days = days
        .into_iter()
        .map(|(date, (log_prices, _))| TradingDay { date, log_prices })
        .collect();
    Ok(Ingested {
        series: PriceSeries::new(*grid, days)?,
        off_session_rows,
    })
}

/// Result of [`filter_complete_days`].
#[derive(Debug, Clone)]
pub struct Filtered {
    pub series: PriceSeries,
    pub dropped: Vec<NaiveDate>,
    /// Days retained under a nonzero tolerance whose gaps were filled.
    pub repaired: Vec<NaiveDate>,
}

/// Keeps days with at most `max_missing_bars` absent bars.
///
/// With the default tolerance of zero only complete days survive and their
/// values are untouched. Under a positive tolerance the gaps of retained
/// days are filled with the previous observed log-price (the next one for a
/// missing open).
pub fn filter_complete_days(series: PriceSeries, max_missing_bars: usize) -> Result<Filtered> {
    let grid = series.grid;
    let mut dropped = Vec::new();
    let mut repaired = Vec::new();
    let mut kept = Vec::with_capacity(series.days.len());
    for mut day in series.days {
        let missing = day.missing_bars();
        if missing == 0 {
            kept.push(day);
        } else if missing <= max_missing_bars && missing < grid.n_points {
            fill_gaps(&mut day.log_prices);
            repaired.push(day.date);
            kept.push(day);
        } else {
            dropped.push(day.date);
        }
    }
    if kept.is_empty() {
        return Err(Error::NoCompleteDays);
    }
    Ok(Filtered {
        series: PriceSeries { grid, days: kept },
        dropped,
        repaired,
    })
}

fn fill_gaps(values: &mut [f64]) {
    let first = values.iter().copied().find(|v| !v.is_nan()).unwrap();
    let mut last = first;
    for v in values.iter_mut() {
        if v.is_nan() {
            *v = last;
        } else {
            last = *v;
        }
    }
}

/// Writes the lossless CSV cache of a series.
pub fn write_cache<W: Write>(series: &PriceSeries, mut out: W) -> Result<()> {
    let g = &series.grid;
    writeln!(
        out,
        "{CACHE_MAGIC},open={},bar_spacing_s={},n_points={}",
        g.open_time.format("%H:%M:%S"),
        g.bar_spacing_secs,
        g.n_points
    )?;
    writeln!(out, "date,bar,log_price")?;
    for day in &series.days {
        let date = day.date.format("%Y-%m-%d");
        for (bar, v) in day.log_prices.iter().enumerate() {
            writeln!(out, "{date},{bar},{v}")?;
        }
    }
    Ok(())
}

/// True when `first_line` is a cache preamble written by [`write_cache`].
pub fn is_cache_preamble(first_line: &str) -> bool {
    first_line.starts_with(CACHE_MAGIC)
}

/// Reads a series written by [`write_cache`].
pub fn read_cache<R: Read>(source: R) -> Result<PriceSeries> {
    let mut lines = BufReader::new(source).lines();
    let preamble = lines.next().transpose()?.unwrap_or_default();
    let grid = parse_preamble(&preamble)?;
    match lines.next().transpose()? {
        Some(h) if h.trim() == "date,bar,log_price" => {}
        _ => {
            return Err(Error::Parse {
                line: 2,
                msg: "expected header `date,bar,log_price`".into(),
            })
        }
    }
    let mut days: Vec<TradingDay> = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i as u64 + 3;
        if line.is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::Parse {
            line: lineno,
            msg: msg.to_string(),
        };
        let mut fields = line.split(',');
        let (Some(d), Some(b), Some(v), None) = (fields.next(), fields.next(), fields.next(), fields.next()) else {
            return Err(bad("expected 3 fields"));
        };
        let date = NaiveDate::parse_from_str(d, "%Y-%m-%d").map_err(|_| bad("bad date"))?;
        let bar: usize = b.parse().map_err(|_| bad("bad bar index"))?;
        let value: f64 = v.parse().map_err(|_| bad("bad log-price"))?;
        if bar >= grid.n_points {
            return Err(bad("bar index beyond grid"));
        }
        if days.last().map(|d| d.date) != Some(date) {
            days.push(TradingDay {
                date,
                log_prices: vec![f64::NAN; grid.n_points],
            });
        }
        days.last_mut().unwrap().log_prices[bar] = value;
    }
    PriceSeries::new(grid, days)
}

fn parse_preamble(line: &str) -> Result<DayGrid> {
    let bad = |msg: String| Error::Parse { line: 1, msg };
    let rest = line
        .strip_prefix(CACHE_MAGIC)
        .ok_or_else(|| bad("missing series cache preamble".into()))?;
    let mut open = None;
    let mut spacing = None;
    let mut n_points = None;
    for kv in rest.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = kv.split_once('=').ok_or_else(|| bad(format!("bad preamble field `{kv}`")))?;
        match k {
            "open" => open = NaiveTime::parse_from_str(v, "%H:%M:%S").ok(),
            "bar_spacing_s" => spacing = v.parse().ok(),
            "n_points" => n_points = v.parse().ok(),
            _ => return Err(bad(format!("unknown preamble field `{k}`"))),
        }
    }
    match (open, spacing, n_points) {
        (Some(o), Some(s), Some(n)) => DayGrid::new(o, s, n),
        _ => Err(bad("incomplete preamble".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> DayGrid {
        DayGrid::new(NaiveTime::from_hms_opt(9, 40, 0).unwrap(), 60, 4).unwrap()
    }

    fn csv_for(days: &[(&str, &[Option<f64>])]) -> String {
        let grid = small_grid();
        let mut s = String::from("timestamp,price\n");
        for (date, prices) in days {
            let date = NaiveDate::parse_from_str(date, "%Y-%m-%d").unwrap();
            for (i, p) in prices.iter().enumerate() {
                if let Some(p) = p {
                    s += &format!("{},{}\n", grid.bar_datetime(date, i).format("%Y-%m-%dT%H:%M:%S"), p);
                }
            }
        }
        s
    }

    #[test]
    fn grid_close_matches_session() {
        let g = DayGrid::sp500_minute();
        assert_eq!(g.close_time(), NaiveTime::from_hms_opt(16, 0, 0).unwrap());
        assert_eq!(g.close_index(), 380);
        assert_eq!(g.locate(NaiveTime::from_hms_opt(9, 41, 0).unwrap()), BarSlot::Bar(1));
        assert_eq!(g.locate(NaiveTime::from_hms_opt(9, 41, 30).unwrap()), BarSlot::Misaligned);
        assert_eq!(g.locate(NaiveTime::from_hms_opt(9, 30, 0).unwrap()), BarSlot::OffSession);
        assert_eq!(g.locate(NaiveTime::from_hms_opt(16, 1, 0).unwrap()), BarSlot::OffSession);
    }

    #[test]
    fn constant_price_days() {
        let full = [Some(100.0); 4];
        let text = csv_for(&[("2001-02-05", &full), ("2001-02-06", &full)]);
        let ing = ingest_csv(text.as_bytes(), &small_grid()).unwrap();
        assert_eq!(ing.series.n_days(), 2);
        for d in ing.series.days() {
            assert!(d.log_prices.iter().all(|&v| v == 100f64.ln()));
        }
    }

    #[test]
    fn days_sorted_by_date() {
        let full = [Some(1.0); 4];
        let text = csv_for(&[("2001-02-06", &full), ("2001-02-05", &full)]);
        let s = ingest_csv(text.as_bytes(), &small_grid()).unwrap().series;
        assert!(s.days()[0].date < s.days()[1].date);
    }

    #[test]
    fn missing_bar_marks_day_incomplete_and_filter_drops_it() {
        let full = [Some(100.0), Some(101.0), Some(102.0), Some(103.0)];
        let gap = [Some(100.0), None, Some(102.0), Some(103.0)];
        let text = csv_for(&[("2001-02-05", &full), ("2001-02-06", &gap), ("2001-02-07", &full)]);
        let s = ingest_csv(text.as_bytes(), &small_grid()).unwrap().series;
        assert!(!s.days()[1].is_complete());
        let f = filter_complete_days(s.clone(), 0).unwrap();
        assert_eq!(f.series.n_days(), 2);
        assert_eq!(f.dropped.len(), 1);
        assert_eq!(f.series.days()[0], s.days()[0]);
        assert_eq!(f.series.days()[1], s.days()[2]);

        let tolerant = filter_complete_days(s, 1).unwrap();
        assert_eq!(tolerant.series.n_days(), 3);
        assert_eq!(tolerant.series.days()[1].log_prices[1], 100f64.ln());
    }

    #[test]
    fn filter_is_identity_on_complete_series() {
        let full = [Some(5.0); 4];
        let text = csv_for(&[("2001-02-05", &full), ("2001-02-06", &full)]);
        let s = ingest_csv(text.as_bytes(), &small_grid()).unwrap().series;
        let f = filter_complete_days(s.clone(), 0).unwrap();
        assert_eq!(f.series, s);
        assert!(f.dropped.is_empty());
    }

    #[test]
    fn filter_empty_result_errors() {
        let gap = [Some(100.0), None, Some(102.0), Some(103.0)];
        let text = csv_for(&[("2001-02-06", &gap)]);
        let s = ingest_csv(text.as_bytes(), &small_grid()).unwrap().series;
        assert!(matches!(filter_complete_days(s, 0), Err(Error::NoCompleteDays)));
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = "timestamp,price\n2001-02-05T09:40:00,100\n2001-02-05T09:41:00,abc\n";
        match ingest_csv(text.as_bytes(), &small_grid()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let text = "timestamp,price\nyesterday,100\n";
        assert!(matches!(ingest_csv(text.as_bytes(), &small_grid()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn non_positive_price_is_data_error() {
        let text = "timestamp,price\n2001-02-05T09:40:00,0\n";
        assert!(matches!(ingest_csv(text.as_bytes(), &small_grid()), Err(Error::Data(_))));
    }

    #[test]
    fn non_monotone_within_day_is_data_error() {
        let text = "timestamp,price\n2001-02-05T09:41:00,100\n2001-02-05T09:40:00,100\n";
        assert!(matches!(ingest_csv(text.as_bytes(), &small_grid()), Err(Error::Data(_))));
        let dup = "timestamp,price\n2001-02-05T09:41:00,100\n2001-02-05T09:41:00,100\n";
        assert!(matches!(ingest_csv(dup.as_bytes(), &small_grid()), Err(Error::Data(_))));
    }

    #[test]
    fn off_session_rows_are_skipped() {
        let text = "timestamp,price\n2001-02-05 09:00:00,100\n2001-02-05 09:40,100\n";
        let ing = ingest_csv(text.as_bytes(), &small_grid()).unwrap();
        assert_eq!(ing.off_session_rows, 1);
        assert_eq!(ing.series.days()[0].log_prices[0], 100f64.ln());
    }

    #[test]
    fn bad_header_rejected() {
        let text = "time,close\n2001-02-05T09:40:00,100\n";
        assert!(matches!(ingest_csv(text.as_bytes(), &small_grid()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn cache_round_trip_is_lossless() {
        let days = vec![
            TradingDay {
                date: NaiveDate::from_ymd_opt(2003, 3, 3).unwrap(),
                log_prices: vec![0.1, 1.0 / 3.0, f64::NAN, -2.5e-17],
            },
            TradingDay {
                date: NaiveDate::from_ymd_opt(2003, 3, 4).unwrap(),
                log_prices: vec![std::f64::consts::PI, 7.0, 8.0, 9.0],
            },
        ];
        let s = PriceSeries::new(small_grid(), days).unwrap();
        let mut buf = Vec::new();
        write_cache(&s, &mut buf).unwrap();
        assert!(is_cache_preamble(std::str::from_utf8(&buf).unwrap().lines().next().unwrap()));
        let back = read_cache(buf.as_slice()).unwrap();
        assert_eq!(back.grid(), s.grid());
        for (a, b) in back.days().iter().zip(s.days()) {
            assert_eq!(a.date, b.date);
            for (x, y) in a.log_prices.iter().zip(&b.log_prices) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn duplicate_dates_rejected() {
        let d = NaiveDate::from_ymd_opt(2003, 3, 3).unwrap();
        let day = TradingDay {
            date: d,
            log_prices: vec![0.0; 4],
        };
        assert!(PriceSeries::new(small_grid(), vec![day.clone(), day]).is_err());
    }
}
