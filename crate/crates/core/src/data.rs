//! Price ingestion, return/volatility series and series-level transforms.
//!
//! A [`PriceSeries`] is parsed from `timestamp,price` text. Returns are the
//! log-differences of consecutive prices, aligned to the left timestamp, and
//! every return carries the intraday slot of that timestamp (its ordinal
//! position within its calendar day). Daily data has a single slot. For
//! matching against dated labels a return is dated by its right timestamp,
//! the moment the move is realized.

use std::fmt;
use std::io::Read;
use std::str::FromStr;

use chrono::{NaiveDate, NaiveDateTime};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numeric::exact_mean;

/// Sampling step of a price series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cadence {
    Minutes(u32),
    Daily,
}

impl Cadence {
    pub fn is_daily(self) -> bool {
        matches!(self, Cadence::Daily)
    }
}

impl fmt::Display for Cadence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cadence::Minutes(m) => write!(f, "{m}min"),
            Cadence::Daily => f.write_str("daily"),
        }
    }
}

impl FromStr for Cadence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("daily") || s.eq_ignore_ascii_case("1day") {
            return Ok(Cadence::Daily);
        }
        s.strip_suffix("min")
            .and_then(|m| m.parse::<u32>().ok())
            .filter(|&m| m > 0)
            .map(Cadence::Minutes)
            .ok_or_else(|| Error::Config(format!("unknown cadence '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceRecord {
    pub timestamp: NaiveDateTime,
    pub price: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    records: Vec<PriceRecord>,
    cadence: Cadence,
    slots_per_day: usize,
}

impl PriceSeries {
    /// Validates ordering and positivity. `slots_per_day` is derived from the
    /// calendar (largest number of records on one date) unless the cadence is
    /// daily, in which case it is 1.
    pub fn new(records: Vec<PriceRecord>, cadence: Cadence) -> Result<Self> {
        if records.len() < 2 {
            return Err(Error::TooShort(records.len()));
        }
        for (i, r) in records.iter().enumerate() {
            if !(r.price > 0.0) || !r.price.is_finite() {
                return Err(Error::NonPositivePrice { line: i + 1, price: r.price });
            }
            if i > 0 && r.timestamp <= records[i - 1].timestamp {
                return Err(Error::NonMonotoneTimestamp {
                    line: i + 1,
                    timestamp: r.timestamp.to_string(),
                });
            }
        }
        let slots_per_day = if cadence.is_daily() { 1 } else { max_records_per_day(&records) };
        Ok(Self { records, cadence, slots_per_day })
    }

    /// Overrides the number of intraday slots (e.g. a known session length).
    pub fn with_slots_per_day(mut self, slots: usize) -> Result<Self> {
        if slots == 0 {
            return Err(Error::Config("slots per day must be positive".into()));
        }
        if self.cadence.is_daily() && slots != 1 {
            return Err(Error::Config("daily data has exactly one slot per day".into()));
        }
        let observed = if self.cadence.is_daily() { 1 } else { max_records_per_day(&self.records) };
        if observed > slots {
            return Err(Error::Config(format!(
                "a trading day has {observed} records, more than the configured {slots} slots"
            )));
        }
        self.slots_per_day = slots;
        Ok(self)
    }

    pub fn records(&self) -> &[PriceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn cadence(&self) -> Cadence {
        self.cadence
    }

    pub fn with_cadence(mut self, cadence: Cadence) -> Self {
        self.cadence = cadence;
        self.slots_per_day = if cadence.is_daily() { 1 } else { max_records_per_day(&self.records) };
        self
    }

    pub fn slots_per_day(&self) -> usize {
        self.slots_per_day
    }

    /// Ordinal of every record within its calendar date (0 for daily data).
    pub fn slots(&self) -> Vec<u32> {
        if self.cadence.is_daily() {
            return vec![0; self.records.len()];
        }
        let mut out = Vec::with_capacity(self.records.len());
        let mut day: Option<NaiveDate> = None;
        let mut k = 0u32;
        for r in &self.records {
            let d = r.timestamp.date();
            if day == Some(d) {
                k += 1;
            } else {
                day = Some(d);
                k = 0;
            }
            out.push(k);
        }
        out
    }
}

fn max_records_per_day(records: &[PriceRecord]) -> usize {
    let mut best = 0;
    let mut run = 0;
    let mut day = None;
    for r in records {
        let d = r.timestamp.date();
        if day == Some(d) {
            run += 1;
        } else {
            day = Some(d);
            run = 1;
        }
        best = best.max(run);
    }
    best.max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeaderMode {
    /// Skip the first row if its timestamp field does not parse.
    Auto,
    Present,
    Absent,
}

/// Column layout of a price file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvSchema {
    pub timestamp_column: usize,
    pub price_column: usize,
    pub delimiter: u8,
    pub header: HeaderMode,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self { timestamp_column: 0, price_column: 1, delimiter: b',', header: HeaderMode::Auto }
    }
}

/// Parses `YYYY-MM-DD` or `YYYY-MM-DDTHH:MM[:SS]` (a space may replace the
/// `T`). Returns the instant and whether the input was date-only.
pub fn parse_timestamp(s: &str) -> Option<(NaiveDateTime, bool)> {
    let s = s.trim();
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Some((d.and_hms_opt(0, 0, 0)?, true));
    }
    const FORMATS: [&str; 4] = ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M:%S", "%Y-%m-%d %H:%M"];
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .map(|t| (t, false))
}

/// Reads a price file. Cadence is inferred: daily if every timestamp is
/// date-only, otherwise the median positive within-day step in minutes.
pub fn parse_price_csv<R: Read>(stream: R, schema: &CsvSchema) -> Result<PriceSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(schema.delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(stream);

    let mut records = Vec::new();
    let mut all_date_only = true;
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::MalformedRow { line: row + 1, reason: e.to_string() })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(row + 1);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let field = |col: usize| {
            rec.get(col).ok_or_else(|| Error::MalformedRow {
                line,
                reason: format!("missing column {col}"),
            })
        };
        let ts_field = field(schema.timestamp_column)?;
        let parsed = parse_timestamp(ts_field);
        if row == 0 {
            // a header row has a non-numeric price field
            let looks_like_header = rec.get(schema.price_column).is_none_or(|p| p.parse::<f64>().is_err());
            match (schema.header, parsed.is_none() && looks_like_header) {
                (HeaderMode::Present, _) | (HeaderMode::Auto, true) => continue,
                _ => {}
            }
        }
        let (timestamp, date_only) = parsed.ok_or_else(|| Error::MalformedRow {
            line,
            reason: format!("bad timestamp '{ts_field}'"),
        })?;
        let price_field = field(schema.price_column)?;
        let price: f64 = price_field.parse().map_err(|_| Error::MalformedRow {
            line,
            reason: format!("bad price '{price_field}'"),
        })?;
        if !price.is_finite() {
            return Err(Error::MalformedRow { line, reason: format!("bad price '{price_field}'") });
        }
        if price <= 0.0 {
            return Err(Error::NonPositivePrice { line, price });
        }
        if let Some(prev) = records.last().map(|r: &PriceRecord| r.timestamp) {
            if timestamp <= prev {
                return Err(Error::NonMonotoneTimestamp { line, timestamp: timestamp.to_string() });
            }
        }
        all_date_only &= date_only;
        records.push(PriceRecord { timestamp, price });
    }

    let cadence = if all_date_only { Cadence::Daily } else { infer_minutes(&records) };
    PriceSeries::new(records, cadence)
}

fn infer_minutes(records: &[PriceRecord]) -> Cadence {
    let mut steps: Vec<i64> = records
        .windows(2)
        .filter(|w| w[0].timestamp.date() == w[1].timestamp.date())
        .map(|w| (w[1].timestamp - w[0].timestamp).num_seconds())
        .filter(|&s| s > 0)
        .collect();
    if steps.is_empty() {
        return Cadence::Daily;
    }
    steps.sort_unstable();
    let median = steps[steps.len() / 2];
    Cadence::Minutes(((median + 30) / 60).max(1) as u32)
}

/// Log-returns `ln P(i+1) - ln P(i)`, aligned to the left record for slots.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub values: Vec<f64>,
    pub slots: Vec<u32>,
    pub slots_per_day: usize,
    /// Timestamp at which each return is realized (its right record),
    /// positional. Absent for synthetic data.
    pub calendar: Option<Vec<NaiveDateTime>>,
}

impl ReturnSeries {
    /// A series without calendar whose slots cycle through `0..slots_per_day`.
    pub fn from_values(values: Vec<f64>, slots_per_day: usize) -> Self {
        let spd = slots_per_day.max(1);
        let slots = (0..values.len()).map(|i| (i % spd) as u32).collect();
        Self { values, slots, slots_per_day: spd, calendar: None }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolatilitySeries {
    pub values: Vec<f64>,
    pub slots: Vec<u32>,
    pub slots_per_day: usize,
    /// True once the intraday pattern has been divided out.
    pub adjusted: bool,
}

impl VolatilitySeries {
    pub fn from_values(values: Vec<f64>) -> Self {
        let slots = vec![0; values.len()];
        Self { values, slots, slots_per_day: 1, adjusted: false }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        out.values.reverse();
        out.slots.reverse();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesStats {
    /// Mean volatility.
    pub sigma: f64,
    pub n: usize,
}

pub fn log_returns(prices: &PriceSeries) -> ReturnSeries {
    build_returns(prices, false)
}

/// Like [`log_returns`] but drops returns whose two prices fall on different
/// calendar dates. The result no longer has `len(prices) - 1` entries.
pub fn log_returns_within_sessions(prices: &PriceSeries) -> ReturnSeries {
    build_returns(prices, true)
}

fn build_returns(prices: &PriceSeries, within_sessions: bool) -> ReturnSeries {
    let slots = prices.slots();
    let recs = prices.records();
    let n = recs.len() - 1;
    let mut values = Vec::with_capacity(n);
    let mut out_slots = Vec::with_capacity(n);
    let mut calendar = Vec::with_capacity(n);
    for i in 0..n {
        if within_sessions
            && !prices.cadence().is_daily()
            && recs[i].timestamp.date() != recs[i + 1].timestamp.date()
        {
            continue;
        }
        values.push(recs[i + 1].price.ln() - recs[i].price.ln());
        out_slots.push(slots[i]);
        calendar.push(recs[i + 1].timestamp);
    }
    ReturnSeries {
        values,
        slots: out_slots,
        slots_per_day: prices.slots_per_day(),
        calendar: Some(calendar),
    }
}

pub fn absolute_volatility(returns: &ReturnSeries) -> VolatilitySeries {
    VolatilitySeries {
        values: returns.values.iter().map(|r| r.abs()).collect(),
        slots: returns.slots.clone(),
        slots_per_day: returns.slots_per_day,
        adjusted: false,
    }
}

pub fn mean_volatility(vol: &VolatilitySeries) -> Result<SeriesStats> {
    if vol.values.is_empty() {
        return Err(Error::EmptySeries);
    }
    let n = vol.values.len();
    Ok(SeriesStats { sigma: exact_mean(&vol.values), n })
}

/// Time reversal. Each value keeps its own slot; the calendar stays
/// positional.
pub fn reverse(returns: &ReturnSeries) -> ReturnSeries {
    let mut out = returns.clone();
    out.values.reverse();
    out.slots.reverse();
    out
}

/// Uniformly random permutation of the (value, slot) pairs, deterministic in
/// `seed`. The calendar stays positional.
pub fn shuffle_surrogate(returns: &ReturnSeries, seed: u64) -> ReturnSeries {
    let mut order: Vec<usize> = (0..returns.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    ReturnSeries {
        values: order.iter().map(|&i| returns.values[i]).collect(),
        slots: order.iter().map(|&i| returns.slots[i]).collect(),
        slots_per_day: returns.slots_per_day,
        calendar: returns.calendar.clone(),
    }
}
