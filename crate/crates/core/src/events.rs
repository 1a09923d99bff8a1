//! Large-volatility event selection and classification.
//!
//! An event is a position `t'` with `|R(t')| > zeta`, `zeta = m * sigma`.
//! Events carry a sign (crash when the return is negative, rally when
//! positive) and an origin, which only comes from an external label file.

use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use chrono::{NaiveDate, NaiveDateTime};

use crate::data::{ReturnSeries, SeriesStats, VolatilitySeries};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Crash,
    Rally,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    Endogenous,
    Exogenous,
    Unlabeled,
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Crash => "crash",
            Sign::Rally => "rally",
        })
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Origin::Endogenous => "endogenous",
            Origin::Exogenous => "exogenous",
            Origin::Unlabeled => "unlabeled",
        })
    }
}

impl FromStr for Origin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "endogenous" | "endo" => Ok(Origin::Endogenous),
            "exogenous" | "exo" => Ok(Origin::Exogenous),
            other => Err(Error::Config(format!("unknown origin '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub index: usize,
    pub magnitude: f64,
    /// `None` until [`classify_sign`] has run.
    pub sign: Option<Sign>,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventSet {
    pub events: Vec<Event>,
    pub zeta_multiple: f64,
    pub zeta_abs: f64,
}

impl EventSet {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.events.iter().map(|e| e.index).collect()
    }

    /// Maps every index `t'` to `n - 1 - t'`, matching a reversed series.
    pub fn reindexed_for_reverse(&self, n: usize) -> EventSet {
        let mut events: Vec<Event> =
            self.events.iter().map(|e| Event { index: n - 1 - e.index, ..*e }).collect();
        events.reverse();
        EventSet { events, ..*self }
    }

    pub fn count_sign(&self, sign: Sign) -> usize {
        self.events.iter().filter(|e| e.sign == Some(sign)).count()
    }

    pub fn count_origin(&self, origin: Origin) -> usize {
        self.events.iter().filter(|e| e.origin == origin).count()
    }
}

/// All positions whose volatility strictly exceeds `m * sigma`. No
/// declustering is applied.
pub fn select_events(vol: &VolatilitySeries, m: f64, stats: &SeriesStats) -> Result<EventSet> {
    if !(m > 1.0) || !m.is_finite() {
        return Err(Error::InvalidThreshold(m));
    }
    let zeta_abs = m * stats.sigma;
    let events: Vec<Event> = vol
        .values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > zeta_abs)
        .map(|(index, &magnitude)| Event { index, magnitude, sign: None, origin: Origin::Unlabeled })
        .collect();
    if events.is_empty() {
        return Err(Error::NoEvents { zeta_multiple: m, zeta_abs });
    }
    Ok(EventSet { events, zeta_multiple: m, zeta_abs })
}

pub fn classify_sign(returns: &ReturnSeries, events: &EventSet) -> Result<EventSet> {
    let mut out = events.clone();
    for e in &mut out.events {
        let r = *returns
            .values
            .get(e.index)
            .ok_or(Error::EventOutOfRange { index: e.index, len: returns.len() })?;
        e.sign = Some(if r < 0.0 {
            Sign::Crash
        } else if r > 0.0 {
            Sign::Rally
        } else {
            return Err(Error::ZeroReturnEvent(e.index));
        });
    }
    Ok(out)
}

/// Keeps an event only if it lies at least `min_separation` steps after the
/// previously kept one.
pub fn decluster(events: &EventSet, min_separation: usize) -> EventSet {
    let mut kept: Vec<Event> = Vec::with_capacity(events.len());
    for e in &events.events {
        if kept.last().map_or(true, |k| e.index - k.index >= min_separation) {
            kept.push(*e);
        }
    }
    EventSet { events: kept, ..*events }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventLabel {
    pub date: NaiveDate,
    pub origin: Origin,
    pub note: String,
}

/// Reads `YYYY-MM-DD,exogenous|endogenous[,note]` lines; `#` starts a
/// comment line. The note may itself contain commas.
pub fn parse_labels<R: BufRead>(reader: R) -> Result<Vec<EventLabel>> {
    let mut labels = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.splitn(3, ',');
        let bad = |reason: String| Error::MalformedRow { line: i + 1, reason };
        let date_s = parts.next().unwrap_or("").trim();
        let date = NaiveDate::parse_from_str(date_s, "%Y-%m-%d")
            .map_err(|_| bad(format!("bad label date '{date_s}'")))?;
        let origin = parts
            .next()
            .ok_or_else(|| bad("missing origin".into()))?
            .parse::<Origin>()
            .map_err(|e| bad(e.to_string()))?;
        let note = parts.next().unwrap_or("").trim().to_string();
        labels.push(EventLabel { date, origin, note });
    }
    Ok(labels)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Labeled {
    pub events: EventSet,
    /// Label dates that matched no event (warning, not fatal).
    pub unmatched: Vec<NaiveDate>,
}

/// Matches labels by the date on which each event's return is realized.
/// Unmatched events become endogenous.
pub fn apply_labels(events: &EventSet, labels: &[EventLabel], calendar: &[NaiveDateTime]) -> Result<Labeled> {
    if calendar.windows(2).any(|w| w[0].date() == w[1].date()) {
        return Err(Error::LabelsRequireDaily);
    }
    let mut out = events.clone();
    let mut matched = vec![false; labels.len()];
    for e in &mut out.events {
        let date = calendar
            .get(e.index)
            .ok_or(Error::EventOutOfRange { index: e.index, len: calendar.len() })?
            .date();
        e.origin = Origin::Endogenous;
        if let Some(k) = labels.iter().position(|l| l.date == date) {
            e.origin = labels[k].origin;
            matched[k] = true;
        }
    }
    let unmatched = labels.iter().zip(&matched).filter(|(_, m)| !**m).map(|(l, _)| l.date).collect();
    Ok(Labeled { events: out, unmatched })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EventFilter {
    pub sign: Option<Sign>,
    pub origin: Option<Origin>,
}

impl EventFilter {
    pub fn matches(&self, e: &Event) -> bool {
        self.sign.map_or(true, |s| e.sign == Some(s)) && self.origin.map_or(true, |o| e.origin == o)
    }
}

pub fn filter_events(events: &EventSet, filter: EventFilter) -> EventSet {
    EventSet { events: events.events.iter().filter(|e| filter.matches(e)).copied().collect(), ..*events }
}
