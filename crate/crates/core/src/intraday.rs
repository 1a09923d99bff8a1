//! Intraday volatility pattern: per-slot mean volatility relative to the
//! cross-slot average, and its removal by division.

use std::io::{BufRead, Write};

use crate::data::VolatilitySeries;
use crate::error::{Error, Result};
use crate::numeric::exact_sum;

#[derive(Debug, Clone, PartialEq)]
pub struct IntradayPattern {
    /// One positive factor per slot; their mean is 1.
    pub factors: Vec<f64>,
}

impl IntradayPattern {
    /// Normalizes arbitrary positive factors to unit mean.
    pub fn from_factors(raw: &[f64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::Config("empty intraday pattern".into()));
        }
        if let Some(bad) = raw.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
            return Err(Error::Config(format!("intraday factor must be positive, got {bad}")));
        }
        let mean = exact_sum(raw.iter().copied()) / raw.len() as f64;
        Ok(Self { factors: raw.iter().map(|a| a / mean).collect() })
    }

    pub fn ones(slots_per_day: usize) -> Self {
        Self { factors: vec![1.0; slots_per_day] }
    }

    pub fn slots_per_day(&self) -> usize {
        self.factors.len()
    }
}

/// Per-slot mean volatility.
pub fn slot_means(vol: &VolatilitySeries) -> Result<Vec<f64>> {
    let spd = vol.slots_per_day;
    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); spd];
    for (&v, &s) in vol.values.iter().zip(&vol.slots) {
        let s = s as usize;
        if s >= spd {
            return Err(Error::SlotMismatch { pattern: spd, series: s + 1 });
        }
        buckets[s].push(v);
    }
    buckets
        .iter()
        .enumerate()
        .map(|(s, b)| {
            if b.is_empty() {
                Err(Error::EmptySlot(s))
            } else {
                Ok(exact_sum(b.iter().copied()) / b.len() as f64)
            }
        })
        .collect()
}

pub fn estimate_pattern(vol: &VolatilitySeries) -> Result<IntradayPattern> {
    if vol.slots_per_day < 2 {
        return Err(Error::DailyCadence);
    }
    let means = slot_means(vol)?;
    if let Some(s) = means.iter().position(|m| !(*m > 0.0)) {
        // a slot whose returns are all zero has no scale to divide out
        return Err(Error::EmptySlot(s));
    }
    IntradayPattern::from_factors(&means)
}

pub fn remove_pattern(vol: &VolatilitySeries, pattern: &IntradayPattern) -> Result<VolatilitySeries> {
    if pattern.slots_per_day() != vol.slots_per_day {
        return Err(Error::SlotMismatch { pattern: pattern.slots_per_day(), series: vol.slots_per_day });
    }
    let values = vol
        .values
        .iter()
        .zip(&vol.slots)
        .map(|(&v, &s)| {
            pattern
                .factors
                .get(s as usize)
                .map(|a| v / a)
                .ok_or(Error::SlotMismatch { pattern: pattern.slots_per_day(), series: s as usize + 1 })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VolatilitySeries { values, slots: vol.slots.clone(), slots_per_day: vol.slots_per_day, adjusted: true })
}

/// `slot<TAB>factor` rows, with a header line.
pub fn write_pattern_tsv<W: Write>(mut w: W, pattern: &IntradayPattern) -> std::io::Result<()> {
    writeln!(w, "slot\tfactor")?;
    for (s, a) in pattern.factors.iter().enumerate() {
        writeln!(w, "{s}\t{a}")?;
    }
    Ok(())
}

pub fn read_pattern_tsv<R: BufRead>(r: R) -> Result<IntradayPattern> {
    let mut raw = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("slot")) {
            continue;
        }
        let mut cols = line.split_whitespace();
        let slot: usize = cols.next().and_then(|c| c.parse().ok()).ok_or_else(|| Error::MalformedRow {
            line: i + 1,
            reason: "bad slot".into(),
        })?;
        let factor: f64 = cols.next().and_then(|c| c.parse().ok()).ok_or_else(|| Error::MalformedRow {
            line: i + 1,
            reason: "bad factor".into(),
        })?;
        if slot != raw.len() {
            return Err(Error::MalformedRow { line: i + 1, reason: format!("expected slot {}", raw.len()) });
        }
        raw.push(factor);
    }
    IntradayPattern::from_factors(&raw)
}
