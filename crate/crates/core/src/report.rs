//! Tab-separated output tables. Floats are written in shortest round-trip
//! form so that re-reading a table reproduces the values exactly.

use std::io::{BufRead, Write};

use chrono::NaiveDateTime;

use crate::error::{Error, Result};
use crate::events::{EventFilter, EventSet};
use crate::fitting::PowerLawFit;
use crate::profiles::{cumulative, ConditionedProfile, OmoriProfile, Side, SignalCheck};

pub const PROFILE_HEADER: &str = "t\tv_minus\tv_plus\tV_minus\tV_plus\tcount_minus\tcount_plus";
pub const OMORI_HEADER: &str = "t\tN_minus\tN_plus";
pub const FITS_HEADER: &str =
    "side\tzeta_multiple\torigin_filter\tsign_filter\tp\tp_stderr\ttau\tA\tt_min\tt_max\tmethod\trms_log_residual";
pub const OMORI_FITS_HEADER: &str =
    "side\tzeta_multiple\tzeta1_multiple\tp\tp_stderr\ttau\tA\tt_min\tt_max\tmethod\trms_log_residual";
pub const SIGNAL_HEADER: &str =
    "side\tzeta_multiple\torigin_filter\tsign_filter\tmean_v\tstderr\tz_score\tconsistent_with_zero";
pub const EVENTS_HEADER: &str = "index\ttimestamp\tmagnitude\tsign\torigin";

const NA: &str = "NA";

/// One row per lag `0..=T`; `V(0)` is the empty sum.
pub fn write_profile_tsv<W: Write>(mut w: W, profile: &ConditionedProfile) -> std::io::Result<()> {
    let cum = cumulative(profile);
    writeln!(w, "{PROFILE_HEADER}")?;
    for t in 0..=profile.max_lag {
        let (cm, cp) = if t == 0 { (0.0, 0.0) } else { (cum.minus[t - 1], cum.plus[t - 1]) };
        writeln!(
            w,
            "{t}\t{}\t{}\t{cm}\t{cp}\t{}\t{}",
            profile.v_minus[t], profile.v_plus[t], profile.counts_minus[t], profile.counts_plus[t]
        )?;
    }
    Ok(())
}

/// Columns of a profile table, indexed by lag `0..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub v_minus: Vec<f64>,
    pub v_plus: Vec<f64>,
    pub cum_minus: Vec<f64>,
    pub cum_plus: Vec<f64>,
    pub counts_minus: Vec<usize>,
    pub counts_plus: Vec<usize>,
}

impl ProfileTable {
    /// `V(t)` for `t = 1..=T`, in the layout the fitter expects.
    pub fn cumulative(&self, side: Side) -> &[f64] {
        match side {
            Side::Minus => &self.cum_minus[1..],
            Side::Plus => &self.cum_plus[1..],
        }
    }
}

fn rows<R: BufRead>(r: R, header: &str) -> Result<Vec<Vec<String>>> {
    let mut lines = r.lines();
    let first = lines.next().transpose()?.unwrap_or_default();
    if first.trim_end() != header {
        return Err(Error::MalformedRow { line: 1, reason: format!("expected header '{header}'") });
    }
    let width = header.split('\t').count();
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split('\t').map(str::to_owned).collect();
        if fields.len() != width {
            return Err(Error::MalformedRow { line: k + 2, reason: format!("expected {width} fields") });
        }
        out.push(fields);
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::MalformedRow { line, reason: format!("bad number '{s}'") })
}

pub fn read_profile_tsv<R: BufRead>(r: R) -> Result<ProfileTable> {
    let mut t = ProfileTable {
        v_minus: vec![],
        v_plus: vec![],
        cum_minus: vec![],
        cum_plus: vec![],
        counts_minus: vec![],
        counts_plus: vec![],
    };
    for (k, f) in rows(r, PROFILE_HEADER)?.iter().enumerate() {
        let line = k + 2;
        if num::<usize>(&f[0], line)? != k {
            return Err(Error::MalformedRow { line, reason: "lags must run 0, 1, 2, ...".into() });
        }
        t.v_minus.push(num(&f[1], line)?);
        t.v_plus.push(num(&f[2], line)?);
        t.cum_minus.push(num(&f[3], line)?);
        t.cum_plus.push(num(&f[4], line)?);
        t.counts_minus.push(num(&f[5], line)?);
        t.counts_plus.push(num(&f[6], line)?);
    }
    if t.v_minus.len() < 2 {
        return Err(Error::TooShort(t.v_minus.len()));
    }
    Ok(t)
}

/// One row per lag `1..=T`.
pub fn write_omori_tsv<W: Write>(mut w: W, omori: &OmoriProfile) -> std::io::Result<()> {
    writeln!(w, "{OMORI_HEADER}")?;
    for (k, (a, b)) in omori.n_minus.iter().zip(&omori.n_plus).enumerate() {
        writeln!(w, "{}\t{a}\t{b}", k + 1)?;
    }
    Ok(())
}

/// Returns `(N_minus, N_plus)` with element `k` at lag `k + 1`.
pub fn read_omori_tsv<R: BufRead>(r: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut minus = Vec::new();
    let mut plus = Vec::new();
    for (k, f) in rows(r, OMORI_HEADER)?.iter().enumerate() {
        minus.push(num(&f[1], k + 2)?);
        plus.push(num(&f[2], k + 2)?);
    }
    Ok((minus, plus))
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| NA.to_owned(), |v| v.to_string())
}

/// Fit columns from `p` onwards; a failed fit keeps its range and method
/// and marks the rest `NA`.
fn fit_columns(fit: &std::result::Result<PowerLawFit, (usize, usize, String)>) -> String {
    match fit {
        Ok(f) => format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            f.exponent,
            opt(f.p_stderr),
            f.tau,
            f.amplitude,
            f.t_min,
            f.t_max,
            f.method,
            f.rms_log_residual
        ),
        Err((lo, hi, method)) => format!("{NA}\t{NA}\t{NA}\t{NA}\t{lo}\t{hi}\t{method}\t{NA}"),
    }
}

/// A fit outcome for one side of one event subset.
#[derive(Debug, Clone, PartialEq)]
pub struct FitRow {
    pub side: Side,
    pub zeta_multiple: f64,
    pub filter: EventFilter,
    /// On failure: the requested range and method.
    pub fit: std::result::Result<PowerLawFit, (usize, usize, String)>,
}

fn filter_labels(filter: &EventFilter) -> (String, String) {
    (
        filter.origin.map_or_else(|| "all".to_owned(), |o| o.to_string()),
        filter.sign.map_or_else(|| "all".to_owned(), |s| s.to_string()),
    )
}

pub fn write_fits_tsv<W: Write>(mut w: W, rows: &[FitRow]) -> std::io::Result<()> {
    writeln!(w, "{FITS_HEADER}")?;
    for r in rows {
        let (origin, sign) = filter_labels(&r.filter);
        writeln!(w, "{}\t{}\t{origin}\t{sign}\t{}", r.side.label(), r.zeta_multiple, fit_columns(&r.fit))?;
    }
    Ok(())
}

/// A fit of the aftershock count curve for one secondary threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct OmoriFitRow {
    pub side: Side,
    pub zeta_multiple: f64,
    pub zeta1_multiple: f64,
    pub fit: std::result::Result<PowerLawFit, (usize, usize, String)>,
}

pub fn write_omori_fits_tsv<W: Write>(mut w: W, rows: &[OmoriFitRow]) -> std::io::Result<()> {
    writeln!(w, "{OMORI_FITS_HEADER}")?;
    for r in rows {
        writeln!(w, "{}\t{}\t{}\t{}", r.side.label(), r.zeta_multiple, r.zeta1_multiple, fit_columns(&r.fit))?;
    }
    Ok(())
}

/// A parsed `fits.tsv` row; `None` marks `NA`.
#[derive(Debug, Clone, PartialEq)]
pub struct FitRecord {
    pub side: String,
    pub zeta_multiple: f64,
    pub origin_filter: String,
    pub sign_filter: String,
    pub p: Option<f64>,
    pub p_stderr: Option<f64>,
    pub tau: Option<f64>,
    pub amplitude: Option<f64>,
    pub t_min: usize,
    pub t_max: usize,
    pub method: String,
    pub rms_log_residual: Option<f64>,
}

pub fn read_fits_tsv<R: BufRead>(r: R) -> Result<Vec<FitRecord>> {
    let maybe = |s: &str, line| if s == NA { Ok(None) } else { num(s, line).map(Some) };
    rows(r, FITS_HEADER)?
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let line = k + 2;
            Ok(FitRecord {
                side: f[0].clone(),
                zeta_multiple: num(&f[1], line)?,
                origin_filter: f[2].clone(),
                sign_filter: f[3].clone(),
                p: maybe(&f[4], line)?,
                p_stderr: maybe(&f[5], line)?,
                tau: maybe(&f[6], line)?,
                amplitude: maybe(&f[7], line)?,
                t_min: num(&f[8], line)?,
                t_max: num(&f[9], line)?,
                method: f[10].clone(),
                rms_log_residual: maybe(&f[11], line)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalRow {
    pub side: Side,
    pub zeta_multiple: f64,
    pub filter: EventFilter,
    pub check: SignalCheck,
}

pub fn write_signal_tsv<W: Write>(mut w: W, rows: &[SignalRow]) -> std::io::Result<()> {
    writeln!(w, "{SIGNAL_HEADER}")?;
    for r in rows {
        let (origin, sign) = filter_labels(&r.filter);
        writeln!(
            w,
            "{}\t{}\t{origin}\t{sign}\t{}\t{}\t{}\t{}",
            r.side.label(),
            r.zeta_multiple,
            r.check.mean_v,
            r.check.stderr,
            r.check.z_score,
            r.check.consistent_with_zero()
        )?;
    }
    Ok(())
}

pub fn write_events_tsv<W: Write>(
    mut w: W,
    events: &EventSet,
    calendar: Option<&[NaiveDateTime]>,
) -> std::io::Result<()> {
    writeln!(w, "{EVENTS_HEADER}")?;
    for e in &events.events {
        let ts = calendar.and_then(|c| c.get(e.index)).map_or_else(|| NA.to_owned(), |t| t.to_string());
        let sign = e.sign.map_or_else(|| NA.to_owned(), |s| s.to_string());
        writeln!(w, "{}\t{ts}\t{}\t{sign}\t{}", e.index, e.magnitude, e.origin)?;
    }
    Ok(())
}
