//! End-to-end runs over a price file, writing one output directory per run.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use crate::config::{RunConfig, Split, Surrogate};
use crate::data::{
    absolute_volatility, log_returns, log_returns_within_sessions, mean_volatility, parse_price_csv,
    shuffle_surrogate, Cadence, CsvSchema, ReturnSeries, SeriesStats, VolatilitySeries,
};
use crate::error::{Error, ErrorClass, Result};
use crate::events::{
    apply_labels, classify_sign, decluster, filter_events, parse_labels, select_events, EventFilter, EventSet,
    Origin, Sign,
};
use crate::fitting::{bootstrap_errors, bootstrap_with, FitConfig, PowerLawFit};
use crate::intraday::{estimate_pattern, remove_pattern, write_pattern_tsv, IntradayPattern};
use crate::profiles::{
    cumulative, omori_counts, omori_from_indices, remanent_profile, signal_check, Side,
};
use crate::report::{
    write_events_tsv, write_fits_tsv, write_omori_fits_tsv, write_omori_tsv, write_profile_tsv,
    write_signal_tsv, FitRow, OmoriFitRow, SignalRow,
};

/// Largest lag entering the zero-signal check.
const SIGNAL_LAGS: usize = 100;

/// A loaded series ready for event analysis.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub cadence: Cadence,
    pub returns: ReturnSeries,
    /// Volatility after intraday adjustment (when applied).
    pub vol: VolatilitySeries,
    pub stats: SeriesStats,
    pub pattern: Option<IntradayPattern>,
}

/// A job that failed while the rest of the run went on.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub job: String,
    pub error: Error,
}

/// Result of a run that got as far as writing its outputs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outcome {
    pub failures: Vec<Failure>,
    /// Failures that do not count towards the exit status.
    pub tolerated: Vec<Failure>,
}

impl Outcome {
    /// Severity of the first counted failure, if any.
    pub fn worst(&self) -> Option<ErrorClass> {
        self.failures.first().map(|f| f.error.class())
    }
}

pub fn prepare(cfg: &RunConfig, remove_intraday: bool) -> Result<Prepared> {
    let input = cfg.input.as_ref().ok_or_else(|| Error::Config("no input file given".into()))?;
    let file = File::open(input).map_err(|e| Error::Io(format!("{}: {e}", input.display())))?;
    let mut prices = parse_price_csv(BufReader::new(file), &CsvSchema::default())?;
    if let Some(c) = cfg.cadence {
        prices = prices.with_cadence(c);
    }
    if let Some(s) = cfg.slots_per_day {
        prices = prices.with_slots_per_day(s)?;
    }
    let mut returns = if cfg.drop_overnight { log_returns_within_sessions(&prices) } else { log_returns(&prices) };
    if cfg.surrogate == Surrogate::Shuffle {
        returns = shuffle_surrogate(&returns, cfg.seed);
    }
    let raw = absolute_volatility(&returns);
    let (vol, pattern) = if remove_intraday && !prices.cadence().is_daily() && raw.slots_per_day >= 2 {
        let pattern = estimate_pattern(&raw)?;
        (remove_pattern(&raw, &pattern)?, Some(pattern))
    } else {
        (raw, None)
    };
    let stats = mean_volatility(&vol)?;
    Ok(Prepared { cadence: prices.cadence(), returns, vol, stats, pattern })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    File::create(&path).map(BufWriter::new).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_file(dir: &Path, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut w = create(dir, name)?;
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

fn start_run(cfg: &RunConfig, prepared: &Prepared) -> Result<()> {
    fs::create_dir_all(&cfg.out).map_err(|e| Error::Io(format!("{}: {e}", cfg.out.display())))?;
    write_file(&cfg.out, "config.echo", |w| w.write_all(cfg.echo().as_bytes()))?;
    if let Some(p) = &prepared.pattern {
        write_file(&cfg.out, "pattern.tsv", |w| write_pattern_tsv(w, p))?;
    }
    Ok(())
}

fn finish_run(cfg: &RunConfig, outcome: &Outcome) -> Result<()> {
    let all: Vec<&Failure> = outcome.failures.iter().chain(&outcome.tolerated).collect();
    if all.is_empty() {
        return Ok(());
    }
    write_file(&cfg.out, "failures.txt", |w| {
        for f in all {
            writeln!(w, "{}\t{}\t{}", f.job, f.error.code(), f.error)?;
        }
        Ok(())
    })
}

fn load_labels(cfg: &RunConfig) -> Result<Option<Vec<crate::events::EventLabel>>> {
    let Some(path) = &cfg.labels else { return Ok(None) };
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_labels(BufReader::new(file)).map(Some)
}

/// Events above `m` sigma with sign, optional declustering and labels.
fn events_at(
    cfg: &RunConfig,
    prepared: &Prepared,
    m: f64,
    labels: Option<&[crate::events::EventLabel]>,
) -> Result<EventSet> {
    let selected = select_events(&prepared.vol, m, &prepared.stats)?;
    let mut events = classify_sign(&prepared.returns, &selected)?;
    if let Some(k) = cfg.min_separation {
        events = decluster(&events, k);
    }
    if let Some(labels) = labels {
        let calendar = prepared
            .returns
            .calendar
            .as_deref()
            .ok_or_else(|| Error::Config("labels need a dated series".into()))?;
        let labeled = apply_labels(&events, labels, calendar)?;
        for d in &labeled.unmatched {
            eprintln!("warning: label {d} matches no event at {m} sigma");
        }
        events = labeled.events;
    }
    Ok(events)
}

fn split_filters(split: Split) -> Vec<(EventFilter, &'static str)> {
    let mut out = vec![(EventFilter::default(), "")];
    match split {
        Split::All => {}
        Split::Sign => {
            out.push((EventFilter { sign: Some(Sign::Crash), origin: None }, "_crash"));
            out.push((EventFilter { sign: Some(Sign::Rally), origin: None }, "_rally"));
        }
        Split::Origin => {
            out.push((EventFilter { sign: None, origin: Some(Origin::Endogenous) }, "_endogenous"));
            out.push((EventFilter { sign: None, origin: Some(Origin::Exogenous) }, "_exogenous"));
        }
    }
    out
}

fn failed_fit(fit_cfg: &FitConfig, curve_len: usize) -> (usize, usize, String) {
    let (lo, hi) = fit_cfg.range(curve_len);
    (lo, hi, fit_cfg.method.to_string())
}

/// Profiles, fits and zero-signal checks per threshold and event subset.
pub fn analyze(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let labels = load_labels(cfg)?;
    let prepared = prepare(cfg, cfg.intraday_removal)?;
    let max_lag = cfg.max_lag_for(prepared.cadence);
    if max_lag >= prepared.vol.len() {
        return Err(Error::InvalidLag(format!("max lag {max_lag} needs more than {} returns", prepared.vol.len())));
    }
    let fit_cfg = cfg.fit_config();
    start_run(cfg, &prepared)?;

    let mut outcome = Outcome::default();
    let mut fits = Vec::new();
    let mut signals = Vec::new();
    // fit failures are the expected result on surrogate data
    let tolerate_fit_failures = cfg.surrogate == Surrogate::Shuffle;
    for &m in &cfg.thresholds {
        let events = match events_at(cfg, &prepared, m, labels.as_deref()) {
            Ok(e) => e,
            Err(error) => {
                outcome.failures.push(Failure { job: format!("z{m}"), error });
                continue;
            }
        };
        for (filter, suffix) in split_filters(cfg.split) {
            let job = format!("z{m}{suffix}");
            let subset = filter_events(&events, filter);
            let profile = match remanent_profile(&prepared.vol, &subset, max_lag) {
                Ok(p) => p,
                Err(error) => {
                    outcome.failures.push(Failure { job, error });
                    continue;
                }
            };
            write_file(&cfg.out, &format!("profile_{job}.tsv"), |w| write_profile_tsv(w, &profile))?;
            let cum = cumulative(&profile);

            let errors = if cfg.bootstrap > 0 {
                let idx = subset.indices();
                match bootstrap_errors(&prepared.vol, &idx, prepared.stats.sigma, max_lag, &fit_cfg, cfg.bootstrap, cfg.seed)
                {
                    Ok(b) => Some(b),
                    Err(error) => {
                        outcome.tolerated.push(Failure { job: format!("{job}_bootstrap"), error });
                        None
                    }
                }
            } else {
                None
            };

            for side in Side::BOTH {
                let curve = cum.side(side);
                let fit = fit_cfg.fit(curve).map(|f| PowerLawFit { p_stderr: errors.as_ref().map(|b| b.stderr(side)), ..f });
                let fit = match fit {
                    Ok(f) => Ok(f),
                    Err(error) => {
                        let failure = Failure { job: format!("{job}_{}", side.label()), error };
                        if tolerate_fit_failures && failure.error.class() == ErrorClass::Fit {
                            outcome.tolerated.push(failure);
                        } else {
                            outcome.failures.push(failure);
                        }
                        Err(failed_fit(&fit_cfg, curve.len()))
                    }
                };
                fits.push(FitRow { side, zeta_multiple: m, filter, fit });
                signals.push(SignalRow {
                    side,
                    zeta_multiple: m,
                    filter,
                    check: signal_check(&profile, side, 1..=SIGNAL_LAGS.min(max_lag)),
                });
            }
        }
    }
    write_file(&cfg.out, "fits.tsv", |w| write_fits_tsv(w, &fits))?;
    write_file(&cfg.out, "signal.tsv", |w| write_signal_tsv(w, &signals))?;
    finish_run(cfg, &outcome)?;
    Ok(outcome)
}

/// Aftershock counts around main shocks for every secondary threshold.
pub fn omori(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let prepared = prepare(cfg, cfg.intraday_removal)?;
    let max_lag = cfg.max_lag_for(prepared.cadence);
    if max_lag >= prepared.vol.len() {
        return Err(Error::InvalidLag(format!("max lag {max_lag} needs more than {} returns", prepared.vol.len())));
    }
    let fit_cfg = cfg.fit_config();
    start_run(cfg, &prepared)?;

    let mut outcome = Outcome::default();
    let mut rows = Vec::new();
    let m = cfg.main_threshold;
    let main = match events_at(cfg, &prepared, m, None) {
        Ok(e) => Some(e),
        Err(error) => {
            outcome.failures.push(Failure { job: format!("z{m}"), error });
            None
        }
    };
    for &m1 in main.as_ref().map(|_| cfg.zeta1.as_slice()).unwrap_or(&[]) {
        let main = main.as_ref().expect("checked above");
        let job = format!("z{m}_z1{m1}");
        let counts = match omori_counts(&prepared.vol, main, m1, prepared.stats.sigma, max_lag) {
            Ok(c) => c,
            Err(error) => {
                outcome.failures.push(Failure { job, error });
                continue;
            }
        };
        write_file(&cfg.out, &format!("omori_{job}.tsv"), |w| write_omori_tsv(w, &counts))?;

        let errors = if cfg.bootstrap > 0 {
            let zeta1 = m1 * prepared.stats.sigma;
            let result = bootstrap_with(&main.indices(), cfg.bootstrap, cfg.seed, |sample| {
                match omori_from_indices(&prepared.vol, sample, zeta1, max_lag) {
                    Ok(o) => Side::BOTH.map(|s| fit_cfg.fit(o.side(s)).map(|f| f.exponent)),
                    Err(e) => [Err(e.clone()), Err(e)],
                }
            });
            match result {
                Ok(b) => Some(b),
                Err(error) => {
                    outcome.tolerated.push(Failure { job: format!("{job}_bootstrap"), error });
                    None
                }
            }
        } else {
            None
        };
        for side in Side::BOTH {
            let curve = counts.side(side);
            let fit = match fit_cfg.fit(curve) {
                Ok(f) => Ok(PowerLawFit { p_stderr: errors.as_ref().map(|b| b.stderr(side)), ..f }),
                Err(error) => {
                    outcome.failures.push(Failure { job: format!("{job}_{}", side.label()), error });
                    Err(failed_fit(&fit_cfg, curve.len()))
                }
            };
            rows.push(OmoriFitRow { side, zeta_multiple: m, zeta1_multiple: m1, fit });
        }
    }
    write_file(&cfg.out, "omori_fits.tsv", |w| write_omori_fits_tsv(w, &rows))?;
    finish_run(cfg, &outcome)?;
    Ok(outcome)
}

/// Event lists per threshold.
pub fn list_events(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let labels = load_labels(cfg)?;
    let prepared = prepare(cfg, cfg.intraday_removal)?;
    start_run(cfg, &prepared)?;
    let mut outcome = Outcome::default();
    for &m in &cfg.thresholds {
        match events_at(cfg, &prepared, m, labels.as_deref()) {
            Ok(events) => write_file(&cfg.out, &format!("events_z{m}.tsv"), |w| {
                write_events_tsv(w, &events, prepared.returns.calendar.as_deref())
            })?,
            Err(error) => outcome.failures.push(Failure { job: format!("z{m}"), error }),
        }
    }
    finish_run(cfg, &outcome)?;
    Ok(outcome)
}

/// Estimates and writes the intraday pattern only.
pub fn pattern(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let prepared = prepare(cfg, true)?;
    if prepared.pattern.is_none() {
        return Err(Error::DailyCadence);
    }
    start_run(cfg, &prepared)?;
    Ok(Outcome::default())
}
