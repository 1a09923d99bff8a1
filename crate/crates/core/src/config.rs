//! Run configuration: defaults, a flat `key = value` file format and the
//! echo written next to every run's outputs.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::data::Cadence;
use crate::error::{Error, Result};
use crate::fitting::{FitConfig, FitMethod, TauMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Surrogate {
    None,
    Shuffle,
}

/// Which event subsets are analyzed next to the full set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    All,
    Sign,
    Origin,
}

macro_rules! keyword_enum {
    ($ty:ident { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($ty::$variant => $name),+ })
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.trim() {
                    $($name => Ok($ty::$variant),)+
                    other => Err(Error::Config(format!(
                        concat!("unknown ", stringify!($ty), " '{}'"), other
                    ))),
                }
            }
        }
    };
}

keyword_enum!(Surrogate { None => "none", Shuffle => "shuffle" });
keyword_enum!(Split { All => "all", Sign => "sign", Origin => "origin" });

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    /// Inferred from the timestamps when absent.
    pub cadence: Option<Cadence>,
    /// Inferred from the calendar when absent.
    pub slots_per_day: Option<usize>,
    pub thresholds: Vec<f64>,
    pub intraday_removal: bool,
    pub drop_overnight: bool,
    pub labels: Option<PathBuf>,
    pub min_separation: Option<usize>,
    /// Defaults to 1000 for intraday data and 100 for daily data.
    pub max_lag: Option<usize>,
    pub fit_min: usize,
    pub fit_max: Option<usize>,
    pub tail_min: Option<usize>,
    pub tau: TauMode,
    pub method: FitMethod,
    /// Number of bootstrap replicas; 0 disables error estimation.
    pub bootstrap: usize,
    pub seed: u64,
    pub surrogate: Surrogate,
    pub split: Split,
    pub main_threshold: f64,
    pub zeta1: Vec<f64>,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            cadence: None,
            slots_per_day: None,
            thresholds: vec![2.0, 4.0, 6.0, 8.0],
            intraday_removal: true,
            drop_overnight: false,
            labels: None,
            min_separation: None,
            max_lag: None,
            fit_min: 5,
            fit_max: None,
            tail_min: None,
            tau: TauMode::Free,
            method: FitMethod::FullFit,
            bootstrap: 0,
            seed: 0,
            surrogate: Surrogate::None,
            split: Split::All,
            main_threshold: 12.0,
            zeta1: vec![2.0, 3.0, 4.0, 5.0],
            out: PathBuf::from("out"),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("invalid value '{value}' for {key}")))
}

fn optional<T: FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    if value.is_empty() {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

fn multiples(key: &str, value: &str) -> Result<Vec<f64>> {
    let mut out = value
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| parse::<f64>(key, s))
        .collect::<Result<Vec<_>>>()?;
    if out.is_empty() {
        return Err(Error::Config(format!("{key} needs at least one value")));
    }
    if let Some(bad) = out.iter().find(|m| !(**m > 0.0) || !m.is_finite()) {
        return Err(Error::InvalidThreshold(*bad));
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn show<T: fmt::Display>(x: &Option<T>) -> String {
    x.as_ref().map(T::to_string).unwrap_or_default()
}

impl RunConfig {
    /// Sets one field from its textual form. An empty value clears optional
    /// fields.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "input" => self.input = optional(key, value)?,
            "cadence" => self.cadence = optional(key, value)?,
            "slots_per_day" => self.slots_per_day = optional(key, value)?,
            "thresholds" => self.thresholds = multiples(key, value)?,
            "intraday_removal" => self.intraday_removal = parse(key, value)?,
            "drop_overnight" => self.drop_overnight = parse(key, value)?,
            "labels" => self.labels = optional(key, value)?,
            "min_separation" => self.min_separation = optional(key, value)?,
            "max_lag" => self.max_lag = optional(key, value)?,
            "fit_min" => self.fit_min = parse(key, value)?,
            "fit_max" => self.fit_max = optional(key, value)?,
            "tail_min" => self.tail_min = optional(key, value)?,
            "tau" => self.tau = parse(key, value)?,
            "method" => self.method = parse(key, value)?,
            "bootstrap" => self.bootstrap = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "surrogate" => self.surrogate = parse(key, value)?,
            "split" => self.split = parse(key, value)?,
            "main_threshold" => self.main_threshold = parse(key, value)?,
            "zeta1" => self.zeta1 = multiples(key, value)?,
            "out" => self.out = parse(key, value)?,
            other => return Err(Error::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Applies a `key = value` file on top of the current values. Blank
    /// lines and lines starting with `#` are ignored; dashes in keys are
    /// accepted as underscores.
    pub fn apply_file_text(&mut self, text: &str) -> Result<()> {
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("config line {} is not 'key = value'", k + 1)))?;
            self.set(&key.trim().replace('-', "_"), value)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(bad) = self.thresholds.iter().chain(&[self.main_threshold]).find(|m| !(**m > 1.0)) {
            return Err(Error::InvalidThreshold(*bad));
        }
        if let Some(bad) = self.zeta1.iter().find(|m1| **m1 >= self.main_threshold) {
            return Err(Error::Config(format!(
                "aftershock threshold {bad} must be below the main threshold {}",
                self.main_threshold
            )));
        }
        if self.fit_min == 0 {
            return Err(Error::Config("fit_min must be at least 1".into()));
        }
        if let Some(hi) = self.fit_max {
            if hi <= self.fit_min {
                return Err(Error::Config(format!("fit_max {hi} must exceed fit_min {}", self.fit_min)));
            }
        }
        if self.bootstrap != 0 && self.bootstrap < 50 {
            return Err(Error::Config(format!("bootstrap needs 0 or at least 50 replicas, got {}", self.bootstrap)));
        }
        if self.slots_per_day == Some(0) || self.max_lag == Some(0) || self.min_separation == Some(0) {
            return Err(Error::Config("slots_per_day, max_lag and min_separation must be positive".into()));
        }
        if self.split == Split::Origin && self.labels.is_none() {
            return Err(Error::Config("split by origin needs a label file".into()));
        }
        Ok(())
    }

    pub fn max_lag_for(&self, cadence: Cadence) -> usize {
        self.max_lag.unwrap_or(if cadence.is_daily() { 100 } else { 1000 })
    }

    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            t_min: self.fit_min,
            t_max: self.fit_max,
            tau_mode: self.tau,
            method: self.method,
            tail_min: self.tail_min,
            ..FitConfig::default()
        }
    }

    /// Every setting except the output directory, in a form
    /// [`apply_file_text`](Self::apply_file_text) reads back.
    pub fn echo(&self) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let pairs = [
            ("input", path(&self.input)),
            ("cadence", show(&self.cadence)),
            ("slots_per_day", show(&self.slots_per_day)),
            ("thresholds", join(&self.thresholds)),
            ("intraday_removal", self.intraday_removal.to_string()),
            ("drop_overnight", self.drop_overnight.to_string()),
            ("labels", path(&self.labels)),
            ("min_separation", show(&self.min_separation)),
            ("max_lag", show(&self.max_lag)),
            ("fit_min", self.fit_min.to_string()),
            ("fit_max", show(&self.fit_max)),
            ("tail_min", show(&self.tail_min)),
            ("tau", self.tau.to_string()),
            ("method", self.method.to_string()),
            ("bootstrap", self.bootstrap.to_string()),
            ("seed", self.seed.to_string()),
            ("surrogate", self.surrogate.to_string()),
            ("split", self.split.to_string()),
            ("main_threshold", self.main_threshold.to_string()),
            ("zeta1", join(&self.zeta1)),
        ];
        pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
