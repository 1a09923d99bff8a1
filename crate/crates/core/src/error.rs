use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // input data
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("line {line}: timestamp {timestamp} does not increase on the previous row")]
    NonMonotoneTimestamp { line: usize, timestamp: String },
    #[error("line {line}: non-positive price {price}")]
    NonPositivePrice { line: usize, price: f64 },
    #[error("price series needs at least 2 rows, found {0}")]
    TooShort(usize),
    #[error("series is empty")]
    EmptySeries,
    #[error("{0}")]
    Io(String),

    // intraday pattern
    #[error("intraday slot {0} has no observations")]
    EmptySlot(usize),
    #[error("intraday pattern is undefined for daily cadence")]
    DailyCadence,
    #[error("pattern has {pattern} slots but series has {series}")]
    SlotMismatch { pattern: usize, series: usize },

    // events
    #[error("no volatility exceeds the threshold {zeta_abs:e} ({zeta_multiple} sigma)")]
    NoEvents { zeta_multiple: f64, zeta_abs: f64 },
    #[error("threshold multiple must exceed 1, got {0}")]
    InvalidThreshold(f64),
    #[error("event at index {0} has a zero return")]
    ZeroReturnEvent(usize),
    #[error("event index {index} outside series of length {len}")]
    EventOutOfRange { index: usize, len: usize },
    #[error("origin labels can only be matched against daily data")]
    LabelsRequireDaily,
    #[error("label dates without a matching event: {0:?}")]
    LabelDateUnmatched(Vec<NaiveDate>),

    // profiles
    #[error("events are not above the average volatility (Z = {z:e}, sigma = {sigma:e})")]
    DegenerateZ { z: f64, sigma: f64 },
    #[error("invalid lag range: {0}")]
    InvalidLag(String),

    // fitting
    #[error("{bad} of {total} sampled points are non-positive")]
    InsufficientPositivePoints { bad: usize, total: usize },
    #[error("optimizer did not reach tolerance within {0} iterations")]
    NonConvergence(usize),
    #[error("invalid fit range [{t_min}, {t_max}] for a curve of {len} lags")]
    InvalidFitRange { t_min: usize, t_max: usize, len: usize },
    #[error("{failed} of {total} bootstrap replicas failed")]
    BootstrapUnstable { failed: usize, total: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Coarse grouping used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Fit,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            Config(_) | InvalidThreshold(_) | LabelsRequireDaily | InvalidLag(_) => ErrorClass::Config,
            InsufficientPositivePoints { .. }
            | NonConvergence(_)
            | InvalidFitRange { .. }
            | BootstrapUnstable { .. } => ErrorClass::Fit,
            _ => ErrorClass::Data,
        }
    }

    /// Short stable identifier written into failure markers.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            MalformedRow { .. } => "MalformedRow",
            NonMonotoneTimestamp { .. } => "NonMonotoneTimestamp",
            NonPositivePrice { .. } => "NonPositivePrice",
            TooShort(_) => "TooShort",
            EmptySeries => "EmptySeries",
            Io(_) => "Io",
            EmptySlot(_) => "EmptySlot",
            DailyCadence => "DailyCadence",
            SlotMismatch { .. } => "SlotMismatch",
            NoEvents { .. } => "NoEvents",
            InvalidThreshold(_) => "InvalidThreshold",
            ZeroReturnEvent(_) => "ZeroReturnEvent",
            EventOutOfRange { .. } => "EventOutOfRange",
            LabelsRequireDaily => "LabelsRequireDaily",
            LabelDateUnmatched(_) => "LabelDateUnmatched",
            DegenerateZ { .. } => "DegenerateZ",
            InvalidLag(_) => "InvalidLag",
            InsufficientPositivePoints { .. } => "InsufficientPositivePoints",
            NonConvergence(_) => "NonConvergence",
            InvalidFitRange { .. } => "InvalidFitRange",
            BootstrapUnstable { .. } => "BootstrapUnstable",
            Config(_) => "Config",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
