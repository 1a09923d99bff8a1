//! Offset power-law fits of cumulative profiles.
//!
//! The model for a cumulative curve is
//!
//! ```text
//! V(t) = A * [(t + tau)^(1-p) - tau^(1-p)] / (1 - p)
//! ```
//!
//! which is the integral of `A * (t + tau)^(-p)`, so `A` keeps its meaning
//! (and sign) across `p = 1`. For `|1 - p| < 1e-6` the logarithmic limit
//! `A * ln(1 + t / tau)` is used.
//!
//! The fit minimizes the variance of `ln V_data - ln shape(t; p, tau)` over
//! a log-spaced subsample of lags; `ln A` is the mean of that residual.

mod bootstrap;
pub mod simplex;

use std::fmt;
use std::str::FromStr;

pub use bootstrap::{bootstrap_errors, bootstrap_with, BootstrapErrors};

use crate::error::{Error, Result};
use simplex::NelderMead;

/// Below this distance from 1 the exponent uses the logarithmic limit.
pub const LOG_LIMIT_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TauMode {
    Free,
    FixedZero,
}

impl FromStr for TauMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "free" => Ok(TauMode::Free),
            "zero" | "fixed_zero" => Ok(TauMode::FixedZero),
            other => Err(Error::Config(format!("unknown tau mode '{other}'"))),
        }
    }
}

impl fmt::Display for TauMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TauMode::Free => "free",
            TauMode::FixedZero => "zero",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    FullFit,
    TailSlope,
}

impl fmt::Display for FitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitMethod::FullFit => "full_fit",
            FitMethod::TailSlope => "tail_slope",
        })
    }
}

impl FromStr for FitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full_fit" => Ok(FitMethod::FullFit),
            "tail_slope" => Ok(FitMethod::TailSlope),
            other => Err(Error::Config(format!("unknown fit method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawFit {
    /// For `full_fit` the amplitude of the rate `A (t + tau)^(-p)`; for
    /// `tail_slope` the prefactor of `t^(1-p)`.
    pub amplitude: f64,
    pub exponent: f64,
    pub tau: f64,
    pub t_min: usize,
    pub t_max: usize,
    pub rms_log_residual: f64,
    pub p_stderr: Option<f64>,
    pub method: FitMethod,
}

impl PowerLawFit {
    /// Model value at lag `t`.
    pub fn evaluate(&self, t: f64) -> f64 {
        match self.method {
            FitMethod::FullFit => self.amplitude * shape(t, self.exponent, self.tau).unwrap_or(f64::NAN),
            FitMethod::TailSlope => self.amplitude * t.powf(1.0 - self.exponent),
        }
    }
}

/// `[(t + tau)^(1-p) - tau^(1-p)] / (1-p)`, or `ln(1 + t/tau)` near `p = 1`.
/// `None` where the expression is undefined (`tau = 0` with `p >= 1`).
pub fn shape(t: f64, p: f64, tau: f64) -> Option<f64> {
    let eps = 1.0 - p;
    let value = if tau > 0.0 {
        let l = (t / tau).ln_1p();
        if eps.abs() < LOG_LIMIT_EPS {
            l
        } else {
            // tau^eps * (exp(eps * l) - 1) / eps, without cancellation
            tau.powf(eps) * (eps * l).exp_m1() / eps
        }
    } else if eps >= LOG_LIMIT_EPS {
        t.powf(eps) / eps
    } else {
        return None;
    };
    (value.is_finite() && value > 0.0).then_some(value)
}

/// Integer lags spread evenly in `ln t` over `[t_min, t_max]`, at least
/// `target` distinct values (or every lag when the range is shorter).
pub fn log_spaced_lags(t_min: usize, t_max: usize, target: usize) -> Vec<usize> {
    let span = t_max - t_min + 1;
    if span <= target {
        return (t_min..=t_max).collect();
    }
    let mut k = target;
    loop {
        let (a, b) = ((t_min as f64).ln(), (t_max as f64).ln());
        let mut lags: Vec<usize> = (0..k)
            .map(|i| (a + (b - a) * i as f64 / (k - 1) as f64).exp().round() as usize)
            .map(|t| t.clamp(t_min, t_max))
            .collect();
        lags.dedup();
        if lags.len() >= target || k >= span {
            return lags;
        }
        k += (target - lags.len()).max(1);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub t_min: usize,
    /// Defaults to the last lag of the curve.
    pub t_max: Option<usize>,
    pub tau_mode: TauMode,
    /// Minimum number of log-spaced sample lags.
    pub samples: usize,
    pub method: FitMethod,
    /// Lower end of the tail window for `tail_slope`; defaults to `t_max / 5`.
    pub tail_min: Option<usize>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { t_min: 5, t_max: None, tau_mode: TauMode::Free, samples: 40, method: FitMethod::FullFit, tail_min: None }
    }
}

impl FitConfig {
    pub fn with_method(self, method: FitMethod) -> Self {
        Self { method, ..self }
    }

    pub fn range(&self, curve_len: usize) -> (usize, usize) {
        let t_max = self.t_max.unwrap_or(curve_len);
        match self.method {
            FitMethod::FullFit => (self.t_min, t_max),
            FitMethod::TailSlope => (self.tail_min.unwrap_or((t_max / 5).max(self.t_min)), t_max),
        }
    }

    /// Fits a cumulative curve whose element `k` is the value at lag `k + 1`.
    pub fn fit(&self, curve: &[f64]) -> Result<PowerLawFit> {
        let (lo, hi) = self.range(curve.len());
        match self.method {
            FitMethod::FullFit => fit_cumulative(curve, lo, hi, self.tau_mode, self.samples),
            FitMethod::TailSlope => tail_slope(curve, lo, hi),
        }
    }
}

fn check_range(t_min: usize, t_max: usize, len: usize) -> Result<()> {
    if t_min < 1 || t_max <= t_min || t_max > len {
        return Err(Error::InvalidFitRange { t_min, t_max, len });
    }
    Ok(())
}

/// Full offset power-law fit over `[t_min, t_max]`.
pub fn fit_cumulative(
    curve: &[f64],
    t_min: usize,
    t_max: usize,
    tau_mode: TauMode,
    samples: usize,
) -> Result<PowerLawFit> {
    check_range(t_min, t_max, curve.len())?;
    let lags = log_spaced_lags(t_min, t_max, samples.max(2));
    let total = lags.len();
    let (ts, ys): (Vec<f64>, Vec<f64>) = lags
        .iter()
        .map(|&t| (t as f64, curve[t - 1]))
        .filter(|(_, v)| v.is_finite() && *v > 0.0)
        .map(|(t, v)| (t, v.ln()))
        .unzip();
    let bad = total - ts.len();
    if bad * 5 > total || ts.len() < 10 {
        return Err(Error::InsufficientPositivePoints { bad, total });
    }

    let objective = |p: f64, tau: f64| -> (f64, f64) {
        let tau = tau.max(0.0);
        let mut resid = Vec::with_capacity(ts.len());
        for (&t, &y) in ts.iter().zip(&ys) {
            match shape(t, p, tau) {
                Some(g) => resid.push(y - g.ln()),
                None => return (f64::INFINITY, f64::NAN),
            }
        }
        let k = resid.len() as f64;
        let mean = resid.iter().sum::<f64>() / k;
        let var = resid.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / k;
        (var, mean)
    };

    let nm = NelderMead::default();
    let grid_p: Vec<f64> = (0..5).map(|i| 0.05 + (1.2 - 0.05) * i as f64 / 4.0).collect();
    let grid_tau: Vec<f64> = match tau_mode {
        TauMode::Free => (0..5).map(|i| 50.0 * i as f64 / 4.0).collect(),
        TauMode::FixedZero => vec![0.0],
    };
    let mut starts: Vec<(f64, f64, f64)> = grid_p
        .iter()
        .flat_map(|&p| grid_tau.iter().map(move |&tau| (p, tau)))
        .map(|(p, tau)| (objective(p, tau).0, p, tau))
        .filter(|s| s.0.is_finite())
        .collect();
    starts.sort_by(|a, b| a.0.total_cmp(&b.0));
    starts.truncate(5);

    let run = |p0: f64, tau0: f64, dp: f64, dtau: f64| match tau_mode {
        TauMode::Free => {
            nm.minimize(|x: &[f64]| objective(x[0], x[1]).0, &[p0, tau0], &[dp, dtau])
        }
        TauMode::FixedZero => {
            let mut m = nm.minimize(|x: &[f64]| objective(x[0], 0.0).0, &[p0], &[dp]);
            m.x.push(0.0);
            m
        }
    };

    let mut best: Option<simplex::Minimum> = None;
    for &(_, p0, tau0) in &starts {
        let m = run(p0, tau0, 0.05, if tau0 > 0.0 { 0.2 * tau0 } else { 1.0 });
        if best.as_ref().map_or(true, |b| m.f < b.f) {
            best = Some(m);
        }
    }
    let Some(first) = best else {
        return Err(Error::InsufficientPositivePoints { bad, total });
    };
    // restart from the optimum to escape a collapsed simplex
    let (p1, tau1) = (first.x[0], first.x[1].max(0.0));
    let polished = run(p1, tau1, 1e-3 * (1.0 + p1.abs()), 1e-3 * (1.0 + tau1));
    let m = if polished.f <= first.f { polished } else { first };
    if !m.converged || !m.f.is_finite() {
        return Err(Error::NonConvergence(nm.max_iter));
    }

    let (p, tau) = (m.x[0], m.x[1].max(0.0));
    let (var, log_a) = objective(p, tau);
    Ok(PowerLawFit {
        amplitude: log_a.exp(),
        exponent: p,
        tau,
        t_min,
        t_max,
        rms_log_residual: var.sqrt(),
        p_stderr: None,
        method: FitMethod::FullFit,
    })
}

/// Ordinary least squares of `ln V` on `ln t` over every lag in the window.
pub fn tail_slope(curve: &[f64], t_lo: usize, t_hi: usize) -> Result<PowerLawFit> {
    check_range(t_lo, t_hi, curve.len())?;
    let total = t_hi - t_lo + 1;
    let pts: Vec<(f64, f64)> = (t_lo..=t_hi)
        .map(|t| (t as f64, curve[t - 1]))
        .filter(|(_, v)| v.is_finite() && *v > 0.0)
        .map(|(t, v)| (t.ln(), v.ln()))
        .collect();
    if pts.len() < 5 {
        return Err(Error::InsufficientPositivePoints { bad: total - pts.len(), total });
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(PowerLawFit {
        amplitude: intercept.exp(),
        exponent: 1.0 - slope,
        tau: 0.0,
        t_min: t_lo,
        t_max: t_hi,
        rms_log_residual: (rss / k).sqrt(),
        p_stderr: None,
        method: FitMethod::TailSlope,
    })
}

/// `value(err)` with one digit of standard error on the last quoted digit,
/// e.g. `0.11(1)`.
pub fn format_with_error(value: f64, stderr: Option<f64>) -> String {
    let Some(se) = stderr.filter(|s| s.is_finite() && *s > 0.0) else {
        return format!("{value:.2}");
    };
    let mut decimals = -se.log10().floor() as i32;
    let mut digit = (se * 10f64.powi(decimals)).round();
    if digit >= 10.0 {
        decimals -= 1;
        digit = (se * 10f64.powi(decimals)).round();
    }
    if decimals <= 0 {
        let scale = 10f64.powi(-decimals);
        return format!("{}({})", (value / scale).round() * scale, digit * scale);
    }
    format!("{:.*}({})", decimals as usize, value, digit as i64)
}
