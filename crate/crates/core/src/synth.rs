//! Seeded synthetic return series with known structure.
//!
//! The planted generator places main shocks as a Bernoulli process and lets
//! every shock raise the expected volatility of its neighbours by
//! `B (d + tau)^(-p)` at distance `d`, up to a finite window. Contributions
//! of overlapping shocks add. With independently placed shocks the excess
//! of the conditional mean over the global mean is then exactly the kernel,
//! so the event-conditioned profile of the shocks is `(t + tau)^(-p)` up to
//! normalization for every lag inside the window.

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, NaiveTime, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::{Cadence, PriceRecord, ReturnSeries};
use crate::error::{Error, Result};

/// `E|X| / std(X)` for a zero-mean Gaussian.
const HALF_NORMAL_MEAN: f64 = 0.797_884_560_802_865_4;

/// Relaxation kernel on one side of a shock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSide {
    pub boost: f64,
    pub exponent: f64,
    pub offset: f64,
}

impl KernelSide {
    fn weights(&self, window: usize) -> Vec<f64> {
        (1..=window).map(|d| self.boost * (d as f64 + self.offset).powf(-self.exponent)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedRelaxationSpec {
    pub n: usize,
    pub sigma0: f64,
    /// Expected main shocks per 100 000 steps.
    pub shock_rate: f64,
    /// Kernel applied before each shock (drives `v-`).
    pub before: KernelSide,
    /// Kernel applied after each shock (drives `v+`).
    pub after: KernelSide,
    /// Shock magnitude in units of `sigma0`.
    pub shock_magnitude: f64,
    /// Largest distance a shock reaches.
    pub window: usize,
    pub seed: u64,
}

impl PlantedRelaxationSpec {
    pub fn symmetric(n: usize, boost: f64, exponent: f64, offset: f64, seed: u64) -> Self {
        let side = KernelSide { boost, exponent, offset };
        Self {
            n,
            sigma0: 1e-3,
            shock_rate: 50.0,
            before: side,
            after: side,
            shock_magnitude: 30.0,
            window: 2000,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n < 2 {
            return bad(format!("series length must be at least 2, got {}", self.n));
        }
        if !(self.sigma0 > 0.0) || !(self.shock_rate > 0.0) || !(self.shock_magnitude > 0.0) || self.window == 0 {
            return bad("sigma0, shock rate, shock magnitude and window must be positive".into());
        }
        if self.shock_rate > 1e5 {
            return bad("shock rate cannot exceed one per step".into());
        }
        for side in [self.before, self.after] {
            if !(side.boost >= 0.0) || !(side.offset >= 0.0) {
                return bad("boost and offset must be non-negative".into());
            }
            if !(side.exponent > 0.0 && side.exponent < 1.5) {
                return bad(format!("exponent must lie in (0, 1.5), got {}", side.exponent));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSeries {
    pub returns: ReturnSeries,
    /// Positions of the main shocks.
    pub shocks: Vec<usize>,
}

/// i.i.d. zero-mean Gaussian returns with `E|R| = sigma0`.
pub fn gen_iid_gaussian(n: usize, sigma0: f64, seed: u64) -> ReturnSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = sigma0 / HALF_NORMAL_MEAN;
    let values = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            scale * z
        })
        .collect();
    ReturnSeries::from_values(values, 1)
}

pub fn gen_planted_relaxation(spec: &PlantedRelaxationSpec) -> Result<PlantedSeries> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let rate = spec.shock_rate / 1e5;
    let shocks: Vec<usize> = (0..n).filter(|_| rng.random::<f64>() < rate).collect();

    let after = spec.after.weights(spec.window);
    let before = spec.before.weights(spec.window);
    let mut level = vec![1.0; n];
    for &s in &shocks {
        for (d, w) in after.iter().enumerate().take(n - s - 1) {
            level[s + d + 1] += w;
        }
        for (d, w) in before.iter().enumerate().take(s) {
            level[s - d - 1] += w;
        }
    }

    let scale = spec.sigma0 / HALF_NORMAL_MEAN;
    let shock_size = spec.shock_magnitude * spec.sigma0;
    let mut is_shock = vec![false; n];
    for &s in &shocks {
        is_shock[s] = true;
    }
    let values = (0..n)
        .map(|i| {
            if is_shock[i] {
                if rng.random::<bool>() {
                    shock_size
                } else {
                    -shock_size
                }
            } else {
                let z: f64 = StandardNormal.sample(&mut rng);
                scale * level[i] * z
            }
        })
        .collect();
    Ok(PlantedSeries { returns: ReturnSeries::from_values(values, 1), shocks })
}

/// Multiplies each return by the factor of its slot. A base without intraday
/// structure is assigned slots `i mod len(factors)`.
pub fn gen_intraday_modulated(base: &ReturnSeries, factors: &[f64]) -> Result<ReturnSeries> {
    if factors.is_empty() || factors.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
        return Err(Error::Config("intraday factors must be positive".into()));
    }
    let spd = factors.len();
    let mut out = if base.slots_per_day == 1 {
        let mut r = ReturnSeries::from_values(base.values.clone(), spd);
        r.calendar = base.calendar.clone();
        r
    } else if base.slots_per_day == spd {
        base.clone()
    } else {
        return Err(Error::SlotMismatch { pattern: spd, series: base.slots_per_day });
    };
    for (v, &s) in out.values.iter_mut().zip(&out.slots) {
        *v *= factors[s as usize];
    }
    Ok(out)
}

/// A smooth U-shaped intraday profile: high at the open and close.
pub fn u_shaped_factors(slots_per_day: usize) -> Vec<f64> {
    (0..slots_per_day)
        .map(|s| {
            let x = (s as f64 + 0.5) / slots_per_day as f64 - 0.5;
            0.6 + 4.0 * x * x
        })
        .collect()
}

/// Timestamps for `count` records: weekdays from `start`, either one per day
/// or `slots_per_day` per day spaced by the cadence from 09:30.
pub fn synthetic_calendar(
    count: usize,
    cadence: Cadence,
    slots_per_day: usize,
    start: NaiveDate,
) -> Vec<NaiveDateTime> {
    let days = start.iter_days().filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun));
    match cadence {
        Cadence::Daily => days.take(count).map(|d| d.and_time(NaiveTime::MIN)).collect(),
        Cadence::Minutes(step) => {
            let spd = slots_per_day.max(1);
            let session = Duration::minutes(step as i64 * spd as i64);
            let open = if session <= Duration::hours(14) {
                NaiveTime::from_hms_opt(9, 30, 0).unwrap_or(NaiveTime::MIN)
            } else {
                NaiveTime::MIN
            };
            let mut out = Vec::with_capacity(count);
            'outer: for d in days {
                let t0 = d.and_time(open);
                for k in 0..spd {
                    if out.len() == count {
                        break 'outer;
                    }
                    out.push(t0 + Duration::minutes(step as i64 * k as i64));
                }
            }
            out
        }
    }
}

/// Prices `P(0) = p0`, `P(i+1) = P(i) exp(R(i))` on the given calendar
/// (which needs one more entry than there are returns).
pub fn prices_from_returns(returns: &ReturnSeries, p0: f64, calendar: &[NaiveDateTime]) -> Result<Vec<PriceRecord>> {
    if calendar.len() != returns.len() + 1 {
        return Err(Error::Config(format!(
            "calendar has {} entries for {} returns",
            calendar.len(),
            returns.len()
        )));
    }
    let mut log_p = p0.ln();
    let mut out = Vec::with_capacity(calendar.len());
    out.push(PriceRecord { timestamp: calendar[0], price: p0 });
    for (r, &ts) in returns.values.iter().zip(&calendar[1..]) {
        log_p += r;
        out.push(PriceRecord { timestamp: ts, price: log_p.exp() });
    }
    Ok(out)
}
