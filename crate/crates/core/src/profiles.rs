//! Event-conditioned volatility profiles.
//!
//! For events `t'` and lag `t`,
//!
//! ```text
//! v±(t) = (<|R(t' ± t)|>_c - sigma) / Z,    Z = <|R(t')|>_c - sigma
//! ```
//!
//! where `<..>_c` averages over the events whose shifted index stays inside
//! the series (so the per-lag denominator can shrink near the edges). The
//! cumulative `V±(t)` sums lags `1..=t`; lag 0 is excluded.
//!
//! Per-lag sums are compensated and taken over mirrored pairs of the sorted
//! events, so reversing the series (which reverses the event order) makes
//! the time-reversal identity `v+(reversed) == v-(original)` hold bit for bit.

use crate::data::{mean_volatility, VolatilitySeries};
use crate::error::{Error, Result};
use crate::events::EventSet;
use crate::numeric::{exact_sum, mirrored_sum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Minus, Side::Plus];

    pub fn label(self) -> &'static str {
        match self {
            Side::Minus => "minus",
            Side::Plus => "plus",
        }
    }

    fn shift(self, index: usize, lag: usize, len: usize) -> Option<usize> {
        match self {
            Side::Minus => index.checked_sub(lag),
            Side::Plus => index.checked_add(lag).filter(|&j| j < len),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionedProfile {
    pub max_lag: usize,
    /// Indexed by lag `0..=max_lag`.
    pub v_minus: Vec<f64>,
    pub v_plus: Vec<f64>,
    pub counts_minus: Vec<usize>,
    pub counts_plus: Vec<usize>,
    /// Standard error of each `v` value from the spread across events.
    pub se_minus: Vec<f64>,
    pub se_plus: Vec<f64>,
    pub z: f64,
    pub sigma: f64,
    pub n_events: usize,
}

impl ConditionedProfile {
    pub fn side(&self, side: Side) -> &[f64] {
        match side {
            Side::Minus => &self.v_minus,
            Side::Plus => &self.v_plus,
        }
    }

    pub fn counts(&self, side: Side) -> &[usize] {
        match side {
            Side::Minus => &self.counts_minus,
            Side::Plus => &self.counts_plus,
        }
    }

    pub fn standard_errors(&self, side: Side) -> &[f64] {
        match side {
            Side::Minus => &self.se_minus,
            Side::Plus => &self.se_plus,
        }
    }
}

pub fn remanent_profile(vol: &VolatilitySeries, events: &EventSet, max_lag: usize) -> Result<ConditionedProfile> {
    let stats = mean_volatility(vol)?;
    profile_from_indices(vol, &events.indices(), stats.sigma, max_lag)
}

/// Profile over an arbitrary multiset of event positions (bootstrap replicas
/// repeat positions).
pub fn profile_from_indices(
    vol: &VolatilitySeries,
    indices: &[usize],
    sigma: f64,
    max_lag: usize,
) -> Result<ConditionedProfile> {
    let n = vol.len();
    check_lag(max_lag, n)?;
    if indices.is_empty() {
        return Err(Error::NoEvents { zeta_multiple: f64::NAN, zeta_abs: f64::NAN });
    }
    if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
        return Err(Error::EventOutOfRange { index: bad, len: n });
    }

    let at_events: Vec<f64> = indices.iter().map(|&i| vol.values[i]).collect();
    let z = exact_sum(at_events.iter().copied()) / indices.len() as f64 - sigma;
    if !(z > 1e-12 * sigma) || !z.is_finite() {
        return Err(Error::DegenerateZ { z, sigma });
    }

    let build = |side: Side| {
        let mut v = Vec::with_capacity(max_lag + 1);
        let mut counts = Vec::with_capacity(max_lag + 1);
        let mut se = Vec::with_capacity(max_lag + 1);
        let mut buf = Vec::with_capacity(indices.len());
        let mut sq = Vec::with_capacity(indices.len());
        for lag in 0..=max_lag {
            buf.clear();
            buf.extend(indices.iter().filter_map(|&i| side.shift(i, lag, n)).map(|j| vol.values[j]));
            counts.push(buf.len());
            if buf.is_empty() {
                v.push(f64::NAN);
                se.push(f64::NAN);
                continue;
            }
            let k = buf.len() as f64;
            let mean = mirrored_sum(&buf) / k;
            v.push(if lag == 0 { 1.0 } else { (mean - sigma) / z });
            sq.clear();
            sq.extend(buf.iter().map(|x| (x - mean) * (x - mean)));
            let ss = mirrored_sum(&sq);
            se.push(if buf.len() > 1 { (ss / (k - 1.0) / k).sqrt() / z } else { f64::NAN });
        }
        (v, counts, se)
    };
    let (v_minus, counts_minus, se_minus) = build(Side::Minus);
    let (v_plus, counts_plus, se_plus) = build(Side::Plus);

    Ok(ConditionedProfile {
        max_lag,
        v_minus,
        v_plus,
        counts_minus,
        counts_plus,
        se_minus,
        se_plus,
        z,
        sigma,
        n_events: indices.len(),
    })
}

fn check_lag(max_lag: usize, n: usize) -> Result<()> {
    if max_lag == 0 {
        return Err(Error::InvalidLag("maximum lag must be at least 1".into()));
    }
    if max_lag >= n {
        return Err(Error::InvalidLag(format!("maximum lag {max_lag} not below series length {n}")));
    }
    Ok(())
}

/// `V(t) = sum_{s=1..t} v(s)` for `t = 1..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeProfile {
    /// Element `k` holds `V(k + 1)`.
    pub minus: Vec<f64>,
    pub plus: Vec<f64>,
}

impl CumulativeProfile {
    pub fn side(&self, side: Side) -> &[f64] {
        match side {
            Side::Minus => &self.minus,
            Side::Plus => &self.plus,
        }
    }
}

pub fn cumulative(profile: &ConditionedProfile) -> CumulativeProfile {
    let run = |v: &[f64]| {
        v[1..]
            .iter()
            .scan(0.0, |acc, x| {
                *acc += x;
                Some(*acc)
            })
            .collect()
    };
    CumulativeProfile { minus: run(&profile.v_minus), plus: run(&profile.v_plus) }
}

/// Mean number of exceedances of `zeta1` within `t` steps before/after each
/// main shock.
#[derive(Debug, Clone, PartialEq)]
pub struct OmoriProfile {
    /// Element `k` holds `N(k + 1)`.
    pub n_minus: Vec<f64>,
    pub n_plus: Vec<f64>,
    pub zeta_main: f64,
    pub zeta1: f64,
    pub n_mainshocks: usize,
}

impl OmoriProfile {
    pub fn side(&self, side: Side) -> &[f64] {
        match side {
            Side::Minus => &self.n_minus,
            Side::Plus => &self.n_plus,
        }
    }
}

pub fn omori_counts(
    vol: &VolatilitySeries,
    mainshocks: &EventSet,
    m1: f64,
    sigma: f64,
    max_lag: usize,
) -> Result<OmoriProfile> {
    if !(m1 > 0.0) || m1 >= mainshocks.zeta_multiple {
        return Err(Error::Config(format!(
            "aftershock threshold {m1} must be positive and below the main threshold {}",
            mainshocks.zeta_multiple
        )));
    }
    let mut out = omori_from_indices(vol, &mainshocks.indices(), m1 * sigma, max_lag)?;
    out.zeta_main = mainshocks.zeta_abs;
    Ok(out)
}

pub fn omori_from_indices(
    vol: &VolatilitySeries,
    indices: &[usize],
    zeta1: f64,
    max_lag: usize,
) -> Result<OmoriProfile> {
    let n = vol.len();
    check_lag(max_lag, n)?;
    if indices.is_empty() {
        return Err(Error::NoEvents { zeta_multiple: f64::NAN, zeta_abs: f64::NAN });
    }
    let count = |side: Side| {
        // integer totals keep the mean independent of event order
        let mut totals = vec![0u64; max_lag];
        for &i in indices {
            let mut running = 0u64;
            for lag in 1..=max_lag {
                if let Some(j) = side.shift(i, lag, n) {
                    if vol.values[j] > zeta1 {
                        running += 1;
                    }
                }
                totals[lag - 1] += running;
            }
        }
        totals.into_iter().map(|c| c as f64 / indices.len() as f64).collect()
    };
    Ok(OmoriProfile {
        n_minus: count(Side::Minus),
        n_plus: count(Side::Plus),
        zeta_main: f64::NAN,
        zeta1,
        n_mainshocks: indices.len(),
    })
}

/// Whether the mean of `v(t)` over a lag window is distinguishable from 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalCheck {
    pub mean_v: f64,
    pub stderr: f64,
    pub z_score: f64,
}

impl SignalCheck {
    pub fn consistent_with_zero(&self) -> bool {
        self.z_score.abs() < 3.0
    }
}

/// Treats lags as independent, which holds under the shuffled null.
pub fn signal_check(profile: &ConditionedProfile, side: Side, lags: std::ops::RangeInclusive<usize>) -> SignalCheck {
    let v = profile.side(side);
    let se = profile.standard_errors(side);
    let mut sum = 0.0;
    let mut var = 0.0;
    let mut k = 0usize;
    for t in lags {
        if t < v.len() && v[t].is_finite() && se[t].is_finite() {
            sum += v[t];
            var += se[t] * se[t];
            k += 1;
        }
    }
    let mean_v = sum / k as f64;
    let stderr = var.sqrt() / k as f64;
    SignalCheck { mean_v, stderr, z_score: mean_v / stderr }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{absolute_volatility, ReturnSeries};
    use crate::events::{select_events, Event, Origin};

    fn vol(xs: &[f64]) -> VolatilitySeries {
        absolute_volatility(&ReturnSeries::from_values(xs.to_vec(), 1))
    }

    fn event_set(idx: &[usize]) -> EventSet {
        EventSet {
            events: idx
                .iter()
                .map(|&index| Event { index, magnitude: 0.0, sign: None, origin: Origin::Unlabeled })
                .collect(),
            zeta_multiple: 12.0,
            zeta_abs: 0.0,
        }
    }

    /// Independent reference: loops over every position and asks how far it
    /// sits from each event.
    fn reference(xs: &[f64], events: &[usize], max_lag: usize) -> (Vec<f64>, Vec<f64>) {
        let n = xs.len();
        let sigma = xs.iter().map(|x| x.abs()).sum::<f64>() / n as f64;
        let z = events.iter().map(|&e| xs[e].abs()).sum::<f64>() / events.len() as f64 - sigma;
        let mut sums = [vec![0.0; max_lag + 1], vec![0.0; max_lag + 1]];
        let mut counts = [vec![0usize; max_lag + 1], vec![0usize; max_lag + 1]];
        for &e in events {
            for u in 0..n {
                let d = u as i64 - e as i64;
                let (side, lag) = if d <= 0 { (0, (-d) as usize) } else { (1, d as usize) };
                if lag <= max_lag {
                    sums[side][lag] += xs[u].abs();
                    counts[side][lag] += 1;
                    if d == 0 {
                        sums[1][0] += xs[u].abs();
                        counts[1][0] += 1;
                    }
                }
            }
        }
        let v = |s: usize| (0..=max_lag).map(|t| (sums[s][t] / counts[s][t] as f64 - sigma) / z).collect();
        (v(0), v(1))
    }

    #[test]
    fn twelve_point_hand_series_matches_reference() {
        let xs = [0.1, -0.2, 0.15, 0.1, -0.3, 1.2, 0.4, -0.25, 0.2, 0.1, -0.1, 0.12];
        let v = vol(&xs);
        let ev = select_events(&v, 3.0, &mean_volatility(&v).unwrap()).unwrap();
        assert_eq!(ev.indices(), vec![5]);
        let p = remanent_profile(&v, &ev, 6).unwrap();
        let (rm, rp) = reference(&xs, &[5], 6);
        for t in 0..=5 {
            assert!((p.v_minus[t] - rm[t]).abs() < 1e-12, "minus lag {t}");
        }
        for t in 0..=6 {
            assert!((p.v_plus[t] - rp[t]).abs() < 1e-12, "plus lag {t}");
        }
        assert!(p.v_minus[6].is_nan() && p.counts_minus[6] == 0);
        assert_eq!(p.v_minus[0], 1.0);
        assert_eq!(p.v_plus[0], 1.0);
    }

    #[test]
    fn per_lag_counts_track_edges() {
        let xs: Vec<f64> = (0..30).map(|i| if i == 2 || i == 25 { 5.0 } else { 0.1 + 0.01 * i as f64 }).collect();
        let v = vol(&xs);
        let p = profile_from_indices(&v, &[2, 25], 0.3, 10).unwrap();
        assert_eq!(p.counts_plus[..5], [2, 2, 2, 2, 2]);
        assert_eq!(p.counts_plus[5], 1);
        assert_eq!(p.counts_minus[2], 2);
        assert_eq!(p.counts_minus[3], 1);
        for s in Side::BOTH {
            assert!(p.counts(s).windows(2).all(|w| w[1] <= w[0]));
            assert_eq!(p.counts(s)[0], 2);
        }
    }

    #[test]
    fn degenerate_and_invalid() {
        let v = vol(&[1.0; 10]);
        assert!(matches!(profile_from_indices(&v, &[3], 1.0, 3), Err(Error::DegenerateZ { .. })));
        assert!(matches!(profile_from_indices(&v, &[], 1.0, 3), Err(Error::NoEvents { .. })));
        assert!(matches!(profile_from_indices(&v, &[3], 0.5, 0), Err(Error::InvalidLag(_))));
        assert!(matches!(profile_from_indices(&v, &[3], 0.5, 10), Err(Error::InvalidLag(_))));
    }

    #[test]
    fn cumulative_examples() {
        let mut p = profile_from_indices(&vol(&[0.1, 1.0, 0.1, 0.1]), &[1], 0.3, 2).unwrap();
        p.v_plus = vec![1.0, 0.5, 0.25];
        p.v_minus = vec![1.0, 0.0, 0.0];
        let c = cumulative(&p);
        assert_eq!(c.plus, vec![0.5, 0.75]);
        assert_eq!(c.minus, vec![0.0, 0.0]);
    }

    /// Adaptive Simpson quadrature, used as an independent integration oracle.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let c = 0.5 * (a + b);
        let whole = (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b));
        let left = (c - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + c)) + f(c));
        let right = (b - c) / 6.0 * (f(c) + 4.0 * f(0.5 * (c + b)) + f(b));
        if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            simpson(f, a, c, tol / 2.0, depth - 1) + simpson(f, c, b, tol / 2.0, depth - 1)
        }
    }

    #[test]
    fn planted_power_law_cumulative_tracks_integral() {
        let t_max = 2000;
        let mut p = profile_from_indices(&vol(&vec![1.0; t_max + 2]), &[0], 0.5, t_max).unwrap();
        p.v_plus = (0..=t_max).map(|t| if t == 0 { 1.0 } else { (t as f64).powf(-0.3) }).collect();
        p.v_minus = p.v_plus.clone();
        let c = cumulative(&p);
        let f = |s: f64| s.powf(-0.3);
        for t in [100usize, 300, 1000, 2000] {
            let integral = simpson(&f, 0.5, t as f64 + 0.5, 1e-10, 40);
            assert!((c.plus[t - 1] / integral - 1.0).abs() < 0.02, "t = {t}");
        }
        // the scaled cumulative settles to a constant
        let ratio = |t: usize| c.plus[t - 1] / (t as f64).powf(0.7);
        assert!((ratio(1000) / ratio(2000) - 1.0).abs() < 0.02);
    }

    #[test]
    fn omori_hand_count() {
        let mut xs = vec![0.1; 20];
        xs[5] = 10.0;
        xs[7] = 1.0;
        xs[10] = 1.0;
        let v = vol(&xs);
        let o = omori_from_indices(&v, &[5], 0.5, 6).unwrap();
        assert_eq!(o.n_plus, vec![0.0, 1.0, 1.0, 1.0, 2.0, 2.0]);
        assert_eq!(o.n_minus, vec![0.0; 6]);
        assert_eq!(o.n_mainshocks, 1);
    }

    #[test]
    fn omori_rejects_aftershock_threshold_above_main() {
        let v = vol(&[0.1, 10.0, 0.1, 0.1]);
        let ev = event_set(&[1]);
        assert!(matches!(omori_counts(&v, &ev, 12.0, 0.1, 2), Err(Error::Config(_))));
        assert!(omori_counts(&v, &ev, 4.0, 0.1, 2).is_ok());
    }

    #[test]
    fn omori_symmetry_under_reversal() {
        let xs: Vec<f64> = (0..200).map(|i| ((i * 37 % 101) as f64 / 50.0 - 1.0) * if i % 23 == 0 { 9.0 } else { 1.0 }).collect();
        let v = vol(&xs);
        let idx = vec![0usize, 23, 46, 69, 92, 115, 138, 161, 184];
        let o = omori_from_indices(&v, &idx, 0.8, 30).unwrap();
        let rv = v.reversed();
        let ridx: Vec<usize> = idx.iter().rev().map(|i| 199 - i).collect();
        let r = omori_from_indices(&rv, &ridx, 0.8, 30).unwrap();
        assert_eq!(o.n_minus, r.n_plus);
        assert_eq!(o.n_plus, r.n_minus);
        for s in Side::BOTH {
            let n = o.side(s);
            assert!(n.windows(2).all(|w| w[1] >= w[0]));
            assert!(n.iter().enumerate().all(|(k, &x)| x <= (k + 1) as f64));
        }
    }

    #[test]
    fn profile_reversal_is_bit_exact() {
        let xs: Vec<f64> = (0..500).map(|i| ((i * 7919 % 997) as f64 / 997.0 - 0.5) * if i % 41 == 3 { 20.0 } else { 1.0 }).collect();
        let v = vol(&xs);
        let sigma = mean_volatility(&v).unwrap().sigma;
        let ev = select_events(&v, 4.0, &mean_volatility(&v).unwrap()).unwrap();
        let p = remanent_profile(&v, &ev, 60).unwrap();
        let rv = v.reversed();
        assert_eq!(mean_volatility(&rv).unwrap().sigma, sigma);
        let r = remanent_profile(&rv, &ev.reindexed_for_reverse(500), 60).unwrap();
        assert_eq!(p.v_minus, r.v_plus);
        assert_eq!(p.v_plus, r.v_minus);
        assert_eq!(p.counts_minus, r.counts_plus);
    }
}
