#![allow(dead_code)]

use std::path::{Path, PathBuf};

use largevol::data::{absolute_volatility, mean_volatility, VolatilitySeries};
use largevol::events::select_events;
use largevol::fitting::FitConfig;
use largevol::profiles::{cumulative, remanent_profile, Side};
use largevol::synth::{gen_planted_relaxation, PlantedRelaxationSpec};

/// Reference profile by direct double loop over positions and events:
/// returns `(v_minus, v_plus, counts_minus, counts_plus)` for lags `0..=T`.
pub fn brute_profile(vol: &[f64], events: &[usize], max_lag: usize) -> (Vec<f64>, Vec<f64>, Vec<usize>, Vec<usize>) {
    let n = vol.len();
    let sigma = vol.iter().sum::<f64>() / n as f64;
    let z = events.iter().map(|&e| vol[e]).sum::<f64>() / events.len() as f64 - sigma;
    let mut sums = [vec![0.0; max_lag + 1], vec![0.0; max_lag + 1]];
    let mut counts = [vec![0usize; max_lag + 1], vec![0usize; max_lag + 1]];
    for &e in events {
        for (j, &x) in vol.iter().enumerate() {
            let d = j as i64 - e as i64;
            if d.unsigned_abs() as usize > max_lag {
                continue;
            }
            // lag 0 belongs to both sides
            if d <= 0 {
                sums[0][(-d) as usize] += x;
                counts[0][(-d) as usize] += 1;
            }
            if d >= 0 {
                sums[1][d as usize] += x;
                counts[1][d as usize] += 1;
            }
        }
    }
    let v = |s: &[f64], c: &[usize]| -> Vec<f64> {
        s.iter()
            .zip(c)
            .enumerate()
            .map(|(t, (s, &c))| if c == 0 { f64::NAN } else if t == 0 { 1.0 } else { (s / c as f64 - sigma) / z })
            .collect()
    };
    let vm = v(&sums[0], &counts[0]);
    let vp = v(&sums[1], &counts[1]);
    let [cm, cp] = counts;
    (vm, vp, cm, cp)
}

/// `V(t)` for `t = 1..=T` by summing `v(1..=t)` afresh for every `t`.
pub fn brute_cumulative(v: &[f64]) -> Vec<f64> {
    (1..v.len()).map(|t| v[1..=t].iter().sum()).collect()
}

/// Reference aftershock counts: element `k` is `N(k+1)` for each side.
pub fn brute_omori(vol: &[f64], mains: &[usize], zeta1: f64, max_lag: usize) -> (Vec<f64>, Vec<f64>) {
    let mut out = (vec![0.0; max_lag], vec![0.0; max_lag]);
    for t in 1..=max_lag {
        let mut minus = 0usize;
        let mut plus = 0usize;
        for &e in mains {
            for (j, &x) in vol.iter().enumerate() {
                if x <= zeta1 {
                    continue;
                }
                let d = j as i64 - e as i64;
                if d < 0 && (-d) as usize <= t {
                    minus += 1;
                }
                if d > 0 && d as usize <= t {
                    plus += 1;
                }
            }
        }
        out.0[t - 1] = minus as f64 / mains.len() as f64;
        out.1[t - 1] = plus as f64 / mains.len() as f64;
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| if x.is_nan() && y.is_nan() { 0.0 } else { (x - y).abs() })
        .fold(0.0, |m, d| if d.is_nan() { f64::INFINITY } else { m.max(d) })
}

pub fn planted(n: usize, p: f64, seed: u64) -> VolatilitySeries {
    let spec = PlantedRelaxationSpec::symmetric(n, 3.0, p, 0.0, seed);
    absolute_volatility(&gen_planted_relaxation(&spec).unwrap().returns)
}

/// Fitted `(p_minus, p_plus, n_events)` with default fit settings.
pub fn fitted_exponents(vol: &VolatilitySeries, m: f64, max_lag: usize) -> (f64, f64, usize) {
    let stats = mean_volatility(vol).unwrap();
    let events = select_events(vol, m, &stats).unwrap();
    let profile = remanent_profile(vol, &events, max_lag).unwrap();
    let cum = cumulative(&profile);
    let cfg = FitConfig::default();
    let p = |s: Side| cfg.fit(cum.side(s)).unwrap().exponent;
    (p(Side::Minus), p(Side::Plus), events.len())
}

/// Runs the command line in process.
pub fn cli(args: &[&str]) -> i32 {
    largevol::cli::run(std::iter::once("largevol").chain(args.iter().copied()))
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// Writes a synthetic price CSV through the `synth` subcommand.
pub fn synth_csv(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let out = dir.join(name);
    let mut args = vec!["synth", "--out", path_str(&out)];
    args.extend_from_slice(extra);
    assert_eq!(cli(&args), 0, "synth {extra:?}");
    out
}

/// Relative paths and contents of every file below `dir`, sorted.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}
