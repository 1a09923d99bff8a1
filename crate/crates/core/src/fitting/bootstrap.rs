//! Event-resampling bootstrap for the fitted exponents.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::FitConfig;
use crate::data::VolatilitySeries;
use crate::error::{Error, Result};
use crate::profiles::{cumulative, profile_from_indices, Side};

/// Replica exponents per side (`None` where the replica fit failed) and the
/// resulting standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapErrors {
    pub replicas_minus: Vec<Option<f64>>,
    pub replicas_plus: Vec<Option<f64>>,
    pub stderr_minus: f64,
    pub stderr_plus: f64,
}

impl BootstrapErrors {
    pub fn stderr(&self, side: Side) -> f64 {
        match side {
            Side::Minus => self.stderr_minus,
            Side::Plus => self.stderr_plus,
        }
    }
}

/// Resamples `indices` with replacement `b` times. Replica `r` draws from a
/// generator seeded with `seed + r`, so a longer run extends a shorter one.
/// `replica` maps a resampled index multiset to the (minus, plus) exponents.
pub fn bootstrap_with<F>(indices: &[usize], b: usize, seed: u64, replica: F) -> Result<BootstrapErrors>
where
    F: Fn(&[usize]) -> [Result<f64>; 2] + Sync,
{
    if b < 50 {
        return Err(Error::Config(format!("bootstrap needs at least 50 replicas, got {b}")));
    }
    if indices.len() < 5 {
        return Err(Error::Config(format!("bootstrap needs at least 5 events, got {}", indices.len())));
    }
    let results: Vec<[Option<f64>; 2]> = (0..b as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r));
            let sample: Vec<usize> =
                (0..indices.len()).map(|_| indices[rng.random_range(0..indices.len())]).collect();
            let [m, p] = replica(&sample);
            [m.ok(), p.ok()]
        })
        .collect();

    let replicas_minus: Vec<Option<f64>> = results.iter().map(|r| r[0]).collect();
    let replicas_plus: Vec<Option<f64>> = results.iter().map(|r| r[1]).collect();
    let stderr_minus = spread(&replicas_minus)?;
    let stderr_plus = spread(&replicas_plus)?;
    Ok(BootstrapErrors { replicas_minus, replicas_plus, stderr_minus, stderr_plus })
}

/// Sample standard deviation of the successful replicas; more than 10%
/// failures is an error.
fn spread(values: &[Option<f64>]) -> Result<f64> {
    let ok: Vec<f64> = values.iter().flatten().copied().collect();
    let failed = values.len() - ok.len();
    if failed * 10 > values.len() || ok.len() < 2 {
        return Err(Error::BootstrapUnstable { failed, total: values.len() });
    }
    // shifted by the first value so identical replicas give exactly 0
    let k = ok.len() as f64;
    let d: Vec<f64> = ok.iter().map(|x| x - ok[0]).collect();
    let s = d.iter().sum::<f64>();
    let ss = d.iter().map(|x| x * x).sum::<f64>();
    Ok(((ss - s * s / k) / (k - 1.0)).max(0.0).sqrt())
}

/// Standard errors of the profile exponents under event resampling.
pub fn bootstrap_errors(
    vol: &VolatilitySeries,
    indices: &[usize],
    sigma: f64,
    max_lag: usize,
    config: &FitConfig,
    b: usize,
    seed: u64,
) -> Result<BootstrapErrors> {
    bootstrap_with(indices, b, seed, |sample| {
        match profile_from_indices(vol, sample, sigma, max_lag) {
            Ok(profile) => {
                let cum = cumulative(&profile);
                Side::BOTH.map(|s| config.fit(cum.side(s)).map(|f| f.exponent))
            }
            Err(e) => [Err(e.clone()), Err(e)],
        }
    })
}
