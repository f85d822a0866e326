use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::correlation::correlations;
use super::model::LsvModel;
use super::observable::Observable;
use crate::error::{Error, Result};

/// Accepted `|∫f dμ|` relative to `sup |f|`. The discrete measure is exactly
/// invariant only for the Ulam chain, so a coboundary has a small nonzero mean.
pub const MEAN_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GreenKubo {
    pub sigma2: f64,
    /// Raw value before clipping at 0.
    pub raw: f64,
    pub lags_used: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct GreenKuboOptions {
    pub term_tol: f64,
    pub quiet_run: usize,
    pub n_max: usize,
}

impl Default for GreenKuboOptions {
    fn default() -> Self {
        GreenKuboOptions {
            term_tol: 1e-10,
            quiet_run: 20,
            n_max: 20_000,
        }
    }
}

fn check_mean(f: &Observable) -> Result<()> {
    let scale = f.sup_norm();
    if scale > 0.0 && f.mean.abs() > MEAN_TOL * scale {
        return Err(Error::NonZeroMean(f.mean));
    }
    Ok(())
}

/// `σ² = C_0 + 2 Σ_{n≥1} C_n` with `C_n = Cor(f, f∘T^n)`, stopped once
/// `|C_n| < term_tol` for `quiet_run` consecutive lags or at `n_max`.
pub fn green_kubo_variance(model: &LsvModel, f: &Observable, opts: GreenKuboOptions) -> Result<GreenKubo> {
    check_mean(f)?;
    let cors = correlations(model, f, f, opts.n_max)?;
    let mut raw = cors[0];
    let mut quiet = 0;
    let mut lags_used = opts.n_max;
    let mut converged = false;
    for (n, c) in cors.iter().enumerate().skip(1) {
        raw += 2.0 * c;
        if c.abs() < opts.term_tol {
            quiet += 1;
            if quiet >= opts.quiet_run {
                lags_used = n;
                converged = true;
                break;
            }
        } else {
            quiet = 0;
        }
    }
    Ok(GreenKubo {
        sigma2: raw.max(0.0),
        raw,
        lags_used,
        converged,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CltReport {
    pub ks_statistic: f64,
    pub sigma_hat_sq: f64,
    pub sigma_green_kubo_sq: f64,
    pub n: usize,
    pub samples: usize,
}

const SHARDS: usize = 64;

/// Normalized Birkhoff sums `S_n/√n` from `samples` starting points drawn
/// from the invariant measure, in a fixed order for a given seed.
pub fn birkhoff_sums(model: &LsvModel, f: &Observable, n: usize, samples: usize, seed: u64) -> Vec<f64> {
    let per_shard = samples.div_ceil(SHARDS);
    let scale = 1.0 / (n.max(1) as f64).sqrt();
    (0..SHARDS)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let count = per_shard.min(samples.saturating_sub(s * per_shard));
            (0..count)
                .map(|_| {
                    let mut x = model.sample(&mut rng);
                    let mut sum = 0.0;
                    for _ in 0..n {
                        sum += f.eval(x, &model.branch);
                        x = model.apply(x);
                    }
                    sum * scale
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .concat()
}

/// Kolmogorov–Smirnov distance between the sample and `N(0, σ²)`. A zero
/// variance is the point mass at 0.
pub fn ks_distance(sample: &[f64], sigma2: f64) -> f64 {
    let n = sample.len() as f64;
    if sigma2 <= 0.0 {
        let below = sample.iter().filter(|&&x| x < 0.0).count() as f64;
        let above = sample.iter().filter(|&&x| x > 0.0).count() as f64;
        return below.max(above) / n;
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let normal = Normal::new(0.0, sigma2.sqrt()).expect("positive standard deviation");
    let cdf = |x: f64| normal.cdf(x);
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).max((i + 1) as f64 / n - c)
        })
        .fold(0.0, f64::max)
}

pub fn birkhoff_clt(model: &LsvModel, f: &Observable, n: usize, samples: usize, seed: u64) -> Result<CltReport> {
    check_mean(f)?;
    if samples < 2 {
        return Err(Error::InvalidInput("CLT check needs at least two samples".into()));
    }
    let gk = green_kubo_variance(model, f, GreenKuboOptions::default())?;
    let sums = birkhoff_sums(model, f, n, samples, seed);
    let mean = sums.iter().sum::<f64>() / sums.len() as f64;
    let var = sums.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (sums.len() - 1) as f64;
    let ks = if gk.sigma2 == 0.0 && sums.iter().all(|&s| s == 0.0) {
        0.0
    } else {
        ks_distance(&sums, gk.sigma2)
    };
    Ok(CltReport {
        ks_statistic: ks,
        sigma_hat_sq: var,
        sigma_green_kubo_sq: gk.sigma2,
        n,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let normal = Normal::new(0.0, 2.0).unwrap();
        let sample: Vec<f64> = (0..1000).map(|i| normal.inverse_cdf((i as f64 + 0.5) / 1000.0)).collect();
        let d = ks_distance(&sample, 4.0);
        assert!((d - 0.0005).abs() < 1e-6, "{d}");
        assert!(ks_distance(&sample, 1.0) > 0.1);
    }

    #[test]
    fn degenerate_variance_is_point_mass() {
        assert_eq!(ks_distance(&[0.0, 0.0], 0.0), 0.0);
        assert_eq!(ks_distance(&[0.0, 1.0], 0.0), 0.5);
    }
}
