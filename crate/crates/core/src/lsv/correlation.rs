use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::LsvModel;
use super::observable::Observable;
use crate::error::{Error, Result};

fn check_support(model: &LsvModel, f: &Observable, name: &str) -> Result<()> {
    if let Some((lo, _)) = f.support {
        let first = model.grid.edges[1];
        if lo <= first {
            return Err(Error::UnsupportedObservable(format!(
                "{name} is supported down to {lo:e}, inside the first grid cell [0, {first:e}]"
            )));
        }
    }
    Ok(())
}

/// `Cor(f, g∘T^n) = ∫ f·g∘T^n dμ - ∫f dμ ∫g dμ` for `n = 0..=n_max`,
/// by pushing the cell masses of `f h` forward with the Ulam matrix.
pub fn correlations(model: &LsvModel, f: &Observable, g: &Observable, n_max: usize) -> Result<Vec<f64>> {
    check_support(model, f, "f")?;
    check_support(model, g, "g")?;
    let mut v: Vec<f64> = f.values.iter().zip(&model.mass).map(|(a, m)| a * m).collect();
    let mut next = vec![0.0; v.len()];
    let product = f.mean * g.mean;
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            model.ulam.push_forward(&v, &mut next);
            std::mem::swap(&mut v, &mut next);
        }
        let pair: f64 = v.iter().zip(&g.values).map(|(a, b)| a * b).sum();
        out.push(pair - product);
    }
    Ok(out)
}

pub fn correlation(model: &LsvModel, f: &Observable, g: &Observable, n: usize) -> Result<f64> {
    Ok(correlations(model, f, g, n)?[n])
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
}

const SHARDS: usize = 64;

/// Power sums of `f(x)` and `g(T^n x)` over one shard of orbits.
#[derive(Clone)]
struct Moments {
    count: usize,
    f: f64,
    ff: f64,
    // per lag: g, g², fg, f²g, fg², f²g²
    lag: Vec<[f64; 6]>,
}

impl Moments {
    fn new(n_max: usize) -> Self {
        Moments {
            count: 0,
            f: 0.0,
            ff: 0.0,
            lag: vec![[0.0; 6]; n_max + 1],
        }
    }

    fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        self.f += other.f;
        self.ff += other.ff;
        for (a, b) in self.lag.iter_mut().zip(&other.lag) {
            for k in 0..6 {
                a[k] += b[k];
            }
        }
    }

    /// Sample covariance with a delta-method standard error.
    fn estimate(&self, n: usize) -> McEstimate {
        let c = self.count.max(2) as f64;
        let [g, gg, fg, ffg, fgg, ffgg] = self.lag[n].map(|v| v / c);
        let (f, ff) = (self.f / c, self.ff / c);
        let cov = fg - f * g;
        // E[(f - Ef)^2 (g - Eg)^2] with the sample means plugged in
        let centered4 = ffgg - 2.0 * g * ffg + g * g * ff - 2.0 * f * fgg + 4.0 * f * g * fg + f * f * gg
            - 3.0 * f * f * g * g;
        let var = (centered4 - cov * cov).max(0.0);
        McEstimate {
            value: cov,
            std_error: (var / (c - 1.0)).sqrt(),
        }
    }
}

/// Monte Carlo estimate of `Cor(f, g∘T^n)` for `n = 0..=n_max` from `samples`
/// orbits started from the discretized invariant measure.
///
/// The means are the sample means of `f(x)` and `g(T^n x)`. Subtracting the
/// model means instead would turn the discretization error of `∫g` into a
/// bias that does not decay with `n`.
pub fn correlation_monte_carlo(
    model: &LsvModel,
    f: &Observable,
    g: &Observable,
    n_max: usize,
    samples: usize,
    seed: u64,
) -> Vec<McEstimate> {
    let per_shard = samples.div_ceil(SHARDS);
    let shards: Vec<Moments> = (0..SHARDS)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let count = per_shard.min(samples.saturating_sub(s * per_shard));
            let mut m = Moments::new(n_max);
            m.count = count;
            for _ in 0..count {
                let mut x = model.sample(&mut rng);
                let fx = f.eval(x, &model.branch);
                m.f += fx;
                m.ff += fx * fx;
                for (n, acc) in m.lag.iter_mut().enumerate() {
                    if n > 0 {
                        x = model.apply(x);
                    }
                    let gx = g.eval(x, &model.branch);
                    let p = fx * gx;
                    acc[0] += gx;
                    acc[1] += gx * gx;
                    acc[2] += p;
                    acc[3] += p * fx;
                    acc[4] += p * gx;
                    acc[5] += p * p;
                }
            }
            m
        })
        .collect();
    let mut total = Moments::new(n_max);
    for m in &shards {
        total.merge(m);
    }
    (0..=n_max).map(|n| total.estimate(n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lsv::{LsvConfig, ObservableSpec};

    fn model() -> LsvModel {
        LsvModel::build(&LsvConfig {
            alpha: 0.5,
            ladder_levels: 800,
            max_width: 0.01,
            y_cells: 400,
            tail_points: 1000,
        })
        .unwrap()
    }

    #[test]
    fn lag_zero_is_covariance() {
        let m = model();
        let f = Observable::new(&m, ObservableSpec::bump(0.6, 0.9, 0.05)).unwrap();
        let c = correlations(&m, &f, &f, 0).unwrap();
        let second: f64 = f.values.iter().zip(&m.mass).map(|(v, w)| v * v * w).sum();
        assert!((c[0] - (second - f.mean * f.mean)).abs() < 1e-14);
    }

    #[test]
    fn bilinear() {
        let m = model();
        let f = Observable::new(&m, ObservableSpec::bump(0.6, 0.9, 0.05)).unwrap();
        let g = Observable::new(&m, ObservableSpec::bump(0.55, 0.8, 0.05)).unwrap();
        let base = correlations(&m, &f, &g, 30).unwrap();
        let scaled = correlations(&m, &f.scaled(2.5), &g.scaled(-0.4), 30).unwrap();
        for (a, b) in base.iter().zip(&scaled) {
            assert!((a * -1.0 - b).abs() < 1e-10);
        }
    }

    #[test]
    fn support_near_zero_is_rejected() {
        let m = model();
        let f = Observable::new(&m, ObservableSpec::bump(0.0, 0.3, 0.05)).unwrap();
        assert!(matches!(correlations(&m, &f, &f, 3), Err(Error::UnsupportedObservable(_))));
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let m = model();
        let f = Observable::new(&m, ObservableSpec::bump(0.6, 0.9, 0.05)).unwrap();
        let a = correlation_monte_carlo(&m, &f, &f, 5, 2000, 7);
        let b = correlation_monte_carlo(&m, &f, &f, 5, 2000, 7);
        assert_eq!(a[5].value, b[5].value);
    }
}
