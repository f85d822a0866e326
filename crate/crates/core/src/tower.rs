//! Young towers over an i.i.d. base: levels `Δ_l = {R > l}`, exact
//! correlations of level observables through the scalar renewal sequence, and
//! a Monte Carlo cross-check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lsv::McEstimate;
use crate::numeric::{gcd, TwoFloat};
use crate::seq::{DecaySeq, PowerTail};

/// Tower built from the survival function `P(R > n)`.
#[derive(Clone, Debug)]
pub struct TowerModel {
    /// `survival[n] = P(R > n)` for `n = 0..=truncation`, `survival[0] = 1`.
    survival: Vec<f64>,
    /// Continuation of the survival function past the truncation.
    tail: Option<PowerTail>,
    /// `E[R] = Σ_{n≥0} P(R > n)`.
    pub mean_return: f64,
    pub beta: f64,
    pub gcd: u64,
}

impl TowerModel {
    /// `tail.values[n] = P(R > n)`; `p_i = tail(i-1) - tail(i)` up to the
    /// truncation, the sequence's analytic continuation beyond it.
    pub fn build(tail: &DecaySeq, truncation: usize) -> Result<Self> {
        if tail.is_empty() {
            return Err(Error::InvalidInput("empty survival sequence".into()));
        }
        let truncation = truncation.min(tail.horizon());
        let first = tail.values[0];
        let survival: Vec<f64> = tail.values[..=truncation].iter().map(|v| v / first).collect();
        if survival.windows(2).any(|w| w[1] > w[0]) || survival.iter().any(|v| *v < 0.0) {
            return Err(Error::InvalidInput("survival function must be non-increasing and non-negative".into()));
        }
        let continuation = tail.tail.map(|t| PowerTail { c: t.c / first, ..t });
        if let Some(t) = continuation {
            if t.gamma <= 1.0 && t.c > 0.0 {
                return Err(Error::NotSummable(t.gamma));
            }
        }
        Self::finish(survival, continuation, tail.gamma)
    }

    /// Finitely many return times `(R_i, p_i)` with `Σ p_i = 1`.
    pub fn from_returns(returns: &[(u64, f64)]) -> Result<Self> {
        let total: f64 = returns.iter().map(|r| r.1).sum();
        if returns.is_empty() || (total - 1.0).abs() > 1e-12 || returns.iter().any(|r| r.0 == 0 || r.1 < 0.0) {
            return Err(Error::InvalidInput(
                "return times must be positive with probabilities summing to 1".into(),
            ));
        }
        let max = returns.iter().map(|r| r.0).max().unwrap_or(1) as usize;
        let mut p = vec![0.0; max + 1];
        for &(r, q) in returns {
            p[r as usize] += q;
        }
        let mut survival = vec![0.0; max + 1];
        let mut acc = TwoFloat::ZERO;
        for n in (0..max).rev() {
            acc = acc.add_f64(p[n + 1]);
            survival[n] = acc.value();
        }
        Self::finish(survival, None, f64::INFINITY)
    }

    fn finish(survival: Vec<f64>, tail: Option<PowerTail>, beta: f64) -> Result<Self> {
        let truncation = survival.len() - 1;
        let mut g = 0u64;
        for r in 1..=truncation {
            if survival[r - 1] - survival[r] > 0.0 {
                g = gcd(g, r as u64);
            }
        }
        let has_tail = tail.is_some_and(|t| t.c > 0.0);
        if has_tail {
            // infinitely many consecutive return times carry mass
            g = 1;
        }
        if g > 1 {
            return Err(Error::PeriodicReturns(g));
        }
        let mut mean = survival.iter().rev().fold(TwoFloat::ZERO, |a, v| a.add_f64(*v)).value();
        if let Some(t) = tail {
            mean += t.sum_beyond(truncation);
        }
        Ok(TowerModel {
            survival,
            tail,
            mean_return: mean,
            beta,
            gcd: g.max(1),
        })
    }

    pub fn truncation(&self) -> usize {
        self.survival.len() - 1
    }

    /// `P(R > n)`.
    pub fn survival(&self, n: usize) -> f64 {
        match self.survival.get(n) {
            Some(&v) => v,
            None => self.tail.map(|t| t.value(n)).unwrap_or(0.0),
        }
    }

    /// `P(R = r)` for `r >= 1`.
    pub fn return_probability(&self, r: usize) -> f64 {
        if r == 0 {
            0.0
        } else {
            (self.survival(r - 1) - self.survival(r)).max(0.0)
        }
    }

    pub fn return_probabilities(&self, n_max: usize) -> Vec<f64> {
        (0..=n_max).map(|r| self.return_probability(r)).collect()
    }

    /// `m(Δ_l) = P(R > l) / E[R]`, which is also `m[R > l]` on the base.
    pub fn level_mass(&self, l: usize) -> f64 {
        self.survival(l) / self.mean_return
    }

    /// `Σ_{k>n} m[R > k]`.
    pub fn level_tail_sum(&self, n: usize) -> f64 {
        let trunc = self.truncation();
        let mut acc = TwoFloat::ZERO;
        for k in ((n + 1)..=trunc).rev() {
            acc = acc.add_f64(self.survival[k]);
        }
        let mut total = acc.value();
        if let Some(t) = self.tail {
            total += t.sum_beyond(trunc.max(n));
        }
        total / self.mean_return
    }

    /// `u_n`: probability of being on the base at time `n` after starting on it.
    pub fn renewal_sequence(&self, n_max: usize) -> Vec<f64> {
        scalar_renewal_oracle(&self.return_probabilities(n_max), n_max)
    }

    fn check_levels(&self, f: &LevelObservable) -> Result<()> {
        if f.values.len() > self.truncation() + 1 && self.tail.is_none() {
            return Err(Error::UnsupportedLevels {
                level: f.values.len() - 1,
                available: self.truncation() + 1,
            });
        }
        Ok(())
    }

    /// Draw `R` conditioned on `R > l`.
    fn sample_return<R: Rng + ?Sized>(&self, l: usize, rng: &mut R) -> usize {
        let base = self.survival(l);
        let target = rng.random::<f64>() * base;
        // smallest r > l with P(R > r) <= target
        let trunc = self.truncation();
        if l < trunc && self.survival[trunc] <= target {
            let slice = &self.survival[l + 1..=trunc];
            return l + 1 + slice.partition_point(|&s| s > target);
        }
        match self.tail {
            Some(t) if t.u == 0.0 && t.c > 0.0 => {
                // c (r+1)^{-γ} <= target
                let r = ((t.c / target).powf(1.0 / t.gamma) - 1.0).ceil();
                let r = if r.is_finite() { r as usize } else { usize::MAX / 4 };
                r.max(trunc + 1).max(l + 1)
            }
            _ => trunc.max(l) + 1,
        }
    }
}

/// `u_0 = 1`, `u_n = Σ_{k=1}^n p_k u_{n-k}` with `p[k]` the probability of
/// returning at time `k` (`p[0]` is ignored).
pub fn scalar_renewal_oracle(p: &[f64], n_max: usize) -> Vec<f64> {
    let mut u = Vec::with_capacity(n_max + 1);
    u.push(1.0);
    for n in 1..=n_max {
        let mut acc = TwoFloat::ZERO;
        for k in 1..=n.min(p.len().saturating_sub(1)) {
            acc = acc + TwoFloat::product(p[k], u[n - k]);
        }
        u.push(acc.value());
    }
    u
}

/// A function constant on each level: `values[l]` on `Δ_l` for `l < L`, plus a
/// constant `offset` on the whole tower.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelObservable {
    pub values: Vec<f64>,
    pub offset: f64,
}

impl LevelObservable {
    pub fn levels(values: Vec<f64>) -> Self {
        LevelObservable { values, offset: 0.0 }
    }

    pub fn indicator(level: usize) -> Self {
        let mut values = vec![0.0; level + 1];
        values[level] = 1.0;
        Self::levels(values)
    }

    pub fn value(&self, level: usize) -> f64 {
        self.values.get(level).copied().unwrap_or(0.0) + self.offset
    }

    pub fn mean(&self, tower: &TowerModel) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(l, v)| v * tower.level_mass(l))
            .sum::<f64>()
            + self.offset
    }

    /// `f - ∫f`: zero mean, but no longer supported on finitely many levels.
    pub fn centered(&self, tower: &TowerModel) -> Self {
        LevelObservable {
            values: self.values.clone(),
            offset: self.offset - self.mean(tower),
        }
    }
}

/// `Cor(f, g∘F^n)` for `n = 0..=n_max`, exactly. For a start on `Δ_l` the
/// level at time `n` is `l + n` if the excursion lasts, otherwise `l'` where
/// the last return happened at `n - l'`:
///
/// `∫ f g∘F^n dm = (1/E[R]) [Σ_l f_l g_{l+n} P(R > l+n)
///     + Σ_{l,l'} f_l g_{l'} P(R > l') Σ_{s=1}^{n-l'} p_{l+s} u_{n-l'-s}]`.
///
/// Constant offsets cancel in the covariance.
pub fn tower_correlations(
    tower: &TowerModel,
    f: &LevelObservable,
    g: &LevelObservable,
    n_max: usize,
) -> Result<Vec<f64>> {
    tower.check_levels(f)?;
    tower.check_levels(g)?;
    let lf = f.values.len();
    let lg = g.values.len();
    let p = tower.return_probabilities(n_max + lf + 1);
    let u = scalar_renewal_oracle(&p, n_max);
    let level_means = (
        f.mean(tower) - f.offset,
        g.mean(tower) - g.offset,
    );
    let product = level_means.0 * level_means.1;
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut total = TwoFloat::ZERO;
        for (l, &fl) in f.values.iter().enumerate() {
            if fl == 0.0 {
                continue;
            }
            if l + n < lg {
                total = total + TwoFloat::product(fl * g.values[l + n], tower.survival(l + n));
            }
            for (lp, &gl) in g.values.iter().enumerate() {
                if gl == 0.0 || lp >= n {
                    continue;
                }
                let mut inner = TwoFloat::ZERO;
                for s in 1..=(n - lp) {
                    inner = inner + TwoFloat::product(p[l + s], u[n - lp - s]);
                }
                total = total + inner.mul_f64(fl * gl * tower.survival(lp));
            }
        }
        out.push(total.value() / tower.mean_return - product);
    }
    Ok(out)
}

pub fn tower_correlation(tower: &TowerModel, f: &LevelObservable, g: &LevelObservable, n: usize) -> Result<f64> {
    Ok(tower_correlations(tower, f, g, n)?[n])
}

/// `|Cor(f, g∘F^n)|` for a zero-mean `f`, with a rate fit on the last decade.
pub fn zero_mean_tower_decay(
    tower: &TowerModel,
    f: &LevelObservable,
    g: &LevelObservable,
    n_max: usize,
) -> Result<DecaySeq> {
    let mean = f.mean(tower);
    let scale = f.values.iter().fold(f.offset.abs(), |a, v| a.max(v.abs()));
    if mean.abs() > 1e-12 * scale.max(1.0) {
        return Err(Error::NonZeroMean(mean));
    }
    let cors = tower_correlations(tower, f, g, n_max)?;
    let seq = DecaySeq::measured(cors.iter().map(|c| c.abs()).collect());
    let window = seq.default_window();
    if window.1 > window.0 && seq.values[window.0..=window.1].iter().all(|&v| v > 0.0) {
        seq.with_fit(window)
    } else {
        Ok(seq)
    }
}

const SHARDS: usize = 64;

/// Monte Carlo estimate of `Cor(f, g∘F^n)`: starts are drawn level by level
/// on the support of `f`, the current excursion conditioned on `R > l`, and
/// later excursions simulated as fresh returns.
pub fn tower_correlation_monte_carlo(
    tower: &TowerModel,
    f: &LevelObservable,
    g: &LevelObservable,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    tower.check_levels(f)?;
    if f.offset != 0.0 {
        return Err(Error::UnsupportedObservable(
            "Monte Carlo path needs f supported on finitely many levels".into(),
        ));
    }
    let support: Vec<usize> = (0..f.values.len()).filter(|&l| f.values[l] != 0.0).collect();
    if support.is_empty() {
        return Ok(McEstimate { value: 0.0, std_error: 0.0 });
    }
    let per_level = (samples / support.len()).max(2);
    let per_shard = per_level.div_ceil(SHARDS);
    let mut value = -f.mean(tower) * g.mean(tower);
    let mut var = 0.0;
    for (idx, &l) in support.iter().enumerate() {
        let shards: Vec<(f64, f64, usize)> = (0..SHARDS)
            .into_par_iter()
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream((idx * SHARDS + s) as u64);
                let count = per_shard.min(per_level.saturating_sub(s * per_shard));
                let (mut sum, mut sum_sq) = (0.0, 0.0);
                for _ in 0..count {
                    let first = tower.sample_return(l, &mut rng) - l;
                    let level = if first > n {
                        l + n
                    } else {
                        let mut elapsed = first;
                        loop {
                            let r = tower.sample_return(0, &mut rng);
                            if elapsed + r > n {
                                break n - elapsed;
                            }
                            elapsed += r;
                        }
                    };
                    let v = g.value(level);
                    sum += v;
                    sum_sq += v * v;
                }
                (sum, sum_sq, count)
            })
            .collect();
        let (sum, sum_sq, count) = shards
            .into_iter()
            .fold((0.0, 0.0, 0usize), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
        let c = count as f64;
        let mean = sum / c;
        let level_var = (sum_sq / c - mean * mean).max(0.0) / (c - 1.0);
        let w = tower.level_mass(l) * f.values[l];
        value += w * mean;
        var += w * w * level_var;
    }
    Ok(McEstimate {
        value,
        std_error: var.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::synth_tail;

    #[test]
    fn kac_normalization() {
        let t = TowerModel::from_returns(&[(1, 0.5), (2, 0.5)]).unwrap();
        assert!((t.level_mass(0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((t.level_mass(1) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(t.level_mass(2), 0.0);
        assert!((t.level_mass(0) * t.mean_return - 1.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_returns_rejected() {
        assert!(matches!(TowerModel::from_returns(&[(2, 1.0)]), Err(Error::PeriodicReturns(2))));
        assert!(matches!(
            TowerModel::from_returns(&[(2, 0.5), (4, 0.5)]),
            Err(Error::PeriodicReturns(2))
        ));
    }

    #[test]
    fn oracle_examples() {
        assert!(scalar_renewal_oracle(&[0.0, 1.0], 10).iter().all(|&u| u == 1.0));
        assert_eq!(scalar_renewal_oracle(&[0.0, 0.5, 0.5], 3), vec![1.0, 0.5, 0.75, 0.625]);
        let u = scalar_renewal_oracle(&[0.0, 0.0, 1.0], 9);
        for (n, v) in u.iter().enumerate() {
            assert_eq!(*v, if n % 2 == 0 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn lag_zero_covariance_of_base_indicator() {
        let t = TowerModel::from_returns(&[(1, 0.5), (2, 0.5)]).unwrap();
        let f = LevelObservable::indicator(0);
        let c = tower_correlation(&t, &f, &f, 0).unwrap();
        let m0 = t.level_mass(0);
        assert!((c - (m0 - m0 * m0)).abs() < 1e-15);
    }

    #[test]
    fn base_indicator_correlation_is_renewal_deviation() {
        let t = TowerModel::from_returns(&[(1, 0.3), (2, 0.5), (5, 0.2)]).unwrap();
        let f = LevelObservable::indicator(0);
        let u = t.renewal_sequence(40);
        let c = tower_correlations(&t, &f, &f, 40).unwrap();
        let m0 = t.level_mass(0);
        for n in 0..=40 {
            assert!((c[n] - m0 * (u[n] - m0)).abs() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn exact_matches_monte_carlo() {
        let t = TowerModel::from_returns(&[(1, 0.3), (2, 0.5), (5, 0.2)]).unwrap();
        let f = LevelObservable::levels(vec![1.0, -0.5]);
        let g = LevelObservable::levels(vec![0.2, 1.0, 0.0, 0.7]);
        for n in [0usize, 1, 3, 7] {
            let exact = tower_correlation(&t, &f, &g, n).unwrap();
            let mc = tower_correlation_monte_carlo(&t, &f, &g, n, 200_000, 11).unwrap();
            assert!((exact - mc.value).abs() < 4.0 * mc.std_error + 1e-12, "n={n}: {exact} vs {mc:?}");
        }
    }

    #[test]
    fn level_masses_follow_the_tail() {
        let tail = synth_tail(1.0, 1.3, 0.0, 10_000, None).unwrap();
        let t = TowerModel::build(&tail, 10_000).unwrap();
        let total: f64 = (0..10_000).map(|l| t.level_mass(l)).sum::<f64>() + t.level_tail_sum(9_999);
        assert!((total - 1.0).abs() < 1e-12, "{total}");
        let masses = DecaySeq::measured((0..=1000).map(|l| t.level_mass(l)).collect());
        let fit = crate::seq::rate_fit(&masses, (100, 1000)).unwrap();
        assert!((fit.power.gamma - 1.3).abs() < 0.1);
    }

    #[test]
    fn centered_observable_has_zero_mean() {
        let t = TowerModel::from_returns(&[(1, 0.3), (2, 0.7)]).unwrap();
        let f = LevelObservable::levels(vec![1.0, 2.0]).centered(&t);
        assert!(f.mean(&t).abs() < 1e-15);
    }
}
