//! Scalar sequences indexed from `n = 0`: Cauchy convolution, tail sums,
//! synthetic power laws and decay-rate fitting.
//!
//! A power law `1/n^γ` is read as `1/(n+1)^γ` so that index 0 is finite.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::log_power_tail_sum;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    Synthetic,
    Measured,
}

/// Analytic continuation `a_n = c (log(n+2))^u (n+1)^{-γ}` beyond the stored
/// values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerTail {
    pub c: f64,
    pub gamma: f64,
    pub u: f64,
}

impl PowerTail {
    pub fn value(&self, n: usize) -> f64 {
        let n = n as f64;
        self.c * (n + 2.0).ln().powf(self.u) * (n + 1.0).powf(-self.gamma)
    }

    /// `Σ_{k>n} a_k`; infinite when `γ <= 1`.
    pub fn sum_beyond(&self, n: usize) -> f64 {
        if self.c == 0.0 {
            return 0.0;
        }
        if self.gamma <= 1.0 {
            return f64::INFINITY;
        }
        log_power_tail_sum(self.c, self.gamma, self.u, n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySeq {
    pub values: Vec<f64>,
    /// Asserted (synthetic) or fitted (measured) exponent; NaN when unknown.
    pub gamma: f64,
    pub log_power: f64,
    pub provenance: Provenance,
    pub tail: Option<PowerTail>,
}

impl DecaySeq {
    pub fn measured(values: Vec<f64>) -> Self {
        DecaySeq {
            values,
            gamma: f64::NAN,
            log_power: 0.0,
            provenance: Provenance::Measured,
            tail: None,
        }
    }

    pub fn with_tail(mut self, tail: PowerTail) -> Self {
        self.tail = Some(tail);
        self
    }

    /// Tags the sequence with the better of the two fits over `window`.
    pub fn with_fit(mut self, window: (usize, usize)) -> Result<Self> {
        let best = rate_fit(&self, window)?.best();
        self.gamma = best.gamma;
        self.log_power = best.log_power;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Last index `N`.
    pub fn horizon(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    /// Value at `n`, falling back to the analytic tail past the horizon.
    pub fn get(&self, n: usize) -> Option<f64> {
        self.values
            .get(n)
            .copied()
            .or_else(|| self.tail.map(|t| t.value(n)))
    }

    /// The last decade `[N/10, N]`, clamped below at 2.
    pub fn default_window(&self) -> (usize, usize) {
        let n = self.horizon();
        ((n / 10).max(2), n)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["n", "value"])?;
        for (n, v) in self.values.iter().enumerate() {
            w.write_record([n.to_string(), format!("{v:.17e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut values = Vec::new();
        for (line, record) in r.records().enumerate() {
            let record = record?;
            let parse = |i: usize| -> Result<&str> {
                record.get(i).ok_or_else(|| Error::Parse {
                    line: line + 2,
                    msg: "expected columns n,value".into(),
                })
            };
            let n: usize = parse(0)?.trim().parse().map_err(|e| Error::Parse {
                line: line + 2,
                msg: format!("bad index: {e}"),
            })?;
            let v: f64 = parse(1)?.trim().parse().map_err(|e| Error::Parse {
                line: line + 2,
                msg: format!("bad value: {e}"),
            })?;
            if n != values.len() {
                return Err(Error::Parse {
                    line: line + 2,
                    msg: format!("expected index {}, found {n}", values.len()),
                });
            }
            values.push(v);
        }
        Ok(DecaySeq::measured(values))
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

/// `a_n = c (log(n+2))^u (n+1)^{-γ}` for `n = 0..=N`, optionally rescaled so
/// the stored values sum to `normalize_to`. The analytic tail is attached
/// (rescaled alike).
pub fn synth_tail(
    c: f64,
    gamma: f64,
    u: f64,
    horizon: usize,
    normalize_to: Option<f64>,
) -> Result<DecaySeq> {
    let mut tail = PowerTail { c, gamma, u };
    let mut values: Vec<f64> = (0..=horizon).map(|n| tail.value(n)).collect();
    if let Some(target) = normalize_to {
        if gamma <= 1.0 {
            return Err(Error::NotSummable(gamma));
        }
        let total = crate::numeric::accurate_sum(values.iter().copied()).value();
        let scale = target / total;
        values.iter_mut().for_each(|v| *v *= scale);
        tail.c *= scale;
    }
    Ok(DecaySeq {
        values,
        gamma,
        log_power: u,
        provenance: Provenance::Synthetic,
        tail: Some(tail),
    })
}

/// `Σ_{k=n+1}^{N} a_k` plus the analytic tail when the sequence carries one.
pub fn tail_sum(a: &DecaySeq, n: usize) -> f64 {
    let stored = if n + 1 < a.values.len() {
        crate::numeric::accurate_sum(a.values[n + 1..].iter().rev().copied()).value()
    } else {
        0.0
    };
    let beyond = match a.tail {
        Some(t) => t.sum_beyond(a.horizon().max(n)),
        None => 0.0,
    };
    stored + beyond
}

/// Sizes above this use the FFT path in [`convolve`].
pub const DIRECT_CONVOLUTION_LIMIT: usize = 256;

/// Cauchy product `c_n = Σ_{k+l=n} a_k b_l` up to the shorter length.
pub fn convolve(a: &DecaySeq, b: &DecaySeq) -> DecaySeq {
    let n = a.len().min(b.len());
    let values = if n <= DIRECT_CONVOLUTION_LIMIT {
        convolve_direct(&a.values[..n], &b.values[..n])
    } else {
        convolve_fft(&a.values[..n], &b.values[..n])
    };
    DecaySeq::measured(values)
}

/// O(N²) reference convolution, truncated to `min(len)`.
pub fn convolve_direct(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().min(b.len());
    (0..n)
        .map(|m| (0..=m).map(|k| a[k] * b[m - k]).sum())
        .collect()
}

/// FFT convolution, truncated to `min(len)`.
pub fn convolve_fft(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().min(b.len());
    if n == 0 {
        return Vec::new();
    }
    let size = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(size);
    let ifft = planner.plan_fft_inverse(size);
    let pad = |x: &[f64]| {
        let mut buf: Vec<Complex<f64>> = x[..n].iter().map(|&v| Complex::new(v, 0.0)).collect();
        buf.resize(size, Complex::new(0.0, 0.0));
        buf
    };
    let mut fa = pad(a);
    let mut fb = pad(b);
    fft.process(&mut fa);
    fft.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    ifft.process(&mut fa);
    let scale = 1.0 / size as f64;
    fa[..n].iter().map(|z| z.re * scale).collect()
}

/// Decay class of `a ⋆ b` for `a_n ~ n^{-α}`, `b_n ~ n^{-β}`: the exponent
/// and whether a `log n` factor is present.
///
/// With `α <= β` (swap otherwise): `n^{-α}` if `β > 1`, `log n / n^α` if
/// `β = 1`, and `n^{-(α+β-1)}` if `β < 1`.
pub fn convolution_rate(alpha: f64, beta: f64) -> (f64, bool) {
    let (a, b) = if alpha <= beta { (alpha, beta) } else { (beta, alpha) };
    if b > 1.0 {
        (a, false)
    } else if b == 1.0 {
        (a, true)
    } else {
        (a + b - 1.0, false)
    }
}

/// Ordinary least squares summary for one regression.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    /// Decay exponent: minus the coefficient of `log n` (or of `n`).
    pub gamma: f64,
    /// Coefficient of `log log n`, zero when the regressor is absent.
    pub log_power: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub rss: f64,
}

/// Result of [`rate_fit`]: the model `log a_n ~ 1 + log n + log log n` and the
/// pure power law `log a_n ~ 1 + log n` on the same window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub gamma: f64,
    pub log_power: f64,
    pub r_squared: f64,
    pub with_log: LinearFit,
    pub power: LinearFit,
}

impl RateFit {
    /// True when the log regressor lowers the residual by more than 1%.
    pub fn log_improves(&self) -> bool {
        self.with_log.rss < 0.99 * self.power.rss
    }

    /// The log-corrected fit when it helps, the pure power law otherwise.
    pub fn best(&self) -> LinearFit {
        if self.log_improves() {
            self.with_log
        } else {
            self.power
        }
    }
}

fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64, f64) {
    let m = y.len();
    let k = columns.len();
    let x = DMatrix::from_fn(m, k, |i, j| columns[j][i]);
    let yv = DVector::from_column_slice(y);
    let svd = x.clone().svd(true, true);
    let coef = svd
        .solve(&yv, 1e-14)
        .expect("SVD solve with both factors available");
    let resid = &yv - &x * &coef;
    let rss = resid.norm_squared();
    let mean = yv.mean();
    let tss: f64 = yv.iter().map(|v| (v - mean).powi(2)).sum();
    let r2 = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    (coef.iter().copied().collect(), rss, r2)
}

fn window_logs(a: &DecaySeq, window: (usize, usize)) -> Result<(Vec<f64>, Vec<f64>)> {
    let (lo, hi) = window;
    if lo < 2 || hi <= lo {
        return Err(Error::InvalidInput(format!(
            "fit window ({lo}, {hi}) needs hi > lo >= 2"
        )));
    }
    if hi >= a.len() {
        return Err(Error::InvalidInput(format!(
            "fit window end {hi} beyond sequence horizon {}",
            a.horizon()
        )));
    }
    let mut ns = Vec::with_capacity(hi - lo + 1);
    let mut ys = Vec::with_capacity(hi - lo + 1);
    for n in lo..=hi {
        let v = a.values[n];
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NonPositiveValues { n, value: v });
        }
        ns.push(n as f64);
        ys.push(v.ln());
    }
    Ok((ns, ys))
}

/// Least-squares decay fit of `log a_n` over `window = (n_lo, n_hi)`.
pub fn rate_fit(a: &DecaySeq, window: (usize, usize)) -> Result<RateFit> {
    let (ns, ys) = window_logs(a, window)?;
    let ones = vec![1.0; ns.len()];
    let logn: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let loglogn: Vec<f64> = logn.iter().map(|l| l.ln()).collect();

    let (c, rss, r2) = least_squares(&[ones.clone(), logn.clone()], &ys);
    let power = LinearFit {
        gamma: -c[1],
        log_power: 0.0,
        intercept: c[0],
        r_squared: r2,
        rss,
    };
    let (c, rss, r2) = least_squares(&[ones, logn, loglogn], &ys);
    let with_log = LinearFit {
        gamma: -c[1],
        log_power: c[2],
        intercept: c[0],
        r_squared: r2,
        rss,
    };
    Ok(RateFit {
        gamma: with_log.gamma,
        log_power: with_log.log_power,
        r_squared: with_log.r_squared,
        with_log,
        power,
    })
}

/// Fit of `log a_n ~ 1 + n`; `gamma` is the exponential rate.
pub fn exponential_fit(a: &DecaySeq, window: (usize, usize)) -> Result<LinearFit> {
    let (ns, ys) = window_logs(a, window)?;
    let ones = vec![1.0; ns.len()];
    let (c, rss, r2) = least_squares(&[ones, ns], &ys);
    Ok(LinearFit {
        gamma: -c[1],
        log_power: 0.0,
        intercept: c[0],
        r_squared: r2,
        rss,
    })
}
