use std::io::Write;

use serde::{Deserialize, Serialize};

use super::solve::{renewal_solve_accurate, RenewalSolution, SolveOptions};
use super::{op_norm, Matrix, OperatorSeq, SpectralData};
use crate::error::{Error, Result};
use crate::numeric::TwoFloat;
use crate::seq::{rate_fit, DecaySeq, RateFit};

/// Relative tolerance used when comparing `N(β-1)` with `β`.
const CLASS_TOL: f64 = 1e-9;

/// Decay class of the remainder after truncating the expansion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ErrorClass {
    /// `O(n^{-γ})`.
    Power(f64),
    /// `O(log n / n^{γ})`.
    LogOverPower(f64),
}

impl ErrorClass {
    /// Remainder class after the terms up to `order`: `n^{-β}` when
    /// `order·(β-1) > β`, `log n / n^β` on equality and `n^{-order·(β-1)}` below.
    pub fn for_order(order: usize, beta: f64) -> Self {
        let reached = order as f64 * (beta - 1.0);
        if (reached - beta).abs() <= CLASS_TOL * beta {
            ErrorClass::LogOverPower(beta)
        } else if reached > beta {
            ErrorClass::Power(beta)
        } else {
            ErrorClass::Power(reached)
        }
    }

    pub fn exponent(&self) -> f64 {
        match *self {
            ErrorClass::Power(g) | ErrorClass::LogOverPower(g) => g,
        }
    }

    pub fn has_log(&self) -> bool {
        matches!(self, ErrorClass::LogOverPower(_))
    }
}

impl std::fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ErrorClass::Power(g) => write!(f, "n^-{g}"),
            ErrorClass::LogOverPower(g) => write!(f, "log(n) n^-{g}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExpansionReport {
    pub horizon: usize,
    pub order: usize,
    pub beta: f64,
    pub mu: f64,
    pub t: Vec<Matrix>,
    pub predicted: Vec<Matrix>,
    /// `‖T_n - predicted_n‖`, evaluated from the unrounded `T_n`.
    pub residual_norms: Vec<f64>,
    /// `‖T_n - P/μ‖`.
    pub limit_distance: Vec<f64>,
    pub fit: Option<RateFit>,
    pub fitted_exponent: Option<f64>,
    pub predicted_class: ErrorClass,
}

impl ExpansionReport {
    pub fn residuals(&self) -> DecaySeq {
        DecaySeq::measured(self.residual_norms.clone())
    }

    /// Refit the residuals on another window.
    pub fn refit(&mut self, window: (usize, usize)) -> Result<&RateFit> {
        let fit = rate_fit(&self.residuals(), window)?;
        self.fitted_exponent = Some(fit.power.gamma);
        Ok(self.fit.insert(fit))
    }

    /// CSV with columns `n, limit_distance, residual, pred_ij...`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_expansion_csv(std::slice::from_ref(self), writer)
    }
}

/// Joint CSV for reports on the same input: `n, limit_distance`, one
/// `residual_order{k}` column per report, then the entries of the last report's
/// prediction in row-major order.
pub fn write_expansion_csv<W: Write>(reports: &[ExpansionReport], writer: W) -> Result<()> {
    let Some(last) = reports.last() else {
        return Ok(());
    };
    let d = last.t[0].nrows();
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["n".to_string(), "limit_distance".to_string()];
    header.extend(reports.iter().map(|r| format!("residual_order{}", r.order)));
    for i in 0..d {
        for j in 0..d {
            header.push(format!("prediction_{i}{j}"));
        }
    }
    w.write_record(&header)?;
    for n in 0..=last.horizon {
        let mut row = vec![n.to_string(), format!("{:.12e}", last.limit_distance[n])];
        row.extend(reports.iter().map(|r| format!("{:.12e}", r.residual_norms[n])));
        for i in 0..d {
            for j in 0..d {
                row.push(format!("{:.12e}", last.predicted[n][(i, j)]));
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `T_n ≈ P/μ + (1/μ²) Σ_{k>n} P_k`.
pub fn expansion_first_order(r: &OperatorSeq, s: &SpectralData, n_max: usize) -> Result<ExpansionReport> {
    expansion_order(r, s, n_max, 2)
}

/// Expansion truncated after the `μ^{-order}` term, `order ∈ {1, 2, 3, 4}`.
pub fn expansion_order(
    r: &OperatorSeq,
    s: &SpectralData,
    n_max: usize,
    order: usize,
) -> Result<ExpansionReport> {
    let mut reports = expansion_orders(r, s, n_max, &[order])?;
    Ok(reports.remove(0))
}

/// Several orders sharing one solution of the recursion.
pub fn expansion_orders(
    r: &OperatorSeq,
    s: &SpectralData,
    n_max: usize,
    orders: &[usize],
) -> Result<Vec<ExpansionReport>> {
    if let Some(&bad) = orders.iter().find(|&&o| o == 0 || o > 4) {
        return Err(Error::OrderUnsupported(bad));
    }
    let sol = renewal_solve_accurate(r, n_max, SolveOptions::default())?;
    let terms = ScalarTerms::new(r, s, n_max, orders.iter().copied().max().unwrap_or(1));
    let t: Vec<Matrix> = sol.matrices();
    let limit = &s.projection * terms.inv_mu.value();
    let limit_distance: Vec<f64> = t.iter().map(|tn| op_norm(&(tn - &limit))).collect();
    orders
        .iter()
        .map(|&order| {
            let coef: Vec<TwoFloat> = (0..=n_max).map(|n| terms.coefficient(n, order)).collect();
            let (predicted, residual_norms) = predict(&sol, s, &coef);
            let mut report = ExpansionReport {
                horizon: n_max,
                order,
                beta: r.beta(),
                mu: s.mu,
                t: t.clone(),
                predicted,
                residual_norms,
                limit_distance: limit_distance.clone(),
                fit: None,
                fitted_exponent: None,
                predicted_class: ErrorClass::for_order(order, r.beta()),
            };
            let window = (std::cmp::max(n_max / 10, 2), n_max);
            if n_max > 2 {
                // an exactly matched expansion has no decay to fit
                let _ = report.refit(window);
            }
            Ok(report)
        })
        .collect()
}

fn predict(sol: &RenewalSolution, s: &SpectralData, coef: &[TwoFloat]) -> (Vec<Matrix>, Vec<f64>) {
    let d = sol.dim();
    let mut predicted = Vec::with_capacity(coef.len());
    let mut norms = Vec::with_capacity(coef.len());
    for (n, c) in coef.iter().enumerate() {
        let exact = sol.entries(n);
        let mut pred = Matrix::zeros(d, d);
        let mut resid = Matrix::zeros(d, d);
        for j in 0..d {
            for i in 0..d {
                let p = c.mul_f64(s.projection[(i, j)]);
                let e = exact[j * d + i];
                pred[(i, j)] = p.value();
                resid[(i, j)] = (e.hi - p.hi) + (e.lo - p.lo);
            }
        }
        norms.push(op_norm(&resid));
        predicted.push(pred);
    }
    (predicted, norms)
}

/// Scalar coefficients of the projected expansion. Every correction is a
/// multiple of `P` since `P_k = c_k P` with `c_k = wᵀ(Σ_{l>k} R_l)v`.
struct ScalarTerms {
    inv_mu: TwoFloat,
    /// `τ_n = Σ_{k>n} c_k`.
    tau: Vec<TwoFloat>,
    third: Vec<f64>,
    fourth: Vec<f64>,
}

impl ScalarTerms {
    fn new(r: &OperatorSeq, s: &SpectralData, n_max: usize, max_order: usize) -> Self {
        let inv_mu = s.mu_accurate(r).recip();
        let tau: Vec<TwoFloat> = (0..=n_max)
            .map(|n| s.project_accurate(&r.second_tail_accurate(n)))
            .collect();
        let c: Vec<f64> = (0..=n_max)
            .map(|k| s.project_accurate(&r.tail_mass_accurate(k)).value())
            .collect();
        let tau_f: Vec<f64> = tau.iter().map(|t| t.value()).collect();
        let third = if max_order >= 3 {
            third_order_terms(&c, &tau_f)
        } else {
            Vec::new()
        };
        let fourth = if max_order >= 4 {
            fourth_order_terms(&c, &tau_f)
        } else {
            Vec::new()
        };
        ScalarTerms {
            inv_mu,
            tau,
            third,
            fourth,
        }
    }

    fn coefficient(&self, n: usize, order: usize) -> TwoFloat {
        let mut out = self.inv_mu;
        if order >= 2 {
            out = out + self.tau[n] * self.inv_mu * self.inv_mu;
        }
        let inv = self.inv_mu.value();
        if order >= 3 {
            out = out.add_f64(self.third[n] * inv.powi(3));
        }
        if order >= 4 {
            out = out.add_f64(self.fourth[n] * inv.powi(4));
        }
        out
    }
}

fn prefix_sums(c: &[f64]) -> Vec<f64> {
    // pre[j] = c_1 + ... + c_j
    let mut pre = vec![0.0; c.len()];
    for j in 1..c.len() {
        pre[j] = pre[j - 1] + c[j];
    }
    pre
}

/// `Σ_{k,l ≤ n, k+l > n} c_k c_l` for every n.
fn pair_sums_exceeding(c: &[f64], pre: &[f64]) -> Vec<f64> {
    (0..c.len())
        .map(|n| (1..=n).map(|k| c[k] * (pre[n] - pre[n - k])).sum())
        .collect()
}

/// `Σ_{k,l>n} P_k P_l - Σ_{0<k,l≤n, k+l>n} P_k P_l` as scalars.
fn third_order_terms(c: &[f64], tau: &[f64]) -> Vec<f64> {
    let pre = prefix_sums(c);
    let pairs = pair_sums_exceeding(c, &pre);
    tau.iter().zip(&pairs).map(|(t, d)| t * t - d).collect()
}

/// The nine triple sums of the `μ^{-4}` term, each reduced to O(n) work.
fn fourth_order_terms(c: &[f64], tau: &[f64]) -> Vec<f64> {
    let len = c.len();
    let pre = prefix_sums(c);
    let pairs = pair_sums_exceeding(c, &pre);
    // prefix sums of the triple convolution (c*c*c)_j with indices >= 1
    let mut cc = vec![0.0; len];
    for k in 1..len {
        for l in 1..len - k {
            cc[k + l] += c[k] * c[l];
        }
    }
    let mut ccc_pre = vec![0.0; len];
    let mut running = 0.0;
    for j in 1..len {
        let mut v = 0.0;
        for k in 1..j {
            v += c[k] * cc[j - k];
        }
        running += v;
        ccc_pre[j] = running;
    }

    let mut out = vec![0.0; len];
    let mut f = vec![0.0; len + 1];
    let mut h = vec![0.0; len + 1];
    for n in 0..len {
        let t = tau[n];
        let cn = pre[n];
        // k,l,m > n
        let s1 = t * t * t;
        // two indices in (0,n] with sum > n, the third beyond n
        let s2 = pairs[n] * t;
        let s3 = pairs[n] * t;
        let s4 = pairs[n] * t;
        // 0 < k,l,m ≤ n with one index pairing above n with both others
        let star: f64 = (1..=n).map(|k| c[k] * (cn - pre[n - k]).powi(2)).sum();
        let s5 = star;
        let s6 = star;
        let s7 = star;
        // 0 < k,l,m ≤ n, all pairwise sums > n:
        // f[a] = Σ_{l,m ∈ (a,n], l+m>n} c_l c_m
        f[n] = 0.0;
        for a in (0..n).rev() {
            let j = a + 1;
            let lo = std::cmp::max(j - 1, n - j);
            let both = if 2 * j > n { c[j] } else { 0.0 };
            f[a] = f[a + 1] + c[j] * (2.0 * (cn - pre[lo]) - both);
        }
        let s8: f64 = (1..=n).map(|k| c[k] * f[n - k]).sum();
        // all pairwise sums ≤ n, total > n:
        // h[b] = Σ_{l,m ∈ [1,b], l+m ≤ n} c_l c_m
        h[0] = 0.0;
        for b in 1..n {
            let lo = std::cmp::min(b - 1, n - b);
            let diag = if 2 * b <= n { c[b] } else { 0.0 };
            h[b] = h[b - 1] + c[b] * (2.0 * pre[lo] + diag);
        }
        let pairwise: f64 = (1..n).map(|k| c[k] * h[n - k]).sum();
        let s9 = pairwise - ccc_pre[n];
        out[n] = s1 - s2 - s3 - s4 - s5 - s6 - s7 + s8 + s9;
    }
    out
}
