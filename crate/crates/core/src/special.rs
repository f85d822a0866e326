//! Hurwitz zeta and related tail sums of power laws.

use crate::numeric::TwoFloat;

// B_{2j} / (2j)!
const BERNOULLI_OVER_FACTORIAL: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3617.0 / 10_670_622_842_880_000.0,
    43_867.0 / 5_109_094_217_170_944_000.0,
    -174_611.0 / 802_857_662_698_291_200_000.0,
];

/// Hurwitz zeta `ζ(s, a) = Σ_{k≥0} (k + a)^{-s}` for `s > 1`, `a > 0`.
///
/// Euler–Maclaurin with the direct part pushed until `a + N >= 16`; relative
/// accuracy is close to machine precision for the exponents used here.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    assert!(s > 1.0, "hurwitz_zeta needs s > 1, got {s}");
    assert!(a > 0.0, "hurwitz_zeta needs a > 0, got {a}");
    let shift = if a < 16.0 { (16.0 - a).ceil() as usize } else { 0 };
    let mut direct = TwoFloat::ZERO;
    for k in 0..shift {
        direct = direct.add_f64((a + k as f64).powf(-s));
    }
    let x = a + shift as f64;
    let mut tail = x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // rising factorial s (s+1) ... (s+2j-2) times x^{-s-2j+1}
    let mut rising = s;
    let mut power = x.powf(-s - 1.0);
    let x2 = x * x;
    for (j, coeff) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let term = coeff * rising * power;
        tail += term;
        if term.abs() < 1e-18 * tail.abs() {
            break;
        }
        let m = 2.0 * j as f64;
        rising *= (s + m + 1.0) * (s + m + 2.0);
        power /= x2;
    }
    direct.add_f64(tail).value()
}

/// `Σ_{k > n} (k + 1)^{-γ} = ζ(γ, n + 2)`.
pub fn power_tail_sum(gamma: f64, n: usize) -> f64 {
    hurwitz_zeta(gamma, n as f64 + 2.0)
}

/// `Σ_{k > n} c (log(k+2))^u (k+1)^{-γ}` for `γ > 1`.
///
/// Exact through Hurwitz zeta when `u = 0`. Otherwise the first few hundred
/// terms are summed directly and the remainder is integrated after the
/// substitution `k + 1 = e^t`.
pub fn log_power_tail_sum(c: f64, gamma: f64, u: f64, n: usize) -> f64 {
    if u == 0.0 {
        return c * power_tail_sum(gamma, n);
    }
    let term = |k: f64| (k + 2.0).ln().powf(u) * (k + 1.0).powf(-gamma);
    let direct_terms = 512usize;
    let mut direct = TwoFloat::ZERO;
    for k in (n + 1)..=(n + direct_terms) {
        direct = direct.add_f64(term(k as f64));
    }
    // Σ_{k≥K} f(k) = ∫_{K-1/2}^∞ f + f'(K-1/2)/24 + O(f''')
    let start = (n + direct_terms) as f64 + 0.5;
    let step = 1e-3 * start;
    let slope = (term(start + step) - term(start - step)) / (2.0 * step);
    let t0 = (start + 1.0).ln();
    // integrand in t: (log(e^t + 1))^u e^{t(1-γ)}
    let integrand = |t: f64| (t.exp() + 1.0).ln().powf(u) * (t * (1.0 - gamma)).exp();
    let decay = gamma - 1.0;
    let span = 60.0 / decay;
    let panels = 400;
    let h = span / panels as f64;
    let mut integral = 0.0;
    for p in 0..panels {
        let a = t0 + p as f64 * h;
        integral += h * crate::numeric::cell_average(integrand, a, a + h);
    }
    c * (direct.value() + integral + slope / 24.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn riemann_values() {
        assert!((hurwitz_zeta(2.0, 1.0) - PI * PI / 6.0).abs() < 1e-14);
        assert!((hurwitz_zeta(4.0, 1.0) - PI.powi(4) / 90.0).abs() < 1e-14);
        // ζ(2, 1/2) = 3 ζ(2)
        assert!((hurwitz_zeta(2.0, 0.5) - PI * PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn matches_direct_summation_far_out() {
        // Σ_{k≥0} (k + 1000)^{-2.5}, brute force with an integral remainder
        let s = 2.5;
        let a = 1000.0;
        let mut direct = 0.0;
        let big = 2_000_000usize;
        for k in 0..big {
            direct += (k as f64 + a).powf(-s);
        }
        let rest = (big as f64 + a - 0.5).powf(1.0 - s) / (s - 1.0);
        let z = hurwitz_zeta(s, a);
        assert!((z - (direct + rest)).abs() / z < 1e-10);
    }

    #[test]
    fn log_tail_reduces_to_power_tail() {
        let exact = power_tail_sum(2.0, 100);
        let via_log = log_power_tail_sum(1.0, 2.0, 1e-12, 100);
        assert!((exact - via_log).abs() / exact < 1e-9, "{exact} vs {via_log}");
    }

    #[test]
    fn log_tail_against_long_direct_sum() {
        let (c, gamma, u, n) = (1.0, 2.0, 1.0, 50usize);
        let mut direct = 0.0;
        for k in (n + 1)..20_000_000 {
            let k = k as f64;
            direct += (k + 2.0).ln().powf(u) * (k + 1.0).powf(-gamma);
        }
        // remaining tail beyond 2e7 ~ log(x)/x
        let x: f64 = 2e7;
        direct += (x.ln() + 1.0) / x;
        let v = log_power_tail_sum(c, gamma, u, n);
        assert!((v - direct).abs() / v < 1e-7, "{v} vs {direct}");
    }
}
