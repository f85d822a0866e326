use std::sync::OnceLock;

use oprenewal::lsv::{
    correlation_monte_carlo, correlations, green_kubo_variance, GreenKuboOptions, LsvConfig, LsvModel,
    Observable, ObservableSpec,
};
use oprenewal::seq::{rate_fit, DecaySeq};

fn config(alpha: f64) -> LsvConfig {
    LsvConfig {
        alpha,
        ladder_levels: 4000,
        max_width: 0.005,
        y_cells: 1000,
        tail_points: 20_000,
    }
}

fn model() -> &'static LsvModel {
    static MODEL: OnceLock<LsvModel> = OnceLock::new();
    MODEL.get_or_init(|| LsvModel::build(&config(0.6)).unwrap())
}

#[test]
fn discretization_invariants() {
    let m = model();
    for i in (0..m.grid.len()).step_by(97) {
        assert!((m.ulam.row_sum(i) - 1.0).abs() < 1e-12, "row {i}");
    }
    let total: f64 = m.mass.iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert!(m.mass.iter().all(|&v| v >= 0.0));
    assert!(m.density_residual < 1e-8);
}

#[test]
fn density_at_half_is_stable_under_refinement() {
    let coarse = model().density_at_half();
    let fine = LsvModel::build(&LsvConfig { y_cells: 2000, max_width: 0.0025, ..config(0.6) })
        .unwrap()
        .density_at_half();
    assert!((coarse / fine - 1.0).abs() < 0.01, "{coarse} vs {fine}");
}

#[test]
fn return_tail_decays_like_inverse_alpha() {
    let m = model();
    let tail = DecaySeq::measured((0..=2000).map(|n| m.return_tail(n).unwrap()).collect());
    let gamma = rate_fit(&tail, (200, 2000)).unwrap().power.gamma;
    assert!((gamma - 1.0 / 0.6).abs() < 0.05, "{gamma}");
    let total: f64 = (0..=2000).map(|n| m.return_tail(n).unwrap()).sum::<f64>() + m.return_tail_sum(2000);
    // Kac: Σ_{n≥0} m[φ > n] restricted to Y is the mass of the whole interval
    assert!((total - 1.0).abs() < 0.02, "{total}");
}

#[test]
fn monte_carlo_agrees_with_ulam_within_three_standard_errors() {
    let m = model();
    let f = Observable::new(m, ObservableSpec::bump(0.6, 0.9, 0.05)).unwrap();
    let exact = correlations(m, &f, &f, 50).unwrap();
    let mc = correlation_monte_carlo(m, &f, &f, 50, 400_000, 11);
    for n in 0..=50 {
        let z = (mc[n].value - exact[n]) / mc[n].std_error;
        assert!(z.abs() < 3.0, "n = {n}: {} vs {} (se {})", mc[n].value, exact[n], mc[n].std_error);
    }
}

#[test]
fn green_kubo_of_coboundary_vanishes() {
    let m = model();
    let f = Observable::new(m, ObservableSpec::coboundary(ObservableSpec::bump(0.6, 0.9, 0.05))).unwrap();
    let gk = green_kubo_variance(m, &f, GreenKuboOptions::default()).unwrap();
    let var = f.variance(&m.mass);
    assert!(gk.sigma2 < 1e-3 * var, "{} vs Var {}", gk.sigma2, var);
}
