use crate::error::Result;
use crate::lsv::{
    birkhoff_clt, correlation_monte_carlo, correlations, LsvConfig, LsvModel, Observable, ObservableSpec,
};
use crate::renewal::{expansion_order, spectral_data, OperatorSeq, SpectralOptions};
use crate::seq::{convolution_rate, convolve, rate_fit, synth_tail, DecaySeq, RateFit};
use crate::tower::{tower_correlation_monte_carlo, tower_correlations, LevelObservable, TowerModel};

use super::config::{ConvParams, ExperimentConfig, LsvParams, Module, RenewalParams, TowerParams};
use super::report::{fmt_float, Outcome, Table};

fn last_decade(horizon: usize) -> (usize, usize) {
    ((horizon / 10).max(2), horizon)
}

fn note_fit(out: &mut Outcome, fit: &RateFit) {
    out.note("fitted_exponent", fit.power.gamma);
    out.note("fit_r_squared", fit.power.r_squared);
    out.note("fitted_exponent_with_log", fit.with_log.gamma);
    out.note("fitted_log_power", fit.with_log.log_power);
    out.note("log_improves", fit.log_improves());
}

/// Dispatches on `run.module`; errors carry the module as context.
pub fn run_config(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let id = cfg.run.id.as_str();
    let module = cfg.run.module;
    let result = match module {
        Module::Renewal => run_renewal(id, cfg.renewal.as_ref().expect("validated")),
        Module::Conv => run_conv(id, cfg.conv.as_ref().expect("validated")),
        Module::Lsv => run_lsv(id, cfg.lsv.as_ref().expect("validated"), cfg.run.seed),
        Module::Tower => run_tower(id, cfg.tower.as_ref().expect("validated"), cfg.run.seed),
    };
    result.map_err(|e| e.context(format!("{} experiment `{id}`", module.name())))
}

/// Expansion of the scalar power-law renewal sequence: columns `n`,
/// `limit_distance`, `residual`, `prediction`.
pub fn run_renewal(id: &str, p: &RenewalParams) -> Result<Outcome> {
    let r = OperatorSeq::scalar_power_law(p.beta, p.horizon)?;
    let s = spectral_data(&r, SpectralOptions::default())?;
    let mut report = expansion_order(&r, &s, p.horizon, p.order)?;
    let window = p.window.unwrap_or(last_decade(p.horizon));
    let fit = *report.refit(window)?;

    let mut table = Table::new(["n", "limit_distance", "residual", "prediction"]);
    for n in 0..=p.horizon {
        table.push_numbers(
            n,
            &[report.limit_distance[n], report.residual_norms[n], report.predicted[n][(0, 0)]],
        );
    }
    let mut out = Outcome::new(id, "renewal", table);
    out.note("beta", p.beta);
    out.note("order", p.order);
    out.note("mu", s.mu);
    out.note("window", window);
    out.note("predicted_class", report.predicted_class.to_string());
    out.note("predicted_exponent", report.predicted_class.exponent());
    note_fit(&mut out, &fit);
    Ok(out)
}

/// `(n+1)^{-α} ⋆ (n+1)^{-β}` with its fitted rate against the case table.
pub fn run_conv(id: &str, p: &ConvParams) -> Result<Outcome> {
    let a = synth_tail(1.0, p.alpha, 0.0, p.horizon, None)?;
    let b = synth_tail(1.0, p.beta, 0.0, p.horizon, None)?;
    let c = convolve(&a, &b);
    let window = last_decade(p.horizon);
    let fit = rate_fit(&c, window)?;
    let (expected, expect_log) = convolution_rate(p.alpha, p.beta);

    let mut table = Table::new(["n", "a", "b", "convolution"]);
    for n in 0..=p.horizon {
        table.push_numbers(n, &[a.values[n], b.values[n], c.values[n]]);
    }
    let mut out = Outcome::new(id, "conv", table);
    out.note("alpha", p.alpha);
    out.note("beta", p.beta);
    out.note("window", window);
    out.note("expected_exponent", expected);
    out.note("expected_log", expect_log);
    note_fit(&mut out, &fit);
    Ok(out)
}

/// Ulam model of the LSV map from the lsv parameters.
pub fn lsv_model(p: &LsvParams) -> Result<LsvModel> {
    let config = LsvConfig {
        alpha: p.alpha,
        ladder_levels: p.grid,
        max_width: p.max_width,
        y_cells: ExperimentConfig::y_cells(p),
        tail_points: LsvConfig::new(p.alpha).tail_points.max(p.grid),
    };
    LsvModel::build(&config)
}

/// The observable pair `(f, g)`: `g` defaults to the given `f`, and `f` is
/// replaced by its zero-mean combination with the partner when asked.
pub fn lsv_observables(model: &LsvModel, p: &LsvParams) -> Result<(Observable, Observable)> {
    let g_spec: ObservableSpec = p.g.clone().unwrap_or_else(|| p.f.clone());
    let f = if p.zero_mean {
        Observable::zero_mean_combination(model, p.f.clone(), p.zero_mean_partner.clone())?
    } else {
        Observable::new(model, p.f.clone())?
    };
    let g = Observable::new(model, g_spec)?;
    Ok((f, g))
}

/// Correlations of the LSV map with the leading-term prediction
/// `C n^{1-1/α} ∫f ∫g` and the tail-sum prediction `Σ_{k>n} m[φ>k] ∫f ∫g`.
pub fn run_lsv(id: &str, p: &LsvParams, seed: u64) -> Result<Outcome> {
    let model = lsv_model(p)?;
    let (f, g) = lsv_observables(&model, p)?;
    let cors = correlations(&model, &f, &g, p.horizon)?;
    let constant = model.leading_constant()?;
    let means = f.mean * g.mean;
    let power = 1.0 - 1.0 / p.alpha;
    let mc = (p.mc_samples > 0).then(|| correlation_monte_carlo(&model, &f, &g, p.horizon, p.mc_samples, seed));

    let mut header = vec!["n", "cor", "leading_prediction", "ratio", "tail_sum_prediction", "tail_sum_ratio"];
    if mc.is_some() {
        header.extend(["monte_carlo", "monte_carlo_se"]);
    }
    let mut table = Table::new(header);
    let mut ratios = Vec::new();
    let mut tail_ratios = Vec::new();
    for (n, &c) in cors.iter().enumerate() {
        let leading = if n == 0 { f64::NAN } else { constant * (n as f64).powf(power) * means };
        let tail = model.return_tail_sum(n) * means;
        let mut row = vec![c, leading, c / leading, tail, c / tail];
        if let Some(mc) = &mc {
            row.extend([mc[n].value, mc[n].std_error]);
        }
        if n >= p.horizon / 2 {
            ratios.push(c / leading);
            tail_ratios.push(c / tail);
        }
        table.push_numbers(n, &row);
    }
    let window = last_decade(p.horizon);
    let abs = DecaySeq::measured(cors.iter().map(|c| c.abs()).collect());

    let mut out = Outcome::new(id, "lsv", table);
    out.note("alpha", p.alpha);
    out.note("cells", model.grid.len());
    out.note("density_residual", model.density_residual);
    out.note("density_at_half", model.density_at_half());
    out.note("leading_constant", constant);
    out.note("mean_f", f.mean);
    out.note("mean_g", g.mean);
    out.note("window", window);
    out.note("predicted_exponent", if p.zero_mean { -1.0 / p.alpha } else { power });
    match rate_fit(&abs, window) {
        Ok(fit) => {
            // reported as the slope of log |Cor| against log n
            out.note("fitted_exponent", -fit.power.gamma);
            out.note("fit_r_squared", fit.power.r_squared);
        }
        Err(e) => out.note("fit_error", e.to_string()),
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    if !p.zero_mean {
        out.note("mean_ratio_upper_half", mean(&ratios));
        out.note("mean_tail_sum_ratio_upper_half", mean(&tail_ratios));
    }
    if p.clt {
        let clt_f = if p.zero_mean { f.clone() } else { Observable::zero_mean_combination(&model, p.f.clone(), p.zero_mean_partner.clone())? };
        let report = birkhoff_clt(&model, &clt_f, p.clt_steps, p.clt_samples, seed)?;
        out.note("clt_ks_statistic", report.ks_statistic);
        out.note("clt_sigma_hat_sq", report.sigma_hat_sq);
        out.note("clt_sigma_green_kubo_sq", report.sigma_green_kubo_sq);
    }
    Ok(out)
}

/// Tower model from the tower parameters.
pub fn tower_model(p: &TowerParams) -> Result<TowerModel> {
    match (&p.returns, p.beta) {
        (Some(list), _) => TowerModel::from_returns(list),
        (None, Some(beta)) => {
            let survival = synth_tail(p.c, beta, 0.0, p.truncation, None)?;
            TowerModel::build(&survival, p.truncation)
        }
        (None, None) => unreachable!("validated"),
    }
}

/// `f = 1_{Δ0} - (m_0/m_1) 1_{Δ1}`, zero mean and supported on two levels.
pub fn tower_zero_mean_observable(tower: &TowerModel) -> LevelObservable {
    LevelObservable::levels(vec![1.0, -tower.level_mass(0) / tower.level_mass(1)])
}

fn mc_lags(horizon: usize) -> Vec<usize> {
    let mut lags = Vec::new();
    let mut decade = 1;
    while decade <= horizon {
        for k in [1, 2, 5] {
            if k * decade <= horizon {
                lags.push(k * decade);
            }
        }
        decade *= 10;
    }
    lags
}

/// Exact tower correlations against `Σ_{k>n} m_k ∫f ∫g` (level-0 indicators),
/// or the decay for a zero-mean `f` against `g = 1_{Δ0}`.
pub fn run_tower(id: &str, p: &TowerParams, seed: u64) -> Result<Outcome> {
    let tower = tower_model(p)?;
    let g = LevelObservable::indicator(0);
    let f = if p.zero_mean { tower_zero_mean_observable(&tower) } else { g.clone() };
    let cors = tower_correlations(&tower, &f, &g, p.horizon)?;
    let means = f.mean(&tower) * g.mean(&tower);
    let lags = if p.mc_samples > 0 { mc_lags(p.horizon) } else { Vec::new() };

    let mut header = vec!["n", "cor", "leading_prediction", "ratio"];
    if !lags.is_empty() {
        header.extend(["monte_carlo", "monte_carlo_se"]);
    }
    let mut table = Table::new(header);
    for (n, &c) in cors.iter().enumerate() {
        let leading = tower.level_tail_sum(n) * means;
        let mut row = vec![n.to_string(), fmt_float(c), fmt_float(leading), fmt_float(c / leading)];
        if !lags.is_empty() {
            if lags.contains(&n) {
                let est = tower_correlation_monte_carlo(&tower, &f, &g, n, p.mc_samples, seed)?;
                row.extend([fmt_float(est.value), fmt_float(est.std_error)]);
            } else {
                row.extend([String::new(), String::new()]);
            }
        }
        table.push(row);
    }
    let window = last_decade(p.horizon);
    let abs = DecaySeq::measured(cors.iter().map(|c| c.abs()).collect());

    let mut out = Outcome::new(id, "tower", table);
    out.note("beta", tower.beta);
    out.note("mean_return", tower.mean_return);
    out.note("gcd", tower.gcd);
    out.note("window", window);
    if !p.zero_mean {
        out.note("ratio_at_horizon", cors[p.horizon] / (tower.level_tail_sum(p.horizon) * means));
    }
    out.note("predicted_exponent", if p.zero_mean { tower.beta } else { tower.beta - 1.0 });
    match rate_fit(&abs, window) {
        Ok(fit) => note_fit(&mut out, &fit),
        Err(e) => out.note("fit_error", e.to_string()),
    }
    Ok(out)
}
