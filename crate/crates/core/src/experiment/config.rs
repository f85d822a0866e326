use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lsv::ObservableSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Module {
    Renewal,
    Conv,
    Lsv,
    Tower,
}

impl Module {
    pub fn name(self) -> &'static str {
        match self {
            Module::Renewal => "renewal",
            Module::Conv => "conv",
            Module::Lsv => "lsv",
            Module::Tower => "tower",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub module: Module,
    pub id: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_seed() -> u64 {
    1
}

/// Scalar power law `R_n ∝ n^{-(β+1)}` normalized to total mass one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenewalParams {
    pub beta: f64,
    pub horizon: usize,
    #[serde(default = "default_order")]
    pub order: usize,
    /// Fit window; defaults to the last decade.
    #[serde(default)]
    pub window: Option<(usize, usize)>,
}

fn default_order() -> usize {
    2
}

/// Convolution of `(n+1)^{-α}` with `(n+1)^{-β}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvParams {
    pub alpha: f64,
    pub beta: f64,
    pub horizon: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LsvParams {
    pub alpha: f64,
    /// Ladder intervals resolved near the fixed point.
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Cells on `(1/2, 1]`; defaults to `grid / 5`.
    #[serde(default)]
    pub y_cells: Option<usize>,
    #[serde(default = "default_max_width")]
    pub max_width: f64,
    pub horizon: usize,
    #[serde(default = "default_f")]
    pub f: ObservableSpec,
    #[serde(default)]
    pub g: Option<ObservableSpec>,
    /// Replace `f` by `f - λ zero_mean_partner` with zero mean.
    #[serde(default)]
    pub zero_mean: bool,
    #[serde(default = "default_partner")]
    pub zero_mean_partner: ObservableSpec,
    #[serde(default)]
    pub clt: bool,
    #[serde(default = "default_clt_steps")]
    pub clt_steps: usize,
    #[serde(default = "default_clt_samples")]
    pub clt_samples: usize,
    /// Orbits for the Monte Carlo cross-check; zero skips it.
    #[serde(default)]
    pub mc_samples: usize,
}

fn default_grid() -> usize {
    20_000
}

fn default_max_width() -> f64 {
    0.0025
}

fn default_f() -> ObservableSpec {
    ObservableSpec::bump(0.6, 0.9, 0.05)
}

fn default_partner() -> ObservableSpec {
    ObservableSpec::bump(0.75, 0.95, 0.04)
}

fn default_clt_steps() -> usize {
    10_000
}

fn default_clt_samples() -> usize {
    10_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerParams {
    /// Survival `P(R > n) = c (n+1)^{-β}`; ignored when `returns` is given.
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    /// Explicit return law `(R_i, p_i)`.
    #[serde(default)]
    pub returns: Option<Vec<(u64, f64)>>,
    pub horizon: usize,
    #[serde(default)]
    pub zero_mean: bool,
    #[serde(default)]
    pub mc_samples: usize,
}

fn default_c() -> f64 {
    1.0
}

fn default_truncation() -> usize {
    10_000
}

/// A single experiment: the `[run]` table plus the section of its module.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub renewal: Option<RenewalParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conv: Option<ConvParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lsv: Option<LsvParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tower: Option<TowerParams>,
}

fn bad(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("key `{key}`: {msg}"))
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(key, format!("must be positive and finite, got {v}")))
    }
}

impl ExperimentConfig {
    /// Parses TOML and validates it. Errors name the offending key.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)?;
        let cfg = Self::from_toml(&text)?;
        Ok((cfg, text))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.run.id.is_empty()
            || !self
                .run
                .id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.')
        {
            return Err(bad("run.id", "must be non-empty, using [A-Za-z0-9._-]"));
        }
        let sections = [
            (Module::Renewal, self.renewal.is_some()),
            (Module::Conv, self.conv.is_some()),
            (Module::Lsv, self.lsv.is_some()),
            (Module::Tower, self.tower.is_some()),
        ];
        for (module, present) in sections {
            if module == self.run.module && !present {
                return Err(bad(module.name(), "section required by run.module is missing"));
            }
            if module != self.run.module && present {
                return Err(bad(
                    module.name(),
                    format!("section present but run.module is `{}`", self.run.module.name()),
                ));
            }
        }
        if let Some(p) = &self.renewal {
            if !(p.beta > 1.0 && p.beta.is_finite()) {
                return Err(bad("beta", format!("must exceed 1, got {}", p.beta)));
            }
            if p.horizon < 20 {
                return Err(bad("horizon", "must be at least 20"));
            }
            if !(1..=4).contains(&p.order) {
                return Err(bad("order", format!("must be in 1..=4, got {}", p.order)));
            }
            if let Some((lo, hi)) = p.window {
                if lo < 2 || hi <= lo || hi > p.horizon {
                    return Err(bad("window", format!("({lo}, {hi}) needs 2 <= lo < hi <= horizon")));
                }
            }
        }
        if let Some(p) = &self.conv {
            positive("alpha", p.alpha)?;
            positive("beta", p.beta)?;
            if p.horizon < 20 {
                return Err(bad("horizon", "must be at least 20"));
            }
        }
        if let Some(p) = &self.lsv {
            if !(p.alpha > 0.0 && p.alpha < 1.0) {
                return Err(bad("alpha", format!("must lie in (0, 1), got {}", p.alpha)));
            }
            if p.grid == 0 {
                return Err(bad("grid", "must be positive"));
            }
            if p.y_cells.is_some_and(|y| y < 2) {
                return Err(bad("y_cells", "must be at least 2"));
            }
            positive("max_width", p.max_width)?;
            if p.horizon < 20 || p.horizon > p.grid {
                return Err(bad("horizon", "must lie in [20, grid]"));
            }
            p.f.validate().map_err(|e| bad("f", e))?;
            if let Some(g) = &p.g {
                g.validate().map_err(|e| bad("g", e))?;
            }
            p.zero_mean_partner
                .validate()
                .map_err(|e| bad("zero_mean_partner", e))?;
            if p.clt && (p.clt_steps == 0 || p.clt_samples < 2) {
                return Err(bad("clt_samples", "CLT needs clt_steps >= 1 and clt_samples >= 2"));
            }
        }
        if let Some(p) = &self.tower {
            match (&p.returns, p.beta) {
                (Some(list), _) => {
                    if list.is_empty() {
                        return Err(bad("returns", "must not be empty"));
                    }
                }
                (None, Some(beta)) => {
                    if !(beta > 1.0 && beta.is_finite()) {
                        return Err(bad("beta", format!("must exceed 1, got {beta}")));
                    }
                    positive("c", p.c)?;
                    if p.truncation < 2 {
                        return Err(bad("truncation", "must be at least 2"));
                    }
                }
                (None, None) => return Err(bad("beta", "missing (or give `returns`)")),
            }
            if p.horizon < 20 {
                return Err(bad("horizon", "must be at least 20"));
            }
        }
        Ok(())
    }

    pub fn y_cells(p: &LsvParams) -> usize {
        p.y_cells.unwrap_or((p.grid / 5).max(2))
    }
}
