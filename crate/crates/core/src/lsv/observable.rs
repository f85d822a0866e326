use serde::{Deserialize, Serialize};

use super::map::{apply_map, LeftBranch};
use super::model::LsvModel;
use crate::error::{Error, Result};
use crate::numeric::cell_average;

/// Lipschitz test functions on `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableSpec {
    /// 1 on `[lo + ramp, hi - ramp]`, 0 off `(lo, hi)`, cubic smoothstep ramps.
    Bump { lo: f64, hi: f64, ramp: f64 },
    /// `Σ weight · term`.
    Sum { terms: Vec<WeightedTerm> },
    /// `g∘T - g`.
    Coboundary { of: Box<ObservableSpec> },
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedTerm {
    pub weight: f64,
    pub term: ObservableSpec,
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

impl ObservableSpec {
    pub fn bump(lo: f64, hi: f64, ramp: f64) -> Self {
        ObservableSpec::Bump { lo, hi, ramp }
    }

    pub fn scaled(self, weight: f64) -> Self {
        ObservableSpec::Sum {
            terms: vec![WeightedTerm { weight, term: self }],
        }
    }

    pub fn minus(self, weight: f64, other: ObservableSpec) -> Self {
        ObservableSpec::Sum {
            terms: vec![
                WeightedTerm { weight: 1.0, term: self },
                WeightedTerm {
                    weight: -weight,
                    term: other,
                },
            ],
        }
    }

    pub fn coboundary(of: ObservableSpec) -> Self {
        ObservableSpec::Coboundary { of: Box::new(of) }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ObservableSpec::Bump { lo, hi, ramp } => {
                if !(0.0 <= *lo && lo < hi && *hi <= 1.0 && *ramp >= 0.0 && 2.0 * ramp <= hi - lo) {
                    return Err(Error::UnsupportedObservable(format!(
                        "bump needs 0 <= lo < hi <= 1 and 0 <= 2 ramp <= hi - lo (lo={lo}, hi={hi}, ramp={ramp})"
                    )));
                }
                Ok(())
            }
            ObservableSpec::Sum { terms } => terms.iter().try_for_each(|t| t.term.validate()),
            ObservableSpec::Coboundary { of } => of.validate(),
            ObservableSpec::Zero => Ok(()),
        }
    }

    pub fn eval(&self, x: f64, branch: &LeftBranch) -> f64 {
        match self {
            ObservableSpec::Bump { lo, hi, ramp } => {
                if x <= *lo || x >= *hi {
                    0.0
                } else if *ramp == 0.0 {
                    1.0
                } else {
                    smoothstep((x - lo) / ramp).min(smoothstep((hi - x) / ramp))
                }
            }
            ObservableSpec::Sum { terms } => terms.iter().map(|t| t.weight * t.term.eval(x, branch)).sum(),
            ObservableSpec::Coboundary { of } => of.eval(apply_map(branch, x), branch) - of.eval(x, branch),
            ObservableSpec::Zero => 0.0,
        }
    }

    /// Interval hull of the support, `None` for the zero function.
    pub fn support(&self, branch: &LeftBranch) -> Option<(f64, f64)> {
        match self {
            ObservableSpec::Bump { lo, hi, .. } => Some((*lo, *hi)),
            ObservableSpec::Sum { terms } => terms
                .iter()
                .filter(|t| t.weight != 0.0)
                .filter_map(|t| t.term.support(branch))
                .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1))),
            ObservableSpec::Coboundary { of } => {
                let (c, d) = of.support(branch)?;
                // T^{-1}(c, d) has a left piece and a right piece
                let lo = branch.inverse(c).min(c);
                let hi = (0.5 * (d + 1.0)).max(d);
                Some((lo, hi))
            }
            ObservableSpec::Zero => None,
        }
    }
}

/// An observable sampled as cell averages on a model's grid.
#[derive(Clone, Debug)]
pub struct Observable {
    pub spec: ObservableSpec,
    pub values: Vec<f64>,
    /// `∫ f dμ` under the discrete invariant measure.
    pub mean: f64,
    pub support: Option<(f64, f64)>,
}

impl Observable {
    pub fn new(model: &LsvModel, spec: ObservableSpec) -> Result<Self> {
        spec.validate()?;
        let grid = &model.grid;
        let branch = model.branch;
        let values: Vec<f64> = (0..grid.len())
            .map(|i| {
                let (a, b) = grid.cell(i);
                cell_average(|x| spec.eval(x, &branch), a, b)
            })
            .collect();
        let mean = values.iter().zip(&model.mass).map(|(v, m)| v * m).sum();
        let support = spec.support(&branch);
        Ok(Observable {
            spec,
            values,
            mean,
            support,
        })
    }

    /// `a - λ b` with `λ` chosen so that the mean vanishes.
    pub fn zero_mean_combination(model: &LsvModel, a: ObservableSpec, b: ObservableSpec) -> Result<Self> {
        let oa = Observable::new(model, a.clone())?;
        let ob = Observable::new(model, b.clone())?;
        if ob.mean == 0.0 {
            return Err(Error::UnsupportedObservable("second observable has zero mean".into()));
        }
        let spec = a.minus(oa.mean / ob.mean, b);
        let values = oa
            .values
            .iter()
            .zip(&ob.values)
            .map(|(x, y)| x - oa.mean / ob.mean * y)
            .collect::<Vec<_>>();
        let mean = values.iter().zip(&model.mass).map(|(v, m)| v * m).sum();
        Ok(Observable {
            support: spec.support(&model.branch),
            spec,
            values,
            mean,
        })
    }

    pub fn eval(&self, x: f64, branch: &LeftBranch) -> f64 {
        self.spec.eval(x, branch)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Observable {
            spec: self.spec.clone().scaled(c),
            values: self.values.iter().map(|v| v * c).collect(),
            mean: self.mean * c,
            support: self.support,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// `∫ f² dμ - (∫ f dμ)²` under the discrete measure.
    pub fn variance(&self, mass: &[f64]) -> f64 {
        let second: f64 = self.values.iter().zip(mass).map(|(v, m)| v * v * m).sum();
        second - self.mean * self.mean
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_shape() {
        let b = ObservableSpec::bump(0.6, 0.9, 0.05);
        let br = LeftBranch::Lsv { alpha: 0.5 };
        assert_eq!(b.eval(0.59, &br), 0.0);
        assert_eq!(b.eval(0.75, &br), 1.0);
        assert!((b.eval(0.625, &br) - 0.5).abs() < 1e-12);
        assert_eq!(b.support(&br), Some((0.6, 0.9)));
    }

    #[test]
    fn coboundary_support_reaches_preimages() {
        let g = ObservableSpec::coboundary(ObservableSpec::bump(0.6, 0.9, 0.05));
        let br = LeftBranch::Lsv { alpha: 0.5 };
        let (lo, hi) = g.support(&br).unwrap();
        assert!(lo < 0.5 && lo > 0.2);
        assert!((hi - 0.95).abs() < 1e-12);
    }

    #[test]
    fn invalid_bump_rejected() {
        assert!(ObservableSpec::bump(0.9, 0.6, 0.01).validate().is_err());
        assert!(ObservableSpec::bump(0.6, 0.7, 0.2).validate().is_err());
    }

    #[test]
    fn spec_round_trips_through_toml() {
        let spec = ObservableSpec::bump(0.55, 0.7, 0.04).minus(0.3, ObservableSpec::bump(0.75, 0.95, 0.04));
        let text = toml::to_string(&spec).unwrap();
        let back: ObservableSpec = toml::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }
}
