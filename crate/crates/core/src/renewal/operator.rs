use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use super::{op_norm, Matrix};
use crate::error::{Error, Result};
use crate::numeric::{accurate_sum, TwoFloat};
use crate::special::hurwitz_zeta;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailMode {
    /// `R_n = 0` for `n > M`.
    ExactFinite,
    /// `R_n = A n^{-(β+1)}` for `n > M`.
    Asymptotic,
}

/// First-return operators `R_1..R_M` with an optional power-law continuation.
#[derive(Clone, Debug)]
pub struct OperatorSeq {
    dim: usize,
    terms: Vec<Matrix>,
    beta: f64,
    tail_mode: TailMode,
    amplitude: Option<Matrix>,
    // suffix[n] = Σ_{l>n} R_l and weighted[n] = Σ_{l>n} l R_l, both including
    // the continuation, entrywise in double-double; n = 0..=M
    suffix: Vec<Vec<TwoFloat>>,
    weighted: Vec<Vec<TwoFloat>>,
}

impl OperatorSeq {
    /// `terms[k]` is `R_{k+1}`. In asymptotic mode the continuation is anchored
    /// at the last term: `A = R_M M^{β+1}`.
    pub fn new(terms: Vec<Matrix>, beta: f64, tail_mode: TailMode) -> Result<Self> {
        let amplitude = match tail_mode {
            TailMode::ExactFinite => None,
            TailMode::Asymptotic => {
                let m = terms.len();
                let last = terms.last().ok_or_else(|| {
                    Error::InvalidInput("asymptotic tail needs at least one term".into())
                })?;
                Some(last * (m as f64).powf(beta + 1.0))
            }
        };
        Self::build(terms, beta, tail_mode, amplitude)
    }

    /// Asymptotic mode with an explicit continuation `R_n = A n^{-(β+1)}`.
    pub fn with_tail_amplitude(terms: Vec<Matrix>, beta: f64, amplitude: Matrix) -> Result<Self> {
        Self::build(terms, beta, TailMode::Asymptotic, Some(amplitude))
    }

    fn build(
        terms: Vec<Matrix>,
        beta: f64,
        tail_mode: TailMode,
        amplitude: Option<Matrix>,
    ) -> Result<Self> {
        let dim = match terms.first() {
            Some(t) => t.nrows(),
            None => amplitude.as_ref().map(|a| a.nrows()).unwrap_or(0),
        };
        if dim == 0 {
            return Err(Error::InvalidInput("operator dimension must be positive".into()));
        }
        if !(beta > 1.0) {
            return Err(Error::InvalidInput(format!("tail exponent beta = {beta} must exceed 1")));
        }
        for (k, t) in terms.iter().chain(amplitude.iter()).enumerate() {
            if t.nrows() != dim || t.ncols() != dim {
                return Err(Error::InvalidInput(format!(
                    "term {} is {}x{}, expected {dim}x{dim}",
                    k + 1,
                    t.nrows(),
                    t.ncols()
                )));
            }
            if t.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("term {} is not finite", k + 1)));
            }
        }
        let mut seq = OperatorSeq {
            dim,
            terms,
            beta,
            tail_mode,
            amplitude,
            suffix: Vec::new(),
            weighted: Vec::new(),
        };
        seq.cache_suffix_sums();
        Ok(seq)
    }

    fn cache_suffix_sums(&mut self) {
        let d2 = self.dim * self.dim;
        let m = self.terms.len();
        let mut acc = vec![TwoFloat::ZERO; d2];
        let mut wacc = vec![TwoFloat::ZERO; d2];
        if let Some(a) = &self.amplitude {
            let z1 = hurwitz_zeta(self.beta + 1.0, m as f64 + 1.0);
            let z0 = hurwitz_zeta(self.beta, m as f64 + 1.0);
            for (idx, v) in a.iter().enumerate() {
                acc[idx] = TwoFloat::product(*v, z1);
                wacc[idx] = TwoFloat::product(*v, z0);
            }
        }
        let mut suffix = vec![acc.clone(); m + 1];
        let mut weighted = vec![wacc.clone(); m + 1];
        for n in (0..m).rev() {
            let term = &self.terms[n];
            let l = (n + 1) as f64;
            for (idx, v) in term.iter().enumerate() {
                acc[idx] = acc[idx].add_f64(*v);
                wacc[idx] = wacc[idx] + TwoFloat::product(*v, l);
            }
            suffix[n] = acc.clone();
            weighted[n] = wacc.clone();
        }
        self.suffix = suffix;
        self.weighted = weighted;
    }

    /// Scalar sequence `R_n = coeffs[n-1]`, exact finite.
    pub fn scalar(coeffs: &[f64], beta: f64) -> Result<Self> {
        let terms = coeffs.iter().map(|&c| DMatrix::from_element(1, 1, c)).collect();
        Self::new(terms, beta, TailMode::ExactFinite)
    }

    /// Scalar `R_n ∝ n^{-(β+1)}` with `Σ_{n≥1} R_n = 1`, stored up to `horizon`
    /// with the exact power-law continuation beyond. The continuation amplitude
    /// absorbs the rounding of the stored terms so the total mass is 1 in
    /// double-double.
    pub fn scalar_power_law(beta: f64, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidInput("horizon must be positive".into()));
        }
        if !(beta > 1.0) {
            return Err(Error::InvalidInput(format!("tail exponent beta = {beta} must exceed 1")));
        }
        let z = hurwitz_zeta(beta + 1.0, 1.0);
        let coeffs: Vec<f64> = (1..=horizon)
            .map(|n| (n as f64).powf(-(beta + 1.0)) / z)
            .collect();
        let stored = accurate_sum(coeffs.iter().rev().copied());
        let remaining = TwoFloat::ONE - stored;
        let amp = remaining.value() / hurwitz_zeta(beta + 1.0, horizon as f64 + 1.0);
        let terms = coeffs.iter().map(|&c| DMatrix::from_element(1, 1, c)).collect();
        Self::with_tail_amplitude(terms, beta, DMatrix::from_element(1, 1, amp))
    }

    /// `R_n = r_n Π` for a scalar sequence `r` and a fixed matrix `Π`.
    pub fn lift(scalar: &OperatorSeq, pi: &Matrix) -> Result<Self> {
        if scalar.dim != 1 {
            return Err(Error::InvalidInput("lift expects a scalar sequence".into()));
        }
        let terms = scalar.terms.iter().map(|t| pi * t[(0, 0)]).collect();
        let amplitude = scalar.amplitude.as_ref().map(|a| pi * a[(0, 0)]);
        Self::build(terms, scalar.beta, scalar.tail_mode, amplitude)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Truncation horizon `M` (number of stored terms).
    pub fn horizon(&self) -> usize {
        self.terms.len()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn tail_mode(&self) -> TailMode {
        self.tail_mode
    }

    pub fn tail_amplitude(&self) -> Option<&Matrix> {
        self.amplitude.as_ref()
    }

    pub fn stored_terms(&self) -> &[Matrix] {
        &self.terms
    }

    /// `R_n` for `n >= 1`, using the continuation past the horizon.
    pub fn term(&self, n: usize) -> Matrix {
        assert!(n >= 1, "R_n is defined for n >= 1");
        if n <= self.terms.len() {
            self.terms[n - 1].clone()
        } else {
            match &self.amplitude {
                Some(a) => a * (n as f64).powf(-(self.beta + 1.0)),
                None => Matrix::zeros(self.dim, self.dim),
            }
        }
    }

    fn from_entries(&self, entries: &[TwoFloat]) -> Matrix {
        Matrix::from_iterator(self.dim, self.dim, entries.iter().map(|e| e.value()))
    }

    /// `Σ_{l>n} R_l` entrywise in double-double.
    pub(crate) fn tail_mass_accurate(&self, n: usize) -> Vec<TwoFloat> {
        if n < self.suffix.len() {
            return self.suffix[n].clone();
        }
        match &self.amplitude {
            Some(a) => {
                let z = hurwitz_zeta(self.beta + 1.0, n as f64 + 1.0);
                a.iter().map(|v| TwoFloat::product(*v, z)).collect()
            }
            None => vec![TwoFloat::ZERO; self.dim * self.dim],
        }
    }

    /// `Σ_{l>n} R_l`.
    pub fn tail_mass(&self, n: usize) -> Matrix {
        self.from_entries(&self.tail_mass_accurate(n))
    }

    /// `Σ_{l>n} (l-n-1) R_l = Σ_{k>n} Σ_{l>k} R_l`, entrywise in double-double.
    pub(crate) fn second_tail_accurate(&self, n: usize) -> Vec<TwoFloat> {
        let shift = (n + 1) as f64;
        if n < self.suffix.len() {
            return self.weighted[n]
                .iter()
                .zip(&self.suffix[n])
                .map(|(w, s)| *w - s.mul_f64(shift))
                .collect();
        }
        match &self.amplitude {
            Some(a) => {
                let x = n as f64 + 1.0;
                let z0 = hurwitz_zeta(self.beta, x);
                let z1 = hurwitz_zeta(self.beta + 1.0, x);
                let factor = TwoFloat::new(z0) - TwoFloat::product(z1, shift);
                a.iter().map(|v| factor.mul_f64(*v)).collect()
            }
            None => vec![TwoFloat::ZERO; self.dim * self.dim],
        }
    }

    /// `R(1) = Σ R_n`.
    pub fn total(&self) -> Matrix {
        self.tail_mass(0)
    }

    /// `R'(1) = Σ n R_n`.
    pub fn derivative_at_one(&self) -> Matrix {
        self.from_entries(&self.weighted[0])
    }

    /// `S_n = Σ_{k>n} ‖R_k‖` for `n = 0..=M`, spectral norm.
    pub fn tail_norm_sums(&self) -> Vec<f64> {
        let m = self.terms.len();
        let mut out = vec![0.0; m + 1];
        let mut acc = self.continuation_norm_sum();
        out[m] = acc;
        for n in (0..m).rev() {
            acc += op_norm(&self.terms[n]);
            out[n] = acc;
        }
        out
    }

    fn continuation_norm_sum(&self) -> f64 {
        match &self.amplitude {
            Some(a) => op_norm(a) * hurwitz_zeta(self.beta + 1.0, self.terms.len() as f64 + 1.0),
            None => 0.0,
        }
    }

    /// Checks the tail invariants: `S_n` non-increasing and, in asymptotic
    /// mode, `|S_M - c M^{-β}| / S_M <= tol` with `c = ‖A‖/β`.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        let sums = self.tail_norm_sums();
        if sums.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-12) + 1e-300) {
            return Err(Error::InvalidInput("tail norm sums increase".into()));
        }
        if let (TailMode::Asymptotic, Some(a)) = (self.tail_mode, &self.amplitude) {
            let m = self.terms.len() as f64;
            let s_m = sums[self.terms.len()];
            let c = op_norm(a) / self.beta;
            if s_m > 0.0 {
                let rel = (s_m - c * m.powf(-self.beta)).abs() / s_m;
                if rel > tol {
                    return Err(Error::InvalidInput(format!(
                        "tail extrapolation inconsistent: relative gap {rel:e} > {tol:e}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `R(z) = Σ_{n≤M} z^n R_n` (stored terms only).
    pub fn eval_stored(&self, z: Complex<f64>) -> DMatrix<Complex<f64>> {
        let mut out = DMatrix::from_element(self.dim, self.dim, Complex::new(0.0, 0.0));
        let mut zn = Complex::new(1.0, 0.0);
        for t in &self.terms {
            zn *= z;
            out.zip_apply(t, |o, r| *o += zn * r);
        }
        out
    }

    /// Upper bound on `‖Σ_{n>M} z^n R_n‖` for `|z| <= 1`.
    pub fn continuation_bound(&self) -> f64 {
        self.continuation_norm_sum()
    }

    /// Structured text form: `dim`, `beta`, `tail_mode`, optional
    /// `tail_amplitude`, then one row `n e_11 e_12 ...` per stored term.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dim {}", self.dim);
        let _ = writeln!(s, "beta {:.17e}", self.beta);
        let mode = match self.tail_mode {
            TailMode::ExactFinite => "exact_finite",
            TailMode::Asymptotic => "asymptotic",
        };
        let _ = writeln!(s, "tail_mode {mode}");
        let row_major = |m: &Matrix| {
            let mut out = String::new();
            for i in 0..self.dim {
                for j in 0..self.dim {
                    let _ = write!(out, " {:.17e}", m[(i, j)]);
                }
            }
            out
        };
        if let Some(a) = &self.amplitude {
            let _ = writeln!(s, "tail_amplitude{}", row_major(a));
        }
        for (k, t) in self.terms.iter().enumerate() {
            let _ = writeln!(s, "{}{}", k + 1, row_major(t));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut dim = None;
        let mut beta = None;
        let mut mode = None;
        let mut amplitude = None;
        let mut rows: Vec<(usize, (usize, Vec<f64>))> = Vec::new();
        let perr = |line: usize, msg: String| Error::Parse { line, msg };
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut fields = content.split_whitespace();
            let key = fields.next().unwrap_or_default();
            let rest: Vec<&str> = fields.collect();
            let floats = |xs: &[&str]| -> Result<Vec<f64>> {
                xs.iter()
                    .map(|x| x.parse::<f64>().map_err(|e| perr(line, format!("bad number {x:?}: {e}"))))
                    .collect()
            };
            match key {
                "dim" => {
                    let d: usize = rest
                        .first()
                        .ok_or_else(|| perr(line, "dim needs a value".into()))?
                        .parse()
                        .map_err(|e| perr(line, format!("bad dim: {e}")))?;
                    dim = Some(d);
                }
                "beta" => {
                    let v = floats(&rest)?;
                    beta = Some(*v.first().ok_or_else(|| perr(line, "beta needs a value".into()))?);
                }
                "tail_mode" => {
                    mode = Some(match rest.first().copied() {
                        Some("exact_finite") => TailMode::ExactFinite,
                        Some("asymptotic") => TailMode::Asymptotic,
                        other => return Err(perr(line, format!("unknown tail_mode {other:?}"))),
                    });
                }
                "tail_amplitude" => amplitude = Some((line, floats(&rest)?)),
                n => {
                    let n: usize = n
                        .parse()
                        .map_err(|_| perr(line, format!("unknown key {n:?}")))?;
                    if n == 0 {
                        return Err(perr(line, "term index starts at 1".into()));
                    }
                    rows.push((n, (line, floats(&rest)?)));
                }
            }
        }
        let dim = dim.ok_or_else(|| perr(0, "missing dim".into()))?;
        let beta = beta.ok_or_else(|| perr(0, "missing beta".into()))?;
        let mode = mode.ok_or_else(|| perr(0, "missing tail_mode".into()))?;
        let to_matrix = |line: usize, v: &[f64]| -> Result<Matrix> {
            if v.len() != dim * dim {
                return Err(perr(line, format!("expected {} entries, found {}", dim * dim, v.len())));
            }
            Ok(Matrix::from_row_slice(dim, dim, v))
        };
        let horizon = rows.iter().map(|(n, _)| *n).max().unwrap_or(0);
        let mut terms = vec![Matrix::zeros(dim, dim); horizon];
        for (n, (line, values)) in &rows {
            terms[n - 1] = to_matrix(*line, values)?;
        }
        match (mode, amplitude) {
            (TailMode::Asymptotic, Some((line, a))) => {
                Self::with_tail_amplitude(terms, beta, to_matrix(line, &a)?)
            }
            (mode, _) => Self::new(terms, beta, mode),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}
