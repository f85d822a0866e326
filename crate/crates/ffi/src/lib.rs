//! C ABI for `oprenewal`.
//!
//! Objects are opaque heap handles created by `opr_*_new` functions and
//! released with the matching `opr_*_free`. Every fallible call returns an
//! [`OprStatus`]; on failure the message is kept per thread and can be copied
//! out with [`opr_last_error_message`]. Matrices cross the boundary row-major.
//! Panics never unwind into the caller: they surface as
//! [`OprStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use oprenewal::experiment::run_catalog;
use oprenewal::lsv::{correlations, LsvConfig, LsvModel, Observable, ObservableSpec};
use oprenewal::renewal::{
    aperiodicity_check, expansion_order, renewal_solve, spectral_data, ExpansionReport, Matrix,
    OperatorSeq, SpectralData, SpectralOptions, TailMode,
};
use oprenewal::seq::{convolve, rate_fit, synth_tail, DecaySeq};
use oprenewal::tower::{tower_correlations, LevelObservable, TowerModel};
use oprenewal::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OprStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    NoUnitEigenvalue = 3,
    NotSimple = 4,
    MuZero = 5,
    OrderUnsupported = 6,
    ProjectionNotZero = 7,
    Divergent = 8,
    Numerical = 9,
    Unsupported = 10,
    PeriodicReturns = 11,
    Config = 12,
    Io = 13,
    BufferTooSmall = 14,
    Panic = 15,
}

fn status_of(e: &Error) -> OprStatus {
    match e {
        Error::InvalidInput(_) | Error::DomainError(_) => OprStatus::InvalidInput,
        Error::NoUnitEigenvalue { .. } => OprStatus::NoUnitEigenvalue,
        Error::NotSimple(_) => OprStatus::NotSimple,
        Error::MuZero(_) => OprStatus::MuZero,
        Error::OrderUnsupported(_) => OprStatus::OrderUnsupported,
        Error::ProjectionNotZero { .. } => OprStatus::ProjectionNotZero,
        Error::Divergent { .. } => OprStatus::Divergent,
        Error::NotSummable(_)
        | Error::NonPositiveValues { .. }
        | Error::SolverFailure(_)
        | Error::NoConvergence { .. }
        | Error::InsufficientBranchPoints { .. } => OprStatus::Numerical,
        Error::UnsupportedObservable(_) | Error::NonZeroMean(_) | Error::UnsupportedLevels { .. } => {
            OprStatus::Unsupported
        }
        Error::PeriodicReturns(_) => OprStatus::PeriodicReturns,
        Error::Config(_) | Error::Parse { .. } => OprStatus::Config,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => OprStatus::Io,
        Error::Compute { source, .. } => status_of(source),
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

enum Failure {
    Lib(Error),
    Null(&'static str),
    Buffer { needed: usize, given: usize },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(body: F) -> OprStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error(String::new());
            OprStatus::Ok
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("null pointer passed as `{name}`"));
            OprStatus::NullPointer
        }
        Ok(Err(Failure::Buffer { needed, given })) => {
            set_error(format!("buffer holds {given} values, {needed} needed"));
            OprStatus::BufferTooSmall
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            OprStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_slice<'a, T>(p: *mut T, len: usize, needed: usize, name: &'static str) -> Result<&'a mut [T], Failure> {
    if len < needed {
        return Err(Failure::Buffer { needed, given: len });
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, needed))
}

unsafe fn string<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, Failure> {
    let s = deref(p, name).map(|_| CStr::from_ptr(p))?;
    s.to_str()
        .map_err(|_| Failure::Lib(Error::InvalidInput(format!("`{name}` is not UTF-8"))))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put<T>(out: *mut T, value: T, name: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(name));
    }
    *out = value;
    Ok(())
}

unsafe fn release<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn opr_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn opr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---------------------------------------------------------------- renewal

/// First-return operator sequence `R_1, ..., R_M`.
pub struct OprOperatorSeq(OperatorSeq);

/// Spectral data at the eigenvalue 1 of `R(1)`.
pub struct OprSpectral(SpectralData);

/// Expansion of `T_n` with its residuals.
pub struct OprExpansion(ExpansionReport);

/// Builds `R_n` from `count` row-major `dim × dim` blocks. `asymptotic`
/// selects the power-law continuation past the last term.
///
/// # Safety
/// `terms` must point to `count * dim * dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opr_operator_new(
    dim: usize,
    terms: *const f64,
    count: usize,
    beta: f64,
    asymptotic: bool,
    out: *mut *mut OprOperatorSeq,
) -> OprStatus {
    guard(|| {
        let values = slice(terms, count * dim * dim, "terms")?;
        let mats = values
            .chunks(dim * dim)
            .map(|c| Matrix::from_row_slice(dim, dim, c))
            .collect();
        let mode = if asymptotic { TailMode::Asymptotic } else { TailMode::ExactFinite };
        store(out, OprOperatorSeq(OperatorSeq::new(mats, beta, mode)?))
    })
}

/// Scalar `R_n ∝ n^{-(β+1)}` normalized to total mass one.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opr_operator_power_law(beta: f64, horizon: usize, out: *mut *mut OprOperatorSeq) -> OprStatus {
    guard(|| store(out, OprOperatorSeq(OperatorSeq::scalar_power_law(beta, horizon)?)))
}

/// # Safety
/// `op` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn opr_operator_free(op: *mut OprOperatorSeq) {
    release(op)
}

/// # Safety
/// `op` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn opr_operator_dim(op: *const OprOperatorSeq) -> usize {
    op.as_ref().map_or(0, |o| o.0.dim())
}

/// Writes `T_0, ..., T_N` row-major into `buf` (`(N+1) d²` doubles).
///
/// # Safety
/// `op` must be live; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn opr_renewal_solve(
    op: *const OprOperatorSeq,
    n_max: usize,
    buf: *mut f64,
    len: usize,
) -> OprStatus {
    guard(|| {
        let op = &deref(op, "op")?.0;
        let d = op.dim();
        let dst = out_slice(buf, len, (n_max + 1) * d * d, "buf")?;
        let t = renewal_solve(op, n_max)?;
        for (n, m) in t.iter().enumerate() {
            for i in 0..d {
                for j in 0..d {
                    dst[n * d * d + i * d + j] = m[(i, j)];
                }
            }
        }
        Ok(())
    })
}

/// # Safety
/// `op` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opr_spectral_new(op: *const OprOperatorSeq, out: *mut *mut OprSpectral) -> OprStatus {
    guard(|| {
        let op = &deref(op, "op")?.0;
        store(out, OprSpectral(spectral_data(op, SpectralOptions::default())?))
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn opr_spectral_free(s: *mut OprSpectral) {
    release(s)
}

/// `μ` with `P R'(1) P = μ P`.
///
/// # Safety
/// `s` must be live; `mu` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opr_spectral_mu(s: *const OprSpectral, mu: *mut f64) -> OprStatus {
    guard(|| put(mu, deref(s, "spectral")?.0.mu, "mu"))
}

/// Writes the projection `P` row-major (`d²` doubles).
///
/// # Safety
/// `s` must be live; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn opr_spectral_projection(s: *const OprSpectral, buf: *mut f64, len: usize) -> OprStatus {
    guard(|| {
        let p = &deref(s, "spectral")?.0.projection;
        let d = p.nrows();
        let dst = out_slice(buf, len, d * d, "buf")?;
        for i in 0..d {
            for j in 0..d {
                dst[i * d + j] = p[(i, j)];
            }
        }
        Ok(())
    })
}

/// Expansion truncated after the `μ^{-order}` term, `order` in 1..=4.
///
/// # Safety
/// `op` and `s` must be live and belong together; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opr_expansion_new(
    op: *const OprOperatorSeq,
    s: *const OprSpectral,
    n_max: usize,
    order: usize,
    out: *mut *mut OprExpansion,
) -> OprStatus {
    guard(|| {
        let op = &deref(op, "op")?.0;
        let s = &deref(s, "spectral")?.0;
        store(out, OprExpansion(expansion_order(op, s, n_max, order)?))
    })
}

/// # Safety
/// `e` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn opr_expansion_free(e: *mut OprExpansion) {
    release(e)
}

/// Residual norms `‖T_n - prediction_n‖` for `n = 0..=N`.
///
/// # Safety
/// `e` must be live; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn opr_expansion_residuals(e: *const OprExpansion, buf: *mut f64, len: usize) -> OprStatus {
    guard(|| {
        let r = &deref(e, "expansion")?.0.residual_norms;
        out_slice(buf, len, r.len(), "buf")?.copy_from_slice(r);
        Ok(())
    })
}

/// Fitted decay exponent of the residuals on the last decade, and the
/// exponent of the predicted class.
///
/// # Safety
/// `e` must be live; `fitted` and `predicted` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opr_expansion_exponents(
    e: *const OprExpansion,
    fitted: *mut f64,
    predicted: *mut f64,
) -> OprStatus {
    guard(|| {
        let r = &deref(e, "expansion")?.0;
        put(fitted, r.fitted_exponent.unwrap_or(f64::NAN), "fitted")?;
        put(predicted, r.predicted_class.exponent(), "predicted")
    })
}

/// Smallest singular value of `I - R(e^{iθ})` over `grid_points` angles
/// outside the default arc around 0, and where it occurs.
///
/// # Safety
/// `op` must be live; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn opr_aperiodicity(
    op: *const OprOperatorSeq,
    grid_points: usize,
    min_singular_value: *mut f64,
    angle: *mut f64,
) -> OprStatus {
    guard(|| {
        let rep = aperiodicity_check(&deref(op, "op")?.0, grid_points)?;
        put(min_singular_value, rep.min_singular_value, "min_singular_value")?;
        put(angle, rep.argmin_angle, "angle")
    })
}

// -------------------------------------------------------------- sequences

/// Cauchy product of two length-`n` sequences into `out` (`n` doubles).
///
/// # Safety
/// `a`, `b` and `out` must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn opr_convolve(a: *const f64, b: *const f64, n: usize, out: *mut f64) -> OprStatus {
    guard(|| {
        let a = DecaySeq::measured(slice(a, n, "a")?.to_vec());
        let b = DecaySeq::measured(slice(b, n, "b")?.to_vec());
        out_slice(out, n, n, "out")?.copy_from_slice(&convolve(&a, &b).values);
        Ok(())
    })
}

/// Power-law fit of `values[lo..=hi]`: decay exponent, and the log power of
/// the fit with a `log log n` regressor.
///
/// # Safety
/// `values` must hold `n` doubles; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn opr_rate_fit(
    values: *const f64,
    n: usize,
    lo: usize,
    hi: usize,
    gamma: *mut f64,
    log_power: *mut f64,
) -> OprStatus {
    guard(|| {
        let seq = DecaySeq::measured(slice(values, n, "values")?.to_vec());
        let fit = rate_fit(&seq, (lo, hi))?;
        put(gamma, fit.power.gamma, "gamma")?;
        put(log_power, fit.with_log.log_power, "log_power")
    })
}

// -------------------------------------------------------------------- LSV

/// Ulam discretization of the LSV map with its invariant measure.
pub struct OprLsvModel(LsvModel);

/// Observable discretized on a model's grid.
pub struct OprObservable(Observable);

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opr_lsv_new(
    alpha: f64,
    ladder_levels: usize,
    max_width: f64,
    y_cells: usize,
    out: *mut *mut OprLsvModel,
) -> OprStatus {
    guard(|| {
        let config = LsvConfig {
            alpha,
            ladder_levels,
            max_width,
            y_cells,
            tail_points: ladder_levels.max(LsvConfig::new(alpha).tail_points),
        };
        store(out, OprLsvModel(LsvModel::build(&config)?))
    })
}

/// # Safety
/// `m` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn opr_lsv_free(m: *mut OprLsvModel) {
    release(m)
}

/// `(1/4) h(1/2) α^{-1/α} / (1/α - 1)`.
///
/// # Safety
/// `m` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opr_lsv_leading_constant(m: *const OprLsvModel, out: *mut f64) -> OprStatus {
    guard(|| put(out, deref(m, "model")?.0.leading_constant()?, "out"))
}

/// Observable from a JSON spec such as
/// `{"type":"bump","lo":0.6,"hi":0.9,"ramp":0.05}`.
///
/// # Safety
/// `m` must be live; `spec_json` must be a NUL-terminated string; `out` must
/// be writable. The observable may only be used with the same model.
#[no_mangle]
pub unsafe extern "C" fn opr_observable_new(
    m: *const OprLsvModel,
    spec_json: *const c_char,
    out: *mut *mut OprObservable,
) -> OprStatus {
    guard(|| {
        let model = &deref(m, "model")?.0;
        let spec: ObservableSpec = serde_json::from_str(string(spec_json, "spec_json")?)
            .map_err(|e| Error::Config(format!("observable spec: {e}")))?;
        store(out, OprObservable(Observable::new(model, spec)?))
    })
}

/// # Safety
/// `o` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn opr_observable_free(o: *mut OprObservable) {
    release(o)
}

/// `∫ f dμ` under the model's invariant measure.
///
/// # Safety
/// `o` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opr_observable_mean(o: *const OprObservable, out: *mut f64) -> OprStatus {
    guard(|| put(out, deref(o, "observable")?.0.mean, "out"))
}

/// `Cor(f, g∘T^n)` for `n = 0..=n_max` into `buf`.
///
/// # Safety
/// All handles must be live and built on `m`; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn opr_lsv_correlations(
    m: *const OprLsvModel,
    f: *const OprObservable,
    g: *const OprObservable,
    n_max: usize,
    buf: *mut f64,
    len: usize,
) -> OprStatus {
    guard(|| {
        let model = &deref(m, "model")?.0;
        let dst = out_slice(buf, len, n_max + 1, "buf")?;
        let c = correlations(model, &deref(f, "f")?.0, &deref(g, "g")?.0, n_max)?;
        dst.copy_from_slice(&c);
        Ok(())
    })
}

// ------------------------------------------------------------------ tower

/// Young tower over an i.i.d. base.
pub struct OprTower(TowerModel);

/// Tower with `P(R > n) = (n+1)^{-β}` stored up to `truncation`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opr_tower_power_law(beta: f64, truncation: usize, out: *mut *mut OprTower) -> OprStatus {
    guard(|| {
        let survival = synth_tail(1.0, beta, 0.0, truncation, None)?;
        store(out, OprTower(TowerModel::build(&survival, truncation)?))
    })
}

/// Tower with return times `times[i]` taken with probability `probs[i]`.
///
/// # Safety
/// `times` and `probs` must hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opr_tower_from_returns(
    times: *const u64,
    probs: *const f64,
    n: usize,
    out: *mut *mut OprTower,
) -> OprStatus {
    guard(|| {
        let t = slice(times, n, "times")?;
        let p = slice(probs, n, "probs")?;
        let returns: Vec<(u64, f64)> = t.iter().copied().zip(p.iter().copied()).collect();
        store(out, OprTower(TowerModel::from_returns(&returns)?))
    })
}

/// # Safety
/// `t` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn opr_tower_free(t: *mut OprTower) {
    release(t)
}

/// Level mass `m_l = P(R > l) / E[R]`.
///
/// # Safety
/// `t` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opr_tower_level_mass(t: *const OprTower, level: usize, out: *mut f64) -> OprStatus {
    guard(|| put(out, deref(t, "tower")?.0.level_mass(level), "out"))
}

/// Exact `Cor(f, g∘F^n)`, `n = 0..=n_max`, for level observables given by
/// their values on levels `0..f_len` and `0..g_len`.
///
/// # Safety
/// `t` must be live; `f`, `g` must hold `f_len`, `g_len` doubles; `buf` must
/// hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn opr_tower_correlations(
    t: *const OprTower,
    f: *const f64,
    f_len: usize,
    g: *const f64,
    g_len: usize,
    n_max: usize,
    buf: *mut f64,
    len: usize,
) -> OprStatus {
    guard(|| {
        let tower = &deref(t, "tower")?.0;
        let dst = out_slice(buf, len, n_max + 1, "buf")?;
        let f = LevelObservable::levels(slice(f, f_len, "f")?.to_vec());
        let g = LevelObservable::levels(slice(g, g_len, "g")?.to_vec());
        dst.copy_from_slice(&tower_correlations(tower, &f, &g, n_max)?);
        Ok(())
    })
}

// ------------------------------------------------------------ experiments

/// Runs a named acceptance experiment and writes `<id>.csv` and `<id>.json`
/// under `out_dir`. `passed` receives whether every check held.
///
/// # Safety
/// `id` and `out_dir` must be NUL-terminated strings; `passed` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn opr_experiment_run(
    id: *const c_char,
    seed: u64,
    out_dir: *const c_char,
    passed: *mut bool,
) -> OprStatus {
    guard(|| {
        let id = string(id, "id")?;
        let dir = string(out_dir, "out_dir")?;
        let outcome = run_catalog(id, seed)?;
        let text = format!("id = \"{id}\"\nseed = {seed}\n");
        outcome.write(Path::new(dir), &text, serde_json::json!({ "id": id, "seed": seed }))?;
        put(passed, outcome.passed(), "passed")
    })
}
