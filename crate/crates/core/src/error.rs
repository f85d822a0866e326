use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no eigenvalue of R(1) within {tol:e} of 1 (nearest is {nearest})")]
    NoUnitEigenvalue { nearest: String, tol: f64 },

    #[error("eigenvalue 1 of R(1) is not simple and isolated: {0}")]
    NotSimple(String),

    #[error("PR'(1)P vanishes (mu = {0:e})")]
    MuZero(f64),

    #[error("expansion order {0} unsupported, use series_expansion")]
    OrderUnsupported(usize),

    #[error("P f does not vanish: |Pf| = {norm:e} > {bound:e}")]
    ProjectionNotZero { norm: f64, bound: f64 },

    #[error("renewal sequence diverges: |T_{n}| = {norm:e}")]
    Divergent { n: usize, norm: f64 },

    #[error("sequence is not summable (exponent {0} <= 1)")]
    NotSummable(f64),

    #[error("non-positive value {value:e} at n = {n} inside the fit window")]
    NonPositiveValues { n: usize, value: f64 },

    #[error("x = {0} lies outside [0, 1]")]
    DomainError(f64),

    #[error("root solver failed: {0}")]
    SolverFailure(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("return tail needs branch point {needed}, only {available} stored")]
    InsufficientBranchPoints { needed: usize, available: usize },

    #[error("observable unsupported: {0}")]
    UnsupportedObservable(String),

    #[error("observable mean {0:e} is not zero")]
    NonZeroMean(f64),

    #[error("return times are periodic (gcd = {0})")]
    PeriodicReturns(u64),

    #[error("observable uses level {level}, tower stores levels below {available}")]
    UnsupportedLevels { level: usize, available: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{context}: {source}")]
    Compute {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Compute {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
