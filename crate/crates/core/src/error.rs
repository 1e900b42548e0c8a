use thiserror::Error;

/// Every failure the toolkit can report.
///
/// Numerical guards (`BoxContaminated`, `Underflow`, `Overflow`) are kept
/// distinct from configuration errors so the command line front-end can map
/// them onto separate exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {constraint}")]
    InvalidParameter {
        name: &'static str,
        constraint: String,
    },

    #[error("dimension {0} is not supported (only N = 1 and N = 2)")]
    UnsupportedDimension(usize),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("evanescent part fell below {floor:e} over the whole fit window")]
    Underflow { floor: f64 },

    #[error("solution reached the box boundary at t = {t} (edge/peak ratio {ratio:e})")]
    BoxContaminated { t: f64, ratio: f64 },

    #[error("non-finite values produced at t = {t}")]
    Overflow { t: f64 },

    #[error("fit window needs at least {needed} samples, found {found}")]
    TooFewSamples { needed: usize, found: usize },

    #[error("comparison window is empty: a run stopped before the first shared sample")]
    ComparisonWindowEmpty,

    #[error("exponent regime violated: {0}")]
    RegimeViolation(String),

    #[error("certificate unavailable: m = {m} is not below m0 = {m0}")]
    CertificateUnavailable { m: f64, m0: f64 },

    #[error("unsupported data family: {0}")]
    UnsupportedDataFamily(&'static str),

    #[error("phase-plane geometry degenerate: chi = {chi} is not below mu^(1/p) = {root}")]
    GeometryDegenerate { chi: f64, root: f64 },

    #[error("lambda search reached the floor epsilon = {floor:e} without a valid candidate")]
    SearchFailed { floor: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            constraint: format!("must be finite and > 0, got {value}"),
        })
    }
}
