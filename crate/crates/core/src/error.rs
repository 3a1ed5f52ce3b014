use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error in {function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    /// A parameter failed validation when building a domain object.
    #[error("invalid parameter `{name}`: {detail}")]
    InvalidParameter { name: &'static str, detail: String },

    /// A series hit its term budget before the truncation rule fired.
    #[error("series for {function} did not converge within {max_terms} terms (x = {x})")]
    NonConvergence {
        function: &'static str,
        x: f64,
        max_terms: usize,
    },

    /// The root solver could not enclose a sign change.
    #[error("no sign change found for h_{k} (theta = {theta}) in [{lo}, {hi}]")]
    BracketFailure { k: usize, theta: f64, lo: f64, hi: f64 },

    /// Computed roots were not strictly increasing.
    #[error("roots not increasing at k = {k}: gamma_{k} = {prev}, gamma_{next_k} = {next}", next_k = k + 1)]
    MonotonicityViolation { k: usize, prev: f64, next: f64 },

    /// A normalizing constant vanished.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Two distributions were not in the usual stochastic order.
    #[error("stochastic order violated: P(X > {at}) = {x_tail} exceeds P(Y > {at}) = {y_tail}")]
    OrderViolation { at: f64, x_tail: f64, y_tail: f64 },

    /// A root table was too short for the requested lookup.
    #[error("root table ends at k = {k_max} (gamma = {last_gamma}); need entries up to {needed}")]
    TableTooShort {
        k_max: usize,
        last_gamma: f64,
        needed: String,
    },

    /// A serialized table could not be parsed.
    #[error("parse error on line {line}: {detail}")]
    Parse { line: usize, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        function,
        detail: detail.into(),
    }
}

pub(crate) fn invalid(name: &'static str, detail: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        detail: detail.into(),
    }
}
