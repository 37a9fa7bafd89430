use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates its domain. `key` is the config path (e.g. `damping.kappa_x`).
    #[error("invalid value for `{key}`: {reason}")]
    InvalidParameter { key: String, reason: String },

    #[error("malformed config at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("missing required field `{0}`")]
    MissingField(String),

    #[error("fixed-point iteration for the magnon detuning did not converge after {iterations} steps (last residual {residual:.3e} rad/s)")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("effective coupling is pinned by an override; a derived G_mb was requested")]
    OverrideConflict,

    #[error("degenerate response denominator |D| = {magnitude:.3e} at sigma = {sigma:.6e} rad/s")]
    DegenerateDenominator { sigma: f64, magnitude: f64 },

    #[error("singular sideband matrix (pivot ratio {condition:.3e})")]
    SingularMatrix { condition: f64 },

    #[error("invalid integration setup: {0}")]
    Integration(String),

    #[error("transient has not decayed: final-window drift {drift:.3e} exceeds {limit:.1e}")]
    TransientNotDecayed { drift: f64, limit: f64 },

    #[error("invalid sweep: {0}")]
    Sweep(String),
}

impl Error {
    pub(crate) fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
