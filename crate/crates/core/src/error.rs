use thiserror::Error;

/// Errors produced by the design and analysis operations.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Root bracketing failed: no sign change on the supplied interval.
    #[error("no sign change in bracket [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    /// Nonlinear fit could not be performed (too few or degenerate samples).
    #[error("fit error: {0}")]
    Fit(String),

    /// Lens ray geometry is inconsistent (ray misses the aperture, feed
    /// angle at or past the hyperbola asymptote, ...).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// The gain pattern never falls to half power inside (0, pi/2).
    #[error("half-power beamwidth undefined: {0}")]
    BeamwidthUndefined(String),

    /// Invalid run configuration (bad combination, schema violation, ...).
    #[error("config error: {0}")]
    Config(String),

    /// Malformed input data (CSV tables, JSON configs).
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
