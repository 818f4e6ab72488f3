//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by the geometry, analysis and simulation modules.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    /// A physical parameter violated its domain (negative density,
    /// zero distance, ...). Carries the offending field name.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A link endpoint lies strictly inside a blockage rectangle.
    /// Such drops are physically invalid and must be resampled.
    #[error("link endpoint ({x:.3}, {y:.3}) is covered by a blockage")]
    EndpointCovered { x: f64, y: f64 },

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error("quadrature did not converge: requested {requested:.3e}, achieved {achieved:.3e}")]
    QuadratureNotConverged { requested: f64, achieved: f64 },

    /// A closed form is only valid for specific exponents.
    #[error("closed form requires {requirement}; use the quadrature fallback")]
    ClosedFormUnavailable { requirement: &'static str },

    /// A combined-spectrum decision was requested before the
    /// observation window was full.
    #[error("peer profile holds {have} spectra, window requires {want}")]
    ProfileNotFull { have: usize, want: usize },

    /// Two scenarios that must share a parameter disagree.
    #[error("scenario mismatch on `{name}`: {a} vs {b}")]
    ScenarioMismatch { name: &'static str, a: f64, b: f64 },
}

impl CoreError {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        CoreError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CoreError>;
