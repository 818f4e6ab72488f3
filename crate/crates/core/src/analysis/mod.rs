//! Closed-form and quadrature evaluation of SINR coverage.
//!
//! [`mmw`] treats the dedicated millimeter-wave band: Rayleigh fading
//! against a blockage-thinned field of directional Aloha interferers.
//! [`uw`] treats the sensed microwave channel shared with the cellular
//! downlink: threshold-region availability, channel occupancy, and the
//! two interference Laplace transforms.

pub mod mmw;
pub mod uw;

pub use mmw::{coverage_mmw, laplace_mmw_interference, MmwScenario};
pub use uw::{
    availability, coverage_uw, coverage_uw_with_pkd, estimate_pkd, laplace_uw_bs,
    laplace_uw_bs_quadrature, laplace_uw_dt, laplace_uw_dt_printed, mean_threshold_radius,
    UwScenario,
};

/// Relative tolerance used by every analysis quadrature.
pub const QUAD_REL_TOL: f64 = 1e-8;
