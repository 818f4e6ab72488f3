//! Stochastic-geometry engine for hybrid millimeter-wave/microwave
//! device-to-device (D2D) networks.
//!
//! The library has two halves that validate each other:
//!
//! - an **analytical** half that evaluates SINR and rate coverage
//!   probabilities in closed form or by adaptive quadrature of the
//!   interference Laplace transforms ([`analysis`], [`evaluator`]), and
//! - a **Monte Carlo** half that drops Poisson fields of transmitters,
//!   base stations and rectangular blockages, runs the distributed
//!   angle-of-arrival band-selection mechanism, and estimates the same
//!   quantities empirically ([`simulator`], [`aoa`]).
//!
//! Device pairs communicate on the millimeter-wave band when a
//! line-of-sight link exists (detected from persistent peaks in the
//! angle-of-arrival spectrum) and fall back to a sensed microwave
//! channel otherwise. All internal quantities are linear SI units
//! (watts, meters, Hz, radians); dB/dBm appear only at I/O boundaries.

pub mod analysis;
pub mod aoa;
pub mod error;
pub mod evaluator;
pub mod geometry;
pub mod params;
pub mod propagation;
pub mod quad;
pub mod simulator;

pub use error::CoreError;
pub use params::{LaplaceEvaluation, Method, SystemParams};
