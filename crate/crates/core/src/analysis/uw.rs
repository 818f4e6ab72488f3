//! Microwave-band coverage on the sensed shared channel.
//!
//! A base station occupies the shared channel only when its other K-1
//! channels are busy, which happens when at least K users sit in its
//! Voronoi cell; `estimate_pkd` measures that tail by Monte Carlo on
//! the typical cell. Sensing forms a threshold region of mean radius
//! `d_tau = (P_B/tau)^delta Gamma(1+delta)` around the test pair; the
//! channel is available with probability
//! `p_a = exp(-lambda_B p_kd pi d_tau^2)`. Coverage is the product of
//! the noise term and the two interference Laplace transforms (DT field
//! thinned to `p_a lambda_DT` everywhere; occupied base stations
//! outside the threshold region).
//!
//! The printed DT transform carries the exponent `eps_DT^delta`; the
//! probability generating functional gives `eps_DT^{2 delta}`. Both are
//! exposed: [`laplace_uw_dt_printed`] evaluates the printed form
//! verbatim, [`laplace_uw_dt`] the PGFL quadrature, and the crate
//! treats the latter as the trusted path (the Monte Carlo oracle
//! arbitrates; see the crate tests).

use crate::analysis::QUAD_REL_TOL;
use crate::error::{CoreError, Result};
use crate::params::{LaplaceEvaluation, Method, SystemParams};
use crate::propagation::BandParams;
use crate::quad;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use statrs::function::gamma::gamma;

/// Everything the microwave coverage expressions need.
#[derive(Debug, Clone, Copy)]
pub struct UwScenario {
    /// D2D transmit power, watts.
    pub p_d: f64,
    /// Base-station transmit power, watts.
    pub p_b: f64,
    pub band: BandParams,
    pub lambda_dt: f64,
    pub lambda_b: f64,
    pub lambda_c: f64,
    /// Number of orthogonal downlink channels.
    pub channels_k: u32,
    /// Sensing threshold, watts.
    pub sensing_threshold: f64,
    /// Test-link length, meters.
    pub d0: f64,
    /// SINR threshold, linear.
    pub gamma: f64,
    /// Include the free-space constant in the sensing rule and the
    /// threshold radius (physically consistent variant). The printed
    /// radius omits it; false reproduces that convention.
    pub pathloss_constant_in_sensing: bool,
    /// Fixed channel-occupancy probability, bypassing the Monte Carlo
    /// estimate.
    pub pkd_override: Option<f64>,
}

impl UwScenario {
    pub fn from_params(p: &SystemParams, gamma: f64) -> Self {
        UwScenario {
            p_d: p.p_d,
            p_b: p.p_b,
            band: p.uw,
            lambda_dt: p.lambda_dt,
            lambda_b: p.lambda_b,
            lambda_c: p.lambda_c,
            channels_k: p.channels_k,
            sensing_threshold: p.sensing_threshold,
            d0: p.d0,
            gamma,
            pathloss_constant_in_sensing: p.pathloss_constant_in_sensing,
            pkd_override: p.pkd_override,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_d > 0.0) || !(self.p_b > 0.0) {
            return Err(CoreError::invalid("uw_scenario", "powers must be positive"));
        }
        if !(self.sensing_threshold > 0.0) {
            return Err(CoreError::invalid(
                "sensing_threshold",
                "must be positive (the threshold radius diverges at 0)",
            ));
        }
        if self.lambda_dt < 0.0 || self.lambda_b < 0.0 || self.lambda_c < 0.0 {
            return Err(CoreError::invalid(
                "uw_scenario",
                "densities must be nonnegative",
            ));
        }
        if self.channels_k < 1 {
            return Err(CoreError::invalid(
                "channels_k",
                "need at least one channel",
            ));
        }
        if !(self.d0 > 0.0) || self.gamma < 0.0 {
            return Err(CoreError::invalid(
                "uw_scenario",
                "d0 positive, gamma nonnegative",
            ));
        }
        self.band.validate()
    }

    /// `delta = 1 / alpha_mu`.
    pub fn delta(&self) -> f64 {
        1.0 / self.band.alpha_los
    }

    /// `eps = gamma d0^{alpha_mu} / (C P_D)`.
    pub fn epsilon(&self) -> f64 {
        self.gamma * self.d0.powf(self.band.alpha_los) / (self.band.pathloss_constant() * self.p_d)
    }

    /// Mean threshold-region radius for this scenario's convention.
    pub fn mean_threshold_radius(&self) -> f64 {
        let p_eff = if self.pathloss_constant_in_sensing {
            self.band.pathloss_constant() * self.p_b
        } else {
            self.p_b
        };
        mean_threshold_radius(p_eff, self.sensing_threshold, self.band.alpha_los)
    }

    /// Channel-occupancy probability: the override if set, otherwise a
    /// seeded cell-load estimate.
    pub fn pkd<R: Rng + ?Sized>(&self, rng: &mut R, n_cells: usize) -> f64 {
        match self.pkd_override {
            Some(v) => v,
            None => estimate_pkd(self.lambda_b, self.lambda_c, self.channels_k, rng, n_cells),
        }
    }
}

/// Monte Carlo estimate of `P[N >= K]` where `N` is the cellular-user
/// load of the typical Voronoi cell (a base station conditioned at the
/// origin of the field, each user served by its nearest station).
pub fn estimate_pkd<R: Rng + ?Sized>(
    lambda_b: f64,
    lambda_c: f64,
    k: u32,
    rng: &mut R,
    n_cells: usize,
) -> f64 {
    if lambda_c <= 0.0 || lambda_b <= 0.0 {
        return 0.0;
    }
    // Scale-free: only the density ratio matters. Work on a window of
    // +-4 mean BS spacings around the conditioned cell.
    let ratio = lambda_c / lambda_b;
    let hw = 4.0f64;
    let area = (2.0 * hw) * (2.0 * hw);
    let bs_mean = area;
    let cu_mean = ratio * area;
    let mut hits = 0usize;
    for _ in 0..n_cells {
        let nb = Poisson::new(bs_mean).unwrap().sample(rng) as usize;
        let bs: Vec<(f64, f64)> = (0..nb)
            .map(|_| (rng.gen_range(-hw..hw), rng.gen_range(-hw..hw)))
            .collect();
        let nc = Poisson::new(cu_mean).unwrap().sample(rng) as usize;
        let mut load = 0u32;
        for _ in 0..nc {
            let (x, y) = (rng.gen_range(-hw..hw), rng.gen_range(-hw..hw));
            let d_origin = x * x + y * y;
            if bs.iter().all(|&(bx, by)| {
                let dx = x - bx;
                let dy = y - by;
                dx * dx + dy * dy >= d_origin
            }) {
                load += 1;
                if load >= k {
                    break;
                }
            }
        }
        if load >= k {
            hits += 1;
        }
    }
    hits as f64 / n_cells as f64
}

/// Mean radius of the sensing threshold region,
/// `(P/tau)^delta Gamma(1 + delta)` with `delta = 1/alpha`.
pub fn mean_threshold_radius(p_b: f64, tau: f64, alpha_mu: f64) -> f64 {
    let delta = 1.0 / alpha_mu;
    (p_b / tau).powf(delta) * gamma(1.0 + delta)
}

/// Probability the shared channel is sensed free:
/// `exp(-lambda_B p_kd pi d_tau^2)`.
pub fn availability(lambda_b: f64, p_kd: f64, d_tau_bar: f64) -> f64 {
    (-lambda_b * p_kd * std::f64::consts::PI * d_tau_bar * d_tau_bar).exp()
}

/// DT-interference Laplace transform by PGFL quadrature over the whole
/// plane with density `p_a lambda_DT` (the trusted path).
pub fn laplace_uw_dt(scenario: &UwScenario, p_a: f64) -> Result<LaplaceEvaluation> {
    scenario.validate()?;
    let eps = scenario.epsilon();
    let density = p_a * scenario.lambda_dt;
    if eps == 0.0 || density == 0.0 {
        return Ok(LaplaceEvaluation {
            value: 1.0,
            method: Method::Quadrature,
            error: Some(0.0),
        });
    }
    let a = eps * scenario.p_d * scenario.band.pathloss_constant();
    let alpha = scenario.band.alpha_los;
    let ring = 2.0 * std::f64::consts::PI * density;
    let pivot = 10.0 * a.powf(1.0 / alpha);
    let q = quad::integrate_semi_infinite(
        move |r| {
            let ra = r.powf(alpha);
            -a / (ra + a) * ring * r
        },
        0.0,
        pivot,
        QUAD_REL_TOL,
    )?;
    let value = q.value.exp();
    Ok(LaplaceEvaluation {
        value,
        method: Method::Quadrature,
        error: Some(value * q.error_estimate),
    })
}

/// DT-interference Laplace transform exactly as printed:
/// `exp(-2 p_a lambda_DT eps_DT^delta pi^2 delta / sin(2 pi delta))`.
///
/// Errors when `sin(2 pi delta) = 0` (e.g. alpha = 2), where the
/// printed form is undefined and only the quadrature applies.
pub fn laplace_uw_dt_printed(scenario: &UwScenario, p_a: f64) -> Result<LaplaceEvaluation> {
    scenario.validate()?;
    let delta = scenario.delta();
    let sin_term = (2.0 * std::f64::consts::PI * delta).sin();
    if sin_term.abs() < 1e-12 {
        return Err(CoreError::ClosedFormUnavailable {
            requirement: "sin(2 pi / alpha_mu) != 0",
        });
    }
    let eps_dt = scenario.band.pathloss_constant() * scenario.p_d * scenario.epsilon();
    let exponent =
        -2.0 * p_a * scenario.lambda_dt * eps_dt.powf(delta) * std::f64::consts::PI.powi(2) * delta
            / sin_term;
    Ok(LaplaceEvaluation::closed_form(exponent.exp()))
}

/// Base-station interference Laplace transform, closed form (alpha = 4
/// only): the occupied-station field outside the mean threshold radius.
pub fn laplace_uw_bs(
    scenario: &UwScenario,
    p_kd: f64,
    d_tau_bar: f64,
) -> Result<LaplaceEvaluation> {
    scenario.validate()?;
    if (scenario.band.alpha_los - 4.0).abs() > 1e-12 {
        return Err(CoreError::ClosedFormUnavailable {
            requirement: "alpha_mu = 4",
        });
    }
    let eps_b = scenario.band.pathloss_constant() * scenario.p_b * scenario.epsilon();
    if eps_b == 0.0 || p_kd == 0.0 || scenario.lambda_b == 0.0 {
        return Ok(LaplaceEvaluation::closed_form(1.0));
    }
    let theta = (eps_b * d_tau_bar.powf(-scenario.band.alpha_los)).sqrt();
    let lam = p_kd * scenario.lambda_b;
    let pi = std::f64::consts::PI;
    let exponent = -pi
        * lam
        * eps_b.sqrt()
        * (pi / 2.0 - (1.0 / theta).atan() + theta / (theta * theta + 1.0))
        + lam * pi * eps_b * d_tau_bar * d_tau_bar
            / (eps_b + d_tau_bar.powf(scenario.band.alpha_los));
    Ok(LaplaceEvaluation::closed_form(exponent.exp()))
}

/// Base-station transform by PGFL quadrature over `[d_tau, inf)`; valid
/// for any exponent and used to cross-check the closed form.
pub fn laplace_uw_bs_quadrature(
    scenario: &UwScenario,
    p_kd: f64,
    d_tau_bar: f64,
) -> Result<LaplaceEvaluation> {
    scenario.validate()?;
    let eps_b = scenario.band.pathloss_constant() * scenario.p_b * scenario.epsilon();
    let density = p_kd * scenario.lambda_b;
    if eps_b == 0.0 || density == 0.0 {
        return Ok(LaplaceEvaluation {
            value: 1.0,
            method: Method::Quadrature,
            error: Some(0.0),
        });
    }
    let alpha = scenario.band.alpha_los;
    let ring = 2.0 * std::f64::consts::PI * density;
    let pivot = d_tau_bar.max(eps_b.powf(1.0 / alpha)) * 10.0;
    let q = quad::integrate_semi_infinite(
        move |r| {
            let ra = r.powf(alpha);
            -eps_b / (ra + eps_b) * ring * r
        },
        d_tau_bar,
        pivot,
        QUAD_REL_TOL,
    )?;
    let value = q.value.exp();
    Ok(LaplaceEvaluation {
        value,
        method: Method::Quadrature,
        error: Some(value * q.error_estimate),
    })
}

/// Microwave SINR coverage: `exp(-eps sigma^2) L_DT(eps) L_BS(eps)`,
/// with `p_kd` resolved from the scenario (override or seeded
/// estimate), the PGFL quadrature for the DT transform, and the closed
/// form (alpha = 4) or quadrature for the base-station transform.
pub fn coverage_uw<R: Rng + ?Sized>(scenario: &UwScenario, rng: &mut R) -> Result<f64> {
    scenario.validate()?;
    let p_kd = scenario.pkd(rng, 20_000);
    coverage_uw_with_pkd(scenario, p_kd)
}

/// [`coverage_uw`] with the occupancy probability already resolved.
pub fn coverage_uw_with_pkd(scenario: &UwScenario, p_kd: f64) -> Result<f64> {
    scenario.validate()?;
    let d_tau = scenario.mean_threshold_radius();
    let p_a = availability(scenario.lambda_b, p_kd, d_tau);
    let l_dt = laplace_uw_dt(scenario, p_a)?;
    let l_bs = match laplace_uw_bs(scenario, p_kd, d_tau) {
        Ok(v) => v,
        Err(CoreError::ClosedFormUnavailable { .. }) => {
            laplace_uw_bs_quadrature(scenario, p_kd, d_tau)?
        }
        Err(e) => return Err(e),
    };
    let eps = scenario.epsilon();
    Ok((-eps * scenario.band.noise_w).exp() * l_dt.value * l_bs.value)
}
