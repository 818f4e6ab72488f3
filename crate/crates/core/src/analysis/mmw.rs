//! Millimeter-wave SINR coverage.
//!
//! The test pair runs perfectly aligned mainlobes over a LOS link;
//! interference comes from the Aloha-thinned, LOS-thinned DT field with
//! the three-level sectored gain classes. The interference Laplace
//! transform is the probability generating functional of each thinned
//! class,
//!
//! ```text
//! L(s) = prod_j exp{ int_0^inf ((1 + s P_D C G_j r^-aL)^-1 - 1)
//!                    2 pi r q_a p_j exp(-beta r) lambda_DT dr }
//! ```
//!
//! evaluated by adaptive quadrature on [0, r_max] with
//! `r_max = max(40/beta, 20 km)`; the exponential thinning makes the
//! remainder beyond that negligible at the working tolerance.

use crate::analysis::QUAD_REL_TOL;
use crate::error::{CoreError, Result};
use crate::geometry::los_probability;
use crate::params::{LaplaceEvaluation, Method, SystemParams};
use crate::propagation::{gain_distribution, AntennaPattern, BandParams};
use crate::quad;

/// Everything the mmWave coverage expressions need.
#[derive(Debug, Clone, Copy)]
pub struct MmwScenario {
    /// D2D transmit power, watts.
    pub p_d: f64,
    pub pattern: AntennaPattern,
    pub band: BandParams,
    /// DT density per m^2.
    pub lambda_dt: f64,
    /// Aloha access probability.
    pub q_a: f64,
    /// Blockage LOS decay rate, per meter.
    pub beta: f64,
    /// Test-link length, meters.
    pub d0: f64,
    /// SINR threshold, linear.
    pub gamma: f64,
}

impl MmwScenario {
    pub fn from_params(p: &SystemParams, gamma: f64) -> Self {
        MmwScenario {
            p_d: p.p_d,
            pattern: p.antenna,
            band: p.mmw,
            lambda_dt: p.lambda_dt,
            q_a: p.q_a,
            beta: p.beta,
            d0: p.d0,
            gamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_d > 0.0) || !(self.d0 > 0.0) || self.gamma < 0.0 {
            return Err(CoreError::invalid(
                "mmw_scenario",
                "powers, d0 positive; gamma >= 0",
            ));
        }
        if self.lambda_dt < 0.0 || self.beta < 0.0 {
            return Err(CoreError::invalid(
                "mmw_scenario",
                "densities and beta nonnegative",
            ));
        }
        if !(0.0..=1.0).contains(&self.q_a) {
            return Err(CoreError::invalid("q_a", "must lie in [0, 1]"));
        }
        self.pattern.validate()?;
        self.band.validate()
    }

    /// `eps_L = gamma d0^{a_L} / (P_D g_m^2 C)`, the fading threshold of
    /// the aligned test link.
    pub fn epsilon_l(&self) -> f64 {
        let gm2 = self.pattern.mainlobe_gain * self.pattern.mainlobe_gain;
        self.gamma * self.d0.powf(self.band.alpha_los)
            / (self.p_d * gm2 * self.band.pathloss_constant())
    }
}

/// Laplace transform of the aggregate mmWave interference at `s`.
pub fn laplace_mmw_interference(scenario: &MmwScenario, s: f64) -> Result<LaplaceEvaluation> {
    scenario.validate()?;
    if s < 0.0 {
        return Err(CoreError::invalid(
            "s",
            "Laplace argument must be nonnegative",
        ));
    }
    if s == 0.0 || scenario.lambda_dt == 0.0 || scenario.q_a == 0.0 {
        return Ok(LaplaceEvaluation {
            value: 1.0,
            method: Method::Quadrature,
            error: Some(0.0),
        });
    }
    let c = scenario.band.pathloss_constant();
    let alpha = scenario.band.alpha_los;
    let beta = scenario.beta;
    let dist = gain_distribution(&scenario.pattern);
    let r_max = if beta > 0.0 {
        (40.0 / beta).max(20_000.0)
    } else {
        20_000.0
    };

    let mut exponent = 0.0;
    let mut err = 0.0;
    for (gj, pj) in dist.gains.iter().zip(dist.probabilities.iter()) {
        if *pj == 0.0 {
            continue;
        }
        let a = s * scenario.p_d * c * gj;
        let density = 2.0 * std::f64::consts::PI * scenario.q_a * pj * scenario.lambda_dt;
        let integrand = move |r: f64| {
            // ((1 + a r^-alpha)^-1 - 1) * 2 pi r * density-weight: written
            // in the cancellation-free form -a/(r^alpha + a).
            let ra = r.powf(alpha);
            -a / (ra + a) * density * r * (-beta * r).exp()
        };
        let q = quad::integrate(integrand, 0.0, r_max, QUAD_REL_TOL)?;
        exponent += q.value;
        err += q.error_estimate;
    }
    let value = exponent.exp();
    Ok(LaplaceEvaluation {
        value,
        method: Method::Quadrature,
        // Propagate the exponent error linearly: |d e^x| = e^x |dx|.
        error: Some(value * err),
    })
}

/// mmWave SINR coverage probability at the scenario threshold.
///
/// `conditional_on_los = true` gives the coverage of a link known to be
/// LOS, `exp(-eps_L sigma^2) L(eps_L)`; `false` multiplies by the LOS
/// probability `exp(-beta d0)` of the test link itself.
pub fn coverage_mmw(scenario: &MmwScenario, conditional_on_los: bool) -> Result<f64> {
    scenario.validate()?;
    let eps = scenario.epsilon_l();
    let laplace = laplace_mmw_interference(scenario, eps)?;
    let noise = (-eps * scenario.band.noise_w).exp();
    let cond = noise * laplace.value;
    Ok(if conditional_on_los {
        cond
    } else {
        cond * los_probability(scenario.d0, scenario.beta)
    })
}
