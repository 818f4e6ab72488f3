//! Path loss, fading, noise and the sectored antenna model.
//!
//! Everything here is a pure function on linear units. The path loss
//! model is `PL(d) = C d^{-alpha}` with `C = (lambda/4pi)^2`, fading is
//! unit-mean Rayleigh (exponential power), and the antenna is the
//! two-level sectored pattern: mainlobe gain `g_m` over beamwidth
//! `theta`, sidelobe gain `g_s` elsewhere.

use crate::error::{CoreError, Result};
use rand::Rng;
use rand_distr::{Distribution, Exp1};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Convert dB to a linear power ratio.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Convert a linear power ratio to dB.
#[inline]
pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Convert dBm to watts.
#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Convert watts to dBm.
#[inline]
pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// Per-band radio parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandParams {
    /// Carrier frequency in Hz.
    pub carrier_hz: f64,
    /// System bandwidth in Hz.
    pub bandwidth_hz: f64,
    /// Path-loss exponent on line-of-sight links. For the microwave
    /// band this is the single exponent used on every link.
    pub alpha_los: f64,
    /// Path-loss exponent on blocked links. Unused by the analysis
    /// (blocked mmWave interference is neglected); available to the
    /// Monte Carlo engine behind a config flag.
    pub alpha_nlos: f64,
    /// Noise power in watts.
    pub noise_w: f64,
}

impl BandParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_hz > 0.0) {
            return Err(CoreError::invalid("carrier_hz", "must be positive"));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(CoreError::invalid("bandwidth_hz", "must be positive"));
        }
        if self.alpha_los < 2.0 || self.alpha_nlos < 2.0 {
            return Err(CoreError::invalid(
                "alpha",
                "path-loss exponents must be >= 2",
            ));
        }
        if !(self.noise_w > 0.0) {
            return Err(CoreError::invalid("noise_w", "must be positive"));
        }
        Ok(())
    }

    /// Free-space path-loss constant `C = (lambda / 4 pi)^2` for this band.
    pub fn pathloss_constant(&self) -> f64 {
        pathloss_constant(self.carrier_hz)
    }
}

/// `C = (c / (4 pi f))^2`, the path-loss intercept at 1 m.
pub fn pathloss_constant(frequency_hz: f64) -> f64 {
    let lambda_over_4pi = SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * frequency_hz);
    lambda_over_4pi * lambda_over_4pi
}

/// Distance-dependent path loss `C d^{-alpha}` as a linear gain.
///
/// `d = 0` is rejected: the model has a singularity at the origin.
pub fn path_loss(d_m: f64, alpha: f64, c: f64) -> Result<f64> {
    if !(d_m > 0.0) {
        return Err(CoreError::invalid("d_m", "path loss undefined at d = 0"));
    }
    Ok(c * d_m.powf(-alpha))
}

/// Thermal-line noise power for a bandwidth: `-174 + 10 log10(B) + 10` dBm,
/// returned in watts. The trailing 10 dB is the receiver noise figure.
pub fn noise_power(bandwidth_hz: f64) -> f64 {
    dbm_to_watts(-174.0 + 10.0 * bandwidth_hz.log10() + 10.0)
}

/// Two-level sectored antenna pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaPattern {
    /// Mainlobe gain, linear.
    pub mainlobe_gain: f64,
    /// Sidelobe gain, linear.
    pub sidelobe_gain: f64,
    /// Mainlobe beamwidth in radians.
    pub beamwidth: f64,
}

impl AntennaPattern {
    pub fn new(mainlobe_gain: f64, sidelobe_gain: f64, beamwidth: f64) -> Result<Self> {
        let p = Self {
            mainlobe_gain,
            sidelobe_gain,
            beamwidth,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mainlobe_gain > self.sidelobe_gain) || !(self.sidelobe_gain > 0.0) {
            return Err(CoreError::invalid("antenna", "need g_m > g_s > 0"));
        }
        if !(self.beamwidth > 0.0) || self.beamwidth > std::f64::consts::TAU {
            return Err(CoreError::invalid("beamwidth", "must lie in (0, 2pi]"));
        }
        Ok(())
    }

    /// Fraction of the circle covered by the mainlobe, `p = theta / 2pi`.
    pub fn mainlobe_fraction(&self) -> f64 {
        self.beamwidth / std::f64::consts::TAU
    }

    /// Gain toward an offset angle: mainlobe within `theta/2`, sidelobe
    /// elsewhere. `offset` is the absolute angular distance between the
    /// boresight and the target direction.
    pub fn gain_at_offset(&self, offset: f64) -> f64 {
        if offset.abs() <= self.beamwidth / 2.0 {
            self.mainlobe_gain
        } else {
            self.sidelobe_gain
        }
    }
}

/// The three-level effective-gain random variable between a transmitter
/// with a uniformly random boresight and a receiver whose beam the
/// transmitter falls into with probability `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainDistribution {
    /// Gains `(g_m^2, g_m g_s, g_s^2)`, descending.
    pub gains: [f64; 3],
    /// Probabilities `(p^2, 2p(1-p), (1-p)^2)`.
    pub probabilities: [f64; 3],
}

/// Build the effective-gain distribution of a sectored pattern.
pub fn gain_distribution(pattern: &AntennaPattern) -> GainDistribution {
    let p = pattern.mainlobe_fraction();
    let gm = pattern.mainlobe_gain;
    let gs = pattern.sidelobe_gain;
    GainDistribution {
        gains: [gm * gm, gm * gs, gs * gs],
        probabilities: [p * p, 2.0 * p * (1.0 - p), (1.0 - p) * (1.0 - p)],
    }
}

/// One unit-mean Rayleigh power gain (an Exp(1) draw).
#[inline]
pub fn sample_rayleigh_gain<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}
