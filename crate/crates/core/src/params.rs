//! System-wide parameter bundle and small shared types.

use crate::error::{CoreError, Result};
use crate::propagation::{db_to_linear, dbm_to_watts, noise_power, AntennaPattern, BandParams};

/// How a Laplace-transform value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Quadrature,
    Empirical,
}

/// Value of an interference Laplace transform together with its
/// provenance and an error bound (quadrature estimate or bootstrap
/// half-width; closed forms carry none).
#[derive(Debug, Clone, Copy)]
pub struct LaplaceEvaluation {
    pub value: f64,
    pub method: Method,
    pub error: Option<f64>,
}

impl LaplaceEvaluation {
    pub fn closed_form(value: f64) -> Self {
        LaplaceEvaluation {
            value,
            method: Method::ClosedForm,
            error: None,
        }
    }
}

/// Every symbol of the system model in linear SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// D2D transmit power, watts.
    pub p_d: f64,
    /// Base-station transmit power, watts.
    pub p_b: f64,
    /// Sectored antenna used in the mmWave band.
    pub antenna: AntennaPattern,
    /// Base stations per m^2.
    pub lambda_b: f64,
    /// Cellular users per m^2.
    pub lambda_c: f64,
    /// D2D transmitters per m^2.
    pub lambda_dt: f64,
    /// Millimeter-wave band.
    pub mmw: BandParams,
    /// Microwave band. Its `alpha_los` is the single exponent used on
    /// every microwave link.
    pub uw: BandParams,
    /// Channel-sensing threshold, watts.
    pub sensing_threshold: f64,
    /// Number of orthogonal downlink channels; the D2D-shared channel
    /// is occupied by a base station only when the other K-1 are.
    pub channels_k: u32,
    /// Slotted-Aloha access probability of mmWave interferers.
    pub q_a: f64,
    /// Blockage LOS decay rate, per meter.
    pub beta: f64,
    /// Test-pair separation, meters.
    pub d0: f64,
    /// Half width of the simulation window, meters.
    pub window_half_width: f64,
    /// Apply the free-space constant inside the sensing rule (and the
    /// matching threshold-region radius). The printed radius formula
    /// omits it; keeping the default false reproduces that convention.
    pub pathloss_constant_in_sensing: bool,
    /// Fixed channel-occupancy probability; `None` estimates it from
    /// the cell-load Monte Carlo.
    pub pkd_override: Option<f64>,
    /// Let blocked millimeter-wave interferers contribute through the
    /// NLOS exponent in the Monte Carlo engine. The analysis neglects
    /// them, so this is a simulation-only knob for model-error studies.
    pub mmw_nlos_interference: bool,
}

impl SystemParams {
    /// Baseline parameter set: 28 GHz / 2 GHz bands, 10 dBi / -10 dBi
    /// sectored antenna with a 30 degree mainlobe, densities
    /// (1, 5, 50) per km^2, thermal-line noise.
    pub fn baseline() -> Self {
        let mmw_bw = 1e9;
        let uw_bw = 0.1e9;
        SystemParams {
            p_d: dbm_to_watts(0.0),
            p_b: dbm_to_watts(37.0),
            antenna: AntennaPattern {
                mainlobe_gain: db_to_linear(10.0),
                sidelobe_gain: db_to_linear(-10.0),
                beamwidth: 30f64.to_radians(),
            },
            lambda_b: 1e-6,
            lambda_c: 5e-6,
            lambda_dt: 50e-6,
            mmw: BandParams {
                carrier_hz: 28e9,
                bandwidth_hz: mmw_bw,
                alpha_los: 2.0,
                alpha_nlos: 5.0,
                noise_w: noise_power(mmw_bw),
            },
            uw: BandParams {
                carrier_hz: 2e9,
                bandwidth_hz: uw_bw,
                alpha_los: 4.0,
                alpha_nlos: 4.0,
                noise_w: noise_power(uw_bw),
            },
            sensing_threshold: dbm_to_watts(-85.0),
            channels_k: 6,
            q_a: 1.0,
            beta: 0.0053,
            d0: 50.0,
            window_half_width: 5000.0,
            pathloss_constant_in_sensing: false,
            pkd_override: None,
            mmw_nlos_interference: false,
        }
    }

    /// Baseline with the noise floors lowered by 30 dB (-104 dBm mmWave,
    /// -114 dBm microwave). The bundled figure presets use this link
    /// budget: with thermal-line noise the microwave D2D link is
    /// noise-dead at the 50 m reference distance (SNR around -22 dB)
    /// and none of the band-comparison structure is visible.
    pub fn figure_calibration() -> Self {
        let mut p = Self::baseline();
        p.mmw.noise_w = dbm_to_watts(-104.0);
        p.uw.noise_w = dbm_to_watts(-114.0);
        p
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("p_d", self.p_d),
            ("p_b", self.p_b),
            ("sensing_threshold", self.sensing_threshold),
            ("d0", self.d0),
            ("window_half_width", self.window_half_width),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CoreError::invalid(
                    name,
                    format!("must be positive, got {v}"),
                ));
            }
        }
        for (name, v) in [
            ("lambda_b", self.lambda_b),
            ("lambda_c", self.lambda_c),
            ("lambda_dt", self.lambda_dt),
            ("beta", self.beta),
        ] {
            if v < 0.0 || !v.is_finite() {
                return Err(CoreError::invalid(
                    name,
                    format!("must be nonnegative, got {v}"),
                ));
            }
        }
        if !(0.0..=1.0).contains(&self.q_a) {
            return Err(CoreError::invalid("q_a", "must lie in [0, 1]"));
        }
        if self.channels_k < 1 {
            return Err(CoreError::invalid(
                "channels_k",
                "need at least one channel",
            ));
        }
        if let Some(pkd) = self.pkd_override {
            if !(0.0..=1.0).contains(&pkd) {
                return Err(CoreError::invalid("pkd_override", "must lie in [0, 1]"));
            }
        }
        self.antenna.validate()?;
        self.mmw.validate()?;
        self.uw.validate()?;
        Ok(())
    }
}
