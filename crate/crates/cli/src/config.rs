//! Experiment configuration: a TOML file with explicit units in every
//! key name, converted to internal SI quantities at parse time.

use anyhow::{bail, Context, Result};
use duoband_core::aoa::MechanismParams;
use duoband_core::geometry::{derive_beta, BlockageProcess};
use duoband_core::params::SystemParams;
use duoband_core::propagation::{
    db_to_linear, dbm_to_watts, noise_power, AntennaPattern, BandParams, SPEED_OF_LIGHT,
};
use duoband_core::simulator::{BusyHandling, LosModel, SimMode, UwSensing};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemSection {
    pub p_d_dbm: f64,
    pub p_b_dbm: f64,
    pub mainlobe_gain_dbi: f64,
    pub sidelobe_gain_dbi: f64,
    pub beamwidth_deg: f64,
    pub lambda_b_per_km2: f64,
    pub lambda_c_per_km2: f64,
    pub lambda_dt_per_km2: f64,
    pub mmw_carrier_ghz: f64,
    pub mmw_bandwidth_ghz: f64,
    pub mmw_alpha_los: f64,
    pub mmw_alpha_nlos: f64,
    /// Noise floor override; omit to use the thermal line
    /// -174 + 10 log10(B) + 10 dBm.
    pub mmw_noise_dbm: Option<f64>,
    pub uw_carrier_ghz: f64,
    pub uw_bandwidth_ghz: f64,
    pub uw_alpha: f64,
    pub uw_noise_dbm: Option<f64>,
    pub tau_dbm: f64,
    pub channels_k: u32,
    pub q_a: f64,
    pub d0_m: f64,
    pub window_half_width_m: f64,
    pub pathloss_constant_in_sensing: bool,
    pub pkd_override: Option<f64>,
    pub pkd_cells: usize,
    /// Monte Carlo only: let blocked mmWave interferers contribute
    /// through the NLOS exponent.
    pub mmw_nlos_interference: bool,
}

impl Default for SystemSection {
    fn default() -> Self {
        SystemSection {
            p_d_dbm: 0.0,
            p_b_dbm: 37.0,
            mainlobe_gain_dbi: 10.0,
            sidelobe_gain_dbi: -10.0,
            beamwidth_deg: 30.0,
            lambda_b_per_km2: 1.0,
            lambda_c_per_km2: 5.0,
            lambda_dt_per_km2: 50.0,
            mmw_carrier_ghz: 28.0,
            mmw_bandwidth_ghz: 1.0,
            mmw_alpha_los: 2.0,
            mmw_alpha_nlos: 5.0,
            mmw_noise_dbm: None,
            uw_carrier_ghz: 2.0,
            uw_bandwidth_ghz: 0.1,
            uw_alpha: 4.0,
            uw_noise_dbm: None,
            tau_dbm: -85.0,
            channels_k: 6,
            q_a: 1.0,
            d0_m: 50.0,
            window_half_width_m: 5000.0,
            pathloss_constant_in_sensing: false,
            pkd_override: None,
            pkd_cells: 20_000,
            mmw_nlos_interference: false,
        }
    }
}

/// Blockage model: either a direct LOS decay rate (links are thinned by
/// `exp(-beta r)` coin flips) or a geometric rectangle process (links
/// are ray-traced; beta is derived for the analytic side).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlockageSection {
    pub beta_per_m: Option<f64>,
    pub density_per_km2: Option<f64>,
    pub length_range_m: Option<[f64; 2]>,
    pub width_range_m: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// "sinr_threshold_db", "distance_m" or "rate_bps".
    pub axis: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    /// Fixed SINR threshold for distance sweeps.
    #[serde(default)]
    pub gamma_db: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    /// Analytic curves to evaluate: "hybrid", "mmw", "uw".
    pub analytic_modes: Vec<String>,
    /// Monte Carlo curves: "mmw", "uw", "hybrid_oracle",
    /// "hybrid_mechanism".
    pub monte_carlo_modes: Vec<String>,
    pub iterations: usize,
    pub seed: u64,
    pub output_dir: String,
    pub file_prefix: String,
    /// "mean_radius_disk" (analytic-matched) or "per_realization".
    pub uw_sensing: String,
    /// "outage" or "condition_on_access".
    pub busy_handling: String,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            analytic_modes: vec!["hybrid".into(), "mmw".into(), "uw".into()],
            monte_carlo_modes: vec![],
            iterations: 10_000,
            seed: 42,
            output_dir: "out".into(),
            file_prefix: "curves".into(),
            uw_sensing: "mean_radius_disk".into(),
            busy_handling: "outage".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MechanismSection {
    pub window: usize,
    pub angular_tolerance_deg: f64,
    pub jitter_sigma_m: f64,
    pub reflection_loss_db: f64,
    pub peak_floor_dbm: f64,
    pub angular_resolution_deg: f64,
}

impl Default for MechanismSection {
    fn default() -> Self {
        MechanismSection {
            window: 2,
            angular_tolerance_deg: 2.0,
            jitter_sigma_m: 0.3,
            reflection_loss_db: -10.0,
            peak_floor_dbm: -120.0,
            angular_resolution_deg: 0.5,
        }
    }
}

/// One curve family: overrides applied on top of `[system]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantSection {
    pub label: String,
    #[serde(default)]
    pub beta_per_m: Option<f64>,
    #[serde(default)]
    pub lambda_dt_per_km2: Option<f64>,
    #[serde(default)]
    pub d0_m: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub blockage: BlockageSection,
    pub sweep: SweepSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub mechanism: MechanismSection,
    #[serde(default)]
    pub variant: Vec<VariantSection>,
}

/// Everything resolved to SI units, ready to execute.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub base: SystemParams,
    pub los_model: LosModel,
    pub variants: Vec<(String, SystemParams)>,
    pub grid: Vec<f64>,
    pub axis: duoband_core::evaluator::Axis,
    pub gamma: f64,
    pub analytic_modes: Vec<duoband_core::evaluator::EvalMode>,
    pub mc_modes: Vec<SimMode>,
    pub iterations: usize,
    pub seed: u64,
    pub uw_sensing: UwSensing,
    pub busy_handling: BusyHandling,
    pub mechanism: MechanismParams,
    pub pkd_cells: usize,
    pub file_prefix: String,
}

const KM2: f64 = 1e-6; // per km^2 -> per m^2

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        Ok(cfg)
    }

    /// Resolve the raw sections into validated internal parameters.
    pub fn resolve(&self) -> Result<Resolved> {
        let s = &self.system;
        let tau = dbm_to_watts(s.tau_dbm);
        if !(tau > 0.0) || !tau.is_finite() {
            bail!("system.tau_dbm: threshold must be finite (the threshold region diverges otherwise)");
        }

        let (beta, los_model) = self.resolve_blockage()?;

        let mmw_bw = s.mmw_bandwidth_ghz * 1e9;
        let uw_bw = s.uw_bandwidth_ghz * 1e9;
        let base = SystemParams {
            p_d: dbm_to_watts(s.p_d_dbm),
            p_b: dbm_to_watts(s.p_b_dbm),
            antenna: AntennaPattern {
                mainlobe_gain: db_to_linear(s.mainlobe_gain_dbi),
                sidelobe_gain: db_to_linear(s.sidelobe_gain_dbi),
                beamwidth: s.beamwidth_deg.to_radians(),
            },
            lambda_b: s.lambda_b_per_km2 * KM2,
            lambda_c: s.lambda_c_per_km2 * KM2,
            lambda_dt: s.lambda_dt_per_km2 * KM2,
            mmw: BandParams {
                carrier_hz: s.mmw_carrier_ghz * 1e9,
                bandwidth_hz: mmw_bw,
                alpha_los: s.mmw_alpha_los,
                alpha_nlos: s.mmw_alpha_nlos,
                noise_w: s
                    .mmw_noise_dbm
                    .map(dbm_to_watts)
                    .unwrap_or_else(|| noise_power(mmw_bw)),
            },
            uw: BandParams {
                carrier_hz: s.uw_carrier_ghz * 1e9,
                bandwidth_hz: uw_bw,
                alpha_los: s.uw_alpha,
                alpha_nlos: s.uw_alpha,
                noise_w: s
                    .uw_noise_dbm
                    .map(dbm_to_watts)
                    .unwrap_or_else(|| noise_power(uw_bw)),
            },
            sensing_threshold: tau,
            channels_k: s.channels_k,
            q_a: s.q_a,
            beta,
            d0: s.d0_m,
            window_half_width: s.window_half_width_m,
            pathloss_constant_in_sensing: s.pathloss_constant_in_sensing,
            pkd_override: s.pkd_override,
            mmw_nlos_interference: s.mmw_nlos_interference,
        };
        base.validate()
            .map_err(|e| anyhow::anyhow!("system section: {e}"))?;

        let mut variants = Vec::new();
        if self.variant.is_empty() {
            variants.push(("default".to_string(), base.clone()));
        } else {
            for v in &self.variant {
                let mut p = base.clone();
                if let Some(b) = v.beta_per_m {
                    p.beta = b;
                }
                if let Some(l) = v.lambda_dt_per_km2 {
                    p.lambda_dt = l * KM2;
                }
                if let Some(d) = v.d0_m {
                    p.d0 = d;
                }
                p.validate()
                    .map_err(|e| anyhow::anyhow!("variant `{}`: {e}", v.label))?;
                variants.push((v.label.clone(), p));
            }
        }

        let axis = match self.sweep.axis.as_str() {
            "sinr_threshold_db" => duoband_core::evaluator::Axis::SinrThresholdDb,
            "distance_m" => duoband_core::evaluator::Axis::DistanceM,
            "rate_bps" => duoband_core::evaluator::Axis::RateBps,
            other => bail!("sweep.axis: unknown axis `{other}`"),
        };
        if self.sweep.points < 2 {
            bail!("sweep.points: need at least 2 grid points");
        }
        if !(self.sweep.stop > self.sweep.start) {
            bail!("sweep: stop must exceed start");
        }
        let n = self.sweep.points;
        let grid: Vec<f64> = (0..n)
            .map(|i| {
                self.sweep.start + (self.sweep.stop - self.sweep.start) * i as f64 / (n - 1) as f64
            })
            .collect();

        let mut analytic_modes = Vec::new();
        for m in &self.run.analytic_modes {
            analytic_modes.push(match m.as_str() {
                "hybrid" => duoband_core::evaluator::EvalMode::Hybrid,
                "mmw" => duoband_core::evaluator::EvalMode::MmwOnly,
                "uw" => duoband_core::evaluator::EvalMode::UwOnly,
                other => bail!("run.analytic_modes: unknown mode `{other}`"),
            });
        }
        let mut mc_modes = Vec::new();
        for m in &self.run.monte_carlo_modes {
            mc_modes.push(match m.as_str() {
                "mmw" => SimMode::MmwOnly,
                "uw" => SimMode::UwOnly,
                "hybrid_oracle" => SimMode::HybridOracle,
                "hybrid_mechanism" => SimMode::HybridMechanism,
                other => bail!("run.monte_carlo_modes: unknown mode `{other}`"),
            });
        }
        if mc_modes.contains(&SimMode::HybridMechanism)
            && !matches!(los_model, LosModel::Geometric(_))
        {
            bail!("run.monte_carlo_modes: hybrid_mechanism needs a geometric [blockage] section (the beacon spectra need real reflectors)");
        }
        if self.run.iterations == 0 {
            bail!("run.iterations: need at least one iteration");
        }

        let uw_sensing = match self.run.uw_sensing.as_str() {
            "mean_radius_disk" => UwSensing::MeanRadiusDisk,
            "per_realization" => UwSensing::PerRealization,
            other => bail!("run.uw_sensing: unknown mode `{other}`"),
        };
        let busy_handling = match self.run.busy_handling.as_str() {
            "outage" => BusyHandling::Outage,
            "condition_on_access" => BusyHandling::ConditionOnAccess,
            other => bail!("run.busy_handling: unknown mode `{other}`"),
        };

        let m = &self.mechanism;
        if m.window < 1 {
            bail!("mechanism.window: must hold at least one observation");
        }
        let mechanism = MechanismParams {
            window: m.window,
            angular_tolerance: m.angular_tolerance_deg.to_radians(),
            jitter_sigma: m.jitter_sigma_m,
            reflection_loss: db_to_linear(m.reflection_loss_db),
            peak_floor: dbm_to_watts(m.peak_floor_dbm),
            angular_resolution: m.angular_resolution_deg.to_radians(),
            p_d: base.p_d,
            beacon_c: base.uw.pathloss_constant(),
            beacon_alpha: base.uw.alpha_los,
            reflection_angle_jitter: std::f64::consts::TAU * m.jitter_sigma_m
                / (SPEED_OF_LIGHT / base.uw.carrier_hz),
        };

        Ok(Resolved {
            base,
            los_model,
            variants,
            grid,
            axis,
            gamma: db_to_linear(self.sweep.gamma_db),
            analytic_modes,
            mc_modes,
            iterations: self.run.iterations,
            seed: self.run.seed,
            uw_sensing,
            busy_handling,
            mechanism,
            pkd_cells: self.system.pkd_cells,
            file_prefix: self.run.file_prefix.clone(),
        })
    }

    fn resolve_blockage(&self) -> Result<(f64, LosModel)> {
        let b = &self.blockage;
        match (b.density_per_km2, b.beta_per_m) {
            (Some(density), _) => {
                let length = b.length_range_m.ok_or_else(|| {
                    anyhow::anyhow!("blockage.length_range_m: required in geometric mode")
                })?;
                let width = b.width_range_m.ok_or_else(|| {
                    anyhow::anyhow!("blockage.width_range_m: required in geometric mode")
                })?;
                let process = BlockageProcess::new(
                    density * KM2,
                    (length[0], length[1]),
                    (width[0], width[1]),
                )
                .map_err(|e| anyhow::anyhow!("blockage: {e}"))?;
                let beta = derive_beta(&process);
                Ok((beta, LosModel::Geometric(process)))
            }
            (None, Some(beta)) => {
                if beta < 0.0 {
                    bail!("blockage.beta_per_m: must be nonnegative");
                }
                Ok((beta, LosModel::Bernoulli))
            }
            (None, None) => bail!(
                "blockage: set beta_per_m (direct mode) or density_per_km2 with size ranges (geometric mode)"
            ),
        }
    }
}
