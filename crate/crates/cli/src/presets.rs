//! Canned experiment configurations reproducing the three headline
//! curve families.
//!
//! All presets use the reference parameter set (28/2 GHz bands, 10 dBi
//! sectored antennas, densities 1/5/50 per km^2, tau = -85 dBm, K = 6)
//! with the calibrated link budget: noise floors 30 dB under the
//! thermal line (-104 dBm mmWave, -114 dBm microwave). With thermal
//! noise the microwave D2D link is noise-dead at the 50 m reference
//! distance and the band comparison collapses; see the README.

use crate::config::{ExperimentConfig, RunSection, SweepSection, SystemSection, VariantSection};

/// Names accepted by the `preset` subcommand.
pub const PRESET_NAMES: [&str; 3] = ["fig4", "fig5", "fig6"];

fn calibrated_system() -> SystemSection {
    SystemSection {
        mmw_noise_dbm: Some(-104.0),
        uw_noise_dbm: Some(-114.0),
        ..SystemSection::default()
    }
}

/// SINR coverage vs threshold, -10..20 dB, at d0 = 50 m for two
/// blockage densities; analytic hybrid/mmw/uw plus a Monte Carlo hybrid.
pub fn fig4(seed: u64, iterations: usize) -> ExperimentConfig {
    ExperimentConfig {
        system: calibrated_system(),
        blockage: crate::config::BlockageSection {
            beta_per_m: Some(0.0053),
            ..Default::default()
        },
        sweep: SweepSection {
            axis: "sinr_threshold_db".into(),
            start: -10.0,
            stop: 20.0,
            points: 31,
            gamma_db: 0.0,
        },
        run: RunSection {
            monte_carlo_modes: vec!["hybrid_oracle".into()],
            iterations,
            seed,
            file_prefix: "fig4".into(),
            ..RunSection::default()
        },
        mechanism: Default::default(),
        variant: vec![
            VariantSection {
                label: "beta0.0027".into(),
                beta_per_m: Some(0.0027),
                lambda_dt_per_km2: None,
                d0_m: None,
            },
            VariantSection {
                label: "beta0.0053".into(),
                beta_per_m: Some(0.0053),
                lambda_dt_per_km2: None,
                d0_m: None,
            },
        ],
    }
}

/// SINR coverage vs pair distance, 10..150 m, at gamma = 0 dB and
/// beta = 0.0053 for two transmitter densities; analytic curves.
pub fn fig5(seed: u64, iterations: usize) -> ExperimentConfig {
    ExperimentConfig {
        system: calibrated_system(),
        blockage: crate::config::BlockageSection {
            beta_per_m: Some(0.0053),
            ..Default::default()
        },
        sweep: SweepSection {
            axis: "distance_m".into(),
            start: 10.0,
            stop: 150.0,
            points: 15,
            gamma_db: 0.0,
        },
        run: RunSection {
            iterations,
            seed,
            file_prefix: "fig5".into(),
            ..RunSection::default()
        },
        mechanism: Default::default(),
        variant: vec![
            VariantSection {
                label: "dt50".into(),
                beta_per_m: None,
                lambda_dt_per_km2: Some(50.0),
                d0_m: None,
            },
            VariantSection {
                label: "dt100".into(),
                beta_per_m: None,
                lambda_dt_per_km2: Some(100.0),
                d0_m: None,
            },
        ],
    }
}

/// Rate coverage vs target rate, 10 Mbit/s to 1 Gbit/s, at d0 = 50 m
/// and beta = 0.0053; analytic curves.
pub fn fig6(seed: u64, iterations: usize) -> ExperimentConfig {
    ExperimentConfig {
        system: calibrated_system(),
        blockage: crate::config::BlockageSection {
            beta_per_m: Some(0.0053),
            ..Default::default()
        },
        sweep: SweepSection {
            axis: "rate_bps".into(),
            start: 1e7,
            stop: 1e9,
            points: 15,
            gamma_db: 0.0,
        },
        run: RunSection {
            iterations,
            seed,
            file_prefix: "fig6".into(),
            ..RunSection::default()
        },
        mechanism: Default::default(),
        variant: vec![],
    }
}

pub fn by_name(name: &str, seed: u64, iterations: usize) -> Option<ExperimentConfig> {
    match name {
        "fig4" => Some(fig4(seed, iterations)),
        "fig5" => Some(fig5(seed, iterations)),
        "fig6" => Some(fig6(seed, iterations)),
        _ => None,
    }
}
