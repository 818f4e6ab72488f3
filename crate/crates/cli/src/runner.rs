//! Experiment execution: analytic sweeps, Monte Carlo runs, CSV and
//! manifest output.
//!
//! Every run writes a `*_manifest.toml` holding the fully resolved
//! configuration, the seed and the build provenance; each CSV embeds
//! the manifest's SHA-256 in a leading comment so a curve can always be
//! traced back to the exact run that produced it. Nothing time-varying
//! goes into the manifest: identical inputs give byte-identical output.

use crate::config::{ExperimentConfig, Resolved};
use anyhow::{Context, Result};
use duoband_core::analysis::{MmwScenario, UwScenario};
use duoband_core::evaluator::{self, Axis, CoverageCurve, EvalMode};
use duoband_core::params::SystemParams;
use duoband_core::simulator::{self, DerivedParams, SimConfig, SimMode};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Outcome of a full experiment run.
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    /// Grid points that failed analytic evaluation, per curve label.
    pub failures: Vec<(String, f64, String)>,
}

fn mc_label(mode: SimMode) -> &'static str {
    match mode {
        SimMode::MmwOnly => "mmw",
        SimMode::UwOnly => "uw",
        SimMode::HybridOracle => "hybrid_oracle",
        SimMode::HybridMechanism => "hybrid_mechanism",
    }
}

/// Render the manifest: the full experiment config plus provenance.
/// The output directory is a runtime choice, not part of the
/// experiment's identity, so it is normalized out of the manifest.
pub fn manifest_text(config: &ExperimentConfig) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "[provenance]");
    let _ = writeln!(out, "package = \"{}\"", env!("CARGO_PKG_NAME"));
    let _ = writeln!(out, "version = \"{}\"", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "git_describe = \"{}\"", git_describe());
    let _ = writeln!(out);
    let body = toml::to_string_pretty(&portable(config)).context("serializing manifest")?;
    out.push_str(&body);
    Ok(out)
}

/// Copy of a config with the run location normalized.
pub fn portable(config: &ExperimentConfig) -> ExperimentConfig {
    let mut c = config.clone();
    c.run.output_dir = ".".into();
    c
}

fn git_describe() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .unwrap_or_else(|| "unknown".to_string())
}

pub fn sha256_hex(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let digest = hasher.finalize();
    digest.iter().fold(String::new(), |mut acc, b| {
        let _ = write!(acc, "{b:02x}");
        acc
    })
}

/// Analytic curve for one variant and mode over the resolved grid.
fn analytic_curve(
    resolved: &Resolved,
    params: &SystemParams,
    mode: EvalMode,
    p_kd: f64,
) -> Result<CoverageCurve> {
    let gamma = match resolved.axis {
        Axis::SinrThresholdDb => 1.0, // replaced per grid point
        _ => resolved.gamma,
    };
    let mmw = MmwScenario::from_params(params, gamma);
    let uw = UwScenario::from_params(params, gamma);
    evaluator::sweep(mode, resolved.axis, &resolved.grid, &mmw, &uw, p_kd)
        .map_err(|e| anyhow::anyhow!("analytic sweep: {e}"))
}

/// Monte Carlo curve for one variant and mode.
fn monte_carlo_curve(
    resolved: &Resolved,
    params: &SystemParams,
    mode: SimMode,
    derived: &DerivedParams,
) -> Result<CoverageCurve> {
    let mut config = SimConfig::new(resolved.iterations, resolved.seed, mode);
    config.los_model = resolved.los_model.clone();
    config.uw_sensing = resolved.uw_sensing;
    config.busy_handling = resolved.busy_handling;
    config.pkd_cells = resolved.pkd_cells;

    match resolved.axis {
        Axis::SinrThresholdDb => {
            let samples =
                simulator::run_with_derived(params, &config, &resolved.mechanism, derived)?;
            Ok(simulator::coverage_curve(
                &samples,
                &resolved.grid,
                mode,
                resolved.busy_handling,
                mc_label(mode),
            )?)
        }
        Axis::RateBps => {
            let samples =
                simulator::run_with_derived(params, &config, &resolved.mechanism, derived)?;
            Ok(simulator::rate_curve(
                &samples,
                &resolved.grid,
                params,
                mode,
                resolved.busy_handling,
                mc_label(mode),
            )?)
        }
        Axis::DistanceM => {
            // One run per distance; the shared seed gives common random
            // numbers across the grid.
            let gamma_db = 10.0 * resolved.gamma.log10();
            let mut points = Vec::with_capacity(resolved.grid.len());
            for &d0 in &resolved.grid {
                let mut p = params.clone();
                p.d0 = d0;
                let samples =
                    simulator::run_with_derived(&p, &config, &resolved.mechanism, derived)?;
                let c = simulator::coverage_curve(
                    &samples,
                    &[gamma_db],
                    mode,
                    resolved.busy_handling,
                    mc_label(mode),
                )?;
                points.push(duoband_core::evaluator::CurvePoint {
                    x: d0,
                    value: c.points[0].value,
                    ci_halfwidth: c.points[0].ci_halfwidth,
                });
            }
            Ok(CoverageCurve::new(
                Axis::DistanceM,
                duoband_core::evaluator::Source::MonteCarlo,
                mc_label(mode),
                points,
                vec![],
            )?)
        }
    }
}

/// Execute a whole experiment: write the manifest, then one CSV per
/// (variant, curve).
pub fn execute(config: &ExperimentConfig, output_dir: &Path) -> Result<RunSummary> {
    let resolved = config.resolve()?;
    std::fs::create_dir_all(output_dir)
        .with_context(|| format!("creating {}", output_dir.display()))?;

    let manifest = manifest_text(config)?;
    let hash = sha256_hex(&manifest);
    let prefix = &resolved.file_prefix;
    let manifest_path = output_dir.join(format!("{prefix}_manifest.toml"));
    std::fs::write(&manifest_path, &manifest)
        .with_context(|| format!("writing {}", manifest_path.display()))?;

    let mut files = vec![manifest_path];
    let mut failures = Vec::new();

    for (label, params) in &resolved.variants {
        // One occupancy estimate per variant, shared by the analytic and
        // Monte Carlo sides.
        let derived = DerivedParams::resolve(params, resolved.seed, resolved.pkd_cells);

        for &mode in &resolved.analytic_modes {
            let curve = analytic_curve(&resolved, params, mode, derived.p_kd)?;
            for (x, why) in &curve.failures {
                failures.push((format!("{label}/{}", mode.label()), *x, why.clone()));
            }
            let path = output_dir.join(format!("{prefix}_{label}_{}_analytic.csv", mode.label()));
            std::fs::write(&path, curve.to_csv(Some(&hash)))
                .with_context(|| format!("writing {}", path.display()))?;
            files.push(path);
        }

        for &mode in &resolved.mc_modes {
            let curve = monte_carlo_curve(&resolved, params, mode, &derived)?;
            let path = output_dir.join(format!("{prefix}_{label}_{}_mc.csv", mc_label(mode)));
            std::fs::write(&path, curve.to_csv(Some(&hash)))
                .with_context(|| format!("writing {}", path.display()))?;
            files.push(path);
        }
    }

    Ok(RunSummary { files, failures })
}

/// Check a config and report the derived quantities without running.
pub fn validate_report(config: &ExperimentConfig) -> Result<String> {
    use duoband_core::analysis;
    use duoband_core::propagation::watts_to_dbm;
    use rand::SeedableRng;

    let resolved = config.resolve()?;
    let p = &resolved.base;
    let mut out = String::new();
    let _ = writeln!(out, "config ok");
    let _ = writeln!(out, "beta_per_m = {:.6}", p.beta);
    let _ = writeln!(
        out,
        "pathloss_constant_mmw = {:.6e}",
        p.mmw.pathloss_constant()
    );
    let _ = writeln!(
        out,
        "pathloss_constant_uw = {:.6e}",
        p.uw.pathloss_constant()
    );
    let _ = writeln!(out, "sigma2_mmw_dbm = {:.2}", watts_to_dbm(p.mmw.noise_w));
    let _ = writeln!(out, "sigma2_uw_dbm = {:.2}", watts_to_dbm(p.uw.noise_w));
    let scen = analysis::UwScenario::from_params(p, 1.0);
    let d_tau = scen.mean_threshold_radius();
    let _ = writeln!(out, "mean_threshold_radius_m = {:.1}", d_tau);
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(resolved.seed);
    let p_kd = scen.pkd(&mut rng, resolved.pkd_cells.min(10_000));
    let _ = writeln!(out, "p_kd = {:.4}", p_kd);
    let _ = writeln!(
        out,
        "p_a = {:.4}",
        analysis::availability(p.lambda_b, p_kd, d_tau)
    );
    let _ = writeln!(out, "variants = {}", resolved.variants.len());
    let _ = writeln!(out, "grid_points = {}", resolved.grid.len());
    Ok(out)
}
