//! Monte Carlo engine: drop network realizations, apply Aloha thinning,
//! antenna orientations, fading, blockage and sensing, and estimate
//! coverage curves and empirical Laplace transforms.
//!
//! Determinism: iteration `i` draws from a ChaCha stream derived from
//! `(root_seed, i)`, so results are bit-identical for a fixed seed no
//! matter how many threads run, and common random numbers are shared
//! across the whole threshold grid (each realization is scored against
//! every grid point).
//!
//! Two LOS conventions are provided. `Bernoulli` thins links with
//! `exp(-beta r)` coin flips, matching the analysis' assumptions
//! exactly, which is what the analytic cross-checks use. `Geometric`
//! drops rectangle fields and traces segments, which quantifies the
//! model error of the exponential abstraction (and is required by the
//! band-selection mechanism, which needs real reflectors).

use crate::aoa::{self, BandDecision, MechanismParams};
use crate::error::Result;
use crate::evaluator::{Axis, CoverageCurve, CurvePoint, Source};
use crate::geometry::{
    los_probability, sample_ppp, sample_realization, BlockageIndex, BlockageProcess,
    FieldDensities, NetworkRealization, Point2D,
};
use crate::params::{LaplaceEvaluation, Method, SystemParams};
use crate::propagation::sample_rayleigh_gain;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use std::f64::consts::TAU;

/// Which transmission the engine simulates per iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    MmwOnly,
    UwOnly,
    /// Band chosen by the ground-truth LOS state of the test link.
    HybridOracle,
    /// Band chosen by running the beacon mechanism (requires the
    /// geometric LOS model).
    HybridMechanism,
}

/// How link blockage is decided.
#[derive(Debug, Clone)]
pub enum LosModel {
    /// Independent `exp(-beta r)` coin per link (analytic-matched).
    Bernoulli,
    /// Rectangle fields and segment tracing.
    Geometric(BlockageProcess),
}

/// How the microwave channel sensing is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UwSensing {
    /// Analytic-matched: occupied stations inside the mean threshold
    /// radius are removed, the test link always has access, and DT
    /// interferers are retained i.i.d. with probability `p_a`.
    MeanRadiusDisk,
    /// Physical: every D2D transmitter (test pair included) compares
    /// the power it senses from occupied stations against tau.
    PerRealization,
}

/// Outcome metric when the test pair senses the channel busy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BusyHandling {
    /// A busy channel is an outage (SINR 0).
    Outage,
    /// Score coverage among accessing iterations only, matching the
    /// analysis' conditioning.
    ConditionOnAccess,
}

/// Band a sample was (or would have been) sent on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandKind {
    MmWave,
    MicroWave,
}

/// One iteration's result at the test receiver.
#[derive(Debug, Clone, Copy)]
pub struct SinrSample {
    /// Linear SINR of the attempted transmission; 0 marks an outage
    /// (blocked mmWave link, busy channel, or a misdetected beam).
    pub sinr: f64,
    pub band_used: BandKind,
    /// Ground-truth LOS state of the test link.
    pub los: bool,
    /// Whether the microwave channel was sensed free (always true in
    /// mmWave-only samples and in the analytic-matched sensing mode).
    pub channel_free: bool,
    /// Aggregate interference at the receiver, watts.
    pub interference: f64,
    /// Base-station part of the interference (microwave band only).
    pub interference_bs: f64,
}

/// Full simulation configuration.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub iterations: usize,
    pub root_seed: u64,
    pub mode: SimMode,
    pub los_model: LosModel,
    pub uw_sensing: UwSensing,
    pub busy_handling: BusyHandling,
    /// Cell count for the channel-occupancy estimate when the system
    /// parameters do not pin `p_kd`.
    pub pkd_cells: usize,
}

impl SimConfig {
    pub fn new(iterations: usize, root_seed: u64, mode: SimMode) -> Self {
        SimConfig {
            iterations,
            root_seed,
            mode,
            los_model: LosModel::Bernoulli,
            uw_sensing: UwSensing::MeanRadiusDisk,
            busy_handling: BusyHandling::Outage,
            pkd_cells: 20_000,
        }
    }
}

/// Quantities derived once per run and shared by all iterations.
#[derive(Debug, Clone, Copy)]
pub struct DerivedParams {
    pub p_kd: f64,
    pub p_a: f64,
    pub d_tau_bar: f64,
}

impl DerivedParams {
    /// Resolve `p_kd` (override or seeded cell-load estimate), the mean
    /// threshold radius and the availability.
    pub fn resolve(params: &SystemParams, root_seed: u64, pkd_cells: usize) -> Self {
        let scenario = crate::analysis::UwScenario::from_params(params, 1.0);
        let mut rng = ChaCha12Rng::seed_from_u64(root_seed);
        rng.set_stream(u64::MAX); // keep the estimate off the iteration streams
        let p_kd = scenario.pkd(&mut rng, pkd_cells);
        let d_tau_bar = scenario.mean_threshold_radius();
        let p_a = crate::analysis::availability(params.lambda_b, p_kd, d_tau_bar);
        DerivedParams {
            p_kd,
            p_a,
            d_tau_bar,
        }
    }
}

fn bearing_gain(pattern: &crate::propagation::AntennaPattern, boresight: f64, bearing: f64) -> f64 {
    pattern.gain_at_offset(aoa::angular_distance(boresight, bearing))
}

/// LOS state of the link rx -> p under either model. Geometric lookups
/// treat a covered endpoint as blocked (the interferer is inside a
/// building; its wall blocks the link).
fn link_is_los<R: Rng + ?Sized>(
    index: Option<&BlockageIndex>,
    a: &Point2D,
    b: &Point2D,
    beta: f64,
    rng: &mut R,
) -> bool {
    match index {
        Some(ix) => ix.is_los(a, b).unwrap_or(false),
        None => rng.gen_bool(los_probability(a.distance(b), beta).clamp(0.0, 1.0)),
    }
}

/// One millimeter-wave iteration: Aloha-thin the DT field, keep LOS
/// interferers, classify antenna gains by actual bearings, draw fading,
/// and form the SINR of the aligned test link.
pub fn simulate_mmw_iteration<R: Rng + ?Sized>(
    params: &SystemParams,
    realization: &NetworkRealization,
    rng: &mut R,
) -> SinrSample {
    let c = params.mmw.pathloss_constant();
    let alpha = params.mmw.alpha_los;
    let index = (!realization.blockages.is_empty()).then_some(&realization.blockages);
    let rx = realization.test_rx;
    let boresight = rx.bearing_to(&realization.test_tx);
    let gm = params.antenna.mainlobe_gain;

    let mut interference = 0.0;
    let mut compensation = 0.0; // Kahan term for the interference sum
    for dt in &realization.dts {
        if params.q_a < 1.0 && !rng.gen_bool(params.q_a) {
            continue;
        }
        let r = dt.distance(&rx);
        if r == 0.0 {
            continue;
        }
        let los = link_is_los(index, &rx, dt, params.beta, rng);
        if !los && !params.mmw_nlos_interference {
            continue; // blocked interference is neglected by default
        }
        // Receiver side: is the interferer inside the test beam?
        let g_rx = bearing_gain(&params.antenna, boresight, rx.bearing_to(dt));
        // Interferer side: uniformly random boresight.
        let phi = rng.gen_range(0.0..TAU);
        let g_tx = bearing_gain(&params.antenna, phi, dt.bearing_to(&rx));
        let h = sample_rayleigh_gain(rng);
        let exponent = if los { alpha } else { params.mmw.alpha_nlos };
        let term = params.p_d * h * g_rx * g_tx * c * r.powf(-exponent);
        let y = term - compensation;
        let t = interference + y;
        compensation = (t - interference) - y;
        interference = t;
    }

    let los = link_is_los(index, &rx, &realization.test_tx, params.beta, rng);
    let h0 = sample_rayleigh_gain(rng);
    let signal = params.p_d * h0 * gm * gm * c * params.d0.powf(-alpha);
    SinrSample {
        sinr: signal / (params.mmw.noise_w + interference),
        band_used: BandKind::MmWave,
        los,
        channel_free: true,
        interference,
        interference_bs: 0.0,
    }
}

/// One microwave iteration: occupied-station marking, sensing, DT
/// thinning, and the omnidirectional SINR of the test link.
pub fn simulate_uw_iteration<R: Rng + ?Sized>(
    params: &SystemParams,
    realization: &NetworkRealization,
    derived: &DerivedParams,
    sensing: UwSensing,
    rng: &mut R,
) -> SinrSample {
    let c = params.uw.pathloss_constant();
    let alpha = params.uw.alpha_los;
    let rx = realization.test_rx;
    let tx = realization.test_tx;
    // Sensing compares received station power against tau; the printed
    // threshold-radius convention omits the free-space constant, so the
    // default sensing rule omits it too.
    let sense_c = if params.pathloss_constant_in_sensing {
        c
    } else {
        1.0
    };

    // Stations occupying the shared channel.
    let kd_bss: Vec<Point2D> = realization
        .bss
        .iter()
        .filter(|_| rng.gen_bool(derived.p_kd.clamp(0.0, 1.0)))
        .copied()
        .collect();

    let mut channel_free = true;
    let mut interference_bs = 0.0;
    match sensing {
        UwSensing::MeanRadiusDisk => {
            for bs in &kd_bss {
                let r = bs.distance(&rx);
                if r <= derived.d_tau_bar {
                    continue; // excluded by the threshold region
                }
                interference_bs += params.p_b * sample_rayleigh_gain(rng) * c * r.powf(-alpha);
            }
        }
        UwSensing::PerRealization => {
            let mut sensed = 0.0;
            for bs in &kd_bss {
                let r = bs.distance(&tx);
                if r == 0.0 {
                    continue;
                }
                sensed += params.p_b * sample_rayleigh_gain(rng) * sense_c * r.powf(-alpha);
            }
            channel_free = sensed < params.sensing_threshold;
            for bs in &kd_bss {
                let r = bs.distance(&rx);
                if r == 0.0 {
                    continue;
                }
                interference_bs += params.p_b * sample_rayleigh_gain(rng) * c * r.powf(-alpha);
            }
        }
    }

    let mut interference_dt = 0.0;
    for dt in &realization.dts {
        let keep = match sensing {
            UwSensing::MeanRadiusDisk => rng.gen_bool(derived.p_a.clamp(0.0, 1.0)),
            UwSensing::PerRealization => {
                let mut sensed = 0.0;
                for bs in &kd_bss {
                    let r = bs.distance(dt);
                    if r == 0.0 {
                        continue;
                    }
                    sensed += params.p_b * sample_rayleigh_gain(rng) * sense_c * r.powf(-alpha);
                }
                sensed < params.sensing_threshold
            }
        };
        if !keep {
            continue;
        }
        let r = dt.distance(&rx);
        if r == 0.0 {
            continue;
        }
        interference_dt += params.p_d * sample_rayleigh_gain(rng) * c * r.powf(-alpha);
    }

    let h0 = sample_rayleigh_gain(rng);
    let signal = params.p_d * h0 * c * params.d0.powf(-alpha); // G_e = 1
    let interference = interference_dt + interference_bs;
    let sinr = if channel_free {
        signal / (params.uw.noise_w + interference)
    } else {
        0.0
    };
    SinrSample {
        sinr,
        band_used: BandKind::MicroWave,
        los: false,
        channel_free,
        interference,
        interference_bs,
    }
}

fn realization_for<R: Rng + ?Sized>(
    params: &SystemParams,
    config: &SimConfig,
    rng: &mut R,
) -> Result<NetworkRealization> {
    // Base stations are sampled in every mode so the per-iteration
    // random streams line up across modes (common random numbers).
    let densities = FieldDensities {
        lambda_dt: params.lambda_dt,
        lambda_b: params.lambda_b,
        lambda_c: 0.0, // cell loads enter through p_kd, not per drop
    };
    match &config.los_model {
        LosModel::Bernoulli => {
            sample_realization(densities, None, params.d0, params.window_half_width, rng)
        }
        LosModel::Geometric(proc) => sample_realization(
            densities,
            Some(proc),
            params.d0,
            params.window_half_width,
            rng,
        ),
    }
}

/// Run one full iteration in the configured mode.
pub fn run_iteration(
    params: &SystemParams,
    config: &SimConfig,
    derived: &DerivedParams,
    mech: &MechanismParams,
    iteration: u64,
) -> Result<SinrSample> {
    let mut rng = ChaCha12Rng::seed_from_u64(config.root_seed);
    rng.set_stream(iteration + 1);
    let re = realization_for(params, config, &mut rng)?;
    let sample = match config.mode {
        SimMode::MmwOnly => simulate_mmw_iteration(params, &re, &mut rng),
        SimMode::UwOnly => simulate_uw_iteration(params, &re, derived, config.uw_sensing, &mut rng),
        SimMode::HybridOracle => {
            // The mmWave iteration draws the test link's LOS state; on a
            // blocked link the pair transmits on the microwave channel
            // instead, continuing the same random stream.
            let s = simulate_mmw_iteration(params, &re, &mut rng);
            if s.los {
                s
            } else {
                let mut u =
                    simulate_uw_iteration(params, &re, derived, config.uw_sensing, &mut rng);
                u.los = false;
                u
            }
        }
        SimMode::HybridMechanism => {
            let truth = re
                .blockages
                .is_los(&re.test_rx, &re.test_tx)
                .unwrap_or(false);
            let outcome = aoa::run_mechanism(&re, &re.test_tx, &re.test_rx, mech, &mut rng)?;
            match outcome.decision {
                BandDecision::MmWave { beam_angle } => {
                    let mut s = simulate_mmw_iteration(params, &re, &mut rng);
                    s.los = truth;
                    if !truth {
                        // Misdetected LOS: the blocked millimeter-wave
                        // attempt is an outage.
                        s.sinr = 0.0;
                    } else {
                        // Imperfect beam pointing costs mainlobe gain.
                        let err =
                            aoa::angular_distance(beam_angle, re.test_rx.bearing_to(&re.test_tx));
                        if err > params.antenna.beamwidth / 2.0 {
                            s.sinr *= params.antenna.sidelobe_gain / params.antenna.mainlobe_gain;
                        }
                    }
                    s
                }
                BandDecision::MicroWave => {
                    let mut s =
                        simulate_uw_iteration(params, &re, derived, config.uw_sensing, &mut rng);
                    s.los = truth;
                    s
                }
            }
        }
    };
    Ok(sample)
}

/// Run all iterations in parallel; the sample order is by iteration
/// index, independent of thread scheduling.
pub fn run(
    params: &SystemParams,
    config: &SimConfig,
    mech: &MechanismParams,
) -> Result<Vec<SinrSample>> {
    params.validate()?;
    let derived = DerivedParams::resolve(params, config.root_seed, config.pkd_cells);
    run_with_derived(params, config, mech, &derived)
}

/// [`run`] with the derived quantities already resolved (lets several
/// runs share one occupancy estimate).
pub fn run_with_derived(
    params: &SystemParams,
    config: &SimConfig,
    mech: &MechanismParams,
    derived: &DerivedParams,
) -> Result<Vec<SinrSample>> {
    (0..config.iterations as u64)
        .into_par_iter()
        .map(|i| run_iteration(params, config, derived, mech, i))
        .collect()
}

/// Wilson score half-width at 95% confidence.
pub fn wilson_halfwidth(successes: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let z = 1.959963984540054f64;
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    z / (1.0 + z2 / nf) * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt()
}

/// Does this sample count as covered at linear threshold `gamma`?
fn covered(sample: &SinrSample, gamma_mm: f64, gamma_uw: f64, mode: SimMode) -> bool {
    match (mode, sample.band_used) {
        (SimMode::MmwOnly, _) => sample.los && sample.sinr >= gamma_mm,
        (_, BandKind::MmWave) => sample.los && sample.sinr >= gamma_mm,
        (_, BandKind::MicroWave) => sample.channel_free && sample.sinr >= gamma_uw,
    }
}

/// Empirical SINR coverage curve over a dB grid from one sample set
/// (common random numbers across the grid).
pub fn coverage_curve(
    samples: &[SinrSample],
    grid_db: &[f64],
    mode: SimMode,
    busy: BusyHandling,
    label: &str,
) -> Result<CoverageCurve> {
    let denominator: usize = match busy {
        BusyHandling::Outage => samples.len(),
        BusyHandling::ConditionOnAccess => samples.iter().filter(|s| s.channel_free).count(),
    };
    let mut points = Vec::with_capacity(grid_db.len());
    for &x in grid_db {
        let gamma = 10f64.powf(x / 10.0);
        let hits = samples
            .iter()
            .filter(|s| {
                if matches!(busy, BusyHandling::ConditionOnAccess) && !s.channel_free {
                    return false;
                }
                covered(s, gamma, gamma, mode)
            })
            .count();
        let n = denominator.max(1);
        points.push(CurvePoint {
            x,
            value: hits as f64 / n as f64,
            ci_halfwidth: Some(wilson_halfwidth(hits, n)),
        });
    }
    CoverageCurve::new(
        Axis::SinrThresholdDb,
        Source::MonteCarlo,
        label,
        points,
        vec![],
    )
}

/// Empirical rate-coverage curve; thresholds are per-band.
pub fn rate_curve(
    samples: &[SinrSample],
    grid_bps: &[f64],
    params: &SystemParams,
    mode: SimMode,
    busy: BusyHandling,
    label: &str,
) -> Result<CoverageCurve> {
    let denominator: usize = match busy {
        BusyHandling::Outage => samples.len(),
        BusyHandling::ConditionOnAccess => samples.iter().filter(|s| s.channel_free).count(),
    };
    let mut points = Vec::with_capacity(grid_bps.len());
    for &t in grid_bps {
        let gamma_mm = (t / params.mmw.bandwidth_hz).exp2() - 1.0;
        let gamma_uw = (t / params.uw.bandwidth_hz).exp2() - 1.0;
        let hits = samples
            .iter()
            .filter(|s| {
                if matches!(busy, BusyHandling::ConditionOnAccess) && !s.channel_free {
                    return false;
                }
                covered(s, gamma_mm, gamma_uw, mode)
            })
            .count();
        let n = denominator.max(1);
        points.push(CurvePoint {
            x: t,
            value: hits as f64 / n as f64,
            ci_halfwidth: Some(wilson_halfwidth(hits, n)),
        });
    }
    CoverageCurve::new(Axis::RateBps, Source::MonteCarlo, label, points, vec![])
}

/// Sample mean of `exp(-s I)` over recorded interference values, with a
/// seeded-bootstrap confidence half-width.
pub fn empirical_laplace(interference: &[f64], s: f64, seed: u64) -> LaplaceEvaluation {
    let n = interference.len();
    assert!(n >= 2, "need samples for an empirical transform");
    let transform = |vals: &mut dyn Iterator<Item = f64>| -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for v in vals {
            sum += (-s * v).exp();
            count += 1;
        }
        sum / count as f64
    };
    let value = transform(&mut interference.iter().copied());
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let resamples = 200;
    let mut means = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut it = (0..n).map(|_| interference[rng.gen_range(0..n)]);
        means.push(transform(&mut it));
    }
    means.sort_by(f64::total_cmp);
    let lo = means[(resamples as f64 * 0.025) as usize];
    let hi = means[(resamples as f64 * 0.975) as usize - 1];
    LaplaceEvaluation {
        value,
        method: Method::Empirical,
        error: Some(0.5 * (hi - lo)),
    }
}

/// Fraction of samples whose channel was sensed free.
pub fn access_fraction(samples: &[SinrSample]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().filter(|s| s.channel_free).count() as f64 / samples.len() as f64
}

/// Convenience: empirical density of retained interferers for the
/// thinning cross-checks, per m^2.
pub fn thinned_dt_density<R: Rng + ?Sized>(
    params: &SystemParams,
    iterations: usize,
    rng: &mut R,
) -> Result<f64> {
    let mut kept = 0usize;
    for _ in 0..iterations {
        let pts = sample_ppp(params.lambda_dt, params.window_half_width, rng)?;
        for _ in &pts {
            if rng.gen_bool(params.q_a) {
                kept += 1;
            }
        }
    }
    let area = (2.0 * params.window_half_width).powi(2);
    Ok(kept as f64 / (iterations as f64 * area))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{coverage_mmw, MmwScenario};
    use crate::propagation::{db_to_linear, gain_distribution};

    fn base_config(mode: SimMode) -> (SystemParams, SimConfig, MechanismParams) {
        let params = SystemParams::figure_calibration();
        let config = SimConfig::new(3000, 0xBEEF, mode);
        let mech = MechanismParams::from_system(&params);
        (params, config, mech)
    }

    #[test]
    fn noise_limited_mmw_sinr_matches_hand_chain() {
        // No interferers, forced h0 = 1: SINR = P g_m^2 C d0^-2 / noise.
        let mut params = SystemParams::baseline();
        params.lambda_dt = 0.0;
        params.beta = 0.0;
        let re = NetworkRealization {
            dts: vec![],
            bss: vec![],
            cus: vec![],
            blockages: BlockageIndex::build(vec![], 100.0),
            window_half_width: 100.0,
            test_rx: Point2D::ORIGIN,
            test_tx: Point2D::new(50.0, 0.0),
        };
        // Average out fading instead of forcing it: mean(h0) = 1, so the
        // mean numerator matches the deterministic chain.
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let n = 200_000;
        let mean_sinr: f64 = (0..n)
            .map(|_| simulate_mmw_iteration(&params, &re, &mut rng).sinr)
            .sum::<f64>()
            / n as f64;
        assert!((mean_sinr - 0.7305).abs() < 0.01, "mean SINR {mean_sinr}");
    }

    #[test]
    fn noise_limited_uw_sinr_matches_hand_chain() {
        // Empty field: SINR = P_D h0 C d0^-4 / noise with mean h0 = 1.
        let mut params = SystemParams::baseline();
        params.lambda_dt = 0.0;
        params.lambda_b = 0.0;
        params.pkd_override = Some(0.0);
        let re = NetworkRealization {
            dts: vec![],
            bss: vec![],
            cus: vec![],
            blockages: BlockageIndex::build(vec![], 100.0),
            window_half_width: 100.0,
            test_rx: Point2D::ORIGIN,
            test_tx: Point2D::new(50.0, 0.0),
        };
        let derived = DerivedParams {
            p_kd: 0.0,
            p_a: 1.0,
            d_tau_bar: 1017.0,
        };
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let n = 200_000;
        let mean: f64 = (0..n)
            .map(|_| {
                simulate_uw_iteration(&params, &re, &derived, UwSensing::MeanRadiusDisk, &mut rng)
                    .sinr
            })
            .sum::<f64>()
            / n as f64;
        let expect =
            params.p_d * params.uw.pathloss_constant() * 50f64.powf(-4.0) / params.uw.noise_w;
        assert!(
            (mean - expect).abs() / expect < 0.01,
            "mean {mean:.4e} vs {expect:.4e}"
        );
    }

    #[test]
    fn interferer_gain_classes_hit_sectored_probabilities() {
        // Count realized gain products over many single-interferer draws.
        let params = SystemParams::baseline();
        let g = gain_distribution(&params.antenna);
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let boresight = 0.0f64;
        let mut counts = [0usize; 3];
        let n = 100_000;
        for _ in 0..n {
            let angle = rng.gen_range(0.0..TAU);
            let dt = Point2D::new(200.0 * angle.cos(), 200.0 * angle.sin());
            let g_rx = bearing_gain(&params.antenna, boresight, Point2D::ORIGIN.bearing_to(&dt));
            let phi = rng.gen_range(0.0..TAU);
            let g_tx = bearing_gain(&params.antenna, phi, dt.bearing_to(&Point2D::ORIGIN));
            let product = g_rx * g_tx;
            let class = g
                .gains
                .iter()
                .position(|&x| (x - product).abs() / x < 1e-9)
                .expect("product must be one of the three classes");
            counts[class] += 1;
        }
        for k in 0..3 {
            let freq = counts[k] as f64 / n as f64;
            assert!(
                (freq - g.probabilities[k]).abs() < 0.005,
                "class {k}: {freq} vs {}",
                g.probabilities[k]
            );
        }
    }

    #[test]
    fn mmw_empirical_coverage_tracks_quadrature() {
        let (params, mut config, mech) = base_config(SimMode::MmwOnly);
        config.iterations = 4000;
        let samples = run(&params, &config, &mech).unwrap();
        let grid = [-10.0, 0.0, 10.0];
        let curve = coverage_curve(
            &samples,
            &grid,
            SimMode::MmwOnly,
            BusyHandling::Outage,
            "mmw",
        )
        .unwrap();
        for p in &curve.points {
            let scen = MmwScenario::from_params(&params, db_to_linear(p.x));
            let analytic = coverage_mmw(&scen, false).unwrap();
            assert!(
                (p.value - analytic).abs() < 0.03,
                "gamma {} dB: {} vs {}",
                p.x,
                p.value,
                analytic
            );
        }
    }

    #[test]
    fn thinning_preserves_aloha_density() {
        let mut params = SystemParams::baseline();
        params.q_a = 0.5;
        params.window_half_width = 1000.0;
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let d = thinned_dt_density(&params, 1000, &mut rng).unwrap();
        let expect = params.q_a * params.lambda_dt;
        assert!(
            (d - expect).abs() / expect < 0.02,
            "density {d:.3e} vs {expect:.3e}"
        );
    }

    #[test]
    fn deterministic_across_thread_schedules() {
        let (params, config, mech) = base_config(SimMode::HybridOracle);
        let a = run(&params, &config, &mech).unwrap();
        let b = run(&params, &config, &mech).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.sinr.to_bits(), y.sinr.to_bits());
            assert_eq!(x.interference.to_bits(), y.interference.to_bits());
        }
    }

    #[test]
    fn hybrid_oracle_with_zero_beta_equals_mmw() {
        let (mut params, mut config, mech) = base_config(SimMode::HybridOracle);
        params.beta = 0.0;
        config.iterations = 2000;
        let hybrid = run(&params, &config, &mech).unwrap();
        assert!(hybrid.iter().all(|s| s.band_used == BandKind::MmWave));
        let mut config_mm = config.clone();
        config_mm.mode = SimMode::MmwOnly;
        let mm = run(&params, &config_mm, &mech).unwrap();
        // Same seeds, same draws: identical samples.
        for (a, b) in hybrid.iter().zip(mm.iter()) {
            assert_eq!(a.sinr.to_bits(), b.sinr.to_bits());
        }
    }

    #[test]
    fn empirical_laplace_trivials() {
        let zeros = vec![0.0; 2000];
        let l = empirical_laplace(&zeros, 3.0e10, 1);
        assert_eq!(l.value, 1.0);
        let vals: Vec<f64> = (0..2000).map(|i| (i % 7) as f64 * 1e-13).collect();
        let l0 = empirical_laplace(&vals, 0.0, 1);
        assert_eq!(l0.value, 1.0);
    }

    #[test]
    fn nlos_interference_flag_adds_blocked_terms() {
        // Saturating blockage: every interferer link is blocked, so the
        // default engine sees zero interference while the flag routes
        // the blocked terms through the NLOS exponent.
        let mut params = SystemParams::baseline();
        params.beta = 1.0;
        let re = NetworkRealization {
            dts: vec![
                Point2D::new(120.0, 40.0),
                Point2D::new(-80.0, 210.0),
                Point2D::new(30.0, -150.0),
            ],
            bss: vec![],
            cus: vec![],
            blockages: BlockageIndex::build(vec![], 500.0),
            window_half_width: 500.0,
            test_rx: Point2D::ORIGIN,
            test_tx: Point2D::new(50.0, 0.0),
        };
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let clean = simulate_mmw_iteration(&params, &re, &mut rng);
        assert_eq!(clean.interference, 0.0);
        params.mmw_nlos_interference = true;
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let noisy = simulate_mmw_iteration(&params, &re, &mut rng);
        assert!(noisy.interference > 0.0);
        // NLOS terms decay with the steeper exponent: bounded above by
        // the would-be LOS power at the nearest interferer.
        let bound = 3.0
            * params.p_d
            * params.antenna.mainlobe_gain.powi(2)
            * params.mmw.pathloss_constant()
            * 126.5f64.powf(-params.mmw.alpha_los);
        assert!(noisy.interference < bound * 20.0);
    }

    #[test]
    fn busy_handling_modes_bracket_coverage() {
        // Physical sensing with the consistent constant: some
        // iterations sense busy. Outage mode charges them; the
        // conditioned mode scores accessing iterations only.
        let (mut params, mut config, mech) = base_config(SimMode::UwOnly);
        params.pathloss_constant_in_sensing = true;
        params.lambda_b = 20e-6; // denser stations: busy often enough
        params.pkd_override = Some(0.9);
        params.window_half_width = 1000.0;
        config.iterations = 1500;
        config.uw_sensing = UwSensing::PerRealization;
        let samples = run(&params, &config, &mech).unwrap();
        let frac = access_fraction(&samples);
        assert!(frac < 0.999, "expected some busy iterations, got {frac}");
        let grid = [0.0];
        let outage =
            coverage_curve(&samples, &grid, SimMode::UwOnly, BusyHandling::Outage, "uw").unwrap();
        let cond = coverage_curve(
            &samples,
            &grid,
            SimMode::UwOnly,
            BusyHandling::ConditionOnAccess,
            "uw",
        )
        .unwrap();
        assert!(outage.points[0].value <= cond.points[0].value + 1e-12);
        // Outage coverage factors as access * conditional coverage.
        let expect = frac * cond.points[0].value;
        assert!((outage.points[0].value - expect).abs() < 1e-9);
    }

    #[test]
    fn wilson_halfwidth_sane() {
        assert!(wilson_halfwidth(0, 0) == 0.0);
        let w = wilson_halfwidth(5000, 10_000);
        assert!((w - 0.0098).abs() < 5e-4, "{w}");
        assert!(wilson_halfwidth(0, 10_000) < 5e-4);
    }
}
