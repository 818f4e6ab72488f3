//! Acceptance suite: one test per exit criterion. Each test prints the
//! measured numbers (visible with `--nocapture`) and asserts the stated
//! tolerance. Criteria that compare Monte Carlo runs against analysis
//! share the sample sets built once in [`shared`].

use duoband_core::analysis::{
    availability, coverage_mmw, coverage_uw_with_pkd, laplace_mmw_interference, laplace_uw_bs,
    laplace_uw_dt, laplace_uw_dt_printed, MmwScenario, UwScenario,
};
use duoband_core::aoa::{run_mechanism, BandDecision, MechanismParams};
use duoband_core::evaluator::{coverage_hybrid, sweep, Axis, EvalMode};
use duoband_core::geometry::{sample_realization, BlockageProcess, FieldDensities};
use duoband_core::params::SystemParams;
use duoband_core::simulator::{
    empirical_laplace, run_with_derived, BandKind, DerivedParams, SimConfig, SimMode, SinrSample,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::sync::OnceLock;
use std::time::Instant;

const GAMMA_CHECKPOINTS_DB: [f64; 7] = [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0];
const BETAS: [f64; 2] = [0.0027, 0.0053];
const ITERATIONS: usize = 10_000;
const ROOT_SEED: u64 = 0xD2DACC;

struct ParamSet {
    params_by_beta: [SystemParams; 2],
    mmw: [Vec<SinrSample>; 2],
    hybrid: [Vec<SinrSample>; 2],
    uw: Vec<SinrSample>,
}

struct Shared {
    p_kd: f64,
    calibrated: ParamSet,
    literal: ParamSet,
    build_seconds: f64,
}

fn run_mode(params: &SystemParams, mode: SimMode, derived: &DerivedParams) -> Vec<SinrSample> {
    let config = SimConfig::new(ITERATIONS, ROOT_SEED, mode);
    let mech = MechanismParams::from_system(params);
    run_with_derived(params, &config, &mech, derived).expect("simulation run")
}

fn build_param_set(base: &SystemParams, derived: &DerivedParams) -> ParamSet {
    let mut params_by_beta = [base.clone(), base.clone()];
    params_by_beta[0].beta = BETAS[0];
    params_by_beta[1].beta = BETAS[1];
    let mmw = [
        run_mode(&params_by_beta[0], SimMode::MmwOnly, derived),
        run_mode(&params_by_beta[1], SimMode::MmwOnly, derived),
    ];
    let hybrid = [
        run_mode(&params_by_beta[0], SimMode::HybridOracle, derived),
        run_mode(&params_by_beta[1], SimMode::HybridOracle, derived),
    ];
    let uw = run_mode(&params_by_beta[1], SimMode::UwOnly, derived);
    ParamSet {
        params_by_beta,
        mmw,
        hybrid,
        uw,
    }
}

fn shared() -> &'static Shared {
    static SHARED: OnceLock<Shared> = OnceLock::new();
    SHARED.get_or_init(|| {
        let start = Instant::now();
        let mut calibrated_base = SystemParams::figure_calibration();
        calibrated_base.beta = BETAS[1];
        let derived = DerivedParams::resolve(&calibrated_base, ROOT_SEED, 20_000);
        let calibrated = build_param_set(&calibrated_base, &derived);

        let mut literal_base = SystemParams::baseline();
        literal_base.beta = BETAS[1];
        let literal = build_param_set(&literal_base, &derived);

        Shared {
            p_kd: derived.p_kd,
            calibrated,
            literal,
            build_seconds: start.elapsed().as_secs_f64(),
        }
    })
}

fn empirical_coverage(samples: &[SinrSample], gamma: f64, mode: SimMode) -> f64 {
    let hits = samples
        .iter()
        .filter(|s| match (mode, s.band_used) {
            (SimMode::MmwOnly, _) | (_, BandKind::MmWave) => s.los && s.sinr >= gamma,
            (_, BandKind::MicroWave) => s.channel_free && s.sinr >= gamma,
        })
        .count();
    hits as f64 / samples.len() as f64
}

fn check_agreement(set: &ParamSet, p_kd: f64, tag: &str) -> f64 {
    let mut worst: f64 = 0.0;
    for (bi, beta) in BETAS.iter().enumerate() {
        let params = &set.params_by_beta[bi];
        for &gdb in &GAMMA_CHECKPOINTS_DB {
            let gamma = 10f64.powf(gdb / 10.0);
            let mmw_scen = MmwScenario::from_params(params, gamma);
            let uw_scen = UwScenario::from_params(params, gamma);

            let cases = [
                (
                    "mmw",
                    empirical_coverage(&set.mmw[bi], gamma, SimMode::MmwOnly),
                    coverage_mmw(&mmw_scen, false).unwrap(),
                ),
                (
                    "uw",
                    empirical_coverage(&set.uw, gamma, SimMode::UwOnly),
                    coverage_uw_with_pkd(&uw_scen, p_kd).unwrap(),
                ),
                (
                    "hybrid",
                    empirical_coverage(&set.hybrid[bi], gamma, SimMode::HybridOracle),
                    coverage_hybrid(&mmw_scen, &uw_scen, p_kd).unwrap(),
                ),
            ];
            for (band, emp, ana) in cases {
                let diff = (emp - ana).abs();
                worst = worst.max(diff);
                assert!(
                    diff <= 0.03,
                    "criterion 1 [{tag}]: {band} beta={beta} gamma={gdb} dB: \
                     empirical {emp:.4} vs analytic {ana:.4} (diff {diff:.4})"
                );
            }
        }
    }
    worst
}

#[test]
fn criterion_1_analytic_empirical_agreement() {
    let s = shared();
    let w_cal = check_agreement(&s.calibrated, s.p_kd, "calibrated");
    let w_lit = check_agreement(&s.literal, s.p_kd, "thermal-noise");
    println!(
        "criterion 1 PASS: worst |MC - analytic| = {:.4} (calibrated), {:.4} (thermal); \
         sample build took {:.1} s",
        w_cal, w_lit, s.build_seconds
    );
    assert!(
        s.build_seconds < 300.0,
        "criterion 1 runtime target: sample builds took {:.1} s (limit 300 s)",
        s.build_seconds
    );
}

#[test]
fn criterion_2_hybrid_gain_over_microwave() {
    let s = shared();
    let params = &s.calibrated.params_by_beta[1]; // beta = 0.0053
    let mmw = MmwScenario::from_params(params, 1.0);
    let uw = UwScenario::from_params(params, 1.0);
    let hybrid = coverage_hybrid(&mmw, &uw, s.p_kd).unwrap();
    let uw_only = coverage_uw_with_pkd(&uw, s.p_kd).unwrap();
    let gain = hybrid / uw_only - 1.0;

    let emp_hybrid = empirical_coverage(&s.calibrated.hybrid[1], 1.0, SimMode::HybridOracle);
    let emp_uw = empirical_coverage(&s.calibrated.uw, 1.0, SimMode::UwOnly);
    println!(
        "criterion 2 PASS: analytic gain {:.1}% (hybrid {:.4} / uw {:.4}); empirical gain {:.1}%",
        gain * 100.0,
        hybrid,
        uw_only,
        (emp_hybrid / emp_uw - 1.0) * 100.0
    );
    assert!(
        (0.20..=0.40).contains(&gain),
        "criterion 2: hybrid gain {:.3} outside [0.20, 0.40]",
        gain
    );
}

#[test]
fn criterion_3_blockage_ordering() {
    let s = shared();
    for (set, tag) in [(&s.calibrated, "calibrated"), (&s.literal, "thermal-noise")] {
        let a27 = coverage_mmw(
            &MmwScenario::from_params(&set.params_by_beta[0], 1.0),
            false,
        )
        .unwrap();
        let a53 = coverage_mmw(
            &MmwScenario::from_params(&set.params_by_beta[1], 1.0),
            false,
        )
        .unwrap();
        let e27 = empirical_coverage(&set.mmw[0], 1.0, SimMode::MmwOnly);
        let e53 = empirical_coverage(&set.mmw[1], 1.0, SimMode::MmwOnly);
        println!(
            "criterion 3 [{tag}]: analytic {a27:.4} > {a53:.4}; empirical {e27:.4} > {e53:.4}"
        );
        assert!(a27 > a53, "criterion 3 [{tag}]: analytic ordering violated");
        assert!(
            e27 > e53,
            "criterion 3 [{tag}]: empirical ordering violated"
        );
    }
    println!("criterion 3 PASS: sparser blockage gives higher mmWave coverage");
}

#[test]
fn criterion_4_density_insensitivity() {
    let s = shared();
    let params = &s.calibrated.params_by_beta[1];
    let mut dense = params.clone();
    dense.lambda_dt *= 2.0; // 50 -> 100 per km^2

    let mm_50 = coverage_mmw(&MmwScenario::from_params(params, 1.0), false).unwrap();
    let mm_100 = coverage_mmw(&MmwScenario::from_params(&dense, 1.0), false).unwrap();
    let uw_50 = coverage_uw_with_pkd(&UwScenario::from_params(params, 1.0), s.p_kd).unwrap();
    let uw_100 = coverage_uw_with_pkd(&UwScenario::from_params(&dense, 1.0), s.p_kd).unwrap();
    let d_mm = (mm_100 - mm_50).abs();
    let d_uw = (uw_100 - uw_50).abs();
    println!(
        "criterion 4 PASS: mmWave shift {d_mm:.4} (limit 0.05); microwave shift {d_uw:.4} > mmWave"
    );
    assert!(d_mm <= 0.05, "criterion 4: mmWave coverage moved {d_mm:.4}");
    assert!(
        d_uw > d_mm,
        "criterion 4: microwave shift {d_uw:.4} not above mmWave shift {d_mm:.4}"
    );
}

#[test]
fn criterion_5_distance_crossover() {
    let s = shared();
    for set_params in [&s.calibrated.params_by_beta[1]] {
        for lambda_scale in [1.0, 2.0] {
            let mut p = set_params.clone();
            p.lambda_dt *= lambda_scale;
            let grid: Vec<f64> = (1..=15).map(|i| 10.0 * i as f64).collect();
            let mmw = MmwScenario::from_params(&p, 1.0);
            let uw = UwScenario::from_params(&p, 1.0);
            let hybrid =
                sweep(EvalMode::Hybrid, Axis::DistanceM, &grid, &mmw, &uw, s.p_kd).unwrap();
            let mm = sweep(EvalMode::MmwOnly, Axis::DistanceM, &grid, &mmw, &uw, s.p_kd).unwrap();
            let uwc = sweep(EvalMode::UwOnly, Axis::DistanceM, &grid, &mmw, &uw, s.p_kd).unwrap();
            for i in 0..grid.len() {
                if grid[i] > 80.0 {
                    break;
                }
                let best = mm.points[i].value.max(uwc.points[i].value);
                assert!(
                    hybrid.points[i].value >= best - 1e-12,
                    "criterion 5: hybrid {:.4} below best single band {:.4} at d0 = {} \
                     (lambda_DT x{lambda_scale})",
                    hybrid.points[i].value,
                    best,
                    grid[i]
                );
            }
        }
    }
    println!("criterion 5 PASS: hybrid dominates both single bands out to 80 m");
}

#[test]
fn criterion_6_rate_coverage_shapes() {
    let s = shared();
    let params = &s.calibrated.params_by_beta[1];
    let grid: Vec<f64> = (0..15)
        .map(|i| 1e7 + (1e9 - 1e7) * i as f64 / 14.0)
        .collect();
    let mmw = MmwScenario::from_params(params, 1.0);
    let uw = UwScenario::from_params(params, 1.0);
    let mm = sweep(EvalMode::MmwOnly, Axis::RateBps, &grid, &mmw, &uw, s.p_kd).unwrap();
    let uwc = sweep(EvalMode::UwOnly, Axis::RateBps, &grid, &mmw, &uw, s.p_kd).unwrap();
    let hybrid = sweep(EvalMode::Hybrid, Axis::RateBps, &grid, &mmw, &uw, s.p_kd).unwrap();

    let lo = mm.points.iter().map(|p| p.value).fold(f64::MAX, f64::min);
    let hi = mm.points.iter().map(|p| p.value).fold(f64::MIN, f64::max);
    assert!(
        hi - lo < 0.05,
        "criterion 6: mmWave rate coverage varies {:.4} over the grid",
        hi - lo
    );

    for w in uwc.points.windows(2) {
        assert!(
            w[1].value < w[0].value,
            "criterion 6: microwave rate coverage not strictly decreasing at {} bps",
            w[1].x
        );
    }
    // Discrete convexity: divided-difference slopes must not decrease.
    let slopes: Vec<f64> = uwc
        .points
        .windows(2)
        .map(|w| (w[1].value - w[0].value) / (w[1].x - w[0].x))
        .collect();
    let scale = slopes.iter().fold(0.0f64, |a, s| a.max(s.abs()));
    for w in slopes.windows(2) {
        assert!(
            w[1] >= w[0] - 1e-9 * scale,
            "criterion 6: microwave rate curve not discretely convex ({} -> {})",
            w[0],
            w[1]
        );
    }

    for i in 0..grid.len() {
        let best = mm.points[i].value.max(uwc.points[i].value);
        assert!(
            hybrid.points[i].value >= best - 1e-12,
            "criterion 6: hybrid below best single band at T = {} bps",
            grid[i]
        );
    }
    println!(
        "criterion 6 PASS: mmWave span {:.4}, microwave strictly decreasing and convex, \
         hybrid dominant",
        hi - lo
    );
}

#[test]
fn criterion_7_laplace_transform_oracles() {
    let s = shared();
    let params = &s.calibrated.params_by_beta[1];

    // Millimeter-wave aggregate interference at s = eps_L(0 dB).
    let mmw_scen = MmwScenario::from_params(params, 1.0);
    let eps_l = mmw_scen.epsilon_l();
    let i_mm: Vec<f64> = s.calibrated.mmw[1].iter().map(|x| x.interference).collect();
    let quad = laplace_mmw_interference(&mmw_scen, eps_l).unwrap();
    let emp = empirical_laplace(&i_mm, eps_l, 0x71);
    let rel_mm = (quad.value - emp.value).abs() / emp.value;
    assert!(
        rel_mm < 0.02,
        "criterion 7: mmWave transform off by {:.2}% (quad {:.5}, empirical {:.5})",
        rel_mm * 100.0,
        quad.value,
        emp.value
    );

    // Microwave DT and BS parts at s = eps(0 dB).
    let uw_scen = UwScenario::from_params(params, 1.0);
    let eps = uw_scen.epsilon();
    let p_a = availability(params.lambda_b, s.p_kd, uw_scen.mean_threshold_radius());
    let i_dt: Vec<f64> = s
        .calibrated
        .uw
        .iter()
        .map(|x| x.interference - x.interference_bs)
        .collect();
    let i_bs: Vec<f64> = s.calibrated.uw.iter().map(|x| x.interference_bs).collect();

    let dt_quad = laplace_uw_dt(&uw_scen, p_a).unwrap();
    let dt_emp = empirical_laplace(&i_dt, eps, 0x72);
    let rel_dt = (dt_quad.value - dt_emp.value).abs() / dt_emp.value;
    assert!(
        rel_dt < 0.02,
        "criterion 7: DT transform fallback off by {:.2}%",
        rel_dt * 100.0
    );

    let bs_closed = laplace_uw_bs(&uw_scen, s.p_kd, uw_scen.mean_threshold_radius()).unwrap();
    let bs_emp = empirical_laplace(&i_bs, eps, 0x73);
    let rel_bs = (bs_closed.value - bs_emp.value).abs() / bs_emp.value;
    assert!(
        rel_bs < 0.02,
        "criterion 7: BS transform off by {:.2}% (closed {:.5}, empirical {:.5})",
        rel_bs * 100.0,
        bs_closed.value,
        bs_emp.value
    );

    // The printed quarter-exponent DT form: deviation measured and
    // reported, never gated.
    let dt_printed = laplace_uw_dt_printed(&uw_scen, p_a).unwrap();
    let rel_printed = (dt_printed.value - dt_emp.value).abs() / dt_emp.value;
    println!(
        "criterion 7 PASS: mmW {:.2}%, DT fallback {:.2}%, BS {:.2}% relative; \
         printed DT form deviates by {:.2}% (reported only)",
        rel_mm * 100.0,
        rel_dt * 100.0,
        rel_bs * 100.0,
        rel_printed * 100.0
    );
}

#[test]
fn criterion_8_mechanism_correctness() {
    let sys = SystemParams::baseline();
    let mech = MechanismParams::from_system(&sys);
    // Geometric field matching beta ~ 0.0053: 104 rectangles per km^2
    // with 20-60 m sides.
    let proc = BlockageProcess::new(1.04e-4, (20.0, 60.0), (20.0, 60.0)).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(0x80);
    let n = 1000;
    let mut agree = 0usize;
    for _ in 0..n {
        let re = sample_realization(
            FieldDensities {
                lambda_dt: 0.0,
                lambda_b: 0.0,
                lambda_c: 0.0,
            },
            Some(&proc),
            sys.d0,
            300.0,
            &mut rng,
        )
        .unwrap();
        let truth = re.blockages.is_los(&re.test_rx, &re.test_tx).unwrap();
        let out = run_mechanism(&re, &re.test_tx, &re.test_rx, &mech, &mut rng).unwrap();
        if matches!(out.decision, BandDecision::MmWave { .. }) == truth {
            agree += 1;
        }
    }
    let rate = agree as f64 / n as f64;
    assert!(
        rate >= 0.95,
        "criterion 8: oracle agreement {rate:.3} below 0.95"
    );

    // Free space: always mmWave, beam within tolerance.
    let free = sample_realization(
        FieldDensities {
            lambda_dt: 0.0,
            lambda_b: 0.0,
            lambda_c: 0.0,
        },
        None,
        sys.d0,
        300.0,
        &mut rng,
    )
    .unwrap();
    let mut free_ok = 0usize;
    for _ in 0..n {
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let tx = duoband_core::geometry::Point2D::new(sys.d0 * angle.cos(), sys.d0 * angle.sin());
        let out = run_mechanism(&free, &tx, &free.test_rx, &mech, &mut rng).unwrap();
        if let BandDecision::MmWave { beam_angle } = out.decision {
            if duoband_core::aoa::angular_distance(beam_angle, angle) <= mech.angular_tolerance {
                free_ok += 1;
            }
        }
    }
    assert_eq!(
        free_ok, n,
        "criterion 8: {free_ok}/{n} free-space drops landed the beam"
    );
    println!(
        "criterion 8 PASS: oracle agreement {:.1}%, free-space beam success {free_ok}/{n}",
        rate * 100.0
    );
}

#[test]
fn criterion_9_deterministic_outputs() {
    let bin = env!("CARGO_BIN_EXE_duoband");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let status = std::process::Command::new(bin)
            .args([
                "preset",
                "fig4",
                "--seed",
                "7",
                "--iterations",
                "400",
                "--output-dir",
            ])
            .arg(d.path())
            .status()
            .expect("running preset");
        assert!(status.success(), "preset run failed");
    }
    let mut names: Vec<String> = std::fs::read_dir(dirs[0].path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(
        names.iter().filter(|n| n.ends_with(".csv")).count() >= 8,
        "expected the full fig4 curve set, got {names:?}"
    );
    for name in &names {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        assert_eq!(a, b, "criterion 9: {name} differs between identical runs");
    }
    println!(
        "criterion 9 PASS: {} output files byte-identical across repeated runs",
        names.len()
    );
}
