//! Hybrid-band combination, rate coverage, and parameter sweeps.
//!
//! The hybrid SINR coverage weighs the two bands by the LOS odds of the
//! test link: `p_LOS(d0) p_mm|LOS + (1 - p_LOS(d0)) p_uW`, where the
//! millimeter-wave factor is the LOS-conditional coverage (its
//! unconditional form already contains `p_LOS(d0)`, which would double
//! count blockage here). Rate coverage is the SINR coverage evaluated
//! at the threshold `2^(T/B) - 1` of each band's bandwidth.

use crate::analysis::{coverage_mmw, coverage_uw_with_pkd, MmwScenario, UwScenario};
use crate::error::{CoreError, Result};
use crate::geometry::los_probability;
use std::fmt;

/// What the x axis of a curve measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    SinrThresholdDb,
    DistanceM,
    RateBps,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::SinrThresholdDb => write!(f, "sinr_threshold_db"),
            Axis::DistanceM => write!(f, "distance_m"),
            Axis::RateBps => write!(f, "rate_bps"),
        }
    }
}

/// Whether a curve came from the formulas or from sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Analytic,
    MonteCarlo,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Analytic => write!(f, "analytic"),
            Source::MonteCarlo => write!(f, "monte_carlo"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub x: f64,
    pub value: f64,
    /// Confidence half-width; only Monte Carlo curves carry one.
    pub ci_halfwidth: Option<f64>,
}

/// A sweep of (x, probability) points with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageCurve {
    pub axis: Axis,
    pub source: Source,
    /// Short mode label carried into the CSV (e.g. "hybrid").
    pub label: String,
    pub points: Vec<CurvePoint>,
    /// Grid points whose evaluation failed, with the reason.
    pub failures: Vec<(f64, String)>,
}

impl CoverageCurve {
    pub fn new(
        axis: Axis,
        source: Source,
        label: impl Into<String>,
        points: Vec<CurvePoint>,
        failures: Vec<(f64, String)>,
    ) -> Result<Self> {
        for w in points.windows(2) {
            if !(w[1].x > w[0].x) {
                return Err(CoreError::invalid(
                    "points",
                    "x must be strictly increasing",
                ));
            }
        }
        for p in &points {
            if !(0.0..=1.0).contains(&p.value) {
                return Err(CoreError::invalid(
                    "points",
                    format!("probability {} at x = {} outside [0, 1]", p.value, p.x),
                ));
            }
        }
        Ok(CoverageCurve {
            axis,
            source,
            label: label.into(),
            points,
            failures,
        })
    }

    /// CSV form: optional comment line with the manifest hash, a header
    /// row, then `x,value,ci_halfwidth,source,mode` rows.
    pub fn to_csv(&self, manifest_sha256: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(h) = manifest_sha256 {
            out.push_str(&format!("# manifest_sha256 = {h}\n"));
        }
        out.push_str("x,value,ci_halfwidth,source,mode\n");
        for p in &self.points {
            let ci = p
                .ci_halfwidth
                .map(|c| format!("{c:.9}"))
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{:.9},{},{},{}\n",
                p.x, p.value, ci, self.source, self.label
            ));
        }
        out
    }
}

/// Hybrid SINR coverage per the band-selection rule. Both scenarios
/// must describe the same test link.
pub fn coverage_hybrid(mmw: &MmwScenario, uw: &UwScenario, p_kd: f64) -> Result<f64> {
    if (mmw.d0 - uw.d0).abs() > 1e-9 {
        return Err(CoreError::ScenarioMismatch {
            name: "d0",
            a: mmw.d0,
            b: uw.d0,
        });
    }
    if (mmw.gamma - uw.gamma).abs() > 1e-12 * mmw.gamma.abs().max(1.0) {
        return Err(CoreError::ScenarioMismatch {
            name: "gamma",
            a: mmw.gamma,
            b: uw.gamma,
        });
    }
    let w = los_probability(mmw.d0, mmw.beta);
    let mm = coverage_mmw(mmw, true)?;
    let uwv = coverage_uw_with_pkd(uw, p_kd)?;
    Ok(w * mm + (1.0 - w) * uwv)
}

/// Which link the evaluator scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    /// Millimeter-wave only; a blocked link is an outage, so this is the
    /// unconditional coverage.
    MmwOnly,
    /// Microwave only.
    UwOnly,
    /// Band chosen by LOS state per the mechanism's ideal.
    Hybrid,
}

impl EvalMode {
    pub fn label(&self) -> &'static str {
        match self {
            EvalMode::MmwOnly => "mmw",
            EvalMode::UwOnly => "uw",
            EvalMode::Hybrid => "hybrid",
        }
    }
}

/// SINR coverage of one mode at one threshold.
pub fn coverage(mode: EvalMode, mmw: &MmwScenario, uw: &UwScenario, p_kd: f64) -> Result<f64> {
    match mode {
        EvalMode::MmwOnly => coverage_mmw(mmw, false),
        EvalMode::UwOnly => coverage_uw_with_pkd(uw, p_kd),
        EvalMode::Hybrid => coverage_hybrid(mmw, uw, p_kd),
    }
}

/// Rate coverage `P[B log2(1 + SINR) >= T]`, i.e. the SINR coverage at
/// `gamma = 2^(T/B) - 1` with each band's own bandwidth.
pub fn rate_coverage(
    mode: EvalMode,
    mmw: &MmwScenario,
    uw: &UwScenario,
    p_kd: f64,
    rate_bps: f64,
) -> Result<f64> {
    if rate_bps < 0.0 {
        return Err(CoreError::invalid("rate_bps", "must be nonnegative"));
    }
    let gamma_mm = (rate_bps / mmw.band.bandwidth_hz).exp2() - 1.0;
    let gamma_uw = (rate_bps / uw.band.bandwidth_hz).exp2() - 1.0;
    let mut mmw = *mmw;
    mmw.gamma = gamma_mm;
    let mut uw = *uw;
    uw.gamma = gamma_uw;
    match mode {
        EvalMode::MmwOnly => coverage_mmw(&mmw, false),
        EvalMode::UwOnly => coverage_uw_with_pkd(&uw, p_kd),
        EvalMode::Hybrid => {
            let w = los_probability(mmw.d0, mmw.beta);
            Ok(w * coverage_mmw(&mmw, true)? + (1.0 - w) * coverage_uw_with_pkd(&uw, p_kd)?)
        }
    }
}

/// Evaluate an analytic coverage curve over a grid. Failed points are
/// recorded on the curve instead of aborting the sweep.
pub fn sweep(
    mode: EvalMode,
    axis: Axis,
    grid: &[f64],
    mmw: &MmwScenario,
    uw: &UwScenario,
    p_kd: f64,
) -> Result<CoverageCurve> {
    if grid.is_empty() {
        return Err(CoreError::invalid("grid", "must be non-empty"));
    }
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(CoreError::invalid("grid", "must be strictly increasing"));
        }
    }
    let mut points = Vec::with_capacity(grid.len());
    let mut failures = Vec::new();
    for &x in grid {
        let result = match axis {
            Axis::SinrThresholdDb => {
                let gamma = 10f64.powf(x / 10.0);
                let mut m = *mmw;
                m.gamma = gamma;
                let mut u = *uw;
                u.gamma = gamma;
                coverage(mode, &m, &u, p_kd)
            }
            Axis::DistanceM => {
                let mut m = *mmw;
                m.d0 = x;
                let mut u = *uw;
                u.d0 = x;
                coverage(mode, &m, &u, p_kd)
            }
            Axis::RateBps => rate_coverage(mode, mmw, uw, p_kd, x),
        };
        match result {
            Ok(v) => points.push(CurvePoint {
                x,
                value: v,
                ci_halfwidth: None,
            }),
            Err(e) => failures.push((x, e.to_string())),
        }
    }
    CoverageCurve::new(axis, Source::Analytic, mode.label(), points, failures)
}
