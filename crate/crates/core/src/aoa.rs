//! The distributed link-detection and band-selection mechanism.
//!
//! Peers exchange microwave discovery beacons and build angle-of-arrival
//! spectra: one peak per propagation path (the direct segment when it is
//! unobstructed, plus first-order specular reflections off blockage
//! faces). A sliding window of `W` spectra taken under small receiver
//! motion is intersected into the *combined* spectrum: only angle
//! clusters represented in every window member survive, with the mean
//! magnitude and circular-mean angle. A single surviving peak means the
//! direct path exists, so the pair picks the millimeter-wave band and
//! points its beam at that peak; zero or several peaks mean no reliable
//! LOS and the pair falls back to the microwave band.
//!
//! Why the intersection works: the direct path's arrival angle is set by
//! geometry alone and barely moves when the receiver shifts a few
//! decimeters. A reflected path is a coherent sum whose phase rolls over
//! every half wavelength of path-length change, so sub-meter motion
//! decorrelates it completely and its apparent peak does not repeat
//! between observations. The synthesis models that by scattering each
//! reflected peak's angle per round once the motion scale passes a
//! beacon wavelength ([`MechanismParams::reflection_angle_jitter`]); the
//! one-shot geometric spectrum ([`compute_aoa_spectrum`]) stays
//! deterministic.

use crate::error::{CoreError, Result};
use crate::geometry::{BlockageIndex, NetworkRealization, Point2D};
use crate::params::SystemParams;
use crate::propagation::SPEED_OF_LIGHT;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use std::collections::VecDeque;
use std::f64::consts::TAU;
use std::fmt::Write as _;

/// One peak of an angle-of-arrival spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoAPeak {
    /// Received power, watts.
    pub magnitude: f64,
    /// Angle of incidence at the receiver, radians in [0, 2pi).
    pub angle: f64,
}

/// A set of peaks, sorted by angle, pairwise separated by at least the
/// synthesis resolution.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AoASpectrum {
    pub peaks: Vec<AoAPeak>,
}

impl AoASpectrum {
    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }
}

/// Sliding window of the most recent spectra for one peer.
#[derive(Debug, Clone)]
pub struct PeerProfile {
    window: usize,
    spectra: VecDeque<AoASpectrum>,
}

impl PeerProfile {
    pub fn new(window: usize) -> Self {
        assert!(window >= 1, "window must hold at least one spectrum");
        PeerProfile {
            window,
            spectra: VecDeque::with_capacity(window),
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn len(&self) -> usize {
        self.spectra.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spectra.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.spectra.len() == self.window
    }

    pub fn spectra(&self) -> impl Iterator<Item = &AoASpectrum> {
        self.spectra.iter()
    }
}

/// Band choice emitted by the mechanism.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandDecision {
    /// LOS detected; steer the beam to this angle (radians).
    MmWave {
        beam_angle: f64,
    },
    MicroWave,
}

/// Decision plus the combined spectrum it was made from.
#[derive(Debug, Clone)]
pub struct MechanismOutcome {
    pub decision: BandDecision,
    pub combined: AoASpectrum,
}

/// Tunables of the mechanism and of the beacon-spectrum synthesis.
#[derive(Debug, Clone, Copy)]
pub struct MechanismParams {
    /// Window size W.
    pub window: usize,
    /// Cluster tolerance for the combined spectrum, radians.
    pub angular_tolerance: f64,
    /// Receiver positional jitter per observation round, meters.
    pub jitter_sigma: f64,
    /// Power loss of one specular bounce, linear factor.
    pub reflection_loss: f64,
    /// Peaks below this received power are dropped, watts.
    pub peak_floor: f64,
    /// Peaks closer than this merge at synthesis, radians.
    pub angular_resolution: f64,
    /// Beacon transmit power, watts.
    pub p_d: f64,
    /// Beacon path-loss constant (microwave carrier).
    pub beacon_c: f64,
    /// Beacon path-loss exponent.
    pub beacon_alpha: f64,
    /// Per-round angular scattering of reflected peaks, radians;
    /// represents phase decoherence of non-direct paths under motion.
    pub reflection_angle_jitter: f64,
}

impl MechanismParams {
    /// Defaults: W = 2, 2 degree tolerance, 0.3 m jitter, -10 dB
    /// reflection loss, -120 dBm floor, beacons on the system's
    /// microwave band. The reflected-peak scattering scale is
    /// `2 pi * jitter / beacon wavelength`: past one wavelength of
    /// motion a bounce path is fully decorrelated.
    pub fn from_system(p: &SystemParams) -> Self {
        let jitter_sigma = 0.3;
        let wavelength = SPEED_OF_LIGHT / p.uw.carrier_hz;
        MechanismParams {
            window: 2,
            angular_tolerance: 2f64.to_radians(),
            jitter_sigma,
            reflection_loss: 0.1,
            peak_floor: 1e-15, // -120 dBm
            angular_resolution: 0.5f64.to_radians(),
            p_d: p.p_d,
            beacon_c: p.uw.pathloss_constant(),
            beacon_alpha: p.uw.alpha_los,
            reflection_angle_jitter: TAU * jitter_sigma / wavelength,
        }
    }

    /// Longest bounce path that still clears the peak floor; bounds the
    /// reflector search radius.
    fn max_bounce_path(&self) -> f64 {
        (self.p_d * self.beacon_c * self.reflection_loss / self.peak_floor)
            .powf(1.0 / self.beacon_alpha)
    }
}

/// Normalize an angle into [0, 2pi).
fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r == TAU {
        0.0
    } else {
        r
    }
}

/// Circular mean of a set of angles.
fn circular_mean(angles: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for a in angles {
        s += a.sin();
        c += a.cos();
    }
    wrap_angle(s.atan2(c))
}

/// Smallest angular distance between two angles.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

struct RawPeak {
    magnitude: f64,
    angle: f64,
    direct: bool,
}

/// Mirror `p` across the infinite line through `(a, b)`.
fn mirror_across(p: &Point2D, a: &Point2D, b: &Point2D) -> Point2D {
    let ex = b.x - a.x;
    let ey = b.y - a.y;
    let len2 = ex * ex + ey * ey;
    let t = ((p.x - a.x) * ex + (p.y - a.y) * ey) / len2;
    let fx = a.x + t * ex;
    let fy = a.y + t * ey;
    Point2D::new(2.0 * fx - p.x, 2.0 * fy - p.y)
}

/// Signed side of `p` relative to the directed line `a -> b`.
fn side_of(p: &Point2D, a: &Point2D, b: &Point2D) -> f64 {
    (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)
}

/// Specular bounce point of tx -> face -> rx and the total path length,
/// if the bounce is geometrically feasible off this face.
///
/// `body_side` is the sign of the rectangle body relative to the face
/// line; both endpoints must sit strictly on the opposite (outer) side,
/// otherwise the mirror path would run through the reflector itself.
fn reflection_point(
    tx: &Point2D,
    rx: &Point2D,
    face: &(Point2D, Point2D),
    body_side: f64,
) -> Option<(Point2D, f64)> {
    let (a, b) = face;
    let s_tx = side_of(tx, a, b);
    let s_rx = side_of(rx, a, b);
    if s_tx * body_side >= 0.0 || s_rx * body_side >= 0.0 {
        return None;
    }
    let image = mirror_across(tx, a, b);
    // Intersection of rx -> image with the face segment.
    let dx = image.x - rx.x;
    let dy = image.y - rx.y;
    let ex = b.x - a.x;
    let ey = b.y - a.y;
    let denom = dx * ey - dy * ex;
    if denom.abs() < 1e-12 {
        return None;
    }
    let s = ((a.x - rx.x) * ey - (a.y - rx.y) * ex) / denom; // along rx -> image
    let t = ((a.x - rx.x) * dy - (a.y - rx.y) * dx) / denom; // along face
    if !(s > 0.0 && s < 1.0 && t > 1e-9 && t < 1.0 - 1e-9) {
        return None;
    }
    let p = Point2D::new(a.x + t * ex, a.y + t * ey);
    let total_len = rx.distance(&image);
    Some((p, total_len))
}

fn raw_peaks(
    index: &BlockageIndex,
    tx: &Point2D,
    rx: &Point2D,
    params: &MechanismParams,
) -> Result<Vec<RawPeak>> {
    if tx == rx {
        return Err(CoreError::invalid(
            "tx",
            "transmitter and receiver coincide",
        ));
    }
    let mut peaks = Vec::new();

    // Direct path. The LOS query also rejects covered endpoints.
    if index.is_los(tx, rx)? {
        let d = tx.distance(rx);
        let mag = params.p_d * params.beacon_c * d.powf(-params.beacon_alpha);
        if mag >= params.peak_floor {
            peaks.push(RawPeak {
                magnitude: mag,
                angle: rx.bearing_to(tx),
                direct: true,
            });
        }
    }

    // First-order specular bounces off nearby blockage faces.
    let reach = params.max_bounce_path();
    for (rect_id, rect) in index.rects_within(rx, reach) {
        for face in rect.faces() {
            let body_side = side_of(&rect.center, &face.0, &face.1);
            let Some((p, total_len)) = reflection_point(tx, rx, &face, body_side) else {
                continue;
            };
            if total_len > reach {
                continue;
            }
            let mag = params.p_d
                * params.beacon_c
                * total_len.powf(-params.beacon_alpha)
                * params.reflection_loss;
            if mag < params.peak_floor {
                continue;
            }
            // Both legs must clear every other rectangle. The legs stay
            // on the outer side of the reflecting face, so the reflector
            // itself can only graze them and is skipped. A bounce point
            // buried inside some other rectangle is just an infeasible
            // path, not an invalid drop.
            let clear = |a: &Point2D, b: &Point2D| match index.is_los_skipping(a, b, rect_id) {
                Ok(v) => Ok(v),
                Err(CoreError::EndpointCovered { .. }) => Ok(false),
                Err(e) => Err(e),
            };
            if !clear(rx, &p)? || !clear(&p, tx)? {
                continue;
            }
            peaks.push(RawPeak {
                magnitude: mag,
                angle: rx.bearing_to(&p),
                direct: false,
            });
        }
    }
    Ok(peaks)
}

/// Merge raw path peaks into a spectrum: co-resolution arrivals add in
/// power at the stronger arrival's angle; the result is sorted.
fn assemble(mut raw: Vec<RawPeak>, resolution: f64) -> AoASpectrum {
    raw.sort_by(|a, b| a.angle.total_cmp(&b.angle));
    let mut peaks: Vec<AoAPeak> = Vec::with_capacity(raw.len());
    for r in raw {
        match peaks.last_mut() {
            Some(last) if angular_distance(last.angle, r.angle) <= resolution => {
                if r.magnitude > last.magnitude {
                    last.angle = r.angle;
                }
                last.magnitude += r.magnitude;
            }
            _ => peaks.push(AoAPeak {
                magnitude: r.magnitude,
                angle: r.angle,
            }),
        }
    }
    AoASpectrum { peaks }
}

/// Geometric beacon spectrum at `rx` for signals from `tx`: the direct
/// peak when the segment is clear, plus one peak per feasible
/// first-order bounce with both legs clear, all above the peak floor.
pub fn compute_aoa_spectrum(
    realization: &NetworkRealization,
    tx: &Point2D,
    rx: &Point2D,
    params: &MechanismParams,
) -> Result<AoASpectrum> {
    let raw = raw_peaks(&realization.blockages, tx, rx, params)?;
    Ok(assemble(raw, params.angular_resolution))
}

/// Append a spectrum, evicting the oldest once the window is full.
pub fn push_observation(profile: &mut PeerProfile, spectrum: AoASpectrum) {
    if profile.spectra.len() == profile.window {
        profile.spectra.pop_front();
    }
    profile.spectra.push_back(spectrum);
}

/// Intersect a full window into the combined spectrum: one output peak
/// per angle cluster represented in every window member, at the mean
/// magnitude and circular-mean angle.
pub fn combine_profile(profile: &PeerProfile, angular_tolerance: f64) -> Result<AoASpectrum> {
    if !profile.is_full() {
        return Err(CoreError::ProfileNotFull {
            have: profile.spectra.len(),
            want: profile.window,
        });
    }
    let w = profile.window;
    if w == 1 {
        return Ok(profile.spectra[0].clone());
    }

    // Tag every peak with its window index, then unwrap the circle at
    // its widest empty gap so clusters never straddle the seam.
    let mut tagged: Vec<(f64, f64, usize)> = Vec::new();
    for (j, sp) in profile.spectra.iter().enumerate() {
        for p in &sp.peaks {
            tagged.push((wrap_angle(p.angle), p.magnitude, j));
        }
    }
    if tagged.is_empty() {
        return Ok(AoASpectrum::default());
    }
    tagged.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = tagged.len();
    let mut cut = 0usize;
    let mut widest = -1.0f64;
    for i in 0..n {
        let next = (i + 1) % n;
        let gap = if next == 0 {
            tagged[next].0 + TAU - tagged[i].0
        } else {
            tagged[next].0 - tagged[i].0
        };
        if gap > widest {
            widest = gap;
            cut = next;
        }
    }
    let mut unwrapped: Vec<(f64, f64, usize)> = Vec::with_capacity(n);
    for k in 0..n {
        let idx = (cut + k) % n;
        let (a, m, j) = tagged[idx];
        let a = if cut + k >= n { a + TAU } else { a };
        unwrapped.push((a, m, j));
    }

    // Greedy gap clustering, then recursive largest-gap splitting of
    // any cluster wider than the tolerance. Both steps depend only on
    // the peak multiset, so the window order cannot matter.
    let mut clusters: Vec<Vec<(f64, f64, usize)>> = Vec::new();
    let mut current = vec![unwrapped[0]];
    for &item in &unwrapped[1..] {
        if item.0 - current.last().unwrap().0 <= angular_tolerance {
            current.push(item);
        } else {
            clusters.push(std::mem::take(&mut current));
            current = vec![item];
        }
    }
    clusters.push(current);

    let mut final_clusters: Vec<Vec<(f64, f64, usize)>> = Vec::new();
    let mut stack = clusters;
    while let Some(c) = stack.pop() {
        let spread = c.last().unwrap().0 - c[0].0;
        if spread <= angular_tolerance || c.len() == 1 {
            final_clusters.push(c);
            continue;
        }
        let split = (1..c.len())
            .max_by(|&i, &j| (c[i].0 - c[i - 1].0).total_cmp(&(c[j].0 - c[j - 1].0)))
            .unwrap();
        let (lo, hi) = c.split_at(split);
        stack.push(lo.to_vec());
        stack.push(hi.to_vec());
    }

    let mut peaks = Vec::new();
    for c in final_clusters {
        let mut seen = vec![false; w];
        for &(_, _, j) in &c {
            seen[j] = true;
        }
        if !seen.iter().all(|&s| s) {
            continue;
        }
        let magnitude = c.iter().map(|&(_, m, _)| m).sum::<f64>() / w as f64;
        let angle = circular_mean(c.iter().map(|&(a, _, _)| a));
        peaks.push(AoAPeak { magnitude, angle });
    }
    peaks.sort_by(|a, b| a.angle.total_cmp(&b.angle));
    Ok(AoASpectrum { peaks })
}

/// Band decision from a combined spectrum: exactly one surviving peak
/// selects the millimeter-wave band with that peak's angle as the beam
/// direction; anything else selects the microwave band.
pub fn decide_band(combined: &AoASpectrum) -> BandDecision {
    if combined.len() == 1 {
        BandDecision::MmWave {
            beam_angle: combined.peaks[0].angle,
        }
    } else {
        BandDecision::MicroWave
    }
}

/// Run the whole mechanism for one link: W observation rounds with the
/// receiver jittered per round, reflected peaks scattered by phase
/// decoherence, then combine and decide.
pub fn run_mechanism<R: Rng + ?Sized>(
    realization: &NetworkRealization,
    tx: &Point2D,
    rx: &Point2D,
    params: &MechanismParams,
    rng: &mut R,
) -> Result<MechanismOutcome> {
    let jitter = Normal::new(0.0, params.jitter_sigma.max(f64::MIN_POSITIVE)).unwrap();
    let speckle = Normal::new(0.0, params.reflection_angle_jitter.max(f64::MIN_POSITIVE)).unwrap();
    let mut profile = PeerProfile::new(params.window);
    for _ in 0..params.window {
        // A person shifts in place but does not step inside a wall:
        // retry jitter draws that land the receiver in a blockage.
        let mut raw = None;
        let mut last_err = None;
        for _ in 0..16 {
            let rx_round = Point2D::new(rx.x + jitter.sample(rng), rx.y + jitter.sample(rng));
            match raw_peaks(&realization.blockages, tx, &rx_round, params) {
                Ok(r) => {
                    raw = Some(r);
                    break;
                }
                Err(e @ CoreError::EndpointCovered { .. }) => last_err = Some(e),
                Err(e) => return Err(e),
            }
        }
        let mut raw = match raw {
            Some(r) => r,
            None => return Err(last_err.expect("retries imply an error")),
        };
        for p in raw.iter_mut() {
            if !p.direct {
                p.angle = wrap_angle(p.angle + speckle.sample(rng));
            }
        }
        push_observation(&mut profile, assemble(raw, params.angular_resolution));
    }
    let combined = combine_profile(&profile, params.angular_tolerance)?;
    let decision = decide_band(&combined);
    Ok(MechanismOutcome { decision, combined })
}

/// Dump a profile and its combined spectrum as diagnostic CSV rows
/// `angle_deg,magnitude_dbm,round_index`; the combined spectrum rows use
/// round index -1.
pub fn profile_csv(profile: &PeerProfile, combined: Option<&AoASpectrum>) -> String {
    let mut out = String::from("angle_deg,magnitude_dbm,round_index\n");
    let dbm = |w: f64| 10.0 * w.log10() + 30.0;
    for (j, sp) in profile.spectra.iter().enumerate() {
        for p in &sp.peaks {
            let _ = writeln!(
                out,
                "{:.4},{:.3},{}",
                p.angle.to_degrees(),
                dbm(p.magnitude),
                j
            );
        }
    }
    if let Some(sp) = combined {
        for p in &sp.peaks {
            let _ = writeln!(
                out,
                "{:.4},{:.3},-1",
                p.angle.to_degrees(),
                dbm(p.magnitude)
            );
        }
    }
    out
}
