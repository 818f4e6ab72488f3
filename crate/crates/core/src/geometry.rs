//! Planar Poisson point processes, rectangular boolean blockages, and
//! line-of-sight queries.
//!
//! LOS is answered two ways that the rest of the crate cross-checks:
//! geometrically (does the open segment hit any rectangle interior?)
//! and probabilistically (`p_LOS(r) = exp(-beta r)` with `beta` derived
//! from the blockage density and mean size). A segment that only
//! touches a rectangle boundary counts as LOS; an endpoint strictly
//! inside a rectangle is a physically invalid drop and is reported as
//! an error so samplers can resample.

use crate::error::{CoreError, Result};
use rand::Rng;
use rand_distr::{Distribution, Poisson};

/// A point in the plane, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const ORIGIN: Point2D = Point2D { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point2D { x, y }
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Distance from the origin.
    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Bearing of `other` as seen from `self`, in [0, 2pi).
    pub fn bearing_to(&self, other: &Point2D) -> f64 {
        let a = (other.y - self.y).atan2(other.x - self.x);
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    }
}

/// An oriented rectangle blockage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockageRect {
    pub center: Point2D,
    /// Extent along the local x axis, meters.
    pub length: f64,
    /// Extent along the local y axis, meters.
    pub width: f64,
    /// Rotation of the local x axis, radians in [0, pi).
    pub orientation: f64,
}

impl BlockageRect {
    pub fn new(center: Point2D, length: f64, width: f64, orientation: f64) -> Result<Self> {
        if !(length > 0.0) || !(width > 0.0) {
            return Err(CoreError::invalid(
                "blockage",
                "length and width must be positive",
            ));
        }
        if !(0.0..std::f64::consts::PI).contains(&orientation) {
            return Err(CoreError::invalid("orientation", "must lie in [0, pi)"));
        }
        Ok(BlockageRect {
            center,
            length,
            width,
            orientation,
        })
    }

    /// Map a world point into the rectangle's local frame.
    fn to_local(&self, p: &Point2D) -> (f64, f64) {
        let (s, c) = self.orientation.sin_cos();
        let dx = p.x - self.center.x;
        let dy = p.y - self.center.y;
        (c * dx + s * dy, -s * dx + c * dy)
    }

    /// Is `p` strictly inside the rectangle?
    pub fn contains_interior(&self, p: &Point2D) -> bool {
        let (lx, ly) = self.to_local(p);
        lx.abs() < self.length / 2.0 && ly.abs() < self.width / 2.0
    }

    /// Does the open segment `(a, b)` pass through the rectangle's
    /// interior? Boundary tangency does not count.
    pub fn blocks_segment(&self, a: &Point2D, b: &Point2D) -> bool {
        let (ax, ay) = self.to_local(a);
        let (bx, by) = self.to_local(b);
        let hx = self.length / 2.0;
        let hy = self.width / 2.0;
        segment_hits_open_box(ax, ay, bx, by, hx, hy)
    }

    /// Half of the rectangle's diagonal; the reach of the rectangle
    /// from its center regardless of orientation.
    pub fn half_diagonal(&self) -> f64 {
        0.5 * self.length.hypot(self.width)
    }

    /// Corner points in world coordinates, counter-clockwise.
    pub fn corners(&self) -> [Point2D; 4] {
        let (s, c) = self.orientation.sin_cos();
        let hx = self.length / 2.0;
        let hy = self.width / 2.0;
        let rot = |x: f64, y: f64| Point2D {
            x: self.center.x + c * x - s * y,
            y: self.center.y + s * x + c * y,
        };
        [rot(hx, hy), rot(-hx, hy), rot(-hx, -hy), rot(hx, -hy)]
    }

    /// The four edges as point pairs, counter-clockwise.
    pub fn faces(&self) -> [(Point2D, Point2D); 4] {
        let c = self.corners();
        [(c[0], c[1]), (c[1], c[2]), (c[2], c[3]), (c[3], c[0])]
    }
}

/// Liang-Barsky clip of segment (a -> b) against the open box
/// [-hx, hx] x [-hy, hy]; true iff a positive-length piece of the
/// segment lies in the interior.
fn segment_hits_open_box(ax: f64, ay: f64, bx: f64, by: f64, hx: f64, hy: f64) -> bool {
    let dx = bx - ax;
    let dy = by - ay;
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for (p0, d, h) in [(ax, dx, hx), (ay, dy, hy)] {
        if d == 0.0 {
            // Parallel to this slab: must already be strictly inside it.
            if p0.abs() >= h {
                return false;
            }
        } else {
            let ta = (-h - p0) / d;
            let tb = (h - p0) / d;
            let (lo, hi) = if ta < tb { (ta, tb) } else { (tb, ta) };
            t0 = t0.max(lo);
            t1 = t1.min(hi);
            if t0 >= t1 {
                return false;
            }
        }
    }
    // The clipped piece sits in the closed box; take its midpoint and
    // require it to be strictly interior, which rejects edge-sliding.
    let tm = 0.5 * (t0 + t1);
    let mx = ax + tm * dx;
    let my = ay + tm * dy;
    mx.abs() < hx && my.abs() < hy
}

/// A boolean process of rectangles with uniformly distributed sizes and
/// orientations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockageProcess {
    /// Rectangle centers per m^2.
    pub density: f64,
    /// Uniform length range (min, max), meters.
    pub length_range: (f64, f64),
    /// Uniform width range (min, max), meters.
    pub width_range: (f64, f64),
}

impl BlockageProcess {
    pub fn new(density: f64, length_range: (f64, f64), width_range: (f64, f64)) -> Result<Self> {
        let p = BlockageProcess {
            density,
            length_range,
            width_range,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.density < 0.0 {
            return Err(CoreError::invalid("density", "must be nonnegative"));
        }
        for (name, (lo, hi)) in [
            ("length_range", self.length_range),
            ("width_range", self.width_range),
        ] {
            if !(lo > 0.0) || lo > hi {
                return Err(CoreError::invalid(name, "need 0 < min <= max"));
            }
        }
        Ok(())
    }

    pub fn mean_length(&self) -> f64 {
        0.5 * (self.length_range.0 + self.length_range.1)
    }

    pub fn mean_width(&self) -> f64 {
        0.5 * (self.width_range.0 + self.width_range.1)
    }

    /// Largest possible half-diagonal; used to dilate sampling windows
    /// so edge links see the full blockage field.
    pub fn max_reach(&self) -> f64 {
        0.5 * self.length_range.1.hypot(self.width_range.1)
    }

    /// Sample the rectangles whose centers fall in the square of the
    /// given half width (already dilated by the caller if needed).
    pub fn sample<R: Rng + ?Sized>(&self, half_width: f64, rng: &mut R) -> Vec<BlockageRect> {
        let area = (2.0 * half_width) * (2.0 * half_width);
        let n = sample_poisson_count(self.density * area, rng);
        (0..n)
            .map(|_| {
                let center = Point2D::new(
                    rng.gen_range(-half_width..half_width),
                    rng.gen_range(-half_width..half_width),
                );
                let length = rng.gen_range(self.length_range.0..=self.length_range.1);
                let width = rng.gen_range(self.width_range.0..=self.width_range.1);
                let orientation = rng.gen_range(0.0..std::f64::consts::PI);
                BlockageRect {
                    center,
                    length,
                    width,
                    orientation,
                }
            })
            .collect()
    }
}

/// LOS decay rate of the boolean rectangle model,
/// `beta = 2 density (E[L] + E[W]) / pi`.
pub fn derive_beta(process: &BlockageProcess) -> f64 {
    2.0 * process.density * (process.mean_length() + process.mean_width()) / std::f64::consts::PI
}

/// `p_LOS(r) = exp(-beta r)`.
pub fn los_probability(r: f64, beta: f64) -> f64 {
    debug_assert!(r >= 0.0 && beta >= 0.0);
    (-beta * r).exp()
}

fn sample_poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean)
        .expect("positive finite mean")
        .sample(rng) as u64
}

/// Sample a homogeneous PPP of the given intensity on the square
/// `[-w, w]^2`.
pub fn sample_ppp<R: Rng + ?Sized>(
    density: f64,
    window_half_width: f64,
    rng: &mut R,
) -> Result<Vec<Point2D>> {
    if density < 0.0 {
        return Err(CoreError::invalid("density", "must be nonnegative"));
    }
    if !(window_half_width > 0.0) {
        return Err(CoreError::invalid("window_half_width", "must be positive"));
    }
    let area = (2.0 * window_half_width) * (2.0 * window_half_width);
    let n = sample_poisson_count(density * area, rng);
    Ok((0..n)
        .map(|_| {
            Point2D::new(
                rng.gen_range(-window_half_width..window_half_width),
                rng.gen_range(-window_half_width..window_half_width),
            )
        })
        .collect())
}

/// Geometric LOS test: true iff the open segment `(a, b)` misses every
/// rectangle interior. Errors if either endpoint is strictly inside a
/// rectangle (invalid drop; see [`CoreError::EndpointCovered`]).
pub fn is_los(a: &Point2D, b: &Point2D, blockages: &[BlockageRect]) -> Result<bool> {
    for r in blockages {
        if r.contains_interior(a) {
            return Err(CoreError::EndpointCovered { x: a.x, y: a.y });
        }
        if r.contains_interior(b) {
            return Err(CoreError::EndpointCovered { x: b.x, y: b.y });
        }
    }
    Ok(!blockages.iter().any(|r| r.blocks_segment(a, b)))
}

/// A uniform-grid spatial index over blockages for fast LOS queries in
/// large windows.
#[derive(Debug, Clone)]
pub struct BlockageIndex {
    rects: Vec<BlockageRect>,
    cell: f64,
    min: f64,
    n: usize,
    cells: Vec<Vec<u32>>,
}

impl BlockageIndex {
    pub fn build(rects: Vec<BlockageRect>, half_width: f64) -> Self {
        let reach = rects
            .iter()
            .map(|r| r.half_diagonal())
            .fold(0.0f64, f64::max);
        let extent = half_width + reach + 1.0;
        let cell = (2.0 * reach).max(50.0);
        let n = ((2.0 * extent / cell).ceil() as usize).max(1);
        let mut cells = vec![Vec::new(); n * n];
        let min = -extent;
        for (i, r) in rects.iter().enumerate() {
            let hd = r.half_diagonal();
            let (lo_x, hi_x) = cell_range(r.center.x - hd, r.center.x + hd, min, cell, n);
            let (lo_y, hi_y) = cell_range(r.center.y - hd, r.center.y + hd, min, cell, n);
            for cy in lo_y..=hi_y {
                for cx in lo_x..=hi_x {
                    cells[cy * n + cx].push(i as u32);
                }
            }
        }
        BlockageIndex {
            rects,
            cell,
            min,
            n,
            cells,
        }
    }

    pub fn rects(&self) -> &[BlockageRect] {
        &self.rects
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    /// Rectangle ids whose cells overlap the segment's bounding box,
    /// deduplicated.
    fn candidates(&self, a: &Point2D, b: &Point2D) -> Vec<u32> {
        let (lo_x, hi_x) = cell_range(a.x.min(b.x), a.x.max(b.x), self.min, self.cell, self.n);
        let (lo_y, hi_y) = cell_range(a.y.min(b.y), a.y.max(b.y), self.min, self.cell, self.n);
        let mut ids = Vec::new();
        for cy in lo_y..=hi_y {
            for cx in lo_x..=hi_x {
                ids.extend_from_slice(&self.cells[cy * self.n + cx]);
            }
        }
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Is `p` strictly inside any rectangle?
    pub fn covers_point(&self, p: &Point2D) -> bool {
        self.candidates(p, p)
            .iter()
            .any(|&i| self.rects[i as usize].contains_interior(p))
    }

    /// Indexed variant of [`is_los`].
    pub fn is_los(&self, a: &Point2D, b: &Point2D) -> Result<bool> {
        let ids = self.candidates(a, b);
        for &i in &ids {
            let r = &self.rects[i as usize];
            if r.contains_interior(a) {
                return Err(CoreError::EndpointCovered { x: a.x, y: a.y });
            }
            if r.contains_interior(b) {
                return Err(CoreError::EndpointCovered { x: b.x, y: b.y });
            }
        }
        Ok(!ids
            .iter()
            .any(|&i| self.rects[i as usize].blocks_segment(a, b)))
    }

    /// [`Self::is_los`] ignoring one rectangle (used when a path leg
    /// starts on that rectangle's own face).
    pub fn is_los_skipping(&self, a: &Point2D, b: &Point2D, skip: u32) -> Result<bool> {
        let ids = self.candidates(a, b);
        for &i in &ids {
            if i == skip {
                continue;
            }
            let r = &self.rects[i as usize];
            if r.contains_interior(a) {
                return Err(CoreError::EndpointCovered { x: a.x, y: a.y });
            }
            if r.contains_interior(b) {
                return Err(CoreError::EndpointCovered { x: b.x, y: b.y });
            }
        }
        Ok(!ids
            .iter()
            .filter(|&&i| i != skip)
            .any(|&i| self.rects[i as usize].blocks_segment(a, b)))
    }

    /// Rectangles whose body can reach within `radius` of `p`.
    pub fn rects_within(
        &self,
        p: &Point2D,
        radius: f64,
    ) -> impl Iterator<Item = (u32, &BlockageRect)> {
        let corner = Point2D::new(p.x - radius, p.y - radius);
        let corner2 = Point2D::new(p.x + radius, p.y + radius);
        let ids = self.candidates(&corner, &corner2);
        let center = *p;
        ids.into_iter().filter_map(move |i| {
            let r = &self.rects[i as usize];
            if r.center.distance(&center) <= radius + r.half_diagonal() {
                Some((i, r))
            } else {
                None
            }
        })
    }
}

fn cell_range(lo: f64, hi: f64, min: f64, cell: f64, n: usize) -> (usize, usize) {
    let clamp = |v: f64| -> usize {
        let c = ((v - min) / cell).floor();
        (c.max(0.0) as usize).min(n - 1)
    };
    (clamp(lo), clamp(hi))
}

/// One sampled drop of the whole network.
#[derive(Debug, Clone)]
pub struct NetworkRealization {
    /// D2D transmitter locations (potential interferers).
    pub dts: Vec<Point2D>,
    /// Base station locations.
    pub bss: Vec<Point2D>,
    /// Cellular user locations.
    pub cus: Vec<Point2D>,
    /// Blockage field with spatial index (empty in direct-beta mode).
    pub blockages: BlockageIndex,
    pub window_half_width: f64,
    /// Test receiver, pinned at the origin.
    pub test_rx: Point2D,
    /// Test transmitter at distance `d0` from the receiver.
    pub test_tx: Point2D,
}

/// Densities for one realization, per m^2.
#[derive(Debug, Clone, Copy)]
pub struct FieldDensities {
    pub lambda_dt: f64,
    pub lambda_b: f64,
    pub lambda_c: f64,
}

/// Sample a realization: PPP node fields, an optional geometric
/// blockage field, and the test pair (receiver at the origin,
/// transmitter at distance `d0` in a uniform direction). Drops whose
/// test endpoints land inside a blockage are resampled.
pub fn sample_realization<R: Rng + ?Sized>(
    densities: FieldDensities,
    blockage: Option<&BlockageProcess>,
    d0: f64,
    window_half_width: f64,
    rng: &mut R,
) -> Result<NetworkRealization> {
    if !(d0 > 0.0) {
        return Err(CoreError::invalid("d0", "must be positive"));
    }
    let dts = sample_ppp(densities.lambda_dt, window_half_width, rng)?;
    let bss = sample_ppp(densities.lambda_b, window_half_width, rng)?;
    let cus = sample_ppp(densities.lambda_c, window_half_width, rng)?;

    let (index, test_tx) = match blockage {
        None => {
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            (
                BlockageIndex::build(Vec::new(), window_half_width),
                Point2D::new(d0 * angle.cos(), d0 * angle.sin()),
            )
        }
        Some(proc) => loop {
            let field = proc.sample(window_half_width + proc.max_reach(), rng);
            let index = BlockageIndex::build(field, window_half_width);
            if index.covers_point(&Point2D::ORIGIN) {
                continue; // receiver buried in a blockage: invalid drop
            }
            let mut placed = None;
            for _ in 0..64 {
                let angle = rng.gen_range(0.0..std::f64::consts::TAU);
                let tx = Point2D::new(d0 * angle.cos(), d0 * angle.sin());
                if !index.covers_point(&tx) {
                    placed = Some(tx);
                    break;
                }
            }
            if let Some(tx) = placed {
                break (index, tx);
            }
            // Every direction blocked: resample the blockage field.
        },
    };

    Ok(NetworkRealization {
        dts,
        bss,
        cus,
        blockages: index,
        window_half_width,
        test_rx: Point2D::ORIGIN,
        test_tx,
    })
}
