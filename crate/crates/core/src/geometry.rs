//! Coordinate types, shoebox rooms, microphone arrays, and source trajectories.
//!
//! Conventions: positions are metric `(x, y, z)` triples in room coordinates,
//! azimuth is measured counterclockwise from +x in the xy-plane in
//! `[-180, 180)` degrees, elevation is positive upward in `[-90, 90]`.
//! At the poles azimuth is reported as 0.

use crate::error::{Error, Result};
use crate::float::Float;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A point or direction in room coordinates, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Float> Vec3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Vec3 { x, y, z }
    }

    pub fn splat(v: T) -> Self {
        Vec3 { x: v, y: v, z: v }
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn add(self, o: Self) -> Self {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    pub fn sub(self, o: Self) -> Self {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn scale(self, s: T) -> Self {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    pub fn distance(self, o: Self) -> T {
        self.sub(o).norm()
    }

    /// Unit vector in the same direction. Zero-length input yields zero.
    pub fn normalized(self) -> Self {
        let n = self.norm();
        if n > T::zero() {
            self.scale(T::one() / n)
        } else {
            self
        }
    }

    /// Linear interpolation `self + u * (to - self)`.
    pub fn lerp(self, to: Self, u: T) -> Self {
        self.add(to.sub(self).scale(u))
    }

    /// Componentwise clamp into `[lo, hi]`.
    pub fn clamp_box(self, lo: Self, hi: Self) -> Self {
        Vec3::new(
            self.x.max(lo.x).min(hi.x),
            self.y.max(lo.y).min(hi.y),
            self.z.max(lo.z).min(hi.z),
        )
    }

    pub fn map_f64(self) -> Vec3<f64> {
        Vec3::new(self.x.as_f64(), self.y.as_f64(), self.z.as_f64())
    }
}

/// A shoebox room: edge lengths, a single pressure reflection coefficient
/// applied to all six walls, and the speed of sound.
///
/// The wall coefficient is a pressure reflection factor `beta`; the
/// corresponding Sabine energy absorption is `alpha = 1 - beta^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoomSpec<T> {
    /// Room edge lengths in meters.
    pub dims: Vec3<T>,
    /// Pressure reflection coefficient in `[0, 1)`, uniform over all walls.
    pub reflection: T,
    /// Speed of sound in m/s.
    pub speed_of_sound: T,
}

/// Speed of sound used when none is given, in m/s.
pub const DEFAULT_SPEED_OF_SOUND: f64 = 343.0;

impl<T: Float> RoomSpec<T> {
    pub fn new(dims: Vec3<T>, reflection: T) -> Result<Self> {
        Self::with_speed_of_sound(dims, reflection, T::cast(DEFAULT_SPEED_OF_SOUND))
    }

    pub fn with_speed_of_sound(dims: Vec3<T>, reflection: T, speed_of_sound: T) -> Result<Self> {
        if !(dims.x > T::zero() && dims.y > T::zero() && dims.z > T::zero()) || !dims.is_finite() {
            return Err(Error::Geometry(format!(
                "room dimensions must be positive, got ({}, {}, {})",
                dims.x, dims.y, dims.z
            )));
        }
        if !(reflection >= T::zero() && reflection < T::one()) {
            return Err(Error::Range {
                what: "wall reflection coefficient",
                value: reflection.as_f64(),
                min: 0.0,
                max: 1.0,
            });
        }
        if !(speed_of_sound > T::zero()) {
            return Err(Error::Range {
                what: "speed of sound",
                value: speed_of_sound.as_f64(),
                min: f64::MIN_POSITIVE,
                max: f64::INFINITY,
            });
        }
        Ok(RoomSpec {
            dims,
            reflection,
            speed_of_sound,
        })
    }

    /// Sabine energy absorption coefficient `1 - beta^2`.
    pub fn absorption(&self) -> T {
        T::one() - self.reflection * self.reflection
    }

    pub fn volume(&self) -> T {
        self.dims.x * self.dims.y * self.dims.z
    }

    /// Total wall surface area.
    pub fn surface_area(&self) -> T {
        let d = self.dims;
        T::cast(2.0) * (d.x * d.y + d.x * d.z + d.y * d.z)
    }

    /// Sabine reverberation-time prediction `0.161 V / (S alpha)`, seconds.
    pub fn sabine_t60(&self) -> T {
        T::cast(0.161) * self.volume() / (self.surface_area() * self.absorption())
    }

    pub fn contains(&self, p: Vec3<T>) -> bool {
        p.x > T::zero()
            && p.x < self.dims.x
            && p.y > T::zero()
            && p.y < self.dims.y
            && p.z > T::zero()
            && p.z < self.dims.z
    }

    /// Clamp a point into the room interior, keeping `margin` meters of
    /// clearance from every wall.
    pub fn clamp_inside(&self, p: Vec3<T>, margin: T) -> Vec3<T> {
        p.clamp_box(Vec3::splat(margin), self.dims.sub(Vec3::splat(margin)))
    }
}

/// Capsule directivity pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Directivity<T> {
    Omni,
    /// First-order cardioid with a unit look direction.
    Cardioid { look: Vec3<T> },
}

impl<T: Float> Directivity<T> {
    /// Gain for sound arriving from unit direction `arrival` (pointing from
    /// the capsule toward the source).
    pub fn gain(&self, arrival: Vec3<T>) -> T {
        match self {
            Directivity::Omni => T::one(),
            Directivity::Cardioid { look } => {
                T::cast(0.5) * (T::one() + look.dot(arrival))
            }
        }
    }
}

/// One capsule of a microphone array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Capsule<T> {
    /// Offset from the array center, meters.
    pub offset: Vec3<T>,
    pub directivity: Directivity<T>,
}

/// A microphone array: a center position plus one or more capsules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicArray<T> {
    pub center: Vec3<T>,
    pub capsules: Vec<Capsule<T>>,
}

const LOOK_NORM_TOL: f64 = 1e-9;

impl<T: Float> MicArray<T> {
    pub fn new(center: Vec3<T>, capsules: Vec<Capsule<T>>) -> Result<Self> {
        if capsules.is_empty() {
            return Err(Error::Geometry("microphone array has no capsules".into()));
        }
        for (i, c) in capsules.iter().enumerate() {
            if let Directivity::Cardioid { look } = c.directivity {
                if (look.norm().as_f64() - 1.0).abs() > LOOK_NORM_TOL {
                    return Err(Error::Geometry(format!(
                        "capsule {i} look direction is not unit length (|v| = {})",
                        look.norm()
                    )));
                }
            }
        }
        Ok(MicArray { center, capsules })
    }

    /// Single omni capsule at `center`.
    pub fn single_omni(center: Vec3<T>) -> Self {
        MicArray {
            center,
            capsules: vec![Capsule {
                offset: Vec3::splat(T::zero()),
                directivity: Directivity::Omni,
            }],
        }
    }

    /// Resolve a named preset at the given center position.
    ///
    /// Known presets: `em32` (32 omni capsules on a 4.2 cm sphere, positioned
    /// per the Eigenmike capsule table) and `tetra` (4 outward-looking
    /// cardioids in the standard tetrahedral arrangement, 4.2 cm radius).
    pub fn preset(name: &str, center: Vec3<T>) -> Result<Self> {
        const RADIUS: f64 = 0.042;
        match name {
            "em32" => {
                let capsules = EM32_AZ_EL_DEG
                    .iter()
                    .map(|&(az, el)| Capsule {
                        offset: unit_from_angles::<T>(az, el).scale(T::cast(RADIUS)),
                        directivity: Directivity::Omni,
                    })
                    .collect();
                MicArray::new(center, capsules)
            }
            "tetra" => {
                let capsules = TETRA_AZ_EL_DEG
                    .iter()
                    .map(|&(az, el)| {
                        let dir = unit_from_angles::<T>(az, el);
                        Capsule {
                            offset: dir.scale(T::cast(RADIUS)),
                            directivity: Directivity::Cardioid { look: dir },
                        }
                    })
                    .collect();
                MicArray::new(center, capsules)
            }
            other => Err(Error::Geometry(format!(
                "unknown microphone preset '{other}' (known: em32, tetra)"
            ))),
        }
    }

    pub fn capsule_position(&self, index: usize) -> Vec3<T> {
        self.center.add(self.capsules[index].offset)
    }

    /// Check that every capsule sits strictly inside the room.
    pub fn validate_in_room(&self, room: &RoomSpec<T>) -> Result<()> {
        for i in 0..self.capsules.len() {
            let p = self.capsule_position(i);
            if !room.contains(p) {
                return Err(Error::Geometry(format!(
                    "capsule {i} at ({}, {}, {}) is outside the room",
                    p.x, p.y, p.z
                )));
            }
        }
        Ok(())
    }
}

/// Direction cosine vector for spherical angles in degrees.
fn unit_from_angles<T: Float>(az_deg: f64, el_deg: f64) -> Vec3<T> {
    let az = az_deg.to_radians();
    let el = el_deg.to_radians();
    Vec3::new(
        T::cast(az.cos() * el.cos()),
        T::cast(az.sin() * el.cos()),
        T::cast(el.sin()),
    )
}

/// Eigenmike capsule directions, (azimuth, elevation) in degrees.
const EM32_AZ_EL_DEG: [(f64, f64); 32] = [
    (0.0, 21.0),
    (32.0, 0.0),
    (0.0, -21.0),
    (-32.0, 0.0),
    (0.0, 58.0),
    (45.0, 35.0),
    (69.0, 0.0),
    (45.0, -35.0),
    (0.0, -58.0),
    (-45.0, -35.0),
    (-69.0, 0.0),
    (-45.0, 35.0),
    (91.0, 69.0),
    (90.0, 32.0),
    (90.0, -31.0),
    (89.0, -69.0),
    (180.0, 21.0),
    (-148.0, 0.0),
    (180.0, -21.0),
    (148.0, 0.0),
    (180.0, 58.0),
    (-135.0, 35.0),
    (-111.0, 0.0),
    (-135.0, -35.0),
    (180.0, -58.0),
    (135.0, -35.0),
    (111.0, 0.0),
    (135.0, 35.0),
    (-91.0, 69.0),
    (-90.0, 32.0),
    (-90.0, -32.0),
    (-89.0, -69.0),
];

/// Standard tetrahedral capsule directions (FLU, FRD, BLD, BRU).
const TETRA_AZ_EL_DEG: [(f64, f64); 4] = [
    (45.0, 35.0),
    (-45.0, -35.0),
    (135.0, -35.0),
    (-135.0, 35.0),
];

/// How a trajectory interpolates between its waypoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryMode {
    Static,
    Linear,
    Spline,
    RandomWalk { seed: u64 },
}

/// A source path through the room over a fixed duration.
///
/// Linear trajectories move at arc-length-uniform speed over the total
/// duration; splines are natural cubics through the waypoints with knots at
/// normalized cumulative chord length; random walks take seeded Gaussian
/// steps (sigma 0.05 m per 100 ms) bridged through the waypoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub waypoints: Vec<Vec3<T>>,
    pub mode: TrajectoryMode,
    /// Seconds.
    pub duration: T,
    /// Box the sampled positions are clamped into (room interior with a
    /// 1 cm margin). `None` leaves samples unclamped.
    pub bounds: Option<(Vec3<T>, Vec3<T>)>,
}

/// Clearance kept from the walls when clamping trajectory samples, meters.
pub const TRAJECTORY_WALL_MARGIN: f64 = 0.01;

/// Random-walk step standard deviation, meters per grid step.
const WALK_STEP_SIGMA: f64 = 0.05;
/// Random-walk grid resolution, seconds.
const WALK_GRID_DT: f64 = 0.1;

impl<T: Float> Trajectory<T> {
    pub fn new(waypoints: Vec<Vec3<T>>, mode: TrajectoryMode, duration: T) -> Result<Self> {
        if waypoints.is_empty() {
            return Err(Error::Geometry("trajectory needs at least one waypoint".into()));
        }
        match mode {
            TrajectoryMode::Static if waypoints.len() != 1 => {
                return Err(Error::Geometry(format!(
                    "static trajectory must have exactly 1 waypoint, got {}",
                    waypoints.len()
                )));
            }
            TrajectoryMode::Linear | TrajectoryMode::Spline if waypoints.len() < 2 => {
                return Err(Error::Geometry(
                    "moving trajectory needs at least 2 waypoints".into(),
                ));
            }
            _ => {}
        }
        if !(duration >= T::zero()) {
            return Err(Error::Range {
                what: "trajectory duration",
                value: duration.as_f64(),
                min: 0.0,
                max: f64::INFINITY,
            });
        }
        Ok(Trajectory {
            waypoints,
            mode,
            duration,
            bounds: None,
        })
    }

    pub fn stationary(point: Vec3<T>) -> Self {
        Trajectory {
            waypoints: vec![point],
            mode: TrajectoryMode::Static,
            duration: T::zero(),
            bounds: None,
        }
    }

    /// Clamp all sampled positions into `room` with a 1 cm wall margin.
    pub fn bounded_by(mut self, room: &RoomSpec<T>) -> Self {
        let m = T::cast(TRAJECTORY_WALL_MARGIN);
        self.bounds = Some((Vec3::splat(m), room.dims.sub(Vec3::splat(m))));
        self
    }

    fn clamp(&self, p: Vec3<T>) -> Vec3<T> {
        match self.bounds {
            Some((lo, hi)) => p.clamp_box(lo, hi),
            None => p,
        }
    }

    /// Cumulative chord lengths, from 0 to the total path length.
    fn cumulative_lengths(&self) -> Vec<T> {
        let mut acc = T::zero();
        let mut out = Vec::with_capacity(self.waypoints.len());
        out.push(T::zero());
        for w in self.waypoints.windows(2) {
            acc += w[0].distance(w[1]);
            out.push(acc);
        }
        out
    }
}

/// Position along `traj` at time `t in [0, duration]`.
pub fn sample_trajectory<T: Float>(traj: &Trajectory<T>, t: T) -> Result<Vec3<T>> {
    if !(t >= T::zero() && t <= traj.duration) && traj.mode != TrajectoryMode::Static {
        return Err(Error::Range {
            what: "trajectory time",
            value: t.as_f64(),
            min: 0.0,
            max: traj.duration.as_f64(),
        });
    }
    let pos = match traj.mode {
        TrajectoryMode::Static => traj.waypoints[0],
        TrajectoryMode::Linear => sample_linear(traj, t),
        TrajectoryMode::Spline => sample_spline(traj, t),
        TrajectoryMode::RandomWalk { seed } => sample_walk(traj, t, seed),
    };
    Ok(traj.clamp(pos))
}

fn sample_linear<T: Float>(traj: &Trajectory<T>, t: T) -> Vec3<T> {
    let cums = traj.cumulative_lengths();
    let total = *cums.last().unwrap();
    if total <= T::zero() || traj.duration <= T::zero() {
        return traj.waypoints[0];
    }
    let target = total * (t / traj.duration);
    // Find the segment containing the target arc length.
    for (i, w) in traj.waypoints.windows(2).enumerate() {
        let (a, b) = (cums[i], cums[i + 1]);
        if target <= b || i == traj.waypoints.len() - 2 {
            let seg = b - a;
            let u = if seg > T::zero() { (target - a) / seg } else { T::zero() };
            return w[0].lerp(w[1], u.max(T::zero()).min(T::one()));
        }
    }
    *traj.waypoints.last().unwrap()
}

/// Natural cubic spline through the waypoints, one spline per coordinate,
/// with knots at normalized cumulative chord length. Coincident consecutive
/// waypoints would produce zero-length knot intervals, so they collapse to
/// one point first.
fn sample_spline<T: Float>(traj: &Trajectory<T>, t: T) -> Vec3<T> {
    let mut points: Vec<Vec3<T>> = Vec::with_capacity(traj.waypoints.len());
    for &w in &traj.waypoints {
        if points.last().is_none_or(|&p| p.distance(w) > T::cast(1e-9)) {
            points.push(w);
        }
    }
    let n = points.len();
    if n < 3 {
        return sample_linear(traj, t);
    }
    let mut cums = Vec::with_capacity(n);
    cums.push(T::zero());
    let mut acc = T::zero();
    for w in points.windows(2) {
        acc += w[0].distance(w[1]);
        cums.push(acc);
    }
    let total = *cums.last().unwrap();
    if total <= T::zero() || traj.duration <= T::zero() {
        return points[0];
    }
    let knots: Vec<T> = cums.iter().map(|&c| c / total).collect();
    let u = (t / traj.duration).max(T::zero()).min(T::one());

    let xs: Vec<T> = points.iter().map(|p| p.x).collect();
    let ys: Vec<T> = points.iter().map(|p| p.y).collect();
    let zs: Vec<T> = points.iter().map(|p| p.z).collect();
    Vec3::new(
        spline_eval(&knots, &xs, u),
        spline_eval(&knots, &ys, u),
        spline_eval(&knots, &zs, u),
    )
}

/// Evaluate a 1-D natural cubic spline defined by `(knots, values)` at `u`.
fn spline_eval<T: Float>(knots: &[T], values: &[T], u: T) -> T {
    let n = knots.len();
    debug_assert!(n >= 3);
    // Second derivatives via the standard tridiagonal system.
    let mut m = vec![T::zero(); n];
    let mut diag = vec![T::zero(); n];
    let mut rhs = vec![T::zero(); n];
    let mut upper = vec![T::zero(); n];
    diag[0] = T::one();
    for i in 1..n - 1 {
        let h0 = knots[i] - knots[i - 1];
        let h1 = knots[i + 1] - knots[i];
        diag[i] = T::cast(2.0) * (h0 + h1);
        upper[i] = h1;
        rhs[i] = T::cast(6.0)
            * ((values[i + 1] - values[i]) / h1 - (values[i] - values[i - 1]) / h0);
    }
    diag[n - 1] = T::one();
    // Thomas algorithm; the natural end conditions keep m[0] = m[n-1] = 0.
    for i in 2..n - 1 {
        let h0 = knots[i] - knots[i - 1];
        let w = h0 / diag[i - 1];
        let prev_upper = upper[i - 1];
        let prev_rhs = rhs[i - 1];
        diag[i] -= w * prev_upper;
        rhs[i] -= w * prev_rhs;
    }
    for i in (1..n - 1).rev() {
        m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
    }

    let mut seg = n - 2;
    for i in 0..n - 1 {
        if u <= knots[i + 1] {
            seg = i;
            break;
        }
    }
    let h = knots[seg + 1] - knots[seg];
    if h <= T::zero() {
        return values[seg];
    }
    let a = (knots[seg + 1] - u) / h;
    let b = (u - knots[seg]) / h;
    a * values[seg]
        + b * values[seg + 1]
        + ((a * a * a - a) * m[seg] + (b * b * b - b) * m[seg + 1]) * h * h / T::cast(6.0)
}

/// Seeded Gaussian walk bridged through the waypoints on a 100 ms grid,
/// linearly interpolated between grid points.
fn sample_walk<T: Float>(traj: &Trajectory<T>, t: T, seed: u64) -> Vec3<T> {
    let grid = walk_grid(traj, seed);
    if grid.len() == 1 || traj.duration <= T::zero() {
        return grid[0];
    }
    let dt = traj.duration.as_f64() / (grid.len() - 1) as f64;
    let pos = (t.as_f64() / dt).max(0.0);
    let i = (pos.floor() as usize).min(grid.len() - 2);
    let frac = T::cast(pos - i as f64);
    grid[i].lerp(grid[i + 1], frac.min(T::one()))
}

fn walk_grid<T: Float>(traj: &Trajectory<T>, seed: u64) -> Vec<Vec3<T>> {
    let duration = traj.duration.as_f64();
    let steps = (duration / WALK_GRID_DT).ceil().max(1.0) as usize;
    let n_grid = steps + 1;
    let n_way = traj.waypoints.len();
    // Anchor waypoint i at its proportional grid index.
    let anchor_idx: Vec<usize> = (0..n_way)
        .map(|i| if n_way == 1 { 0 } else { i * steps / (n_way - 1) })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = WALK_STEP_SIGMA;
    let mut grid: Vec<Vec3<f64>> = Vec::with_capacity(n_grid);
    grid.push(traj.waypoints[0].map_f64());
    for a in 0..n_way.max(2) - 1 {
        let (i0, i1) = if n_way == 1 {
            (0, steps)
        } else {
            (anchor_idx[a], anchor_idx[a + 1])
        };
        let target = traj.waypoints[if n_way == 1 { 0 } else { a + 1 }].map_f64();
        let mut cur = *grid.last().unwrap();
        for j in i0..i1 {
            let remaining = (i1 - j) as f64;
            // Brownian-bridge step toward the anchor.
            let drift = target.sub(cur).scale(1.0 / remaining);
            let spread = if remaining > 1.0 {
                sigma * ((remaining - 1.0) / remaining).sqrt()
            } else {
                0.0
            };
            let step = Vec3::new(
                drift.x + spread * gaussian(&mut rng),
                drift.y + spread * gaussian(&mut rng),
                drift.z + spread * gaussian(&mut rng),
            );
            cur = cur.add(step);
            grid.push(cur);
        }
        if i1 > i0 {
            *grid.last_mut().unwrap() = target;
            cur = target;
        }
        let _ = cur;
    }
    while grid.len() < n_grid {
        let last = *grid.last().unwrap();
        grid.push(last);
    }
    grid.into_iter()
        .map(|p| Vec3::new(T::cast(p.x), T::cast(p.y), T::cast(p.z)))
        .collect()
}

/// Standard normal draw via Box-Muller.
fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Spherical coordinates of `p` seen from `origin`: azimuth and elevation in
/// degrees, distance in meters.
pub fn cartesian_to_spherical<T: Float>(p: Vec3<T>, origin: Vec3<T>) -> Result<(T, T, T)> {
    let d = p.sub(origin);
    let dist = d.norm();
    if dist == T::zero() {
        return Err(Error::DegenerateDirection);
    }
    let horiz = (d.x * d.x + d.y * d.y).sqrt();
    let el = d.z.atan2(horiz).to_degrees();
    let az = if horiz.as_f64() == 0.0 {
        T::zero() // pole convention
    } else {
        wrap_azimuth_deg(d.y.atan2(d.x).to_degrees())
    };
    Ok((az, el, dist))
}

/// Inverse of [`cartesian_to_spherical`].
pub fn spherical_to_cartesian<T: Float>(
    azimuth_deg: T,
    elevation_deg: T,
    distance: T,
    origin: Vec3<T>,
) -> Vec3<T> {
    let az = azimuth_deg.to_radians();
    let el = elevation_deg.to_radians();
    origin.add(Vec3::new(
        distance * az.cos() * el.cos(),
        distance * az.sin() * el.cos(),
        distance * el.sin(),
    ))
}

/// Wrap an azimuth in degrees into `[-180, 180)`.
pub fn wrap_azimuth_deg<T: Float>(az: T) -> T {
    let full = T::cast(360.0);
    let half = T::cast(180.0);
    let mut a = (az + half) % full;
    if a < T::zero() {
        a += full;
    }
    a - half
}

/// Sine of an angle in degrees, exact at multiples of 90.
pub fn sin_deg<T: Float>(deg: T) -> T {
    let r = deg % T::cast(360.0);
    let r = if r < T::zero() { r + T::cast(360.0) } else { r };
    if r == T::zero() || r == T::cast(180.0) {
        T::zero()
    } else if r == T::cast(90.0) {
        T::one()
    } else if r == T::cast(270.0) {
        -T::one()
    } else {
        r.to_radians().sin()
    }
}

/// Cosine of an angle in degrees, exact at multiples of 90.
pub fn cos_deg<T: Float>(deg: T) -> T {
    sin_deg(deg + T::cast(90.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn room() -> RoomSpec<f64> {
        RoomSpec::new(Vec3::new(5.0, 3.0, 2.0), 0.8).unwrap()
    }

    #[test]
    fn room_invariants() {
        assert!(RoomSpec::new(Vec3::new(0.0, 3.0, 2.0), 0.5).is_err());
        assert!(RoomSpec::new(Vec3::new(5.0, 3.0, 2.0), 1.0).is_err());
        assert!(RoomSpec::new(Vec3::new(5.0, 3.0, 2.0), -0.1).is_err());
        let r = room();
        assert_abs_diff_eq!(r.absorption(), 0.36, epsilon = 1e-12);
        assert_abs_diff_eq!(r.surface_area(), 62.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.sabine_t60(), 0.161 * 30.0 / (62.0 * 0.36), epsilon = 1e-12);
    }

    #[test]
    fn static_trajectory_returns_waypoint() {
        let traj = Trajectory::new(
            vec![Vec3::new(1.0, 1.0, 1.0)],
            TrajectoryMode::Static,
            1.0,
        )
        .unwrap();
        let p = sample_trajectory(&traj, 0.5).unwrap();
        assert_eq!(p, Vec3::new(1.0, 1.0, 1.0));
    }

    #[test]
    fn linear_midpoint() {
        let traj = Trajectory::new(
            vec![Vec3::new(4.0, 0.1, 0.2), Vec3::new(4.5, 0.1, 1.9)],
            TrajectoryMode::Linear,
            2.0,
        )
        .unwrap();
        let p = sample_trajectory(&traj, 1.0).unwrap();
        assert_abs_diff_eq!(p.x, 4.25, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(p.z, 1.05, epsilon = 1e-12);
    }

    #[test]
    fn linear_arc_length_uniform() {
        // Two equal-length segments: t = 0.5 of duration 2 lands a quarter in.
        let traj = Trajectory::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(1.0, 1.0, 0.0),
            ],
            TrajectoryMode::Linear,
            2.0,
        )
        .unwrap();
        let p = sample_trajectory(&traj, 0.5).unwrap();
        assert_abs_diff_eq!(p.x, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn trajectory_endpoints_hit_waypoints() {
        let wps = vec![
            Vec3::new(1.0, 1.0, 0.5),
            Vec3::new(2.0, 2.0, 1.0),
            Vec3::new(4.0, 1.5, 1.5),
        ];
        for mode in [
            TrajectoryMode::Linear,
            TrajectoryMode::Spline,
        ] {
            let traj = Trajectory::new(wps.clone(), mode, 3.0).unwrap();
            let s = sample_trajectory(&traj, 0.0).unwrap();
            let e = sample_trajectory(&traj, 3.0).unwrap();
            assert!(s.distance(wps[0]) < 1e-9, "{mode:?} start");
            assert!(e.distance(wps[2]) < 1e-9, "{mode:?} end");
        }
    }

    #[test]
    fn spline_matches_hand_computed_natural_cubic() {
        // Equal chords give knots [0, 0.5, 1]; for values [0, 1, 0] the
        // natural cubic has m1 = -12, so f(0.25) = 0.6875. The x-coordinate
        // is collinear and must stay exactly linear.
        let traj = Trajectory::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(0.5, 1.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
            ],
            TrajectoryMode::Spline,
            1.0,
        )
        .unwrap();
        let p = sample_trajectory(&traj, 0.25).unwrap();
        assert_abs_diff_eq!(p.y, 0.6875, epsilon = 1e-12);
        assert_abs_diff_eq!(p.x, 0.25, epsilon = 1e-12);
        let mid = sample_trajectory(&traj, 0.5).unwrap();
        assert_abs_diff_eq!(mid.y, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn spline_tolerates_duplicate_waypoints() {
        let traj = Trajectory::new(
            vec![
                Vec3::new(1.0, 1.0, 1.0),
                Vec3::new(1.0, 1.0, 1.0),
                Vec3::new(3.0, 2.0, 1.5),
            ],
            TrajectoryMode::Spline,
            2.0,
        )
        .unwrap();
        for i in 0..=20 {
            let p = sample_trajectory(&traj, 0.1 * i as f64).unwrap();
            assert!(p.is_finite(), "t={} -> {p:?}", 0.1 * i as f64);
        }
        assert!(sample_trajectory(&traj, 2.0)
            .unwrap()
            .distance(Vec3::new(3.0, 2.0, 1.5))
            < 1e-9);
    }

    #[test]
    fn linear_speed_bound() {
        let traj = Trajectory::new(
            vec![Vec3::new(0.5, 0.5, 0.5), Vec3::new(4.5, 2.5, 1.5)],
            TrajectoryMode::Linear,
            2.0,
        )
        .unwrap();
        let path_len = Vec3::new(4.0, 2.0, 1.0).norm();
        let v_max = path_len / 2.0;
        let dt = 0.01;
        let mut t = 0.0;
        while t + dt <= 2.0 {
            let a = sample_trajectory(&traj, t).unwrap();
            let b = sample_trajectory(&traj, t + dt).unwrap();
            assert!(a.distance(b) <= v_max * dt + 1e-9);
            t += dt;
        }
    }

    #[test]
    fn random_walk_passes_near_waypoints() {
        let wps = vec![
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::new(3.0, 2.0, 1.0),
            Vec3::new(4.0, 1.0, 1.5),
        ];
        let traj = Trajectory::new(
            wps.clone(),
            TrajectoryMode::RandomWalk { seed: 7 },
            6.0,
        )
        .unwrap()
        .bounded_by(&room());
        for (i, wp) in wps.iter().enumerate() {
            let t = 6.0 * i as f64 / 2.0;
            // Anchors land on grid points; allow the 1 cm contract.
            let p = sample_trajectory(&traj, t).unwrap();
            assert!(
                p.distance(*wp) <= 0.01 + 1e-9,
                "waypoint {i}: {:?} vs {:?}",
                p,
                wp
            );
        }
    }

    #[test]
    fn random_walk_stays_in_room() {
        let r = room();
        let traj = Trajectory::new(
            vec![Vec3::new(0.1, 0.1, 0.1), Vec3::new(4.9, 2.9, 1.9)],
            TrajectoryMode::RandomWalk { seed: 42 },
            10.0,
        )
        .unwrap()
        .bounded_by(&r);
        let mut t = 0.0;
        while t <= 10.0 {
            let p = sample_trajectory(&traj, t).unwrap();
            assert!(p.x >= 0.01 - 1e-12 && p.x <= 4.99 + 1e-12);
            assert!(p.y >= 0.01 - 1e-12 && p.y <= 2.99 + 1e-12);
            assert!(p.z >= 0.01 - 1e-12 && p.z <= 1.99 + 1e-12);
            t += 0.05;
        }
    }

    #[test]
    fn trajectory_time_out_of_range() {
        let traj = Trajectory::new(
            vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)],
            TrajectoryMode::Linear,
            1.0,
        )
        .unwrap();
        assert!(matches!(
            sample_trajectory(&traj, 1.5),
            Err(Error::Range { .. })
        ));
        assert!(matches!(
            sample_trajectory(&traj, -0.1),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn spherical_axis_cases() {
        let o = Vec3::new(0.0, 0.0, 0.0);
        let (az, el, d) = cartesian_to_spherical(Vec3::new(1.0, 0.0, 0.0), o).unwrap();
        assert_abs_diff_eq!(az, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(el, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d, 1.0, epsilon = 1e-12);

        let (az, el, d) = cartesian_to_spherical(Vec3::new(0.0, 0.0, 2.0), o).unwrap();
        assert_abs_diff_eq!(az, 0.0, epsilon = 1e-12); // pole convention
        assert_abs_diff_eq!(el, 90.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d, 2.0, epsilon = 1e-12);

        let (az, el, d) = cartesian_to_spherical(Vec3::new(1.0, 1.0, 0.0), o).unwrap();
        assert_abs_diff_eq!(az, 45.0, epsilon = 1e-12);
        assert_abs_diff_eq!(el, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d, std::f64::consts::SQRT_2, epsilon = 1e-6);
    }

    #[test]
    fn spherical_degenerate() {
        let p = Vec3::new(1.0, 2.0, 3.0);
        assert!(matches!(
            cartesian_to_spherical(p, p),
            Err(Error::DegenerateDirection)
        ));
    }

    #[test]
    fn azimuth_range_is_half_open() {
        // Directly behind: atan2 gives +180, contract wants -180.
        let (az, _, _) =
            cartesian_to_spherical(Vec3::new(-1.0, 0.0, 0.0), Vec3::splat(0.0)).unwrap();
        assert_abs_diff_eq!(az, -180.0, epsilon = 1e-12);
        assert_eq!(wrap_azimuth_deg(180.0), -180.0);
        assert_eq!(wrap_azimuth_deg(540.0), -180.0);
        assert_abs_diff_eq!(wrap_azimuth_deg(-190.0), 170.0, epsilon = 1e-12);
    }

    #[test]
    fn mic_presets() {
        let c = Vec3::new(2.5, 2.5, 0.5);
        let em32 = MicArray::preset("em32", c).unwrap();
        assert_eq!(em32.capsules.len(), 32);
        let tetra = MicArray::preset("tetra", c).unwrap();
        assert_eq!(tetra.capsules.len(), 4);
        for cap in &tetra.capsules {
            match cap.directivity {
                Directivity::Cardioid { look } => {
                    assert!((look.norm() - 1.0f64).abs() < 1e-9)
                }
                _ => panic!("tetra capsules are cardioid"),
            }
        }
        assert!(MicArray::preset("nope", c).is_err());
        // All em32 capsules sit on the 4.2 cm sphere.
        for cap in &em32.capsules {
            assert_abs_diff_eq!(cap.offset.norm(), 0.042, epsilon = 1e-12);
        }
    }

    #[test]
    fn mic_array_in_room() {
        let r = room();
        let arr = MicArray::preset("em32", Vec3::new(2.5, 1.5, 1.0)).unwrap();
        assert!(arr.validate_in_room(&r).is_ok());
        let outside = MicArray::preset("em32", Vec3::new(0.02, 1.5, 1.0)).unwrap();
        assert!(outside.validate_in_room(&r).is_err());
    }

    #[test]
    fn generic_scalar_f32() {
        let p: Vec3<f32> = Vec3::new(1.0, 1.0, 0.0);
        let (az, _, _) = cartesian_to_spherical(p, Vec3::splat(0.0)).unwrap();
        assert!((az - 45.0).abs() < 1e-4);
    }
}
