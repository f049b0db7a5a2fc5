//! Z-periodic Lorentz gas on the cylinder with disk scatterers.
//!
//! A collision state lives on the boundary of one copy of a disk: the copy
//! shifted by `(0, cell)`. All flight geometry is done in the frame of the
//! departing copy's center, so positions stay O(1) whatever the cell.

use crate::error::{contract, Error, Result};
use crate::geometry::{wrap_x, Point2, Segment, UnitVec};
use crate::seed::par_streams;
use rand::Rng;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Flights shorter than this are not hits.
pub const T_MIN: f64 = 1e-12;
/// Hits whose ray-circle discriminant is below this are tangential.
pub const DISC_MIN: f64 = 1e-12;
const CLEARANCE: f64 = 1e-9;
const MARCH: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Disk {
    pub center: Point2,
    pub radius: f64,
    pub id: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BilliardTable {
    pub disks: Vec<Disk>,
    pub tau_max: f64,
    pub quotient_area: f64,
    pub boundary_length: f64,
    #[serde(skip)]
    cumulative: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollisionState {
    pub disk_id: usize,
    pub s: f64,
    pub theta: f64,
    pub cell: i64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Hit {
    tau: f64,
    disk: usize,
    i: i64,
    k: i64,
    disc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Flight {
    pub tau: f64,
    pub q: Point2,
    pub disk_id: usize,
    pub cell_shift: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableReport {
    pub disks: usize,
    pub min_clearance: f64,
    pub max_flight: f64,
    pub rays: usize,
    pub tau_max: f64,
}

/// `n + 1` states, `n` flight times and `n` lifted arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub states: Vec<CollisionState>,
    pub taus: Vec<f64>,
    pub arcs: Vec<Segment>,
}

pub fn reflect(v: UnitVec, n: UnitVec) -> UnitVec {
    let d = 2.0 * v.dot(n);
    UnitVec { vx: v.vx - d * n.vx, vy: v.vy - d * n.vy }
}

/// The time-reversal involution on the section.
pub fn kappa(x: &CollisionState) -> CollisionState {
    CollisionState { theta: -x.theta, ..*x }
}

impl BilliardTable {
    /// Builds a table from `(cx, cy, r)` triples with centers in the unit cell.
    pub fn new(disks: &[(f64, f64, f64)], tau_max: f64) -> Result<Self> {
        if !(tau_max > 0.0 && tau_max.is_finite()) {
            return Err(Error::Config(format!("tau_max must be positive, got {tau_max}")));
        }
        let mut out = Vec::with_capacity(disks.len());
        for (index, &(cx, cy, r)) in disks.iter().enumerate() {
            let bad = |reason: &str| Error::InvalidDisk { index, reason: reason.to_string() };
            if !(r > 0.0 && r.is_finite()) {
                return Err(bad(&format!("radius must be positive, got {r}")));
            }
            if !((0.0..1.0).contains(&cx) && (0.0..1.0).contains(&cy)) {
                return Err(bad(&format!("center ({cx}, {cy}) outside the unit cell")));
            }
            if 2.0 * r >= 1.0 {
                return Err(bad("disk meets its own periodic copies"));
            }
            out.push(Disk { center: Point2::new(cx, cy), radius: r, id: index });
        }
        let boundary_length: f64 = out.iter().map(|d| TAU * d.radius).sum();
        let quotient_area = 1.0 - out.iter().map(|d| PI * d.radius * d.radius).sum::<f64>();
        let mut acc = 0.0;
        let cumulative = out
            .iter()
            .map(|d| {
                acc += TAU * d.radius;
                acc
            })
            .collect();
        Ok(BilliardTable { disks: out, tau_max, quotient_area, boundary_length, cumulative })
    }

    /// Two disks per cell, both corridors and all rational corridors closed.
    pub fn default_table() -> Self {
        Self::new(&DEFAULT_DISKS, DEFAULT_TAU_MAX).expect("default table is valid")
    }

    /// Bound on `|phi|`.
    pub fn d_bound(&self) -> i64 {
        self.tau_max.ceil() as i64 + 1
    }

    /// Total collision measure `mu(M)` of one cell under `cos(theta) dr dtheta`.
    pub fn gamma(&self) -> f64 {
        2.0 * self.boundary_length
    }

    /// `pi * area / perimeter`.
    pub fn mean_free_path_formula(&self) -> f64 {
        PI * self.quotient_area / self.boundary_length
    }

    fn rmax(&self) -> f64 {
        self.disks.iter().map(|d| d.radius).fold(0.0, f64::max)
    }

    /// Pairwise disjointness of all periodic copies; returns the smallest clearance.
    pub fn check_disjoint(&self) -> Result<f64> {
        let mut min_gap = f64::INFINITY;
        for (a, da) in self.disks.iter().enumerate() {
            for (b, db) in self.disks.iter().enumerate().skip(a) {
                for dx in -2i64..=2 {
                    for dy in -2i64..=2 {
                        if a == b && dx == 0 && dy == 0 {
                            continue;
                        }
                        let c = db.center + Point2::new(dx as f64, dy as f64);
                        let gap = (c - da.center).norm() - da.radius - db.radius;
                        if gap < CLEARANCE {
                            return Err(Error::OverlappingObstacles { a, b, offset: (dx, dy) });
                        }
                        min_gap = min_gap.min(gap);
                    }
                }
            }
        }
        Ok(min_gap)
    }

    /// Earliest hit of the ray `origin + t v` on a disk copy, with copy centers
    /// taken relative to `frame`. Searches `t <= limit` in unit-length slabs.
    fn cast(&self, origin: Point2, v: UnitVec, frame: Point2, exclude: Option<(usize, i64, i64)>, limit: f64) -> Option<Hit> {
        let rmax = self.rmax();
        let mut best: Option<Hit> = None;
        let mut t0 = 0.0;
        while t0 < limit {
            let t1 = (t0 + MARCH).min(limit);
            let p0 = origin + v.as_point() * t0;
            let p1 = origin + v.as_point() * t1;
            let lo = Point2::new(p0.x.min(p1.x) - rmax, p0.y.min(p1.y) - rmax);
            let hi = Point2::new(p0.x.max(p1.x) + rmax, p0.y.max(p1.y) + rmax);
            self.scan_box(origin, v, frame, exclude, lo, hi, &mut best);
            if let Some(h) = best {
                if h.tau <= t1 {
                    return (h.tau <= limit).then_some(h);
                }
            }
            t0 = t1;
        }
        best.filter(|h| h.tau <= limit)
    }

    #[allow(clippy::too_many_arguments)]
    fn scan_box(&self, origin: Point2, v: UnitVec, frame: Point2, exclude: Option<(usize, i64, i64)>, lo: Point2, hi: Point2, best: &mut Option<Hit>) {
        for (j, d) in self.disks.iter().enumerate() {
            let base = d.center - frame;
            let i_lo = (lo.x - base.x).ceil() as i64;
            let i_hi = (hi.x - base.x).floor() as i64;
            let k_lo = (lo.y - base.y).ceil() as i64;
            let k_hi = (hi.y - base.y).floor() as i64;
            for i in i_lo..=i_hi {
                for k in k_lo..=k_hi {
                    if exclude == Some((j, i, k)) {
                        continue;
                    }
                    let c = base + Point2::new(i as f64, k as f64);
                    if let Some((tau, disc)) = ray_circle(origin, v, c, d.radius) {
                        if best.is_none_or(|h| tau < h.tau) {
                            *best = Some(Hit { tau, disk: j, i, k, disc });
                        }
                    }
                }
            }
        }
    }

    /// Exhaustive search over every copy whose center lies in the bounding box of the whole ray.
    fn cast_exhaustive(&self, origin: Point2, v: UnitVec, frame: Point2, exclude: Option<(usize, i64, i64)>, limit: f64) -> Option<Hit> {
        let rmax = self.rmax();
        let p1 = origin + v.as_point() * limit;
        let lo = Point2::new(origin.x.min(p1.x) - rmax, origin.y.min(p1.y) - rmax);
        let hi = Point2::new(origin.x.max(p1.x) + rmax, origin.y.max(p1.y) + rmax);
        let mut best = None;
        self.scan_box(origin, v, frame, exclude, lo, hi, &mut best);
        best.filter(|h| h.tau <= limit)
    }

    fn flight_length_for_report(&self, origin: Point2, v: UnitVec, frame: Point2, exclude: Option<(usize, i64, i64)>) -> f64 {
        self.cast(origin, v, frame, exclude, 1e4).map_or(f64::INFINITY, |h| h.tau)
    }

    /// First obstacle hit from a point outside all obstacles.
    pub fn free_flight(&self, q: Point2, v: UnitVec) -> Result<Flight> {
        let cell0 = q.y.floor();
        let origin = Point2::new(q.x, q.y - cell0);
        let frame = Point2::new(0.0, 0.0);
        let hit = self.cast(origin, v, frame, None, self.tau_max).ok_or_else(|| Error::HorizonViolation {
            max_flight: self.flight_length_for_report(origin, v, frame, None),
        })?;
        if hit.disc < DISC_MIN {
            return Err(Error::TangentialHit { disc: hit.disc });
        }
        let end = q + v.as_point() * hit.tau;
        Ok(Flight { tau: hit.tau, q: wrap_x(end).0, disk_id: hit.disk, cell_shift: hit.k })
    }

    /// Same as [`free_flight`](Self::free_flight) with exhaustive enumeration of copies.
    pub fn free_flight_exhaustive(&self, q: Point2, v: UnitVec) -> Result<Flight> {
        let cell0 = q.y.floor();
        let origin = Point2::new(q.x, q.y - cell0);
        let hit = self
            .cast_exhaustive(origin, v, Point2::new(0.0, 0.0), None, self.tau_max)
            .ok_or(Error::HorizonViolation { max_flight: f64::INFINITY })?;
        let end = q + v.as_point() * hit.tau;
        Ok(Flight { tau: hit.tau, q: wrap_x(end).0, disk_id: hit.disk, cell_shift: hit.k })
    }

    /// Outward normal, position relative to the disk center, and outgoing velocity.
    pub fn local_frame(&self, x: &CollisionState) -> (UnitVec, Point2, UnitVec) {
        let d = &self.disks[x.disk_id];
        let n = UnitVec::from_angle(x.s / d.radius);
        let (st, ct) = x.theta.sin_cos();
        let v = UnitVec { vx: ct * n.vx - st * n.vy, vy: st * n.vx + ct * n.vy };
        (n, n.as_point() * d.radius, v)
    }

    /// Lifted position of a collision state.
    pub fn position(&self, x: &CollisionState) -> Point2 {
        let (_, q, _) = self.local_frame(x);
        let c = self.disks[x.disk_id].center;
        Point2::new(c.x + q.x, c.y + x.cell as f64 + q.y)
    }

    pub fn velocity(&self, x: &CollisionState) -> UnitVec {
        self.local_frame(x).2
    }

    /// The billiard map `T`: new state, flight time and the traversed arc in lifted coordinates.
    pub fn billiard_map(&self, x: &CollisionState) -> Result<(CollisionState, f64, Segment)> {
        let (_, q, v) = self.local_frame(x);
        let frame = self.disks[x.disk_id].center;
        let exclude = Some((x.disk_id, 0, 0));
        let hit = self.cast(q, v, frame, exclude, self.tau_max).ok_or_else(|| Error::HorizonViolation {
            max_flight: self.flight_length_for_report(q, v, frame, exclude),
        })?;
        if hit.disc < DISC_MIN {
            return Err(Error::TangentialHit { disc: hit.disc });
        }
        let dj = &self.disks[hit.disk];
        let c = dj.center - frame + Point2::new(hit.i as f64, hit.k as f64);
        let p = q + v.as_point() * hit.tau - c;
        let n = UnitVec::new(p.x, p.y);
        let w = reflect(v, n);
        let theta = (n.vx * w.vy - n.vy * w.vx).atan2(n.dot(w));
        let mut alpha = n.vy.atan2(n.vx);
        if alpha < 0.0 {
            alpha += TAU;
        }
        let mut s = dj.radius * alpha;
        if s >= TAU * dj.radius {
            s = 0.0;
        }
        let next = CollisionState { disk_id: hit.disk, s, theta, cell: x.cell + hit.k };
        let start = Point2::new(frame.x + q.x, frame.y + x.cell as f64 + q.y);
        let (a, _) = wrap_x(start);
        let arc = Segment::new(a, a + v.as_point() * hit.tau)?;
        Ok((next, hit.tau, arc))
    }

    /// `T~ = kappa . T . kappa`, the inverse of the billiard map.
    pub fn inverse_map(&self, x: &CollisionState) -> Result<CollisionState> {
        let (y, _, _) = self.billiard_map(&kappa(x))?;
        Ok(kappa(&y))
    }

    /// Cell displacement `phi(x) = cell(T x) - cell(x)`.
    pub fn step_phi(&self, x: &CollisionState) -> Result<i64> {
        Ok(self.billiard_map(x)?.0.cell - x.cell)
    }

    /// A draw from the normalized collision measure `cos(theta) dr dtheta / (2 L)`.
    pub fn sample_mu_bar<R: Rng + ?Sized>(&self, rng: &mut R) -> CollisionState {
        let u = rng.random::<f64>() * self.boundary_length;
        let disk_id = self.cumulative.iter().position(|&c| u < c).unwrap_or(self.disks.len() - 1);
        let before = if disk_id == 0 { 0.0 } else { self.cumulative[disk_id - 1] };
        let s = (u - before).clamp(0.0, TAU * self.disks[disk_id].radius * (1.0 - f64::EPSILON));
        let theta = (2.0 * rng.random::<f64>() - 1.0).asin();
        CollisionState { disk_id, s, theta, cell: 0 }
    }

    /// Orbit of `n` collisions from `x0`.
    pub fn trace(&self, x0: &CollisionState, n: usize) -> Result<Orbit> {
        let mut states = Vec::with_capacity(n + 1);
        let mut taus = Vec::with_capacity(n);
        let mut arcs = Vec::with_capacity(n);
        states.push(*x0);
        let mut x = *x0;
        for _ in 0..n {
            let (y, tau, arc) = self.billiard_map(&x)?;
            states.push(y);
            taus.push(tau);
            arcs.push(arc);
            x = y;
        }
        Ok(Orbit { states, taus, arcs })
    }

    /// Orbit from a fresh invariant-measure start, resampling after tangential hits.
    /// Returns the orbit and the number of discarded starts.
    pub fn trace_from_mu_bar<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<(Orbit, u64)> {
        let mut resampled = 0;
        loop {
            let x0 = self.sample_mu_bar(rng);
            match self.trace(&x0, n) {
                Ok(o) => return Ok((o, resampled)),
                Err(Error::TangentialHit { .. }) => resampled += 1,
                Err(e) => return Err(e),
            }
        }
    }

    /// Monte Carlo mean free flight under the invariant measure: `(mean, stderr, resampled)`.
    pub fn mean_free_path(&self, n_samples: usize, master: u64) -> Result<(f64, f64, u64)> {
        if n_samples == 0 {
            return Err(contract("mean_free_path needs n_samples > 0"));
        }
        let blocks = block_sizes(n_samples, 10_000);
        let parts = par_streams(master, blocks.len(), |id, rng| -> Result<(f64, f64, u64)> {
            let (mut s1, mut s2, mut bad) = (0.0, 0.0, 0);
            let mut done = 0;
            while done < blocks[id as usize] {
                let x = self.sample_mu_bar(rng);
                match self.billiard_map(&x) {
                    Ok((_, tau, _)) => {
                        s1 += tau;
                        s2 += tau * tau;
                        done += 1;
                    }
                    Err(Error::TangentialHit { .. }) => bad += 1,
                    Err(e) => return Err(e),
                }
            }
            Ok((s1, s2, bad))
        });
        let (mut s1, mut s2, mut bad) = (0.0, 0.0, 0);
        for p in parts {
            let p = p?;
            s1 += p.0;
            s2 += p.1;
            bad += p.2;
        }
        let n = n_samples as f64;
        let mean = s1 / n;
        let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
        Ok((mean, (var / n).sqrt(), bad))
    }

    /// Disjointness of copies plus dense ray casting for the horizon bound.
    pub fn validate(&self, angle_grid: usize) -> Result<TableReport> {
        validate_table(self, angle_grid)
    }
}

/// Boundary points per disk used by [`validate_table`].
pub const VALIDATION_POINTS: usize = 96;

pub fn validate_table(t: &BilliardTable, angle_grid: usize) -> Result<TableReport> {
    if angle_grid < 10_000 {
        return Err(contract("angle_grid must be at least 10^4"));
    }
    if t.disks.is_empty() {
        return Err(Error::HorizonViolation { max_flight: f64::INFINITY });
    }
    let min_clearance = t.check_disjoint()?;
    let limit = (10.0 * t.tau_max).max(100.0);
    let jobs: Vec<(usize, usize)> = (0..t.disks.len()).flat_map(|d| (0..VALIDATION_POINTS).map(move |p| (d, p))).collect();
    use rayon::prelude::*;
    let maxima: Vec<f64> = jobs
        .par_iter()
        .map(|&(d, p)| {
            let disk = &t.disks[d];
            let n = UnitVec::from_angle(TAU * (p as f64 + 0.5) / VALIDATION_POINTS as f64);
            let q = n.as_point() * disk.radius;
            let mut worst: f64 = 0.0;
            for a in 0..angle_grid {
                let th = -FRAC_PI_2 + PI * (a as f64 + 0.5) / angle_grid as f64;
                let (st, ct) = th.sin_cos();
                let v = UnitVec { vx: ct * n.vx - st * n.vy, vy: st * n.vx + ct * n.vy };
                let f = t.cast(q, v, disk.center, Some((d, 0, 0)), limit).map_or(f64::INFINITY, |h| h.tau);
                worst = worst.max(f);
            }
            worst
        })
        .collect();
    let max_flight = maxima.into_iter().fold(0.0, f64::max);
    if max_flight > t.tau_max {
        return Err(Error::HorizonViolation { max_flight });
    }
    Ok(TableReport { disks: t.disks.len(), min_clearance, max_flight, rays: t.disks.len() * VALIDATION_POINTS * angle_grid, tau_max: t.tau_max })
}

/// Default scatterers `(cx, cy, r)`.
pub const DEFAULT_DISKS: [(f64, f64, f64); 2] = [(0.25, 0.25, 0.40), (0.75, 0.75, 0.20)];
pub const DEFAULT_TAU_MAX: f64 = 2.5;

/// Entry time and discriminant of the ray `o + t v` on the circle `(c, r)`.
fn ray_circle(o: Point2, v: UnitVec, c: Point2, r: f64) -> Option<(f64, f64)> {
    let w = o - c;
    let b = v.vx * w.x + v.vy * w.y;
    let cc = w.dot(w) - r * r;
    let disc = b * b - cc;
    if disc < 0.0 {
        return None;
    }
    let t = -b - disc.sqrt();
    (t > T_MIN).then_some((t, disc))
}

/// Splits `n` into blocks of at most `block`, so per-stream work does not depend on the thread count.
pub fn block_sizes(n: usize, block: usize) -> Vec<usize> {
    let mut v = vec![block; n / block];
    if !n.is_multiple_of(block) {
        v.push(n % block);
    }
    v
}
