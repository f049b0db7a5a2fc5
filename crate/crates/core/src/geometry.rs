//! Planar primitives on the cylinder `T x R` (x has period 1, y is unbounded).

use crate::error::{contract, Error, Result};
use serde::Serialize;
use std::cmp::Ordering;
use std::ops::{Add, Mul, Sub};

/// Relative tolerance for parallelism and parameter clamping.
pub const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

/// Brings `x` into `[0, 1)`; the integer is the number of unit translations applied.
pub fn wrap_x(p: Point2) -> (Point2, i64) {
    let mut shift = -p.x.floor() as i64;
    let mut x = p.x + shift as f64;
    if x >= 1.0 {
        x -= 1.0;
        shift -= 1;
    }
    (Point2::new(x, p.y), shift)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitVec {
    pub vx: f64,
    pub vy: f64,
}

impl UnitVec {
    /// Normalizes `(vx, vy)`; panics on the zero vector.
    pub fn new(vx: f64, vy: f64) -> Self {
        let n = vx.hypot(vy);
        assert!(n > 0.0 && n.is_finite(), "cannot normalize ({vx}, {vy})");
        UnitVec { vx: vx / n, vy: vy / n }
    }

    pub fn from_angle(a: f64) -> Self {
        let (s, c) = a.sin_cos();
        UnitVec { vx: c, vy: s }
    }

    pub fn as_point(self) -> Point2 {
        Point2::new(self.vx, self.vy)
    }

    pub fn dot(self, o: UnitVec) -> f64 {
        self.vx * o.vx + self.vy * o.vy
    }

    pub fn norm_error(self) -> f64 {
        (self.vx * self.vx + self.vy * self.vy - 1.0).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
    pub length: f64,
}

impl Segment {
    pub fn new(a: Point2, b: Point2) -> Result<Self> {
        let length = (b - a).norm();
        if !(length > 0.0 && length.is_finite()) {
            return Err(contract("segment must have positive finite length"));
        }
        Ok(Segment { a, b, length })
    }

    pub fn dir(&self) -> Point2 {
        self.b - self.a
    }

    pub fn point_at(&self, t: f64) -> Point2 {
        self.a + self.dir() * t
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Segment {
        let d = Point2::new(dx, dy);
        Segment { a: self.a + d, b: self.b + d, length: self.length }
    }

    /// Sub-segment between parameters `t0 < t1` in `[0, 1]`.
    pub fn sub(&self, t0: f64, t1: f64) -> Result<Segment> {
        Segment::new(self.point_at(t0), self.point_at(t1))
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.a.x.min(self.b.x), self.a.x.max(self.b.x))
    }

    pub fn y_range(&self) -> (f64, f64) {
        (self.a.y.min(self.b.y), self.a.y.max(self.b.y))
    }

    fn key(&self) -> [f64; 4] {
        [self.a.x, self.a.y, self.b.x, self.b.y]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum IntersectionResult {
    None,
    Point(Point2),
    Overlap,
}

fn canonical<'s>(a: &'s Segment, b: &'s Segment) -> (&'s Segment, &'s Segment) {
    let ord = a
        .key()
        .iter()
        .zip(b.key().iter())
        .map(|(u, v)| u.total_cmp(v))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal);
    if ord == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    }
}

enum Raw {
    Parallel { overlap_len: f64, touch: Option<Point2> },
    Cross { t: f64, u: f64, p: Point2 },
}

fn raw_intersect(p: &Segment, q: &Segment) -> Raw {
    let d1 = p.dir();
    let d2 = q.dir();
    let r = q.a - p.a;
    let den = d1.cross(d2);
    let scale = p.length * q.length;
    if den.abs() <= EPS * scale {
        let tol = EPS * p.length.max(q.length).max(1.0);
        let dist = r.cross(d1).abs() / p.length;
        if dist > tol {
            return Raw::Parallel { overlap_len: -1.0, touch: None };
        }
        let l2 = p.length * p.length;
        let s0 = r.dot(d1) / l2;
        let s1 = (q.b - p.a).dot(d1) / l2;
        let lo = s0.min(s1).max(0.0);
        let hi = s0.max(s1).min(1.0);
        let overlap_len = (hi - lo) * p.length;
        let touch = if overlap_len >= -tol { Some(p.point_at(lo.clamp(0.0, 1.0))) } else { None };
        return Raw::Parallel { overlap_len, touch };
    }
    let t = r.cross(d2) / den;
    let u = r.cross(d1) / den;
    Raw::Cross { t, u, p: p.point_at(t) }
}

/// Intersection of two closed segments.
pub fn segment_intersect(a: &Segment, b: &Segment) -> IntersectionResult {
    let (p, q) = canonical(a, b);
    match raw_intersect(p, q) {
        Raw::Parallel { overlap_len, touch } => {
            let tol = EPS * p.length.max(q.length).max(1.0);
            if overlap_len > tol {
                IntersectionResult::Overlap
            } else if let Some(pt) = touch {
                IntersectionResult::Point(pt)
            } else {
                IntersectionResult::None
            }
        }
        Raw::Cross { t, u, p: pt } => {
            if (-EPS..=1.0 + EPS).contains(&t) && (-EPS..=1.0 + EPS).contains(&u) {
                IntersectionResult::Point(pt)
            } else {
                IntersectionResult::None
            }
        }
    }
}

/// Proper crossing: a single point interior to both segments.
///
/// Endpoint contacts are not crossings. Collinear overlap is an error.
pub fn crossing(a: &Segment, b: &Segment) -> Result<Option<Point2>> {
    let (p, q) = canonical(a, b);
    match raw_intersect(p, q) {
        Raw::Parallel { overlap_len, .. } => {
            if overlap_len > EPS * p.length.max(q.length).max(1.0) {
                Err(Error::OverlapDetected)
            } else {
                Ok(None)
            }
        }
        Raw::Cross { t, u, p: pt } => {
            let inside = |s: f64| s > EPS && s < 1.0 - EPS;
            Ok((inside(t) && inside(u)).then_some(pt))
        }
    }
}

/// Integer offsets `i` for which `[lo_b + i, hi_b + i]` meets `[lo_a, hi_a]`.
pub(crate) fn offsets(a: (f64, f64), b: (f64, f64)) -> std::ops::RangeInclusive<i64> {
    let lo = (a.0 - b.1 - 1e-9).ceil() as i64;
    let hi = (a.1 - b.0 + 1e-9).floor() as i64;
    lo..=hi
}

/// Crossings of `a` with the translates `b + (i, k)`, all horizontal wraps `i`, `k` in `ks`.
pub fn translate_count(a: &Segment, b: &Segment, ks: std::ops::RangeInclusive<i64>) -> Result<u32> {
    let yk = offsets(a.y_range(), b.y_range());
    let k_lo = *ks.start().max(yk.start());
    let k_hi = *ks.end().min(yk.end());
    let mut count = 0;
    for i in offsets(a.x_range(), b.x_range()) {
        for k in k_lo..=k_hi {
            if crossing(a, &b.translate(i as f64, k as f64))?.is_some() {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Number of crossings between `a` and the translates `b + (i, k)`, `|k| <= cell_span`.
///
/// Horizontal wraps are enumerated as integer translates, so no splitting is needed.
pub fn modz_intersection_count(a: &Segment, b: &Segment, cell_span: i64) -> Result<u32> {
    if cell_span < 0 {
        return Err(contract("cell_span must be non-negative"));
    }
    translate_count(a, b, -cell_span..=cell_span)
}

/// Crossings of the projections of `a` and `b` on the torus `R^2 / Z^2`.
pub fn torus_intersection_count(a: &Segment, b: &Segment) -> Result<u32> {
    translate_count(a, b, i64::MIN..=i64::MAX)
}
