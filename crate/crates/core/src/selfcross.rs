//! Self-intersections of billiard trajectories.
//!
//! Counting conventions:
//! - only proper crossings count (endpoint contacts do not), so the shared
//!   collision point of consecutive arcs never counts;
//! - `nu_n` counts unordered arc pairs `i < j`, weighted by the number of
//!   crossing points. The limit theorems are stated for ordered pairs, which
//!   is `2 nu_n` (see [`ordered`]);
//! - on the cylinder, arcs are compared with all their horizontal wraps; on
//!   the torus also with all vertical translates.

use crate::billiard::{BilliardTable, CollisionState, Orbit};
use crate::error::{contract, Error, Result};
use crate::geometry::{translate_count, Segment};
use crate::seed::par_streams;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryArc {
    pub seg: Segment,
    pub start_cell: i64,
    pub end_cell: i64,
    pub t_start: f64,
    pub t_end: f64,
    pub index: usize,
}

impl TrajectoryArc {
    pub fn new(seg: Segment, t_start: f64, index: usize) -> Self {
        TrajectoryArc {
            seg,
            start_cell: seg.a.y.floor() as i64,
            end_cell: seg.b.y.floor() as i64,
            t_start,
            t_end: t_start + seg.length,
            index,
        }
    }

    pub fn translate(&self, k: i64) -> Self {
        TrajectoryArc::new(self.seg.translate(0.0, k as f64), self.t_start, self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CrossingRecord {
    pub i: usize,
    pub j: usize,
    pub k: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Topology {
    /// `T x R`: horizontal wraps only.
    Cylinder,
    /// `T^2`: horizontal and vertical wraps.
    Torus,
}

pub fn arcs_from_segments(segs: &[Segment]) -> Vec<TrajectoryArc> {
    let mut t = 0.0;
    segs.iter()
        .enumerate()
        .map(|(i, s)| {
            let a = TrajectoryArc::new(*s, t, i);
            t = a.t_end;
            a
        })
        .collect()
}

pub fn arcs_from_orbit(orbit: &Orbit) -> Vec<TrajectoryArc> {
    arcs_from_segments(&orbit.arcs)
}

/// Ordered-pair count from an unordered one.
pub fn ordered(nu: u64) -> u64 {
    2 * nu
}

fn pair_count(a: &Segment, b: &Segment, topo: Topology) -> Result<u32> {
    match topo {
        Topology::Cylinder => translate_count(a, b, 0..=0),
        Topology::Torus => translate_count(a, b, i64::MIN..=i64::MAX),
    }
}

/// Uniform grid over the cylinder or torus; an arc sits in every bucket its bounding box meets.
struct Grid {
    topo: Topology,
    per_unit: i64,
    y_base: i64,
    buckets: Vec<Vec<u32>>,
}

const BUCKETS_PER_UNIT: i64 = 4;
const PAD: f64 = 1e-9;

impl Grid {
    fn new(arcs: &[TrajectoryArc], topo: Topology) -> Self {
        let per_unit = BUCKETS_PER_UNIT;
        let (y_base, ny) = match topo {
            Topology::Torus => (0, per_unit),
            Topology::Cylinder => {
                let lo = arcs.iter().map(|a| a.seg.y_range().0).fold(f64::INFINITY, f64::min);
                let hi = arcs.iter().map(|a| a.seg.y_range().1).fold(f64::NEG_INFINITY, f64::max);
                if arcs.is_empty() {
                    (0, 1)
                } else {
                    let b0 = ((lo - PAD) * per_unit as f64).floor() as i64;
                    let b1 = ((hi + PAD) * per_unit as f64).floor() as i64;
                    (b0, b1 - b0 + 1)
                }
            }
        };
        Grid { topo, per_unit, y_base, buckets: vec![Vec::new(); (per_unit * ny) as usize] }
    }

    fn cells(&self, s: &Segment, out: &mut Vec<usize>) {
        out.clear();
        let p = self.per_unit as f64;
        let (x0, x1) = s.x_range();
        let (y0, y1) = s.y_range();
        let span = |lo: f64, hi: f64| (((lo - PAD) * p).floor() as i64, ((hi + PAD) * p).floor() as i64);
        let (bx0, bx1) = span(x0, x1);
        let (by0, by1) = span(y0, y1);
        let xs: Vec<i64> = if bx1 - bx0 + 1 >= self.per_unit {
            (0..self.per_unit).collect()
        } else {
            (bx0..=bx1).map(|b| b.rem_euclid(self.per_unit)).collect()
        };
        let ys: Vec<i64> = match self.topo {
            Topology::Cylinder => (by0..=by1).map(|b| b - self.y_base).collect(),
            Topology::Torus => {
                if by1 - by0 + 1 >= self.per_unit {
                    (0..self.per_unit).collect()
                } else {
                    (by0..=by1).map(|b| b.rem_euclid(self.per_unit)).collect()
                }
            }
        };
        for &y in &ys {
            for &x in &xs {
                out.push((y * self.per_unit + x) as usize);
            }
        }
    }
}

/// Crossing records of all arc pairs via the bucket grid. `span` bounds the
/// start-cell gap of any candidate pair on the cylinder.
pub fn crossing_records(arcs: &[TrajectoryArc], topo: Topology, span: Option<i64>) -> Result<Vec<CrossingRecord>> {
    let mut grid = Grid::new(arcs, topo);
    let mut mark = vec![usize::MAX; arcs.len()];
    let mut cells = Vec::new();
    let mut out = Vec::new();
    for (i, a) in arcs.iter().enumerate() {
        grid.cells(&a.seg, &mut cells);
        for &c in &cells {
            for &j in &grid.buckets[c] {
                let j = j as usize;
                if mark[j] == i {
                    continue;
                }
                mark[j] = i;
                if let Some(span) = span {
                    let gap = (a.start_cell - arcs[j].start_cell).abs();
                    if gap > span {
                        return Err(Error::SpanTooSmall { gap, span });
                    }
                }
                let k = pair_count(&arcs[j].seg, &a.seg, topo)?;
                if k > 0 {
                    out.push(CrossingRecord { i: j, j: i, k });
                }
            }
        }
        for &c in &cells {
            grid.buckets[c].push(i as u32);
        }
    }
    out.sort_unstable_by_key(|r| (r.i, r.j));
    Ok(out)
}

/// Unordered self-intersection count of the first `arcs.len()` arcs on the cylinder.
pub fn nu_n(arcs: &[TrajectoryArc], cell_span: i64) -> Result<(u64, Vec<CrossingRecord>)> {
    if cell_span < 0 {
        return Err(contract("cell_span must be non-negative"));
    }
    let recs = crossing_records(arcs, Topology::Cylinder, Some(cell_span))?;
    Ok((recs.iter().map(|r| r.k as u64).sum(), recs))
}

/// All-pairs version of [`nu_n`].
pub fn nu_n_bruteforce(arcs: &[TrajectoryArc], cell_span: i64) -> Result<u64> {
    if arcs.len() > 10_000 {
        return Err(contract("brute force is limited to 10^4 arcs"));
    }
    let mut total = 0u64;
    for j in 0..arcs.len() {
        for i in 0..j {
            let k = pair_count(&arcs[i].seg, &arcs[j].seg, Topology::Cylinder)? as u64;
            if k > 0 && (arcs[i].start_cell - arcs[j].start_cell).abs() > cell_span {
                return Err(Error::SpanTooSmall { gap: (arcs[i].start_cell - arcs[j].start_cell).abs(), span: cell_span });
            }
            total += k;
        }
    }
    Ok(total)
}

/// Unordered count of the arcs projected to the torus.
pub fn nu_bar_n(arcs: &[TrajectoryArc]) -> Result<u64> {
    Ok(crossing_records(arcs, Topology::Torus, None)?.iter().map(|r| r.k as u64).sum())
}

pub fn nu_bar_n_bruteforce(arcs: &[TrajectoryArc]) -> Result<u64> {
    let mut total = 0u64;
    for j in 0..arcs.len() {
        for i in 0..j {
            total += pair_count(&arcs[i].seg, &arcs[j].seg, Topology::Torus)? as u64;
        }
    }
    Ok(total)
}

/// `nu_m` for every `m` in `grid`, from the records of a longer orbit.
pub fn prefix_counts(records: &[CrossingRecord], grid: &[usize]) -> Vec<u64> {
    grid.iter().map(|&m| records.iter().filter(|r| r.j < m).map(|r| r.k as u64).sum()).collect()
}

/// Arcs restricted to the flow-time window `[t0, t1]`.
pub fn clip_arcs(arcs: &[TrajectoryArc], t0: f64, t1: f64) -> Result<Vec<TrajectoryArc>> {
    let mut out = Vec::new();
    for a in arcs {
        if a.t_end <= t0 || a.t_start >= t1 {
            continue;
        }
        let s0 = ((t0 - a.t_start) / a.seg.length).max(0.0);
        let s1 = ((t1 - a.t_start) / a.seg.length).min(1.0);
        if s1 <= s0 {
            continue;
        }
        let seg = if s0 == 0.0 && s1 == 1.0 { a.seg } else { a.seg.sub(s0, s1)? };
        let mut c = TrajectoryArc::new(seg, a.t_start + s0 * a.seg.length, a.index);
        c.t_end = a.t_start + s1 * a.seg.length;
        out.push(c);
    }
    Ok(out)
}

/// `N_t`: pairs of times `0 <= s < u <= t` with the same position on the cylinder.
pub fn continuous_count(arcs: &[TrajectoryArc], t: f64) -> Result<u64> {
    continuous_count_window(arcs, 0.0, t)
}

/// Self-intersections of the trajectory restricted to flow times `[t0, t0 + t]`.
pub fn continuous_count_window(arcs: &[TrajectoryArc], t0: f64, t: f64) -> Result<u64> {
    if t < 0.0 {
        return Err(contract("t must be non-negative"));
    }
    if let Some(last) = arcs.last() {
        if t0 + t > last.t_end + 1e-9 {
            return Err(contract("t exceeds the trajectory time"));
        }
    }
    if t == 0.0 {
        return Ok(0);
    }
    let clipped = clip_arcs(arcs, t0, t0 + t)?;
    Ok(crossing_records(&clipped, Topology::Cylinder, None)?.iter().map(|r| r.k as u64).sum())
}

#[derive(Debug, Clone, Serialize)]
pub struct VkProfile {
    /// Estimate of `mu(V_k)` for each observed `k`.
    pub measure: BTreeMap<u32, f64>,
    pub max_k: u32,
    /// `sum_k k mu(V_k)`, expected to be `4 tau(x)`.
    pub weighted_sum: f64,
    pub tau: f64,
    pub n_samples: usize,
}

/// Monte Carlo estimate of `mu(V_k^{(x)})`: `y` is drawn from the normalized measure and
/// every vertical translate of its arc is compared with the arc of `x`.
pub fn vk_profile(table: &BilliardTable, x: &CollisionState, n_samples: usize, master: u64) -> Result<VkProfile> {
    if n_samples == 0 {
        return Err(contract("vk_profile needs n_samples > 0"));
    }
    let x0 = CollisionState { cell: 0, ..*x };
    let (_, tau, ax) = table.billiard_map(&x0)?;
    let blocks = crate::billiard::block_sizes(n_samples, 10_000);
    let parts = par_streams(master, blocks.len(), |id, rng| -> Result<BTreeMap<u32, u64>> {
        let mut hist = BTreeMap::new();
        let mut done = 0;
        while done < blocks[id as usize] {
            let y = table.sample_mu_bar(rng);
            let ay = match table.billiard_map(&y) {
                Ok((_, _, s)) => s,
                Err(Error::TangentialHit { .. }) => continue,
                Err(e) => return Err(e),
            };
            done += 1;
            let ks = crate::geometry::offsets(ax.y_range(), ay.y_range());
            for l in ks {
                let c = match translate_count(&ax, &ay, l..=l) {
                    Ok(c) => c,
                    Err(Error::OverlapDetected) => continue,
                    Err(e) => return Err(e),
                };
                if c > 0 {
                    *hist.entry(c).or_insert(0) += 1;
                }
            }
        }
        Ok(hist)
    });
    let mut total: BTreeMap<u32, u64> = BTreeMap::new();
    for p in parts {
        for (k, c) in p? {
            *total.entry(k).or_insert(0) += c;
        }
    }
    let gamma = table.gamma();
    let measure: BTreeMap<u32, f64> = total.iter().map(|(&k, &c)| (k, gamma * c as f64 / n_samples as f64)).collect();
    let weighted_sum = measure.iter().map(|(&k, &m)| k as f64 * m).sum();
    Ok(VkProfile { max_k: total.keys().last().copied().unwrap_or(0), measure, weighted_sum, tau, n_samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;
    use crate::seed::stream_rng;

    fn seg(ax: f64, ay: f64, bx: f64, by: f64) -> Segment {
        Segment::new(Point2::new(ax, ay), Point2::new(bx, by)).unwrap()
    }

    #[test]
    fn x_shape_counts_once() {
        let arcs = arcs_from_segments(&[seg(0.1, 0.1, 0.9, 0.9), seg(0.9, 0.9, 0.8, 0.1), seg(0.8, 0.1, 0.1, 0.9)]);
        let (nu, recs) = nu_n(&arcs, 4).unwrap();
        assert_eq!(nu, 1);
        assert_eq!(recs, vec![CrossingRecord { i: 0, j: 2, k: 1 }]);
        assert_eq!(nu_n(&arcs[..2], 4).unwrap().0, 0);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(nu_n_bruteforce(&[], 0), Ok(0));
        let one = arcs_from_segments(&[seg(0.1, 0.1, 0.7, 2.0)]);
        assert_eq!(nu_n_bruteforce(&one, 0), Ok(0));
        assert_eq!(nu_n(&one, 0).unwrap().0, 0);
        let s = [seg(0.1, 0.1, 0.5, 0.4), seg(0.5, 0.4, 0.2, 0.9)];
        let twice = arcs_from_segments(&[s[0], s[1], s[0], s[1]]);
        assert_eq!(nu_n_bruteforce(&twice, 4), Err(Error::OverlapDetected));
        assert_eq!(nu_n(&twice, 4).map(|x| x.0), Err(Error::OverlapDetected));
    }

    #[test]
    fn hashed_equals_bruteforce_on_orbits() {
        let t = BilliardTable::default_table();
        for s in 0..20 {
            let (o, _) = t.trace_from_mu_bar(&mut stream_rng(s, 0), 200).unwrap();
            let arcs = arcs_from_orbit(&o);
            let (nu, _) = nu_n(&arcs, 1000).unwrap();
            assert_eq!(nu, nu_n_bruteforce(&arcs, 1000).unwrap());
            assert_eq!(nu_bar_n(&arcs).unwrap(), nu_bar_n_bruteforce(&arcs).unwrap());
            assert!(nu_bar_n(&arcs).unwrap() >= nu);
        }
    }

    #[test]
    fn span_guard() {
        let arcs = arcs_from_segments(&[seg(0.1, 0.0, 0.9, 2.5), seg(0.9, 2.5, 0.1, 0.3)]);
        assert!(matches!(nu_n(&arcs, 1), Err(Error::SpanTooSmall { .. })));
        assert!(nu_n(&arcs, 2).is_ok());
    }

    #[test]
    fn sandwich_at_phase_zero() {
        let t = BilliardTable::default_table();
        for s in 0..10 {
            let (o, _) = t.trace_from_mu_bar(&mut stream_rng(s, 1), 400).unwrap();
            let arcs = arcs_from_orbit(&o);
            let total = arcs.last().unwrap().t_end;
            let time = 0.7 * total;
            let n_t = arcs.iter().filter(|a| a.t_end <= time).count();
            let lo = nu_n(&arcs[..n_t], 1000).unwrap().0;
            let hi = nu_n(&arcs[..n_t + 1], 1000).unwrap().0;
            let nt = continuous_count(&arcs, time).unwrap();
            assert!(lo <= nt && nt <= hi, "{lo} {nt} {hi}");
            assert_eq!(continuous_count(&arcs, 0.0), Ok(0));
        }
    }

    #[test]
    fn truncation_drops_late_crossings() {
        let t = BilliardTable::default_table();
        let (o, _) = t.trace_from_mu_bar(&mut stream_rng(99, 0), 300).unwrap();
        let arcs = arcs_from_orbit(&o);
        let total = arcs.last().unwrap().t_end;
        let mut prev = 0;
        for f in [0.1, 0.3, 0.5, 0.8, 1.0] {
            let c = continuous_count(&arcs, f * total).unwrap();
            let clipped = clip_arcs(&arcs, 0.0, f * total).unwrap();
            assert_eq!(c, nu_n_bruteforce(&clipped, 1000).unwrap());
            assert!(c >= prev);
            prev = c;
        }
    }
}
