//! Local times `N_n(l) = #{k < n : S_k = l}` of integer walks and their occupation functionals.

use crate::error::{Error, Result};
use crate::zext::WalkPath;
use serde::Serialize;

/// Visit counts over the window of visited levels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LocalTimeHistogram {
    n: u64,
    base: i64,
    counts: Vec<u64>,
}

impl LocalTimeHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_levels<I: IntoIterator<Item = i64>>(levels: I) -> Self {
        let mut h = Self::new();
        for l in levels {
            h.push(l);
        }
        h
    }

    /// Records one visit to `level`; returns the count before the visit.
    #[inline]
    pub fn push(&mut self, level: i64) -> u64 {
        if self.counts.is_empty() {
            self.base = level;
            self.counts.push(0);
        }
        let mut idx = level - self.base;
        if idx < 0 || idx as usize >= self.counts.len() {
            self.grow(level);
            idx = level - self.base;
        }
        let c = &mut self.counts[idx as usize];
        let before = *c;
        *c += 1;
        self.n += 1;
        before
    }

    #[cold]
    fn grow(&mut self, level: i64) {
        let len = self.counts.len() as i64;
        if level < self.base {
            let extra = (self.base - level).max(len);
            let mut v = vec![0u64; extra as usize];
            v.extend_from_slice(&self.counts);
            self.counts = v;
            self.base -= extra;
        } else {
            let extra = (level - self.base - len + 1).max(len);
            self.counts.resize((len + extra) as usize, 0);
        }
    }

    /// Number of recorded visits.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn get(&self, level: i64) -> u64 {
        let idx = level - self.base;
        if idx < 0 || idx as usize >= self.counts.len() {
            0
        } else {
            self.counts[idx as usize]
        }
    }

    /// Visited levels with their counts, in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.counts.iter().enumerate().filter(|(_, &c)| c > 0).map(move |(i, &c)| (self.base + i as i64, c))
    }

    pub fn mass(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn max_count(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Smallest and largest visited level.
    pub fn support(&self) -> Option<(i64, i64)> {
        let mut it = self.iter();
        let first = it.next()?.0;
        let last = self.iter().last().map_or(first, |x| x.0);
        Some((first, last))
    }

    /// Histogram of the reflected walk `-S`.
    pub fn mirror(&self) -> Self {
        let mut counts = self.counts.clone();
        counts.reverse();
        let base = if counts.is_empty() { 0 } else { -(self.base + self.counts.len() as i64 - 1) };
        LocalTimeHistogram { n: self.n, base, counts }
    }

    pub fn to_map(&self) -> std::collections::BTreeMap<i64, u64> {
        self.iter().collect()
    }
}

/// Local times of `S_0 .. S_{n-1}`.
pub fn local_time(path: &WalkPath) -> Result<LocalTimeHistogram> {
    if path.dim != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: path.dim });
    }
    Ok(LocalTimeHistogram::from_levels(path.values[..path.n].iter().copied()))
}

/// `sum_l N(l)^2`.
pub fn occupation_square(h: &LocalTimeHistogram) -> u128 {
    h.counts.iter().map(|&c| (c as u128) * (c as u128)).sum()
}

/// `sum_l N(l) N(l + shift)`.
pub fn occupation_cross(h: &LocalTimeHistogram, shift: i64) -> u128 {
    h.iter().map(|(l, c)| c as u128 * h.get(l + shift) as u128).sum()
}

/// `E |N_n(x) - N_n(y)|^2 / (sqrt(n) |x - y|)` over histograms of equal `n`.
pub fn continuity_modulus(hists: &[LocalTimeHistogram], x: i64, y: i64, n: u64) -> Result<f64> {
    check_equal_n(hists, n)?;
    if x == y {
        return Ok(0.0);
    }
    let m: f64 = hists
        .iter()
        .map(|h| {
            let d = h.get(x) as f64 - h.get(y) as f64;
            d * d
        })
        .sum::<f64>()
        / hists.len() as f64;
    Ok(m / ((n as f64).sqrt() * (x - y).abs() as f64))
}

fn check_equal_n(hists: &[LocalTimeHistogram], n: u64) -> Result<()> {
    if hists.is_empty() {
        return Err(crate::error::contract("no histograms"));
    }
    if let Some(h) = hists.iter().find(|h| h.n != n) {
        return Err(crate::error::contract(format!("histogram mass {} differs from n = {n}", h.n)));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Rw2Report {
    pub n: u64,
    pub t: f64,
    /// `(a, || n^{-1/2} N_n(floor(sqrt(n) a)) ||_2)`
    pub l2_by_level: Vec<(i64, f64)>,
    pub sup_l2: f64,
    /// `(delta, integral over [-M, M])`
    pub integrand: Vec<(f64, f64)>,
    pub integrand_decreasing: bool,
    pub sup_finite: bool,
}

/// Tabulates the integral modulus condition and the `L^2` sup bound on a family of histograms of equal `n`.
///
/// The integral `int_{-M}^{M} E| n^{-1/2} N_n(floor(sqrt(n) a)) - n^{-1/2} N_n(floor(sqrt(n) delta floor(a / delta))) |^2 da`
/// uses the midpoint rule with 4000 nodes. `delta_grid` is read in decreasing order.
pub fn rw2_from_histograms(hists: &[LocalTimeHistogram], n: u64, t: f64, delta_grid: &[f64], m: f64) -> Result<Rw2Report> {
    check_equal_n(hists, n)?;
    if delta_grid.iter().any(|&d| !(d > 0.0)) || !(m > 0.0) {
        return Err(crate::error::contract("delta grid and M must be positive"));
    }
    let rn = (n as f64).sqrt();
    let scale = 1.0 / rn;
    let level = |a: f64| (rn * a).floor() as i64;
    let l2_by_level: Vec<(i64, f64)> = (-3..=3)
        .map(|a| {
            let l = level(a as f64);
            let s: f64 = hists.iter().map(|h| (h.get(l) as f64 * scale).powi(2)).sum();
            (a, (s / hists.len() as f64).sqrt())
        })
        .collect();
    let sup_l2 = l2_by_level.iter().map(|x| x.1).fold(0.0, f64::max);
    let nodes = 4000;
    let h = 2.0 * m / nodes as f64;
    let mut deltas = delta_grid.to_vec();
    deltas.sort_by(|a, b| b.total_cmp(a));
    let integrand: Vec<(f64, f64)> = deltas
        .iter()
        .map(|&d| {
            let mut total = 0.0;
            for i in 0..nodes {
                let a = -m + (i as f64 + 0.5) * h;
                let l1 = level(a);
                let l2 = level(d * (a / d).floor());
                let e: f64 = hists.iter().map(|hh| ((hh.get(l1) as f64 - hh.get(l2) as f64) * scale).powi(2)).sum();
                total += e / hists.len() as f64 * h;
            }
            (d, total)
        })
        .collect();
    let integrand_decreasing = integrand.windows(2).all(|w| w[1].1 <= w[0].1);
    Ok(Rw2Report { n, t, l2_by_level, sup_l2, integrand, integrand_decreasing, sup_finite: sup_l2.is_finite() })
}

/// Path-based form: for each `t` in `t_grid` uses the local times of `S_0 .. S_{floor(nt)-1}`.
pub fn rw2_condition_check(paths: &[WalkPath], t_grid: &[f64], delta_grid: &[f64], m: f64) -> Result<Vec<Rw2Report>> {
    let n = paths.first().ok_or_else(|| crate::error::contract("no paths"))?.n;
    t_grid
        .iter()
        .map(|&t| {
            if !(t > 0.0 && t <= 1.0) {
                return Err(crate::error::contract("t must lie in (0, 1]"));
            }
            let k = ((n as f64) * t).floor() as usize;
            let hists: Result<Vec<_>> = paths
                .iter()
                .map(|p| {
                    if p.dim != 1 {
                        return Err(Error::DimensionMismatch { expected: 1, got: p.dim });
                    }
                    Ok(LocalTimeHistogram::from_levels(p.values[..k].iter().copied()))
                })
                .collect();
            rw2_from_histograms(&hists?, k as u64, t, delta_grid, m)
        })
        .collect()
}
