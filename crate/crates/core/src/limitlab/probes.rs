use super::{rel_gap, EmpiricalDistribution, ORACLE_MEAN};
use crate::error::{contract, Result};
use crate::localtime::{continuity_modulus, occupation_cross, occupation_square, rw2_from_histograms, LocalTimeHistogram, Rw2Report};
use crate::seed::par_streams;
use crate::zext::{InitialLaw, ToyState};
use serde::Serialize;

fn check_grid(grid: &[usize]) -> Result<()> {
    if grid.is_empty() || grid[0] == 0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(contract("n grid must be positive and strictly increasing"));
    }
    Ok(())
}

/// Runs the 1-d toy walk from `law` and applies `f(n, N_n)` at every `n` of `grid`.
/// Output is indexed `[grid index][path]`.
pub fn toy_scan<T, F>(law: InitialLaw, grid: &[usize], n_paths: usize, master: u64, f: F) -> Result<Vec<Vec<T>>>
where
    T: Send,
    F: Fn(usize, &LocalTimeHistogram) -> T + Sync,
{
    law.validate()?;
    check_grid(grid)?;
    let per_path = par_streams(master, n_paths, |_, rng| {
        let mut st = ToyState::new(law, rng);
        let mut h = LocalTimeHistogram::new();
        let (mut s, mut prev) = (0i64, 0usize);
        let mut out = Vec::with_capacity(grid.len());
        for &n in grid {
            let base = s;
            s += st.walk_1d(n - prev, |v| {
                h.push(base + v);
            });
            prev = n;
            out.push(f(n, &h));
        }
        out
    });
    let mut by_n: Vec<Vec<T>> = grid.iter().map(|_| Vec::with_capacity(n_paths)).collect();
    for row in per_path {
        for (g, v) in row.into_iter().enumerate() {
            by_n[g].push(v);
        }
    }
    Ok(by_n)
}

/// Distribution of `n^{-3/2} sum_l N_n(l)^2` for the toy walk at each `n` of `grid`.
pub fn toy_square_samples(law: InitialLaw, grid: &[usize], n_paths: usize, master: u64) -> Result<Vec<EmpiricalDistribution>> {
    toy_scan(law, grid, n_paths, master, |n, h| occupation_square(h) as f64 / (n as f64).powf(1.5))?
        .into_iter()
        .map(EmpiricalDistribution::new)
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct LocaltimePropsReport {
    pub n_grid: Vec<usize>,
    pub n_paths: usize,
    pub square_mean: Vec<f64>,
    pub square_mean_se: Vec<f64>,
    pub square_median: Vec<f64>,
    pub mean_matches_oracle: bool,
    pub median_stable: bool,
    /// Mean of `n^{-3/2} |sum N^2 - sum N(l) N(l+1)|`.
    pub tploc: Vec<f64>,
    pub tploc_decreasing: bool,
    pub tploc_small: bool,
    /// Modulus at levels `(0, 1)` and `(0, 2)`.
    pub modulus_01: Vec<f64>,
    pub modulus_02: Vec<f64>,
    pub modulus_stable: bool,
    pub modulus_linear: bool,
    pub sup_l2: Vec<f64>,
    pub sup_stable: bool,
    pub rw2: Vec<Rw2Report>,
    pub rw2_decreasing: bool,
    pub passed: bool,
}

fn within_factor(v: &[f64], f: f64) -> bool {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(0.0, f64::max);
    lo > 0.0 && hi / lo <= f
}

/// Moment probes on toy local times: occupation scaling, the cross-term decay,
/// the continuity modulus, the `L^2` sup bound and the integral modulus condition.
pub fn localtime_props(n_grid: &[usize], n_paths: usize, master: u64) -> Result<LocaltimePropsReport> {
    if n_paths < 2 {
        return Err(contract("localtime_props needs at least 2 paths"));
    }
    let hists = toy_scan(InitialLaw::Invariant, n_grid, n_paths, master, |_, h| h.clone())?;
    let deltas = [0.5, 0.1];
    let mut r = LocaltimePropsReport {
        n_grid: n_grid.to_vec(),
        n_paths,
        square_mean: vec![],
        square_mean_se: vec![],
        square_median: vec![],
        mean_matches_oracle: false,
        median_stable: false,
        tploc: vec![],
        tploc_decreasing: false,
        tploc_small: false,
        modulus_01: vec![],
        modulus_02: vec![],
        modulus_stable: false,
        modulus_linear: false,
        sup_l2: vec![],
        sup_stable: false,
        rw2: vec![],
        rw2_decreasing: false,
        passed: false,
    };
    for (g, &n) in n_grid.iter().enumerate() {
        let hs = &hists[g];
        let norm = (n as f64).powf(-1.5);
        let sq = EmpiricalDistribution::new(hs.iter().map(|h| occupation_square(h) as f64 * norm).collect())?;
        let (m, se) = sq.mean_se();
        r.square_mean.push(m);
        r.square_mean_se.push(se);
        r.square_median.push(sq.median());
        let tp: f64 = hs.iter().map(|h| (occupation_square(h) as f64 - occupation_cross(h, 1) as f64).abs() * norm).sum::<f64>() / n_paths as f64;
        r.tploc.push(tp);
        r.modulus_01.push(continuity_modulus(hs, 0, 1, n as u64)?);
        r.modulus_02.push(continuity_modulus(hs, 0, 2, n as u64)?);
        let rw = rw2_from_histograms(hs, n as u64, 1.0, &deltas, 3.0)?;
        r.sup_l2.push(rw.sup_l2);
        r.rw2.push(rw);
    }
    r.mean_matches_oracle = (r.square_mean.last().unwrap() - ORACLE_MEAN).abs() <= 0.03;
    r.median_stable = within_factor(&r.square_median, 1.1);
    r.tploc_decreasing = super::monotone_decreasing(&r.tploc);
    r.tploc_small = *r.tploc.last().unwrap() <= 0.05;
    r.modulus_stable = within_factor(&r.modulus_01, 1.5);
    r.modulus_linear = r.modulus_01.iter().zip(&r.modulus_02).all(|(a, b)| within_factor(&[*a, *b], 1.5));
    r.sup_stable = r.sup_l2.windows(2).all(|w| rel_gap(w[1], w[0]) <= 0.2) && r.sup_l2.iter().all(|s| s.is_finite());
    r.rw2_decreasing = r.rw2.iter().all(|x| x.integrand_decreasing);
    r.passed = r.mean_matches_oracle
        && r.median_stable
        && r.tploc_decreasing
        && r.tploc_small
        && r.modulus_stable
        && r.modulus_linear
        && r.sup_stable
        && r.rw2_decreasing;
    Ok(r)
}
