use super::{rel_gap, ConstantsReport};
use crate::billiard::BilliardTable;
use crate::error::{contract, Result};
use crate::seed::par_streams;
use crate::selfcross::{arcs_from_orbit, crossing_records, prefix_counts, Topology};
use crate::zext::{BaseSystem, DoublingToy, InitialLaw, ToyState};
use serde::Serialize;
use std::collections::HashMap;

/// `sum_{j=1}^{k} P(S_{2j} = 0)` for the walk with independent `+-1` steps in each of three coordinates.
pub fn return_series(k: u64) -> f64 {
    let mut q = 1.0f64;
    let mut s = 0.0;
    for j in 1..=k {
        q *= (2 * j - 1) as f64 / (2 * j) as f64;
        s += q * q * q;
    }
    s
}

/// `E(I) = 2 sum_{k >= 1} P(S_k = 0)`: the series summed to `k` terms plus the tail
/// `sum_{j > k} (pi j)^{-3/2} ~ 2 / (pi^{3/2} sqrt(k))`.
pub fn expected_returns_3d(k: u64) -> f64 {
    2.0 * (return_series(k) + 2.0 / (std::f64::consts::PI.powf(1.5) * (k as f64).sqrt()))
}

#[derive(Debug, Clone, Serialize)]
pub struct AppendixAReport {
    pub dim: usize,
    pub t_grid: Vec<usize>,
    pub n_orbits: usize,
    /// `N_t / t` per orbit along `t_grid`.
    pub per_orbit: Vec<Vec<f64>>,
    /// Relative gap between the last two grid points, per orbit.
    pub gaps: Vec<f64>,
    pub max_gap: f64,
    pub stabilized: bool,
    pub limit_mean: f64,
    pub limit_se: f64,
    pub e_i: Option<f64>,
    pub limit_rel_dev: Option<f64>,
    /// Relative change of the return series between `t/2` terms at the last two grid points.
    pub series_cauchy_gap: f64,
    pub passed: bool,
}

/// `N_t = #{(k, m) : k != m < t, S_k = S_m}` of the toy walk in dimension `dim`, at each `t` of `t_grid`.
pub fn toy_coincidences(dim: usize, t_grid: &[usize], state: &mut ToyState) -> Result<Vec<u64>> {
    let sys = DoublingToy::new(dim)?;
    let mut counts: HashMap<[i64; 3], u32> = HashMap::new();
    let mut pos = [0i64; 3];
    let mut n_t = 0u64;
    let mut out = Vec::with_capacity(t_grid.len());
    let mut k = 0usize;
    for &t in t_grid {
        while k < t {
            let c = counts.entry(pos).or_insert(0);
            n_t += 2 * *c as u64;
            *c += 1;
            let p = sys.advance(state)?;
            for i in 0..3 {
                pos[i] += p[i];
            }
            k += 1;
        }
        out.push(n_t);
    }
    Ok(out)
}

/// Almost sure law `N_t / t -> E(I)` for the transient toy walk. With `dim = 1` the walk is recurrent,
/// `N_t / t` grows like `sqrt(t)` and `stabilized` must come out false.
pub fn appendix_a_check(dim: usize, t_grid: &[usize], n_orbits: usize, master: u64) -> Result<AppendixAReport> {
    if t_grid.len() < 2 || t_grid[0] == 0 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(contract("t grid needs two or more strictly increasing positive times"));
    }
    if n_orbits < 2 {
        return Err(contract("appendix_a_check needs at least 2 orbits"));
    }
    DoublingToy::new(dim)?;
    let rows = par_streams(master, n_orbits, |_, rng| {
        let mut st = ToyState::new(InitialLaw::Invariant, rng);
        toy_coincidences(dim, t_grid, &mut st)
    });
    let mut per_orbit = Vec::with_capacity(n_orbits);
    for r in rows {
        per_orbit.push(r?.iter().zip(t_grid).map(|(&n, &t)| n as f64 / t as f64).collect::<Vec<_>>());
    }
    let g = t_grid.len();
    let gaps: Vec<f64> = per_orbit.iter().map(|v| rel_gap(v[g - 1], v[g - 2])).collect();
    let max_gap = gaps.iter().cloned().fold(0.0, f64::max);
    let last: Vec<f64> = per_orbit.iter().map(|v| v[g - 1]).collect();
    let (limit_mean, limit_se) = crate::zext::mean_se(&last);
    let e_i = (dim == 3).then(|| expected_returns_3d(10_000_000));
    let limit_rel_dev = e_i.map(|e| rel_gap(limit_mean, e));
    let (a, b) = (return_series(t_grid[g - 2] as u64 / 2), return_series(t_grid[g - 1] as u64 / 2));
    let stabilized = max_gap < 0.05;
    Ok(AppendixAReport {
        dim,
        t_grid: t_grid.to_vec(),
        n_orbits,
        per_orbit,
        gaps,
        max_gap,
        stabilized,
        limit_mean,
        limit_se,
        e_i,
        limit_rel_dev,
        series_cauchy_gap: rel_gap(b, a),
        passed: stabilized && limit_rel_dev.is_some_and(|d| d < 0.05),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AppendixBReport {
    pub n_grid: Vec<usize>,
    pub n_orbits: usize,
    pub c_direct: f64,
    pub c_direct_se: f64,
    /// Ordered `nu_bar_n / n^2` per orbit along `n_grid`.
    pub per_orbit: Vec<Vec<f64>>,
    pub gaps: Vec<f64>,
    pub max_gap: f64,
    pub converged: bool,
    pub limit_mean: f64,
    pub limit_se: f64,
    pub limit_rel_dev: f64,
    pub nu_bar_ge_nu: bool,
    pub resampled: u64,
    pub passed: bool,
}

/// Quotient billiard on the torus: ordered `nu_bar_n / n^2` per orbit against the pair-sampled
/// constant `c`. Passes when every orbit moves less than 5% between the last two grid points and
/// the orbit mean at the largest `n` is within 5% of `c`.
pub fn appendix_b_check(table: &BilliardTable, n_grid: &[usize], n_orbits: usize, constants: &ConstantsReport, master: u64) -> Result<AppendixBReport> {
    if n_grid.len() < 2 || n_grid[0] == 0 || n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(contract("n grid needs two or more strictly increasing positive sizes"));
    }
    if n_orbits < 2 {
        return Err(contract("appendix_b_check needs at least 2 orbits"));
    }
    let n_max = *n_grid.last().unwrap();
    let rows = par_streams(master, n_orbits, |_, rng| -> Result<(Vec<u64>, bool, u64)> {
        let (orbit, bad) = table.trace_from_mu_bar(rng, n_max)?;
        let arcs = arcs_from_orbit(&orbit);
        let torus = crossing_records(&arcs, Topology::Torus, None)?;
        let cyl = crossing_records(&arcs, Topology::Cylinder, None)?;
        let nu_bar = prefix_counts(&torus, n_grid);
        let nu = prefix_counts(&cyl, n_grid);
        Ok((nu_bar.clone(), nu_bar.iter().zip(&nu).all(|(a, b)| a >= b), bad))
    });
    let mut per_orbit = Vec::with_capacity(n_orbits);
    let mut nu_bar_ge_nu = true;
    let mut resampled = 0;
    for r in rows {
        let (c, ge, bad) = r?;
        nu_bar_ge_nu &= ge;
        resampled += bad;
        per_orbit.push(c.iter().zip(n_grid).map(|(&v, &n)| 2.0 * v as f64 / (n as f64 * n as f64)).collect::<Vec<_>>());
    }
    let g = n_grid.len();
    let gaps: Vec<f64> = per_orbit.iter().map(|v| rel_gap(v[g - 1], v[g - 2])).collect();
    let max_gap = gaps.iter().cloned().fold(0.0, f64::max);
    let last: Vec<f64> = per_orbit.iter().map(|v| v[g - 1]).collect();
    let (limit_mean, limit_se) = crate::zext::mean_se(&last);
    let limit_rel_dev = rel_gap(limit_mean, constants.c);
    let converged = max_gap < 0.05;
    Ok(AppendixBReport {
        n_grid: n_grid.to_vec(),
        n_orbits,
        c_direct: constants.c,
        c_direct_se: constants.c_se,
        per_orbit,
        gaps,
        max_gap,
        converged,
        limit_mean,
        limit_se,
        limit_rel_dev,
        nu_bar_ge_nu,
        resampled,
        passed: converged && limit_rel_dev < 0.05 && nu_bar_ge_nu,
    })
}
