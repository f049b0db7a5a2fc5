use super::{ks_distance, monotone_decreasing, rel_gap, toy_square_samples, ConstantsReport, EmpiricalDistribution, SigmaEstimate};
use crate::billiard::{BilliardTable, CollisionState};
use crate::error::{contract, Error, Result};
use crate::seed::{par_streams, sub_master};
use crate::selfcross::{arcs_from_orbit, arcs_from_segments, continuous_count_window, crossing_records, prefix_counts, Topology};
use crate::zext::InitialLaw;
use rand::Rng;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct KsPoint {
    pub n: usize,
    pub ks: f64,
    pub mean: f64,
    pub predicted_mean: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem2Report {
    pub system: String,
    pub n_starts: usize,
    pub oracle_reps: usize,
    /// Factor applied to the unit-variance oracle.
    pub scale: f64,
    pub points: Vec<KsPoint>,
    pub monotone_trend: bool,
    pub ks_final: f64,
    pub first_moment_ratio: f64,
    pub resampled: u64,
    pub passed: bool,
    #[serde(skip)]
    pub samples: Vec<EmpiricalDistribution>,
}

fn check_grid(grid: &[usize]) -> Result<()> {
    if grid.is_empty() || grid[0] == 0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(contract("n grid must be positive and strictly increasing"));
    }
    Ok(())
}

fn compare(system: &str, samples: Vec<EmpiricalDistribution>, grid: &[usize], oracle: &EmpiricalDistribution, scale: f64, resampled: u64) -> Theorem2Report {
    let target = oracle.scaled(scale);
    let points: Vec<KsPoint> = samples
        .iter()
        .zip(grid)
        .map(|(s, &n)| KsPoint { n, ks: ks_distance(s, &target), mean: s.mean(), predicted_mean: target.mean() })
        .collect();
    let ks: Vec<f64> = points.iter().map(|p| p.ks).collect();
    let last = points.last().unwrap();
    Theorem2Report {
        system: system.into(),
        n_starts: samples[0].n(),
        oracle_reps: oracle.n(),
        scale,
        monotone_trend: monotone_decreasing(&ks),
        ks_final: last.ks,
        first_moment_ratio: last.mean / last.predicted_mean,
        resampled,
        passed: false,
        points,
        samples,
    }
}

/// Master seed of the toy statistic under `law`; shared by the toy checks so that
/// the invariant law reproduces the same samples everywhere.
pub fn toy_law_master(master: u64, law: InitialLaw) -> u64 {
    sub_master(master, &format!("toy/{}", law.name()))
}

/// Toy analogue at unit intersection weight: `n^{-3/2} sum N_n^2` against the unit-variance oracle.
/// Passes when the last KS distance is below 0.06 and the distances decrease along the grid.
pub fn theorem2_toy_check(law: InitialLaw, n_grid: &[usize], n_starts: usize, oracle: &EmpiricalDistribution, master: u64) -> Result<Theorem2Report> {
    check_grid(n_grid)?;
    let samples = toy_square_samples(law, n_grid, n_starts, toy_law_master(master, law))?;
    let mut r = compare("toy1d", samples, n_grid, oracle, 1.0, 0);
    r.passed = r.ks_final < 0.06 && r.monotone_trend;
    Ok(r)
}

/// Ordered `2 nu_m / m^{3/2}` at every `m` in `n_grid` along orbits from invariant starts.
pub fn billiard_nu_samples(table: &BilliardTable, n_grid: &[usize], n_starts: usize, master: u64) -> Result<(Vec<EmpiricalDistribution>, u64)> {
    check_grid(n_grid)?;
    let n_max = *n_grid.last().unwrap();
    let rows = par_streams(master, n_starts, |_, rng| -> Result<(Vec<u64>, u64)> {
        let (orbit, bad) = table.trace_from_mu_bar(rng, n_max)?;
        let recs = crossing_records(&arcs_from_orbit(&orbit), Topology::Cylinder, None)?;
        Ok((prefix_counts(&recs, n_grid), bad))
    });
    let mut cols: Vec<Vec<f64>> = n_grid.iter().map(|_| Vec::with_capacity(n_starts)).collect();
    let mut resampled = 0;
    for row in rows {
        let (counts, bad) = row?;
        resampled += bad;
        for (g, c) in counts.into_iter().enumerate() {
            cols[g].push(2.0 * c as f64 / (n_grid[g] as f64).powf(1.5));
        }
    }
    Ok((cols.into_iter().map(EmpiricalDistribution::new).collect::<Result<_>>()?, resampled))
}

/// Discrete-time law on the billiard: ordered `nu_n / n^{3/2}` against `c Sigma^{-1/2}` times the
/// unit-variance oracle, with `c = e_I / Gamma^2`. Passes when the KS distances decrease along the
/// grid and the first moments agree within 10% at the largest `n`.
pub fn theorem2_check(
    table: &BilliardTable,
    n_grid: &[usize],
    n_starts: usize,
    constants: &ConstantsReport,
    sigma: &SigmaEstimate,
    oracle: &EmpiricalDistribution,
    master: u64,
) -> Result<Theorem2Report> {
    let (samples, resampled) = billiard_nu_samples(table, n_grid, n_starts, master)?;
    let scale = constants.c / sigma.sigma.sqrt();
    let mut r = compare("billiard", samples, n_grid, oracle, scale, resampled);
    r.passed = r.monotone_trend && (r.first_moment_ratio - 1.0).abs() <= 0.1;
    Ok(r)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FlowOrbit {
    pub phase: f64,
    pub n_t: usize,
    pub n_cont: u64,
    pub nu_nt: u64,
    pub lower: u64,
    pub upper: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem1Report {
    pub t: f64,
    pub n_starts: usize,
    pub sandwich_violations: usize,
    pub birkhoff_mean: f64,
    pub birkhoff_max_rel_dev: f64,
    pub birkhoff_ok: bool,
    /// `mean(N_t / t^{3/2}) / mean(nu_{n_t} / n_t^{3/2})`
    pub mean_ratio: f64,
    /// `E_tau^{-3/2}`
    pub mean_ratio_target: f64,
    pub mean_ratio_ok: bool,
    pub scale: f64,
    pub ks: f64,
    pub mean: f64,
    pub predicted_mean: f64,
    pub resampled: u64,
    pub passed: bool,
    #[serde(skip)]
    pub orbits: Vec<FlowOrbit>,
    #[serde(skip)]
    pub samples: EmpiricalDistribution,
}

fn flow_orbit<R: Rng + ?Sized>(table: &BilliardTable, rng: &mut R, t: f64) -> Result<FlowOrbit> {
    let x0 = table.sample_mu_bar(rng);
    let mut x: CollisionState = x0;
    let mut segs = Vec::new();
    let mut clock = 0.0;
    let mut phase = None;
    loop {
        let (y, tau, arc) = table.billiard_map(&x)?;
        let u = *phase.get_or_insert_with(|| rng.random::<f64>() * tau);
        segs.push(arc);
        clock += tau;
        x = y;
        if clock > u + t {
            break;
        }
    }
    let phase = phase.unwrap();
    let arcs = arcs_from_segments(&segs);
    let n_t = arcs.len() - 1;
    let n_cont = continuous_count_window(&arcs, phase, t)?;
    let recs = crossing_records(&arcs, Topology::Cylinder, None)?;
    let (mut nu_nt, mut lower, mut upper) = (0, 0, 0);
    for r in &recs {
        let k = r.k as u64;
        upper += k;
        if r.j < n_t {
            nu_nt += k;
            if r.i >= 1 {
                lower += k;
            }
        }
    }
    Ok(FlowOrbit { phase, n_t, n_cont, nu_nt, lower, upper })
}

/// Continuous-time law: the flow starts at a uniform phase of the first free flight of a `mu`-draw and
/// runs for time `t`. Checks the sandwich `nu(arcs 1..n_t-1) <= N_t <= nu(arcs 0..n_t)` on every orbit,
/// `t / n_t` against `E_tau` within 2% on every orbit, and the mean ratio against `E_tau^{-3/2}` within 10%.
/// The distribution of ordered `N_t / t^{3/2}` is compared with `e'_I` times the oracle of variance `Sigma / E_tau`.
pub fn theorem1_check(
    table: &BilliardTable,
    t: f64,
    n_starts: usize,
    constants: &ConstantsReport,
    sigma: &SigmaEstimate,
    oracle: &EmpiricalDistribution,
    master: u64,
) -> Result<Theorem1Report> {
    if !(t > 0.0) || n_starts < 2 {
        return Err(contract("theorem1_check needs t > 0 and at least 2 starts"));
    }
    let rows = par_streams(master, n_starts, |_, rng| -> Result<(FlowOrbit, u64)> {
        let mut bad = 0;
        loop {
            match flow_orbit(table, rng, t) {
                Ok(o) => return Ok((o, bad)),
                Err(Error::TangentialHit { .. }) => bad += 1,
                Err(e) => return Err(e),
            }
        }
    });
    let mut orbits = Vec::with_capacity(n_starts);
    let mut resampled = 0;
    for r in rows {
        let (o, b) = r?;
        orbits.push(o);
        resampled += b;
    }
    let e = constants.e_tau;
    let sandwich_violations = orbits.iter().filter(|o| !(o.lower <= o.n_cont && o.n_cont <= o.upper)).count();
    let ratios: Vec<f64> = orbits.iter().map(|o| t / o.n_t as f64).collect();
    let birkhoff_mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let birkhoff_max_rel_dev = ratios.iter().map(|&r| rel_gap(r, e)).fold(0.0, f64::max);
    let flow: Vec<f64> = orbits.iter().map(|o| 2.0 * o.n_cont as f64 / t.powf(1.5)).collect();
    let disc: Vec<f64> = orbits.iter().map(|o| 2.0 * o.nu_nt as f64 / (o.n_t as f64).powf(1.5)).collect();
    let mean_ratio = flow.iter().sum::<f64>() / disc.iter().sum::<f64>();
    let mean_ratio_target = e.powf(-1.5);
    let samples = EmpiricalDistribution::new(flow)?;
    let scale = constants.e_i_prime * (sigma.sigma / e).powf(-0.5);
    let target = oracle.scaled(scale);
    let birkhoff_ok = birkhoff_max_rel_dev <= 0.02;
    let mean_ratio_ok = rel_gap(mean_ratio, mean_ratio_target) <= 0.1;
    Ok(Theorem1Report {
        t,
        n_starts,
        sandwich_violations,
        birkhoff_mean,
        birkhoff_max_rel_dev,
        birkhoff_ok,
        mean_ratio,
        mean_ratio_target,
        mean_ratio_ok,
        scale,
        ks: ks_distance(&samples, &target),
        mean: samples.mean(),
        predicted_mean: target.mean(),
        resampled,
        passed: sandwich_violations == 0 && birkhoff_ok && mean_ratio_ok,
        orbits,
        samples,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct StrongReport {
    pub n: usize,
    pub n_starts: usize,
    pub laws: Vec<String>,
    pub ks_to_oracle: Vec<f64>,
    pub pairwise: Vec<(String, String, f64)>,
    pub max_pairwise: f64,
    pub passed: bool,
    #[serde(skip)]
    pub samples: Vec<EmpiricalDistribution>,
}

/// The toy statistic `n^{-3/2} sum N_n^2` under several absolutely continuous initial laws.
/// Passes when at least three distinct laws are given and all pairwise KS distances are below 0.06.
pub fn strong_convergence_check(laws: &[InitialLaw], n: usize, n_starts: usize, oracle: &EmpiricalDistribution, master: u64) -> Result<StrongReport> {
    for l in laws {
        l.validate()?;
    }
    let mut names: Vec<String> = laws.iter().map(|l| l.name()).collect();
    let samples: Vec<EmpiricalDistribution> = laws
        .iter()
        .map(|&l| Ok(toy_square_samples(l, &[n], n_starts, toy_law_master(master, l))?.remove(0)))
        .collect::<Result<_>>()?;
    let ks_to_oracle = samples.iter().map(|s| ks_distance(s, oracle)).collect();
    let mut pairwise = Vec::new();
    for i in 0..laws.len() {
        for j in i + 1..laws.len() {
            pairwise.push((names[i].clone(), names[j].clone(), ks_distance(&samples[i], &samples[j])));
        }
    }
    let max_pairwise = pairwise.iter().map(|p| p.2).fold(0.0, f64::max);
    let distinct = {
        names.sort();
        names.dedup();
        names.len()
    };
    Ok(StrongReport {
        n,
        n_starts,
        laws: laws.iter().map(|l| l.name()).collect(),
        ks_to_oracle,
        pairwise,
        max_pairwise,
        passed: distinct >= 3 && max_pairwise < 0.06,
        samples,
    })
}
