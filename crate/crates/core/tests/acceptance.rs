//! Acceptance criteria 1-14. Runs sequentially, prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Pass criterion numbers after `--` to run a subset.

use rand::Rng;
use std::io::Write;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};
use zxc::billiard::{reflect, BilliardTable, CollisionState};
use zxc::geometry::{Point2, Segment};
use zxc::limitlab::*;
use zxc::seed::{par_streams, stream_rng, sub_master};
use zxc::selfcross::{arcs_from_orbit, arcs_from_segments, nu_bar_n, nu_bar_n_bruteforce, nu_n, nu_n_bruteforce};
use zxc::zext::{BilliardSystem, InitialLaw};

const SEED: u64 = 0x2026_1016;

fn master(label: &str) -> u64 {
    sub_master(SEED, label)
}

struct Shared {
    table: BilliardTable,
    constants: ConstantsReport,
    sigma: SigmaEstimate,
}

fn shared() -> &'static Shared {
    static S: OnceLock<Shared> = OnceLock::new();
    S.get_or_init(|| {
        let table = BilliardTable::default_table();
        let constants = estimate_constants(&table, 1_000_000, 1_000_000, master("constants")).unwrap();
        let sigma = estimate_sigma(&BilliardSystem { table: table.clone() }, 10_000, 8_000, master("sigma")).unwrap();
        Shared { table, constants, sigma }
    })
}

fn toy_oracle() -> &'static EmpiricalDistribution {
    static O: OnceLock<EmpiricalDistribution> = OnceLock::new();
    O.get_or_init(|| brownian_l2_oracle(1_000_000, 2000, 1.0, master("toy-oracle")).unwrap())
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

/// One-sample KS distance of a sample against the uniform law on `[lo, hi]`.
fn ks_uniform(mut v: Vec<f64>, lo: f64, hi: f64) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

fn c1() -> Verdict {
    let t = BilliardTable::default_table();
    let mut mismatches = 0;
    let mut total = 0u64;
    let orbits = par_streams(master("c1-orbits"), 100, |_, rng| t.trace_from_mu_bar(rng, 200).unwrap().0);
    for o in &orbits {
        let arcs = arcs_from_orbit(o);
        let (fast, _) = nu_n(&arcs, 1000).unwrap();
        total += fast;
        mismatches += (fast != nu_n_bruteforce(&arcs, 1000).unwrap()) as usize;
        mismatches += (nu_bar_n(&arcs).unwrap() != nu_bar_n_bruteforce(&arcs).unwrap()) as usize;
    }
    let fixtures = par_streams(master("c1-fixtures"), 100, |_, rng| {
        let mut p = Point2::new(rng.random::<f64>(), rng.random::<f64>() * 4.0 - 2.0);
        let mut segs = Vec::new();
        for _ in 0..60 {
            let a = rng.random::<f64>() * std::f64::consts::TAU;
            let len = 0.05 + 2.45 * rng.random::<f64>();
            let q = p + Point2::new(a.cos(), a.sin()) * len;
            segs.push(Segment::new(p, q).unwrap());
            p = q;
        }
        arcs_from_segments(&segs)
    });
    for arcs in &fixtures {
        let (fast, _) = nu_n(arcs, 1000).unwrap();
        total += fast;
        mismatches += (fast != nu_n_bruteforce(arcs, 1000).unwrap()) as usize;
        mismatches += (nu_bar_n(arcs).unwrap() != nu_bar_n_bruteforce(arcs).unwrap()) as usize;
    }
    verdict(mismatches == 0 && total > 0, format!("200 arc sets, {mismatches} mismatches, {total} crossings in total"))
}

fn c2() -> Verdict {
    let t = BilliardTable::default_table();
    let mut rng = stream_rng(master("c2-drift"), 0);
    let (orbit, _) = t.trace_from_mu_bar(&mut rng, 1_000_000).unwrap();
    let mut v = t.velocity(&orbit.states[0]);
    let mut drift: f64 = 0.0;
    let mut state_err: f64 = 0.0;
    for y in &orbit.states[1..] {
        let r = t.disks[y.disk_id].radius;
        v = reflect(v, zxc::geometry::UnitVec::from_angle(y.s / r));
        drift = drift.max(v.norm_error());
        state_err = state_err.max(t.velocity(y).norm_error());
    }
    let inv = par_streams(master("c2-inverse"), 10, |_, rng| {
        let mut worst: f64 = 0.0;
        let mut done = 0;
        while done < 1000 {
            let x = t.sample_mu_bar(rng);
            let Ok((y, _, _)) = t.billiard_map(&x) else { continue };
            let z = t.inverse_map(&y).unwrap();
            let per = std::f64::consts::TAU * t.disks[x.disk_id].radius;
            let ds = (z.s - x.s).rem_euclid(per);
            let e = if z.disk_id != x.disk_id || z.cell != x.cell { f64::INFINITY } else { ds.min(per - ds).max((z.theta - x.theta).abs()) };
            worst = worst.max(e);
            done += 1;
        }
        worst
    });
    let inv_err = inv.into_iter().fold(0.0, f64::max);
    let pts = par_streams(master("c2-invariance"), 10, |_, rng| {
        let mut out = Vec::with_capacity(10_000);
        while out.len() < 10_000 {
            let mut x = t.sample_mu_bar(rng);
            let mut ok = true;
            for _ in 0..50 {
                match t.billiard_map(&x) {
                    Ok((y, _, _)) => x = y,
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                out.push(x);
            }
        }
        out
    });
    let pts: Vec<CollisionState> = pts.into_iter().flatten().collect();
    let offsets: Vec<f64> = t.disks.iter().scan(0.0, |acc, d| {
        let o = *acc;
        *acc += std::f64::consts::TAU * d.radius;
        Some(o)
    }).collect();
    let ks_pos = ks_uniform(pts.iter().map(|x| offsets[x.disk_id] + x.s).collect(), 0.0, t.boundary_length);
    let ks_sin = ks_uniform(pts.iter().map(|x| x.theta.sin()).collect(), -1.0, 1.0);
    let pass = drift < 1e-8 && state_err < 1e-8 && inv_err < 1e-8 && ks_pos <= 0.02 && ks_sin <= 0.02;
    verdict(
        pass,
        format!("|v| drift {drift:.1e} (state {state_err:.1e}) over 1e6; inverse err {inv_err:.1e} on 1e4; KS position {ks_pos:.4}, sin(theta) {ks_sin:.4} on 1e5 after 50 steps"),
    )
}

fn c3() -> Verdict {
    let s = shared();
    let t = &s.table;
    let mut rng = stream_rng(master("c3-orbit"), 0);
    let (orbit, _) = t.trace_from_mu_bar(&mut rng, 1_000_000).unwrap();
    let n = orbit.taus.len() as f64;
    let bound = t.d_bound();
    let phis: Vec<i64> = orbit.states.windows(2).map(|w| w[1].cell - w[0].cell).collect();
    let mean = phis.iter().sum::<i64>() as f64 / n;
    let max_orbit = phis.iter().map(|p| p.abs()).max().unwrap();
    let iid = zxc::zext::step_statistics(&BilliardSystem { table: t.clone() }, 1_000_000, master("c3-iid")).unwrap();
    let lim = 4.0 * (s.sigma.sigma / 1e6).sqrt();
    verdict(
        mean.abs() <= lim && max_orbit <= bound && iid.max_abs <= bound,
        format!("Birkhoff mean phi {mean:.2e} (limit {lim:.2e}), max |phi| {} / {} (bound {bound})", max_orbit, iid.max_abs),
    )
}

fn c4() -> Verdict {
    let t = BilliardTable::default_table();
    let (m, se, _) = t.mean_free_path(1_000_000, master("c4")).unwrap();
    let f = t.mean_free_path_formula();
    verdict((m - f).abs() <= 3.0 * se, format!("E_tau {m:.5} +- {se:.5}, pi A / L = {f:.5}, z = {:.2}", (m - f).abs() / se))
}

fn c5() -> Verdict {
    let c = &shared().constants;
    let rel = c.e_i_direct_se / c.e_i_direct;
    verdict(
        c.kac_z <= 3.0 && rel <= 0.015,
        format!("e_I direct {:.4} +- {:.4}, 4 Gamma E_tau {:.4} +- {:.4} (8 pi A = {:.4}), z = {:.2}, rel se {:.2}%", c.e_i_direct, c.e_i_direct_se, c.e_i_kac, c.e_i_kac_se, c.e_i_area, c.kac_z, 100.0 * rel),
    )
}

fn c6() -> Verdict {
    let o1 = brownian_l2_oracle(1_000_000, 2000, 1.0, master("c6-sigma-1")).unwrap();
    let m1 = o1.mean();
    let scaled: Vec<f64> = [(0.25, "c6-sigma-0.25"), (4.0, "c6-sigma-4")]
        .iter()
        .map(|&(s, l)| brownian_l2_oracle(1_000_000, 2000, s, master(l)).unwrap().mean() * s.sqrt())
        .chain([m1])
        .collect();
    let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = scaled.iter().cloned().fold(0.0, f64::max);
    verdict(
        (m1 - ORACLE_MEAN).abs() <= 0.02 && hi / lo - 1.0 <= 0.03,
        format!("mean {m1:.4} (target {ORACLE_MEAN:.4}); sigma^(1/2) mean for 0.25, 4, 1: {:.4} {:.4} {:.4}, spread {:.2}%", scaled[0], scaled[1], scaled[2], 100.0 * (hi / lo - 1.0)),
    )
}

fn c7() -> Verdict {
    let r = theorem2_toy_check(InitialLaw::Invariant, &[1000, 10_000, 100_000], 2000, toy_oracle(), master("toy")).unwrap();
    let ks: Vec<String> = r.points.iter().map(|p| format!("{:.4}", p.ks)).collect();
    verdict(r.passed, format!("KS at n = 1e3, 1e4, 1e5: {}; monotone {}", ks.join(", "), r.monotone_trend))
}

fn c8() -> Verdict {
    let s = shared();
    let oracle = brownian_l2_oracle(1_000_000, 2000, 1.0, master("c8-oracle")).unwrap();
    let r = theorem2_check(&s.table, &[1000, 3000, 10_000], 2000, &s.constants, &s.sigma, &oracle, master("c8-orbits")).unwrap();
    let ks: Vec<String> = r.points.iter().map(|p| format!("{:.4}", p.ks)).collect();
    verdict(
        r.passed,
        format!(
            "KS at n = 1e3, 3e3, 1e4: {}; monotone {}; mean ratio {:.4} (Sigma^ {:.4} +- {:.4}, c {:.4})",
            ks.join(", "),
            r.monotone_trend,
            r.first_moment_ratio,
            s.sigma.sigma,
            s.sigma.se,
            s.constants.c
        ),
    )
}

fn c9() -> Verdict {
    let s = shared();
    let oracle = brownian_l2_oracle(1_000_000, 500, 1.0, master("c9-oracle")).unwrap();
    let r = theorem1_check(&s.table, 10_000.0, 500, &s.constants, &s.sigma, &oracle, master("c9-orbits")).unwrap();
    verdict(
        r.passed,
        format!(
            "sandwich violations {}/{}; t/n_t mean {:.5} vs E_tau {:.5}, worst orbit {:.2}%; mean ratio {:.4} vs E_tau^(-3/2) {:.4}; KS {:.4}",
            r.sandwich_violations,
            r.n_starts,
            r.birkhoff_mean,
            s.constants.e_tau,
            100.0 * r.birkhoff_max_rel_dev,
            r.mean_ratio,
            r.mean_ratio_target,
            r.ks
        ),
    )
}

fn c10() -> Verdict {
    let laws = [InitialLaw::Invariant, InitialLaw::LeftHalf, InitialLaw::Linear];
    let r = strong_convergence_check(&laws, 100_000, 2000, toy_oracle(), master("toy")).unwrap();
    let point = strong_convergence_check(&[InitialLaw::Invariant, InitialLaw::PointMass(0.3), InitialLaw::Linear], 1000, 10, toy_oracle(), 0);
    let pw: Vec<String> = r.pairwise.iter().map(|p| format!("{}/{} {:.4}", p.0, p.1, p.2)).collect();
    verdict(r.passed && point.is_err(), format!("pairwise KS {}; point mass rejected {}", pw.join(", "), point.is_err()))
}

fn c11() -> Verdict {
    let a = appendix_a_check(3, &[100_000, 200_000], 20, master("c11-d3")).unwrap();
    let ctl = appendix_a_check(1, &[100_000, 200_000], 20, master("c11-d1")).unwrap();
    let pass = a.passed && a.series_cauchy_gap < 0.01 && !ctl.stabilized;
    verdict(
        pass,
        format!(
            "d=3: max gap {:.2}%, mean N_t/t {:.4} vs E(I) {:.4} ({:.2}%), series gap {:.1e}; d=1 control: max gap {:.1}%, stabilized {}",
            100.0 * a.max_gap,
            a.limit_mean,
            a.e_i.unwrap(),
            100.0 * a.limit_rel_dev.unwrap(),
            a.series_cauchy_gap,
            100.0 * ctl.max_gap,
            ctl.stabilized
        ),
    )
}

fn c12() -> Verdict {
    let s = shared();
    let r = appendix_b_check(&s.table, &[2000, 4000], 20, &s.constants, master("c12")).unwrap();
    verdict(
        r.passed,
        format!(
            "max per-orbit gap {:.2}% (mean {:.2}%), limit {:.4} +- {:.4} vs c {:.4} ({:.2}%), nu_bar >= nu {}",
            100.0 * r.max_gap,
            100.0 * r.gaps.iter().sum::<f64>() / r.gaps.len() as f64,
            r.limit_mean,
            r.limit_se,
            r.c_direct,
            100.0 * r.limit_rel_dev,
            r.nu_bar_ge_nu
        ),
    )
}

fn c13() -> Verdict {
    let r = localtime_props(&[10_000, 100_000, 1_000_000], 1000, master("c13")).unwrap();
    let f = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
    verdict(
        r.passed,
        format!(
            "tploc {} (decreasing {}); modulus(0,1) {} (0,2) {}; sup L2 {}; RW2 decreasing {}; median {}; mean {}",
            f(&r.tploc),
            r.tploc_decreasing,
            f(&r.modulus_01),
            f(&r.modulus_02),
            f(&r.sup_l2),
            r.rw2_decreasing,
            f(&r.square_median),
            f(&r.square_mean)
        ),
    )
}

fn c14() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(
        &cfg,
        r#"system = "billiard"
seed = 99
n_grid = [100, 300]
n_starts = 64
reps = 16
oracle_m = 100000
n_pairs = 20000
n_tau = 20000
sigma_n = 1000
sigma_paths = 200
"#,
    )
    .unwrap();
    let run = |tag: &str, workers: &str| {
        let out = dir.path().join(tag);
        let status = Command::new(env!("CARGO_BIN_EXE_zxc"))
            .args(["thm2", "--config", cfg.to_str().unwrap(), "--workers", workers, "--out", out.to_str().unwrap()])
            .status()
            .unwrap();
        (status.code(), std::fs::read(out.join("samples.csv")).unwrap_or_default())
    };
    let (ca, a) = run("a", "1");
    let (cb, b) = run("b", "1");
    let (cc, c) = run("c", "8");
    let ok_codes = [ca, cb, cc].iter().all(|c| matches!(c, Some(0) | Some(1)));
    verdict(
        ok_codes && !a.is_empty() && a == b && a == c,
        format!("exit codes {ca:?} {cb:?} {cc:?}; samples.csv {} bytes, identical across runs {} and workers {}", a.len(), a == b, a == c),
    )
}

fn main() {
    let criteria: [(u32, &str, Duration, fn() -> Verdict); 14] = [
        (1, "geometry oracle equivalence", Duration::from_secs(60), c1),
        (2, "dynamics invariants", Duration::from_secs(300), c2),
        (3, "zero-mean bounded phi", Duration::from_secs(120), c3),
        (4, "mean free path", Duration::from_secs(120), c4),
        (5, "Kac identity for e_I", Duration::from_secs(600), c5),
        (6, "Brownian oracle calibration", Duration::from_secs(600), c6),
        (7, "toy n^(3/2) law", Duration::from_secs(900), c7),
        (8, "billiard n^(3/2) law", Duration::from_secs(3600), c8),
        (9, "flow-time linkage", Duration::from_secs(3600), c9),
        (10, "strong convergence", Duration::from_secs(900), c10),
        (11, "transient a.s. law", Duration::from_secs(600), c11),
        (12, "quotient a.s. law", Duration::from_secs(1800), c12),
        (13, "local time moment probes", Duration::from_secs(900), c13),
        (14, "reproducibility", Duration::from_secs(300), c14),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut err = std::io::stderr();
    let mut failed = Vec::new();
    for (id, name, budget, f) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let v = f();
        let took = start.elapsed();
        let pass = v.pass && took <= budget;
        writeln!(err, "[{}] {id:>2} {name}: {} ({:.1} s, budget {} s)", if pass { "PASS" } else { "FAIL" }, v.detail, took.as_secs_f64(), budget.as_secs()).unwrap();
        if !pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        writeln!(err, "acceptance: failed criteria {failed:?}").unwrap();
        std::process::exit(1);
    }
    writeln!(err, "acceptance: all selected criteria passed").unwrap();
}
