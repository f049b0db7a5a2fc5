//! Config-driven experiment runs. Each run writes `manifest.json`, `report.json` and
//! `samples.csv` (`statistic,n,seed,value`) into the output directory.
//!
//! Exit status: 0 when every assertion of the subcommand holds, 1 when one fails,
//! 2 on an invalid config or table, 3 on a runtime error. Any non-zero exit leaves a
//! `failed` record next to the partial outputs.

use crate::billiard::{BilliardTable, DEFAULT_DISKS, DEFAULT_TAU_MAX};
use crate::error::{Error, Result};
use crate::limitlab::{
    appendix_a_check, appendix_b_check, brownian_l2_oracle, estimate_constants, estimate_sigma, localtime_props, strong_convergence_check, theorem1_check,
    theorem2_check, theorem2_toy_check, toy_law_master, ConstantsReport, SigmaEstimate,
};
use crate::seed::sub_master;
use crate::zext::{llt_check, BilliardSystem, DoublingToy, InitialLaw};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum System {
    Billiard,
    Toy1d,
    Toy3d,
    QuotientBilliard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    pub tau_max: f64,
    /// `[cx, cy, r]` per disk.
    pub disks: Vec<[f64; 3]>,
}

impl Default for TableConfig {
    fn default() -> Self {
        TableConfig { tau_max: DEFAULT_TAU_MAX, disks: DEFAULT_DISKS.iter().map(|&(x, y, r)| [x, y, r]).collect() }
    }
}

fn d_law() -> String {
    "invariant".into()
}
fn d_laws() -> Vec<String> {
    vec!["invariant".into(), "left-half".into(), "linear".into()]
}
fn d_oracle_m() -> usize {
    1_000_000
}
fn d_one() -> f64 {
    1.0
}
fn d_angle_grid() -> usize {
    10_000
}
fn d_pairs() -> usize {
    1_000_000
}
fn d_sigma_n() -> usize {
    10_000
}
fn d_sigma_paths() -> usize {
    8_000
}
fn d_out() -> PathBuf {
    "out".into()
}

/// Run configuration, read from TOML. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: System,
    pub seed: u64,
    #[serde(default)]
    pub table: Option<TableConfig>,
    #[serde(default)]
    pub n_grid: Vec<usize>,
    #[serde(default)]
    pub t_grid: Vec<f64>,
    pub n_starts: usize,
    pub reps: usize,
    #[serde(default = "d_law")]
    pub initial_law: String,
    #[serde(default = "d_laws")]
    pub laws: Vec<String>,
    #[serde(default = "d_out")]
    pub output_dir: PathBuf,
    #[serde(default = "d_oracle_m")]
    pub oracle_m: usize,
    #[serde(default = "d_one")]
    pub oracle_sigma: f64,
    #[serde(default = "d_angle_grid")]
    pub angle_grid: usize,
    #[serde(default = "d_pairs")]
    pub n_pairs: usize,
    #[serde(default = "d_pairs")]
    pub n_tau: usize,
    #[serde(default = "d_sigma_n")]
    pub sigma_n: usize,
    #[serde(default = "d_sigma_paths")]
    pub sigma_paths: usize,
}

fn increasing<T: PartialOrd>(v: &[T]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?)
    }

    pub fn is_billiard(&self) -> bool {
        matches!(self.system, System::Billiard | System::QuotientBilliard)
    }

    /// Structural checks; table validation happens in [`RunConfig::table`].
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if !increasing(&self.n_grid) || self.n_grid.first() == Some(&0) {
            return bad("n_grid must be positive and strictly increasing");
        }
        if !increasing(&self.t_grid) || self.t_grid.iter().any(|t| !(*t > 0.0)) {
            return bad("t_grid must be positive and strictly increasing");
        }
        if self.n_starts < 2 {
            return bad("n_starts must be at least 2");
        }
        if self.reps < 2 {
            return bad("reps must be at least 2");
        }
        let law = InitialLaw::parse(&self.initial_law)?;
        law.validate().map_err(|e| Error::Config(e.to_string()))?;
        for l in &self.laws {
            InitialLaw::parse(l)?.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.is_billiard() && law != InitialLaw::Invariant {
            return bad("billiard runs start from the invariant law");
        }
        if !self.is_billiard() && self.table.is_some() {
            return bad("a table is only allowed for billiard systems");
        }
        Ok(())
    }

    pub fn table(&self) -> Result<BilliardTable> {
        let tc = self.table.clone().unwrap_or_default();
        let disks: Vec<(f64, f64, f64)> = tc.disks.iter().map(|d| (d[0], d[1], d[2])).collect();
        let t = BilliardTable::new(&disks, tc.tau_max)?;
        t.validate(self.angle_grid)?;
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    ValidateTable,
    Constants,
    Oracle,
    Thm2,
    Thm1,
    Strong,
    AppendixA,
    AppendixB,
    Llt,
    LocaltimeProps,
}

impl Subcommand {
    pub const ALL: [Subcommand; 10] = [
        Subcommand::ValidateTable,
        Subcommand::Constants,
        Subcommand::Oracle,
        Subcommand::Thm2,
        Subcommand::Thm1,
        Subcommand::Strong,
        Subcommand::AppendixA,
        Subcommand::AppendixB,
        Subcommand::Llt,
        Subcommand::LocaltimeProps,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::ValidateTable => "validate-table",
            Subcommand::Constants => "constants",
            Subcommand::Oracle => "oracle",
            Subcommand::Thm2 => "thm2",
            Subcommand::Thm1 => "thm1",
            Subcommand::Strong => "strong",
            Subcommand::AppendixA => "appendixA",
            Subcommand::AppendixB => "appendixB",
            Subcommand::Llt => "llt",
            Subcommand::LocaltimeProps => "localtime-props",
        }
    }
}

impl FromStr for Subcommand {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Subcommand::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Subcommand::ALL.iter().map(|c| c.name()).collect();
            format!("unknown subcommand '{s}', expected one of: {}", names.join(", "))
        })
    }
}

/// Command-line values that take precedence over the config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub statistic: String,
    pub n: u64,
    pub seed: u64,
    pub value: f64,
}

/// Result of one subcommand before it is written out.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub report: Value,
    pub rows: Vec<Row>,
    pub masters: BTreeMap<String, u64>,
    pub resampled: u64,
    pub events: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: String,
    pub config: RunConfig,
    pub workers: usize,
    pub stream_masters: BTreeMap<String, u64>,
    pub wall_clock_seconds: f64,
    pub resampled_events: u64,
    pub total_events: u64,
    pub degenerate_rate: f64,
    pub flagged: bool,
}

/// `statistic,n,seed,value` with shortest round-trip decimals.
pub fn samples_csv(rows: &[Row]) -> String {
    let mut s = String::from("statistic,n,seed,value\n");
    for r in rows {
        writeln!(s, "{},{},{},{}", r.statistic, r.n, r.seed, r.value).unwrap();
    }
    s
}

struct Ctx {
    masters: BTreeMap<String, u64>,
    rows: Vec<Row>,
    resampled: u64,
    events: u64,
    seed: u64,
}

impl Ctx {
    fn master(&mut self, label: &str) -> u64 {
        let m = sub_master(self.seed, label);
        self.masters.insert(label.into(), m);
        m
    }

    fn push(&mut self, statistic: &str, n: u64, seed: u64, value: f64) {
        self.rows.push(Row { statistic: statistic.into(), n, seed, value });
    }

    fn push_all(&mut self, statistic: &str, n: u64, seed: u64, values: &[f64]) {
        for &v in values {
            self.push(statistic, n, seed, v);
        }
    }
}

fn need(cond: bool, sub: Subcommand, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Config(format!("{} needs {what}", sub.name())))
    }
}

fn last_n(cfg: &RunConfig, sub: Subcommand) -> Result<usize> {
    cfg.n_grid.last().copied().ok_or_else(|| Error::Config(format!("{} needs a non-empty n_grid", sub.name())))
}

fn embedded(c: Option<&ConstantsReport>, s: Option<&SigmaEstimate>) -> Value {
    match c {
        Some(c) => json!({
            "gamma": c.gamma, "e_tau": c.e_tau, "sigma_hat": s.map(|s| s.sigma),
            "e_i": c.e_i_direct, "e_i_prime": c.e_i_prime, "c": c.c,
        }),
        None => json!({ "gamma": null, "e_tau": null, "sigma_hat": s.map_or(1.0, |s| s.sigma), "e_i": 1.0, "e_i_prime": null }),
    }
}

fn constants(cfg: &RunConfig, t: &BilliardTable, ctx: &mut Ctx) -> Result<(ConstantsReport, SigmaEstimate)> {
    let c = estimate_constants(t, cfg.n_pairs, cfg.n_tau, ctx.master("constants"))?;
    let s = estimate_sigma(&BilliardSystem { table: t.clone() }, cfg.sigma_n, cfg.sigma_paths, ctx.master("sigma"))?;
    ctx.resampled += c.resampled + s.resampled;
    ctx.events += (2 * cfg.n_pairs + cfg.n_tau + cfg.sigma_n * cfg.sigma_paths) as u64;
    Ok((c, s))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

/// Runs `sub` with an already validated config, without touching the disk.
pub fn execute(sub: Subcommand, cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let mut ctx = Ctx { masters: BTreeMap::new(), rows: Vec::new(), resampled: 0, events: 0, seed: cfg.seed };
    let table = if cfg.is_billiard() { Some(cfg.table()?) } else { None };
    let law = InitialLaw::parse(&cfg.initial_law)?;
    let (passed, report) = match sub {
        Subcommand::ValidateTable => {
            need(table.is_some(), sub, "a billiard system")?;
            let r = table.as_ref().unwrap().validate(cfg.angle_grid)?;
            ctx.push("max_flight", r.rays as u64, cfg.seed, r.max_flight);
            ctx.push("min_clearance", r.rays as u64, cfg.seed, r.min_clearance);
            ctx.events += r.rays as u64;
            (true, json!({ "table": to_value(&r), "constants": embedded(None, None) }))
        }
        Subcommand::Constants => {
            need(table.is_some(), sub, "a billiard system")?;
            let t = table.as_ref().unwrap();
            let (c, s) = constants(cfg, t, &mut ctx)?;
            let seed = ctx.masters["constants"];
            for (k, v) in [("gamma", c.gamma), ("e_tau", c.e_tau), ("e_i_direct", c.e_i_direct), ("e_i_kac", c.e_i_kac), ("e_i_prime", c.e_i_prime), ("c", c.c)] {
                ctx.push(k, cfg.n_pairs as u64, seed, v);
            }
            ctx.push("sigma_hat", cfg.sigma_n as u64, ctx.masters["sigma"], s.sigma);
            (c.passed(), json!({ "result": to_value(&c), "sigma": to_value(&s), "constants": embedded(Some(&c), Some(&s)) }))
        }
        Subcommand::Oracle => {
            let m = ctx.master("oracle");
            let o = brownian_l2_oracle(cfg.oracle_m, cfg.reps, cfg.oracle_sigma, m)?;
            ctx.events += (cfg.oracle_m * cfg.reps) as u64;
            ctx.push_all("oracle_l2", cfg.oracle_m as u64, m, o.samples());
            let (mean, se) = o.mean_se();
            let target = crate::limitlab::ORACLE_MEAN / cfg.oracle_sigma.sqrt();
            let passed = (mean - target).abs() <= 0.02 / cfg.oracle_sigma.sqrt();
            (passed, json!({ "m": cfg.oracle_m, "reps": cfg.reps, "sigma": cfg.oracle_sigma, "mean": mean, "se": se, "target": target, "median": o.median(), "constants": embedded(None, None) }))
        }
        Subcommand::Thm2 => {
            let om = ctx.master("oracle");
            let oracle = brownian_l2_oracle(cfg.oracle_m, cfg.reps, 1.0, om)?;
            ctx.events += (cfg.oracle_m * cfg.reps) as u64;
            let n_max = last_n(cfg, sub)?;
            match cfg.system {
                System::Billiard => {
                    let t = table.as_ref().unwrap();
                    let (c, s) = constants(cfg, t, &mut ctx)?;
                    let m = ctx.master("orbits");
                    let r = theorem2_check(t, &cfg.n_grid, cfg.n_starts, &c, &s, &oracle, m)?;
                    ctx.resampled += r.resampled;
                    ctx.events += (cfg.n_starts * n_max) as u64;
                    for (d, &n) in r.samples.iter().zip(&cfg.n_grid) {
                        ctx.push_all("nu_ordered_scaled", n as u64, m, d.samples());
                    }
                    (r.passed, json!({ "result": to_value(&r), "constants": embedded(Some(&c), Some(&s)) }))
                }
                System::Toy1d => {
                    let m = ctx.master("toy");
                    let r = theorem2_toy_check(law, &cfg.n_grid, cfg.n_starts, &oracle, m)?;
                    ctx.masters.insert("toy-law".into(), toy_law_master(m, law));
                    ctx.events += (cfg.n_starts * n_max) as u64;
                    for (d, &n) in r.samples.iter().zip(&cfg.n_grid) {
                        ctx.push_all("square_scaled", n as u64, toy_law_master(m, law), d.samples());
                    }
                    (r.passed, json!({ "result": to_value(&r), "constants": embedded(None, None) }))
                }
                _ => return Err(Error::Config("thm2 needs system billiard or toy1d".into())),
            }
        }
        Subcommand::Thm1 => {
            need(cfg.system == System::Billiard, sub, "system billiard")?;
            need(!cfg.t_grid.is_empty(), sub, "a non-empty t_grid")?;
            let t = table.as_ref().unwrap();
            let om = ctx.master("oracle");
            let oracle = brownian_l2_oracle(cfg.oracle_m, cfg.reps, 1.0, om)?;
            ctx.events += (cfg.oracle_m * cfg.reps) as u64;
            let (c, s) = constants(cfg, t, &mut ctx)?;
            let mut results = Vec::new();
            let mut passed = true;
            for &time in &cfg.t_grid {
                let m = ctx.master(&format!("flow/{time}"));
                let r = theorem1_check(t, time, cfg.n_starts, &c, &s, &oracle, m)?;
                ctx.resampled += r.resampled;
                ctx.events += r.orbits.iter().map(|o| o.n_t as u64 + 1).sum::<u64>();
                ctx.push_all("n_cont_ordered_scaled", time.round() as u64, m, r.samples.samples());
                passed &= r.passed;
                results.push(to_value(&r));
            }
            (passed, json!({ "results": results, "constants": embedded(Some(&c), Some(&s)) }))
        }
        Subcommand::Strong => {
            need(cfg.system == System::Toy1d, sub, "system toy1d")?;
            let n = last_n(cfg, sub)?;
            let laws: Vec<InitialLaw> = cfg.laws.iter().map(|l| InitialLaw::parse(l)).collect::<Result<_>>()?;
            let om = ctx.master("oracle");
            let oracle = brownian_l2_oracle(cfg.oracle_m, cfg.reps, 1.0, om)?;
            let m = ctx.master("toy");
            let r = strong_convergence_check(&laws, n, cfg.n_starts, &oracle, m)?;
            ctx.events += (cfg.oracle_m * cfg.reps + laws.len() * cfg.n_starts * n) as u64;
            for (l, d) in laws.iter().zip(&r.samples) {
                ctx.push_all(&format!("square_scaled/{}", l.name()), n as u64, toy_law_master(m, *l), d.samples());
            }
            (r.passed, json!({ "result": to_value(&r), "constants": embedded(None, None) }))
        }
        Subcommand::AppendixA => {
            let dim = match cfg.system {
                System::Toy3d => 3,
                System::Toy1d => 1,
                _ => return Err(Error::Config("appendixA needs system toy3d (or toy1d as a control)".into())),
            };
            let grid: Vec<usize> = cfg.t_grid.iter().map(|t| t.round() as usize).collect();
            let m = ctx.master("appendixA");
            let r = appendix_a_check(dim, &grid, cfg.n_starts, m)?;
            ctx.events += (cfg.n_starts * grid.last().copied().unwrap_or(0)) as u64;
            for (g, &t) in grid.iter().enumerate() {
                let v: Vec<f64> = r.per_orbit.iter().map(|o| o[g]).collect();
                ctx.push_all("coincidences_per_time", t as u64, m, &v);
            }
            let passed = if dim == 3 { r.passed } else { !r.stabilized };
            (passed, json!({ "result": to_value(&r), "negative_control": dim == 1, "constants": embedded(None, None) }))
        }
        Subcommand::AppendixB => {
            need(cfg.system == System::QuotientBilliard, sub, "system quotient-billiard")?;
            let t = table.as_ref().unwrap();
            let (c, s) = constants(cfg, t, &mut ctx)?;
            let m = ctx.master("appendixB");
            let r = appendix_b_check(t, &cfg.n_grid, cfg.n_starts, &c, m)?;
            ctx.resampled += r.resampled;
            ctx.events += (cfg.n_starts * last_n(cfg, sub)?) as u64;
            for (g, &n) in cfg.n_grid.iter().enumerate() {
                let v: Vec<f64> = r.per_orbit.iter().map(|o| o[g]).collect();
                ctx.push_all("nu_bar_ordered_scaled", n as u64, m, &v);
            }
            (r.passed, json!({ "result": to_value(&r), "constants": embedded(Some(&c), Some(&s)) }))
        }
        Subcommand::Llt => {
            let n = last_n(cfg, sub)?;
            let m = ctx.master("llt");
            let r = match cfg.system {
                System::Toy1d => llt_check(&DoublingToy::new(1)?, n, cfg.n_starts, m)?,
                System::Billiard => llt_check(&BilliardSystem { table: table.clone().unwrap() }, n, cfg.n_starts, m)?,
                _ => return Err(Error::Config("llt needs system toy1d or billiard".into())),
            };
            ctx.resampled += r.resampled;
            ctx.events += (n * cfg.n_starts) as u64;
            for p in &r.points {
                ctx.push(&format!("llt_mass/{}", p.level), n as u64, m, p.empirical);
            }
            let passed = r.max_rel_dev <= 0.1 && r.mass_beyond_range == 0.0;
            (passed, json!({ "result": to_value(&r), "constants": embedded(None, Some(&SigmaEstimate { sigma: r.sigma_hat, se: f64::NAN, n, n_paths: cfg.n_starts, resampled: r.resampled })) }))
        }
        Subcommand::LocaltimeProps => {
            need(cfg.system == System::Toy1d, sub, "system toy1d")?;
            let m = ctx.master("localtime");
            let r = localtime_props(&cfg.n_grid, cfg.n_starts, m)?;
            ctx.events += (cfg.n_starts * last_n(cfg, sub)?) as u64;
            for (g, &n) in cfg.n_grid.iter().enumerate() {
                ctx.push("square_mean", n as u64, m, r.square_mean[g]);
                ctx.push("square_median", n as u64, m, r.square_median[g]);
                ctx.push("tploc", n as u64, m, r.tploc[g]);
                ctx.push("modulus_01", n as u64, m, r.modulus_01[g]);
                ctx.push("sup_l2", n as u64, m, r.sup_l2[g]);
            }
            (r.passed, json!({ "result": to_value(&r), "constants": embedded(None, None) }))
        }
    };
    let mut report = report;
    report["subcommand"] = json!(sub.name());
    report["passed"] = json!(passed);
    Ok(Outcome { passed, report, rows: ctx.rows, masters: ctx.masters, resampled: ctx.resampled, events: ctx.events })
}

fn is_validation(e: &Error) -> bool {
    matches!(e, Error::Config(_) | Error::InvalidDisk { .. } | Error::OverlappingObstacles { .. } | Error::HorizonViolation { .. })
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(v).expect("serializable") + "\n")?;
    Ok(())
}

fn fail(out: &Path, code: i32, msg: &str) -> i32 {
    eprintln!("zxc: {msg}");
    if std::fs::create_dir_all(out).is_ok() {
        let _ = write_json(&out.join("failed"), &json!({ "exit_code": code, "error": msg }));
    }
    code
}

/// Number of worker threads: the override, else `ZXC_WORKERS`, else all cores.
pub fn worker_count(flag: Option<usize>) -> usize {
    flag.filter(|&k| k > 0)
        .or_else(|| std::env::var("ZXC_WORKERS").ok().and_then(|v| v.trim().parse().ok()).filter(|&k: &usize| k > 0))
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Loads the config, runs `sub` on a pool of the requested size and writes the artifacts.
/// Returns the process exit status.
pub fn run(sub: Subcommand, config: &Path, ov: &Overrides) -> i32 {
    let mut cfg = match RunConfig::load(config) {
        Ok(c) => c,
        Err(e) => return fail(ov.out.as_deref().unwrap_or(Path::new("out")), 2, &e.to_string()),
    };
    if let Some(s) = ov.seed {
        cfg.seed = s;
    }
    if let Some(o) = &ov.out {
        cfg.output_dir = o.clone();
    }
    let out = cfg.output_dir.clone();
    let workers = worker_count(ov.workers);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(p) => p,
        Err(e) => return fail(&out, 3, &e.to_string()),
    };
    if let Err(e) = std::fs::create_dir_all(&out) {
        return fail(&out, 3, &e.to_string());
    }
    let _ = std::fs::remove_file(out.join("failed"));
    let start = Instant::now();
    let result = pool.install(|| execute(sub, &cfg));
    let outcome = match result {
        Ok(o) => o,
        Err(e) => return fail(&out, if is_validation(&e) { 2 } else { 3 }, &e.to_string()),
    };
    let rate = if outcome.events == 0 { 0.0 } else { outcome.resampled as f64 / outcome.events as f64 };
    let manifest = RunManifest {
        subcommand: sub.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        workers,
        stream_masters: outcome.masters.clone(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        resampled_events: outcome.resampled,
        total_events: outcome.events,
        degenerate_rate: rate,
        flagged: rate >= 1e-6,
    };
    let written = write_json(&out.join("manifest.json"), &manifest)
        .and_then(|_| write_json(&out.join("report.json"), &outcome.report))
        .and_then(|_| Ok(std::fs::write(out.join("samples.csv"), samples_csv(&outcome.rows))?));
    if let Err(e) = written {
        return fail(&out, 3, &e.to_string());
    }
    if outcome.passed {
        0
    } else {
        fail(&out, 1, &format!("{} assertions failed, see {}", sub.name(), out.join("report.json").display()))
    }
}
