use std::path::Path;
use std::process::Command;

fn zxc(sub: &str, cfg: &Path, out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_zxc"))
        .args([sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--workers", "2"])
        .status()
        .unwrap()
        .code()
        .unwrap()
}

#[test]
fn malformed_table_exits_2_and_names_the_disk() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(
        &cfg,
        "system = \"billiard\"\nseed = 1\nn_starts = 2\nreps = 2\n[table]\ntau_max = 2.5\ndisks = [[0.25, 0.25, 0.4], [0.75, 0.75, -0.2]]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    assert_eq!(zxc("validate-table", &cfg, &out), 2);
    let failed = std::fs::read_to_string(out.join("failed")).unwrap();
    assert!(failed.contains("invalid disk 1"), "{failed}");
}

#[test]
fn toy_thm2_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("toy.toml");
    std::fs::write(&cfg, "system = \"toy1d\"\nseed = 3\nn_grid = [100, 1000, 5000]\nn_starts = 40\nreps = 8\noracle_m = 100000\n").unwrap();
    let out = dir.path().join("out");
    let code = zxc("thm2", &cfg, &out);
    assert!(code == 0 || code == 1);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let points = report["result"]["points"].as_array().unwrap();
    assert_eq!(points.len(), 3);
    assert!(points.iter().all(|p| p["ks"].is_f64()));
    assert!(report["result"]["monotone_trend"].is_boolean());
    assert!(report["constants"]["sigma_hat"].is_f64());
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seed"], 3);
    assert_eq!(manifest["flagged"], false);
    let csv = std::fs::read_to_string(out.join("samples.csv")).unwrap();
    assert!(csv.starts_with("statistic,n,seed,value\n"));
    assert_eq!(csv.lines().count(), 1 + 3 * 40);
    assert_eq!(out.join("failed").exists(), code != 0);
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.toml");
    std::fs::write(&cfg, "system = \"toy1d\"\nseed = 3\nn_starts = 4\nreps = 2\nn_strats = 5\n").unwrap();
    assert_eq!(zxc("oracle", &cfg, &dir.path().join("out")), 2);
}

#[test]
fn seed_override_changes_samples() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("o.toml");
    std::fs::write(&cfg, "system = \"toy1d\"\nseed = 3\nn_starts = 2\nreps = 4\noracle_m = 100000\n").unwrap();
    let run = |seed: &str, tag: &str| {
        let out = dir.path().join(tag);
        Command::new(env!("CARGO_BIN_EXE_zxc"))
            .args(["oracle", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", seed])
            .env("ZXC_WORKERS", "3")
            .status()
            .unwrap();
        std::fs::read_to_string(out.join("samples.csv")).unwrap()
    };
    assert_ne!(run("1", "a"), run("2", "b"));
    assert_eq!(run("1", "a"), run("1", "c"));
}
