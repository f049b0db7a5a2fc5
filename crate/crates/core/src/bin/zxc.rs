use clap::Parser;
use std::path::PathBuf;
use zxc::runner::{run, Overrides, Subcommand};

/// Runs one experiment from a TOML config and writes manifest.json, report.json and samples.csv.
#[derive(Parser)]
#[command(name = "zxc", version)]
struct Cli {
    /// validate-table, constants, oracle, thm2, thm1, strong, appendixA, appendixB, llt or localtime-props
    subcommand: Subcommand,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; falls back to ZXC_WORKERS, then to all cores.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let ov = Overrides { seed: cli.seed, workers: cli.workers, out: cli.out };
    std::process::exit(run(cli.subcommand, &cli.config, &ov));
}
