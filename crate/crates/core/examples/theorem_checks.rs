//! Distributional limit laws at small scale: the toy walk, the billiard map and the flow.
//!
//! cargo run --release --example theorem_checks

use zxc::billiard::BilliardTable;
use zxc::limitlab::{brownian_l2_oracle, estimate_constants, estimate_sigma, strong_convergence_check, theorem1_check, theorem2_check, theorem2_toy_check};
use zxc::zext::{BilliardSystem, InitialLaw};

fn main() -> zxc::Result<()> {
    let oracle = brownian_l2_oracle(200_000, 400, 1.0, 1)?;
    let toy = theorem2_toy_check(InitialLaw::Invariant, &[1000, 10_000, 50_000], 400, &oracle, 2)?;
    for p in &toy.points {
        println!("toy n = {:>6}: KS {:.4}, mean {:.4} vs {:.4}", p.n, p.ks, p.mean, p.predicted_mean);
    }
    let laws = [InitialLaw::Invariant, InitialLaw::LeftHalf, InitialLaw::Linear];
    let s = strong_convergence_check(&laws, 50_000, 400, &oracle, 2)?;
    println!("initial laws {:?}: largest pairwise KS {:.4}", s.laws, s.max_pairwise);

    let t = BilliardTable::default_table();
    let c = estimate_constants(&t, 200_000, 200_000, 3)?;
    let sigma = estimate_sigma(&BilliardSystem { table: t.clone() }, 5000, 2000, 4)?;
    let b = theorem2_check(&t, &[500, 1000, 2000], 300, &c, &sigma, &oracle, 5)?;
    for p in &b.points {
        println!("billiard n = {:>5}: KS {:.4}, mean {:.4} vs {:.4}", p.n, p.ks, p.mean, p.predicted_mean);
    }
    let f = theorem1_check(&t, 1000.0, 200, &c, &sigma, &oracle, 6)?;
    println!(
        "flow t = 1000: sandwich violations {}, t / n_t {:.4} (E_tau {:.4}), mean ratio {:.4} vs {:.4}",
        f.sandwich_violations, f.birkhoff_mean, c.e_tau, f.mean_ratio, f.mean_ratio_target
    );
    Ok(())
}
