//! The walk-based sampler of `int L_1(x)^2 dx` and its variance scaling.
//!
//! cargo run --release --example brownian_oracle

use zxc::limitlab::{brownian_l2_oracle, ks_distance, ORACLE_MEAN};

fn main() -> zxc::Result<()> {
    let a = brownian_l2_oracle(1_000_000, 500, 1.0, 1)?;
    let (m, se) = a.mean_se();
    println!("sigma = 1: mean {m:.4} +- {se:.4} (exact {ORACLE_MEAN:.4}), quartiles {:.3} {:.3} {:.3}", a.quantile(0.25), a.median(), a.quantile(0.75));
    for sigma in [0.25, 4.0] {
        let d = brownian_l2_oracle(1_000_000, 500, sigma, 2)?;
        println!("sigma = {sigma}: mean {:.4}, times sigma^(1/2) {:.4}", d.mean(), d.mean() * sigma.sqrt());
    }
    let b = brownian_l2_oracle(1_000_000, 500, 1.0, 3)?;
    println!("KS between two independent draws: {:.4}", ks_distance(&a, &b));
    Ok(())
}
