//! Local times of the doubling-map walk and their occupation functionals.
//!
//! cargo run --release --example local_times

use zxc::limitlab::{localtime_props, toy_square_samples, ORACLE_MEAN};
use zxc::localtime::{local_time, occupation_cross, occupation_square};
use zxc::seed::stream_rng;
use zxc::zext::{birkhoff_path, DoublingToy, InitialLaw, ToyState};

fn main() -> zxc::Result<()> {
    let toy = DoublingToy::new(1)?;
    let mut x = ToyState::new(InitialLaw::Invariant, &mut stream_rng(4, 0));
    let path = birkhoff_path(&toy, &mut x, 10_000)?;
    let h = local_time(&path)?;
    let (lo, hi) = h.support().unwrap();
    println!("n = 10^4: levels {lo}..{hi}, N(0) = {}, max N = {}", h.get(0), h.max_count());
    println!("  sum N^2 = {}, sum N(l) N(l+1) = {}", occupation_square(&h), occupation_cross(&h, 1));

    let d = toy_square_samples(InitialLaw::Invariant, &[10_000, 100_000], 500, 5)?;
    for (n, s) in [10_000, 100_000].iter().zip(&d) {
        println!("n^(-3/2) sum N^2 at n = {n}: mean {:.4}, median {:.4} (Brownian mean {ORACLE_MEAN:.4})", s.mean(), s.median());
    }

    let r = localtime_props(&[10_000, 100_000], 300, 6)?;
    println!("cross-term decay {:?}", r.tploc);
    println!("modulus at (0,1) {:?}, at (0,2) {:?}", r.modulus_01, r.modulus_02);
    println!("sup L2 {:?}", r.sup_l2);
    for w in &r.rw2 {
        println!("  n = {}: integral modulus by delta {:?}", w.n, w.integrand);
    }
    Ok(())
}
