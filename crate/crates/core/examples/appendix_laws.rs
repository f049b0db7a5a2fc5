//! Almost sure laws: coincidences of the transient 3-d walk and the quotient billiard on the torus.
//!
//! cargo run --release --example appendix_laws

use zxc::billiard::BilliardTable;
use zxc::limitlab::{appendix_a_check, appendix_b_check, estimate_constants};

fn main() -> zxc::Result<()> {
    let a = appendix_a_check(3, &[25_000, 50_000, 100_000], 10, 1)?;
    println!("d = 3: N_t / t at the last time {:.4} +- {:.4}, E(I) = {:.5}, largest gap {:.2}%", a.limit_mean, a.limit_se, a.e_i.unwrap(), 100.0 * a.max_gap);
    let c = appendix_a_check(1, &[25_000, 50_000, 100_000], 10, 1)?;
    println!("d = 1: N_t / t {:.1}, largest gap {:.1}%, stabilized {}", c.limit_mean, 100.0 * c.max_gap, c.stabilized);

    let t = BilliardTable::default_table();
    let k = estimate_constants(&t, 200_000, 100_000, 2)?;
    let b = appendix_b_check(&t, &[1000, 2000], 8, &k, 3)?;
    for (i, o) in b.per_orbit.iter().enumerate() {
        println!("orbit {i}: 2 nu_bar_n / n^2 = {:.4} -> {:.4}", o[0], o[1]);
    }
    println!("mean {:.4} vs pair-sampled c {:.4}", b.limit_mean, b.c_direct);
    Ok(())
}
