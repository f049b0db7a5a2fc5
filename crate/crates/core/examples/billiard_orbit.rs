//! One orbit of the collision map, its cell walk and the one-step statistics of `phi`.
//!
//! cargo run --release --example billiard_orbit

use zxc::billiard::BilliardTable;
use zxc::seed::stream_rng;
use zxc::zext::{llt_check, step_statistics, BilliardSystem};

fn main() -> zxc::Result<()> {
    let t = BilliardTable::default_table();
    let mut rng = stream_rng(1, 0);
    let (orbit, _) = t.trace_from_mu_bar(&mut rng, 100_000)?;
    for (k, x) in orbit.states.iter().take(6).enumerate() {
        println!("x_{k}: disk {} s {:.4} theta {:+.4} cell {}", x.disk_id, x.s, x.theta, x.cell);
    }
    let n = orbit.taus.len();
    let time: f64 = orbit.taus.iter().sum();
    println!("after {n} collisions: cell {}, flow time {time:.1}, time per collision {:.5}", orbit.states[n].cell, time / n as f64);

    let sys = BilliardSystem { table: t.clone() };
    let st = step_statistics(&sys, 200_000, 2)?;
    println!("phi: mean {:+.5}, variance {:.4}, values {:?}, max |phi| {} (bound {})", st.mean[0], st.variance[0], st.distinct, st.max_abs, t.d_bound());

    let llt = llt_check(&sys, 2000, 20_000, 3)?;
    println!("local limit at n = 2000: Sigma^ {:.4}, period {}", llt.sigma_hat, llt.period);
    for p in &llt.points {
        println!("  P(S_n = {:>4}) = {:.5}, Gaussian {:.5}", p.level, p.empirical, p.predicted);
    }
    Ok(())
}
