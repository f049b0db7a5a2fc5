//! Self-intersections of a billiard trajectory: discrete, quotient and continuous-time counts.
//!
//! cargo run --release --example self_intersections

use zxc::billiard::BilliardTable;
use zxc::seed::stream_rng;
use zxc::selfcross::{arcs_from_orbit, continuous_count, nu_bar_n, nu_n, ordered, prefix_counts, vk_profile};

fn main() -> zxc::Result<()> {
    let t = BilliardTable::default_table();
    let (orbit, _) = t.trace_from_mu_bar(&mut stream_rng(7, 0), 5000)?;
    let arcs = arcs_from_orbit(&orbit);
    let (nu, recs) = nu_n(&arcs, 1000)?;
    println!("nu_5000 = {nu} unordered, {} ordered, over {} crossing arc pairs", ordered(nu), recs.len());
    for (m, c) in [500, 1000, 2000, 5000].iter().zip(prefix_counts(&recs, &[500, 1000, 2000, 5000])) {
        println!("  nu_{m} / m^(3/2) = {:.4}", 2.0 * c as f64 / (*m as f64).powf(1.5));
    }
    let nb = nu_bar_n(&arcs[..2000])?;
    println!("torus count nu_bar_2000 = {nb}, 2 nu_bar / n^2 = {:.4}", 2.0 * nb as f64 / 4e6);
    let time = arcs[999].t_end;
    println!("N_t at t = {time:.2} (the first 1000 flights): {}", continuous_count(&arcs, time)?);

    let p = vk_profile(&t, &orbit.states[0], 200_000, 8)?;
    println!("mu(V_k) for x_0 with tau = {:.4}: {:?}", p.tau, p.measure);
    println!("  sum k mu(V_k) = {:.4}, 4 tau = {:.4}", p.weighted_sum, 4.0 * p.tau);
    Ok(())
}
