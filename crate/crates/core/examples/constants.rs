//! The constants of the limit laws on the default table.
//!
//! cargo run --release --example constants

use zxc::billiard::BilliardTable;
use zxc::limitlab::{estimate_constants, estimate_sigma};
use zxc::zext::BilliardSystem;

fn main() -> zxc::Result<()> {
    let t = BilliardTable::default_table();
    let c = estimate_constants(&t, 400_000, 400_000, 11)?;
    println!("Gamma        {:.5}", c.gamma);
    println!("E_tau        {:.5} +- {:.5} (pi A / L = {:.5})", c.e_tau, c.e_tau_se, c.e_tau_formula);
    println!("e_I direct   {:.4} +- {:.4}", c.e_i_direct, c.e_i_direct_se);
    println!("e_I Kac      {:.4} +- {:.4} (8 pi A = {:.4}), z = {:.2}", c.e_i_kac, c.e_i_kac_se, c.e_i_area, c.kac_z);
    println!("e'_I         {:.4}", c.e_i_prime);
    println!("c = e_I / Gamma^2 = {:.5}", c.c);
    let s = estimate_sigma(&BilliardSystem { table: t }, 10_000, 2000, 12)?;
    println!("Sigma^       {:.5} +- {:.5}", s.sigma, s.se);
    Ok(())
}
