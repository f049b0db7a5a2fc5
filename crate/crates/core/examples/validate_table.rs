//! Checks the default table and a few broken ones.
//!
//! cargo run --release --example validate_table

use zxc::billiard::{BilliardTable, DEFAULT_TAU_MAX};

fn main() -> zxc::Result<()> {
    let t = BilliardTable::default_table();
    let r = t.validate(10_000)?;
    println!("default table: {} disks, area {:.5}, boundary {:.5}", r.disks, t.quotient_area, t.boundary_length);
    println!("  min clearance {:.4}, longest flight {:.4} (tau_max {})", r.min_clearance, r.max_flight, r.tau_max);
    println!("  mean free path pi A / L = {:.5}", t.mean_free_path_formula());

    let bad: [(&str, &[(f64, f64, f64)]); 4] = [
        ("negative radius", &[(0.25, 0.25, 0.4), (0.75, 0.75, -0.2)]),
        ("overlapping copies", &[(0.5, 0.5, 0.36), (0.0, 0.0, 0.36)]),
        ("open corridor", &[(0.25, 0.25, 0.3), (0.75, 0.75, 0.3)]),
        ("single disk", &[(0.5, 0.5, 0.3)]),
    ];
    for (name, disks) in bad {
        let res = BilliardTable::new(disks, DEFAULT_TAU_MAX).and_then(|t| t.validate(10_000));
        match res {
            Ok(_) => println!("{name}: accepted"),
            Err(e) => println!("{name}: {e}"),
        }
    }
    Ok(())
}
