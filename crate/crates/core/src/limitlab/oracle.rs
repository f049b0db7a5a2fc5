use super::EmpiricalDistribution;
use crate::error::{contract, Result};
use crate::localtime::{occupation_square, LocalTimeHistogram};
use crate::seed::par_streams;
use rand::RngCore;

/// `E int L_1(x)^2 dx = 8 / (3 sqrt(2 pi))` for standard Brownian motion.
pub const ORACLE_MEAN: f64 = 1.063_846_081_070_487;

/// Samples of `sigma^{-1/2} m^{-3/2} sum_l N_m(l)^2` over `reps` independent simple random walks,
/// approximating `int L_1(x)^2 dx` for Brownian motion of variance `sigma`.
pub fn brownian_l2_oracle(m: usize, reps: usize, sigma: f64, master: u64) -> Result<EmpiricalDistribution> {
    if m < 100_000 {
        return Err(contract(format!("oracle walks need m >= 10^5, got {m}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(contract(format!("sigma must be positive, got {sigma}")));
    }
    let scale = sigma.powf(-0.5) * (m as f64).powf(-1.5);
    let vals = par_streams(master, reps, |_, rng| {
        let mut h = LocalTimeHistogram::new();
        let mut s = 0i64;
        let mut done = 0;
        while done < m {
            let mut w = rng.next_u64();
            let take = (m - done).min(64);
            for _ in 0..take {
                h.push(s);
                s += (w & 1) as i64 * 2 - 1;
                w >>= 1;
            }
            done += take;
        }
        occupation_square(&h) as f64 * scale
    });
    EmpiricalDistribution::new(vals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_constant_matches_integral() {
        // 2 int_0^1 (1 - v) (2 pi v)^{-1/2} dv by the midpoint rule after v = w^2.
        let k = 200_000;
        let h = 1.0 / k as f64;
        let s: f64 = (0..k)
            .map(|i| {
                let w = (i as f64 + 0.5) * h;
                2.0 * (1.0 - w * w) * 2.0 / (2.0 * std::f64::consts::PI).sqrt() * h
            })
            .sum();
        assert!((s - ORACLE_MEAN).abs() < 1e-9, "{s}");
    }

    #[test]
    fn oracle_contract() {
        assert!(brownian_l2_oracle(1000, 10, 1.0, 0).is_err());
        assert!(brownian_l2_oracle(100_000, 10, 0.0, 0).is_err());
        assert!(brownian_l2_oracle(100_000, 1, 1.0, 0).is_err());
        let d = brownian_l2_oracle(100_000, 2, 1.0, 0).unwrap();
        assert_eq!(d.n(), 2);
        assert_eq!(d, brownian_l2_oracle(100_000, 2, 1.0, 0).unwrap());
    }
}
