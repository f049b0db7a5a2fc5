use crate::billiard::{block_sizes, BilliardTable};
use crate::error::{contract, Error, Result};
use crate::geometry::{torus_intersection_count, translate_count, Segment};
use crate::seed::{par_streams, sub_master};
use crate::zext::{sample_endpoints, variance_from_endpoints, BaseSystem};
use rand::Rng;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsReport {
    /// Mass of the collision section, `2 L`.
    pub gamma: f64,
    pub e_tau: f64,
    pub e_tau_se: f64,
    /// `pi A / L`
    pub e_tau_formula: f64,
    /// `Gamma^2` times the mean torus crossing count of two independent arcs.
    pub e_i_direct: f64,
    pub e_i_direct_se: f64,
    /// `4 Gamma E_tau`
    pub e_i_kac: f64,
    pub e_i_kac_se: f64,
    /// `8 pi A`
    pub e_i_area: f64,
    /// `E_tau^{-2} Gamma^{-2} e_I`
    pub e_i_prime: f64,
    /// `e_I / Gamma^2`, the mean crossing count per pair of normalized draws.
    pub c: f64,
    pub c_se: f64,
    pub n_pairs: usize,
    pub n_tau: usize,
    pub resampled: u64,
    /// `|e_i_direct - e_i_kac|` in combined standard errors.
    pub kac_z: f64,
    pub consistent: bool,
}

impl ConstantsReport {
    pub fn passed(&self) -> bool {
        self.consistent && [self.gamma, self.e_tau, self.e_i_direct, self.e_i_kac, self.e_i_prime].iter().all(|&v| v > 0.0)
    }
}

fn arc_of<R: Rng + ?Sized>(table: &BilliardTable, rng: &mut R, bad: &mut u64) -> Result<Segment> {
    loop {
        let x = table.sample_mu_bar(rng);
        match table.billiard_map(&x) {
            Ok((_, _, a)) => return Ok(a),
            Err(Error::TangentialHit { .. }) => *bad += 1,
            Err(e) => return Err(e),
        }
    }
}

/// Fails with `BprimeViolation` if the arc meets one of its vertical translates.
pub fn check_bprime(a: &Segment) -> Result<()> {
    let (lo, hi) = a.y_range();
    let span = (hi - lo).ceil() as i64 + 1;
    for ks in [-span..=-1, 1..=span] {
        match translate_count(a, a, ks) {
            Ok(0) => {}
            Ok(_) | Err(Error::OverlapDetected) => return Err(Error::BprimeViolation),
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

/// Mean torus crossing count of two independent arcs, `(mean, stderr, resampled)`.
pub fn pair_crossing_mean(table: &BilliardTable, n_pairs: usize, master: u64) -> Result<(f64, f64, u64)> {
    if n_pairs == 0 {
        return Err(contract("n_pairs must be positive"));
    }
    let blocks = block_sizes(n_pairs, 10_000);
    let parts = par_streams(master, blocks.len(), |id, rng| -> Result<(u64, u64, u64)> {
        let (mut s1, mut s2, mut bad) = (0u64, 0u64, 0u64);
        for _ in 0..blocks[id as usize] {
            let a = arc_of(table, rng, &mut bad)?;
            let b = arc_of(table, rng, &mut bad)?;
            check_bprime(&a)?;
            check_bprime(&b)?;
            let k = torus_intersection_count(&a, &b)? as u64;
            s1 += k;
            s2 += k * k;
        }
        Ok((s1, s2, bad))
    });
    let (mut s1, mut s2, mut bad) = (0u64, 0u64, 0u64);
    for p in parts {
        let p = p?;
        s1 += p.0;
        s2 += p.1;
        bad += p.2;
    }
    let n = n_pairs as f64;
    let mean = s1 as f64 / n;
    let var = (s2 as f64 / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    Ok((mean, (var / n).sqrt(), bad))
}

/// Both estimators of `e_I` and the derived constants.
pub fn estimate_constants(table: &BilliardTable, n_pairs: usize, n_tau: usize, master: u64) -> Result<ConstantsReport> {
    if n_pairs == 0 || n_tau == 0 {
        return Err(contract("estimate_constants needs n_pairs > 0 and n_tau > 0"));
    }
    let gamma = table.gamma();
    let (e_tau, e_tau_se, bad_tau) = table.mean_free_path(n_tau, sub_master(master, "tau"))?;
    let (c, c_se, bad_pairs) = pair_crossing_mean(table, n_pairs, sub_master(master, "pairs"))?;
    let e_i_direct = gamma * gamma * c;
    let e_i_direct_se = gamma * gamma * c_se;
    let e_i_kac = 4.0 * gamma * e_tau;
    let e_i_kac_se = 4.0 * gamma * e_tau_se;
    let kac_z = (e_i_direct - e_i_kac).abs() / (e_i_direct_se.powi(2) + e_i_kac_se.powi(2)).sqrt();
    Ok(ConstantsReport {
        gamma,
        e_tau,
        e_tau_se,
        e_tau_formula: table.mean_free_path_formula(),
        e_i_direct,
        e_i_direct_se,
        e_i_kac,
        e_i_kac_se,
        e_i_area: 8.0 * std::f64::consts::PI * table.quotient_area,
        e_i_prime: e_i_direct / (e_tau * e_tau * gamma * gamma),
        c,
        c_se,
        n_pairs,
        n_tau,
        resampled: bad_tau + bad_pairs,
        kac_z,
        consistent: kac_z <= 3.0,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SigmaEstimate {
    pub sigma: f64,
    pub se: f64,
    pub n: usize,
    pub n_paths: usize,
    pub resampled: u64,
}

/// `Sigma^ = E S_n^2 / n` from independent invariant-measure starts.
pub fn estimate_sigma<S: BaseSystem>(sys: &S, n: usize, n_paths: usize, master: u64) -> Result<SigmaEstimate> {
    if n == 0 || n_paths < 2 {
        return Err(contract("estimate_sigma needs n > 0 and at least 2 paths"));
    }
    let (ends, resampled) = sample_endpoints(sys, n, n_paths, master)?;
    let (sigma, se) = variance_from_endpoints(&ends, n, sys.dim());
    Ok(SigmaEstimate { sigma, se, n, n_paths, resampled })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;

    #[test]
    fn zero_pairs_rejected() {
        let t = BilliardTable::default_table();
        assert!(estimate_constants(&t, 0, 10, 1).is_err());
    }

    #[test]
    fn bprime_on_vertical_arc() {
        let a = Segment::new(Point2::new(0.5, 0.1), Point2::new(0.5, 1.4)).unwrap();
        assert_eq!(check_bprime(&a), Err(Error::BprimeViolation));
        let b = Segment::new(Point2::new(0.5, 0.1), Point2::new(0.9, 1.4)).unwrap();
        assert_eq!(check_bprime(&b), Ok(()));
    }

    #[test]
    fn kac_identity_small_sample() {
        let t = BilliardTable::default_table();
        let r = estimate_constants(&t, 50_000, 50_000, 3).unwrap();
        assert!(r.kac_z < 4.0, "{r:?}");
        assert!((r.e_i_kac - r.e_i_area).abs() < 4.0 * r.e_i_kac_se);
    }
}
