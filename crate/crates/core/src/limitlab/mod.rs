//! Limit-law checks: the Brownian occupation oracle, the billiard constants,
//! distributional comparisons and the almost sure laws in the quotient and
//! transient cases.
//!
//! Statistics built from self-intersection counts are taken over ordered
//! pairs, i.e. `2 nu_n` and `2 N_t`.

mod appendix;
mod constants;
mod oracle;
mod probes;
mod theorems;

pub use appendix::*;
pub use constants::*;
pub use oracle::*;
pub use probes::*;
pub use theorems::*;

use crate::error::{contract, Result};
use serde::Serialize;

/// Sorted sample of a real statistic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(contract(format!("an empirical distribution needs at least 2 samples, got {}", samples.len())));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(contract("NaN sample"));
        }
        samples.sort_by(f64::total_cmp);
        Ok(EmpiricalDistribution { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    /// `#{x_i <= x} / n`
    pub fn cdf(&self, x: f64) -> f64 {
        self.samples.partition_point(|&s| s <= x) as f64 / self.n() as f64
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.n() as f64
    }

    pub fn mean_se(&self) -> (f64, f64) {
        crate::zext::mean_se(&self.samples)
    }

    /// Lower empirical quantile.
    pub fn quantile(&self, p: f64) -> f64 {
        let i = ((p.clamp(0.0, 1.0) * self.n() as f64).ceil() as usize).clamp(1, self.n());
        self.samples[i - 1]
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    pub fn scaled(&self, f: f64) -> Self {
        let mut samples: Vec<f64> = self.samples.iter().map(|x| x * f).collect();
        if f < 0.0 {
            samples.reverse();
        }
        EmpiricalDistribution { samples }
    }
}

/// Sup distance between the two empirical CDFs.
pub fn ks_distance(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> f64 {
    let (x, y) = (a.samples(), b.samples());
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let v = if x[i] <= y[j] { x[i] } else { y[j] };
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / nx - j as f64 / ny).abs());
    }
    d
}

/// Strictly decreasing sequence.
pub fn monotone_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

pub(crate) fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
