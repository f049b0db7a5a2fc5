//! Z^d-extensions: a base map with an integer step function, and Birkhoff sums over it.

use crate::billiard::{BilliardTable, CollisionState};
use crate::error::{contract, Error, Result};
use crate::seed::par_streams;
use num_integer::Integer;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeSet;

/// A step in `Z^d`, `d <= 3`; unused coordinates are zero.
pub type Step = [i64; 3];

/// A probability-preserving base map `T` with a bounded step function `phi`.
pub trait BaseSystem: Sync {
    type State: Send;

    fn dim(&self) -> usize;

    /// Declared bound on every coordinate of `phi`.
    fn step_bound(&self) -> i64;

    /// A draw from the invariant probability measure.
    fn sample(&self, rng: &mut ChaCha8Rng) -> Self::State;

    /// Returns `phi(x)` and replaces `x` by `T x`.
    fn advance(&self, state: &mut Self::State) -> Result<Step>;

    /// `S_n` without storing the path.
    fn walk_endpoint(&self, state: &mut Self::State, n: usize) -> Result<Step> {
        let mut s = [0i64; 3];
        for _ in 0..n {
            let p = self.advance(state)?;
            for c in 0..3 {
                s[c] += p[c];
            }
        }
        Ok(s)
    }
}

/// Initial laws on the doubling map's phase space `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum InitialLaw {
    /// Lebesgue measure, the invariant law.
    Invariant,
    /// Lebesgue conditioned to `[0, 1/2)`.
    LeftHalf,
    /// Density `2x`.
    Linear,
    /// Dirac mass at a point. Not absolutely continuous; rejected by [`InitialLaw::validate`].
    PointMass(f64),
}

impl InitialLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            InitialLaw::PointMass(x) => Err(contract(format!("initial law must be absolutely continuous, got a point mass at {x}"))),
            _ => Ok(()),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "invariant" => Ok(InitialLaw::Invariant),
            "left-half" => Ok(InitialLaw::LeftHalf),
            "linear" => Ok(InitialLaw::Linear),
            other => match other.strip_prefix("point:") {
                Some(x) => x.parse().map(InitialLaw::PointMass).map_err(|_| Error::Config(format!("bad point mass '{other}'"))),
                None => Err(Error::Config(format!("unknown initial law '{other}'"))),
            },
        }
    }

    pub fn name(&self) -> String {
        match self {
            InitialLaw::Invariant => "invariant".into(),
            InitialLaw::LeftHalf => "left-half".into(),
            InitialLaw::Linear => "linear".into(),
            InitialLaw::PointMass(x) => format!("point:{x}"),
        }
    }

    /// The first 64 binary digits of a draw `x`, most significant first.
    fn digits(&self, rng: &mut ChaCha8Rng) -> u64 {
        match self {
            InitialLaw::Invariant => rng.next_u64(),
            InitialLaw::LeftHalf => rng.next_u64() >> 1,
            InitialLaw::Linear => rng.next_u64().max(rng.next_u64()),
            InitialLaw::PointMass(x) => (x.clamp(0.0, 1.0 - f64::EPSILON) * 2f64.powi(64)) as u64,
        }
    }
}

/// The doubling map `x -> 2x mod 1` read through its binary itinerary; digit 1 is a `+1` step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoublingToy {
    pub dim: usize,
}

/// Itinerary source: a digit word followed by an RNG stream.
#[derive(Debug, Clone)]
pub struct ToyState {
    rng: ChaCha8Rng,
    word: u64,
    left: u32,
}

impl ToyState {
    pub fn new(law: InitialLaw, rng: &mut ChaCha8Rng) -> Self {
        let word = law.digits(rng);
        ToyState { rng: ChaCha8Rng::seed_from_u64(rng.next_u64()), word, left: 64 }
    }

    /// A state whose itinerary starts with the given digits (`true` is `+1`).
    pub fn from_digits(digits: &[bool], rng: &mut ChaCha8Rng) -> Self {
        assert!(digits.len() <= 64);
        let mut word = rng.next_u64() >> digits.len().min(63);
        if digits.len() == 64 {
            word = 0;
        }
        for (i, &d) in digits.iter().enumerate() {
            word |= (d as u64) << (63 - i);
        }
        ToyState { rng: ChaCha8Rng::seed_from_u64(rng.next_u64()), word, left: 64 }
    }

    #[inline]
    fn refill(&mut self) {
        if self.left == 0 {
            self.word = self.rng.next_u64();
            self.left = 64;
        }
    }

    #[inline]
    pub fn next_bit(&mut self) -> bool {
        self.refill();
        let b = self.word >> 63 == 1;
        self.word <<= 1;
        self.left -= 1;
        b
    }

    /// Walks `n` unit steps; `visit` sees `S_0 .. S_{n-1}`. Returns `S_n`.
    #[inline]
    pub fn walk_1d<F: FnMut(i64)>(&mut self, n: usize, mut visit: F) -> i64 {
        let mut s = 0i64;
        let mut done = 0usize;
        while done < n {
            self.refill();
            let take = (self.left as usize).min(n - done);
            let mut w = self.word;
            for _ in 0..take {
                visit(s);
                s += ((w >> 63) as i64) * 2 - 1;
                w <<= 1;
            }
            self.word = if take == 64 { 0 } else { self.word << take };
            self.left -= take as u32;
            done += take;
        }
        s
    }

    /// `S_n` of the 1-d walk by bit counting.
    pub fn endpoint_1d(&mut self, n: usize) -> i64 {
        let mut ones = 0u64;
        let mut done = 0usize;
        while done < n {
            self.refill();
            let take = (self.left as usize).min(n - done);
            let w = if take == 64 { self.word } else { self.word >> (64 - take) };
            ones += w.count_ones() as u64;
            self.word = if take == 64 { 0 } else { self.word << take };
            self.left -= take as u32;
            done += take;
        }
        2 * ones as i64 - n as i64
    }
}

impl DoublingToy {
    pub fn new(dim: usize) -> Result<Self> {
        if dim != 1 && dim != 3 {
            return Err(contract(format!("toy dimension must be 1 or 3, got {dim}")));
        }
        Ok(DoublingToy { dim })
    }

    pub fn sample_law(&self, law: InitialLaw, rng: &mut ChaCha8Rng) -> Result<ToyState> {
        law.validate()?;
        Ok(ToyState::new(law, rng))
    }
}

impl BaseSystem for DoublingToy {
    type State = ToyState;

    fn dim(&self) -> usize {
        self.dim
    }

    fn step_bound(&self) -> i64 {
        1
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> ToyState {
        ToyState::new(InitialLaw::Invariant, rng)
    }

    fn advance(&self, state: &mut ToyState) -> Result<Step> {
        let mut s = [0i64; 3];
        for c in s.iter_mut().take(self.dim) {
            *c = if state.next_bit() { 1 } else { -1 };
        }
        Ok(s)
    }

    fn walk_endpoint(&self, state: &mut ToyState, n: usize) -> Result<Step> {
        if self.dim == 1 {
            return Ok([state.endpoint_1d(n), 0, 0]);
        }
        let mut s = [0i64; 3];
        for _ in 0..n {
            let p = self.advance(state)?;
            for c in 0..3 {
                s[c] += p[c];
            }
        }
        Ok(s)
    }
}

/// The Lorentz gas seen as a Z-extension of its quotient map.
#[derive(Debug, Clone)]
pub struct BilliardSystem {
    pub table: BilliardTable,
}

impl BaseSystem for BilliardSystem {
    type State = CollisionState;

    fn dim(&self) -> usize {
        1
    }

    fn step_bound(&self) -> i64 {
        self.table.d_bound()
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> CollisionState {
        self.table.sample_mu_bar(rng)
    }

    fn advance(&self, state: &mut CollisionState) -> Result<Step> {
        let (y, _, _) = self.table.billiard_map(state)?;
        let phi = y.cell - state.cell;
        *state = CollisionState { cell: 0, ..y };
        Ok([phi, 0, 0])
    }
}

/// A system whose step function is identically zero.
#[derive(Debug, Clone, Copy)]
pub struct ZeroSystem;

impl BaseSystem for ZeroSystem {
    type State = ();
    fn dim(&self) -> usize {
        1
    }
    fn step_bound(&self) -> i64 {
        0
    }
    fn sample(&self, _: &mut ChaCha8Rng) {}
    fn advance(&self, _: &mut ()) -> Result<Step> {
        Ok([0; 3])
    }
}

/// `S_0 .. S_n`, stored flat with `dim` coordinates per level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkPath {
    pub dim: usize,
    pub n: usize,
    pub values: Vec<i64>,
    pub variance_hint: Option<f64>,
}

impl WalkPath {
    pub fn from_values_1d(values: Vec<i64>) -> Result<Self> {
        if values.first() != Some(&0) {
            return Err(contract("a walk starts at 0"));
        }
        Ok(WalkPath { dim: 1, n: values.len() - 1, values, variance_hint: None })
    }

    pub fn at(&self, k: usize) -> &[i64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn end(&self) -> &[i64] {
        self.at(self.n)
    }
}

pub fn birkhoff_path<S: BaseSystem>(sys: &S, x0: &mut S::State, n: usize) -> Result<WalkPath> {
    if n == 0 {
        return Err(contract("birkhoff_path needs n >= 1"));
    }
    let d = sys.dim();
    let mut values = vec![0i64; (n + 1) * d];
    for k in 0..n {
        let p = sys.advance(x0)?;
        for c in 0..d {
            if p[c].abs() > sys.step_bound() {
                return Err(contract(format!("step {} exceeds the declared bound {}", p[c], sys.step_bound())));
            }
            values[(k + 1) * d + c] = values[k * d + c] + p[c];
        }
    }
    Ok(WalkPath { dim: d, n, values, variance_hint: None })
}

/// `Sigma^ = mean |S_n|^2 / (n d)` with its standard error.
pub fn variance_estimate(paths: &[WalkPath]) -> Result<(f64, f64)> {
    if paths.len() < 100 {
        return Err(contract(format!("variance_estimate needs at least 100 paths, got {}", paths.len())));
    }
    let n = paths[0].n;
    if paths.iter().any(|p| p.n != n || p.dim != paths[0].dim) {
        return Err(contract("variance_estimate needs paths of equal length and dimension"));
    }
    let ends: Vec<Step> = paths
        .iter()
        .map(|p| {
            let mut s = [0; 3];
            s[..p.dim].copy_from_slice(p.end());
            s
        })
        .collect();
    Ok(variance_from_endpoints(&ends, n, paths[0].dim))
}

pub fn variance_from_endpoints(ends: &[Step], n: usize, dim: usize) -> (f64, f64) {
    let vals: Vec<f64> = ends
        .iter()
        .map(|e| e.iter().map(|&c| (c * c) as f64).sum::<f64>() / (n as f64 * dim as f64))
        .collect();
    mean_se(&vals)
}

pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let m = v.len() as f64;
    let mean = v.iter().sum::<f64>() / m;
    if v.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Draws `S_n` for `n_paths` invariant-measure starts. Tangential billiard hits restart the path.
pub fn sample_endpoints<S: BaseSystem>(sys: &S, n: usize, n_paths: usize, master: u64) -> Result<(Vec<Step>, u64)> {
    let parts = par_streams(master, n_paths, |_, rng| -> Result<(Step, u64)> {
        let mut bad = 0;
        loop {
            let mut x = sys.sample(rng);
            match sys.walk_endpoint(&mut x, n) {
                Ok(e) => return Ok((e, bad)),
                Err(Error::TangentialHit { .. }) => bad += 1,
                Err(e) => return Err(e),
            }
        }
    });
    let mut ends = Vec::with_capacity(n_paths);
    let mut bad = 0;
    for p in parts {
        let (e, b) = p?;
        ends.push(e);
        bad += b;
    }
    Ok((ends, bad))
}

#[derive(Debug, Clone, Serialize)]
pub struct StepStats {
    pub samples: usize,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub max_abs: i64,
    pub distinct: Vec<i64>,
    pub resampled: u64,
}

/// One-step statistics of `phi` over i.i.d. invariant-measure draws.
pub fn step_statistics<S: BaseSystem>(sys: &S, n_samples: usize, master: u64) -> Result<StepStats> {
    let blocks = crate::billiard::block_sizes(n_samples, 10_000);
    let parts = par_streams(master, blocks.len(), |id, rng| -> Result<(Vec<Step>, u64)> {
        let mut out = Vec::with_capacity(blocks[id as usize]);
        let mut bad = 0;
        while out.len() < blocks[id as usize] {
            let mut x = sys.sample(rng);
            match sys.advance(&mut x) {
                Ok(p) => out.push(p),
                Err(Error::TangentialHit { .. }) => bad += 1,
                Err(e) => return Err(e),
            }
        }
        Ok((out, bad))
    });
    let d = sys.dim();
    let (mut s1, mut s2) = (vec![0.0; d], vec![0.0; d]);
    let mut max_abs = 0;
    let mut distinct = BTreeSet::new();
    let mut resampled = 0;
    for p in parts {
        let (steps, bad) = p?;
        resampled += bad;
        for st in steps {
            for c in 0..d {
                s1[c] += st[c] as f64;
                s2[c] += (st[c] * st[c]) as f64;
                max_abs = max_abs.max(st[c].abs());
                distinct.insert(st[c]);
            }
        }
    }
    let n = n_samples as f64;
    let mean: Vec<f64> = s1.iter().map(|s| s / n).collect();
    let variance = s2.iter().zip(&mean).map(|(s, m)| s / n - m * m).collect();
    Ok(StepStats { samples: n_samples, mean, variance, max_abs, distinct: distinct.into_iter().collect(), resampled })
}

/// Lattice period of a 1-d step function: gcd of differences of observed values.
pub fn lattice_period(distinct: &[i64]) -> i64 {
    let first = distinct.first().copied().unwrap_or(0);
    distinct.iter().fold(0i64, |g, &v| g.gcd(&(v - first))).max(1)
}

#[derive(Debug, Clone, Serialize)]
pub struct LltPoint {
    pub target: i64,
    pub level: i64,
    pub empirical: f64,
    pub predicted: f64,
    pub rel_dev: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LltReport {
    pub n: usize,
    pub n_paths: usize,
    pub period: i64,
    pub sigma_hat: f64,
    pub points: Vec<LltPoint>,
    pub max_rel_dev: f64,
    pub mass_beyond_range: f64,
    pub resampled: u64,
}

/// Empirical mass of `S_n` against `p * exp(-N^2 / (2 Sigma n)) / sqrt(2 pi Sigma n)` on the attainable sublattice.
pub fn llt_check<S: BaseSystem>(sys: &S, n: usize, n_paths: usize, master: u64) -> Result<LltReport> {
    if sys.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: sys.dim() });
    }
    let probe = step_statistics(sys, 20_000, crate::seed::sub_master(master, "llt-probe"))?;
    let period = lattice_period(&probe.distinct);
    let first = probe.distinct[0];
    let (ends, resampled) = sample_endpoints(sys, n, n_paths, crate::seed::sub_master(master, "llt-paths"))?;
    let s: Vec<i64> = ends.iter().map(|e| e[0]).collect();
    let (sigma_hat, _) = variance_from_endpoints(&ends, n, 1);
    let r = ((sigma_hat * n as f64).sqrt().floor() as i64).max(period);
    let anchor = (n as i64 * first).rem_euclid(period);
    let mut points = Vec::new();
    for target in [0, r, -r, 2 * r, -2 * r] {
        let level = target + (anchor - target).rem_euclid(period);
        let hits = s.iter().filter(|&&v| v == level).count();
        let empirical = hits as f64 / n_paths as f64;
        let var = sigma_hat * n as f64;
        let predicted = period as f64 * (-(level * level) as f64 / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt();
        points.push(LltPoint { target, level, empirical, predicted, rel_dev: (empirical - predicted).abs() / predicted });
    }
    let bound = n as i64 * sys.step_bound();
    let beyond = s.iter().filter(|&&v| v.abs() > bound).count();
    let max_rel_dev = points.iter().map(|p| p.rel_dev).fold(0.0, f64::max);
    Ok(LltReport { n, n_paths, period, sigma_hat, points, max_rel_dev, mass_beyond_range: beyond as f64 / n_paths as f64, resampled })
}

/// Uniform draw helper for tests and examples.
pub fn uniform<R: Rng>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stream_rng;

    #[test]
    fn prefix_sums_from_digits() {
        let toy = DoublingToy::new(1).unwrap();
        let mut rng = stream_rng(1, 0);
        let mut x = ToyState::from_digits(&[true, true, false], &mut rng);
        let p = birkhoff_path(&toy, &mut x, 3).unwrap();
        assert_eq!(p.values, vec![0, 1, 2, 1]);
    }

    #[test]
    fn fast_walks_agree_with_stepping() {
        let toy = DoublingToy::new(1).unwrap();
        for seed in 0..20 {
            let n = 37 + 61 * seed as usize;
            let mut a = toy.sample(&mut stream_rng(seed, 0));
            let mut b = a.clone();
            let mut c = a.clone();
            let p = birkhoff_path(&toy, &mut a, n).unwrap();
            let mut seen = Vec::new();
            let end = b.walk_1d(n, |s| seen.push(s));
            assert_eq!(end, p.end()[0]);
            assert_eq!(seen, p.values[..n].to_vec());
            assert_eq!(c.endpoint_1d(n), end);
            // Streams stay aligned after a partial word.
            let bits = [a.next_bit(), b.next_bit(), c.next_bit()];
            assert!(bits[0] == bits[1] && bits[1] == bits[2]);
        }
    }

    #[test]
    fn toy_variance_is_one() {
        let toy = DoublingToy::new(1).unwrap();
        let (ends, _) = sample_endpoints(&toy, 10_000, 10_000, 77).unwrap();
        let (v, se) = variance_from_endpoints(&ends, 10_000, 1);
        assert!((v - 1.0).abs() < 0.03, "{v} +- {se}");
    }

    #[test]
    fn variance_contracts() {
        let p = WalkPath::from_values_1d(vec![0, 1]).unwrap();
        assert!(variance_estimate(std::slice::from_ref(&p)).is_err());
        assert!(variance_estimate(&[]).is_err());
        let zero: Vec<WalkPath> = (0..100).map(|_| birkhoff_path(&ZeroSystem, &mut (), 50).unwrap()).collect();
        assert_eq!(variance_estimate(&zero).unwrap().0, 0.0);
    }

    #[test]
    fn billiard_path_telescopes_cells() {
        let sys = BilliardSystem { table: BilliardTable::default_table() };
        let mut rng = stream_rng(2, 0);
        let x0 = sys.sample(&mut rng);
        let mut x = x0;
        let p = birkhoff_path(&sys, &mut x, 500).unwrap();
        let orbit = sys.table.trace(&x0, 500).unwrap();
        for k in 0..=500 {
            assert_eq!(p.at(k)[0], orbit.states[k].cell - x0.cell);
        }
    }

    #[test]
    fn toy3d_coordinates_uncorrelated() {
        let toy = DoublingToy::new(3).unwrap();
        let mut x = toy.sample(&mut stream_rng(3, 0));
        let n = 100_000;
        let mut sums = [[0f64; 3]; 3];
        for _ in 0..n {
            let p = toy.advance(&mut x).unwrap();
            for a in 0..3 {
                for b in 0..3 {
                    sums[a][b] += (p[a] * p[b]) as f64;
                }
            }
        }
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    assert!((sums[a][b] / n as f64).abs() <= 0.02);
                }
            }
        }
    }

    #[test]
    fn toy_llt() {
        let toy = DoublingToy::new(1).unwrap();
        let rep = llt_check(&toy, 10_000, 400_000, 5).unwrap();
        assert_eq!(rep.period, 2);
        let p0 = rep.points[0].empirical;
        assert!((p0 * 100.0 / 2.0 - 0.398_942).abs() < 0.05 * 0.398_942, "{p0}");
        let ratio = rep.points[1].empirical / p0;
        assert!((ratio - (-0.5f64).exp()).abs() < 0.07 * (-0.5f64).exp(), "{ratio}");
        assert_eq!(rep.mass_beyond_range, 0.0);
    }

    #[test]
    fn billiard_is_aperiodic() {
        let sys = BilliardSystem { table: BilliardTable::default_table() };
        let st = step_statistics(&sys, 20_000, 9).unwrap();
        assert_eq!(lattice_period(&st.distinct), 1);
        assert!(st.max_abs <= sys.step_bound());
    }

    #[test]
    fn point_mass_rejected() {
        let toy = DoublingToy::new(1).unwrap();
        assert!(toy.sample_law(InitialLaw::PointMass(0.3), &mut stream_rng(0, 0)).is_err());
        assert!(DoublingToy::new(2).is_err());
    }

    #[test]
    fn left_half_starts_downward() {
        let toy = DoublingToy::new(1).unwrap();
        for s in 0..50 {
            let mut x = toy.sample_law(InitialLaw::LeftHalf, &mut stream_rng(s, 0)).unwrap();
            assert_eq!(toy.advance(&mut x).unwrap()[0], -1);
        }
    }
}
