//! Per-stream seeds and deterministic parallel maps.
//!
//! `derive_seed(master, id)` is the splitmix64 finalizer applied to
//! `master + GAMMA * (id + 1)`. The finalizer is a bijection on `u64` and
//! `GAMMA` is odd, so distinct stream ids under one master never collide.
//! The scheme is part of the output format and must not change.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn derive_seed(master: u64, stream_id: u64) -> u64 {
    let mut z = master.wrapping_add(GAMMA.wrapping_mul(stream_id.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream_rng(master: u64, stream_id: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, stream_id))
}

/// Master seed for an independent sub-experiment, keyed by a label.
pub fn sub_master(master: u64, label: &str) -> u64 {
    let tag = label.bytes().fold(0xCBF2_9CE4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01B3));
    derive_seed(master ^ tag, u64::MAX - 1)
}

/// Runs `f(stream_id, rng)` for every stream in parallel and returns results in stream order.
pub fn par_streams<T, F>(master: u64, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut ChaCha8Rng) -> T + Sync,
{
    (0..n as u64)
        .into_par_iter()
        .map(|id| {
            let mut rng = stream_rng(master, id);
            f(id, &mut rng)
        })
        .collect()
}
