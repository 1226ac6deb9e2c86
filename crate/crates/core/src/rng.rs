//! Seeded random substreams.
//!
//! Every stochastic decision draws from a stream keyed by `(seed, tag, a, b)`,
//! so results do not depend on evaluation order or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub const TAG_INIT: u64 = 1;
pub const TAG_ADAPT: u64 = 2;
pub const TAG_START: u64 = 3;
pub const TAG_PROBLEM: u64 = 4;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn substream(seed: u64, tag: u64, a: u64, b: u64) -> StreamRng {
    let mut h = splitmix64(seed);
    for word in [tag, a, b] {
        h = splitmix64(h ^ splitmix64(word));
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// `n` values uniform on `[low, high)`.
pub fn uniform_vector<R: Rng + ?Sized>(rng: &mut R, n: usize, low: f64, high: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(low..high)).collect()
}

/// Start vector for trial `seed`, uniform per component on `[low, high)`.
pub fn start_vector(seed: u64, n: usize, low: f64, high: f64) -> Vec<f64> {
    uniform_vector(&mut substream(seed, TAG_START, 0, 0), n, low, high)
}
