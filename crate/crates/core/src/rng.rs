//! Counter-based random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 keystream
//! addressed by `(seed, stream id, word position)`, so workers never share
//! generator state and results do not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Stream {
    pub seed: u64,
    pub id: u64,
}

impl Stream {
    pub fn new(seed: u64, id: u64) -> Self {
        Self { seed, id }
    }

    /// Child stream for a sub-task; distinct `(tag, index)` pairs give
    /// distinct ids.
    pub fn child(&self, tag: u16, index: u32) -> Self {
        let mix = ((tag as u64) << 48) ^ ((index as u64) << 16) ^ self.id.rotate_left(7);
        Self {
            seed: self.seed,
            id: splitmix64(mix ^ 0x5851_f42d_4c95_7f2d),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.id);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Standard normal variate by Marsaglia's polar rejection method.
///
/// Produces one value per call and discards the paired variate so the
/// sequence depends only on the number of calls.
pub fn polar_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u = 2.0 * rng.gen::<f64>() - 1.0;
        let v = 2.0 * rng.gen::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

/// Uniform variate on the open interval (0, 1).
pub fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u = rng.gen::<f64>();
        if u > 0.0 {
            return u;
        }
    }
}
