//! Seed derivation and the stateless counter-based generator.
//!
//! Every random stage in a pipeline draws from a seed split off a single
//! master seed, so any stage can be rerun in isolation. Sequential stages use
//! ChaCha8 streams; the agent-based step uses [`CounterRng`], which maps
//! `(key, day, node, stream)` straight to a uniform variate and therefore does
//! not depend on iteration order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_MULT: u64 = 0xD1B5_4A32_D192_ED03;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for numbered sub-tasks (repetitions, blocks, rows).
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    mix64(mix64(parent ^ GOLDEN_GAMMA).wrapping_add(index.wrapping_mul(STREAM_MULT)))
}

/// Child seed for a named pipeline stage.
pub fn stage_seed(parent: u64, stage: &str) -> u64 {
    // FNV-1a over the stage name
    let tag = stage
        .bytes()
        .fold(0xCBF2_9CE4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01B3));
    derive_seed(parent, tag)
}

/// ChaCha8 generator on an explicit stream of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Converts the top 53 bits of `bits` into a uniform in `[0, 1)`.
#[inline]
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// Stateless keyed generator: the same `(key, day, node, stream)` always
/// yields the same variate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub fn new(key: u64) -> Self {
        Self { key }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    #[inline]
    pub fn bits(&self, day: u32, node: u32, stream: u32) -> u64 {
        let counter = ((day as u64) << 32) | node as u64;
        let h = mix64(self.key ^ mix64(counter.wrapping_add(GOLDEN_GAMMA)));
        mix64(h.wrapping_add((stream as u64 + 1).wrapping_mul(STREAM_MULT)))
    }

    #[inline]
    pub fn uniform(&self, day: u32, node: u32, stream: u32) -> f64 {
        unit_f64(self.bits(day, node, stream))
    }
}
