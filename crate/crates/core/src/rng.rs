//! Session randomness with independent named sub-streams.
//!
//! All protocol randomness (tear sizes, embed offsets, per-run R values, the
//! AONT randomizer block) is drawn from separate ChaCha20 streams so that a
//! seeded session is reproducible and the draws of one purpose never shift
//! another's.

use crate::field::Block;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

const STREAM_TEAR_SIZES: u64 = 1;
const STREAM_EMBED_OFFSETS: u64 = 2;
const STREAM_RUN_VALUES: u64 = 3;
const STREAM_AONT_RANDOMIZER: u64 = 4;

/// Randomness source for one sender session.
pub struct ProtocolRng {
    tear_sizes: ChaCha20Rng,
    embed_offsets: ChaCha20Rng,
    run_values: ChaCha20Rng,
    aont_randomizer: ChaCha20Rng,
}

impl ProtocolRng {
    /// Deterministic source: four independent sub-streams of one seed.
    pub fn from_seed(seed: [u8; 32]) -> ProtocolRng {
        let sub = |stream: u64| {
            let mut rng = ChaCha20Rng::from_seed(seed);
            rng.set_stream(stream);
            rng
        };
        ProtocolRng {
            tear_sizes: sub(STREAM_TEAR_SIZES),
            embed_offsets: sub(STREAM_EMBED_OFFSETS),
            run_values: sub(STREAM_RUN_VALUES),
            aont_randomizer: sub(STREAM_AONT_RANDOMIZER),
        }
    }

    /// Cryptographically strong source seeded from the operating system.
    pub fn from_entropy() -> ProtocolRng {
        ProtocolRng {
            tear_sizes: ChaCha20Rng::from_entropy(),
            embed_offsets: ChaCha20Rng::from_entropy(),
            run_values: ChaCha20Rng::from_entropy(),
            aont_randomizer: ChaCha20Rng::from_entropy(),
        }
    }

    pub(crate) fn tear_sizes(&mut self) -> &mut ChaCha20Rng {
        &mut self.tear_sizes
    }

    pub(crate) fn embed_offsets(&mut self) -> &mut ChaCha20Rng {
        &mut self.embed_offsets
    }

    pub(crate) fn run_values(&mut self) -> &mut ChaCha20Rng {
        &mut self.run_values
    }

    pub(crate) fn aont_randomizer(&mut self) -> &mut ChaCha20Rng {
        &mut self.aont_randomizer
    }
}

/// A uniformly random `ps`-bit block.
pub fn random_block(rng: &mut impl RngCore, ps: usize) -> Block {
    let mut bytes = vec![0u8; ps.div_ceil(8)];
    rng.fill_bytes(&mut bytes);
    if ps % 8 != 0 {
        bytes[0] &= 0xFF >> (8 - ps % 8);
    }
    Block::from_bytes(ps, &bytes).expect("pad bits masked")
}

/// A uniformly random nonzero `ps`-bit block, by rejection.
pub fn nonzero_block(rng: &mut impl RngCore, ps: usize) -> Block {
    loop {
        let b = random_block(rng, ps);
        if !b.is_zero() {
            return b;
        }
    }
}
