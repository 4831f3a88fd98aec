//! Counter-based random substreams.
//!
//! Every random draw in a sweep comes from a stream keyed by
//! `(master seed, channel index, block index, purpose)`. The key is used
//! directly as the ChaCha8 key, so streams are independent of each other and of
//! the order in which they are opened.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Channel,
    Symbols,
    Noise,
    Pilots,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Channel => 0,
            Purpose::Symbols => 1,
            Purpose::Noise => 2,
            Purpose::Pilots => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedTree {
    master: u64,
}

impl SeedTree {
    pub fn new(master: u64) -> Self {
        SeedTree { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn stream(&self, channel: u64, block: u64, purpose: Purpose) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        for (chunk, word) in key
            .chunks_exact_mut(8)
            .zip([self.master, channel, block, purpose.tag()])
        {
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}
