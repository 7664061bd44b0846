//! Counter-based random stream.
//!
//! Every draw is a hash of `(master_seed, stream_id, counter, word)`, so a
//! trial's randomness depends only on its coordinates and never on which
//! thread ran it or in what order. Within one `(stream_id, counter)` cell the
//! successive words form a SplitMix64 sequence keyed by the cell hash.

use rand_core::{impls, RngCore};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_SALT: u64 = 0xD1B5_4A32_D192_ED03;
const COUNTER_SALT: u64 = 0x8CB9_2BA7_2F3D_8DD7;

/// SplitMix64 output finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn cell_key(master_seed: u64, stream_id: u64, counter: u64) -> u64 {
    let stream_key = mix64(master_seed ^ mix64(stream_id ^ STREAM_SALT));
    mix64(stream_key ^ mix64(counter.wrapping_mul(GOLDEN_GAMMA) ^ COUNTER_SALT))
}

/// Deterministic random stream addressed by `(master_seed, stream_id, counter)`.
///
/// Cloning a stream replays the same values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    counter: u64,
    key: u64,
    word: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64, counter: u64) -> Self {
        Self {
            master_seed,
            stream_id,
            counter,
            key: cell_key(master_seed, stream_id, counter),
            word: 0,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Stream for another counter value in the same `(master_seed, stream_id)`.
    pub fn at_counter(&self, counter: u64) -> Self {
        Self::new(self.master_seed, self.stream_id, counter)
    }

    #[inline]
    pub fn next_word(&mut self) -> u64 {
        self.word = self.word.wrapping_add(1);
        mix64(self.key.wrapping_add(self.word.wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_word() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`.
    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

impl RngCore for RngStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_word() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.next_word()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        impls::fill_bytes_via_next(self, dst)
    }
}
