//! Stego key and the keyed generators derived from it.

use rand::RngCore;
use rand_chacha::ChaCha20Rng;
use rand::SeedableRng;
use sha2::{Digest, Sha256};

use crate::error::{Result, StegoError};

/// Shared secret between sender and receiver. All randomness in the scheme
/// is derived from it plus public image dimensions.
#[derive(Clone, PartialEq, Eq)]
pub struct StegoKey {
    master: Vec<u8>,
}

impl std::fmt::Debug for StegoKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("StegoKey(..)")
    }
}

impl StegoKey {
    pub fn new(master: impl Into<Vec<u8>>) -> Result<Self> {
        let master = master.into();
        if master.is_empty() {
            return Err(StegoError::InvalidKey("empty key".into()));
        }
        Ok(StegoKey { master })
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes = hex::decode(s.trim())
            .map_err(|e| StegoError::InvalidKey(format!("not hex: {e}")))?;
        Self::new(bytes)
    }

    /// `SHA-256(len(label) || label || index || master)`
    pub fn subkey(&self, label: &str, index: u64) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update((label.len() as u32).to_le_bytes());
        h.update(label.as_bytes());
        h.update(index.to_le_bytes());
        h.update(&self.master);
        h.finalize().into()
    }

    /// Seed for the Random scan strategy.
    pub fn schedule_seed(&self) -> u64 {
        let k = self.subkey("schedule", 0);
        u64::from_le_bytes(k[..8].try_into().unwrap())
    }

    /// Seed for the STC submatrix of lattice `lattice`.
    pub fn stc_seed(&self, lattice: usize) -> u64 {
        let k = self.subkey("stc", lattice as u64);
        u64::from_le_bytes(k[..8].try_into().unwrap())
    }
}

/// ChaCha20 keystream generator, addressable by stream id.
///
/// Integers are drawn as little-endian 64-bit words of the keystream; bounded
/// values use the multiply-high map `(x * bound) >> 64`, which never rejects.
pub struct KeyedStream {
    rng: ChaCha20Rng,
}

impl KeyedStream {
    pub fn new(label: &str, seed: u64, stream: u64) -> Self {
        let mut h = Sha256::new();
        h.update(label.as_bytes());
        h.update(seed.to_le_bytes());
        let key: [u8; 32] = h.finalize().into();
        let mut rng = ChaCha20Rng::from_seed(key);
        rng.set_stream(stream);
        KeyedStream { rng }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Value in `0..bound`.
    #[inline]
    pub fn below(&mut self, bound: u64) -> u64 {
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
