//! Deterministic random streams.
//!
//! All randomness in an experiment flows from one master seed through named
//! sub-streams ("velocity", "initial-vector", "sampler", …), so components can
//! be re-run in isolation and thread scheduling can never reorder draws. Each
//! sub-stream is an independent counter-based ChaCha12 generator whose seed is
//! derived from (master, label, index) by a splitmix64 hash chain; the same
//! triple always yields the same stream on every platform.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Advance a splitmix64 state and return the next output word.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A master seed from which labeled, indexed sub-streams are derived.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedStream {
    master: u64,
}

impl SeedStream {
    pub fn new(master: u64) -> Self {
        SeedStream { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Derive the 256-bit seed for the sub-stream `(label, index)`.
    fn derive_seed(&self, label: &str, index: u64) -> [u8; 32] {
        // Mix the label bytes and index into a splitmix64 chain; eight words of
        // input state expand into four words of ChaCha key material.
        let mut state = self.master ^ 0x6c79_6170_6e6f_726d; // "lyapnorm" tag
        for chunk in label.as_bytes().chunks(8) {
            let mut word = [0u8; 8];
            word[..chunk.len()].copy_from_slice(chunk);
            state ^= u64::from_le_bytes(word);
            splitmix64(&mut state);
        }
        state ^= index;
        let mut seed = [0u8; 32];
        for word in seed.chunks_mut(8) {
            word.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        seed
    }

    /// Deterministic generator for the sub-stream `(label, index)`.
    pub fn stream(&self, label: &str, index: u64) -> ChaCha12Rng {
        ChaCha12Rng::from_seed(self.derive_seed(label, index))
    }
}
