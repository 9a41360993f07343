use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Deterministic, labelled RNG streams.
///
/// `stream(label, index)` returns a ChaCha12 generator keyed by a SplitMix64
/// expansion of `(seed, fnv1a64(label), index)`. Every (label, index) pair is
/// an independent stream that does not depend on creation order, so parallel
/// consumers indexed by path/particle/sample id produce the same output for
/// any thread count.
#[derive(Debug, Clone, Copy)]
pub struct StreamFactory {
    seed: u64,
}

impl StreamFactory {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Human-readable algorithm name, recorded in run manifests.
    pub const ALGORITHM: &'static str = "ChaCha12/SplitMix64-labelled-streams";

    pub fn stream(&self, label: &str, index: u64) -> ChaCha12Rng {
        let sid = mix(mix(self.seed, fnv1a64(label.as_bytes())), index);
        let mut state = sid;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix_next(&mut state).to_le_bytes());
        }
        ChaCha12Rng::from_seed(key)
    }
}

fn splitmix_next(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix(a: u64, b: u64) -> u64 {
    let mut state = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    splitmix_next(&mut state)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
