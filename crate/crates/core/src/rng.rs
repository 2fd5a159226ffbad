//! Counter-style random streams: every sample or trial gets its own ChaCha
//! stream keyed by `(master seed, domain, index)`, so results do not depend on
//! how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream families. Distinct domains never share a stream even for equal
/// master seeds and indices.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    MonteCarlo = 1,
    Prr = 2,
    RrSet = 3,
    Probe = 4,
    Perturb = 5,
    Generator = 6,
}

/// Independent generator for item `index` of `domain` under `master`.
pub fn substream(master: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master.to_le_bytes());
    seed[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(index);
    rng
}
