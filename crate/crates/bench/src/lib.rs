//! Fixtures shared by the benchmarks.

use infmul::InfLaw;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Reproducible random law of order `k`.
pub fn fixture_law(seed: u64, k: usize) -> InfLaw {
    infmul::selftest::random_law(&mut rng(seed), k)
}
