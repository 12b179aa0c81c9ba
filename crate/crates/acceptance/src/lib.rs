//! Seeded generators and independent oracles for the end-to-end
//! acceptance checks run by `tests/acceptance.rs`.

pub mod downgrade;
pub mod nav;
pub mod script;
pub mod tables;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
