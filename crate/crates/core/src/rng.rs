//! Seeded randomness.
//!
//! Every stochastic routine draws from ChaCha8 (`rand_chacha::ChaCha8Rng`), a
//! counter-based stream cipher generator whose output is specified bit for bit
//! and therefore identical on every platform. A 64-bit seed selects the key and
//! a stream id separates independent purposes (noise coins, sign choices,
//! solver restarts, game trials) so that changing one consumer never shifts the
//! numbers another consumer sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream ids used by the generators and solvers.
pub mod streams {
    pub const NOISE: u64 = 1;
    pub const SIGNS: u64 = 2;
    pub const GRAPH: u64 = 3;
    pub const SOLVER_BASE: u64 = 1 << 32;
    pub const GAME_BASE: u64 = 1 << 48;
}

pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
