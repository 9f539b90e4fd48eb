//! Seeded random streams for simulation.
//!
//! Every realization owns one [`ExpStream`]: a reproducible sequence of unit
//! exponential draws `S_1, S_2, ...` plus an independent uniform side stream
//! for accept/reject decisions and jump kernels. Keeping the exponentials on
//! their own generator means two samplers fed the same seed consume the same
//! `S_n` sequence no matter how many uniforms each needs in between, which is
//! what makes per-jump comparisons between methods meaningful.
//!
//! Realization `k` of a batch is derived from `(seed, k)` with a SplitMix64
//! mix, so batches can be generated in any order or in parallel without
//! sequential dependence between realizations.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::model::UniformSource;

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn derive_seed(seed: u64, realization: u64, role: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ realization) ^ role)
}

/// Uniform draw in the open interval (0, 1).
fn unit_open(rng: &mut impl RngCore) -> f64 {
    loop {
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        if u > 0.0 {
            return u;
        }
    }
}

/// Reproducible stream of unit exponential variates with a uniform side
/// stream, both derived from `(seed, realization)`.
pub struct ExpStream {
    seed: u64,
    realization: u64,
    exp_rng: ChaCha8Rng,
    aux_rng: ChaCha8Rng,
    draws: u64,
}

impl ExpStream {
    /// Stream for a single run; identical to `for_realization(seed, 0)`.
    pub fn new(seed: u64) -> Self {
        Self::for_realization(seed, 0)
    }

    /// Stream for realization `k` of a batch keyed by `seed`.
    pub fn for_realization(seed: u64, k: u64) -> Self {
        ExpStream {
            seed,
            realization: k,
            exp_rng: ChaCha8Rng::seed_from_u64(derive_seed(seed, k, 0)),
            aux_rng: ChaCha8Rng::seed_from_u64(derive_seed(seed, k, 1)),
            draws: 0,
        }
    }

    /// Next unit exponential `S_n = -ln(U)`, `U` uniform on (0, 1). Always
    /// finite and strictly positive.
    pub fn draw(&mut self) -> f64 {
        self.draws += 1;
        -unit_open(&mut self.exp_rng).ln()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn realization(&self) -> u64 {
        self.realization
    }

    /// Number of exponential draws taken so far.
    pub fn draws_taken(&self) -> u64 {
        self.draws
    }
}

impl UniformSource for ExpStream {
    fn next_uniform(&mut self) -> f64 {
        unit_open(&mut self.aux_rng)
    }
}
