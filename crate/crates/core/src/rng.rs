//! Keyed random streams.
//!
//! Every random decision in a run draws from a stream derived from the run
//! seed, a purpose tag and the identity of whatever is being decided
//! (person and week, site and timestep, ...). Two evaluations of the same
//! decision therefore see the same numbers regardless of which thread gets
//! there first.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Sites = 1,
    Households = 2,
    Assignment = 3,
    Friends = 4,
    People = 5,
    IndexCase = 6,
    WeeklyPlan = 7,
    StayHome = 8,
    Panic = 9,
    Transmission = 10,
    Essential = 11,
    Cohort = 12,
}

pub fn key(seed: u64, purpose: Purpose, parts: &[u64]) -> u64 {
    let mut h = mix64(seed ^ GOLDEN);
    h = mix64(h ^ mix64(purpose as u64));
    for &p in parts {
        h = mix64(h ^ mix64(p.wrapping_add(GOLDEN)));
    }
    h
}

pub fn stream(seed: u64, purpose: Purpose, parts: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(key(seed, purpose, parts))
}
