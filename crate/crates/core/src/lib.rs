//! Oligopoly pricing under logit demand with a bracketed fairness tax.
//!
//! Consumers in a few profiles choose among firms or opt out; firms set
//! per-profile prices in a simultaneous best-response game; a planner picks a
//! tax schedule indexed by each firm's local demand fairness.

pub mod bench;
pub mod config;
pub mod equilibrium;
pub mod error;
pub mod fairness;
pub mod market;
pub mod optimize;
pub mod planner;
pub mod scenario;
pub mod tax;

pub use error::{Error, Result};

/// Derives an independent stream seed from a base seed and a path of indices.
pub fn stream_seed(base: u64, path: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    path.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}
