//! Pluggable execution strategy for embarrassingly parallel stages.
//!
//! The algorithms in this crate only ever need an order-preserving map
//! over independent jobs, so that is the whole contract. The crate ships
//! a sequential implementation; binaries can provide a threaded one.
//! Because results are returned in input order and every job derives its
//! own randomness from its index, outputs are identical no matter which
//! implementation runs them.

use alloc::vec::Vec;

pub trait Parallelism: Sync {
    /// Applies `f` to every item, returning results in input order.
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send;
}

/// Runs every job on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Parallelism for Sequential {
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        items.into_iter().map(f).collect()
    }
}

/// Stable per-job seed derivation (splitmix64 finalizer), so job `i`
/// sees the same randomness regardless of scheduling.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
