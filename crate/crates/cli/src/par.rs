//! Rayon-backed implementation of the core parallelism hook.
//!
//! The core crate expresses every concurrent stage as an order-preserving
//! `map` over independent items, so results cannot depend on the worker
//! count — `collect` on an indexed parallel iterator reassembles outputs
//! in input order.

use rayon::prelude::*;
use tcam_core::parallel::Parallelism;

/// Runs maps on the current rayon thread pool.
pub struct RayonPar;

impl Parallelism for RayonPar {
    fn map<T: Send, R: Send, F: Fn(T) -> R + Sync + Send>(&self, items: Vec<T>, f: F) -> Vec<R> {
        items.into_par_iter().map(f).collect()
    }
}
