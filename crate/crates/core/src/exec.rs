//! Fan-out helpers for the data-parallel sweeps (subset searches, seeded
//! batches). With the `parallel` feature they run on rayon with
//! first-in-order semantics, so results and witnesses are identical to the
//! sequential fallback; without the feature the sequential paths compile in
//! directly.

use std::sync::atomic::{AtomicBool, Ordering};

static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Force the sequential paths even when the `parallel` feature is enabled.
/// Used by the benches to compare both execution modes in one build.
pub fn force_sequential(on: bool) {
    FORCE_SEQUENTIAL.store(on, Ordering::SeqCst);
}

pub fn sequential_forced() -> bool {
    FORCE_SEQUENTIAL.load(Ordering::SeqCst)
}

/// `(0..n).map(f)` collected in order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if !sequential_forced() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// First `Some` produced by `f` over `0..n`, in index order.
pub fn find_first<V, F>(n: usize, f: F) -> Option<V>
where
    V: Send,
    F: Fn(usize) -> Option<V> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if !sequential_forced() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().find_map_first(f);
        }
    }
    (0..n).find_map(f)
}
