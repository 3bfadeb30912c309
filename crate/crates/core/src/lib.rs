//! Grid-layout visualization of large high-dimensional datasets.
//!
//! The pipeline decomposes the layout task into many small bi-objective
//! quadratic assignment sub-problems: an approximate k-nearest-neighbor
//! graph is built over the input vectors, a stochastic force layout seeds
//! initial positions, degree-biased sampling picks seed vertices whose
//! neighborhoods become independent assignment instances on 50x50 grids,
//! a memetic evolutionary solver produces a Pareto front per instance,
//! and front representatives are merged into three final layouts.

pub mod dataset_io;
pub mod error;
pub mod eval;
pub mod initial_layout;
pub mod instance;
pub mod knn_graph;
pub mod merge;
pub mod mqap;
pub mod pipeline;
pub mod solver;

pub use error::{Error, Result};

/// splitmix64 finalizer; the workspace-wide seed-derivation primitive.
///
/// Stage seeds and per-instance solver seeds are all derived through this
/// so that results are independent of scheduling and of unrelated stages.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a global seed and a stable name.
pub fn derive_seed(global: u64, name: &str) -> u64 {
    // FNV-1a over the name, then mixed with the global seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    splitmix64(global ^ h)
}

/// Derive a per-instance solver seed from the global seed and the seed
/// vertex id, so instance results do not depend on worker scheduling.
pub fn derive_instance_seed(global: u64, seed_vertex: u32) -> u64 {
    splitmix64(global ^ u64::from(seed_vertex).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}
