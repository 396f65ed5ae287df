//! Per-episode seed derivation: re-exported from the core crate so callers
//! holding only the runtime keep a stable path.

pub use medsearch_core::derive_seed;
