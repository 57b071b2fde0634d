//! Holographic reduced representations (HRR) with Kronecker rotation product
//! ("krop") codebooks.
//!
//! A krop codebook of dimension `N = 2^K` is stored as `K` angles, any row can
//! be rebuilt in `O(N)`, and clean-up against the whole codebook runs in
//! `O(N log N)` time and `O(N)` space, versus `O(N^2)` for a dense
//! dot-product scan.
//!
//! ```
//! use krop::codebook::{krop_params, sample_normal_codebook, ThetaScheme};
//! use krop::memory::{AssociativeStore, CleanupStrategy, ValueCodebook};
//! use krop::rng::SeededRng;
//!
//! let mut rng = SeededRng::new(42);
//! let keys = sample_normal_codebook(1024, 4, &mut rng).unwrap();
//! let values = ValueCodebook::Krop(krop_params(10, ThetaScheme::EvenlySpaced, None).unwrap());
//! let mut store = AssociativeStore::new(keys, values, CleanupStrategy::Krop).unwrap();
//!
//! store.write(0, 17).unwrap();
//! store.write(1, 500).unwrap();
//! assert_eq!(store.read(1).unwrap().index, Some(500));
//!
//! store.overwrite(1, 3).unwrap();
//! assert_eq!(store.read(1).unwrap().index, Some(3));
//! assert_eq!(store.retrieval_rate().unwrap(), 1.0);
//! ```
//!
//! Modules:
//!
//! * [`hrr`]: vectors, binding (circular convolution), unbinding (circular
//!   correlation) and superposition over a radix-2 FFT;
//! * [`codebook`]: krop, Sylvester, normal and binary codebooks;
//! * [`cleanup`]: krop, direct and sign clean-up;
//! * [`memory`]: key-value stores with overwrite and retrieval grading;
//! * [`experiments`]: seeded drivers for the timing, capacity and mutable
//!   memory experiments, and their CSV/JSON reports.

pub mod cleanup;
pub mod codebook;
mod error;
pub mod experiments;
pub mod hrr;
pub mod memory;
pub mod rng;

pub use error::{Error, Result};

// Run every snippet in the guide as a doctest.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/binding.md")]
    pub mod binding {}
    #[doc = include_str!("../../../book/src/codebooks.md")]
    pub mod codebooks {}
    #[doc = include_str!("../../../book/src/cleanup.md")]
    pub mod cleanup {}
    #[doc = include_str!("../../../book/src/memory.md")]
    pub mod memory {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    pub mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
    #[doc = include_str!("../../../README.md")]
    pub mod readme {}
}
