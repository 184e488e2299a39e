//! Score-level fusion and evaluation for face verification systems enhanced
//! by 3D face reconstruction.
//!
//! The crate is `no_std` and only needs `alloc`:
//!
//! * [`scores`]: embeddings, Euclidean distance and the `1 / (d + 1)` match
//!   probability.
//! * [`fusion`]: trial alignment and the average / max / min fusion rules.
//! * [`metrics`]: FMR/FNMR, ROC, AUC, EER, operating-point errors, Cohen's d
//!   and Pearson correlation.
//! * [`viewsynth`]: pose grid, projection and z-buffer rasterization of a
//!   face mesh for gallery enlargement.
//! * [`harness`]: identity partitioning, intra/cross-setting protocols,
//!   aggregation and a correlated synthetic score generator.
//!
//! File formats, PNG/SVG output and the command line live in the `facefuse`
//! crate.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
pub mod fusion;
pub mod harness;
pub mod metrics;
pub mod scores;
pub mod viewsynth;

pub use error::{Error, Result};
