//! Manakov-type flows on `so(n)`: sectional operators, geodesic and Euler flows,
//! polynomial integrals and randomized completeness checks.
//!
//! Everything here works with `alloc` only; enable the `std` feature for
//! `std::error::Error` integration in downstream code.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod completeness;
pub mod defaults;
pub mod error;
pub mod flows;
pub mod invariants;
pub mod liealg;
pub mod linalg;
mod math;
pub mod sectional;

pub use error::{Error, Result};
pub use liealg::{BlockPartition, Matrix, SkewMatrix, SpectralParams};
