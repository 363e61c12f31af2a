//! Multivariate α-molecules: phase-space parametrizations, the α-scaled index
//! distance, the band-limited 3D Parseval shearlet frame and its diagnostics.
//!
//! The crate is `no_std` (with `alloc`). FFT-based transforms, file formats and
//! the command-line tools live in the companion `amol` crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;

pub mod approx;
pub mod cartoon;
pub mod error;
pub mod frame;
pub mod geometry;
pub mod gramian;
pub mod linalg;
pub mod metric;
pub mod molecule;
pub mod parametrization;
pub mod volume;
pub mod windows;

pub use error::{Error, Result};
pub use num_complex::Complex64;
