//! Digital 3D shearlet transform, file formats and command-line tools built on
//! [`amol_core`].
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub use amol_core as core;

pub mod cli;
pub mod fft;
pub mod io;
pub mod nterm;
pub mod parallel;
pub mod transform;
