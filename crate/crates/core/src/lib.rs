//! Small-scale quantum ergodicity workbench.
//!
//! The quantum side lives on the quantized torus: band-limited symbols,
//! their Weyl quantization on C^N with h = 1/(2 pi N), quantized hyperbolic
//! automorphisms and eigenbasis statistics. The classical side runs the
//! geodesic flow of the Bolza surface together with the covering machinery.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate blas_src;
extern crate openblas_src;

pub mod anosov;
pub mod covering;
pub mod error;
pub mod fit;
pub mod fourier;
pub mod hypflow;
pub mod linalg;
pub mod quantize;
pub mod quantum;
pub mod symbols;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
