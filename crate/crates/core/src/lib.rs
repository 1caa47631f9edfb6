//! Constructive convolutional ReLU networks on the unit sphere.
//!
//! This crate builds, evaluates, and empirically validates deep convolutional
//! ReLU networks that approximate functions on `S^{d-1}`. The pipeline is
//! fully constructive: no training anywhere. A target function is first
//! smoothed by a polynomial-reproducing operator, the smoothing kernel is
//! discretized over a point sample, the resulting inner-product features
//! `<y_j, x>` are realized exactly by a stack of sparse convolutional layers
//! (via factorization of one long filter into short ones), and the univariate
//! kernel profile is realized by a ReLU spline quasi-interpolant in the fully
//! connected tail.
//!
//! Module map:
//!
//! - [`sphere`]: points on the sphere, seeded uniform sampling, evaluation
//!   grids for sup-norm estimation.
//! - [`harmonics`]: Gegenbauer polynomials, zonal reproducing kernels,
//!   band-limited zonal test functions with exact Sobolev calculus.
//! - [`operators`]: the smooth cutoff, smoothed kernels, the near-best
//!   operator and its Monte-Carlo discretization, and the ReLU spline
//!   quasi-interpolant machinery.
//! - [`filters`]: finitely supported filters, convolution, Toeplitz matrices,
//!   and factorization of long filters into short ones.
//! - [`network`]: assembly and evaluation of the full networks, parameter
//!   accounting, and plain-text serialization.
//! - [`studies`]: the empirical rate studies behind the CLI, with hard
//!   assertions on every bound they are supposed to certify.
//! - [`report`]: CSV-serializable study reports.
//!
//! All randomness flows through the repository generator in [`rng`]; every
//! public entry point that samples is deterministic for a fixed seed.

pub mod constants;
pub mod error;
pub mod filters;
pub mod harmonics;
pub mod network;
pub mod operators;
pub mod report;
pub mod rng;
pub mod sphere;
pub mod studies;

pub use error::{Error, Result};
