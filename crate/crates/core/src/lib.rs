//! Physics-informed convolutional networks for second-order elliptic boundary
//! value problems on embedded surfaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`autodiff`]: second-order jets in two chart directions plus a scalar
//!   reverse-mode tape, nested so parameter gradients of losses containing
//!   second derivatives of the network are exact.
//! * [`geometry`]: the hemisphere and half-torus benchmarks, their charts,
//!   the divergence-form operator `-div((2+z) grad u) + u` and the
//!   Laplace-Beltrami operator.
//! * [`network`]: the 1-D CNN + MLP trial function (generic over the scalar
//!   payload), a batched jet engine used for training, and the expanding-width
//!   single-channel architecture.
//! * [`spectral`]: FFT-based fractional Sobolev boundary penalties.
//! * [`training`]: losses, Adam with step decay, best-parameter tracking and
//!   the relative L2/H2 test metrics.
//! * [`constructions`]: executable network constructions (ReQU products,
//!   B-spline cutoffs, Matérn kernels, ridge features, the multichannel
//!   inner-product CNN) and Matérn kernel interpolation.
//! * [`harness`]: experiment configuration, sweeps, slope fits and reports.
//!
//! Runnable walkthroughs live in `examples/`; `cargo run --example` lists them.

pub mod autodiff;
pub mod constructions;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod network;
pub mod spectral;
pub mod training;

pub use error::{Error, Result};
