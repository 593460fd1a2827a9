//! Nested differentiation: second-order jets in two chart directions
//! ([`Jet`]) composed with a scalar reverse-mode [`Tape`].
//!
//! Every Jet component is an ordinary scalar of the underlying [`Real`]
//! type. Running the network on `Jet<Var>` records each component-wise
//! operation on the tape, so a reverse sweep differentiates a loss built from
//! values, gradients and Hessians of the network with respect to its
//! parameters.

mod jet;
mod real;
mod tape;

pub use jet::{jet_apply, jet_lift_chart, Elementary, Jet, Jet2};
pub use real::{gelu_derivs, gelu2_derivs, normal_cdf, normal_pdf, relu_derivs, requ_derivs, Real};
pub use tape::{grad_params, Tape, Var};
