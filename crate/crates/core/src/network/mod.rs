//! The 1-D CNN + MLP trial function and the single-channel expanding CNN.
//!
//! A point on the surface enters as its three ambient coordinates, read as a
//! length-3 sequence with one channel. [`forward`] is generic over the
//! scalar payload (`f64`, jets, tape variables); [`BatchNet`] is the batched
//! jet engine with its own reverse pass, used by the trainer.

mod arch;
mod batched;
pub(crate) mod forward;
mod params;
mod single_channel;

pub use arch::{
    Architecture, ConvActivation, ConvSpec, Layout, MlpActivation, MlpSpec, Padding, Slice,
    SliceKind, INPUT_LEN,
};
pub use batched::{BatchCache, BatchInput, BatchNet, JET_COMPS};
pub use forward::forward;
pub use params::{init, NetworkParams};
pub use single_channel::{
    downsample, single_channel_forward, toeplitz_apply, SingleChannelOutput, SingleChannelSpec,
};
