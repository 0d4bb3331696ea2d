//! Multi-ray propagation onto the three-element ULA of a four-channel,
//! two-daughterboard receiver.
//!
//! Receiver channels are paired per daughterboard: pair A = {0, 1}, pair B =
//! {2, 3}. Within each pair the first channel is the phase reference and the
//! second carries the static intra-pair offset; pair B additionally carries
//! the per-run LO differential. The calibration tone is wired to channel 0
//! (dedicated) and channel 2 (superimposed on its antenna) by default, leaving
//! channels 1, 2, 3 for the array.

mod caltone;
mod reception;
mod types;

pub use caltone::{generate_cal_tone, CalToneSpec};
pub(crate) use reception::steering_unchecked;
pub use reception::{
    delay_signal, simulate_reception, simulate_reception_with_noise_power, simulate_splitter_capture,
    steering_vector,
};
pub use types::{
    channel_phase, intra_pair_member, CaptureMeta, ImpairmentState, MultiChannelCapture, Ray, UlaGeometry,
    NUM_RX_CHANNELS,
};
