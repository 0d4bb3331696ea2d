//! Single-anchor positioning lab.
//!
//! A desk-scale replica of a USRP positioning testbed: 5G uplink SRS
//! waveforms are received on a three-element uniform linear array with
//! N310-style channel-pair phase impairments, run through the snapshot
//! receiver chain (calibration, timing, CFO, model order, AoA estimation,
//! LCMV selection, SINR), fused with UWB ranges and scored against an
//! interpolated ground-truth trajectory.
//!
//! Module map:
//!
//! * [`waveform`]: configuration catalog, SRS sequences, resource grid, CP-OFDM.
//! * [`simchannel`]: array geometry, multi-ray reception and impairment injection.
//! * [`frontend`]: phase calibration, timing synchronization, CFO estimation.
//! * [`aoa`]: covariance, AIC order selection, the estimator registry, LCMV, SINR.
//! * [`fusion`]: polar fixes, UWB simulation, time alignment, error CDF.
//! * [`harness`]: scenario config, snapshot files, runner and reports.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aoa;
pub mod error;
pub mod frontend;
pub mod fusion;
pub mod harness;
pub mod simchannel;
pub mod util;
pub mod waveform;

pub use error::{Error, Result};

pub use num_complex::Complex64;
