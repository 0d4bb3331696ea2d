//! Receiver front end: phase calibration, timing synchronisation and CFO
//! estimation/correction.

mod calibration;
mod cfo;
mod sync;

pub(crate) use calibration::lo_from_tone;
pub use calibration::{
    apply_phase_compensation, cancel_cal_tone, estimate_pair_phase, measure_cal_tone, offline_calibrate,
    runtime_calibrate, CalibrationTable, ToneMeasurement,
};
pub use cfo::{cfo_correct, cfo_estimate_cp, cfo_estimate_cp_on};
pub use sync::{timing_sync, timing_sync_with, SyncOptions, SyncResult};
