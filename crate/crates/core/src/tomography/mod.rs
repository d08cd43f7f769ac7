//! Simulated parity readout and its calibration, drive-amplitude and
//! Fock-population calibration, and maximum-likelihood reconstruction.

mod drive;
mod fock;
mod mle;
mod readout;

pub use drive::{calibrate_drive, DriveCalibration};
pub use fock::{extract_fock_populations, FockPopulations};
pub use mle::{displaced_parity, mle_reconstruct, MleOptions, MleResult};
pub use readout::{
    calibrate_parity, expected_parity, sample_wigner, simulate_parity_readout,
    ParityNormalization, ReadoutModel, WignerSampleSet,
};
