//! JSON run configurations, one record per subcommand.

use std::path::Path;

use catsim_core::acoustics::AcousticMode;
use catsim_core::dynamics::{LindbladOptions, SystemParams, DEFAULT_G0};
use catsim_core::hilbert::C64;
use catsim_core::phase_space::GridSpec;
use catsim_core::pipeline::{decay_crosscut, decay_waits, CatPreparation, DrivePreset, T1_PHONON};
use catsim_core::tomography::{MleOptions, ReadoutModel};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Reads `path`, or returns the defaults when no config is given.
pub fn load<T: DeserializeOwned + Default + Versioned>(path: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse<T: DeserializeOwned + Versioned>(text: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: T = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            CliError::Config(inner.to_string())
        } else {
            CliError::Config(format!("at `{path}`: {inner}"))
        }
    })?;
    if cfg.schema_version() != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "at `schema_version`: expected {SCHEMA_VERSION}, found {}",
            cfg.schema_version()
        )));
    }
    Ok(cfg)
}

pub trait Versioned {
    fn schema_version(&self) -> u32;
}

macro_rules! versioned {
    ($($t:ty),*) => {$(
        impl Versioned for $t {
            fn schema_version(&self) -> u32 {
                self.schema_version
            }
        }
    )*};
}

versioned!(
    SimulateConfig,
    PhaseScanConfig,
    WignerConfig,
    TomoConfig,
    DecayConfig,
    MassConfig,
    CalibrateConfig
);

fn strong_drive_params() -> SystemParams {
    SystemParams::new(DEFAULT_G0, C64::new(1.75, 0.0))
}

/// Where the phonon state comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSource {
    /// One of the three drive settings, by drive amplitude.
    Preset { amplitude: f64 },
    Prepare(CatPreparation),
}

impl Default for StateSource {
    fn default() -> Self {
        StateSource::Preset { amplitude: 0.35 }
    }
}

impl StateSource {
    pub fn preparation(&self) -> Result<CatPreparation, CliError> {
        match *self {
            StateSource::Preset { amplitude } => Ok(DrivePreset::find(amplitude)?.preparation()),
            StateSource::Prepare(p) => Ok(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Exact series when every rate is zero, master equation otherwise.
    #[default]
    Auto,
    Exact,
    Lindblad,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "strong_drive_params")]
    pub params: SystemParams,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_n_times")]
    pub n_times: usize,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub lindblad: LindbladOptions,
}

fn default_t_max() -> f64 {
    10.0
}
fn default_n_times() -> usize {
    801
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            params: strong_drive_params(),
            t_max: default_t_max(),
            n_times: default_n_times(),
            method: Method::Auto,
            lindblad: LindbladOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseScanConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    /// `c_g` and `c_e` are replaced by the scanned qubit states.
    #[serde(default = "strong_drive_params")]
    pub params: SystemParams,
    /// Polar angle of the initial qubit states; pi/2 is the equator.
    #[serde(default = "default_polar")]
    pub polar: f64,
    #[serde(default = "default_n_phases")]
    pub n_phases: usize,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_scan_times")]
    pub n_times: usize,
    #[serde(default)]
    pub lindblad: LindbladOptions,
}

fn default_polar() -> f64 {
    std::f64::consts::FRAC_PI_2
}
fn default_n_phases() -> usize {
    16
}
fn default_scan_times() -> usize {
    401
}

impl Default for PhaseScanConfig {
    fn default() -> Self {
        PhaseScanConfig {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            params: strong_drive_params(),
            polar: default_polar(),
            n_phases: default_n_phases(),
            t_max: default_t_max(),
            n_times: default_scan_times(),
            lindblad: LindbladOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub state: StateSource,
    #[serde(default)]
    pub grid: GridSpec,
}

impl Default for WignerConfig {
    fn default() -> Self {
        WignerConfig {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            state: StateSource::default(),
            grid: GridSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomoConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub state: StateSource,
    /// `seed` inside the readout record is replaced by the run seed.
    #[serde(default = "default_readout")]
    pub readout: ReadoutModel,
    /// Ramsey points for the parity normalization; 0 skips it.
    #[serde(default = "default_ramsey_points")]
    pub calibration_points: usize,
    #[serde(default = "default_samples")]
    pub samples: GridSpec,
    #[serde(default = "default_reconstruction_cutoff")]
    pub reconstruction_cutoff: usize,
    #[serde(default)]
    pub mle: MleOptions,
    /// Fidelity drop defining the sensitivity intervals.
    #[serde(default = "default_drop")]
    pub sensitivity_drop: f64,
}

fn default_readout() -> ReadoutModel {
    ReadoutModel::ideal(10_000, 0)
}
fn default_ramsey_points() -> usize {
    24
}
fn default_samples() -> GridSpec {
    GridSpec::Raster { lo: -1.8, hi: 1.8, n: 9 }
}
fn default_reconstruction_cutoff() -> usize {
    12
}
fn default_drop() -> f64 {
    0.01
}

impl Default for TomoConfig {
    fn default() -> Self {
        TomoConfig {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            state: StateSource::default(),
            readout: default_readout(),
            calibration_points: default_ramsey_points(),
            samples: default_samples(),
            reconstruction_cutoff: default_reconstruction_cutoff(),
            mle: MleOptions::default(),
            sensitivity_drop: default_drop(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub state: StateSource,
    #[serde(default = "default_t1")]
    pub t1_phonon: f64,
    #[serde(default = "decay_waits")]
    pub waits: Vec<f64>,
    #[serde(default = "decay_crosscut")]
    pub crosscut: GridSpec,
}

fn default_t1() -> f64 {
    T1_PHONON
}

impl Default for DecayConfig {
    fn default() -> Self {
        DecayConfig {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            state: StateSource::default(),
            t1_phonon: T1_PHONON,
            waits: decay_waits(),
            crosscut: decay_crosscut(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: AcousticMode,
    #[serde(default = "default_mass_alphas")]
    pub alphas: Vec<f64>,
}

fn default_mass_alphas() -> Vec<f64> {
    vec![0.0, 1.09, 1.43, 1.61]
}

impl Default for MassConfig {
    fn default() -> Self {
        MassConfig {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            mode: AcousticMode::default(),
            alphas: default_mass_alphas(),
        }
    }
}

/// Drive calibration input: measured `(A, |beta|)` pairs, or a synthetic
/// curve with multiplicative noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DriveData {
    Measured { samples: Vec<(f64, f64)> },
    Synthetic { b: f64, c: f64, amplitudes: Vec<f64>, noise: f64 },
}

impl Default for DriveData {
    fn default() -> Self {
        DriveData::Synthetic {
            b: 0.5,
            c: 0.9,
            amplitudes: (0..=40).map(|i| 0.02 * f64::from(i)).collect(),
            noise: 0.01,
        }
    }
}

/// Qubit excited-state trace after a resonant swap with a displaced mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FockData {
    Measured { times: Vec<f64>, p_e: Vec<f64> },
    /// Coherent amplitude `beta`, binomial noise from `shots` per point.
    Synthetic { beta: f64, t_max: f64, n_times: usize, shots: u64 },
}

impl Default for FockData {
    fn default() -> Self {
        FockData::Synthetic {
            beta: 1.3,
            t_max: 8.0,
            n_times: 201,
            shots: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub drive: DriveData,
    #[serde(default = "default_parity_readout")]
    pub parity: ReadoutModel,
    #[serde(default = "default_ramsey_points")]
    pub parity_points: usize,
    #[serde(default)]
    pub fock: FockData,
    #[serde(default = "default_g0")]
    pub g0: f64,
    #[serde(default = "default_n_fit")]
    pub n_fit: usize,
}

fn default_parity_readout() -> ReadoutModel {
    ReadoutModel {
        contrast: 0.8,
        offset: 0.05,
        shots: 10_000,
        seed: 0,
    }
}
fn default_g0() -> f64 {
    DEFAULT_G0
}
fn default_n_fit() -> usize {
    10
}

impl Default for CalibrateConfig {
    fn default() -> Self {
        CalibrateConfig {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            drive: DriveData::default(),
            parity: default_parity_readout(),
            parity_points: default_ramsey_points(),
            fock: FockData::default(),
            g0: DEFAULT_G0,
            n_fit: default_n_fit(),
        }
    }
}
