use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{HilbertSpace, JointState, C64};
use crate::optim::least_squares;
use crate::output::{csv_table, json_f64};
use crate::phase_space::wigner_at;

/// Two-outcome parity readout: the expected raw signal for true displaced
/// parity `P` is `contrast * P + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutModel {
    pub contrast: f64,
    #[serde(default)]
    pub offset: f64,
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
}

impl ReadoutModel {
    pub fn ideal(shots: u64, seed: u64) -> Self {
        ReadoutModel {
            contrast: 1.0,
            offset: 0.0,
            shots,
            seed,
        }
    }

    /// The outcome probability must stay inside `[0, 1]` for every parity in
    /// `[-1, 1]`, which requires `contrast + |offset| <= 1`.
    pub fn validate(&self) -> Result<()> {
        if !(self.contrast > 0.0 && self.contrast <= 1.0) {
            return Err(Error::param("contrast", "must lie in (0, 1]"));
        }
        if !self.offset.is_finite() {
            return Err(Error::param("offset", "must be finite"));
        }
        if self.shots == 0 {
            return Err(Error::param("shots", "must be at least 1"));
        }
        if self.contrast + self.offset.abs() > 1.0 + 1e-12 {
            return Err(Error::Model(format!(
                "contrast {} with offset {} pushes the outcome probability outside [0, 1]",
                self.contrast, self.offset
            )));
        }
        Ok(())
    }

    fn probability(&self, parity: f64) -> Result<f64> {
        let p = 0.5 * (1.0 + self.contrast * parity + self.offset);
        if !(-1e-12..=1.0 + 1e-12).contains(&p) {
            return Err(Error::Model(format!("outcome probability {p} outside [0, 1]")));
        }
        Ok(p.clamp(0.0, 1.0))
    }

    /// Mean of `shots` +/-1 outcomes drawn with the given seed.
    fn draw(&self, parity: f64, seed: u64) -> Result<f64> {
        let p = self.probability(parity)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = Binomial::new(self.shots, p)
            .map_err(|e| Error::Model(e.to_string()))?
            .sample(&mut rng);
        Ok(2.0 * k as f64 / self.shots as f64 - 1.0)
    }
}

fn phonon_density(state: &JointState) -> Result<crate::hilbert::CMatrix> {
    match state.space() {
        HilbertSpace::Phonon { .. } => Ok(state.density_matrix()),
        other => Err(Error::SpaceMismatch(format!(
            "parity readout needs a phonon-only state, got {other:?}"
        ))),
    }
}

/// Expected displaced parity `<D(beta) Pi D^dag(beta)>`.
pub fn expected_parity(state: &JointState, beta: C64) -> Result<f64> {
    let rho = phonon_density(state)?;
    Ok(wigner_at(&rho, beta) * std::f64::consts::FRAC_PI_2)
}

fn check_beta(state: &JointState, beta: C64) -> Result<()> {
    let n_max = state.space().n_max().unwrap_or(0) as f64;
    if beta.norm() > n_max.sqrt() / 2.0 {
        return Err(Error::param(
            "beta",
            format!("|beta|={:.4} beyond the cutoff-trustworthy radius", beta.norm()),
        ));
    }
    Ok(())
}

/// Raw readout at one displacement: binomial sampling of `shots` outcomes.
pub fn simulate_parity_readout(state: &JointState, beta: C64, model: &ReadoutModel) -> Result<f64> {
    model.validate()?;
    check_beta(state, beta)?;
    let parity = expected_parity(state, beta)?;
    model.draw(parity, model.seed)
}

/// Affine map from raw readout to parity, `parity = (raw - offset) / amplitude`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParityNormalization {
    pub amplitude: f64,
    pub offset: f64,
    /// Phase of the fitted Ramsey fringe; zero for a calibrated sequence.
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub residual: f64,
}

impl ParityNormalization {
    pub fn identity() -> Self {
        ParityNormalization {
            amplitude: 1.0,
            offset: 0.0,
            phase: 0.0,
            residual: 0.0,
        }
    }

    pub fn gain(&self) -> f64 {
        1.0 / self.amplitude
    }

    pub fn apply(&self, raw: f64) -> f64 {
        (raw - self.offset) / self.amplitude
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0) || !self.amplitude.is_finite() {
            return Err(Error::Model(format!(
                "normalization amplitude {} must be positive",
                self.amplitude
            )));
        }
        if self.amplitude + self.offset.abs() > 1.0 + 1e-2 {
            return Err(Error::Model(format!(
                "normalization amplitude {} with offset {} is not a valid readout",
                self.amplitude, self.offset
            )));
        }
        Ok(())
    }
}

const RAMSEY_SALT: u64 = 0x5241_4d53_4559_0000;

/// Ramsey calibration on the vacuum: sweeps the analysis phase over
/// `points` values, fits `c + a cos(phi) + b sin(phi)` and returns the map
/// that sends the vacuum to parity +1.
pub fn calibrate_parity(model: &ReadoutModel, points: usize) -> Result<ParityNormalization> {
    model.validate()?;
    if points < 4 {
        return Err(Error::param("points", "need at least 4 phase points"));
    }
    let phis: Vec<f64> = (0..points)
        .map(|k| 2.0 * std::f64::consts::PI * k as f64 / points as f64)
        .collect();
    // vacuum parity is +1; the analysis phase rotates it into cos(phi)
    let raw = phis
        .iter()
        .enumerate()
        .map(|(k, phi)| model.draw(phi.cos(), model.seed ^ RAMSEY_SALT ^ k as u64))
        .collect::<Result<Vec<_>>>()?;
    let a = nalgebra::DMatrix::from_fn(points, 3, |i, j| match j {
        0 => 1.0,
        1 => phis[i].cos(),
        _ => phis[i].sin(),
    });
    let (coef, residual) = least_squares(&a, &nalgebra::DVector::from_vec(raw))?;
    let amplitude = coef[1].hypot(coef[2]);
    if !(amplitude > 0.0) {
        return Err(Error::Fit("no Ramsey fringe in calibration sweep".into()));
    }
    Ok(ParityNormalization {
        amplitude,
        offset: coef[0],
        phase: coef[2].atan2(coef[1]),
        residual,
    })
}

/// Normalized displaced-parity samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WignerSampleSet {
    pub betas: Vec<C64>,
    /// Normalized parities, clipped to `[-1, 1]`.
    pub parities: Vec<f64>,
    /// Raw readout means before normalization.
    pub raw: Vec<f64>,
    pub shots_per_point: u64,
    pub normalization: ParityNormalization,
}

pub const SAMPLE_CSV_COLUMNS: [&str; 4] = ["re_beta", "im_beta", "parity", "shots"];

impl WignerSampleSet {
    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.betas.len();
        for len in [self.parities.len(), self.raw.len()] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: len,
                });
            }
        }
        if n == 0 {
            return Err(Error::Empty("sample set"));
        }
        if self.shots_per_point == 0 {
            return Err(Error::param("shots_per_point", "must be at least 1"));
        }
        self.normalization.validate()
    }

    pub fn to_csv(&self) -> String {
        csv_table(
            &SAMPLE_CSV_COLUMNS,
            self.betas
                .iter()
                .zip(&self.parities)
                .map(|(b, &p)| vec![b.re, b.im, p, self.shots_per_point as f64]),
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        let arr = |v: Vec<f64>| serde_json::Value::Array(v.into_iter().map(json_f64).collect());
        serde_json::json!({
            "re_beta": arr(self.betas.iter().map(|b| b.re).collect()),
            "im_beta": arr(self.betas.iter().map(|b| b.im).collect()),
            "parity": arr(self.parities.clone()),
            "raw": arr(self.raw.clone()),
            "shots": self.shots_per_point,
            "normalization": {
                "amplitude": json_f64(self.normalization.amplitude),
                "offset": json_f64(self.normalization.offset),
                "phase": json_f64(self.normalization.phase),
                "residual": json_f64(self.normalization.residual),
            },
        })
    }
}

/// Samples the displaced parity at each point (seed `model.seed ^ index`),
/// in parallel with results kept in input order, and applies the
/// normalization.
pub fn sample_wigner(
    state: &JointState,
    betas: &[C64],
    model: &ReadoutModel,
    normalization: &ParityNormalization,
) -> Result<WignerSampleSet> {
    model.validate()?;
    normalization.validate()?;
    if betas.is_empty() {
        return Err(Error::Empty("sample points"));
    }
    for &b in betas {
        check_beta(state, b)?;
    }
    let rho = phonon_density(state)?;
    let raw = betas
        .par_iter()
        .enumerate()
        .map(|(i, &b)| {
            let parity = wigner_at(&rho, b) * std::f64::consts::FRAC_PI_2;
            model.draw(parity, model.seed ^ i as u64)
        })
        .collect::<Result<Vec<_>>>()?;
    let parities = raw
        .iter()
        .map(|&r| normalization.apply(r).clamp(-1.0, 1.0))
        .collect();
    Ok(WignerSampleSet {
        betas: betas.to_vec(),
        parities,
        raw,
        shots_per_point: model.shots,
        normalization: *normalization,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phonon(n: usize) -> HilbertSpace {
        HilbertSpace::phonon(n).unwrap()
    }

    #[test]
    fn ideal_readout_of_fock_states() {
        let m = ReadoutModel::ideal(1000, 7);
        let vac = JointState::fock(phonon(8), 0).unwrap();
        let one = JointState::fock(phonon(8), 1).unwrap();
        let z = C64::new(0.0, 0.0);
        assert_eq!(simulate_parity_readout(&vac, z, &m).unwrap(), 1.0);
        assert_eq!(simulate_parity_readout(&one, z, &m).unwrap(), -1.0);
    }

    #[test]
    fn contrast_within_binomial_error() {
        let shots = 10_000u64;
        let st = crate::hilbert::coherent_state(C64::new(0.4, 0.2), phonon(16)).unwrap();
        let beta = C64::new(0.1, -0.3);
        let truth = expected_parity(&st, beta).unwrap();
        for seed in 0..20u64 {
            let m = ReadoutModel {
                contrast: 0.8,
                offset: 0.0,
                shots,
                seed,
            };
            let r = simulate_parity_readout(&st, beta, &m).unwrap();
            let p = 0.5 * (1.0 + 0.8 * truth);
            let sigma = 2.0 * (p * (1.0 - p) / shots as f64).sqrt();
            assert!((r - 0.8 * truth).abs() < 3.0 * sigma + 1e-12);
        }
    }

    #[test]
    fn seeded_and_reproducible() {
        let st = JointState::fock(phonon(8), 2).unwrap();
        let m = ReadoutModel {
            contrast: 0.9,
            offset: 0.05,
            shots: 500,
            seed: 42,
        };
        let b = C64::new(0.3, 0.3);
        assert_eq!(
            simulate_parity_readout(&st, b, &m).unwrap(),
            simulate_parity_readout(&st, b, &m).unwrap()
        );
    }

    #[test]
    fn inconsistent_model_rejected() {
        let m = ReadoutModel {
            contrast: 0.9,
            offset: 0.2,
            shots: 10,
            seed: 0,
        };
        let st = JointState::fock(phonon(4), 0).unwrap();
        assert!(matches!(
            simulate_parity_readout(&st, C64::new(0.0, 0.0), &m),
            Err(Error::Model(_))
        ));
    }

    #[test]
    fn calibration_recovers_contrast() {
        for seed in [1u64, 2, 3] {
            let m = ReadoutModel {
                contrast: 0.7,
                offset: 0.0,
                shots: 10_000,
                seed,
            };
            let n = calibrate_parity(&m, 36).unwrap();
            assert!((n.gain() * 0.7 - 1.0).abs() < 0.02);
        }
        let ideal = calibrate_parity(&ReadoutModel::ideal(1_000_000, 5), 36).unwrap();
        assert!((ideal.amplitude - 1.0).abs() < 5e-3 && ideal.offset.abs() < 5e-3);
    }

    #[test]
    fn normalized_vacuum_is_plus_one() {
        let vac = JointState::fock(phonon(6), 0).unwrap();
        for (i, c) in [0.5, 0.65, 0.8, 1.0].iter().enumerate() {
            let m = ReadoutModel {
                contrast: *c,
                offset: 0.0,
                shots: 10_000,
                seed: 10 + i as u64,
            };
            let norm = calibrate_parity(&m, 36).unwrap();
            let s = sample_wigner(&vac, &[C64::new(0.0, 0.0)], &m, &norm).unwrap();
            let p = 0.5 * (1.0 + c);
            let sigma = 2.0 * (p * (1.0 - p) / 1e4).sqrt() / c;
            assert!((norm.apply(s.raw[0]) - 1.0).abs() < 4.0 * sigma + 0.03);
        }
    }
}
