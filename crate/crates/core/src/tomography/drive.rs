use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::scan_minimize;

/// Phenomenological drive response `|beta| = C (exp(A/B) - 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveCalibration {
    pub b: f64,
    pub c: f64,
    /// Sum of squared residuals of the fit.
    pub residual: f64,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl DriveCalibration {
    pub fn new(b: f64, c: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::param("B", "must be positive"));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::param("C", "must be positive"));
        }
        Ok(DriveCalibration {
            b,
            c,
            residual: 0.0,
            warnings: Vec::new(),
        })
    }

    pub fn beta_abs(&self, a: f64) -> f64 {
        self.c * (a / self.b).exp_m1()
    }

    /// Inverse map, drive amplitude for a target `|beta|`.
    pub fn amplitude(&self, beta_abs: f64) -> f64 {
        self.b * (beta_abs / self.c).ln_1p()
    }

    pub fn slope_at_zero(&self) -> f64 {
        self.c / self.b
    }
}

fn best_c(b: f64, samples: &[(f64, f64)]) -> (f64, f64) {
    let (mut sff, mut syf) = (0.0, 0.0);
    for &(a, y) in samples {
        let f = (a / b).exp_m1();
        sff += f * f;
        syf += y * f;
    }
    let c = if sff > 0.0 { syf / sff } else { 0.0 };
    let ssr = samples
        .iter()
        .map(|&(a, y)| (y - c * (a / b).exp_m1()).powi(2))
        .sum();
    (c, ssr)
}

/// Least-squares fit of `(B, C)` to `(A, |beta|)` pairs. `C` is linear
/// given `B`, so only `ln B` is searched.
pub fn calibrate_drive(samples: &[(f64, f64)]) -> Result<DriveCalibration> {
    if samples.len() < 3 {
        return Err(Error::param("samples", "need at least 3 (A, |beta|) pairs"));
    }
    if samples
        .iter()
        .any(|&(a, y)| !a.is_finite() || !y.is_finite() || a < 0.0)
    {
        return Err(Error::param("samples", "amplitudes must be finite and non-negative"));
    }
    let a_max = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    if a_max <= 0.0 {
        return Err(Error::param("samples", "need at least one positive amplitude"));
    }
    let (lo, hi) = ((a_max / 200.0).ln(), (a_max * 200.0).ln());
    let (lb, ssr) = scan_minimize(|lb| best_c(lb.exp(), samples).1, lo, hi, 401, 1e-12);
    let step = (hi - lo) / 400.0;
    if lb <= lo + step || lb >= hi - step {
        return Err(Error::Fit(format!(
            "drive fit diverged: B ran to the search boundary ({:.3e})",
            lb.exp()
        )));
    }
    let b = lb.exp();
    let (c, _) = best_c(b, samples);
    if !(c > 0.0) {
        return Err(Error::Fit("drive fit gave a non-positive prefactor".into()));
    }

    let mut warnings = Vec::new();
    let noise = (ssr / samples.len() as f64).sqrt();
    let mut sorted = samples.to_vec();
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    for w in sorted.windows(2) {
        if w[1].0 > w[0].0 && w[0].1 - w[1].1 > 3.0 * noise {
            warnings.push(format!(
                "|beta| decreases from {:.4} to {:.4} between A={} and A={}",
                w[0].1, w[1].1, w[0].0, w[1].0
            ));
        }
    }
    Ok(DriveCalibration {
        b,
        c,
        residual: ssr,
        warnings,
    })
}
