use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::grid::{GridSpec, WignerGrid};
use super::negativity::{fit_negativity_decay, negativity, NegativityDecayFit};
use crate::error::{Error, Result};
use crate::hilbert::C64;

/// Wigner function at `beta` of the cat `N(|alpha> + e^{i vartheta}|-alpha>)`
/// after amplitude damping has shrunk the components to `±eps alpha`.
///
/// The fringe term carries the coherence factor
/// `xi = exp(-2|alpha|^2 (1 - eps^2))`.
pub fn decayed_css_value(alpha: C64, vartheta: f64, eps: f64, beta: C64) -> f64 {
    let a2 = alpha.norm_sqr();
    let norm = 1.0 / (PI * (1.0 + vartheta.cos() * (-2.0 * a2).exp()));
    let xi = (-2.0 * a2 * (1.0 - eps * eps)).exp();
    let ae = alpha * eps;
    let fringe = 4.0 * eps * (beta * alpha.conj()).im + vartheta;
    norm * ((-2.0 * (beta - ae).norm_sqr()).exp()
        + (-2.0 * (beta + ae).norm_sqr()).exp()
        + 2.0 * xi * (-2.0 * beta.norm_sqr()).exp() * fringe.cos())
}

/// Decayed even cat on a grid, with `eps = exp(-kappa t / 2)`.
pub fn decayed_css_wigner(alpha: C64, kappa: f64, t: f64, spec: &GridSpec) -> Result<WignerGrid> {
    decayed_css_wigner_phase(alpha, 0.0, kappa, t, spec)
}

/// As [`decayed_css_wigner`] for a general superposition phase.
pub fn decayed_css_wigner_phase(
    alpha: C64,
    vartheta: f64,
    kappa: f64,
    t: f64,
    spec: &GridSpec,
) -> Result<WignerGrid> {
    spec.validate()?;
    if !(kappa >= 0.0) || !(t >= 0.0) {
        return Err(Error::param("kappa/t", "must be non-negative"));
    }
    let eps = (-kappa * t / 2.0).exp();
    let layout = spec.layout();
    let points = layout.points();
    let values = points
        .par_iter()
        .map(|&b| decayed_css_value(alpha, vartheta, eps, b))
        .collect();
    let n = points.len();
    Ok(WignerGrid::new(layout, points, values, vec![false; n]))
}

/// Large-amplitude negativity decay constant `T1 / (2 |alpha|^2)`.
pub fn tau_cat_large_alpha(alpha: C64, t1_phonon: f64) -> Result<f64> {
    let a2 = alpha.norm_sqr();
    if a2 == 0.0 {
        return Err(Error::Undefined("tau_cat needs |alpha| > 0".into()));
    }
    Ok(t1_phonon / (2.0 * a2))
}

#[derive(Debug, Clone, Serialize)]
pub struct CssDecay {
    pub taus: Vec<f64>,
    pub deltas: Vec<f64>,
    pub fit: NegativityDecayFit,
}

/// Negativity of the analytic decayed cat at each wait time, on the given
/// slice or raster, followed by the exponential-plus-offset fit.
pub fn css_negativity_decay(
    alpha: C64,
    vartheta: f64,
    t1_phonon: f64,
    taus: &[f64],
    spec: &GridSpec,
) -> Result<CssDecay> {
    if !(t1_phonon > 0.0) {
        return Err(Error::param("t1_phonon", "must be positive"));
    }
    let kappa = 1.0 / t1_phonon;
    let deltas = taus
        .iter()
        .map(|&t| negativity(&decayed_css_wigner_phase(alpha, vartheta, kappa, t, spec)?))
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_negativity_decay(taus, &deltas)?;
    Ok(CssDecay {
        taus: taus.to_vec(),
        deltas,
        fit,
    })
}
