use serde::Serialize;

use super::grid::{GridLayout, WignerGrid};
use crate::error::{Error, Result};
use crate::optim::{least_squares, scan_minimize};

const FLOOR: f64 = 1e-12;

fn trapezoid_weights(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = axis[i + 1] - axis[i];
        w[i] += h / 2.0;
        w[i + 1] += h / 2.0;
    }
    w
}

/// Trapezoidal integral of `f(W)` over the grid: along the line for slices,
/// over the area for rasters.
fn integrate_with(grid: &WignerGrid, f: impl Fn(f64) -> f64) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::Empty("Wigner grid"));
    }
    if grid.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("grid", "non-finite Wigner values"));
    }
    match &grid.layout {
        GridLayout::Slice { re, .. } => {
            let w = trapezoid_weights(re);
            Ok(w.iter().zip(&grid.values).map(|(wi, &v)| wi * f(v)).sum())
        }
        GridLayout::Raster { re, im } => {
            let wx = trapezoid_weights(re);
            let wy = trapezoid_weights(im);
            let nx = re.len();
            let mut total = 0.0;
            for (j, wyj) in wy.iter().enumerate() {
                let row: f64 = (0..nx)
                    .map(|i| wx[i] * f(grid.values[j * nx + i]))
                    .sum();
                total += wyj * row;
            }
            Ok(total)
        }
        GridLayout::Scattered => Err(Error::Undefined(
            "scattered grids have no integration rule".into(),
        )),
    }
}

/// `∫ W`; close to one for a raster covering the state.
pub fn integrate(grid: &WignerGrid) -> Result<f64> {
    integrate_with(grid, |v| v)
}

/// `∫ (|W| - W)`: along the slice for 1D grids, over the area for rasters.
/// Values below 1e-12 are reported as zero.
pub fn negativity(grid: &WignerGrid) -> Result<f64> {
    let d = integrate_with(grid, |v| v.abs() - v)?;
    Ok(if d < FLOOR { 0.0 } else { d })
}

/// Fit of `amplitude * exp(-tau / tau_cat) + offset`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NegativityDecayFit {
    pub tau_cat: f64,
    pub amplitude: f64,
    pub offset: f64,
    /// Sum of squared residuals.
    pub residual: f64,
}

/// Least-squares exponential-plus-offset fit. The linear amplitude and offset
/// are eliminated; the decay constant is found by a log-spaced scan and
/// Brent refinement over `[span / 100, 100 span]`.
pub fn fit_negativity_decay(taus: &[f64], deltas: &[f64]) -> Result<NegativityDecayFit> {
    if taus.len() != deltas.len() {
        return Err(Error::DimensionMismatch {
            expected: taus.len(),
            found: deltas.len(),
        });
    }
    if taus.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 points, got {}", taus.len())));
    }
    if deltas.iter().any(|&d| !(d >= 0.0) || !d.is_finite()) {
        return Err(Error::param("deltas", "negativities must be finite and non-negative"));
    }
    let (lo, hi) = deltas
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &d| (a.min(d), b.max(d)));
    if hi - lo <= 1e-14 * hi.abs().max(1e-300) {
        return Err(Error::Fit("constant negativity series".into()));
    }
    let t_min = taus.iter().copied().fold(f64::INFINITY, f64::min);
    let t_max = taus.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = t_max - t_min;
    if !(span > 0.0) {
        return Err(Error::Fit("all wait times equal".into()));
    }
    let y = nalgebra::DVector::from_column_slice(deltas);
    let solve = |tau: f64| {
        let a = nalgebra::DMatrix::from_fn(taus.len(), 2, |i, j| {
            if j == 0 {
                (-(taus[i] - t_min) / tau).exp()
            } else {
                1.0
            }
        });
        least_squares(&a, &y)
    };
    let cost = |ln_tau: f64| solve(ln_tau.exp()).map(|r| r.1).unwrap_or(f64::INFINITY);
    let (a, b) = ((span / 100.0).ln(), (span * 100.0).ln());
    let (ln_tau, _) = scan_minimize(cost, a, b, 241, 1e-12);
    if (ln_tau - b).abs() < 1e-6 || (ln_tau - a).abs() < 1e-6 {
        return Err(Error::Fit(format!(
            "decay constant at search boundary ({:.4e})",
            ln_tau.exp()
        )));
    }
    let tau_cat = ln_tau.exp();
    let (coef, residual) = solve(tau_cat)?;
    Ok(NegativityDecayFit {
        tau_cat,
        // amplitude referred to tau = 0
        amplitude: coef[0] * (t_min / tau_cat).exp(),
        offset: coef[1],
        residual,
    })
}
