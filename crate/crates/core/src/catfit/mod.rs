//! Fits of reconstructed phonon states to the Jaynes-Cummings target state
//! and to two-component coherent-state superpositions, plus fidelity
//! sensitivity intervals.

mod analytical;
mod css;
mod sensitivity;

pub use analytical::{analytical_target, fit_analytical, AnalyticalFit, JcTarget};
pub use css::{css_state, fit_css, CssFit};
pub use sensitivity::{profile_interval, sensitivity_interval, FitRef, SensitivityInterval};

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, HilbertSpace, JointState};
use crate::optim::NelderMeadOptions;

pub(crate) const FIT_OPTIONS: NelderMeadOptions = NelderMeadOptions {
    max_evals: 3000,
    f_tol: 1e-11,
    x_tol: 1e-9,
};

pub(crate) fn phonon_rho(rho: &JointState) -> Result<(usize, CMatrix)> {
    match rho.space() {
        HilbertSpace::Phonon { n_max } => Ok((n_max, rho.density_matrix())),
        other => Err(Error::SpaceMismatch(format!(
            "cat fits need a phonon-only state, got {other:?}"
        ))),
    }
}

/// Root fidelity between `rho` and the low-rank state `V V^dag`: the nonzero
/// spectrum of `sqrt(rho) V V^dag sqrt(rho)` equals that of `V^dag rho V`.
pub(crate) fn low_rank_fidelity(rho: &CMatrix, v: &CMatrix) -> f64 {
    let m = v.adjoint() * rho * v;
    let m = crate::hilbert::hermitize(&m);
    let ev = SymmetricEigen::new(m).eigenvalues;
    ev.iter().map(|&e| e.max(0.0).sqrt()).sum::<f64>().min(1.0)
}

pub(crate) fn wrap_angle(x: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let y = x.rem_euclid(two_pi);
    if y > std::f64::consts::PI {
        y - two_pi
    } else {
        y
    }
}

/// Best of several optimizer runs: highest fidelity, ties broken by the
/// parameter vector in lexicographic order.
pub(crate) fn pick_best(runs: Vec<crate::optim::Minimum>) -> crate::optim::Minimum {
    runs.into_iter()
        .min_by(|a, b| {
            a.f.total_cmp(&b.f).then_with(|| {
                a.x.iter()
                    .zip(&b.x)
                    .map(|(p, q)| p.total_cmp(q))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        })
        .expect("at least one start")
}
