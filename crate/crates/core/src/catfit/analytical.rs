use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{low_rank_fidelity, phonon_rho, pick_best, wrap_angle, FIT_OPTIONS};
use crate::dynamics::{jc_evolve_exact, SystemParams};
use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, HilbertSpace, JointState, C64};
use crate::optim::nelder_mead;

/// Fixed experimental settings of the Jaynes-Cummings target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JcTarget {
    pub g0: f64,
    pub c_g: C64,
    pub c_e: C64,
    pub t_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticalFit {
    pub alpha_fit: f64,
    /// Phase-space rotation, wrapped to `(-pi, pi]`.
    pub theta: f64,
    pub fidelity: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Columns `(psi_g, psi_e)` of the joint state after the JC interaction,
/// rotated by `exp(-i theta n)` and truncated to `dim` levels, so the
/// phonon target is `V V^dag`.
fn target_factor(alpha: f64, theta: f64, target: &JcTarget, dim: usize) -> Result<CMatrix> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::param("alpha", "must be non-negative"));
    }
    let cutoff = (dim - 1).max(HilbertSpace::recommended_cutoff(alpha));
    let params = SystemParams::new(target.g0, C64::new(alpha, 0.0))
        .with_qubit(target.c_g, target.c_e)
        .with_cutoff(cutoff);
    let st = jc_evolve_exact(&params, target.t_c)?;
    let psi = st.ket().expect("exact evolution is pure");
    let d_full = cutoff + 1;
    let mut v = CMatrix::from_fn(dim, 2, |n, q| {
        psi[q * d_full + n] * C64::from_polar(1.0, -theta * n as f64)
    });
    let norm = v.norm();
    v /= C64::new(norm, 0.0);
    Ok(v)
}

/// Phonon state `R(theta) Tr_q[U(t_C) (c_g|g> + c_e|e>)|alpha>] R^dag(theta)`
/// on the given phonon space.
pub fn analytical_target(
    alpha: f64,
    theta: f64,
    target: &JcTarget,
    space: HilbertSpace,
) -> Result<JointState> {
    let HilbertSpace::Phonon { n_max } = space else {
        return Err(Error::SpaceMismatch("target lives on a phonon space".into()));
    };
    let v = target_factor(alpha, theta, target, n_max + 1)?;
    JointState::mixed_hermitized(space, &(&v * v.adjoint()))
}

pub(crate) fn analytical_fidelity(
    rho: &CMatrix,
    alpha: f64,
    theta: f64,
    target: &JcTarget,
) -> f64 {
    match target_factor(alpha, theta, target, rho.nrows()) {
        Ok(v) => low_rank_fidelity(rho, &v),
        Err(_) => f64::NAN,
    }
}

fn check_target(target: &JcTarget) -> Result<()> {
    if !(target.g0 > 0.0) || !(target.t_c >= 0.0) {
        return Err(Error::param("target", "need g0 > 0 and t_C >= 0"));
    }
    let norm = target.c_g.norm_sqr() + target.c_e.norm_sqr();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::param("c_g/c_e", format!("|c_g|^2+|c_e|^2 = {norm}")));
    }
    Ok(())
}

/// Maximizes the fidelity over `(alpha, theta)` with Nelder-Mead from a
/// 4x4 lattice of starts: amplitudes around `sqrt(<n>)`, quarter-turn
/// rotations.
pub fn fit_analytical(rho: &JointState, target: &JcTarget) -> Result<AnalyticalFit> {
    check_target(target)?;
    let (_, m) = phonon_rho(rho)?;
    let n_mean: f64 = (0..m.nrows()).map(|n| n as f64 * m[(n, n)].re).sum();
    let guess = n_mean.max(0.04).sqrt();
    let starts: Vec<[f64; 2]> = [0.6, 0.85, 1.1, 1.35]
        .iter()
        .flat_map(|&s| {
            (0..4).map(move |k| [guess * s, k as f64 * std::f64::consts::FRAC_PI_2])
        })
        .collect();
    let runs: Vec<_> = starts
        .par_iter()
        .map(|x0| {
            nelder_mead(
                |x| 1.0 - analytical_fidelity(&m, x[0], x[1], target),
                x0,
                &[0.1 * guess, 0.4],
                FIT_OPTIONS,
            )
        })
        .collect();
    let evals: usize = runs.iter().map(|r| r.evals).sum();
    let best = pick_best(runs);
    if !best.f.is_finite() {
        return Err(Error::Fit("analytical fit found no valid target".into()));
    }
    Ok(AnalyticalFit {
        alpha_fit: best.x[0],
        theta: wrap_angle(best.x[1]),
        fidelity: 1.0 - best.f,
        evals,
        converged: best.converged,
    })
}
