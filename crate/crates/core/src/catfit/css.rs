use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{low_rank_fidelity, phonon_rho, pick_best, wrap_angle, FIT_OPTIONS};
use crate::error::{Error, Result};
use crate::hilbert::{coherent_amplitudes_unchecked, CMatrix, CVector, HilbertSpace, JointState, C64};
use crate::optim::nelder_mead;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CssFit {
    pub alpha1: C64,
    pub alpha2: C64,
    pub vartheta: f64,
    pub fidelity: f64,
    /// Half the phase-space distance between the components.
    pub d: f64,
    pub evals: usize,
    pub converged: bool,
}

/// `N (|alpha1> + e^{i vartheta} |alpha2>)` on `n_max + 1` levels,
/// normalized inside the truncated space.
pub(crate) fn css_vector(alpha1: C64, alpha2: C64, vartheta: f64, n_max: usize) -> Option<CVector> {
    let a = coherent_amplitudes_unchecked(alpha1, n_max).amplitudes;
    let b = coherent_amplitudes_unchecked(alpha2, n_max).amplitudes;
    let ph = C64::from_polar(1.0, vartheta);
    let v = CVector::from_iterator(n_max + 1, a.iter().zip(&b).map(|(x, y)| x + ph * y));
    let norm = v.norm();
    (norm > 1e-12).then(|| v / C64::new(norm, 0.0))
}

/// Normalized two-component coherent-state superposition.
pub fn css_state(alpha1: C64, alpha2: C64, vartheta: f64, space: HilbertSpace) -> Result<JointState> {
    let HilbertSpace::Phonon { n_max } = space else {
        return Err(Error::SpaceMismatch("CSS lives on a phonon space".into()));
    };
    space.check_amplitude(alpha1.norm().max(alpha2.norm()))?;
    let v = css_vector(alpha1, alpha2, vartheta, n_max)
        .ok_or_else(|| Error::InvalidState("components cancel exactly".into()))?;
    JointState::pure(space, v)
}

/// Parameters `[cx, cy, h cos(phi), h sin(phi), vartheta]` map to
/// `alpha1,2 = c +/- h e^{i phi}`.
fn components(x: &[f64]) -> (C64, C64) {
    let c = C64::new(x[0], x[1]);
    let h = C64::new(x[2], x[3]);
    (c + h, c - h)
}

pub(crate) fn css_fidelity(rho: &CMatrix, a1: C64, a2: C64, vartheta: f64) -> f64 {
    let n_max = rho.nrows() - 1;
    match css_vector(a1, a2, vartheta, n_max) {
        Some(v) => low_rank_fidelity(rho, &CMatrix::from_column_slice(n_max + 1, 1, v.as_slice())),
        None => f64::NAN,
    }
}

/// Orders the components so `alpha1` has the larger imaginary part (then
/// real part), using the `(alpha1, alpha2, vartheta) ~ (alpha2, alpha1,
/// -vartheta)` symmetry.
fn canonical(a1: C64, a2: C64, vartheta: f64) -> (C64, C64, f64) {
    let key = |z: C64| (z.im, z.re);
    let (k1, k2) = (key(a1), key(a2));
    if k2.0 > k1.0 + 1e-9 || ((k2.0 - k1.0).abs() <= 1e-9 && k2.1 > k1.1) {
        (a2, a1, wrap_angle(-vartheta))
    } else {
        (a1, a2, wrap_angle(vartheta))
    }
}

/// Maximizes the fidelity to `N(|alpha1> + e^{i vartheta}|alpha2>)` over the
/// five real parameters, from 16 starts: four axis directions times four
/// quarter-turn phases, with half-separation `sqrt(<n>)` about `<a>`.
pub fn fit_css(rho: &JointState) -> Result<CssFit> {
    let (n_max, m) = phonon_rho(rho)?;
    let dim = n_max + 1;
    let mut a_mean = C64::new(0.0, 0.0);
    let mut n_mean = 0.0;
    for n in 1..dim {
        a_mean += m[(n, n - 1)] * (n as f64).sqrt();
        n_mean += n as f64 * m[(n, n)].re;
    }
    let h0 = (n_mean - a_mean.norm_sqr()).max(0.04).sqrt();
    let starts: Vec<Vec<f64>> = (0..4)
        .flat_map(|j| {
            let phi = j as f64 * std::f64::consts::FRAC_PI_4;
            (0..4).map(move |k| {
                vec![
                    a_mean.re,
                    a_mean.im,
                    h0 * phi.cos(),
                    h0 * phi.sin(),
                    k as f64 * std::f64::consts::FRAC_PI_2,
                ]
            })
        })
        .collect();
    let f = |x: &[f64]| {
        let (a1, a2) = components(x);
        1.0 - css_fidelity(&m, a1, a2, x[4])
    };
    let step = 0.2 * h0.max(0.5);
    let runs: Vec<_> = starts
        .par_iter()
        .map(|x0| nelder_mead(f, x0, &[step, step, step, step, 0.5], FIT_OPTIONS))
        .collect();
    let evals: usize = runs.iter().map(|r| r.evals).sum();
    let best = pick_best(runs);
    // polish from the winner
    let best = nelder_mead(f, &best.x, &[0.02, 0.02, 0.02, 0.02, 0.05], FIT_OPTIONS);
    if !best.f.is_finite() {
        return Err(Error::Fit("CSS fit found no valid target".into()));
    }
    let (a1, a2) = components(&best.x);
    let (alpha1, alpha2, vartheta) = canonical(a1, a2, best.x[4]);
    Ok(CssFit {
        alpha1,
        alpha2,
        vartheta,
        fidelity: 1.0 - best.f,
        d: (alpha1 - alpha2).norm() / 2.0,
        evals: evals + best.evals,
        converged: best.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{coherent_state, fidelity};

    #[test]
    fn self_fit_exact() {
        let space = HilbertSpace::phonon(20).unwrap();
        let st = css_state(C64::new(0.0, 1.61), C64::new(0.0, -1.61), 0.0, space).unwrap();
        let fit = fit_css(&st).unwrap();
        assert!((fit.fidelity - 1.0).abs() < 1e-6, "{fit:?}");
        assert!((fit.d - 1.61).abs() < 1e-4);
        assert!((fit.alpha1 - C64::new(0.0, 1.61)).norm() < 1e-3);
        assert!(fit.vartheta.abs() < 1e-3);
    }

    #[test]
    fn swap_symmetry() {
        let space = HilbertSpace::phonon(20).unwrap();
        let a = css_state(C64::new(1.0, 0.5), C64::new(-0.5, -1.0), 0.8, space).unwrap();
        let b = css_state(C64::new(-0.5, -1.0), C64::new(1.0, 0.5), -0.8, space).unwrap();
        let f = fidelity(&a, &b).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
        let fit = fit_css(&a).unwrap();
        assert!((fit.alpha1 - C64::new(1.0, 0.5)).norm() < 1e-3, "{fit:?}");
        assert!((fit.vartheta - 0.8).abs() < 1e-3);
    }

    #[test]
    fn coherent_state_gives_small_separation() {
        let space = HilbertSpace::phonon(16).unwrap();
        let st = coherent_state(C64::new(0.7, -0.4), space).unwrap();
        let fit = fit_css(&st).unwrap();
        assert!(fit.fidelity > 1.0 - 1e-6);
    }

    #[test]
    fn odd_cat_has_phase_pi() {
        let space = HilbertSpace::phonon(20).unwrap();
        let st = css_state(C64::new(1.2, 0.0), C64::new(-1.2, 0.0), std::f64::consts::PI, space).unwrap();
        let fit = fit_css(&st).unwrap();
        assert!(fit.fidelity > 1.0 - 1e-6);
        assert!((fit.vartheta.abs() - std::f64::consts::PI).abs() < 1e-3, "{fit:?}");
        assert!((fit.d - 1.2).abs() < 1e-3);
    }
}
