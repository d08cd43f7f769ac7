use rayon::prelude::*;

use super::grid::{GridLayout, GridSpec, WignerGrid};
use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, HilbertSpace, JointState, C64};
use crate::special::displacement_matrix;

/// `W(beta) = (2/pi) Tr[rho D(beta) Pi D^dag(beta)]` at one point.
///
/// Uses `D(beta) Pi D^dag(beta) = D(2 beta) Pi` with exact displacement
/// matrix elements, so the value is exact for the represented state. Far
/// from the state the sum cancels to rounding noise; results within that
/// noise are returned as zero so that sign noise does not masquerade as
/// negativity.
pub fn wigner_at(rho: &CMatrix, beta: C64) -> f64 {
    let d = rho.nrows();
    let disp = displacement_matrix(beta * 2.0, d);
    let mut acc = C64::new(0.0, 0.0);
    let mut scale = 0.0;
    for n in 0..d {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let mut row = C64::new(0.0, 0.0);
        for m in 0..d {
            let term = rho[(n, m)] * disp[(m, n)];
            row += term;
            scale += term.norm();
        }
        acc += row * sign;
    }
    let noise = 8.0 * (d as f64) * f64::EPSILON * scale;
    if acc.re.abs() <= noise {
        0.0
    } else {
        acc.re * std::f64::consts::FRAC_2_PI
    }
}

fn phonon_rho(state: &JointState) -> Result<(CMatrix, usize)> {
    match state.space() {
        HilbertSpace::Phonon { n_max } => Ok((state.density_matrix(), n_max)),
        other => Err(Error::SpaceMismatch(format!(
            "Wigner function needs a phonon-only state, got {other:?}"
        ))),
    }
}

/// Evaluates the Wigner function of a phonon state on a grid. Points are
/// evaluated in parallel and gathered in grid order.
pub fn wigner(state: &JointState, spec: &GridSpec) -> Result<WignerGrid> {
    spec.validate()?;
    wigner_points(state, spec.layout())
}

pub(crate) fn wigner_points(state: &JointState, layout: GridLayout) -> Result<WignerGrid> {
    let (rho, n_max) = phonon_rho(state)?;
    let points = layout.points();
    let limit = (n_max as f64).sqrt() / 2.0;
    let values: Vec<f64> = points.par_iter().map(|&b| wigner_at(&rho, b)).collect();
    let flags = points.iter().map(|b| b.norm() > limit).collect();
    Ok(WignerGrid::new(layout, points, values, flags))
}

/// Wigner function at arbitrary points.
pub fn wigner_scattered(state: &JointState, points: &[C64]) -> Result<WignerGrid> {
    let (rho, n_max) = phonon_rho(state)?;
    let limit = (n_max as f64).sqrt() / 2.0;
    let values: Vec<f64> = points.par_iter().map(|&b| wigner_at(&rho, b)).collect();
    let flags = points.iter().map(|b| b.norm() > limit).collect();
    Ok(WignerGrid::new(GridLayout::Scattered, points.to_vec(), values, flags))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{coherent_state, OperatorSet};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_2_PI;

    #[test]
    fn fock_values_at_origin() {
        let s = HilbertSpace::phonon(10).unwrap();
        let vac = JointState::fock(s, 0).unwrap().density_matrix();
        let one = JointState::fock(s, 1).unwrap().density_matrix();
        assert!((wigner_at(&vac, C64::new(0.0, 0.0)) - FRAC_2_PI).abs() < 1e-14);
        assert!((wigner_at(&one, C64::new(0.0, 0.0)) + FRAC_2_PI).abs() < 1e-14);
    }

    #[test]
    fn coherent_gaussian_centered() {
        let s = HilbertSpace::phonon(30).unwrap();
        let a = C64::new(1.1, -0.6);
        let rho = coherent_state(a, s).unwrap().density_matrix();
        for b in [a, a + C64::new(0.3, 0.2), C64::new(-1.0, 1.0)] {
            let want = FRAC_2_PI * (-2.0 * (b - a).norm_sqr()).exp();
            assert!((wigner_at(&rho, b) - want).abs() < 1e-10);
        }
    }

    #[test]
    fn matches_matrix_exponential_displacement() {
        // Oracle: displace with expm of the generator in a larger space,
        // truncate, and take the parity expectation directly.
        let big = 60;
        let ops = OperatorSet::new(HilbertSpace::phonon(big).unwrap()).unwrap();
        let beta = C64::new(0.7, -0.4);
        let gen = &ops.a_dag * beta - &ops.a * beta.conj();
        let d = gen.exp();
        let s = HilbertSpace::phonon(12).unwrap();
        let mut psi = nalgebra::DVector::zeros(13);
        psi[0] = C64::new(0.6, 0.0);
        psi[3] = C64::new(0.0, 0.8);
        let st = JointState::pure(s, psi.clone()).unwrap();
        let mut ext = nalgebra::DVector::zeros(big + 1);
        ext.rows_mut(0, 13).copy_from(&psi);
        let shifted = d.adjoint() * ext;
        let parity: f64 = shifted
            .iter()
            .enumerate()
            .map(|(n, c)| if n % 2 == 0 { c.norm_sqr() } else { -c.norm_sqr() })
            .sum();
        let w = wigner_at(&st.density_matrix(), beta);
        assert!((w - FRAC_2_PI * parity).abs() < 1e-10);
    }

    #[test]
    fn normalized_on_default_raster() {
        let s = HilbertSpace::phonon(20).unwrap();
        let st = coherent_state(C64::new(0.5, 1.0), s).unwrap();
        let g = wigner(&st, &GridSpec::default()).unwrap();
        let total = super::super::integrate(&g).unwrap();
        assert!((total - 1.0).abs() < 0.02);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn mixture_linearity(p in 0.0f64..1.0, re in -1.0f64..1.0, im in -1.0f64..1.0) {
            let s = HilbertSpace::phonon(16).unwrap();
            let a = coherent_state(C64::new(re, im), s).unwrap().density_matrix();
            let b = JointState::fock(s, 2).unwrap().density_matrix();
            let mix = &a * C64::new(p, 0.0) + &b * C64::new(1.0 - p, 0.0);
            let beta = C64::new(0.3 * re - 0.2, 0.5 * im);
            let lhs = wigner_at(&mix, beta);
            let rhs = p * wigner_at(&a, beta) + (1.0 - p) * wigner_at(&b, beta);
            prop_assert!((lhs - rhs).abs() < 1e-10);
        }

        #[test]
        fn displacement_covariance(gr in -0.6f64..0.6, gi in -0.6f64..0.6, br in -1.0f64..1.0, bi in -1.0f64..1.0) {
            let s = HilbertSpace::phonon(40).unwrap();
            let ops = OperatorSet::new(s).unwrap();
            let mut psi = nalgebra::DVector::zeros(41);
            psi[0] = C64::new(0.8, 0.0);
            psi[1] = C64::new(0.0, 0.6);
            let rho = JointState::pure(s, psi).unwrap().density_matrix();
            let g = C64::new(gr, gi);
            let dg = ops.displacement(g);
            let shifted = &dg * &rho * dg.adjoint();
            let beta = C64::new(br, bi);
            prop_assert!((wigner_at(&shifted, beta) - wigner_at(&rho, beta - g)).abs() < 1e-8);
        }
    }
}
