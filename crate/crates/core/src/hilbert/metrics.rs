use nalgebra::linalg::SymmetricEigen;

use super::{CMatrix, JointState, C64};
use crate::error::{Error, Result};

const PSD_TOL: f64 = 1e-9;

/// `Tr(rho^2)`.
pub fn purity(state: &JointState) -> f64 {
    if let Some(psi) = state.ket() {
        return psi.norm_squared().powi(2);
    }
    let rho = state.density_matrix();
    // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    rho.iter().map(|z| z.norm_sqr()).sum()
}

/// Principal square root of a Hermitian PSD matrix.
pub fn hermitian_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let eig = SymmetricEigen::new(m.clone());
    let min = eig.eigenvalues.min();
    if min < -PSD_TOL {
        return Err(Error::InvalidState(format!(
            "matrix not positive semidefinite (min eigenvalue {min:e})"
        )));
    }
    let v = &eig.eigenvectors;
    let s = eig.eigenvalues.map(|l| C64::new(l.max(0.0).sqrt(), 0.0));
    Ok(v * CMatrix::from_diagonal(&s) * v.adjoint())
}

/// Uhlmann fidelity `Tr sqrt(sqrt(rho) sigma sqrt(rho))`, so that
/// `F(|a>, |b>) = |<a|b>|`.
pub fn fidelity(rho: &JointState, sigma: &JointState) -> Result<f64> {
    if rho.space() != sigma.space() {
        return Err(Error::SpaceMismatch(format!(
            "fidelity between {:?} and {:?}",
            rho.space(),
            sigma.space()
        )));
    }
    let f = match (rho.ket(), sigma.ket()) {
        (Some(a), Some(b)) => a.dotc(b).norm(),
        (Some(psi), None) => overlap(psi, &sigma.density_cow()),
        (None, Some(psi)) => overlap(psi, &rho.density_cow()),
        (None, None) => {
            let sr = hermitian_sqrt(&rho.density_cow())?;
            let m = &sr * sigma.density_cow().as_ref() * &sr;
            let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
            let eig = SymmetricEigen::new(m);
            let min = eig.eigenvalues.min();
            if min < -PSD_TOL {
                return Err(Error::InvalidState(format!(
                    "fidelity kernel not positive semidefinite (min eigenvalue {min:e})"
                )));
            }
            eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).sum()
        }
    };
    Ok(f.clamp(0.0, 1.0))
}

fn overlap(psi: &super::CVector, rho: &CMatrix) -> f64 {
    psi.dotc(&(rho * psi)).re.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{coherent_state, HilbertSpace};
    use proptest::prelude::*;

    fn random_density(dim: usize, seed: &[f64]) -> CMatrix {
        let g = CMatrix::from_fn(dim, dim, |i, j| {
            let k = (i * dim + j) % seed.len();
            C64::new(seed[k] + 0.1 * i as f64, seed[(k + 1) % seed.len()] - 0.05 * j as f64)
        });
        let m = &g * g.adjoint();
        let tr = m.trace();
        m / tr
    }

    #[test]
    fn fidelity_examples() {
        let s = HilbertSpace::phonon(12).unwrap();
        let zero = JointState::fock(s, 0).unwrap();
        let one = JointState::fock(s, 1).unwrap();
        let coh = coherent_state(C64::new(1.0, 0.0), s).unwrap();
        assert!(fidelity(&zero, &one).unwrap() < 1e-15);
        assert!((fidelity(&zero, &coh).unwrap() - (-0.5f64).exp()).abs() < 1e-9);
        let mixed = JointState::mixed(s, coh.density_matrix()).unwrap();
        assert!((fidelity(&mixed, &mixed).unwrap() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn maximally_mixed_qubit_purity() {
        let m = CMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        let st = JointState::mixed(HilbertSpace::Qubit, m).unwrap();
        assert!((purity(&st) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fidelity_stable_under_truncation_growth() {
        let a = C64::new(0.8, -0.4);
        let f = |n| {
            let s = HilbertSpace::phonon(n).unwrap();
            let c = coherent_state(a, s).unwrap();
            let v = JointState::fock(s, 1).unwrap();
            let mix = (c.density_matrix() + v.density_matrix()) * C64::new(0.5, 0.0);
            let mix = JointState::mixed(s, mix).unwrap();
            fidelity(&mix, &JointState::mixed(s, c.density_matrix()).unwrap()).unwrap()
        };
        let base = f(40);
        for n in [44, 50, 60] {
            assert!((f(n) - base).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn sqrt_squares_back(seed in proptest::collection::vec(-1.0f64..1.0, 7)) {
            let m = random_density(5, &seed);
            let r = hermitian_sqrt(&m).unwrap();
            prop_assert!((&r * &r - &m).camax() < 1e-9);
        }

        #[test]
        fn fidelity_symmetric_and_bounded(
            s1 in proptest::collection::vec(-1.0f64..1.0, 5),
            s2 in proptest::collection::vec(-1.0f64..1.0, 6),
        ) {
            let sp = HilbertSpace::phonon(3).unwrap();
            let a = JointState::mixed_hermitized(sp, &random_density(4, &s1)).unwrap();
            let b = JointState::mixed_hermitized(sp, &random_density(4, &s2)).unwrap();
            let fab = fidelity(&a, &b).unwrap();
            let fba = fidelity(&b, &a).unwrap();
            prop_assert!((fab - fba).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&fab));
            prop_assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-7);
        }
    }
}
