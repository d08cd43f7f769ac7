use nalgebra::linalg::SymmetricEigen;
use serde::{Deserialize, Serialize};

use super::{hermitize, CMatrix, CVector, HilbertSpace, C64};
use crate::error::{Error, Result};
use crate::special::ln_factorials;

const NORM_TOL: f64 = 1e-9;
const HERMITIAN_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-9;
const ROUNDOFF_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Pure,
    Mixed,
}

/// Which factor of a joint state to keep in a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subsystem {
    Qubit,
    Phonon,
}

#[derive(Debug, Clone)]
enum StateData {
    Pure(CVector),
    Mixed(CMatrix),
}

/// A normalized state (ket or density matrix) on a [`HilbertSpace`].
#[derive(Debug, Clone)]
pub struct JointState {
    space: HilbertSpace,
    data: StateData,
}

impl JointState {
    /// A pure state. The norm must be within 1e-9 of one.
    pub fn pure(space: HilbertSpace, psi: CVector) -> Result<Self> {
        check_dim(space, psi.len())?;
        let norm = psi.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("ket norm {norm} is not 1")));
        }
        Ok(JointState {
            space,
            data: StateData::Pure(psi),
        })
    }

    /// A pure state from an unnormalized ket.
    pub fn pure_normalized(space: HilbertSpace, psi: CVector) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero ket".into()));
        }
        Self::pure(space, psi.unscale(norm))
    }

    /// A density matrix, validated as unit-trace, Hermitian (1e-12) and
    /// positive semidefinite (eigenvalues >= -1e-9).
    pub fn mixed(space: HilbertSpace, rho: CMatrix) -> Result<Self> {
        check_square(space, &rho)?;
        let herm_err = (&rho - rho.adjoint()).camax();
        if herm_err > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "density matrix not Hermitian (max deviation {herm_err:e})"
            )));
        }
        validate_density(&rho)?;
        Ok(JointState {
            space,
            data: StateData::Mixed(rho),
        })
    }

    /// A density matrix after replacing it with its Hermitian part. Used for
    /// numerically produced matrices carrying round-off anti-Hermitian residue.
    /// Eigenvalues down to -1e-7 are treated as round-off and clipped to zero.
    pub fn mixed_hermitized(space: HilbertSpace, rho: &CMatrix) -> Result<Self> {
        check_square(space, rho)?;
        let mut rho = hermitize(rho);
        let eig = SymmetricEigen::new(rho.clone());
        let min = eig.eigenvalues.min();
        if min < -ROUNDOFF_TOL {
            return Err(Error::InvalidState(format!(
                "density matrix not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        if min < -PSD_TOL {
            let clipped = eig.eigenvalues.map(|l| C64::new(l.max(0.0), 0.0));
            let v = &eig.eigenvectors;
            rho = hermitize(&(v * CMatrix::from_diagonal(&clipped) * v.adjoint()));
            let tr = rho.trace().re;
            rho /= C64::new(tr, 0.0);
        }
        validate_density(&rho)?;
        Ok(JointState {
            space,
            data: StateData::Mixed(rho),
        })
    }

    /// Integrator output: already Hermitian and trace-checked. Positivity holds
    /// to integration tolerance and is not re-verified per sample.
    pub(crate) fn from_integrator(space: HilbertSpace, rho: CMatrix) -> Self {
        JointState {
            space,
            data: StateData::Mixed(rho),
        }
    }

    /// Fock state `|n>` on a phonon space (`|g, n>` on a joint space).
    pub fn fock(space: HilbertSpace, n: usize) -> Result<Self> {
        let n_max = space
            .n_max()
            .ok_or_else(|| Error::SpaceMismatch("Fock state needs a phonon mode".into()))?;
        if n > n_max {
            return Err(Error::param("n", format!("{n} exceeds n_max={n_max}")));
        }
        let mut psi = CVector::zeros(space.dim());
        psi[n] = C64::new(1.0, 0.0);
        Self::pure(space, psi)
    }

    /// Qubit state `c_g|g> + c_e|e>`.
    pub fn qubit(c_g: C64, c_e: C64) -> Result<Self> {
        Self::pure(HilbertSpace::Qubit, CVector::from_vec(vec![c_g, c_e]))
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn kind(&self) -> StateKind {
        match self.data {
            StateData::Pure(_) => StateKind::Pure,
            StateData::Mixed(_) => StateKind::Mixed,
        }
    }

    pub fn ket(&self) -> Option<&CVector> {
        match &self.data {
            StateData::Pure(psi) => Some(psi),
            StateData::Mixed(_) => None,
        }
    }

    /// Density matrix (pure states are promoted).
    pub fn density_matrix(&self) -> CMatrix {
        match &self.data {
            StateData::Pure(psi) => psi * psi.adjoint(),
            StateData::Mixed(rho) => rho.clone(),
        }
    }

    /// Density matrix without cloning when already mixed.
    pub(crate) fn density_cow(&self) -> std::borrow::Cow<'_, CMatrix> {
        match &self.data {
            StateData::Pure(psi) => std::borrow::Cow::Owned(psi * psi.adjoint()),
            StateData::Mixed(rho) => std::borrow::Cow::Borrowed(rho),
        }
    }

    /// `Tr(rho O)`.
    pub fn expectation(&self, op: &CMatrix) -> Result<C64> {
        check_square(self.space, op)?;
        Ok(match &self.data {
            StateData::Pure(psi) => psi.dotc(&(op * psi)),
            StateData::Mixed(rho) => (rho * op).trace(),
        })
    }

    pub fn trace(&self) -> f64 {
        match &self.data {
            StateData::Pure(psi) => psi.norm_squared(),
            StateData::Mixed(rho) => rho.trace().re,
        }
    }

    /// Fock populations of the phonon factor.
    pub fn phonon_populations(&self) -> Result<Vec<f64>> {
        let d = self.space.phonon_dim();
        if !self.space.has_phonon() {
            return Err(Error::SpaceMismatch("qubit space has no phonon mode".into()));
        }
        let blocks = self.space.dim() / d;
        let diag = |i: usize| match &self.data {
            StateData::Pure(psi) => psi[i].norm_sqr(),
            StateData::Mixed(rho) => rho[(i, i)].re,
        };
        Ok((0..d)
            .map(|n| (0..blocks).map(|q| diag(q * d + n)).sum())
            .collect())
    }
}

fn check_dim(space: HilbertSpace, len: usize) -> Result<()> {
    if len != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: len,
        });
    }
    Ok(())
}

fn check_square(space: HilbertSpace, m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidState("matrix is not square".into()));
    }
    check_dim(space, m.nrows())
}

fn validate_density(rho: &CMatrix) -> Result<()> {
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
        return Err(Error::InvalidState(format!("trace {tr} is not 1")));
    }
    let eig = SymmetricEigen::new(rho.clone());
    let min = eig.eigenvalues.min();
    if min < -PSD_TOL {
        return Err(Error::InvalidState(format!(
            "density matrix not positive semidefinite (min eigenvalue {min:e})"
        )));
    }
    Ok(())
}

/// Truncated coherent-state amplitudes with the renormalization diagnostic.
#[derive(Debug, Clone)]
pub struct CoherentAmplitudes {
    /// Amplitudes `c_0..=c_n_max`, renormalized to unit norm.
    pub amplitudes: Vec<C64>,
    /// `1 - sum_{n <= n_max} |c_n|^2` before renormalization.
    pub norm_deficit: f64,
}

/// `c_n = e^{-|alpha|^2/2} alpha^n / sqrt(n!)` for `n = 0..=n_max`, enforcing
/// the truncation guard `|alpha|^2 <= n_max / 4`.
pub fn coherent_amplitudes(alpha: C64, n_max: usize) -> Result<CoherentAmplitudes> {
    HilbertSpace::phonon(n_max)?.check_amplitude(alpha.norm())?;
    Ok(coherent_amplitudes_unchecked(alpha, n_max))
}

/// Same as [`coherent_amplitudes`] without the truncation guard. Used by
/// optimizers that explore amplitudes near the edge of the truncated space.
pub fn coherent_amplitudes_unchecked(alpha: C64, n_max: usize) -> CoherentAmplitudes {
    let r = alpha.norm();
    let mut amps = vec![C64::new(0.0, 0.0); n_max + 1];
    if r == 0.0 {
        amps[0] = C64::new(1.0, 0.0);
        return CoherentAmplitudes {
            amplitudes: amps,
            norm_deficit: 0.0,
        };
    }
    let lnf = ln_factorials(n_max + 1);
    let (lnr, phase) = (r.ln(), alpha.arg());
    let mut sum = 0.0;
    for (n, a) in amps.iter_mut().enumerate() {
        let nf = n as f64;
        let mag = (-0.5 * r * r + nf * lnr - 0.5 * lnf[n]).exp();
        *a = C64::from_polar(mag, nf * phase);
        sum += mag * mag;
    }
    let scale = 1.0 / sum.sqrt();
    for a in amps.iter_mut() {
        *a *= scale;
    }
    CoherentAmplitudes {
        amplitudes: amps,
        norm_deficit: 1.0 - sum,
    }
}

/// Coherent state `|alpha>` on a phonon-only space.
pub fn coherent_state(alpha: C64, space: HilbertSpace) -> Result<JointState> {
    let HilbertSpace::Phonon { n_max } = space else {
        return Err(Error::SpaceMismatch(
            "coherent_state expects a phonon-only space".into(),
        ));
    };
    let amps = coherent_amplitudes(alpha, n_max)?;
    JointState::pure(space, CVector::from_vec(amps.amplitudes))
}

/// `qubit ⊗ phonon`.
pub fn tensor(qubit: &JointState, phonon: &JointState) -> Result<JointState> {
    let HilbertSpace::Phonon { n_max } = phonon.space() else {
        return Err(Error::SpaceMismatch("second factor must be a phonon state".into()));
    };
    if qubit.space() != HilbertSpace::Qubit {
        return Err(Error::SpaceMismatch("first factor must be a qubit state".into()));
    }
    let space = HilbertSpace::Joint { n_max };
    match (qubit.ket(), phonon.ket()) {
        (Some(q), Some(p)) => JointState::pure(space, q.kronecker(p)),
        _ => {
            let rho = qubit.density_matrix().kronecker(&phonon.density_matrix());
            JointState::mixed_hermitized(space, &rho)
        }
    }
}

/// Reduced state of one factor of a joint qubit ⊗ phonon state.
pub fn partial_trace(state: &JointState, keep: Subsystem) -> Result<JointState> {
    let HilbertSpace::Joint { n_max } = state.space() else {
        return Err(Error::SpaceMismatch(
            "partial trace needs a joint qubit-phonon state".into(),
        ));
    };
    let d = n_max + 1;
    let reduced = match (&state.data, keep) {
        (StateData::Pure(psi), Subsystem::Phonon) => {
            let g = psi.rows(0, d);
            let e = psi.rows(d, d);
            g * g.adjoint() + e * e.adjoint()
        }
        (StateData::Pure(psi), Subsystem::Qubit) => {
            let g = psi.rows(0, d);
            let e = psi.rows(d, d);
            let mut q = CMatrix::zeros(2, 2);
            q[(0, 0)] = g.dotc(&g);
            q[(0, 1)] = e.dotc(&g);
            q[(1, 0)] = g.dotc(&e);
            q[(1, 1)] = e.dotc(&e);
            q
        }
        (StateData::Mixed(rho), Subsystem::Phonon) => {
            rho.view((0, 0), (d, d)) + rho.view((d, d), (d, d))
        }
        (StateData::Mixed(rho), Subsystem::Qubit) => {
            let mut q = CMatrix::zeros(2, 2);
            for a in 0..2 {
                for b in 0..2 {
                    q[(a, b)] = rho.view((a * d, b * d), (d, d)).trace();
                }
            }
            q
        }
    };
    let space = match keep {
        Subsystem::Qubit => HilbertSpace::Qubit,
        Subsystem::Phonon => HilbertSpace::Phonon { n_max },
    };
    JointState::mixed_hermitized(space, &reduced)
}

/// Projects a phonon state onto Fock levels `0..=n_max` and renormalizes.
pub fn truncate_phonon(state: &JointState, n_max: usize) -> Result<JointState> {
    let HilbertSpace::Phonon { n_max: from } = state.space() else {
        return Err(Error::SpaceMismatch("truncation needs a phonon state".into()));
    };
    if n_max > from {
        return Err(Error::param("n_max", format!("cannot grow a state from {from} to {n_max}")));
    }
    let d = n_max + 1;
    let space = HilbertSpace::phonon(n_max)?;
    match &state.data {
        StateData::Pure(psi) => JointState::pure_normalized(space, psi.rows(0, d).into_owned()),
        StateData::Mixed(rho) => {
            let block = rho.view((0, 0), (d, d)).into_owned();
            let tr = block.trace().re;
            if !(tr > 0.0) {
                return Err(Error::InvalidState("no weight below the new cutoff".into()));
            }
            JointState::mixed_hermitized(space, &(block / C64::new(tr, 0.0)))
        }
    }
}
