//! Truncated Fock-space representation of the qubit ⊗ phonon system.
//!
//! Joint basis ordering is fixed as qubit ⊗ phonon with qubit basis
//! `{|g>, |e>}`: index `q * (n_max + 1) + n`, `q = 0` for `|g>`.

mod metrics;
mod operators;
mod space;
mod state;

pub use metrics::{fidelity, hermitian_sqrt, purity};
pub use operators::{OperatorSet, SparseOp};
pub use space::HilbertSpace;
pub use state::{
    coherent_amplitudes, coherent_amplitudes_unchecked, coherent_state, partial_trace, tensor,
    truncate_phonon,
    CoherentAmplitudes, JointState, Subsystem, StateKind,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Hermitian part `(M + M^dagger) / 2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}
