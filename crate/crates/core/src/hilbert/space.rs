use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A truncated Hilbert space: a lone qubit, a phonon mode with Fock states
/// `0..=n_max`, or the joint qubit ⊗ phonon space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HilbertSpace {
    Qubit,
    Phonon { n_max: usize },
    Joint { n_max: usize },
}

impl HilbertSpace {
    pub fn phonon(n_max: usize) -> Result<Self> {
        Self::check_cutoff(n_max)?;
        Ok(HilbertSpace::Phonon { n_max })
    }

    pub fn joint(n_max: usize) -> Result<Self> {
        Self::check_cutoff(n_max)?;
        Ok(HilbertSpace::Joint { n_max })
    }

    fn check_cutoff(n_max: usize) -> Result<()> {
        if n_max < 1 {
            return Err(Error::param("n_max", "Fock cutoff must be at least 1"));
        }
        Ok(())
    }

    /// Fock cutoff, `None` for a lone qubit.
    pub fn n_max(&self) -> Option<usize> {
        match *self {
            HilbertSpace::Qubit => None,
            HilbertSpace::Phonon { n_max } | HilbertSpace::Joint { n_max } => Some(n_max),
        }
    }

    pub fn has_qubit(&self) -> bool {
        !matches!(self, HilbertSpace::Phonon { .. })
    }

    pub fn has_phonon(&self) -> bool {
        !matches!(self, HilbertSpace::Qubit)
    }

    /// Dimension of the phonon factor (1 for a lone qubit).
    pub fn phonon_dim(&self) -> usize {
        self.n_max().map_or(1, |n| n + 1)
    }

    pub fn dim(&self) -> usize {
        match *self {
            HilbertSpace::Qubit => 2,
            HilbertSpace::Phonon { n_max } => n_max + 1,
            HilbertSpace::Joint { n_max } => 2 * (n_max + 1),
        }
    }

    /// The phonon factor of this space.
    pub fn phonon_factor(&self) -> Option<HilbertSpace> {
        self.n_max().map(|n_max| HilbertSpace::Phonon { n_max })
    }

    /// Smallest cutoff satisfying the truncation guard `|alpha|^2 <= n_max / 4`.
    pub fn minimum_cutoff(alpha_abs: f64) -> usize {
        ((4.0 * alpha_abs * alpha_abs).ceil() as usize).max(1)
    }

    /// Default cutoff: the guard, or `|alpha|^2 + 8|alpha| + 10`, whichever is larger.
    pub fn recommended_cutoff(alpha_abs: f64) -> usize {
        let soft = (alpha_abs * alpha_abs + 8.0 * alpha_abs + 10.0).ceil() as usize;
        soft.max(Self::minimum_cutoff(alpha_abs))
    }

    /// Checks the truncation guard for a coherent amplitude of modulus `alpha_abs`.
    pub fn check_amplitude(&self, alpha_abs: f64) -> Result<()> {
        let n_max = self
            .n_max()
            .ok_or_else(|| Error::SpaceMismatch("qubit space has no phonon mode".into()))?;
        if alpha_abs * alpha_abs > n_max as f64 / 4.0 + 1e-12 {
            return Err(Error::Cutoff {
                n_max,
                alpha_abs,
                required: Self::minimum_cutoff(alpha_abs),
            });
        }
        Ok(())
    }
}
