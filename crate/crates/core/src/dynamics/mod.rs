//! Resonant Jaynes-Cummings dynamics: exact series, closed-form envelope,
//! characteristic times, and open-system integration.

mod lindblad;
mod trajectory;

pub use lindblad::{lindblad_evolve, LindbladOptions};
pub use trajectory::{
    fit_collapse_envelope, revival_contrast, revival_time, CollapseFit, Trajectory,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    coherent_amplitudes, tensor, CVector, HilbertSpace, JointState, C64,
};

/// Coupling inferred from a 0.9 us collapse time, `sqrt(2) / 0.9` rad/us.
pub const DEFAULT_G0: f64 = std::f64::consts::SQRT_2 / 0.9;

/// Physical parameters. Times in microseconds, rates in 1/us.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    #[serde(default = "default_g0")]
    pub g0: f64,
    pub alpha0: C64,
    #[serde(default = "one")]
    pub c_g: C64,
    #[serde(default)]
    pub c_e: C64,
    #[serde(default)]
    pub kappa_phonon: f64,
    #[serde(default)]
    pub gamma_qubit: f64,
    #[serde(default)]
    pub gamma_phi: f64,
    /// Fock cutoff; defaults to the recommended cutoff for `alpha0`.
    #[serde(default)]
    pub n_max: Option<usize>,
}

fn default_g0() -> f64 {
    DEFAULT_G0
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

impl SystemParams {
    /// Closed system, qubit in `|g>`.
    pub fn new(g0: f64, alpha0: C64) -> Self {
        SystemParams {
            g0,
            alpha0,
            c_g: one(),
            c_e: C64::new(0.0, 0.0),
            kappa_phonon: 0.0,
            gamma_qubit: 0.0,
            gamma_phi: 0.0,
            n_max: None,
        }
    }

    pub fn with_qubit(mut self, c_g: C64, c_e: C64) -> Self {
        self.c_g = c_g;
        self.c_e = c_e;
        self
    }

    pub fn with_rates(mut self, kappa_phonon: f64, gamma_qubit: f64, gamma_phi: f64) -> Self {
        self.kappa_phonon = kappa_phonon;
        self.gamma_qubit = gamma_qubit;
        self.gamma_phi = gamma_phi;
        self
    }

    pub fn with_cutoff(mut self, n_max: usize) -> Self {
        self.n_max = Some(n_max);
        self
    }

    pub fn cutoff(&self) -> usize {
        self.n_max
            .unwrap_or_else(|| HilbertSpace::recommended_cutoff(self.alpha0.norm()))
    }

    pub fn joint_space(&self) -> Result<HilbertSpace> {
        HilbertSpace::joint(self.cutoff())
    }

    pub fn phonon_space(&self) -> Result<HilbertSpace> {
        HilbertSpace::phonon(self.cutoff())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g0 > 0.0 && self.g0.is_finite()) {
            return Err(Error::param("g0", "must be positive and finite"));
        }
        for (name, v) in [
            ("kappa_phonon", self.kappa_phonon),
            ("gamma_qubit", self.gamma_qubit),
            ("gamma_phi", self.gamma_phi),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, "rate must be non-negative"));
            }
        }
        let norm = self.c_g.norm_sqr() + self.c_e.norm_sqr();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::param("c_g/c_e", format!("|c_g|^2+|c_e|^2 = {norm}")));
        }
        if !self.alpha0.re.is_finite() || !self.alpha0.im.is_finite() {
            return Err(Error::param("alpha0", "must be finite"));
        }
        self.phonon_space()?.check_amplitude(self.alpha0.norm())
    }

    /// `(c_g|g> + c_e|e>) ⊗ |alpha0>`.
    pub fn initial_state(&self) -> Result<JointState> {
        self.validate()?;
        let q = JointState::qubit(self.c_g, self.c_e)?;
        let p = crate::hilbert::coherent_state(self.alpha0, self.phonon_space()?)?;
        tensor(&q, &p)
    }

    fn amplitudes(&self) -> Result<Vec<C64>> {
        self.validate()?;
        Ok(coherent_amplitudes(self.alpha0, self.cutoff())?.amplitudes)
    }
}

/// Closed-system state at time `t` from the exact Fock-basis solution.
///
/// The top level `|e, n_max>` has no partner inside the truncated space and
/// stays frozen, so the result is exactly unitary evolution under the
/// truncated Hamiltonian.
pub fn jc_evolve_exact(params: &SystemParams, t: f64) -> Result<JointState> {
    let c = params.amplitudes()?;
    let n_max = c.len() - 1;
    let space = HilbertSpace::joint(n_max)?;
    let d = n_max + 1;
    let (cg, ce) = (params.c_g, params.c_e);
    let mi = C64::new(0.0, -1.0);
    let mut psi = CVector::zeros(2 * d);
    for n in 0..d {
        let th_g = params.g0 * (n as f64).sqrt() * t;
        let prev = if n > 0 { c[n - 1] } else { C64::new(0.0, 0.0) };
        psi[n] = c[n] * cg * th_g.cos() + mi * prev * ce * th_g.sin();
        if n < n_max {
            let th_e = params.g0 * ((n + 1) as f64).sqrt() * t;
            psi[d + n] = c[n] * ce * th_e.cos() + mi * c[n + 1] * cg * th_e.sin();
        } else {
            psi[d + n] = c[n] * ce;
        }
    }
    JointState::pure(space, psi)
}

/// Excited-state probability from the exact series.
pub fn excited_population(params: &SystemParams, times: &[f64]) -> Result<Vec<f64>> {
    let c = params.amplitudes()?;
    let n_max = c.len() - 1;
    let (cg, ce) = (params.c_g, params.c_e);
    let mi = C64::new(0.0, -1.0);
    let freqs: Vec<f64> = (0..n_max)
        .map(|n| params.g0 * ((n + 1) as f64).sqrt())
        .collect();
    Ok(times
        .iter()
        .map(|&t| {
            let mut p = (c[n_max] * ce).norm_sqr();
            for n in 0..n_max {
                let th = freqs[n] * t;
                p += (c[n] * ce * th.cos() + mi * c[n + 1] * cg * th.sin()).norm_sqr();
            }
            p.clamp(0.0, 1.0)
        })
        .collect())
}

/// Closed-form large-amplitude approximation of the excited population.
#[derive(Debug, Clone)]
pub struct Envelope {
    pub values: Vec<f64>,
    /// Set when `|alpha| < 3`, where the approximation is unreliable.
    pub low_amplitude: bool,
}

/// Gaussian-damped oscillation valid for `|alpha| >> 1` and `t << |alpha|/g0`.
/// Has no revival by construction.
pub fn excited_population_envelope(params: &SystemParams, times: &[f64]) -> Envelope {
    let a = params.alpha0.norm();
    let g = params.g0;
    let pop = params.c_e.norm_sqr() - params.c_g.norm_sqr();
    let coh = 2.0 * (params.c_g * params.c_e.conj()).im;
    let values = times
        .iter()
        .map(|&t| {
            let damp = (-(g * t).powi(2) / 2.0).exp();
            let w = 2.0 * g * a * t;
            0.5 * (1.0 + damp * (pop * w.cos() + coh * w.sin()))
        })
        .collect();
    Envelope {
        values,
        low_amplitude: a < 3.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicTimes {
    pub t_collapse: f64,
    pub t_r: f64,
    pub t_c: f64,
}

pub fn t_collapse(g0: f64) -> f64 {
    std::f64::consts::SQRT_2 / g0
}

/// Collapse, revival and cat times.
pub fn characteristic_times(params: &SystemParams) -> Result<CharacteristicTimes> {
    if !(params.g0 > 0.0) {
        return Err(Error::param("g0", "must be positive"));
    }
    let a = params.alpha0.norm();
    if a == 0.0 {
        return Err(Error::Undefined("revival time needs |alpha| > 0".into()));
    }
    let t_r = 2.0 * std::f64::consts::PI * a / params.g0;
    Ok(CharacteristicTimes {
        t_collapse: t_collapse(params.g0),
        t_r,
        t_c: t_r / 2.0,
    })
}

/// Counter-rotating phonon components `sum_n c_n e^{-/+ i g0 t sqrt(n)} |n>`,
/// returned as `(Phi_+, Phi_-)`.
pub fn phi_states(params: &SystemParams, t: f64) -> Result<(JointState, JointState)> {
    let c = params.amplitudes()?;
    let space = params.phonon_space()?;
    let build = |sign: f64| {
        let v = CVector::from_fn(c.len(), |n, _| {
            c[n] * C64::from_polar(1.0, -sign * params.g0 * t * (n as f64).sqrt())
        });
        JointState::pure_normalized(space, v)
    };
    Ok((build(1.0)?, build(-1.0)?))
}
