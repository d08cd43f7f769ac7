//! Acoustic-mode model of the bulk resonator: Laguerre-Gaussian transverse
//! profile, strain per phonon, effective mass and lattice delocalization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::C64;
use crate::special::{laguerre, ln_factorials};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const SAPPHIRE_DENSITY: f64 = 3980.0;
/// Stiffness inferred so that the reference geometry reproduces the quoted
/// delocalization (about 5.9 GHz mode frequency); not a measured constant.
pub const INFERRED_C33: f64 = 4.05e11;

const UM: f64 = 1e-6;

/// Geometry and material of one longitudinal mode. Lengths in micrometres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcousticMode {
    pub w0_um: f64,
    pub length_um: f64,
    pub lambda_um: f64,
    #[serde(default)]
    pub p: u32,
    #[serde(default)]
    pub l: i32,
    #[serde(default = "default_c33")]
    pub c33: f64,
    #[serde(default = "default_density")]
    pub density: f64,
}

fn default_c33() -> f64 {
    INFERRED_C33
}
fn default_density() -> f64 {
    SAPPHIRE_DENSITY
}

impl Default for AcousticMode {
    /// 27 um waist, 435 um long, 1.7 um wavelength, sapphire.
    fn default() -> Self {
        AcousticMode {
            w0_um: 27.0,
            length_um: 435.0,
            lambda_um: 1.7,
            p: 0,
            l: 0,
            c33: INFERRED_C33,
            density: SAPPHIRE_DENSITY,
        }
    }
}

impl AcousticMode {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("w0_um", self.w0_um),
            ("length_um", self.length_um),
            ("lambda_um", self.lambda_um),
            ("c33", self.c33),
            ("density", self.density),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be positive"));
            }
        }
        if self.longitudinal_index() < 1 {
            return Err(Error::param("lambda_um", "longer than twice the mode length"));
        }
        Ok(())
    }

    /// Nearest integer `m` with `lambda = 2 L / m`.
    pub fn longitudinal_index(&self) -> u64 {
        (2.0 * self.length_um / self.lambda_um).round() as u64
    }

    pub fn rayleigh_length_um(&self) -> f64 {
        std::f64::consts::PI * self.w0_um * self.w0_um / self.lambda_um
    }

    pub fn sound_speed(&self) -> f64 {
        (self.c33 / self.density).sqrt()
    }

    /// `omega_p = 2 pi c / lambda` in rad/s.
    pub fn omega_p(&self) -> f64 {
        std::f64::consts::TAU * self.sound_speed() / (self.lambda_um * UM)
    }

    /// Cylinder mass `rho pi w0^2 L` in kg.
    pub fn m0_kg(&self) -> f64 {
        self.density * std::f64::consts::PI * (self.w0_um * UM).powi(2) * self.length_um * UM
    }

    /// Strain per phonon `sqrt(4 hbar omega_p / (L w0^2 c33))`.
    pub fn strain_per_phonon(&self) -> f64 {
        (4.0 * HBAR * self.omega_p() / (self.length_um * UM * (self.w0_um * UM).powi(2) * self.c33)).sqrt()
    }

    /// Mass of a half-wavelength slab of radius `2 w0`, in kg. Order of
    /// magnitude only: the cross-section is a convention.
    pub fn half_wavelength_mass_kg(&self) -> f64 {
        self.density * std::f64::consts::PI * (2.0 * self.w0_um * UM).powi(2) * 0.5 * self.lambda_um * UM
    }
}

/// Dimensionless transverse profile `LG_pl(r, phi)`, normalized so that
/// `int |LG|^2 r dr dphi = w0^2`.
pub fn lg_profile(mode: &AcousticMode, r_um: f64, phi: f64) -> C64 {
    let p = mode.p as usize;
    let la = mode.l.unsigned_abs() as usize;
    let lnf = ln_factorials(p + la + 1);
    let norm = (2.0 / std::f64::consts::PI * (lnf[p] - lnf[p + la]).exp()).sqrt();
    let u = r_um / mode.w0_um;
    let radial = norm
        * (u * std::f64::consts::SQRT_2).powi(la as i32)
        * (-u * u).exp()
        * laguerre(p, la as f64, 2.0 * u * u);
    C64::from_polar(radial, -(mode.l as f64) * phi)
}

/// `int_0^R int_0^{2pi} |LG|^2 r dphi dr` (um^2) by composite Simpson.
pub fn lg_power_within(mode: &AcousticMode, radius_um: f64) -> f64 {
    let n = 4000;
    let h = radius_um / n as f64;
    let f = |r: f64| lg_profile(mode, r, 0.0).norm_sqr() * r;
    let mut s = f(0.0) + f(radius_um);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(h * i as f64);
    }
    std::f64::consts::TAU * s * h / 3.0
}

/// RMS of the transverse profile over a disk of radius `2 w0`.
pub fn transverse_rms(mode: &AcousticMode) -> f64 {
    let r = 2.0 * mode.w0_um;
    (lg_power_within(mode, r) / (std::f64::consts::PI * r * r)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MassConvention {
    /// Peak displacement of the `l = 0` profile.
    Max,
    /// Root mean square over the `2 w0` disk and the longitudinal cosine.
    Rms,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassModel {
    pub convention: MassConvention,
    /// Strain per phonon (dimensionless).
    pub s0: f64,
    pub m0_ug: f64,
    pub m_eff_ug: f64,
    /// Zero-point fluctuation in metres.
    pub x_zpf_m: f64,
    pub omega_p: f64,
    /// Displacement per unit strain in units of `L / (m pi)`.
    pub profile_factor: f64,
}

/// Effective mass from equating `M_eff omega^2 x_eff^2 / 2` with the strain
/// energy, `x_eff = (L / m pi) f S`, giving `M_eff = M0 / (2 pi f^2)`.
pub fn mass_model(mode: &AcousticMode, convention: MassConvention) -> Result<MassModel> {
    mode.validate()?;
    let f = match convention {
        MassConvention::Max => (2.0 / std::f64::consts::PI).sqrt(),
        MassConvention::Rms => transverse_rms(mode) / std::f64::consts::SQRT_2,
    };
    let m0 = mode.m0_kg();
    let m_eff = m0 / (std::f64::consts::TAU * f * f);
    let omega = mode.omega_p();
    Ok(MassModel {
        convention,
        s0: mode.strain_per_phonon(),
        m0_ug: m0 * 1e9,
        m_eff_ug: m_eff * 1e9,
        x_zpf_m: (HBAR / (2.0 * m_eff * omega)).sqrt(),
        omega_p: omega,
        profile_factor: f,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Delocalization {
    pub alpha: f64,
    pub x_eff_m: f64,
    pub separation_m: f64,
}

/// `x_eff(alpha) = sqrt(2 (1 + 2 alpha^2)) x_zpf`, from
/// `U = hbar omega (alpha^2 + 1/2)`; the separation is `2 x_eff`.
pub fn delocalization(model: &MassModel, alpha: f64) -> Result<Delocalization> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::param("alpha", "must be non-negative"));
    }
    let x = (2.0 * (1.0 + 2.0 * alpha * alpha)).sqrt() * model.x_zpf_m;
    Ok(Delocalization {
        alpha,
        x_eff_m: x,
        separation_m: 2.0 * x,
    })
}
