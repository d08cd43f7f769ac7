use serde::{Deserialize, Serialize};

use super::analytical::analytical_fidelity;
use super::css::css_fidelity;
use super::{phonon_rho, AnalyticalFit, CssFit, JcTarget};
use crate::error::{Error, Result};
use crate::hilbert::{JointState, C64};
use crate::optim::{brent_minimize, nelder_mead, NelderMeadOptions};

/// Range of a fit parameter over which the re-optimized fidelity stays
/// within `drop` of its best value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityInterval {
    pub best: f64,
    pub low: f64,
    pub high: f64,
    pub drop: f64,
    /// False when no crossing was found below the best value; `low` is then
    /// the sweep limit.
    pub low_found: bool,
    pub high_found: bool,
}

impl SensitivityInterval {
    pub fn width(&self) -> f64 {
        self.high - self.low
    }

    /// `(high - best) - (best - low)`.
    pub fn asymmetry(&self) -> f64 {
        (self.high - self.best) - (self.best - self.low)
    }
}

/// Walks outward from `best` in steps of `step` until the profile falls
/// below `best_fidelity - drop` or leaves `limits`, then bisects each
/// crossing to `1e-9 * step`.
pub fn profile_interval<F>(
    profile: F,
    best: f64,
    best_fidelity: f64,
    drop: f64,
    step: f64,
    limits: (f64, f64),
) -> SensitivityInterval
where
    F: Fn(f64) -> f64,
{
    let level = best_fidelity - drop;
    let crossing = |dir: f64| -> (f64, bool) {
        if drop <= 0.0 {
            return (best, true);
        }
        let limit = if dir > 0.0 { limits.1 } else { limits.0 };
        let mut inside = best;
        loop {
            let mut x = inside + dir * step;
            let past = if dir > 0.0 { x >= limit } else { x <= limit };
            if past {
                x = limit;
            }
            if profile(x) < level {
                let (mut a, mut b) = (inside, x);
                while (b - a).abs() > 1e-9 * step {
                    let mid = 0.5 * (a + b);
                    if profile(mid) < level {
                        b = mid;
                    } else {
                        a = mid;
                    }
                }
                return (0.5 * (a + b), true);
            }
            if past {
                return (limit, false);
            }
            inside = x;
        }
    };
    let (low, low_found) = crossing(-1.0);
    let (high, high_found) = crossing(1.0);
    SensitivityInterval {
        best,
        low,
        high,
        drop,
        low_found,
        high_found,
    }
}

/// A finished fit whose main parameter is profiled: `alpha_fit` for the
/// analytical target, `D` for the CSS.
#[derive(Debug, Clone, Copy)]
pub enum FitRef<'a> {
    Analytical(&'a AnalyticalFit, &'a JcTarget),
    Css(&'a CssFit),
}

/// Profiles the main parameter of `fit`, re-optimizing the remaining ones
/// at each value, and brackets where the fidelity is `drop` below the best.
pub fn sensitivity_interval(rho: &JointState, fit: FitRef<'_>, drop: f64) -> Result<SensitivityInterval> {
    if !(drop >= 0.0) || drop >= 1.0 {
        return Err(Error::param("drop", "must lie in [0, 1)"));
    }
    let (_, m) = phonon_rho(rho)?;
    match fit {
        FitRef::Analytical(af, target) => {
            let profile = |alpha: f64| {
                let (_, f) = brent_minimize(
                    |th| 1.0 - analytical_fidelity(&m, alpha, th, target),
                    af.theta - 0.5,
                    af.theta + 0.5,
                    1e-9,
                    200,
                );
                1.0 - f
            };
            let best_f = profile(af.alpha_fit).max(af.fidelity);
            let step = 0.02 * af.alpha_fit.max(0.1);
            Ok(profile_interval(
                profile,
                af.alpha_fit,
                best_f,
                drop,
                step,
                (0.0, 3.0 * af.alpha_fit.max(0.5)),
            ))
        }
        FitRef::Css(cf) => {
            let c = (cf.alpha1 + cf.alpha2) / 2.0;
            let dir = (cf.alpha1 - cf.alpha2).arg();
            let x0 = [c.re, c.im, dir, cf.vartheta];
            let opts = NelderMeadOptions {
                max_evals: 1500,
                f_tol: 1e-11,
                x_tol: 1e-8,
            };
            let profile = |d: f64| {
                let r = nelder_mead(
                    |x| {
                        let h = C64::from_polar(d, x[2]);
                        let c = C64::new(x[0], x[1]);
                        1.0 - css_fidelity(&m, c + h, c - h, x[3])
                    },
                    &x0,
                    &[0.05, 0.05, 0.1, 0.1],
                    opts,
                );
                1.0 - r.f
            };
            let best_f = profile(cf.d).max(cf.fidelity);
            Ok(profile_interval(
                profile,
                cf.d,
                best_f,
                drop,
                0.02 * cf.d.max(0.1),
                (0.0, 3.0 * cf.d.max(0.5)),
            ))
        }
    }
}
