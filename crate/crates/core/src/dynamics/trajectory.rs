use serde::Serialize;

use super::{characteristic_times, t_collapse, SystemParams};
use crate::error::{Error, Result};
use crate::hilbert::{partial_trace, purity, HilbertSpace, JointState, Subsystem};
use crate::optim::{least_squares, nelder_mead, NelderMeadOptions};
use crate::output::{csv_table, json_f64};

/// Time series of a simulated evolution. Qubit columns are NaN on
/// phonon-only spaces, where `purity` refers to the phonon state instead.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    #[serde(skip)]
    space: HilbertSpace,
    pub times: Vec<f64>,
    pub p_e: Vec<f64>,
    pub purity: Vec<f64>,
    pub sx: Vec<f64>,
    pub sy: Vec<f64>,
    pub sz: Vec<f64>,
    pub n_mean: Vec<f64>,
    #[serde(skip)]
    keep_states: bool,
    #[serde(skip)]
    states: Vec<JointState>,
}

pub const CSV_COLUMNS: [&str; 7] = ["t", "P_e", "purity", "sx", "sy", "sz", "n_mean"];

impl Trajectory {
    pub(crate) fn recorder(space: HilbertSpace, keep_states: bool) -> Result<Self> {
        if !space.has_phonon() {
            return Err(Error::SpaceMismatch("trajectory needs a phonon mode".into()));
        }
        Ok(Trajectory {
            space,
            times: Vec::new(),
            p_e: Vec::new(),
            purity: Vec::new(),
            sx: Vec::new(),
            sy: Vec::new(),
            sz: Vec::new(),
            n_mean: Vec::new(),
            keep_states,
            states: Vec::new(),
        })
    }

    /// Builds a trajectory from states evaluated at `times`.
    pub fn from_states(times: &[f64], states: Vec<JointState>, keep_states: bool) -> Result<Self> {
        let first = states.first().ok_or(Error::Empty("states"))?;
        if times.len() != states.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                found: states.len(),
            });
        }
        let mut traj = Self::recorder(first.space(), keep_states)?;
        for (t, s) in times.iter().zip(&states) {
            traj.push(*t, s)?;
        }
        Ok(traj)
    }

    pub(crate) fn push(&mut self, t: f64, state: &JointState) -> Result<()> {
        if state.space() != self.space {
            return Err(Error::SpaceMismatch("state does not match trajectory space".into()));
        }
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::param("times", "must be strictly increasing"));
            }
        }
        let pops = state.phonon_populations()?;
        let n_mean = pops.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
        if self.space.has_qubit() {
            let q = partial_trace(state, Subsystem::Qubit)?;
            let r = q.density_matrix();
            self.p_e.push(r[(1, 1)].re);
            self.purity.push(purity(&q));
            self.sx.push(2.0 * r[(0, 1)].re);
            self.sy.push(-2.0 * r[(0, 1)].im);
            self.sz.push(r[(1, 1)].re - r[(0, 0)].re);
        } else {
            self.p_e.push(f64::NAN);
            self.purity.push(purity(state));
            self.sx.push(f64::NAN);
            self.sy.push(f64::NAN);
            self.sz.push(f64::NAN);
        }
        self.n_mean.push(n_mean);
        self.times.push(t);
        if self.keep_states {
            self.states.push(state.clone());
        }
        Ok(())
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Stored states; empty unless the trajectory was built with `keep_states`.
    pub fn states(&self) -> &[JointState] {
        &self.states
    }

    pub fn last_state(&self) -> Option<&JointState> {
        self.states.last()
    }

    pub fn to_csv(&self) -> String {
        csv_table(
            &CSV_COLUMNS,
            (0..self.len()).map(|i| {
                vec![
                    self.times[i],
                    self.p_e[i],
                    self.purity[i],
                    self.sx[i],
                    self.sy[i],
                    self.sz[i],
                    self.n_mean[i],
                ]
            }),
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        let col = |v: &[f64]| serde_json::Value::Array(v.iter().map(|&x| json_f64(x)).collect());
        serde_json::json!({
            "space": self.space,
            "t": col(&self.times),
            "P_e": col(&self.p_e),
            "purity": col(&self.purity),
            "sx": col(&self.sx),
            "sy": col(&self.sy),
            "sz": col(&self.sz),
            "n_mean": col(&self.n_mean),
        })
    }

    fn window(&self, lo: f64, hi: f64) -> Result<std::ops::Range<usize>> {
        let (Some(&t0), Some(&t1)) = (self.times.first(), self.times.last()) else {
            return Err(Error::Empty("trajectory"));
        };
        if t0 > lo || t1 < hi {
            return Err(Error::param(
                "trajectory",
                format!("window [{lo:.4}, {hi:.4}] not covered by [{t0:.4}, {t1:.4}]"),
            ));
        }
        let a = self.times.partition_point(|&t| t < lo);
        let b = self.times.partition_point(|&t| t <= hi);
        Ok(a..b)
    }

    fn require_qubit(&self) -> Result<()> {
        if self.space.has_qubit() {
            Ok(())
        } else {
            Err(Error::SpaceMismatch("P_e needs a qubit".into()))
        }
    }
}

const REVIVAL_WINDOW: (f64, f64) = (0.8, 1.2);

/// Peak-to-trough amplitude of `P_e` inside `[0.8, 1.2] t_R`. For `alpha = 0`
/// there is no revival and the whole trajectory is used.
pub fn revival_contrast(traj: &Trajectory, params: &SystemParams) -> Result<f64> {
    traj.require_qubit()?;
    let range = if params.alpha0.norm() == 0.0 {
        0..traj.len()
    } else {
        let t_r = characteristic_times(params)?.t_r;
        traj.window(REVIVAL_WINDOW.0 * t_r, REVIVAL_WINDOW.1 * t_r)?
    };
    let seg = &traj.p_e[range];
    if seg.is_empty() {
        return Err(Error::Empty("revival window"));
    }
    let max = seg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = seg.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(max - min)
}

/// Revival location: centroid, over `[0.8, 1.2] t_R`, of the local
/// oscillation amplitude (peak-to-trough over one Rabi period) after removing
/// its floor in that window.
pub fn revival_time(traj: &Trajectory, params: &SystemParams) -> Result<f64> {
    traj.require_qubit()?;
    let ct = characteristic_times(params)?;
    let period = std::f64::consts::PI / (params.g0 * params.alpha0.norm());
    let range = traj.window(REVIVAL_WINDOW.0 * ct.t_r, REVIVAL_WINDOW.1 * ct.t_r)?;
    let (t, pe) = (&traj.times, &traj.p_e);
    let amp: Vec<f64> = range
        .clone()
        .map(|i| {
            let lo = t.partition_point(|&x| x < t[i] - period / 2.0);
            let hi = t.partition_point(|&x| x <= t[i] + period / 2.0);
            let seg = &pe[lo..hi];
            seg.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - seg.iter().copied().fold(f64::INFINITY, f64::min)
        })
        .collect();
    let floor = amp.iter().copied().fold(f64::INFINITY, f64::min);
    let (mut num, mut den) = (0.0, 0.0);
    for (k, i) in range.enumerate() {
        let w = amp[k] - floor;
        num += t[i] * w;
        den += w;
    }
    if den <= 0.0 {
        return Err(Error::Fit("no revival structure in window".into()));
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CollapseFit {
    /// Gaussian envelope time: amplitude falls as `exp(-(t/tau)^2)`.
    pub tau: f64,
    pub omega: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub residual: f64,
}

/// Fits `c + exp(-(t/tau)^2) (a cos(w t) + b sin(w t))` to `P_e` over
/// `[0, t_max]` (default three nominal collapse times).
pub fn fit_collapse_envelope(
    traj: &Trajectory,
    params: &SystemParams,
    t_max: Option<f64>,
) -> Result<CollapseFit> {
    traj.require_qubit()?;
    let tc = t_collapse(params.g0);
    let t_max = t_max.unwrap_or(3.0 * tc);
    let range = traj.window(0.0, t_max)?;
    let ts = &traj.times[range.clone()];
    let ys = nalgebra::DVector::from_column_slice(&traj.p_e[range]);
    if ts.len() < 8 {
        return Err(Error::Fit("too few samples in collapse window".into()));
    }
    let solve = |tau: f64, w: f64| {
        let a = nalgebra::DMatrix::from_fn(ts.len(), 3, |i, j| {
            let g = (-(ts[i] / tau).powi(2)).exp();
            match j {
                0 => 1.0,
                1 => g * (w * ts[i]).cos(),
                _ => g * (w * ts[i]).sin(),
            }
        });
        least_squares(&a, &ys)
    };
    let cost = |x: &[f64]| {
        if x[0] <= 0.0 || x[1] <= 0.0 {
            return f64::INFINITY;
        }
        solve(x[0], x[1]).map(|r| r.1).unwrap_or(f64::INFINITY)
    };
    let w0 = 2.0 * params.g0 * params.alpha0.norm().max(0.5);
    let m = nelder_mead(
        cost,
        &[tc, w0],
        &[0.2 * tc, 0.05 * w0],
        NelderMeadOptions {
            max_evals: 4000,
            f_tol: 1e-16,
            x_tol: 1e-10,
        },
    );
    let (coef, residual) = solve(m.x[0], m.x[1])?;
    Ok(CollapseFit {
        tau: m.x[0],
        omega: m.x[1],
        amplitude: coef[1].hypot(coef[2]),
        offset: coef[0],
        residual,
    })
}
