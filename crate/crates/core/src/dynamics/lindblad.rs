use serde::{Deserialize, Serialize};

use super::{SystemParams, Trajectory};
use crate::error::{Error, Result};
use crate::hilbert::{hermitize, CMatrix, HilbertSpace, JointState, OperatorSet, SparseOp, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LindbladOptions {
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    /// Keep full density matrices in the trajectory (observables are always kept).
    #[serde(default)]
    pub keep_states: bool,
}

fn default_atol() -> f64 {
    1e-10
}
fn default_rtol() -> f64 {
    1e-8
}
fn default_max_steps() -> usize {
    2_000_000
}

impl Default for LindbladOptions {
    fn default() -> Self {
        LindbladOptions {
            atol: default_atol(),
            rtol: default_rtol(),
            max_steps: default_max_steps(),
            keep_states: false,
        }
    }
}

/// Generator `L rho = -i (H_eff rho - rho H_eff^dag) + sum_k C_k rho C_k^dag`
/// with `H_eff = H - (i/2) sum_k C_k^dag C_k`.
struct Generator {
    h_eff: SparseOp,
    jumps: Vec<SparseOp>,
}

impl Generator {
    fn new(space: HilbertSpace, params: &SystemParams, hamiltonian_on: bool) -> Result<Self> {
        let ops = OperatorSet::new(space)?;
        let dim = space.dim();
        let mut h = CMatrix::zeros(dim, dim);
        let mut jumps = Vec::new();
        if params.kappa_phonon > 0.0 {
            jumps.push(&ops.a * C64::new(params.kappa_phonon.sqrt(), 0.0));
        }
        if let Some(q) = &ops.qubit {
            if hamiltonian_on {
                h = (&q.sigma_plus * &ops.a + &q.sigma_minus * &ops.a_dag)
                    * C64::new(params.g0, 0.0);
            }
            if params.gamma_qubit > 0.0 {
                jumps.push(&q.sigma_minus * C64::new(params.gamma_qubit.sqrt(), 0.0));
            }
            if params.gamma_phi > 0.0 {
                jumps.push(&q.sigma_z * C64::new((params.gamma_phi / 2.0).sqrt(), 0.0));
            }
        }
        let mut h_eff = h;
        for l in &jumps {
            h_eff -= l.adjoint() * l * C64::new(0.0, 0.5);
        }
        Ok(Generator {
            h_eff: SparseOp::from_dense(&h_eff),
            jumps: jumps.iter().map(SparseOp::from_dense).collect(),
        })
    }

    fn apply(&self, rho: &CMatrix, out: &mut CMatrix) {
        out.fill(C64::new(0.0, 0.0));
        self.h_eff.left_mul_acc(rho, C64::new(0.0, -1.0), out);
        self.h_eff.right_mul_adjoint_acc(rho, C64::new(0.0, 1.0), out);
        let one = C64::new(1.0, 0.0);
        for l in &self.jumps {
            l.sandwich_acc(rho, one, out);
        }
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn axpy(y: &mut CMatrix, a: f64, x: &CMatrix) {
    for (yi, xi) in y.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *yi += xi * a;
    }
}

struct Stepper<'a> {
    gen: &'a Generator,
    k: Vec<CMatrix>,
    tmp: CMatrix,
    atol: f64,
    rtol: f64,
}

impl Stepper<'_> {
    /// Attempts a step of size `h`. Returns the candidate and its scaled error norm.
    /// `k[0]` must hold the derivative at `rho`; on return `k[6]` holds the
    /// derivative at the candidate (first-same-as-last).
    fn attempt(&mut self, rho: &CMatrix, h: f64) -> (CMatrix, f64) {
        for s in 1..7 {
            self.tmp.copy_from(rho);
            for (j, &a) in A[s].iter().enumerate().take(s) {
                if a != 0.0 {
                    axpy(&mut self.tmp, h * a, &self.k[j]);
                }
            }
            self.gen.apply(&self.tmp, &mut self.k[s]);
        }
        let mut next = rho.clone();
        let mut err = CMatrix::zeros(rho.nrows(), rho.ncols());
        for s in 0..7 {
            if B5[s] != 0.0 {
                axpy(&mut next, h * B5[s], &self.k[s]);
            }
            let e = B5[s] - B4[s];
            if e != 0.0 {
                axpy(&mut err, h * e, &self.k[s]);
            }
        }
        let mut norm: f64 = 0.0;
        for ((e, y0), y1) in err.iter().zip(rho.iter()).zip(next.iter()) {
            let sc = self.atol + self.rtol * y0.norm().max(y1.norm());
            norm = norm.max(e.norm() / sc);
        }
        (next, norm)
    }
}

/// Integrates the master equation and records observables at `times`.
///
/// Collapse channels: `sqrt(kappa) a`, and on joint spaces `sqrt(gamma) sigma_-`
/// and `sqrt(gamma_phi / 2) sigma_z`. With `hamiltonian_on = false` only the
/// dissipators act.
pub fn lindblad_evolve(
    initial: &JointState,
    params: &SystemParams,
    hamiltonian_on: bool,
    times: &[f64],
    opts: &LindbladOptions,
) -> Result<Trajectory> {
    if times.is_empty() {
        return Err(Error::Empty("times"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) || times[0] < 0.0 {
        return Err(Error::param("times", "must be non-negative and strictly increasing"));
    }
    let space = initial.space();
    if space == HilbertSpace::Qubit {
        return Err(Error::SpaceMismatch("master equation needs a phonon mode".into()));
    }
    let gen = Generator::new(space, params, hamiltonian_on)?;
    let dim = space.dim();
    let mut stepper = Stepper {
        gen: &gen,
        k: vec![CMatrix::zeros(dim, dim); 7],
        tmp: CMatrix::zeros(dim, dim),
        atol: opts.atol,
        rtol: opts.rtol,
    };

    let mut traj = Trajectory::recorder(space, opts.keep_states)?;
    let mut rho = initial.density_matrix();
    let mut t = 0.0;
    let mut h = 1e-3;
    let mut steps = 0usize;
    gen.apply(&rho, &mut stepper.k[0]);

    for &target in times {
        while t < target {
            if steps >= opts.max_steps {
                return Err(Error::Integration {
                    t,
                    reason: format!("exceeded {} steps", opts.max_steps),
                });
            }
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            let (next, err) = stepper.attempt(&rho, step);
            steps += 1;
            if !err.is_finite() {
                return Err(Error::Integration {
                    t,
                    reason: "non-finite error estimate".into(),
                });
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = if last { target } else { t + step };
                rho = hermitize(&next);
                gen.apply(&rho, &mut stepper.k[0]);
                if !last {
                    h = step * factor;
                } else {
                    h = h.max(step * factor);
                }
            } else {
                h = step * factor.min(1.0);
                if h < 1e-14 * target.max(1.0) {
                    return Err(Error::Integration {
                        t,
                        reason: format!("step size underflow (error norm {err:e})"),
                    });
                }
            }
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-8 {
            return Err(Error::Integration {
                t,
                reason: format!("trace drifted to {}", tr.re),
            });
        }
        let state = JointState::from_integrator(space, rho.clone());
        traj.push(t, &state)?;
    }
    Ok(traj)
}
