use serde::{Deserialize, Serialize};

use super::readout::WignerSampleSet;
use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, HilbertSpace, JointState, C64};
use crate::output::json_f64;
use crate::special::displacement_matrix;

/// Displaced parity `D(beta) Pi D^dag(beta) = D(2 beta) Pi`, truncated to
/// `dim` levels. Hermitian with spectrum inside `[-1, 1]`.
pub fn displaced_parity(beta: C64, dim: usize) -> CMatrix {
    let mut m = displacement_matrix(beta * 2.0, dim);
    for n in (1..dim).step_by(2) {
        m.column_mut(n).neg_mut();
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MleOptions {
    #[serde(default = "default_iters")]
    pub max_iters: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_dilution")]
    pub dilution: f64,
}

fn default_iters() -> usize {
    20_000
}
fn default_tol() -> f64 {
    1e-10
}
fn default_dilution() -> f64 {
    0.5
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions {
            max_iters: default_iters(),
            tol: default_tol(),
            dilution: default_dilution(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MleResult {
    pub state: JointState,
    /// Log-likelihood after each accepted iteration, starting with the
    /// maximally mixed seed.
    pub log_likelihood: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl MleResult {
    pub fn to_json(&self) -> serde_json::Value {
        let rho = self.state.density_matrix();
        let d = rho.nrows();
        let rows: Vec<serde_json::Value> = (0..d)
            .map(|i| {
                serde_json::Value::Array(
                    (0..d)
                        .map(|j| serde_json::json!([json_f64(rho[(i, j)].re), json_f64(rho[(i, j)].im)]))
                        .collect(),
                )
            })
            .collect();
        serde_json::json!({
            "dim": d,
            "density_matrix": rows,
            "iterations": self.iterations,
            "converged": self.converged,
            "log_likelihood": json_f64(self.log_likelihood.last().copied().unwrap_or(f64::NAN)),
            "purity": json_f64(crate::hilbert::purity(&self.state)),
        })
    }
}

const P_FLOOR: f64 = 1e-300;

struct Problem {
    ops: Vec<CMatrix>,
    f_plus: Vec<f64>,
    shots: f64,
    amp: f64,
    off: f64,
}

impl Problem {
    /// Outcome probabilities for each point: `p+ = (1 + c + A <Pi_beta>) / 2`.
    fn probabilities(&self, rho: &CMatrix) -> Vec<(f64, f64)> {
        self.ops
            .iter()
            .map(|op| {
                let m = op.dotc(rho).re;
                let pp = 0.5 * (1.0 + self.off + self.amp * m);
                let pm = 0.5 * (1.0 - self.off - self.amp * m);
                (pp.max(P_FLOOR), pm.max(P_FLOOR))
            })
            .collect()
    }

    fn log_likelihood(&self, probs: &[(f64, f64)]) -> f64 {
        self.f_plus
            .iter()
            .zip(probs)
            .map(|(&fp, &(pp, pm))| {
                let fm = 1.0 - fp;
                let mut s = 0.0;
                if fp > 0.0 {
                    s += fp * pp.ln();
                }
                if fm > 0.0 {
                    s += fm * pm.ln();
                }
                s
            })
            .sum::<f64>()
            * self.shots
    }

    /// `R = (1/M) sum_i (f+/p+ E+ + f-/p- E-)`, equal to the identity at a
    /// stationary point.
    fn r_operator(&self, probs: &[(f64, f64)], dim: usize) -> CMatrix {
        let m = self.ops.len() as f64;
        let mut r = CMatrix::zeros(dim, dim);
        let mut s = 0.0;
        for ((op, &fp), &(pp, pm)) in self.ops.iter().zip(&self.f_plus).zip(probs) {
            let (qp, qm) = (fp / pp, (1.0 - fp) / pm);
            s += 0.5 * ((1.0 + self.off) * qp + (1.0 - self.off) * qm);
            let w = 0.5 * self.amp * (qp - qm) / m;
            r.zip_apply(op, |a, b| *a += b * w);
        }
        for i in 0..dim {
            r[(i, i)] += s / m;
        }
        r
    }
}

/// Iterative maximum-likelihood reconstruction from displaced-parity
/// samples, with diluted `R rho R` updates. The dilution is halved whenever
/// a step would lower the likelihood, so the recorded history never
/// decreases, and doubled after each accepted step up to `1e4` times its
/// starting value.
pub fn mle_reconstruct(
    samples: &WignerSampleSet,
    space: HilbertSpace,
    opts: &MleOptions,
) -> Result<MleResult> {
    samples.validate()?;
    let dim = match space {
        HilbertSpace::Phonon { n_max } => n_max + 1,
        other => {
            return Err(Error::SpaceMismatch(format!(
                "reconstruction runs on a phonon space, got {other:?}"
            )))
        }
    };
    if !(opts.dilution > 0.0) || !(opts.tol >= 0.0) || opts.max_iters == 0 {
        return Err(Error::param("mle options", "need dilution > 0, tol >= 0, max_iters >= 1"));
    }
    let norm = samples.normalization;
    let problem = Problem {
        ops: samples.betas.iter().map(|&b| displaced_parity(b, dim)).collect(),
        f_plus: samples.raw.iter().map(|r| (0.5 * (1.0 + r)).clamp(0.0, 1.0)).collect(),
        shots: samples.shots_per_point as f64,
        amp: norm.amplitude,
        off: norm.offset,
    };

    let mut rho = CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0);
    let mut probs = problem.probabilities(&rho);
    let mut ll = problem.log_likelihood(&probs);
    let mut history = vec![ll];
    let mut eps = opts.dilution;
    let mut converged = false;
    let mut iterations = 0;
    let eye = CMatrix::identity(dim, dim);

    while iterations < opts.max_iters {
        iterations += 1;
        let r = problem.r_operator(&probs, dim);
        let mut accepted = None;
        while eps > 1e-12 {
            let k = &eye + &r * C64::new(eps, 0.0);
            let mut next = &k * &rho * &k;
            let tr = next.trace().re;
            next /= C64::new(tr, 0.0);
            let next = crate::hilbert::hermitize(&next);
            let p_next = problem.probabilities(&next);
            let ll_next = problem.log_likelihood(&p_next);
            if ll_next >= ll {
                accepted = Some((next, p_next, ll_next));
                break;
            }
            eps *= 0.5;
        }
        let Some((next, p_next, ll_next)) = accepted else {
            converged = true;
            break;
        };
        let gain = ll_next - ll;
        eps = (eps * 2.0).min(opts.dilution * 1e4);
        rho = next;
        probs = p_next;
        ll = ll_next;
        history.push(ll);
        if gain <= opts.tol * ll.abs() {
            converged = true;
            break;
        }
    }
    let state = JointState::mixed_hermitized(space, &rho)?;
    Ok(MleResult {
        state,
        log_likelihood: history,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{coherent_state, fidelity, purity};
    use crate::tomography::{sample_wigner, ParityNormalization, ReadoutModel};

    fn grid(n: usize, half: f64) -> Vec<C64> {
        let h = 2.0 * half / (n - 1) as f64;
        let mut v = Vec::new();
        for i in 0..n {
            for j in 0..n {
                v.push(C64::new(-half + h * j as f64, -half + h * i as f64));
            }
        }
        v
    }

    #[test]
    fn displaced_parity_is_hermitian_and_bounded() {
        let p = displaced_parity(C64::new(0.4, -0.7), 12);
        assert!((&p - p.adjoint()).camax() < 1e-13);
        let ev = p.clone().symmetric_eigen().eigenvalues;
        assert!(ev.iter().all(|e| e.abs() <= 1.0 + 1e-12));
    }

    #[test]
    fn vacuum_reconstruction_is_pure() {
        let space = HilbertSpace::phonon(16).unwrap();
        let truth = JointState::fock(space, 0).unwrap();
        let s = sample_wigner(
            &truth,
            &grid(9, 1.2),
            &ReadoutModel::ideal(1_000_000, 3),
            &ParityNormalization::identity(),
        )
        .unwrap();
        // at 1e4 shots the likelihood maximum itself sits near purity 0.99
        let opts = MleOptions {
            max_iters: 20_000,
            tol: 0.0,
            ..MleOptions::default()
        };
        let out = mle_reconstruct(&s, HilbertSpace::phonon(3).unwrap(), &opts).unwrap();
        assert!(purity(&out.state) > 0.999, "purity {}", purity(&out.state));
        assert!(out.log_likelihood.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn coherent_round_trip() {
        let space = HilbertSpace::phonon(24).unwrap();
        let truth = coherent_state(C64::new(0.8, 0.3), space).unwrap();
        let s = sample_wigner(
            &truth,
            &grid(9, 1.6),
            &ReadoutModel::ideal(10_000, 9),
            &ParityNormalization::identity(),
        )
        .unwrap();
        let out = mle_reconstruct(&s, HilbertSpace::phonon(10).unwrap(), &MleOptions::default()).unwrap();
        let t10 = coherent_state(C64::new(0.8, 0.3), HilbertSpace::phonon(10).unwrap()).unwrap();
        let f = fidelity(&out.state, &t10).unwrap();
        assert!(f > 0.99, "fidelity {f}");
        let rho = out.state.density_matrix();
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        let ev = rho.symmetric_eigen().eigenvalues;
        assert!(ev.iter().all(|&e| e > -1e-9));
    }

    #[test]
    fn infidelity_falls_with_shots() {
        let alpha = C64::new(0.8, 0.3);
        let truth = coherent_state(alpha, HilbertSpace::phonon(24).unwrap()).unwrap();
        let recon = HilbertSpace::phonon(8).unwrap();
        let target = coherent_state(alpha, recon).unwrap();
        let betas = grid(7, 1.6);
        let infidelity = |shots: u64| -> f64 {
            // average a few seeds so one lucky draw cannot flip the ordering
            (0..3)
                .map(|seed| {
                    let s = sample_wigner(
                        &truth,
                        &betas,
                        &ReadoutModel::ideal(shots, 100 + seed),
                        &ParityNormalization::identity(),
                    )
                    .unwrap();
                    let out = mle_reconstruct(&s, recon, &MleOptions::default()).unwrap();
                    1.0 - fidelity(&out.state, &target).unwrap()
                })
                .sum::<f64>()
                / 3.0
        };
        let errs: Vec<f64> = [100, 1_000, 10_000].iter().map(|&n| infidelity(n)).collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "1 - F = {errs:?}");
    }

    #[test]
    fn wrong_space_rejected() {
        let space = HilbertSpace::phonon(4).unwrap();
        let truth = JointState::fock(space, 0).unwrap();
        let s = sample_wigner(
            &truth,
            &[C64::new(0.0, 0.0)],
            &ReadoutModel::ideal(10, 0),
            &ParityNormalization::identity(),
        )
        .unwrap();
        assert!(mle_reconstruct(&s, HilbertSpace::joint(4).unwrap(), &MleOptions::default()).is_err());
    }
}
