use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{nnls, scan_minimize};
use crate::special::ln_factorials;

/// Fock populations and Poisson amplitude extracted from a resonant
/// qubit-phonon Rabi trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FockPopulations {
    pub populations: Vec<f64>,
    /// Shared exponential damping rate of the Rabi components.
    pub gamma_d: f64,
    /// Poisson amplitude `|beta|` fitted to the populations.
    pub beta_abs: f64,
    /// Sum of squared residuals of the trace fit.
    pub residual: f64,
    /// Sum of squared residuals of the Poisson fit.
    pub poisson_residual: f64,
    /// Ratio of extreme singular values of the design matrix.
    pub condition_number: f64,
}

/// The qubit starts in `|e>`, so each Fock component `n` oscillates at
/// `2 g0 sqrt(n+1)` and starts from `P_e = 1`.
fn design(times: &[f64], g0: f64, n_fit: usize, gamma: f64) -> DMatrix<f64> {
    DMatrix::from_fn(times.len(), n_fit + 1, |i, n| {
        let t = times[i];
        let w = 2.0 * g0 * ((n + 1) as f64).sqrt();
        0.5 * (1.0 + (-gamma * t).exp() * (w * t).cos())
    })
}

/// Non-negative fit with `sum p <= 1`: when the free solution overshoots,
/// the sum is pinned to one by a heavily weighted extra row.
fn constrained_fit(a: &DMatrix<f64>, y: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let p = nnls(a, y)?;
    let p = if p.sum() > 1.0 {
        let (m, n) = a.shape();
        let w = 1e4 * a.norm().max(1.0);
        let aa = DMatrix::from_fn(m + 1, n, |i, j| if i < m { a[(i, j)] } else { w });
        let yy = DVector::from_fn(m + 1, |i, _| if i < m { y[i] } else { w });
        let q = nnls(&aa, &yy)?;
        let s = q.sum();
        if s > 1.0 {
            q / s
        } else {
            q
        }
    } else {
        p
    };
    let r = (a * &p - y).norm_squared();
    Ok((p, r))
}

fn poisson(beta: f64, len: usize, lnf: &[f64]) -> Vec<f64> {
    let x = beta * beta;
    (0..len)
        .map(|n| {
            if x == 0.0 {
                if n == 0 { 1.0 } else { 0.0 }
            } else {
                (-x + n as f64 * x.ln() - lnf[n]).exp()
            }
        })
        .collect()
}

/// Fits `P_e(t) = sum_n p_n (1 + exp(-gamma_d t) cos(2 g0 sqrt(n+1) t)) / 2`
/// with `p_n >= 0`, `sum p_n <= 1`, then a Poisson distribution to the
/// populations.
pub fn extract_fock_populations(
    times: &[f64],
    p_e: &[f64],
    g0: f64,
    n_fit: usize,
) -> Result<FockPopulations> {
    if times.len() != p_e.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            found: p_e.len(),
        });
    }
    if !(g0 > 0.0) {
        return Err(Error::param("g0", "must be positive"));
    }
    if times.len() < n_fit + 3 {
        return Err(Error::param("trace", "fewer samples than fit parameters"));
    }
    let (t_lo, t_hi) = times
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &t| (l.min(t), h.max(t)));
    let period = std::f64::consts::PI / g0;
    if t_hi - t_lo < 2.0 * period {
        return Err(Error::Fit(format!(
            "trace spans {:.4} but two vacuum-Rabi periods need {:.4}",
            t_hi - t_lo,
            2.0 * period
        )));
    }

    let svd = design(times, g0, n_fit, 0.0).svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition_number = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition_number < 1e10) {
        return Err(Error::Fit(format!(
            "Fock fit ill-conditioned: condition number {condition_number:.3e} for n_fit={n_fit}"
        )));
    }

    let y = DVector::from_column_slice(p_e);
    let cost = |gamma: f64| -> f64 {
        constrained_fit(&design(times, g0, n_fit, gamma), &y)
            .map(|r| r.1)
            .unwrap_or(f64::INFINITY)
    };
    // damping rates are searched up to a few vacuum-Rabi frequencies
    let g_hi = 2.0 * g0;
    let (mut gamma, mut best) = scan_minimize(cost, 0.0, g_hi, 81, 1e-10 * g0);
    let at_zero = cost(0.0);
    if at_zero <= best {
        gamma = 0.0;
        best = at_zero;
    }
    let (p, residual) = constrained_fit(&design(times, g0, n_fit, gamma), &y)?;
    debug_assert!((residual - best).abs() <= 1e-9 * (1.0 + best));
    let populations: Vec<f64> = p.iter().copied().collect();

    let lnf = ln_factorials(n_fit + 1);
    let pcost = |b: f64| -> f64 {
        poisson(b, n_fit + 1, &lnf)
            .iter()
            .zip(&populations)
            .map(|(q, p)| (q - p).powi(2))
            .sum()
    };
    let b_hi = ((n_fit + 1) as f64).sqrt() * 1.5;
    let (beta_abs, poisson_residual) = scan_minimize(pcost, 0.0, b_hi, 301, 1e-12);
    Ok(FockPopulations {
        populations,
        gamma_d: gamma,
        beta_abs,
        residual,
        poisson_residual,
        condition_number,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{excited_population, SystemParams, DEFAULT_G0};
    use crate::hilbert::C64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn trace(alpha: f64) -> (Vec<f64>, Vec<f64>) {
        let params = SystemParams::new(DEFAULT_G0, C64::new(alpha, 0.0))
            .with_qubit(C64::new(0.0, 0.0), C64::new(1.0, 0.0))
            .with_cutoff(30);
        let times: Vec<f64> = (0..400).map(|i| 0.02 * i as f64).collect();
        let pe = excited_population(&params, &times).unwrap();
        (times, pe)
    }

    #[test]
    fn coherent_one_gives_poisson_p1() {
        let (t, pe) = trace(1.0);
        let fit = extract_fock_populations(&t, &pe, DEFAULT_G0, 8).unwrap();
        assert!((fit.populations[1] - (-1.0f64).exp()).abs() < 0.02);
        assert!(fit.residual < 1e-6, "residual {}", fit.residual);
        assert!((fit.beta_abs - 1.0).abs() < 0.02);
    }

    #[test]
    fn vacuum_trace() {
        let (t, pe) = trace(0.0);
        let fit = extract_fock_populations(&t, &pe, DEFAULT_G0, 6).unwrap();
        assert!((fit.populations[0] - 1.0).abs() < 0.01);
        assert!(fit.beta_abs < 0.05);
    }

    #[test]
    fn noisy_round_trip() {
        let (t, pe) = trace(1.3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = Normal::new(0.0, 0.01).unwrap();
        let noisy: Vec<f64> = pe.iter().map(|p| p + n.sample(&mut rng)).collect();
        let fit = extract_fock_populations(&t, &noisy, DEFAULT_G0, 10).unwrap();
        assert!((fit.beta_abs / 1.3 - 1.0).abs() < 0.05, "beta {}", fit.beta_abs);
    }

    #[test]
    fn damping_recovered() {
        let g0 = DEFAULT_G0;
        let times: Vec<f64> = (0..300).map(|i| 0.03 * i as f64).collect();
        let p = [0.5, 0.3, 0.2];
        let pe: Vec<f64> = times
            .iter()
            .map(|&t| {
                p.iter()
                    .enumerate()
                    .map(|(n, pn)| {
                        let w = 2.0 * g0 * ((n + 1) as f64).sqrt();
                        pn * 0.5 * (1.0 + (-0.2 * t).exp() * (w * t).cos())
                    })
                    .sum()
            })
            .collect();
        let fit = extract_fock_populations(&times, &pe, g0, 4).unwrap();
        assert!((fit.gamma_d - 0.2).abs() < 1e-4);
        assert!(fit.residual < 1e-6);
    }

    #[test]
    fn short_trace_rejected() {
        let times: Vec<f64> = (0..50).map(|i| 0.01 * i as f64).collect();
        let pe = vec![1.0; 50];
        assert!(matches!(
            extract_fock_populations(&times, &pe, DEFAULT_G0, 5),
            Err(Error::Fit(_))
        ));
    }
}
