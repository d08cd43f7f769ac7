//! Special functions: log-factorials, generalized Laguerre polynomials and
//! Fock-basis matrix elements of the displacement operator.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// `ln(n!)` for `n = 0..len`.
pub fn ln_factorials(len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut acc = 0.0;
    for n in 0..len {
        if n > 1 {
            acc += (n as f64).ln();
        }
        out.push(acc);
    }
    out
}

/// Generalized Laguerre polynomials `L_n^(k)(x)` for `n = 0..=n_max`, via the
/// three-term forward recurrence.
pub fn laguerre_series(k: f64, x: f64, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    if n_max == 0 {
        return out;
    }
    out.push(1.0 + k - x);
    for j in 1..n_max {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + k - x) * out[j] - (jf + k) * out[j - 1]) / (jf + 1.0);
        out.push(next);
    }
    out
}

/// Single generalized Laguerre polynomial `L_n^(k)(x)`.
pub fn laguerre(n: usize, k: f64, x: f64) -> f64 {
    laguerre_series(k, x, n)[n]
}

/// Matrix elements `<m|D(gamma)|n>` of the displacement operator of the
/// infinite-dimensional oscillator, restricted to `m, n < dim`.
///
/// The elements are exact (not the exponential of a truncated generator):
/// for `m >= n`,
/// `<m|D|n> = sqrt(n!/m!) gamma^(m-n) e^(-|gamma|^2/2) L_n^(m-n)(|gamma|^2)`,
/// and `<n|D|m> = (-1)^(m-n) conj(<m|D|n>)`.
pub fn displacement_matrix(gamma: Complex64, dim: usize) -> DMatrix<Complex64> {
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    let r = gamma.norm();
    if r == 0.0 {
        out.fill_with_identity();
        return out;
    }
    let x = r * r;
    let phase = gamma.arg();
    let lnr = r.ln();
    let lnf = ln_factorials(dim);
    for k in 0..dim {
        let lag = laguerre_series(k as f64, x, dim - 1 - k);
        let kf = k as f64;
        let rot = Complex64::from_polar(1.0, kf * phase);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        for n in 0..dim - k {
            let m = n + k;
            let log_mag = 0.5 * (lnf[n] - lnf[m]) + kf * lnr - 0.5 * x;
            let val = rot * (log_mag.exp() * lag[n]);
            out[(m, n)] = val;
            if k > 0 {
                out[(n, m)] = val.conj() * sign;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn laguerre_low_orders() {
        let x = 0.7;
        assert_relative_eq!(laguerre(0, 2.0, x), 1.0);
        assert_relative_eq!(laguerre(1, 2.0, x), 3.0 - x);
        // L_2^(k)(x) = x^2/2 - (k+2)x + (k+2)(k+1)/2
        let k = 2.0;
        let want = x * x / 2.0 - (k + 2.0) * x + (k + 2.0) * (k + 1.0) / 2.0;
        assert_relative_eq!(laguerre(2, k, x), want, epsilon = 1e-14);
    }

    #[test]
    fn ln_factorial_values() {
        let f = ln_factorials(6);
        assert_relative_eq!(f[5].exp(), 120.0, epsilon = 1e-10);
        assert_eq!(f[0], 0.0);
        assert_eq!(f[1], 0.0);
    }

    #[test]
    fn displacement_first_column_is_coherent_state() {
        let gamma = Complex64::new(0.8, -0.3);
        let d = displacement_matrix(gamma, 20);
        let x = gamma.norm_sqr();
        let lnf = ln_factorials(20);
        for n in 0..20 {
            let want = gamma.powu(n as u32) * (-0.5 * x - 0.5 * lnf[n]).exp();
            assert!((d[(n, 0)] - want).norm() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn displacement_is_unitary_on_low_block() {
        // D D^dagger restricted to low Fock states is the identity when the
        // truncation is far above the displaced support.
        let d = displacement_matrix(Complex64::new(1.1, 0.4), 60);
        let p = &d * d.adjoint();
        for i in 0..10 {
            for j in 0..10 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((p[(i, j)] - want).norm() < 1e-12);
            }
        }
    }
}
