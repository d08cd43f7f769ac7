use super::{CMatrix, HilbertSpace, C64};
use crate::error::{Error, Result};
use crate::special::displacement_matrix;

/// Operators on a given space. Phonon operators are identity-padded on the
/// qubit factor and qubit operators on the phonon factor.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    space: HilbertSpace,
    pub a: CMatrix,
    pub a_dag: CMatrix,
    pub number: CMatrix,
    pub parity: CMatrix,
    pub qubit: Option<QubitOperators>,
}

#[derive(Debug, Clone)]
pub struct QubitOperators {
    /// `|e><g|`
    pub sigma_plus: CMatrix,
    /// `|g><e|`
    pub sigma_minus: CMatrix,
    pub sigma_x: CMatrix,
    /// `i(sigma_+ - sigma_-)`, so that `(|g> - i|e>)/sqrt(2)` is the -1 eigenstate.
    pub sigma_y: CMatrix,
    /// `|e><e| - |g><g|`
    pub sigma_z: CMatrix,
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

fn qubit_mats() -> QubitOperators {
    let mut sp = CMatrix::zeros(2, 2);
    sp[(1, 0)] = one();
    let sm = sp.adjoint();
    let i = C64::new(0.0, 1.0);
    let mut sz = CMatrix::zeros(2, 2);
    sz[(0, 0)] = -one();
    sz[(1, 1)] = one();
    QubitOperators {
        sigma_x: &sp + &sm,
        sigma_y: (&sp - &sm) * i,
        sigma_plus: sp,
        sigma_minus: sm,
        sigma_z: sz,
    }
}

impl OperatorSet {
    pub fn new(space: HilbertSpace) -> Result<Self> {
        let d = match space.n_max() {
            Some(n) => n + 1,
            None => {
                return Err(Error::SpaceMismatch(
                    "operator set needs a phonon mode".into(),
                ))
            }
        };
        let mut a = CMatrix::zeros(d, d);
        for n in 1..d {
            a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
        }
        let number = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |n, _| {
            C64::new(n as f64, 0.0)
        }));
        let parity = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |n, _| {
            C64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        }));
        let a_dag = a.adjoint();
        if !space.has_qubit() {
            return Ok(OperatorSet {
                space,
                a,
                a_dag,
                number,
                parity,
                qubit: None,
            });
        }
        let i2 = CMatrix::identity(2, 2);
        let id = CMatrix::identity(d, d);
        let q = qubit_mats();
        let pad = |m: &CMatrix| m.kronecker(&id);
        let qubit = QubitOperators {
            sigma_plus: pad(&q.sigma_plus),
            sigma_minus: pad(&q.sigma_minus),
            sigma_x: pad(&q.sigma_x),
            sigma_y: pad(&q.sigma_y),
            sigma_z: pad(&q.sigma_z),
        };
        Ok(OperatorSet {
            space,
            a: i2.kronecker(&a),
            a_dag: i2.kronecker(&a_dag),
            number: i2.kronecker(&number),
            parity: i2.kronecker(&parity),
            qubit: Some(qubit),
        })
    }

    /// Pauli operators on the bare qubit space.
    pub fn qubit_only() -> QubitOperators {
        qubit_mats()
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    fn pad_phonon(&self, m: CMatrix) -> CMatrix {
        if self.space.has_qubit() {
            CMatrix::identity(2, 2).kronecker(&m)
        } else {
            m
        }
    }

    /// Displacement `D(beta)` with exact truncated matrix elements.
    pub fn displacement(&self, beta: C64) -> CMatrix {
        self.pad_phonon(displacement_matrix(beta, self.space.phonon_dim()))
    }

    /// Phase-space rotation `R(theta) = exp(-i theta n)`, mapping `|alpha>` to
    /// `|alpha e^{-i theta}>`.
    pub fn rotation(&self, theta: f64) -> CMatrix {
        let d = self.space.phonon_dim();
        let diag = nalgebra::DVector::from_fn(d, |n, _| C64::from_polar(1.0, -theta * n as f64));
        self.pad_phonon(CMatrix::from_diagonal(&diag))
    }
}

/// Sparse operator in coordinate form, used by the master-equation right-hand
/// side where dense products dominate the cost.
#[derive(Debug, Clone)]
pub struct SparseOp {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    pub fn from_dense(m: &CMatrix) -> Self {
        let mut entries = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let v = m[(i, j)];
                if v.norm_sqr() > 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
        SparseOp {
            dim: m.nrows(),
            entries,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// `out += s * A rho`
    pub fn left_mul_acc(&self, rho: &CMatrix, s: C64, out: &mut CMatrix) {
        let n = rho.ncols();
        for &(i, k, v) in &self.entries {
            let sv = s * v;
            for j in 0..n {
                out[(i, j)] += sv * rho[(k, j)];
            }
        }
    }

    /// `out += s * rho A^dagger`
    pub fn right_mul_adjoint_acc(&self, rho: &CMatrix, s: C64, out: &mut CMatrix) {
        let n = rho.nrows();
        // (rho A^dag)_{ij} = sum_k rho_{ik} conj(A_{jk})
        for &(j, k, v) in &self.entries {
            let sv = s * v.conj();
            for i in 0..n {
                out[(i, j)] += sv * rho[(i, k)];
            }
        }
    }

    /// `out += s * A rho A^dagger`
    pub fn sandwich_acc(&self, rho: &CMatrix, s: C64, out: &mut CMatrix) {
        for &(i, k, v) in &self.entries {
            for &(j, l, w) in &self.entries {
                out[(i, j)] += s * v * rho[(k, l)] * w.conj();
            }
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
        }
        m
    }
}
