//! Dense complex matrices for registers of up to ~12 qubits.
//!
//! Everything here is sized for Hilbert-space dimensions of at most a few
//! hundred, where exactness and simplicity beat asymptotics: Hermitian
//! eigendecomposition is a cyclic complex Jacobi iteration, the matrix
//! exponential goes through the eigenbasis, and the spectral norm is the
//! largest singular value obtained from `A† A`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

const ONE: C64 = C64::new(1.0, 0.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from rows given as nested slices (test convenience).
    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn mul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = k * n;
                let dst = i * n;
                for j in 0..n {
                    out.data[dst + j] += a * rhs.data[row + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.n, v.len(), "dimension mismatch");
        let n = self.n;
        let mut out = vec![ZERO; n];
        for i in 0..n {
            let row = i * n;
            let mut acc = ZERO;
            for j in 0..n {
                acc += self.data[row + j] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        let n = self.n;
        CMatrix::from_fn(n, |i, j| self[(j, i)].conj())
    }

    pub fn add(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        let mut out = self.clone();
        for (o, r) in out.data.iter_mut().zip(&rhs.data) {
            *o += r;
        }
        out
    }

    pub fn sub(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        let mut out = self.clone();
        for (o, r) in out.data.iter_mut().zip(&rhs.data) {
            *o -= r;
        }
        out
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        let mut out = self.clone();
        for o in out.data.iter_mut() {
            *o *= s;
        }
        out
    }

    /// Kronecker product `self ⊗ rhs` (left factor is the more significant
    /// index block).
    pub fn kron(&self, rhs: &CMatrix) -> CMatrix {
        let (a, b) = (self.n, rhs.n);
        let n = a * b;
        let mut out = CMatrix::zeros(n);
        for i1 in 0..a {
            for j1 in 0..a {
                let v = self[(i1, j1)];
                if v == ZERO {
                    continue;
                }
                for i2 in 0..b {
                    for j2 in 0..b {
                        out[(i1 * b + i2, j1 * b + j2)] = v * rhs[(i2, j2)];
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    /// `‖A†A − 1‖_F`, zero for a unitary.
    pub fn unitarity_defect(&self) -> f64 {
        self.adjoint()
            .mul(self)
            .sub(&CMatrix::identity(self.n))
            .frobenius_norm()
    }

    /// `‖A − A†‖_F`, zero for a Hermitian matrix.
    pub fn hermiticity_defect(&self) -> f64 {
        self.sub(&self.adjoint()).frobenius_norm()
    }
}

impl core::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

/// Eigendecomposition of a Hermitian matrix: `A = V diag(λ) V†` with `λ`
/// ascending and the eigenvectors in the columns of `V`.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub eigenvalues: Vec<f64>,
    pub vectors: CMatrix,
}

const JACOBI_MAX_SWEEPS: usize = 60;

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
pub fn eigh(a: &CMatrix) -> Eigh {
    eigh_with_basis(a, None)
}

/// Like [`eigh`] but starting from a unitary guess `v0` whose columns nearly
/// diagonalize `a`; convergence then takes O(1) sweeps.  Used by the
/// effective-Hamiltonian backend where the matrix changes little per step.
pub fn eigh_with_basis(a: &CMatrix, v0: Option<&CMatrix>) -> Eigh {
    let n = a.dim();
    let (mut w, mut v) = match v0 {
        Some(v0) => (v0.adjoint().mul(a).mul(v0), v0.clone()),
        None => (a.clone(), CMatrix::identity(n)),
    };
    let scale = w.frobenius_norm().max(1e-300);
    let tol = 1e-15 * scale;

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += w[(p, q)].norm_sqr();
            }
        }
        if libm::sqrt(2.0 * off) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut w, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| w[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());

    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let vectors = CMatrix::from_fn(n, |i, j| v[(i, order[j])]);
    Eigh {
        eigenvalues,
        vectors,
    }
}

/// One Jacobi rotation in the (p, q) plane zeroing `w[p][q]`.
fn jacobi_rotate(w: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = w[(p, q)];
    let r = apq.norm();
    if r < 1e-300 {
        return;
    }
    let phase = apq / r; // e^{iφ}
    let app = w[(p, p)].re;
    let aqq = w[(q, q)].re;
    let tau = (aqq - app) / (2.0 * r);
    // Smaller-magnitude root of t² − 2τt − 1 = 0.
    let t = if tau >= 0.0 {
        -1.0 / (tau + libm::sqrt(1.0 + tau * tau))
    } else {
        1.0 / (-tau + libm::sqrt(1.0 + tau * tau))
    };
    let c = 1.0 / libm::sqrt(1.0 + t * t);
    let s = t * c;

    let n = w.dim();
    // W ← R† W R with R[p][p]=c, R[p][q]=−s e^{iφ}, R[q][p]=s e^{−iφ}, R[q][q]=c.
    let se_m = phase.conj() * s; // s e^{−iφ}
    let se_p = phase * s; // s e^{+iφ}
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let wkp = w[(k, p)];
        let wkq = w[(k, q)];
        w[(k, p)] = c * wkp + se_m * wkq;
        w[(k, q)] = -se_p * wkp + c * wkq;
        w[(p, k)] = w[(k, p)].conj();
        w[(q, k)] = w[(k, q)].conj();
    }
    let new_pp = app * c * c + aqq * s * s + 2.0 * r * s * c;
    let new_qq = app * s * s + aqq * c * c - 2.0 * r * s * c;
    w[(p, p)] = C64::new(new_pp, 0.0);
    w[(q, q)] = C64::new(new_qq, 0.0);
    w[(p, q)] = ZERO;
    w[(q, p)] = ZERO;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp + se_m * vkq;
        v[(k, q)] = -se_p * vkp + c * vkq;
    }
}

impl Eigh {
    /// Reassemble `V f(diag) V†` for a scalar function of the eigenvalues.
    pub fn map_eigenvalues(&self, mut f: impl FnMut(f64) -> C64) -> CMatrix {
        let n = self.vectors.dim();
        let fvals: Vec<C64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += self.vectors[(i, k)] * fvals[k] * self.vectors[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// `exp(i θ A)` from the stored decomposition of `A`.
    pub fn exp_i(&self, theta: f64) -> CMatrix {
        self.map_eigenvalues(|l| C64::from_polar(1.0, theta * l))
    }

    /// Apply `exp(i θ A)` to a state without forming the matrix.
    pub fn apply_exp_i(&self, theta: f64, state: &[C64]) -> Vec<C64> {
        let n = self.vectors.dim();
        debug_assert_eq!(state.len(), n);
        // w = V† ψ
        let mut w = vec![ZERO; n];
        for k in 0..n {
            let mut acc = ZERO;
            for i in 0..n {
                acc += self.vectors[(i, k)].conj() * state[i];
            }
            w[k] = acc;
        }
        for (k, wk) in w.iter_mut().enumerate() {
            *wk *= C64::from_polar(1.0, theta * self.eigenvalues[k]);
        }
        // ψ' = V w
        let mut out = vec![ZERO; n];
        for i in 0..n {
            let mut acc = ZERO;
            for k in 0..n {
                acc += self.vectors[(i, k)] * w[k];
            }
            out[i] = acc;
        }
        out
    }
}

/// `exp(i θ H)` for Hermitian `H`.
pub fn expm_hermitian(h: &CMatrix, theta: f64) -> CMatrix {
    eigh(h).exp_i(theta)
}

/// Spectral norm (largest singular value), computed from the largest
/// eigenvalue of `A† A`.  Coincides with the largest |eigenvalue| for
/// Hermitian input.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    let gram = a.adjoint().mul(a);
    let ev = eigh(&gram).eigenvalues;
    libm::sqrt(ev.last().copied().unwrap_or(0.0).max(0.0))
}

/// Distance between unitaries up to a global phase:
/// `‖U − e^{iθ*}V‖` in spectral norm with `θ* = arg tr(V†U)`, the
/// Frobenius-optimal alignment.
pub fn phase_aligned_distance(u: &CMatrix, v: &CMatrix) -> f64 {
    let t = v.adjoint().mul(u).trace();
    let phase = if t.norm() < 1e-300 {
        ONE
    } else {
        t / t.norm()
    };
    spectral_norm(&u.sub(&v.scale(phase)))
}
