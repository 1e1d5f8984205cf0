//! Exact conjugation of Pauli sums by Clifford gates.
//!
//! Clifford gates map Pauli strings to single Pauli strings with a quarter
//! phase, so `U P U†` can be evaluated without leaving the Pauli-sum
//! representation.  Rather than hand-coding the image tables, each action is
//! derived once from the gate's dense unitary on its support and rounded to
//! the exact phase set; a failed rounding means the unitary is not Clifford.
//!
//! For non-Clifford conjugators [`conjugate_by_dense`] provides the dense
//! fallback: conjugate the realized matrix and project back onto the Pauli
//! basis (exact up to floating point at these register sizes).

use alloc::vec;
use alloc::vec::Vec;

use crate::dense::{CMatrix, C64};
use crate::error::{Error, Result};
use crate::pauli::{exp_unitary, OperatorSum, Pauli, PauliTerm, Quarter};

const PAULIS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

/// The Clifford gates used by the circuit variants, with 1-based qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CliffordGate {
    /// Controlled Z, `exp(iπ σ⁺_c σ⁻_c σ⁻_t σ⁺_t)`: a −1 phase on
    /// (control occupied, target empty).
    Cz { control: usize, target: usize },
    /// Controlled NOT, `exp(i π/2 σ⁺_c σ⁻_c (1 − σˣ_t))`.
    Cnot { control: usize, target: usize },
    /// `exp(i π/2 (σ⁺_a σ⁻_b + σ⁻_a σ⁺_b))`.
    ISwap { a: usize, b: usize },
    /// `exp(−i π/2 (σ⁺_a σ⁻_b + σ⁻_a σ⁺_b))`, the inverse of [`Self::ISwap`].
    InvISwap { a: usize, b: usize },
}

/// Hopping generator σ⁺_j σ⁻_k + σ⁻_j σ⁺_k.
pub fn hop_generator(n_qubits: usize, j: usize, k: usize) -> Result<OperatorSum> {
    let jk = OperatorSum::sigma_plus(n_qubits, j)?.mul(&OperatorSum::sigma_minus(n_qubits, k)?);
    let kj = OperatorSum::sigma_minus(n_qubits, j)?.mul(&OperatorSum::sigma_plus(n_qubits, k)?);
    Ok(jk.add(&kj))
}

impl CliffordGate {
    pub fn support(&self) -> (usize, usize) {
        match *self {
            CliffordGate::Cz { control, target } | CliffordGate::Cnot { control, target } => {
                (control, target)
            }
            CliffordGate::ISwap { a, b } | CliffordGate::InvISwap { a, b } => (a, b),
        }
    }

    /// Generator `A` and angle `φ` such that the gate is `exp(i φ A)`, on a
    /// local two-qubit register (first support qubit = local qubit 1).
    pub fn local_generator(&self) -> (OperatorSum, f64) {
        let n1 = OperatorSum::number(2, 1).unwrap();
        let n2 = OperatorSum::number(2, 2).unwrap();
        let id = OperatorSum::identity(2);
        match self {
            CliffordGate::Cz { .. } => (n1.mul(&id.sub(&n2)), core::f64::consts::PI),
            CliffordGate::Cnot { .. } => {
                let x2 = OperatorSum::pauli(2, 2, Pauli::X).unwrap();
                (n1.mul(&id.sub(&x2)), core::f64::consts::FRAC_PI_2)
            }
            CliffordGate::ISwap { .. } => {
                (hop_generator(2, 1, 2).unwrap(), core::f64::consts::FRAC_PI_2)
            }
            CliffordGate::InvISwap { .. } => (
                hop_generator(2, 1, 2).unwrap().scale_re(-1.0),
                core::f64::consts::FRAC_PI_2,
            ),
        }
    }

    /// Dense unitary on the local two-qubit register.
    pub fn local_unitary(&self) -> CMatrix {
        let (gen, angle) = self.local_generator();
        exp_unitary(&gen, angle, 2).unwrap()
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let (a, b) = self.support();
        for q in [a, b] {
            if q == 0 || q > n_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    n_qubits,
                });
            }
        }
        if a == b {
            return Err(Error::DuplicateQubit { qubit: a });
        }
        Ok(())
    }
}

/// Precomputed conjugation table of a one- or two-qubit Clifford.
#[derive(Debug, Clone)]
pub struct CliffordAction {
    support: Vec<usize>,
    /// Image of each local Pauli index: (output index, quarter phase).
    table: Vec<(u8, Quarter)>,
}

fn local_pauli_dense(indices: &[usize]) -> CMatrix {
    let k = indices.len();
    let term = PauliTerm::new(
        C64::new(1.0, 0.0),
        indices.iter().map(|&i| PAULIS[i]).collect(),
    );
    OperatorSum::from_term(term).to_dense(k).unwrap()
}

fn index_to_locals(mut idx: usize, k: usize) -> Vec<usize> {
    let mut out = vec![0usize; k];
    for slot in (0..k).rev() {
        out[slot] = idx % 4;
        idx /= 4;
    }
    out
}

impl CliffordAction {
    /// Derive the action of `u` (a `2^k × 2^k` unitary on the listed support
    /// qubits, `k ∈ {1, 2}`) by conjugating every local Pauli densely.
    pub fn from_dense(u: &CMatrix, support: Vec<usize>) -> Result<Self> {
        let k = support.len();
        assert!(k == 1 || k == 2, "support must be 1 or 2 qubits");
        assert_eq!(u.dim(), 1 << k, "unitary size does not match support");
        let count = 4usize.pow(k as u32);
        let uh = u.adjoint();
        let dim = 1 << k;
        let mut table = Vec::with_capacity(count);
        for idx in 0..count {
            let locals = index_to_locals(idx, k);
            let p = local_pauli_dense(&locals);
            let w = u.mul(&p).mul(&uh);
            // Project on the Pauli basis; a Clifford yields a single image.
            let mut found: Option<(u8, Quarter)> = None;
            for out in 0..count {
                let q = local_pauli_dense(&index_to_locals(out, k));
                let mut tr = C64::new(0.0, 0.0);
                for r in 0..dim {
                    for c in 0..dim {
                        tr += q[(r, c)].conj() * w[(r, c)];
                    }
                }
                let coeff = tr / (dim as f64);
                if coeff.norm() < 1e-9 {
                    continue;
                }
                let phase = Quarter::from_c64(coeff, 1e-9).ok_or(Error::NotClifford)?;
                if found.is_some() {
                    return Err(Error::NotClifford);
                }
                found = Some((out as u8, phase));
            }
            table.push(found.ok_or(Error::NotClifford)?);
        }
        Ok(Self { support, table })
    }

    pub fn from_gate(gate: &CliffordGate) -> Self {
        let (a, b) = gate.support();
        Self::from_dense(&gate.local_unitary(), vec![a, b])
            .expect("gate library unitaries are Clifford")
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// `U op U†`, exactly, staying in the Pauli-sum representation.
    pub fn conjugate(&self, op: &OperatorSum) -> OperatorSum {
        let k = self.support.len();
        let n = op.n_qubits();
        let terms = op
            .terms()
            .iter()
            .map(|t| {
                let mut idx = 0usize;
                for &q in &self.support {
                    idx = idx * 4 + t.factors[q - 1] as usize;
                }
                let (out, phase) = self.table[idx];
                let locals = index_to_locals(out as usize, k);
                let mut factors = t.factors.clone();
                for (slot, &q) in self.support.iter().enumerate() {
                    factors[q - 1] = PAULIS[locals[slot]];
                }
                PauliTerm::new(t.coeff * phase.value(), factors)
            })
            .collect();
        OperatorSum::from_terms(n, terms).unwrap()
    }
}

/// `Ad_gate(op) = U op U†` for the supported gate set.
pub fn conjugate_by_clifford(gate: &CliffordGate, op: &OperatorSum) -> Result<OperatorSum> {
    gate.validate(op.n_qubits())?;
    Ok(CliffordAction::from_gate(gate).conjugate(op))
}

/// Project a dense matrix back onto the Pauli basis.
pub fn pauli_decompose(m: &CMatrix, n_qubits: usize) -> OperatorSum {
    let dim = 1usize << n_qubits;
    assert_eq!(m.dim(), dim);
    let count = 4usize.pow(n_qubits as u32);
    let mut terms = Vec::new();
    for idx in 0..count {
        let locals = index_to_locals(idx, n_qubits);
        let factors: Vec<Pauli> = locals.iter().map(|&i| PAULIS[i]).collect();
        // Pauli strings have one nonzero entry per column: row = col ^ flip.
        let mut flip = 0usize;
        for (pos, p) in factors.iter().enumerate() {
            if matches!(p, Pauli::X | Pauli::Y) {
                flip |= 1usize << (n_qubits - 1 - pos);
            }
        }
        let mut tr = C64::new(0.0, 0.0);
        for col in 0..dim {
            let row = col ^ flip;
            let mut pe = C64::new(1.0, 0.0);
            for (pos, p) in factors.iter().enumerate() {
                let shift = n_qubits - 1 - pos;
                pe *= p.entry((row >> shift) & 1, (col >> shift) & 1);
            }
            tr += pe.conj() * m[(row, col)];
        }
        let coeff = tr / (dim as f64);
        if coeff.norm() > crate::COEFF_PRUNE_TOL {
            terms.push(PauliTerm::new(coeff, factors));
        }
    }
    OperatorSum::from_terms(n_qubits, terms).unwrap()
}

/// Dense-conjugation fallback for non-Clifford unitaries on the full
/// register: realizes `op`, conjugates, and projects back.
pub fn conjugate_by_dense(u: &CMatrix, op: &OperatorSum) -> OperatorSum {
    let n = op.n_qubits();
    let w = u.mul(&op.to_dense(n).unwrap()).mul(&u.adjoint());
    pauli_decompose(&w, n)
}

/// Partial sum of the adjoint series
/// `e^X Y e^{−X} = Y + [X,Y] + ½[X,[X,Y]] + …`
/// truncated at nested-commutator depth `order`.
pub fn hadamard_lemma_series(x: &OperatorSum, y: &OperatorSum, order: usize) -> OperatorSum {
    let mut total = y.clone();
    let mut nested = y.clone();
    for k in 1..=order {
        nested = x.commutator(&nested).scale_re(1.0 / k as f64);
        total = total.add(&nested);
    }
    total
}
