//! Exact algebra of complex-weighted Pauli strings.
//!
//! Operators are sums of terms `c · P₁ ⊗ … ⊗ P_n` with `P_j ∈ {I, X, Y, Z}`.
//! Sums are kept in canonical form: terms sorted lexicographically by factor
//! string, identical strings merged, coefficients below
//! [`crate::COEFF_PRUNE_TOL`] dropped.  Products of Pauli strings close under
//! multiplication up to a quarter phase (±1, ±i), which is tracked exactly.
//!
//! Qubits are indexed 1-based, matching the fermionic mode labels they
//! represent after the Jordan-Wigner map.  In the dense realization qubit 1
//! is the most significant index bit, and the σᶻ = +1 eigenstate is matrix
//! index 0.  Ladder operators are a presentation layer: σ± = (X ± iY)/2 are
//! stored expanded, so a number operator σ⁺σ⁻ is the sum (I + Z)/2 and the
//! fermionic vacuum is the all-ones basis index.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dense::{self, CMatrix, C64};
use crate::error::{Error, Result};
use crate::{COEFF_PRUNE_TOL, HERMITICITY_TOL};

/// Single-qubit Pauli factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// The standard 2×2 matrix entry `P[row][col]`.
    pub fn entry(self, row: usize, col: usize) -> C64 {
        let z = C64::new(0.0, 0.0);
        match self {
            Pauli::I => {
                if row == col {
                    C64::new(1.0, 0.0)
                } else {
                    z
                }
            }
            Pauli::X => {
                if row != col {
                    C64::new(1.0, 0.0)
                } else {
                    z
                }
            }
            Pauli::Y => match (row, col) {
                (0, 1) => C64::new(0.0, -1.0),
                (1, 0) => C64::new(0.0, 1.0),
                _ => z,
            },
            Pauli::Z => match (row, col) {
                (0, 0) => C64::new(1.0, 0.0),
                (1, 1) => C64::new(-1.0, 0.0),
                _ => z,
            },
        }
    }

    /// Whether the factor flips the basis index (X and Y do).
    fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    /// Single-factor product `a · b = phase · c`.
    pub fn mul(a: Pauli, b: Pauli) -> (Pauli, Quarter) {
        use Pauli::*;
        match (a, b) {
            (I, p) | (p, I) => (p, Quarter::ONE),
            (X, X) | (Y, Y) | (Z, Z) => (I, Quarter::ONE),
            (X, Y) => (Z, Quarter::PLUS_I),
            (Y, X) => (Z, Quarter::MINUS_I),
            (Y, Z) => (X, Quarter::PLUS_I),
            (Z, Y) => (X, Quarter::MINUS_I),
            (Z, X) => (Y, Quarter::PLUS_I),
            (X, Z) => (Y, Quarter::MINUS_I),
        }
    }
}

/// Exact quarter phase i^k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quarter(u8);

impl Quarter {
    pub const ONE: Quarter = Quarter(0);
    pub const PLUS_I: Quarter = Quarter(1);
    pub const MINUS_ONE: Quarter = Quarter(2);
    pub const MINUS_I: Quarter = Quarter(3);

    pub fn mul(self, rhs: Quarter) -> Quarter {
        Quarter((self.0 + rhs.0) % 4)
    }

    pub fn value(self) -> C64 {
        match self.0 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    /// Round a numerically obtained quarter phase to the exact value.
    pub fn from_c64(z: C64, tol: f64) -> Option<Quarter> {
        for k in 0..4u8 {
            if (z - Quarter(k).value()).norm() <= tol {
                return Some(Quarter(k));
            }
        }
        None
    }
}

/// One complex-weighted Pauli string on a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coeff: C64,
    pub factors: Vec<Pauli>,
}

impl PauliTerm {
    pub fn new(coeff: C64, factors: Vec<Pauli>) -> Self {
        Self { coeff, factors }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::new(C64::new(1.0, 0.0), vec![Pauli::I; n_qubits])
    }

    /// A single non-identity factor at 1-based `qubit`.
    pub fn single(n_qubits: usize, qubit: usize, p: Pauli, coeff: C64) -> Result<Self> {
        if qubit == 0 || qubit > n_qubits {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                n_qubits,
            });
        }
        let mut factors = vec![Pauli::I; n_qubits];
        factors[qubit - 1] = p;
        Ok(Self::new(coeff, factors))
    }

    pub fn n_qubits(&self) -> usize {
        self.factors.len()
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.coeff.conj(), self.factors.clone())
    }

    /// Factor string as text, e.g. `"IXYZ"`.
    pub fn factor_string(&self) -> String {
        self.factors.iter().map(|p| p.as_char()).collect()
    }

    fn scaled(&self, s: C64) -> PauliTerm {
        PauliTerm::new(self.coeff * s, self.factors.clone())
    }
}

/// Exact product of two Pauli terms including the induced quarter phase.
pub fn multiply(a: &PauliTerm, b: &PauliTerm) -> Result<PauliTerm> {
    if a.n_qubits() != b.n_qubits() {
        return Err(Error::RegisterMismatch {
            left: a.n_qubits(),
            right: b.n_qubits(),
        });
    }
    let mut phase = Quarter::ONE;
    let factors = a
        .factors
        .iter()
        .zip(&b.factors)
        .map(|(&x, &y)| {
            let (p, q) = Pauli::mul(x, y);
            phase = phase.mul(q);
            p
        })
        .collect();
    Ok(PauliTerm::new(a.coeff * b.coeff * phase.value(), factors))
}

/// Canonically merged sum of Pauli terms on a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSum {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl OperatorSum {
    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: Vec::new(),
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::from_terms(n_qubits, vec![PauliTerm::identity(n_qubits)]).unwrap()
    }

    pub fn from_terms(n_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        for t in &terms {
            if t.n_qubits() != n_qubits {
                return Err(Error::RegisterMismatch {
                    left: t.n_qubits(),
                    right: n_qubits,
                });
            }
        }
        let mut op = Self { n_qubits, terms };
        op.canonicalize();
        Ok(op)
    }

    pub fn from_term(term: PauliTerm) -> Self {
        let n = term.n_qubits();
        Self::from_terms(n, vec![term]).unwrap()
    }

    /// Coefficient-1 single-factor operator.
    pub fn pauli(n_qubits: usize, qubit: usize, p: Pauli) -> Result<Self> {
        Ok(Self::from_term(PauliTerm::single(
            n_qubits,
            qubit,
            p,
            C64::new(1.0, 0.0),
        )?))
    }

    /// Ladder operator σ⁺ = (X + iY)/2, stored expanded.
    pub fn sigma_plus(n_qubits: usize, qubit: usize) -> Result<Self> {
        Self::from_terms(
            n_qubits,
            vec![
                PauliTerm::single(n_qubits, qubit, Pauli::X, C64::new(0.5, 0.0))?,
                PauliTerm::single(n_qubits, qubit, Pauli::Y, C64::new(0.0, 0.5))?,
            ],
        )
    }

    /// Ladder operator σ⁻ = (X − iY)/2.
    pub fn sigma_minus(n_qubits: usize, qubit: usize) -> Result<Self> {
        Self::from_terms(
            n_qubits,
            vec![
                PauliTerm::single(n_qubits, qubit, Pauli::X, C64::new(0.5, 0.0))?,
                PauliTerm::single(n_qubits, qubit, Pauli::Y, C64::new(0.0, -0.5))?,
            ],
        )
    }

    /// Number operator σ⁺σ⁻ = (I + Z)/2 on one qubit.
    pub fn number(n_qubits: usize, qubit: usize) -> Result<Self> {
        Self::from_terms(
            n_qubits,
            vec![
                PauliTerm::identity(n_qubits).scaled(C64::new(0.5, 0.0)),
                PauliTerm::single(n_qubits, qubit, Pauli::Z, C64::new(0.5, 0.0))?,
            ],
        )
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn canonicalize(&mut self) {
        self.terms.sort_by(|a, b| a.factors.cmp(&b.factors));
        let mut merged: Vec<PauliTerm> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            match merged.last_mut() {
                Some(last) if last.factors == t.factors => last.coeff += t.coeff,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff.norm() > COEFF_PRUNE_TOL);
        self.terms = merged;
    }

    pub fn add(&self, rhs: &OperatorSum) -> OperatorSum {
        assert_eq!(self.n_qubits, rhs.n_qubits, "register size mismatch");
        let mut terms = self.terms.clone();
        terms.extend(rhs.terms.iter().cloned());
        Self::from_terms(self.n_qubits, terms).unwrap()
    }

    pub fn sub(&self, rhs: &OperatorSum) -> OperatorSum {
        self.add(&rhs.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> OperatorSum {
        let terms = self.terms.iter().map(|t| t.scaled(s)).collect();
        Self::from_terms(self.n_qubits, terms).unwrap()
    }

    pub fn scale_re(&self, s: f64) -> OperatorSum {
        self.scale(C64::new(s, 0.0))
    }

    /// Full operator product, canonically merged.
    pub fn mul(&self, rhs: &OperatorSum) -> OperatorSum {
        assert_eq!(self.n_qubits, rhs.n_qubits, "register size mismatch");
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            for b in &rhs.terms {
                terms.push(multiply(a, b).unwrap());
            }
        }
        Self::from_terms(self.n_qubits, terms).unwrap()
    }

    pub fn adjoint(&self) -> OperatorSum {
        let terms = self.terms.iter().map(|t| t.adjoint()).collect();
        Self::from_terms(self.n_qubits, terms).unwrap()
    }

    pub fn commutator(&self, rhs: &OperatorSum) -> OperatorSum {
        self.mul(rhs).sub(&rhs.mul(self))
    }

    /// ℓ₂ norm of the coefficient vector; equals `‖A‖_F / 2^{n/2}` because
    /// Pauli strings are orthogonal.
    pub fn coeff_norm(&self) -> f64 {
        libm::sqrt(self.terms.iter().map(|t| t.coeff.norm_sqr()).sum())
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.sub(&self.adjoint()).coeff_norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol * self.coeff_norm().max(1.0)
    }

    /// Kronecker-product realization as a dense matrix on `n_qubits` qubits
    /// (at least the operator's own register; extra qubits are identity).
    pub fn to_dense(&self, n_qubits: usize) -> Result<CMatrix> {
        if n_qubits < self.n_qubits {
            return Err(Error::RegisterOverflow {
                needed: self.n_qubits,
                given: n_qubits,
            });
        }
        let dim = 1usize << n_qubits;
        let mut out = CMatrix::zeros(dim);
        for term in &self.terms {
            // Qubit j (1-based) owns index bit n_qubits − j.
            let mut flip = 0usize;
            for (idx, p) in term.factors.iter().enumerate() {
                if p.flips() {
                    flip |= 1usize << (n_qubits - 1 - idx);
                }
            }
            for col in 0..dim {
                let row = col ^ flip;
                let mut amp = term.coeff;
                for (idx, p) in term.factors.iter().enumerate() {
                    let shift = n_qubits - 1 - idx;
                    let rb = (row >> shift) & 1;
                    let cb = (col >> shift) & 1;
                    amp *= p.entry(rb, cb);
                }
                out[(row, col)] += amp;
            }
        }
        Ok(out)
    }

    /// Spectral norm of the dense realization.
    pub fn spectral_norm(&self) -> f64 {
        dense::spectral_norm(&self.to_dense(self.n_qubits).unwrap())
    }
}

impl core::fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "({:+.6e}{:+.6e}i) {}",
            self.coeff.re,
            self.coeff.im,
            self.factor_string()
        )
    }
}

impl core::fmt::Display for OperatorSum {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

// Serialized form keeps Pauli strings readable: {"re", "im", "ops"}.
#[derive(Serialize, Deserialize)]
struct TermRepr {
    re: f64,
    im: f64,
    ops: String,
}

impl Serialize for PauliTerm {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> core::result::Result<S::Ok, S::Error> {
        TermRepr {
            re: self.coeff.re,
            im: self.coeff.im,
            ops: self.factor_string(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for PauliTerm {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> core::result::Result<Self, D::Error> {
        let repr = TermRepr::deserialize(de)?;
        let factors: Option<Vec<Pauli>> = repr.ops.chars().map(Pauli::from_char).collect();
        let factors = factors.ok_or_else(|| serde::de::Error::custom("invalid Pauli character"))?;
        Ok(PauliTerm::new(C64::new(repr.re, repr.im), factors))
    }
}

#[derive(Serialize, Deserialize)]
struct SumRepr {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl Serialize for OperatorSum {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> core::result::Result<S::Ok, S::Error> {
        SumRepr {
            n_qubits: self.n_qubits,
            terms: self.terms.clone(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for OperatorSum {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> core::result::Result<Self, D::Error> {
        let repr = SumRepr::deserialize(de)?;
        OperatorSum::from_terms(repr.n_qubits, repr.terms)
            .map_err(|e| serde::de::Error::custom(alloc::format!("{e}")))
    }
}

/// `exp(i · angle · op)` as a dense unitary; the generator must be Hermitian.
pub fn exp_unitary(generator: &OperatorSum, angle: f64, n_qubits: usize) -> Result<CMatrix> {
    let defect = generator.hermiticity_defect();
    if defect > HERMITICITY_TOL * generator.coeff_norm().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    let h = generator.to_dense(n_qubits)?;
    let u = dense::eigh(&h).exp_i(angle);
    debug_assert!(u.unitarity_defect() < 1e-11);
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn dense1(p: Pauli) -> CMatrix {
        CMatrix::from_fn(2, |i, j| p.entry(i, j))
    }

    #[test]
    fn multiplication_phase_table_matches_dense_products() {
        use Pauli::*;
        for &a in &[I, X, Y, Z] {
            for &b in &[I, X, Y, Z] {
                let (p, q) = Pauli::mul(a, b);
                let lhs = dense1(a).mul(&dense1(b));
                let rhs = dense1(p).scale(q.value());
                assert!(
                    lhs.sub(&rhs).frobenius_norm() < 1e-15,
                    "{a:?}*{b:?} != {q:?}*{p:?}"
                );
            }
        }
    }

    #[test]
    fn x_times_y_is_i_z() {
        let x = PauliTerm::single(1, 1, Pauli::X, c(1.0, 0.0)).unwrap();
        let y = PauliTerm::single(1, 1, Pauli::Y, c(1.0, 0.0)).unwrap();
        let p = multiply(&x, &y).unwrap();
        assert_eq!(p.factors, vec![Pauli::Z]);
        assert!((p.coeff - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn z_squared_is_identity() {
        let z = PauliTerm::single(1, 1, Pauli::Z, c(1.0, 0.0)).unwrap();
        let p = multiply(&z, &z).unwrap();
        assert_eq!(p.factors, vec![Pauli::I]);
        assert!((p.coeff - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn register_mismatch_is_error() {
        let a = PauliTerm::identity(2);
        let b = PauliTerm::identity(3);
        assert!(matches!(
            multiply(&a, &b),
            Err(Error::RegisterMismatch { .. })
        ));
    }

    #[test]
    fn sigma_plus_times_sigma_minus_is_number_operator() {
        // σ⁺σ⁻ = (I + Z)/2, via the expanded ladder products.
        let prod = OperatorSum::sigma_plus(1, 1)
            .unwrap()
            .mul(&OperatorSum::sigma_minus(1, 1).unwrap());
        let num = OperatorSum::number(1, 1).unwrap();
        assert!(prod.sub(&num).coeff_norm() < 1e-15);
        // Oracle: 2×2 matrix product of the dense ladder operators.
        let sp = OperatorSum::sigma_plus(1, 1).unwrap().to_dense(1).unwrap();
        let sm = OperatorSum::sigma_minus(1, 1).unwrap().to_dense(1).unwrap();
        let oracle = sp.mul(&sm);
        assert!(prod.to_dense(1).unwrap().sub(&oracle).frobenius_norm() < 1e-15);
    }

    #[test]
    fn to_dense_identity_and_z() {
        let id = OperatorSum::identity(2).to_dense(2).unwrap();
        assert!(id.sub(&CMatrix::identity(4)).frobenius_norm() < 1e-15);

        let z = OperatorSum::pauli(1, 1, Pauli::Z)
            .unwrap()
            .to_dense(1)
            .unwrap();
        assert!((z[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((z[(1, 1)] - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn to_dense_hopping_matrix_entries() {
        // σ⁺₁σ⁻₂ + σ⁻₁σ⁺₂ couples the occupation states |01⟩ and |10⟩.
        // Occupied ↔ index bit 0, so |01⟩ ↔ index 0b10 = 2, |10⟩ ↔ 0b01 = 1.
        let hop = OperatorSum::sigma_plus(2, 1)
            .unwrap()
            .mul(&OperatorSum::sigma_minus(2, 2).unwrap())
            .add(
                &OperatorSum::sigma_minus(2, 1)
                    .unwrap()
                    .mul(&OperatorSum::sigma_plus(2, 2).unwrap()),
            );
        // Oracle: explicit 4×4 construction.
        let mut oracle = CMatrix::zeros(4);
        oracle[(2, 1)] = c(1.0, 0.0);
        oracle[(1, 2)] = c(1.0, 0.0);
        let m = hop.to_dense(2).unwrap();
        assert!(m.sub(&oracle).frobenius_norm() < 1e-15);
    }

    #[test]
    fn register_overflow_is_error() {
        let op = OperatorSum::identity(3);
        assert!(matches!(op.to_dense(2), Err(Error::RegisterOverflow { .. })));
    }

    #[test]
    fn spectral_norm_examples() {
        let z = OperatorSum::pauli(1, 1, Pauli::Z).unwrap();
        assert!((z.spectral_norm() - 1.0).abs() < 1e-12);
        let x3 = OperatorSum::pauli(1, 1, Pauli::X).unwrap().scale_re(3.0);
        assert!((x3.spectral_norm() - 3.0).abs() < 1e-12);
        // ‖σ⁺σ⁻‖ = ‖σᶻ‖ = 1
        let n = OperatorSum::number(1, 1).unwrap();
        assert!((n.spectral_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exp_unitary_of_z() {
        let z = OperatorSum::pauli(1, 1, Pauli::Z).unwrap();
        let u = exp_unitary(&z, core::f64::consts::FRAC_PI_2, 1).unwrap();
        assert!((u[(0, 0)] - c(0.0, 1.0)).norm() < 1e-13);
        assert!((u[(1, 1)] - c(0.0, -1.0)).norm() < 1e-13);
    }

    #[test]
    fn exp_unitary_zero_angle_is_identity() {
        let z = OperatorSum::pauli(3, 2, Pauli::Y).unwrap();
        let u = exp_unitary(&z, 0.0, 3).unwrap();
        assert!(u.sub(&CMatrix::identity(8)).frobenius_norm() < 1e-13);
    }

    #[test]
    fn exp_unitary_hopping_gives_iswap() {
        // exp(i π/2 (σ⁺₁σ⁻₂ + σ⁻₁σ⁺₂)) swaps the single-excitation states
        // with an i phase and leaves |00⟩, |11⟩ alone.
        let hop = OperatorSum::sigma_plus(2, 1)
            .unwrap()
            .mul(&OperatorSum::sigma_minus(2, 2).unwrap())
            .add(
                &OperatorSum::sigma_minus(2, 1)
                    .unwrap()
                    .mul(&OperatorSum::sigma_plus(2, 2).unwrap()),
            );
        let u = exp_unitary(&hop, core::f64::consts::FRAC_PI_2, 2).unwrap();
        // occupation |01⟩ = index 2, |10⟩ = index 1, |00⟩ = 3, |11⟩ = 0
        assert!((u[(1, 2)] - c(0.0, 1.0)).norm() < 1e-13);
        assert!((u[(2, 1)] - c(0.0, 1.0)).norm() < 1e-13);
        assert!((u[(0, 0)] - c(1.0, 0.0)).norm() < 1e-13);
        assert!((u[(3, 3)] - c(1.0, 0.0)).norm() < 1e-13);
        assert!((u[(1, 1)]).norm() < 1e-13);
    }

    #[test]
    fn exp_unitary_rejects_non_hermitian() {
        let sp = OperatorSum::sigma_plus(1, 1).unwrap();
        assert!(matches!(
            exp_unitary(&sp, 1.0, 1),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn canonical_form_merges_and_prunes() {
        let x = OperatorSum::pauli(2, 1, Pauli::X).unwrap();
        let twice = x.add(&x);
        assert_eq!(twice.terms().len(), 1);
        assert!((twice.terms()[0].coeff - c(2.0, 0.0)).norm() < 1e-15);
        let zero = x.sub(&x);
        assert!(zero.is_zero());
    }

    #[test]
    fn serde_roundtrip() {
        let op = OperatorSum::sigma_plus(3, 2).unwrap().scale(c(0.25, -1.5));
        let json = serde_json::to_string(&op).unwrap();
        let back: OperatorSum = serde_json::from_str(&json).unwrap();
        assert!(op.sub(&back).coeff_norm() < 1e-15);
    }

    fn arb_pauli() -> impl Strategy<Value = Pauli> {
        prop_oneof![
            Just(Pauli::I),
            Just(Pauli::X),
            Just(Pauli::Y),
            Just(Pauli::Z)
        ]
    }

    fn arb_sum(n: usize) -> impl Strategy<Value = OperatorSum> {
        proptest::collection::vec(
            (
                proptest::collection::vec(arb_pauli(), n),
                -2.0f64..2.0,
                -2.0f64..2.0,
            ),
            1..5,
        )
        .prop_map(move |terms| {
            let terms = terms
                .into_iter()
                .map(|(f, re, im)| PauliTerm::new(C64::new(re, im), f))
                .collect();
            OperatorSum::from_terms(n, terms).unwrap()
        })
    }

    proptest! {
        #[test]
        fn dense_is_ring_homomorphism(a in arb_sum(3), b in arb_sum(3)) {
            let lhs = a.mul(&b).to_dense(3).unwrap();
            let rhs = a.to_dense(3).unwrap().mul(&b.to_dense(3).unwrap());
            prop_assert!(lhs.sub(&rhs).frobenius_norm() < 1e-12);
            let lhs = a.add(&b).to_dense(3).unwrap();
            let rhs = a.to_dense(3).unwrap().add(&b.to_dense(3).unwrap());
            prop_assert!(lhs.sub(&rhs).frobenius_norm() < 1e-12);
        }

        #[test]
        fn exp_unitary_is_unitary(a in arb_sum(2), angle in -3.0f64..3.0) {
            // Hermitize first: (A + A†)/2.
            let h = a.add(&a.adjoint()).scale_re(0.5);
            let u = exp_unitary(&h, angle, 2).unwrap();
            prop_assert!(u.unitarity_defect() < 1e-12);
        }

        #[test]
        fn adjoint_matches_dense(a in arb_sum(2)) {
            let lhs = a.adjoint().to_dense(2).unwrap();
            let rhs = a.to_dense(2).unwrap().adjoint();
            prop_assert!(lhs.sub(&rhs).frobenius_norm() < 1e-13);
        }
    }
}
