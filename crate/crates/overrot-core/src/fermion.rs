//! Fermionic operators and the Jordan-Wigner map.
//!
//! Modes are 1-based.  The annihilation operator of mode `j` is realized as
//! `c_j = ∏_{k<j} (−σᶻ_k) σ⁻_j`; the product of `(−σᶻ)` factors is the
//! Jordan-Wigner string.  Number operators lose their strings,
//! `c†_j c_j = σ⁺_j σ⁻_j`, so density-density interactions stay two-local
//! while long-range hoppings pick up σᶻ strings.
//!
//! [`inverse_jordan_wigner`] projects a qubit operator back onto fermionic
//! normal-ordered terms and reports what is left over as a residual instead
//! of failing; disorder terms produced by some circuit variants are exactly
//! the operators for which that residual is nonzero.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dense::{self, CMatrix, C64};
use crate::error::{Error, Result};
use crate::pauli::{OperatorSum, Pauli};
use crate::HERMITICITY_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LadderKind {
    Annihilate,
    Create,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

/// Jordan-Wigner image of a single ladder operator.
pub fn jordan_wigner(mode: usize, kind: LadderKind, n_modes: usize) -> Result<OperatorSum> {
    if mode == 0 || mode > n_modes {
        return Err(Error::QubitOutOfRange {
            index: mode,
            n_qubits: n_modes,
        });
    }
    let mut op = OperatorSum::sigma_minus(n_modes, mode)?;
    for k in 1..mode {
        let string = OperatorSum::pauli(n_modes, k, Pauli::Z)?.scale_re(-1.0);
        op = string.mul(&op);
    }
    Ok(match kind {
        LadderKind::Annihilate => op,
        LadderKind::Create => op.adjoint(),
    })
}

/// Number operator Σ_j σ⁺_j σ⁻_j over a subset of modes.
pub fn number_operator(modes: &[usize], n_modes: usize) -> Result<OperatorSum> {
    let mut op = OperatorSum::zero(n_modes);
    for &m in modes {
        op = op.add(&OperatorSum::number(n_modes, m)?);
    }
    Ok(op)
}

/// Permutation from (site, spin) to a linear mode index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeRelabeling {
    n_sites: usize,
    /// `map[2(site−1) + spin]` with spin Up = 0, Down = 1; modes 1-based.
    map: Vec<usize>,
}

impl ModeRelabeling {
    pub fn new(n_sites: usize, map: Vec<usize>) -> Result<Self> {
        let n_modes = 2 * n_sites;
        if map.len() != n_modes {
            return Err(Error::RegisterMismatch {
                left: map.len(),
                right: n_modes,
            });
        }
        let mut seen = vec![false; n_modes];
        for &m in &map {
            if m == 0 || m > n_modes {
                return Err(Error::QubitOutOfRange {
                    index: m,
                    n_qubits: n_modes,
                });
            }
            if seen[m - 1] {
                return Err(Error::DuplicateQubit { qubit: m });
            }
            seen[m - 1] = true;
        }
        Ok(Self { n_sites, map })
    }

    /// The two-site labeling c₁ = c₁↑, c₂ = c₂↑, c₃ = c₂↓, c₄ = c₁↓,
    /// which keeps the spin-flip terms as local as the string allows.
    pub fn two_site_default() -> Self {
        Self::new(2, vec![1, 4, 2, 3]).unwrap()
    }

    pub fn n_modes(&self) -> usize {
        2 * self.n_sites
    }

    pub fn mode(&self, site: usize, spin: Spin) -> usize {
        let s = match spin {
            Spin::Up => 0,
            Spin::Down => 1,
        };
        self.map[2 * (site - 1) + s]
    }
}

/// Hopping + density-density description of a Hubbard-like Hamiltonian.
///
/// Realized as
///   `H = Σ U n_a n_b  +  Σ V_jk n_j n_k  −  Σ t_jk (c†_j c_k + c†_k c_j)`
/// with energies in units of the overall scale g.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FermionHamiltonian {
    pub n_modes: usize,
    /// (j, k, t_jk): hopping or spin-flip amplitudes, entering with a minus.
    pub hoppings: Vec<(usize, usize, f64)>,
    /// (j, k, V_jk): density-density couplings.
    pub interactions: Vec<(usize, usize, f64)>,
    /// (mode_up, mode_down, U): on-site interaction pairs.
    pub onsite_pairs: Vec<(usize, usize, f64)>,
}

impl FermionHamiltonian {
    /// Hermitian qubit realization through the Jordan-Wigner map.
    pub fn realize(&self) -> Result<OperatorSum> {
        let n = self.n_modes;
        let mut h = OperatorSum::zero(n);
        for &(a, b, u) in &self.onsite_pairs {
            let term = OperatorSum::number(n, a)?.mul(&OperatorSum::number(n, b)?);
            h = h.add(&term.scale_re(u));
        }
        for &(j, k, v) in &self.interactions {
            let term = OperatorSum::number(n, j)?.mul(&OperatorSum::number(n, k)?);
            h = h.add(&term.scale_re(v));
        }
        for &(j, k, t) in &self.hoppings {
            let jk = jordan_wigner(j, LadderKind::Create, n)?
                .mul(&jordan_wigner(k, LadderKind::Annihilate, n)?);
            let hop = jk.add(&jk.adjoint());
            h = h.add(&hop.scale_re(-t));
        }
        let defect = h.hermiticity_defect();
        if !h.is_hermitian(HERMITICITY_TOL) {
            return Err(Error::NotHermitian { defect });
        }
        Ok(h)
    }
}

/// The two-site model with on-site interaction `U`, inter-site hopping `t1`
/// and on-site spin flips `t2`, in the default mode labeling.
pub fn build_hubbard_spinflip(u: f64, t1: f64, t2: f64) -> FermionHamiltonian {
    build_hubbard_spinflip_with(u, t1, t2, &ModeRelabeling::two_site_default())
}

/// Same model under an arbitrary (site, spin) → mode relabeling.
pub fn build_hubbard_spinflip_with(
    u: f64,
    t1: f64,
    t2: f64,
    labels: &ModeRelabeling,
) -> FermionHamiltonian {
    let m = |site, spin| labels.mode(site, spin);
    let mut hoppings = Vec::new();
    let mut onsite_pairs = Vec::new();
    if u != 0.0 {
        for site in 1..=2 {
            onsite_pairs.push((m(site, Spin::Up), m(site, Spin::Down), u));
        }
    }
    if t1 != 0.0 {
        for spin in [Spin::Up, Spin::Down] {
            hoppings.push((m(1, spin), m(2, spin), t1));
        }
    }
    if t2 != 0.0 {
        for site in 1..=2 {
            hoppings.push((m(site, Spin::Up), m(site, Spin::Down), t2));
        }
    }
    FermionHamiltonian {
        n_modes: labels.n_modes(),
        hoppings,
        interactions: Vec::new(),
        onsite_pairs,
    }
}

/// A normal-ordered fermionic monomial the inverse map projects onto.
///
/// Beyond the Hubbard fields (hoppings, numbers, density-density pairs) the
/// basis carries correlated hoppings `c†_j c_k ∏ n_l` and higher density
/// products: disorder derived from transported-gate circuits stays particle
/// conserving but leaves the plain hopping/density class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FermionTerm {
    Constant,
    /// c_j
    Annihilate(usize),
    /// c†_j
    Create(usize),
    /// c†_j c_k; j = k is the number operator n_j.
    Quadratic { create: usize, annihilate: usize },
    /// n_j n_k with j < k.
    DensityDensity { j: usize, k: usize },
    /// c†_j c_k · ∏_{l∈density} n_l with j ≠ k and the density modes
    /// disjoint from {j, k}.
    CorrelatedHop {
        create: usize,
        annihilate: usize,
        density: Vec<usize>,
    },
    /// ∏_{j∈S} n_j for |S| ≥ 3, ascending.
    DensityProduct(Vec<usize>),
}

impl FermionTerm {
    pub fn realize(&self, n_modes: usize) -> Result<OperatorSum> {
        use LadderKind::*;
        Ok(match self {
            FermionTerm::Constant => OperatorSum::identity(n_modes),
            FermionTerm::Annihilate(j) => jordan_wigner(*j, Annihilate, n_modes)?,
            FermionTerm::Create(j) => jordan_wigner(*j, Create, n_modes)?,
            FermionTerm::Quadratic { create, annihilate } => {
                jordan_wigner(*create, Create, n_modes)?
                    .mul(&jordan_wigner(*annihilate, Annihilate, n_modes)?)
            }
            FermionTerm::DensityDensity { j, k } => {
                OperatorSum::number(n_modes, *j)?.mul(&OperatorSum::number(n_modes, *k)?)
            }
            FermionTerm::CorrelatedHop {
                create,
                annihilate,
                density,
            } => {
                let mut op = jordan_wigner(*create, Create, n_modes)?
                    .mul(&jordan_wigner(*annihilate, Annihilate, n_modes)?);
                for &l in density {
                    op = op.mul(&OperatorSum::number(n_modes, l)?);
                }
                op
            }
            FermionTerm::DensityProduct(modes) => {
                let mut op = OperatorSum::identity(n_modes);
                for &l in modes {
                    op = op.mul(&OperatorSum::number(n_modes, l)?);
                }
                op
            }
        })
    }

    fn describe(&self) -> String {
        match self {
            FermionTerm::Constant => String::from("1"),
            FermionTerm::Annihilate(j) => alloc::format!("c_{j}"),
            FermionTerm::Create(j) => alloc::format!("c+_{j}"),
            FermionTerm::Quadratic { create, annihilate } if create == annihilate => {
                alloc::format!("n_{create}")
            }
            FermionTerm::Quadratic { create, annihilate } => {
                alloc::format!("c+_{create} c_{annihilate}")
            }
            FermionTerm::DensityDensity { j, k } => alloc::format!("n_{j} n_{k}"),
            FermionTerm::CorrelatedHop {
                create,
                annihilate,
                density,
            } => {
                let mut s = alloc::format!("c+_{create} c_{annihilate}");
                for l in density {
                    s.push_str(&alloc::format!(" n_{l}"));
                }
                s
            }
            FermionTerm::DensityProduct(modes) => {
                let mut s = String::new();
                for (i, l) in modes.iter().enumerate() {
                    if i > 0 {
                        s.push(' ');
                    }
                    s.push_str(&alloc::format!("n_{l}"));
                }
                s
            }
        }
    }
}

/// Complex-weighted sum of fermionic monomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FermionExpr {
    pub n_modes: usize,
    pub terms: Vec<(FermionTerm, C64)>,
}

impl FermionExpr {
    pub fn realize(&self) -> Result<OperatorSum> {
        let mut op = OperatorSum::zero(self.n_modes);
        for (t, c) in &self.terms {
            op = op.add(&t.realize(self.n_modes)?.scale(*c));
        }
        Ok(op)
    }
}

impl core::fmt::Display for FermionExpr {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (t, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:+.6e}{:+.6e}i) {}", c.re, c.im, t.describe())?;
        }
        Ok(())
    }
}

/// Ascending subsets of {1..n_modes} with at least `min_size` elements.
fn mode_subsets(n_modes: usize, exclude: &[usize], min_size: usize) -> Vec<Vec<usize>> {
    let candidates: Vec<usize> = (1..=n_modes).filter(|m| !exclude.contains(m)).collect();
    let mut out = Vec::new();
    for mask in 0..(1usize << candidates.len()) {
        let subset: Vec<usize> = candidates
            .iter()
            .enumerate()
            .filter(|(i, _)| (mask >> i) & 1 == 1)
            .map(|(_, &m)| m)
            .collect();
        if subset.len() >= min_size {
            out.push(subset);
        }
    }
    out
}

/// All monomials the inverse map projects onto: constant, bare ladders,
/// quadratics (strings included), density products, and density-dressed
/// hoppings.
pub fn full_basis(n_modes: usize) -> Vec<FermionTerm> {
    let mut basis = vec![FermionTerm::Constant];
    for j in 1..=n_modes {
        basis.push(FermionTerm::Annihilate(j));
        basis.push(FermionTerm::Create(j));
    }
    for j in 1..=n_modes {
        for k in 1..=n_modes {
            basis.push(FermionTerm::Quadratic {
                create: j,
                annihilate: k,
            });
        }
    }
    for j in 1..=n_modes {
        for k in (j + 1)..=n_modes {
            basis.push(FermionTerm::DensityDensity { j, k });
        }
    }
    for subset in mode_subsets(n_modes, &[], 3) {
        basis.push(FermionTerm::DensityProduct(subset));
    }
    for j in 1..=n_modes {
        for k in 1..=n_modes {
            if j == k {
                continue;
            }
            for density in mode_subsets(n_modes, &[j, k], 1) {
                basis.push(FermionTerm::CorrelatedHop {
                    create: j,
                    annihilate: k,
                    density,
                });
            }
        }
    }
    basis
}

/// The particle-number-conserving subset of [`full_basis`]: everything
/// except the bare ladder operators.  An operator lies in its span exactly
/// when it commutes with the total number operator and moves at most one
/// particle at a time, which covers the disorder of every circuit variant
/// whose gates conserve occupation.
pub fn conserving_basis(n_modes: usize) -> Vec<FermionTerm> {
    full_basis(n_modes)
        .into_iter()
        .filter(|t| !matches!(t, FermionTerm::Annihilate(_) | FermionTerm::Create(_)))
        .collect()
}

/// Least-squares projection of `op` onto the Jordan-Wigner images of
/// `basis`; returns the fermionic expression and the exact residual.
pub fn project_onto_terms(
    op: &OperatorSum,
    basis: &[FermionTerm],
) -> Result<(FermionExpr, OperatorSum)> {
    let n_modes = op.n_qubits();
    let realized: Vec<OperatorSum> = basis
        .iter()
        .map(|t| t.realize(n_modes))
        .collect::<Result<_>>()?;

    // Index the union of Pauli strings; strings are orthonormal, so the
    // coefficient vectors carry the full inner-product structure.
    let mut strings: Vec<Vec<Pauli>> = Vec::new();
    let index_of = |factors: &Vec<Pauli>, strings: &mut Vec<Vec<Pauli>>| {
        match strings.iter().position(|s| s == factors) {
            Some(i) => i,
            None => {
                strings.push(factors.clone());
                strings.len() - 1
            }
        }
    };
    let mut basis_vecs: Vec<Vec<(usize, C64)>> = Vec::new();
    for r in &realized {
        let mut v = Vec::new();
        for t in r.terms() {
            v.push((index_of(&t.factors, &mut strings), t.coeff));
        }
        basis_vecs.push(v);
    }
    let mut op_vec = Vec::new();
    for t in op.terms() {
        op_vec.push((index_of(&t.factors, &mut strings), t.coeff));
    }

    let dim = strings.len();
    let k = basis.len();
    let dense_col = |v: &[(usize, C64)]| {
        let mut col = vec![C64::new(0.0, 0.0); dim];
        for &(i, c) in v {
            col[i] = c;
        }
        col
    };
    let cols: Vec<Vec<C64>> = basis_vecs.iter().map(|v| dense_col(v)).collect();
    let b = dense_col(&op_vec);

    // Normal equations G x = rhs with G = B†B.
    let mut g = CMatrix::zeros(k);
    for i in 0..k {
        for j in 0..k {
            let mut acc = C64::new(0.0, 0.0);
            for s in 0..dim {
                acc += cols[i][s].conj() * cols[j][s];
            }
            g[(i, j)] = acc;
        }
    }
    let mut rhs = vec![C64::new(0.0, 0.0); k];
    for i in 0..k {
        let mut acc = C64::new(0.0, 0.0);
        for s in 0..dim {
            acc += cols[i][s].conj() * b[s];
        }
        rhs[i] = acc;
    }

    let eig = dense::eigh(&g);
    let lam_max = eig.eigenvalues.last().copied().unwrap_or(0.0).max(1e-300);
    // x = V Λ⁺ V† rhs
    let vh_rhs = {
        let mut out = vec![C64::new(0.0, 0.0); k];
        for c in 0..k {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..k {
                acc += eig.vectors[(r, c)].conj() * rhs[r];
            }
            out[c] = acc;
        }
        out
    };
    let mut x = vec![C64::new(0.0, 0.0); k];
    for r in 0..k {
        let mut acc = C64::new(0.0, 0.0);
        for c in 0..k {
            let lam = eig.eigenvalues[c];
            if lam > 1e-12 * lam_max {
                acc += eig.vectors[(r, c)] * (vh_rhs[c] / lam);
            }
        }
        x[r] = acc;
    }

    let mut residual = op.clone();
    let mut terms = Vec::new();
    for (i, coeff) in x.iter().enumerate() {
        if coeff.norm() > 1e-10 {
            residual = residual.sub(&realized[i].scale(*coeff));
            terms.push((basis[i].clone(), *coeff));
        }
    }
    Ok((FermionExpr { n_modes, terms }, residual))
}

/// Inverse Jordan-Wigner map: fermionic expression plus whatever cannot be
/// written in the monomial basis (reported, not an error).
pub fn inverse_jordan_wigner(op: &OperatorSum) -> Result<(FermionExpr, OperatorSum)> {
    project_onto_terms(op, &full_basis(op.n_qubits()))
}
