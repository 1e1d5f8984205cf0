//! Derivation of the effective disorder operator δH_m per Trotter step.
//!
//! Pulling every error factor `exp(i δφ A)` to the left of the step unitary
//! conjugates its generator through all large-angle gates applied after it;
//! commuting through Trotter-angle rotations only contributes second-order
//! corrections and is skipped.  Writing the product of the commuted factors
//! as `exp(−i δH τ/n)` gives
//!
//!   δH_m = −(n/τ) Σ_i δφ_{m,i} · Ad_{large gates after i}(A_i),
//!
//! which reduces to the per-gate templates of the direct-implementation case
//! (U gates contribute `+(n/τ) δφ n_a n_b`, hopping gates
//! `−(n/τ) δφ (σ⁺σ⁻ + σ⁻σ⁺)`) because the written sign of each gate lives in
//! its stored generator.  Conjugation is exact through the Clifford tables;
//! non-Clifford large gates fall back to dense conjugation.
//!
//! The chain helpers reproduce the closed forms for an error on the first
//! gate of a descending CNOT or iSWAP chain: the nested projector recursion
//! `Σ±_j = (n_j − Σ±_{j−1})²` and the string-dressed hopping pair.  Both
//! are fixed against dense iterated conjugation, not against any printed
//! convention.

use alloc::vec::Vec;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fermion::{conserving_basis, project_onto_terms, FermionExpr};
use crate::gates::{ErrorRealization, Gate, GateLabel, TrotterProgram};
use crate::pauli::{OperatorSum, Pauli};
use crate::HERMITICITY_TOL;

/// One commuted error term with its provenance.
#[derive(Debug, Clone, Serialize)]
pub struct DisorderContribution {
    pub gate_index: usize,
    pub gate_label: GateLabel,
    pub support: Vec<usize>,
    pub delta_phi: f64,
    pub term: OperatorSum,
}

/// Per-step effective disorder operators δH_m (units of g) with term-level
/// provenance and the triangle-inequality norm bound
/// `(n/τ) Σ_g |δφ_g| ‖A_g‖` per step.
#[derive(Debug, Clone, Serialize)]
pub struct DisorderTrace {
    pub n_qubits: usize,
    pub n_steps: usize,
    pub n_over_tau: f64,
    pub per_step: Vec<OperatorSum>,
    pub provenance: Vec<Vec<DisorderContribution>>,
    pub norm_bounds: Vec<f64>,
}

impl DisorderTrace {
    pub fn step(&self, m: usize) -> &OperatorSum {
        &self.per_step[m]
    }
}

/// Disorder term of a gate that directly implements a Hamiltonian term
/// (labels U, t1, t2): `−(n/τ) δφ · A` with the gate's signed generator.
pub fn derive_case1(gate: &Gate, delta_phi: f64, n_over_tau: f64) -> Result<OperatorSum> {
    match gate.label {
        GateLabel::U | GateLabel::T1 | GateLabel::T2 => {
            Ok(gate.generator.scale_re(-n_over_tau * delta_phi))
        }
        other => Err(Error::NotHamiltonianTerm {
            label: alloc::format!("{other}"),
        }),
    }
}

/// Disorder operator of a decomposed block: every error generator is
/// conjugated through the large-angle gates applied after it, then summed
/// with weight `−(n/τ) δφ`.
pub fn derive_case2(sequence: &[(Gate, f64)], n_over_tau: f64) -> Result<OperatorSum> {
    let n_qubits = sequence.first().map(|(g, _)| g.n_qubits()).unwrap_or(1);
    let mut total = OperatorSum::zero(n_qubits);
    for (i, (gate, delta_phi)) in sequence.iter().enumerate() {
        if *delta_phi == 0.0 {
            continue;
        }
        let mut w = gate.generator.clone();
        for (later, _) in &sequence[i + 1..] {
            if later.is_large() {
                w = later.conjugate_through(&w);
            }
        }
        total = total.add(&w.scale_re(-n_over_tau * delta_phi));
    }
    Ok(total)
}

fn derive_step(
    step_gates: &[Gate],
    deltas: &[f64],
    n_over_tau: f64,
    n_qubits: usize,
) -> (OperatorSum, Vec<DisorderContribution>) {
    let mut total = OperatorSum::zero(n_qubits);
    let mut contributions = Vec::new();
    for (i, gate) in step_gates.iter().enumerate() {
        let delta_phi = deltas[i];
        if delta_phi == 0.0 {
            continue;
        }
        let mut w = gate.generator.clone();
        for later in &step_gates[i + 1..] {
            if later.is_large() {
                w = later.conjugate_through(&w);
            }
        }
        let term = w.scale_re(-n_over_tau * delta_phi);
        total = total.add(&term);
        contributions.push(DisorderContribution {
            gate_index: i,
            gate_label: gate.label,
            support: gate.support.clone(),
            delta_phi,
            term,
        });
    }
    (total, contributions)
}

/// Effective disorder δH_m for every Trotter step of a program under a
/// given error realization, with full per-term provenance.
pub fn derive_trace(
    program: &TrotterProgram,
    realization: &ErrorRealization,
) -> Result<DisorderTrace> {
    derive_trace_impl(program, realization, true)
}

/// Like [`derive_trace`] but without the provenance lists; preferred for
/// long runs where only the per-step operators feed the effective backend.
pub fn derive_trace_terms_only(
    program: &TrotterProgram,
    realization: &ErrorRealization,
) -> Result<DisorderTrace> {
    derive_trace_impl(program, realization, false)
}

fn derive_trace_impl(
    program: &TrotterProgram,
    realization: &ErrorRealization,
    keep_provenance: bool,
) -> Result<DisorderTrace> {
    if realization.n_steps != program.n_steps
        || realization.gates_per_step != program.step_gates.len()
    {
        return Err(Error::TraceLengthMismatch {
            got: realization.n_steps,
            expected: program.n_steps,
        });
    }
    let n_over_tau = program.n_over_tau();
    let gate_norms: Vec<f64> = program
        .step_gates
        .iter()
        .map(|g| g.generator.spectral_norm())
        .collect();

    let mut per_step = Vec::with_capacity(program.n_steps);
    let mut provenance = Vec::with_capacity(if keep_provenance { program.n_steps } else { 0 });
    let mut norm_bounds = Vec::with_capacity(program.n_steps);
    for step in 0..program.n_steps {
        let deltas = realization.step_values(step);
        let (total, contribs) =
            derive_step(&program.step_gates, deltas, n_over_tau, program.n_qubits);
        debug_assert!(total.is_hermitian(HERMITICITY_TOL));
        let bound: f64 = deltas
            .iter()
            .zip(&gate_norms)
            .map(|(d, n)| libm::fabs(*d) * n)
            .sum::<f64>()
            * n_over_tau;
        per_step.push(total);
        if keep_provenance {
            provenance.push(contribs);
        }
        norm_bounds.push(bound);
    }
    Ok(DisorderTrace {
        n_qubits: program.n_qubits,
        n_steps: program.n_steps,
        n_over_tau,
        per_step,
        provenance,
        norm_bounds,
    })
}

/// The Hamiltonian factors H_j realized by the slots of a Trotter step.
///
/// Within one slot the large-angle gates cancel pairwise, so the slot
/// unitary is the product of its small rotations conjugated through the
/// later large gates; scaling the conjugated rotation axes by −angle/dt
/// recovers the Hamiltonian term the slot implements (the same engine as
/// the disorder derivation, fed with the nominal angles).
pub fn slot_hamiltonians(program: &TrotterProgram) -> Vec<OperatorSum> {
    let inv_dt = 1.0 / program.dt();
    program
        .slot_ranges()
        .into_iter()
        .map(|range| {
            let gates = &program.step_gates[range];
            let angles: Vec<f64> = gates
                .iter()
                .map(|g| if g.is_large() { 0.0 } else { g.nominal_angle })
                .collect();
            derive_step(gates, &angles, inv_dt, program.n_qubits).0
        })
        .collect()
}

/// δH per slot for one step: the disorder of each slot's own gates,
/// conjugated within the slot (cross-slot conjugators cancel to identity).
pub fn slot_disorder(
    program: &TrotterProgram,
    realization: &ErrorRealization,
    step: usize,
) -> Vec<OperatorSum> {
    let n_over_tau = program.n_over_tau();
    let deltas = realization.step_values(step);
    program
        .slot_ranges()
        .into_iter()
        .map(|range| {
            derive_step(
                &program.step_gates[range.clone()],
                &deltas[range],
                n_over_tau,
                program.n_qubits,
            )
            .0
        })
        .collect()
}

/// Split of a disorder operator into Hubbard-class fermionic content
/// (constant, hoppings, numbers, density-density) and everything else.
#[derive(Debug, Clone, Serialize)]
pub struct DisorderClassification {
    pub physical: FermionExpr,
    pub residual: OperatorSum,
}

impl DisorderClassification {
    pub fn residual_norm(&self) -> f64 {
        self.residual.coeff_norm()
    }
}

/// Decompose δH into particle-conserving fermionic terms and a residual;
/// the residual is nonzero exactly when the operator leaves the
/// hopping/density class, as CNOT-chain errors do.
pub fn classify(delta_h: &OperatorSum) -> Result<DisorderClassification> {
    let (physical, residual) = project_onto_terms(delta_h, &conserving_basis(delta_h.n_qubits()))?;
    Ok(DisorderClassification { physical, residual })
}

/// Nested projector Σ±_j: Σ±₁ = σ⁺₁σ⁻₁ and Σ±_j = (σ⁺_jσ⁻_j − Σ±_{j−1})².
pub fn nested_sigma_pm(j: usize, n_qubits: usize) -> Result<OperatorSum> {
    if j == 0 || j > n_qubits {
        return Err(Error::QubitOutOfRange {
            index: j,
            n_qubits,
        });
    }
    let mut acc = OperatorSum::number(n_qubits, 1)?;
    for k in 2..=j {
        let d = OperatorSum::number(n_qubits, k)?.sub(&acc);
        acc = d.mul(&d);
    }
    Ok(acc)
}

/// Descending chain of CNOTs on an `m`-qubit array: the first applied gate
/// acts on (m−1, m), the last on (1, 2); controls sit on the lower index.
pub fn build_cnot_chain(m: usize) -> Result<Vec<Gate>> {
    if m < 2 {
        return Err(Error::QubitOutOfRange {
            index: m,
            n_qubits: 2,
        });
    }
    (0..m - 1)
        .map(|i| Gate::cnot(m, m - 1 - i, m - i))
        .collect()
}

/// Descending chain of iSWAPs, same layout as [`build_cnot_chain`].
pub fn build_iswap_chain(m: usize) -> Result<Vec<Gate>> {
    if m < 2 {
        return Err(Error::QubitOutOfRange {
            index: m,
            n_qubits: 2,
        });
    }
    (0..m - 1)
        .map(|i| Gate::iswap(m, m - 1 - i, m - i, false))
        .collect()
}

/// Closed form of an error generator on the first chain CNOT commuted
/// through the rest of the chain: `(1 − σˣ_m) Σ±_{m−1}`.
pub fn cnot_chain_conjugated(m: usize) -> Result<OperatorSum> {
    let one_minus_x = OperatorSum::identity(m).sub(&OperatorSum::pauli(m, m, Pauli::X)?);
    Ok(one_minus_x.mul(&nested_sigma_pm(m - 1, m)?))
}

/// Closed form for the iSWAP chain: a string-dressed hopping pair
/// `i^{m−2} ∏_{k=2}^{m−1}(−σᶻ_k) (σ⁺₁σ⁻_m + (−1)^{m−2} σ⁻₁σ⁺_m)`,
/// with the phase fixed against dense iterated conjugation.
pub fn iswap_chain_conjugated(m: usize) -> Result<OperatorSum> {
    use crate::dense::C64;
    let mut string = OperatorSum::identity(m);
    for k in 2..m {
        string = string.mul(&OperatorSum::pauli(m, k, Pauli::Z)?.scale_re(-1.0));
    }
    let fwd = OperatorSum::sigma_plus(m, 1)?.mul(&OperatorSum::sigma_minus(m, m)?);
    let bwd = OperatorSum::sigma_minus(m, 1)?.mul(&OperatorSum::sigma_plus(m, m)?);
    let parity = if (m - 2) % 2 == 0 { 1.0 } else { -1.0 };
    let phase = match (m - 2) % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    };
    Ok(string.mul(&fwd.add(&bwd.scale_re(parity))).scale(phase))
}

/// Conjugate the first chain gate's generator through the rest of the chain
/// using the exact per-gate engine (shared with [`derive_case2`]).
pub fn chain_conjugated_operator(chain: &[Gate]) -> OperatorSum {
    let mut w = chain[0].generator.clone();
    for gate in &chain[1..] {
        w = gate.conjugate_through(&w);
    }
    w
}
