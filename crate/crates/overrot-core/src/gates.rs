//! Gate library, over-rotation noise channels, and Trotter-step assembly.
//!
//! Every gate is stored as `exp(i (φ + δφ) A)` with a written angle `φ ≥ 0`
//! and the sign of the written exponent absorbed into the generator `A`, so
//! an over-rotation δφ always deepens the rotation in the written direction.
//! The on-site interaction gate `exp(−i U τ/n · n_a n_b)` therefore carries
//! generator `−n_a n_b`, while hopping gates `exp(+i t τ/n (σ⁺σ⁻ + σ⁻σ⁺))`
//! carry the bare hopping generator.
//!
//! One Trotter step of the two-site spin-flip Hubbard model applies, left to
//! right: the two on-site `U` gates, the two hopping `t₁` gates, the direct
//! spin-flip `t₂` gate, and the string-dressed spin-flip block `t₂′`, whose
//! decomposition is selected by [`Variant`]:
//!
//! * [`Variant::CzChain`] — conjugate a two-qubit `t₂` gate between the
//!   outer modes by a string of CZ gates.
//! * [`Variant::CnotChain`] — implement the two string-dressed half-terms
//!   via nearest-neighbour CNOT ladders with error-free single-qubit basis
//!   changes folded into the gate generators.
//! * [`Variant::IswapChain`] — transport the distant CZ with ±iSWAP pairs.
//!
//! All three decompositions are exact identities, so the zero-noise step
//! unitaries agree to machine precision across variants.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::clifford::{conjugate_by_dense, hop_generator, CliffordAction, CliffordGate};
use crate::dense::{self, CMatrix, C64};
use crate::error::{Error, Result};
use crate::pauli::{exp_unitary, OperatorSum, Pauli, PauliTerm};
use crate::rng;

/// Role of a gate in the algorithm; doubles as the provenance label of the
/// disorder terms it generates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateLabel {
    U,
    T1,
    T2,
    Cz,
    Cnot,
    ISwap,
    InvISwap,
}

impl core::fmt::Display for GateLabel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let s = match self {
            GateLabel::U => "U",
            GateLabel::T1 => "t1",
            GateLabel::T2 => "t2",
            GateLabel::Cz => "CZ",
            GateLabel::Cnot => "CNOT",
            GateLabel::ISwap => "iSWAP",
            GateLabel::InvISwap => "-iSWAP",
        };
        write!(f, "{s}")
    }
}

/// How an error factor is commuted through this gate when pulled out of the
/// step.  Trotter-angle rotations are "small": commuting through them only
/// produces second-order corrections, which are dropped.
#[derive(Debug, Clone)]
enum Conjugator {
    Small,
    Clifford(CliffordAction),
    Dense(CMatrix),
}

/// A unitary `exp(i (nominal_angle + δφ) generator)` on the full register.
#[derive(Debug, Clone)]
pub struct Gate {
    pub label: GateLabel,
    /// Supporting qubits in semantic order (control first where applicable).
    pub support: Vec<usize>,
    pub generator: OperatorSum,
    /// Written rotation magnitude, ≥ 0.
    pub nominal_angle: f64,
    /// Whether the gate receives over-rotations; single-qubit rotations are
    /// treated as exact.
    pub noisy: bool,
    conjugator: Conjugator,
}

fn check_pair(n_qubits: usize, a: usize, b: usize) -> Result<()> {
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

/// Extract the restriction of `op` to `support` as an operator on
/// `support.len()` local qubits; requires `op` to act trivially elsewhere.
fn local_on_support(op: &OperatorSum, support: &[usize]) -> Result<OperatorSum> {
    let k = support.len();
    let mut terms = Vec::new();
    for t in op.terms() {
        let mut local = vec![Pauli::I; k];
        for (pos, p) in t.factors.iter().enumerate() {
            if *p == Pauli::I {
                continue;
            }
            match support.iter().position(|&q| q == pos + 1) {
                Some(slot) => local[slot] = *p,
                None => {
                    return Err(Error::RegisterOverflow {
                        needed: pos + 1,
                        given: k,
                    })
                }
            }
        }
        terms.push(PauliTerm::new(t.coeff, local));
    }
    OperatorSum::from_terms(k, terms)
}

impl Gate {
    /// Controlled Z written as `exp(iπ σ⁺_cσ⁻_c σ⁻_tσ⁺_t)`.
    pub fn cz(n_qubits: usize, control: usize, target: usize) -> Result<Self> {
        check_pair(n_qubits, control, target)?;
        let nc = OperatorSum::number(n_qubits, control)?;
        let empty_t =
            OperatorSum::identity(n_qubits).sub(&OperatorSum::number(n_qubits, target)?);
        let generator = nc.mul(&empty_t);
        let action = CliffordAction::from_gate(&CliffordGate::Cz { control, target });
        Ok(Self {
            label: GateLabel::Cz,
            support: vec![control, target],
            generator,
            nominal_angle: core::f64::consts::PI,
            noisy: true,
            conjugator: Conjugator::Clifford(action),
        })
    }

    /// Controlled NOT written as `exp(i π/2 σ⁺_cσ⁻_c (1 − σˣ_t))`.
    pub fn cnot(n_qubits: usize, control: usize, target: usize) -> Result<Self> {
        check_pair(n_qubits, control, target)?;
        let nc = OperatorSum::number(n_qubits, control)?;
        let one_minus_x = OperatorSum::identity(n_qubits)
            .sub(&OperatorSum::pauli(n_qubits, target, Pauli::X)?);
        let generator = nc.mul(&one_minus_x);
        let action = CliffordAction::from_gate(&CliffordGate::Cnot { control, target });
        Ok(Self {
            label: GateLabel::Cnot,
            support: vec![control, target],
            generator,
            nominal_angle: core::f64::consts::FRAC_PI_2,
            noisy: true,
            conjugator: Conjugator::Clifford(action),
        })
    }

    /// `exp(± i π/2 (σ⁺_aσ⁻_b + σ⁻_aσ⁺_b))`; the minus sign selects the
    /// inverse gate used to transport excitations back.
    pub fn iswap(n_qubits: usize, a: usize, b: usize, inverse: bool) -> Result<Self> {
        check_pair(n_qubits, a, b)?;
        let hop = hop_generator(n_qubits, a, b)?;
        let (label, generator, tag) = if inverse {
            (
                GateLabel::InvISwap,
                hop.scale_re(-1.0),
                CliffordGate::InvISwap { a, b },
            )
        } else {
            (GateLabel::ISwap, hop, CliffordGate::ISwap { a, b })
        };
        Ok(Self {
            label,
            support: vec![a, b],
            generator,
            nominal_angle: core::f64::consts::FRAC_PI_2,
            noisy: true,
            conjugator: Conjugator::Clifford(CliffordAction::from_gate(&tag)),
        })
    }

    /// On-site interaction gate `exp(−i u·dt · n_a n_b)`.
    pub fn onsite(n_qubits: usize, a: usize, b: usize, u: f64, dt: f64) -> Result<Self> {
        check_pair(n_qubits, a, b)?;
        let nn = OperatorSum::number(n_qubits, a)?.mul(&OperatorSum::number(n_qubits, b)?);
        let sign = if u >= 0.0 { -1.0 } else { 1.0 };
        Ok(Self {
            label: GateLabel::U,
            support: vec![a, b],
            generator: nn.scale_re(sign),
            nominal_angle: libm::fabs(u) * dt,
            noisy: true,
            conjugator: Conjugator::Small,
        })
    }

    /// Hopping / spin-flip gate `exp(+i t·dt (σ⁺_aσ⁻_b + σ⁻_aσ⁺_b))`.
    pub fn hopping(
        n_qubits: usize,
        label: GateLabel,
        a: usize,
        b: usize,
        t: f64,
        dt: f64,
    ) -> Result<Self> {
        check_pair(n_qubits, a, b)?;
        let hop = hop_generator(n_qubits, a, b)?;
        let sign = if t >= 0.0 { 1.0 } else { -1.0 };
        Ok(Self {
            label,
            support: vec![a, b],
            generator: hop.scale_re(sign),
            nominal_angle: libm::fabs(t) * dt,
            noisy: true,
            conjugator: Conjugator::Small,
        })
    }

    /// Trotter-angle rotation around an arbitrary Hermitian axis; used for
    /// the exact single-qubit rotations inside the CNOT-ladder blocks.
    pub fn rotation(
        label: GateLabel,
        support: Vec<usize>,
        generator: OperatorSum,
        angle: f64,
        noisy: bool,
    ) -> Self {
        Self {
            label,
            support,
            generator,
            nominal_angle: angle,
            noisy,
            conjugator: Conjugator::Small,
        }
    }

    /// A large-angle gate given by an explicit (possibly frame-folded)
    /// generator on one or two support qubits.  Prefers an exact Clifford
    /// table; falls back to dense conjugation for non-Clifford unitaries.
    pub fn large(
        label: GateLabel,
        support: Vec<usize>,
        generator: OperatorSum,
        angle: f64,
        n_qubits: usize,
    ) -> Result<Self> {
        let conjugator = if support.len() <= 2 {
            match local_on_support(&generator, &support) {
                Ok(local) => {
                    let u = exp_unitary(&local, angle, support.len())?;
                    match CliffordAction::from_dense(&u, support.clone()) {
                        Ok(action) => Conjugator::Clifford(action),
                        Err(Error::NotClifford) => {
                            Conjugator::Dense(exp_unitary(&generator, angle, n_qubits)?)
                        }
                        Err(e) => return Err(e),
                    }
                }
                Err(_) => Conjugator::Dense(exp_unitary(&generator, angle, n_qubits)?),
            }
        } else {
            Conjugator::Dense(exp_unitary(&generator, angle, n_qubits)?)
        };
        Ok(Self {
            label,
            support,
            generator,
            nominal_angle: angle,
            noisy: true,
            conjugator,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.generator.n_qubits()
    }

    /// Dense unitary at the given over-rotation.
    pub fn unitary(&self, delta_phi: f64) -> CMatrix {
        exp_unitary(
            &self.generator,
            self.nominal_angle + delta_phi,
            self.n_qubits(),
        )
        .expect("gate generators are Hermitian by construction")
    }

    /// Whether error factors must be conjugated through this gate.
    pub fn is_large(&self) -> bool {
        !matches!(self.conjugator, Conjugator::Small)
    }

    /// Whether the conjugation stays in the exact Clifford path.
    pub fn conjugates_exactly(&self) -> bool {
        matches!(self.conjugator, Conjugator::Clifford(_))
    }

    /// `Ad_gate(op)` for large gates; identity for small rotations (their
    /// contribution to commuted errors is second order).
    pub fn conjugate_through(&self, op: &OperatorSum) -> OperatorSum {
        match &self.conjugator {
            Conjugator::Small => op.clone(),
            Conjugator::Clifford(action) => action.conjugate(op),
            Conjugator::Dense(u) => conjugate_by_dense(u, op),
        }
    }
}

impl Serialize for Gate {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> core::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            label: GateLabel,
            support: &'a [usize],
            angle: f64,
            noisy: bool,
            generator: &'a OperatorSum,
        }
        Repr {
            label: self.label,
            support: &self.support,
            angle: self.nominal_angle,
            noisy: self.noisy,
            generator: &self.generator,
        }
        .serialize(ser)
    }
}

/// Implementation choice for the string-dressed spin-flip block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    CzChain,
    CnotChain,
    IswapChain,
}

impl core::fmt::Display for Variant {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let s = match self {
            Variant::CzChain => "cz_chain",
            Variant::CnotChain => "cnot_chain",
            Variant::IswapChain => "iswap_chain",
        };
        write!(f, "{s}")
    }
}

impl core::str::FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> core::result::Result<Self, String> {
        match s {
            "cz_chain" | "cz" => Ok(Variant::CzChain),
            "cnot_chain" | "cnot" => Ok(Variant::CnotChain),
            "iswap_chain" | "iswap" => Ok(Variant::IswapChain),
            other => Err(alloc::format!("unknown variant '{other}'")),
        }
    }
}

/// Model couplings in units of the energy scale g.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HubbardParams {
    pub u: f64,
    pub t1: f64,
    pub t2: f64,
}

/// Ordered gate sequence of one Trotter step, repeated `n_steps` times.
///
/// `slot_bounds` partitions the step into the factors of the Hamiltonian
/// split `H = Σ_j H_j`: every directly implemented term is one slot and the
/// whole string-dressed block is one slot.  Entry `j` is the start index of
/// slot `j`; a final entry equals `step_gates.len()`.
#[derive(Debug, Clone)]
pub struct TrotterProgram {
    pub n_qubits: usize,
    pub variant: Variant,
    pub model: HubbardParams,
    pub n_steps: usize,
    /// Total simulated time in units of 1/g.
    pub total_time: f64,
    pub step_gates: Vec<Gate>,
    pub slot_bounds: Vec<usize>,
}

/// Reproducibility descriptor; rebuilding from it yields the same program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramSpec {
    pub variant: Variant,
    pub model: HubbardParams,
    pub n_steps: usize,
    pub total_time: f64,
}

impl TrotterProgram {
    pub fn build(
        model: HubbardParams,
        variant: Variant,
        total_time: f64,
        n_steps: usize,
    ) -> Result<Self> {
        if total_time <= 0.0 {
            return Err(Error::NotPositive {
                what: "total_time",
                value: total_time,
            });
        }
        if n_steps == 0 {
            return Err(Error::NotPositive {
                what: "n_steps",
                value: 0.0,
            });
        }
        let dt = total_time / n_steps as f64;
        let (step_gates, slot_bounds) = build_trotter_step_slotted(&model, dt, variant)?;
        Ok(Self {
            n_qubits: 4,
            variant,
            model,
            n_steps,
            total_time,
            step_gates,
            slot_bounds,
        })
    }

    pub fn from_spec(spec: &ProgramSpec) -> Result<Self> {
        Self::build(spec.model, spec.variant, spec.total_time, spec.n_steps)
    }

    pub fn spec(&self) -> ProgramSpec {
        ProgramSpec {
            variant: self.variant,
            model: self.model,
            n_steps: self.n_steps,
            total_time: self.total_time,
        }
    }

    /// Step duration τ/n in units of 1/g.
    pub fn dt(&self) -> f64 {
        self.total_time / self.n_steps as f64
    }

    /// Disorder prefactor n/τ in units of g.
    pub fn n_over_tau(&self) -> f64 {
        self.n_steps as f64 / self.total_time
    }

    /// Number of noisy gates per Trotter step (the M of the gate budget).
    pub fn noisy_gate_count(&self) -> usize {
        self.step_gates.iter().filter(|g| g.noisy).count()
    }

    /// Gate-index ranges of the Hamiltonian-split slots.
    pub fn slot_ranges(&self) -> Vec<core::ops::Range<usize>> {
        self.slot_bounds
            .windows(2)
            .map(|w| w[0]..w[1])
            .collect()
    }
}

impl Serialize for TrotterProgram {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> core::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            n_qubits: usize,
            variant: Variant,
            model: HubbardParams,
            n_steps: usize,
            total_time: f64,
            step_gates: &'a [Gate],
        }
        Repr {
            n_qubits: self.n_qubits,
            variant: self.variant,
            model: self.model,
            n_steps: self.n_steps,
            total_time: self.total_time,
            step_gates: &self.step_gates,
        }
        .serialize(ser)
    }
}

/// One Trotter step for the two-site spin-flip Hubbard model on 4 qubits.
/// Gates appear in application order; parallel gates are serialized in
/// ascending qubit index.  Couplings that are exactly zero drop their gates.
pub fn build_trotter_step(model: &HubbardParams, dt: f64, variant: Variant) -> Result<Vec<Gate>> {
    Ok(build_trotter_step_slotted(model, dt, variant)?.0)
}

/// [`build_trotter_step`] plus the slot boundaries of the Hamiltonian split.
pub fn build_trotter_step_slotted(
    model: &HubbardParams,
    dt: f64,
    variant: Variant,
) -> Result<(Vec<Gate>, Vec<usize>)> {
    let n = 4usize;
    let mut gates = Vec::new();
    let mut bounds = vec![0usize];
    if model.u != 0.0 {
        gates.push(Gate::onsite(n, 1, 4, model.u, dt)?);
        bounds.push(gates.len());
        gates.push(Gate::onsite(n, 2, 3, model.u, dt)?);
        bounds.push(gates.len());
    }
    if model.t1 != 0.0 {
        gates.push(Gate::hopping(n, GateLabel::T1, 1, 2, model.t1, dt)?);
        bounds.push(gates.len());
        gates.push(Gate::hopping(n, GateLabel::T1, 3, 4, model.t1, dt)?);
        bounds.push(gates.len());
    }
    if model.t2 != 0.0 {
        gates.push(Gate::hopping(n, GateLabel::T2, 2, 3, model.t2, dt)?);
        bounds.push(gates.len());
        gates.extend(string_flip_block(model.t2, dt, variant)?);
        bounds.push(gates.len());
    }
    Ok((gates, bounds))
}

/// The `t₂′` block: `exp(i t₂·dt (σ⁺₁σᶻ₂σᶻ₃σ⁻₄ + h.c.))` in the chosen
/// decomposition.
fn string_flip_block(t2: f64, dt: f64, variant: Variant) -> Result<Vec<Gate>> {
    let n = 4usize;
    match variant {
        Variant::CzChain => Ok(vec![
            Gate::cz(n, 1, 2)?,
            Gate::cz(n, 1, 3)?,
            Gate::hopping(n, GateLabel::T2, 1, 4, t2, dt)?,
            Gate::cz(n, 1, 3)?,
            Gate::cz(n, 1, 2)?,
        ]),
        Variant::IswapChain => Ok(vec![
            Gate::cz(n, 1, 2)?,
            Gate::iswap(n, 1, 2, false)?,
            Gate::cz(n, 2, 3)?,
            Gate::iswap(n, 1, 2, true)?,
            Gate::hopping(n, GateLabel::T2, 1, 4, t2, dt)?,
            Gate::iswap(n, 1, 2, false)?,
            Gate::cz(n, 2, 3)?,
            Gate::iswap(n, 1, 2, true)?,
            Gate::cz(n, 1, 2)?,
        ]),
        Variant::CnotChain => {
            let mut gates = cnot_half_block(Pauli::X, t2 * dt)?;
            gates.extend(cnot_half_block(Pauli::Y, t2 * dt)?);
            Ok(gates)
        }
    }
}

/// Basis-change frame with `F† Z F = ±axis`, dense 2×2.
fn frame_unitary(axis: Pauli) -> CMatrix {
    let inv_sqrt2 = 1.0 / libm::sqrt(2.0);
    match axis {
        // Hadamard: H Z H = X.
        Pauli::X => CMatrix::from_fn(2, |i, j| {
            let sign = if i == 1 && j == 1 { -1.0 } else { 1.0 };
            C64::new(sign * inv_sqrt2, 0.0)
        }),
        // exp(i π/4 X): F† Z F = −Y.
        Pauli::Y => CMatrix::from_fn(2, |i, j| {
            if i == j {
                C64::new(inv_sqrt2, 0.0)
            } else {
                C64::new(0.0, inv_sqrt2)
            }
        }),
        _ => unreachable!("frames are only built for X and Y"),
    }
}

/// One half of the CNOT-ladder block: realizes
/// `exp(i θ/2 · axis₁ σᶻ₂ σᶻ₃ axis₄)` with a descending parity ladder, an
/// exact single-qubit rotation, and the mirror ladder.  The single-qubit
/// basis changes on qubits 1 and 4 are folded into the gate generators, so
/// the ladder gates remain physical CNOTs expressed in a rotated frame.
fn cnot_half_block(axis: Pauli, theta: f64) -> Result<Vec<Gate>> {
    let n = 4usize;
    let frame = frame_unitary(axis);
    let fold1 = CliffordAction::from_dense(&frame.adjoint(), vec![1])?;
    let fold4 = CliffordAction::from_dense(&frame.adjoint(), vec![4])?;

    let folded_cnot = |control: usize, target: usize, fold: Option<&CliffordAction>| {
        let base = Gate::cnot(n, control, target)?;
        match fold {
            None => Ok(base),
            Some(action) => Gate::large(
                GateLabel::Cnot,
                vec![control, target],
                action.conjugate(&base.generator),
                base.nominal_angle,
                n,
            ),
        }
    };

    let down = [
        folded_cnot(1, 2, Some(&fold1))?,
        folded_cnot(2, 3, None)?,
        folded_cnot(3, 4, Some(&fold4))?,
    ];
    let up = [
        folded_cnot(3, 4, Some(&fold4))?,
        folded_cnot(2, 3, None)?,
        folded_cnot(1, 2, Some(&fold1))?,
    ];

    // Rotation axis of the inner gate in the folded frame, and the string it
    // becomes once commuted through the mirror ladder.
    let inner_axis = fold4.conjugate(&OperatorSum::pauli(n, 4, Pauli::Z)?);
    let mut string = inner_axis.clone();
    for gate in &up {
        string = gate.conjugate_through(&string);
    }
    debug_assert_eq!(string.terms().len(), 1);
    let coeff = string.terms()[0].coeff;
    debug_assert!(libm::fabs(coeff.im) < 1e-12);
    debug_assert!((libm::fabs(coeff.re) - 1.0).abs() < 1e-12);
    let alpha = theta / (2.0 * coeff.re);

    let inner = Gate::rotation(
        GateLabel::T2,
        vec![4],
        inner_axis.scale_re(if alpha >= 0.0 { 1.0 } else { -1.0 }),
        libm::fabs(alpha),
        false,
    );

    let mut gates: Vec<Gate> = down.into_iter().collect();
    gates.push(inner);
    gates.extend(up);
    Ok(gates)
}

/// Temporal structure of the over-rotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemporalMode {
    /// A fresh draw for every gate in every Trotter step.
    PerStepIid,
    /// One draw per gate, held constant across all steps of a run.
    QuasiStatic,
}

/// Normally distributed zero-mean over-rotations.
///
/// `std_dev` is the standard deviation of the angle distribution in radians
/// (the quantity compared against the Trotter step size gτ/n).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub std_dev: f64,
    pub temporal_mode: TemporalMode,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(std_dev: f64, temporal_mode: TemporalMode, seed: u64) -> Result<Self> {
        if std_dev < 0.0 {
            return Err(Error::NotPositive {
                what: "std_dev",
                value: std_dev,
            });
        }
        Ok(Self {
            std_dev,
            temporal_mode,
            seed,
        })
    }

    pub fn noiseless(seed: u64) -> Self {
        Self {
            std_dev: 0.0,
            temporal_mode: TemporalMode::PerStepIid,
            seed,
        }
    }
}

/// Over-rotation angles per (step, gate), in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRealization {
    pub n_steps: usize,
    pub gates_per_step: usize,
    values: Vec<f64>,
}

impl ErrorRealization {
    pub fn zeros(n_steps: usize, gates_per_step: usize) -> Self {
        Self {
            n_steps,
            gates_per_step,
            values: vec![0.0; n_steps * gates_per_step],
        }
    }

    pub fn from_values(n_steps: usize, gates_per_step: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), n_steps * gates_per_step);
        Self {
            n_steps,
            gates_per_step,
            values,
        }
    }

    pub fn value(&self, step: usize, gate: usize) -> f64 {
        self.values[step * self.gates_per_step + gate]
    }

    pub fn step_values(&self, step: usize) -> &[f64] {
        let s = step * self.gates_per_step;
        &self.values[s..s + self.gates_per_step]
    }

    /// Rescale all angles, e.g. to share normalized draws across step sizes.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n_steps: self.n_steps,
            gates_per_step: self.gates_per_step,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Draw a full error realization for `program` under `noise`.
///
/// Streams are keyed by (seed, gate index, effective step); quasi-static
/// noise keys every step with counter 0, so both modes share one code path
/// and a quasi-static realization is constant across steps by construction.
pub fn sample_errors(program: &TrotterProgram, noise: &NoiseModel) -> ErrorRealization {
    debug_assert!(noise.std_dev >= 0.0);
    let gps = program.step_gates.len();
    let mut values = Vec::with_capacity(program.n_steps * gps);
    for step in 0..program.n_steps {
        for (g, gate) in program.step_gates.iter().enumerate() {
            if !gate.noisy || noise.std_dev == 0.0 {
                values.push(0.0);
                continue;
            }
            let step_key = match noise.temporal_mode {
                TemporalMode::PerStepIid => step as u64,
                TemporalMode::QuasiStatic => 0,
            };
            let key = rng::mix(noise.seed, &[g as u64, step_key]);
            values.push(noise.std_dev * rng::standard_normal(key));
        }
    }
    ErrorRealization::from_values(program.n_steps, gps, values)
}

/// Program with per-gate eigendecompositions precomputed, so each faulty
/// application is two dense mat-vecs and a phase multiply.
pub struct CompiledProgram<'a> {
    pub program: &'a TrotterProgram,
    eigs: Vec<dense::Eigh>,
}

impl<'a> CompiledProgram<'a> {
    pub fn new(program: &'a TrotterProgram) -> Self {
        let eigs = program
            .step_gates
            .iter()
            .map(|g| {
                dense::eigh(
                    &g.generator
                        .to_dense(program.n_qubits)
                        .expect("gate fits register"),
                )
            })
            .collect();
        Self { program, eigs }
    }

    /// Run the faulty circuit, invoking `sink` with the state after step m
    /// for m = 0 (initial state) through n_steps.
    pub fn run_with(
        &self,
        realization: &ErrorRealization,
        psi0: &[C64],
        mut sink: impl FnMut(usize, &[C64]),
    ) -> Result<()> {
        let dim = 1usize << self.program.n_qubits;
        if psi0.len() != dim {
            return Err(Error::RegisterMismatch {
                left: psi0.len(),
                right: dim,
            });
        }
        let norm = libm::sqrt(psi0.iter().map(|z| z.norm_sqr()).sum());
        if libm::fabs(norm - 1.0) > 1e-9 {
            return Err(Error::UnnormalizedState { norm });
        }
        if realization.n_steps != self.program.n_steps
            || realization.gates_per_step != self.program.step_gates.len()
        {
            return Err(Error::TraceLengthMismatch {
                got: realization.n_steps,
                expected: self.program.n_steps,
            });
        }
        let mut psi = psi0.to_vec();
        sink(0, &psi);
        for step in 0..self.program.n_steps {
            for (g, gate) in self.program.step_gates.iter().enumerate() {
                let angle = gate.nominal_angle + realization.value(step, g);
                psi = self.eigs[g].apply_exp_i(angle, &psi);
            }
            sink(step + 1, &psi);
        }
        Ok(())
    }

    /// State after every Trotter step, including the initial slice.
    pub fn run(&self, realization: &ErrorRealization, psi0: &[C64]) -> Result<Vec<Vec<C64>>> {
        let mut states = Vec::with_capacity(self.program.n_steps + 1);
        self.run_with(realization, psi0, |_, psi| states.push(psi.to_vec()))?;
        Ok(states)
    }

    /// Dense unitary of one faulty Trotter step.
    pub fn step_unitary(&self, realization: &ErrorRealization, step: usize) -> CMatrix {
        let dim = 1usize << self.program.n_qubits;
        let mut u = CMatrix::identity(dim);
        for (g, gate) in self.program.step_gates.iter().enumerate() {
            let angle = gate.nominal_angle + realization.value(step, g);
            u = self.eigs[g].exp_i(angle).mul(&u);
        }
        u
    }
}

/// Apply the faulty program to an initial state, recording the state after
/// every Trotter step.
pub fn apply_program(
    program: &TrotterProgram,
    realization: &ErrorRealization,
    psi0: &[C64],
) -> Result<Vec<Vec<C64>>> {
    CompiledProgram::new(program).run(realization, psi0)
}
