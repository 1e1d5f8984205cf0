//! Time-evolution backends on dense statevectors.
//!
//! Three ways to propagate the same initial state over the same time grid:
//!
//! * [`evolve_faulty`] — apply the over-rotated circuit gate by gate;
//! * [`evolve_effective`] — apply `exp(−i (H + δH_m) τ/n)` per step, the
//!   stepwise-exact evolution under the derived disordered Hamiltonian;
//! * [`evolve_ideal`] — the discretized error-free evolution, each slice
//!   computed from one eigendecomposition of H (drift-free in time).
//!
//! A time slice is recorded after every Trotter step, plus the t = 0 slice.
//! Observables are the mode-1 occupation ⟨n₁⟩ and the spatial variance of
//! the charge profile, σ² = Σ r_j² ρ_j − (Σ r_j ρ_j)² with
//! ρ_j = ⟨n_j⟩ / Σ_k ⟨n_k⟩ and configurable mode coordinates r_j.  The
//! normalization by the total occupation makes σ² well defined also for the
//! circuit variants whose errors do not conserve particle number.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dense::{self, C64};
use crate::effective::DisorderTrace;
use crate::error::{Error, Result};
use crate::fermion::{jordan_wigner, LadderKind};
use crate::gates::{CompiledProgram, ErrorRealization, TrotterProgram};
use crate::pauli::OperatorSum;
use crate::HERMITICITY_TOL;

/// Which propagator produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    FaultyCircuit,
    EffectiveHamiltonian,
    IdealExact,
}

/// Observables sampled after every Trotter step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub backend: Backend,
    /// Slice times m·τ/n in units of 1/g, starting at 0.
    pub times: Vec<f64>,
    /// ⟨n₁⟩ per slice.
    pub n1: Vec<f64>,
    /// Charge-spread σ² per slice, when requested.
    pub sigma2: Option<Vec<f64>>,
    /// Largest |norm − 1| observed along the run.
    pub norm_drift: f64,
}

/// Occupation-number initial state `c†_{j_k} … c†_{j_1} |vac⟩`.
///
/// Creation operators are applied in list order, so the fermionic sign is
/// well defined; permuting the list flips the state's sign accordingly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialState {
    pub occupied: Vec<usize>,
}

impl InitialState {
    pub fn new(occupied: Vec<usize>) -> Self {
        Self { occupied }
    }

    /// Dense state vector on `n_modes` qubits (vacuum = all-ones index).
    pub fn state_vector(&self, n_modes: usize) -> Result<Vec<C64>> {
        let dim = 1usize << n_modes;
        let mut psi = vec![C64::new(0.0, 0.0); dim];
        psi[dim - 1] = C64::new(1.0, 0.0);
        for &mode in &self.occupied {
            let cr = jordan_wigner(mode, LadderKind::Create, n_modes)?;
            psi = cr.to_dense(n_modes)?.matvec(&psi);
        }
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if libm::fabs(norm - 1.0) > 1e-12 {
            return Err(Error::UnnormalizedState {
                norm: libm::sqrt(norm),
            });
        }
        Ok(psi)
    }
}

/// Options shared by the evolution backends.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub record_sigma2: bool,
    /// Mode coordinates r_j for the spread observable.
    pub r_coords: Vec<f64>,
}

impl EvolveOptions {
    pub fn n1_only() -> Self {
        Self {
            record_sigma2: false,
            r_coords: default_spread_coords(4),
        }
    }

    pub fn with_sigma2() -> Self {
        Self {
            record_sigma2: true,
            r_coords: default_spread_coords(4),
        }
    }
}

/// Default mode coordinates: the minimal number of hoppings from mode 1,
/// r = (0, 1, 2, 1) on the four-mode ring.
pub fn default_spread_coords(n_modes: usize) -> Vec<f64> {
    match n_modes {
        4 => vec![0.0, 1.0, 2.0, 1.0],
        _ => (0..n_modes).map(|j| j as f64).collect(),
    }
}

/// ⟨n_j⟩ for 1-based `mode`; occupied means index bit 0.
pub fn occupation_expectation(state: &[C64], n_qubits: usize, mode: usize) -> f64 {
    let shift = n_qubits - mode;
    state
        .iter()
        .enumerate()
        .filter(|(idx, _)| (idx >> shift) & 1 == 0)
        .map(|(_, z)| z.norm_sqr())
        .sum()
}

/// Σ_j ⟨n_j⟩ over all modes.
pub fn total_occupation(state: &[C64], n_qubits: usize) -> f64 {
    (1..=n_qubits)
        .map(|m| occupation_expectation(state, n_qubits, m))
        .sum()
}

/// Spatial variance of the normalized charge profile:
/// `σ² = Σ_j r_j² ρ_j − (Σ_j r_j ρ_j)²` with `ρ_j = ⟨n_j⟩ / Σ_k ⟨n_k⟩`.
pub fn spatial_variance(state: &[C64], n_qubits: usize, r_coords: &[f64]) -> Result<f64> {
    let total = total_occupation(state, n_qubits);
    if total < 1e-12 {
        return Err(Error::ZeroParticleState);
    }
    let mut first = 0.0;
    let mut second = 0.0;
    for mode in 1..=n_qubits {
        let rho = occupation_expectation(state, n_qubits, mode) / total;
        let r = r_coords[mode - 1];
        first += r * rho;
        second += r * r * rho;
    }
    Ok(second - first * first)
}

struct TrajectoryRecorder<'a> {
    opts: &'a EvolveOptions,
    n_qubits: usize,
    dt: f64,
    times: Vec<f64>,
    n1: Vec<f64>,
    sigma2: Vec<f64>,
    norm_drift: f64,
}

impl<'a> TrajectoryRecorder<'a> {
    fn new(opts: &'a EvolveOptions, n_qubits: usize, dt: f64, n_slices: usize) -> Self {
        Self {
            opts,
            n_qubits,
            dt,
            times: Vec::with_capacity(n_slices),
            n1: Vec::with_capacity(n_slices),
            sigma2: Vec::with_capacity(if opts.record_sigma2 { n_slices } else { 0 }),
            norm_drift: 0.0,
        }
    }

    fn record(&mut self, step: usize, psi: &[C64]) {
        self.times.push(step as f64 * self.dt);
        self.n1
            .push(occupation_expectation(psi, self.n_qubits, 1));
        if self.opts.record_sigma2 {
            // A zero-particle state only occurs for a vacuum input; report 0
            // rather than poisoning a whole trajectory.
            let s2 = spatial_variance(psi, self.n_qubits, &self.opts.r_coords).unwrap_or(0.0);
            self.sigma2.push(s2);
        }
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let drift = libm::fabs(libm::sqrt(norm) - 1.0);
        if drift > self.norm_drift {
            self.norm_drift = drift;
        }
    }

    fn finish(self, backend: Backend) -> Trajectory {
        Trajectory {
            backend,
            times: self.times,
            n1: self.n1,
            sigma2: if self.opts.record_sigma2 {
                Some(self.sigma2)
            } else {
                None
            },
            norm_drift: self.norm_drift,
        }
    }
}

/// Faulty-circuit trajectory under a given error realization.
pub fn evolve_faulty(
    program: &TrotterProgram,
    realization: &ErrorRealization,
    psi0: &[C64],
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    evolve_faulty_compiled(&CompiledProgram::new(program), realization, psi0, opts)
}

/// Same as [`evolve_faulty`] with a reusable compiled program (one
/// compilation serves a whole ensemble).
pub fn evolve_faulty_compiled(
    compiled: &CompiledProgram<'_>,
    realization: &ErrorRealization,
    psi0: &[C64],
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let program = compiled.program;
    let mut rec =
        TrajectoryRecorder::new(opts, program.n_qubits, program.dt(), program.n_steps + 1);
    compiled.run_with(realization, psi0, |step, psi| rec.record(step, psi))?;
    Ok(rec.finish(Backend::FaultyCircuit))
}

/// Stepwise-exact evolution under `H + δH_m`: one Hermitian exponential per
/// Trotter step, warm-started from the eigenbasis of H.
pub fn evolve_effective(
    h: &OperatorSum,
    trace: &DisorderTrace,
    psi0: &[C64],
    total_time: f64,
    n_steps: usize,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let (traj, _) = evolve_effective_impl(h, trace, psi0, total_time, n_steps, opts, false)?;
    Ok(traj)
}

/// [`evolve_effective`] that also returns the state at every slice, for
/// state-overlap comparisons against the faulty circuit.
pub fn evolve_effective_with_states(
    h: &OperatorSum,
    trace: &DisorderTrace,
    psi0: &[C64],
    total_time: f64,
    n_steps: usize,
    opts: &EvolveOptions,
) -> Result<(Trajectory, Vec<Vec<C64>>)> {
    evolve_effective_impl(h, trace, psi0, total_time, n_steps, opts, true)
}

fn evolve_effective_impl(
    h: &OperatorSum,
    trace: &DisorderTrace,
    psi0: &[C64],
    total_time: f64,
    n_steps: usize,
    opts: &EvolveOptions,
    keep_states: bool,
) -> Result<(Trajectory, Vec<Vec<C64>>)> {
    let n_qubits = h.n_qubits();
    if trace.n_steps != n_steps {
        return Err(Error::TraceLengthMismatch {
            got: trace.n_steps,
            expected: n_steps,
        });
    }
    let dim = 1usize << n_qubits;
    if psi0.len() != dim {
        return Err(Error::RegisterMismatch {
            left: psi0.len(),
            right: dim,
        });
    }
    let dt = total_time / n_steps as f64;
    let h_dense = h.to_dense(n_qubits)?;
    let base = dense::eigh(&h_dense);

    let mut rec = TrajectoryRecorder::new(opts, n_qubits, dt, n_steps + 1);
    let mut states = Vec::new();
    let mut psi = psi0.to_vec();
    rec.record(0, &psi);
    if keep_states {
        states.push(psi.clone());
    }
    for m in 0..n_steps {
        let dh = trace.step(m);
        if !dh.is_hermitian(HERMITICITY_TOL) {
            return Err(Error::NotHermitian {
                defect: dh.hermiticity_defect(),
            });
        }
        let eig = if dh.is_zero() {
            None
        } else {
            let h_eff = h_dense.add(&dh.to_dense(n_qubits)?);
            Some(dense::eigh_with_basis(&h_eff, Some(&base.vectors)))
        };
        psi = eig.as_ref().unwrap_or(&base).apply_exp_i(-dt, &psi);
        rec.record(m + 1, &psi);
        if keep_states {
            states.push(psi.clone());
        }
    }
    Ok((rec.finish(Backend::EffectiveHamiltonian), states))
}

/// Split-matched effective evolution: per Trotter step apply
/// `∏_j exp(−i (H_j + δH_{j,m}) τ/n)` over the same Hamiltonian split the
/// circuit uses, with each slot's disorder derived from its own gates.
///
/// Sharing the splitting removes the ordinary Trotter defect from the
/// comparison against the faulty circuit, so the residual difference
/// isolates what the disorder picture drops: second-order error terms.
/// This is the backend behind the fine-scale spectral-difference check;
/// [`evolve_effective`] stays the stepwise-exact exponential of the summed
/// `H + δH_m`.
pub fn evolve_effective_split(
    program: &TrotterProgram,
    realization: &ErrorRealization,
    psi0: &[C64],
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    use crate::effective::{slot_disorder, slot_hamiltonians};

    let n_qubits = program.n_qubits;
    let dim = 1usize << n_qubits;
    if psi0.len() != dim {
        return Err(Error::RegisterMismatch {
            left: psi0.len(),
            right: dim,
        });
    }
    if realization.n_steps != program.n_steps
        || realization.gates_per_step != program.step_gates.len()
    {
        return Err(Error::TraceLengthMismatch {
            got: realization.n_steps,
            expected: program.n_steps,
        });
    }
    let dt = program.dt();
    let slots = slot_hamiltonians(program);
    let slot_dense: Vec<_> = slots
        .iter()
        .map(|h| h.to_dense(n_qubits))
        .collect::<Result<_>>()?;
    let slot_bases: Vec<_> = slot_dense.iter().map(dense::eigh).collect();

    let mut rec = TrajectoryRecorder::new(opts, n_qubits, dt, program.n_steps + 1);
    let mut psi = psi0.to_vec();
    rec.record(0, &psi);
    for m in 0..program.n_steps {
        let disorder = slot_disorder(program, realization, m);
        for (j, dh) in disorder.iter().enumerate() {
            if dh.is_zero() {
                psi = slot_bases[j].apply_exp_i(-dt, &psi);
            } else {
                let h_eff = slot_dense[j].add(&dh.to_dense(n_qubits)?);
                let eig = dense::eigh_with_basis(&h_eff, Some(&slot_bases[j].vectors));
                psi = eig.apply_exp_i(-dt, &psi);
            }
        }
        rec.record(m + 1, &psi);
    }
    Ok(rec.finish(Backend::EffectiveHamiltonian))
}

/// Discretized exact evolution under the error-free Hamiltonian; every
/// slice is computed from t = 0 through one cached eigendecomposition, so
/// observables at shared time points are independent of the slicing.
pub fn evolve_ideal(
    h: &OperatorSum,
    psi0: &[C64],
    total_time: f64,
    n_steps: usize,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let n_qubits = h.n_qubits();
    let defect = h.hermiticity_defect();
    if !h.is_hermitian(HERMITICITY_TOL) {
        return Err(Error::NotHermitian { defect });
    }
    let dim = 1usize << n_qubits;
    if psi0.len() != dim {
        return Err(Error::RegisterMismatch {
            left: psi0.len(),
            right: dim,
        });
    }
    let dt = total_time / n_steps as f64;
    let eig = dense::eigh(&h.to_dense(n_qubits)?);
    let mut rec = TrajectoryRecorder::new(opts, n_qubits, dt, n_steps + 1);
    for m in 0..=n_steps {
        let t = m as f64 * dt;
        let psi = eig.apply_exp_i(-t, psi0);
        rec.record(m, &psi);
    }
    Ok(rec.finish(Backend::IdealExact))
}
