//! Error type shared by all modules.

use alloc::string::String;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by the operator algebra, gate library and evolution
/// backends.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("register size mismatch: {left} vs {right} qubits")]
    RegisterMismatch { left: usize, right: usize },

    #[error("operator on {needed} qubits does not fit a {given}-qubit register")]
    RegisterOverflow { needed: usize, given: usize },

    #[error("qubit index {index} outside register of {n_qubits} qubits (indices are 1-based)")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("gate requires distinct qubits, got {qubit} twice")]
    DuplicateQubit { qubit: usize },

    #[error("operator is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("unitary is not a Clifford on its support")]
    NotClifford,

    #[error("state vector norm {norm} is not 1")]
    UnnormalizedState { norm: f64 },

    #[error("state has vanishing particle-number expectation")]
    ZeroParticleState,

    #[error("gate '{label}' does not implement a Hamiltonian term directly")]
    NotHamiltonianTerm { label: String },

    #[error("disorder trace has {got} steps, expected {expected}")]
    TraceLengthMismatch { got: usize, expected: usize },

    #[error("time series too short for a spectrum: {len} slices (need at least 8)")]
    TooFewSlices { len: usize },

    #[error("time grid is not uniform or grids of ensemble members differ")]
    GridMismatch,

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("over-rotation angle {angle} outside [-pi/2, pi/2]")]
    AngleOutOfRange { angle: f64 },

    #[error("fidelity {fidelity} outside the open interval (0, 1)")]
    FidelityOutOfRange { fidelity: f64 },

    #[error("{what} must be positive, got {value}")]
    NotPositive { what: &'static str, value: f64 },
}
