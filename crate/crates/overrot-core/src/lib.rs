//! Numerical laboratory for coherent gate errors in Trotterized digital
//! quantum simulation of small fermionic systems.
//!
//! A faulty gate is modelled as an over-rotation `exp(i (φ + δφ) A)` of the
//! ideal gate `exp(i φ A)`.  For algorithms built from a first-order Trotter
//! expansion, the over-rotations of every gate in a step can be commuted out
//! of the step unitary, so that the circuit effectively simulates a
//! disordered Hamiltonian `H + δH(t)`.  This crate provides
//!
//! * an exact algebra of complex-weighted Pauli strings ([`pauli`]) with a
//!   dense-matrix realization ([`dense`]) and exact Clifford conjugation
//!   ([`clifford`]),
//! * the Jordan-Wigner map between fermionic modes and qubits ([`fermion`]),
//! * a gate library and Trotter-step assembly for a two-site Hubbard model
//!   with spin flips, in three circuit variants ([`gates`]),
//! * the derivation of the per-step disorder operator `δH_m` with term-level
//!   provenance ([`effective`]),
//! * statevector time evolution under the faulty circuit, the stepwise
//!   effective Hamiltonian, and the exact Hamiltonian ([`evolve`]),
//! * windowed Fourier spectra, ensemble statistics, gate-fidelity relations
//!   and the gate-budget estimate ([`analysis`]).
//!
//! The crate is `no_std` (with `alloc`); all I/O lives in the companion CLI
//! crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod clifford;
pub mod dense;
pub mod effective;
pub mod error;
pub mod evolve;
pub mod fermion;
pub mod gates;
pub mod pauli;
pub mod rng;

pub use error::{Error, Result};

/// Coefficients below this magnitude are dropped during canonicalization.
pub const COEFF_PRUNE_TOL: f64 = 1e-14;

/// Default tolerance for Hermiticity and unitarity checks.
pub const HERMITICITY_TOL: f64 = 1e-12;
