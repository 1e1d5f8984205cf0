//! Experiment configuration: the JSON schema behind `simulate`.
//!
//! Every knob of the §-style experiments is a field here; command-line flags
//! override file fields.  Times are in units of 1/g, energies in units of g,
//! angles in radians.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use overrot_core::evolve::Backend;
use overrot_core::gates::{HubbardParams, NoiseModel, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    N1,
    Sigma2,
}

/// How the effective-Hamiltonian backend integrates `H + δH(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectiveMode {
    /// Exact Hermitian exponential of the summed `H + δH_m` per step.
    #[default]
    StepwiseExact,
    /// Trotterized over the circuit's own split with slot-assigned
    /// disorder; removes the shared splitting defect from fine-scale
    /// comparisons against the faulty circuit.
    SplitMatched,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Model couplings (U, t₁, t₂) in units of g.
    pub model: HubbardParams,
    pub variant: Variant,
    /// Total simulated time τ·g.
    pub tau_g: f64,
    /// Trotter step size gτ/n; τ·g / step must be an integer.
    pub step_g: f64,
    pub noise: NoiseModel,
    pub ensemble_size: usize,
    /// Modes created from the vacuum, in application order.
    pub initial_state: Vec<usize>,
    pub observables: Vec<Observable>,
    pub backends: Vec<Backend>,
    #[serde(default)]
    pub effective_mode: EffectiveMode,
    /// Gaussian window width for spectra; default τ/6.
    #[serde(default)]
    pub window_sigma_g: Option<f64>,
    /// Mode coordinates for the spread observable; default (0, 1, 2, 1).
    #[serde(default)]
    pub r_coords: Option<Vec<f64>>,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn n_steps(&self) -> Option<usize> {
        if self.step_g <= 0.0 || self.tau_g <= 0.0 {
            return None;
        }
        let ratio = self.tau_g / self.step_g;
        let rounded = ratio.round();
        if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) && rounded >= 1.0 {
            Some(rounded as usize)
        } else {
            None
        }
    }

    pub fn window_sigma(&self) -> f64 {
        self.window_sigma_g.unwrap_or(self.tau_g / 6.0)
    }

    pub fn wants(&self, backend: Backend) -> bool {
        self.backends.contains(&backend)
    }

    pub fn records(&self, obs: Observable) -> bool {
        self.observables.contains(&obs)
    }
}

/// Outcome of configuration validation: hard errors stop a run, warnings
/// flag parameter regimes outside the modelling assumptions.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl Diagnostics {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Check field consistency and the small-over-rotation regime.
pub fn validate(config: &ExperimentConfig) -> Diagnostics {
    let mut d = Diagnostics::default();
    if config.tau_g <= 0.0 {
        d.errors.push(format!("tau_g must be positive, got {}", config.tau_g));
    }
    if config.step_g <= 0.0 {
        d.errors
            .push(format!("step_g must be positive, got {}", config.step_g));
    }
    if config.tau_g > 0.0 && config.step_g > 0.0 && config.n_steps().is_none() {
        d.errors.push(format!(
            "tau_g / step_g = {} is not an integer number of Trotter steps",
            config.tau_g / config.step_g
        ));
    }
    if config.noise.std_dev < 0.0 {
        d.errors
            .push(format!("std_dev must be nonnegative, got {}", config.noise.std_dev));
    }
    if config.ensemble_size == 0 {
        d.errors.push("ensemble_size must be at least 1".into());
    }
    if config.initial_state.is_empty() {
        d.errors.push("initial_state must create at least one particle".into());
    }
    let mut seen = [false; 5];
    for &m in &config.initial_state {
        if m == 0 || m > 4 {
            d.errors.push(format!("initial_state mode {m} outside 1..=4"));
        } else if seen[m] {
            d.errors.push(format!("initial_state repeats mode {m}"));
        } else {
            seen[m] = true;
        }
    }
    if let Some(r) = &config.r_coords {
        if r.len() != 4 {
            d.errors
                .push(format!("r_coords needs 4 entries, got {}", r.len()));
        }
    }
    if config.backends.is_empty() {
        d.errors.push("at least one backend must be selected".into());
    }
    if config.observables.is_empty() {
        d.errors.push("at least one observable must be selected".into());
    }
    if let Some(sigma) = config.window_sigma_g {
        if sigma <= 0.0 {
            d.errors
                .push(format!("window_sigma_g must be positive, got {sigma}"));
        }
    }

    // Over-rotations larger than the Trotter angle leave the regime where
    // second-order terms are negligible.
    if config.step_g > 0.0 && config.noise.std_dev > config.step_g {
        d.warnings.push(format!(
            "std_dev = {} exceeds the Trotter step size {}; \
             the first-order effective-Hamiltonian picture degrades",
            config.noise.std_dev, config.step_g
        ));
    }
    d
}
