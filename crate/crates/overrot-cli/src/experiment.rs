//! Experiment orchestration: ensembles, worker threads, and aggregation.
//!
//! Runs are independent (each gets a seed derived from the master seed and
//! its run index) and execute in parallel; their statistics are folded in
//! run order, so outputs are byte-identical regardless of the worker count.

use std::sync::Mutex;

use num_complex::Complex64;

use overrot_core::analysis::{
    trajectory_spectrum, SeriesAccumulator, Spectrum, SpectrumAccumulator,
};
use overrot_core::effective::derive_trace_terms_only;
use overrot_core::evolve::{
    default_spread_coords, evolve_effective, evolve_effective_split, evolve_faulty_compiled,
    evolve_ideal, Backend, EvolveOptions, InitialState, Trajectory,
};
use overrot_core::gates::{
    sample_errors, CompiledProgram, NoiseModel, TrotterProgram,
};
use overrot_core::pauli::OperatorSum;
use overrot_core::{fermion, rng};

use crate::config::{validate, EffectiveMode, ExperimentConfig, Observable};
use crate::CliError;

/// Stream tag separating per-run seeds from other derived streams.
const RUN_STREAM: u64 = 0x72756e;

/// Seed of ensemble member `run` under master seed `seed`.
pub fn run_seed(seed: u64, run: usize) -> u64 {
    rng::mix(seed, &[RUN_STREAM, run as u64])
}

/// Aggregated observables of one backend.
#[derive(Debug, Clone)]
pub struct BackendOutput {
    pub backend: Backend,
    pub n_runs: usize,
    pub n1_mean: Vec<f64>,
    pub n1_stderr: Vec<f64>,
    pub sigma2_mean: Option<Vec<f64>>,
    pub sigma2_stderr: Option<Vec<f64>>,
    pub spectrum_mean: Option<Vec<Complex64>>,
    pub spectrum_stderr: Option<Vec<f64>>,
    /// Mean of |S(ω)| across runs: the averaged line shape.
    pub spectrum_abs_mean: Option<Vec<f64>>,
    pub spectrum_abs_stderr: Option<Vec<f64>>,
    pub norm_drift_max: f64,
}

/// Everything an experiment produces, before any file is written.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub times: Vec<f64>,
    pub frequencies: Option<Vec<f64>>,
    pub outputs: Vec<BackendOutput>,
    pub run_seeds: Vec<u64>,
    pub n_steps: usize,
    pub gates_per_step: usize,
    pub noisy_gates_per_step: usize,
}

impl ExperimentResult {
    pub fn backend(&self, b: Backend) -> Option<&BackendOutput> {
        self.outputs.iter().find(|o| o.backend == b)
    }
}

struct BackendAccumulator {
    backend: Backend,
    n1: SeriesAccumulator,
    sigma2: Option<SeriesAccumulator>,
    spectrum: Option<SpectrumAccumulator>,
    norm_drift_max: f64,
}

impl BackendAccumulator {
    fn new(backend: Backend, len: usize, spec_len: Option<usize>, sigma2: bool) -> Self {
        Self {
            backend,
            n1: SeriesAccumulator::new(len),
            sigma2: sigma2.then(|| SeriesAccumulator::new(len)),
            spectrum: spec_len.map(SpectrumAccumulator::new),
            norm_drift_max: 0.0,
        }
    }

    fn push(&mut self, traj: &Trajectory, spec: Option<&Spectrum>) -> Result<(), CliError> {
        self.n1
            .push(&traj.n1)
            .map_err(|e| CliError::runtime(e.to_string()))?;
        if let Some(acc) = self.sigma2.as_mut() {
            let s2 = traj
                .sigma2
                .as_ref()
                .ok_or_else(|| CliError::runtime("trajectory lacks sigma2"))?;
            acc.push(s2).map_err(|e| CliError::runtime(e.to_string()))?;
        }
        if let Some(acc) = self.spectrum.as_mut() {
            let s = spec.ok_or_else(|| CliError::runtime("missing spectrum"))?;
            acc.push(&s.amplitudes)
                .map_err(|e| CliError::runtime(e.to_string()))?;
        }
        self.norm_drift_max = self.norm_drift_max.max(traj.norm_drift);
        Ok(())
    }

    fn finish(self) -> BackendOutput {
        let spec = self.spectrum.as_ref().map(|a| a.finish(Vec::new(), 0.0));
        BackendOutput {
            backend: self.backend,
            n_runs: self.n1.count(),
            n1_mean: self.n1.mean().to_vec(),
            n1_stderr: self.n1.standard_error(),
            sigma2_mean: self.sigma2.as_ref().map(|a| a.mean().to_vec()),
            sigma2_stderr: self.sigma2.as_ref().map(|a| a.standard_error()),
            spectrum_mean: spec.as_ref().map(|s| s.mean.clone()),
            spectrum_stderr: spec.as_ref().map(|s| s.stderr.clone()),
            spectrum_abs_mean: spec.as_ref().map(|s| s.mean_abs.clone()),
            spectrum_abs_stderr: spec.as_ref().map(|s| s.stderr_abs.clone()),
            norm_drift_max: self.norm_drift_max,
        }
    }
}

struct RunOutcome {
    faulty: Option<(Trajectory, Option<Spectrum>)>,
    effective: Option<(Trajectory, Option<Spectrum>)>,
}

/// Number of worker threads: explicit request, `OVERROT_WORKERS`, or the
/// available parallelism.
pub fn worker_count(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| {
            std::env::var("OVERROT_WORKERS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
        .max(1)
}

/// Execute an experiment in memory.
pub fn simulate(config: &ExperimentConfig, workers: Option<usize>) -> Result<ExperimentResult, CliError> {
    let diagnostics = validate(config);
    if !diagnostics.is_ok() {
        return Err(CliError::usage(diagnostics.errors.join("; ")));
    }
    let n_steps = config
        .n_steps()
        .expect("validated config has integral step count");
    let program = TrotterProgram::build(config.model, config.variant, config.tau_g, n_steps)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let compiled = CompiledProgram::new(&program);
    let hamiltonian: OperatorSum = fermion::build_hubbard_spinflip(
        config.model.u,
        config.model.t1,
        config.model.t2,
    )
    .realize()
    .map_err(|e| CliError::runtime(e.to_string()))?;
    let psi0 = InitialState::new(config.initial_state.clone())
        .state_vector(program.n_qubits)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let opts = EvolveOptions {
        record_sigma2: config.records(Observable::Sigma2),
        r_coords: config
            .r_coords
            .clone()
            .unwrap_or_else(|| default_spread_coords(program.n_qubits)),
    };
    let want_spectrum = config.records(Observable::N1);
    let window_sigma = config.window_sigma();

    let times: Vec<f64> = (0..=n_steps)
        .map(|m| m as f64 * program.dt())
        .collect();
    let spectrum_of = |traj: &Trajectory| -> Result<Option<Spectrum>, CliError> {
        if want_spectrum {
            trajectory_spectrum(traj, Some(window_sigma))
                .map(Some)
                .map_err(|e| CliError::runtime(e.to_string()))
        } else {
            Ok(None)
        }
    };

    // Ideal backend: a single deterministic trajectory.
    let ideal = if config.wants(Backend::IdealExact) {
        let traj = evolve_ideal(&hamiltonian, &psi0, config.tau_g, n_steps, &opts)
            .map_err(|e| CliError::runtime(e.to_string()))?;
        let spec = spectrum_of(&traj)?;
        Some((traj, spec))
    } else {
        None
    };

    let frequencies = if want_spectrum {
        Some(overrot_core::analysis::fft_frequency_grid(
            n_steps + 1,
            program.dt(),
        ))
    } else {
        None
    };

    let run_seeds: Vec<u64> = (0..config.ensemble_size)
        .map(|r| run_seed(config.noise.seed, r))
        .collect();

    let single_run = |run: usize| -> Result<RunOutcome, CliError> {
        let noise = NoiseModel {
            std_dev: config.noise.std_dev,
            temporal_mode: config.noise.temporal_mode,
            seed: run_seeds[run],
        };
        let realization = sample_errors(&program, &noise);
        let faulty = if config.wants(Backend::FaultyCircuit) {
            let traj = evolve_faulty_compiled(&compiled, &realization, &psi0, &opts)
                .map_err(|e| CliError::runtime(e.to_string()))?;
            let spec = spectrum_of(&traj)?;
            Some((traj, spec))
        } else {
            None
        };
        let effective = if config.wants(Backend::EffectiveHamiltonian) {
            let traj = match config.effective_mode {
                EffectiveMode::StepwiseExact => {
                    let trace = derive_trace_terms_only(&program, &realization)
                        .map_err(|e| CliError::runtime(e.to_string()))?;
                    evolve_effective(&hamiltonian, &trace, &psi0, config.tau_g, n_steps, &opts)
                        .map_err(|e| CliError::runtime(e.to_string()))?
                }
                EffectiveMode::SplitMatched => {
                    evolve_effective_split(&program, &realization, &psi0, &opts)
                        .map_err(|e| CliError::runtime(e.to_string()))?
                }
            };
            let spec = spectrum_of(&traj)?;
            Some((traj, spec))
        } else {
            None
        };
        Ok(RunOutcome { faulty, effective })
    };

    let spec_len = frequencies.as_ref().map(|f| f.len()).or({
        if want_spectrum {
            Some(n_steps + 1)
        } else {
            None
        }
    });
    let mut faulty_acc = config.wants(Backend::FaultyCircuit).then(|| {
        BackendAccumulator::new(
            Backend::FaultyCircuit,
            n_steps + 1,
            spec_len,
            opts.record_sigma2,
        )
    });
    let mut effective_acc = config.wants(Backend::EffectiveHamiltonian).then(|| {
        BackendAccumulator::new(
            Backend::EffectiveHamiltonian,
            n_steps + 1,
            spec_len,
            opts.record_sigma2,
        )
    });

    // Batched fork-join: parallel inside a batch, folded in run order.
    let workers = worker_count(workers).min(config.ensemble_size.max(1));
    let batch = (workers * 2).max(1);
    let mut next = 0usize;
    while next < config.ensemble_size {
        let end = (next + batch).min(config.ensemble_size);
        let ids: Vec<usize> = (next..end).collect();
        let mut slots: Vec<Option<Result<RunOutcome, CliError>>> =
            (0..ids.len()).map(|_| None).collect();
        let slot_lock = Mutex::new(&mut slots);
        std::thread::scope(|scope| {
            for w in 0..workers.min(ids.len()) {
                let ids = &ids;
                let slot_lock = &slot_lock;
                let single_run = &single_run;
                scope.spawn(move || {
                    let mut i = w;
                    while i < ids.len() {
                        let outcome = single_run(ids[i]);
                        slot_lock.lock().unwrap()[i] = Some(outcome);
                        i += workers;
                    }
                });
            }
        });
        for slot in slots {
            let outcome = slot.expect("every slot filled")?;
            if let (Some(acc), Some((traj, spec))) = (faulty_acc.as_mut(), outcome.faulty.as_ref())
            {
                acc.push(traj, spec.as_ref())?;
            }
            if let (Some(acc), Some((traj, spec))) =
                (effective_acc.as_mut(), outcome.effective.as_ref())
            {
                acc.push(traj, spec.as_ref())?;
            }
        }
        next = end;
    }

    let mut outputs = Vec::new();
    if let Some(acc) = faulty_acc {
        outputs.push(acc.finish());
    }
    if let Some(acc) = effective_acc {
        outputs.push(acc.finish());
    }
    if let Some((traj, spec)) = ideal {
        let mut acc = BackendAccumulator::new(
            Backend::IdealExact,
            n_steps + 1,
            spec_len,
            opts.record_sigma2,
        );
        acc.push(&traj, spec.as_ref())?;
        outputs.push(acc.finish());
    }

    Ok(ExperimentResult {
        times,
        frequencies,
        outputs,
        run_seeds,
        n_steps,
        gates_per_step: program.step_gates.len(),
        noisy_gates_per_step: program.noisy_gate_count(),
    })
}
