//! Acceptance suite: one test per acceptance criterion, each printing a
//! PASS/FAIL line (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Heavy ensemble criteria parallelize over the available cores through the
//! experiment orchestration, so the whole suite stays within minutes.

use std::str::FromStr;

use overrot_cli::config::{EffectiveMode, ExperimentConfig, Observable};
use overrot_cli::experiment::simulate;
use overrot_core::analysis::{
    averaged_fidelity, fwhm_of_dominant_peak, gate_budget, min_fidelity_bruteforce,
    BudgetOutcome,
};
use overrot_core::dense::{self, phase_aligned_distance};
use overrot_core::effective::{
    build_cnot_chain, build_iswap_chain, chain_conjugated_operator, cnot_chain_conjugated,
    derive_trace, derive_trace_terms_only, iswap_chain_conjugated,
};
use overrot_core::evolve::{evolve_ideal, Backend, EvolveOptions, InitialState};
use overrot_core::fermion::{build_hubbard_spinflip, number_operator};
use overrot_core::gates::{
    sample_errors, CompiledProgram, ErrorRealization, Gate, HubbardParams, NoiseModel,
    TemporalMode, TrotterProgram, Variant,
};
use overrot_core::pauli::{OperatorSum, Pauli};

fn unit_model() -> HubbardParams {
    HubbardParams {
        u: 1.0,
        t1: 1.0,
        t2: 1.0,
    }
}

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

/// Criterion 1: the Jordan-Wigner image of the two-site spin-flip model
/// with U = t₁ = t₂ equals the hand-built qubit Hamiltonian term by term.
#[test]
fn acceptance_01_hamiltonian_mapping() {
    let n = 4;
    let sp = |q: usize| OperatorSum::sigma_plus(n, q).unwrap();
    let sm = |q: usize| OperatorSum::sigma_minus(n, q).unwrap();
    let z = |q: usize| OperatorSum::pauli(n, q, Pauli::Z).unwrap();
    let pair = |a: usize, b: usize| sp(a).mul(&sm(a)).mul(&sp(b)).mul(&sm(b));
    let hop = |a: usize, b: usize| sp(a).mul(&sm(b)).add(&sm(a).mul(&sp(b)));
    let string_hop = {
        let fwd = sp(1).mul(&z(2)).mul(&z(3)).mul(&sm(4));
        fwd.add(&fwd.adjoint())
    };
    let expected = pair(1, 4)
        .add(&pair(2, 3))
        .add(&hop(1, 2).add(&hop(3, 4)).scale_re(-1.0))
        .add(&hop(2, 3).add(&string_hop).scale_re(-1.0));

    let mapped = build_hubbard_spinflip(1.0, 1.0, 1.0).realize().unwrap();

    let mut pass = mapped.terms().len() == expected.terms().len();
    let mut worst = 0.0f64;
    for (a, b) in mapped.terms().iter().zip(expected.terms()) {
        if a.factors != b.factors {
            pass = false;
        }
        worst = worst.max((a.coeff - b.coeff).norm());
    }
    pass = pass && worst < 1e-12;
    report(
        "1 (Hamiltonian mapping)",
        pass,
        &format!(
            "{} canonical terms, worst coefficient deviation {worst:.2e}",
            mapped.terms().len()
        ),
    );
    assert!(pass);
}

/// Criterion 2: per-variant, per-realization quadratic scaling of the
/// step-level equivalence defect under halving of gτ/n.
#[test]
fn acceptance_02_step_equivalence_scaling() {
    let h = build_hubbard_spinflip(1.0, 1.0, 1.0).realize().unwrap();
    let h_dense = h.to_dense(4).unwrap();
    let steps = [0.1, 0.05, 0.025];
    let mut worst_ratio = f64::INFINITY;
    for variant in [Variant::CzChain, Variant::CnotChain, Variant::IswapChain] {
        for seed in 0..20u64 {
            let mut residuals = Vec::new();
            for &dt in &steps {
                let program = TrotterProgram::build(unit_model(), variant, dt, 1).unwrap();
                // Normalized draws shared across step sizes, scaled to
                // Var = 0.5·gτ/n.
                let noise = NoiseModel::new(1.0, TemporalMode::QuasiStatic, seed).unwrap();
                let r = sample_errors(&program, &noise).scaled(0.5 * dt);
                let trace = derive_trace(&program, &r).unwrap();
                let compiled = CompiledProgram::new(&program);
                let faulty = compiled.step_unitary(&r, 0);
                let h_eff = h_dense.add(&trace.step(0).to_dense(4).unwrap());
                let effective = dense::eigh(&h_eff).exp_i(-dt);
                residuals.push(phase_aligned_distance(&faulty, &effective));
            }
            for w in residuals.windows(2) {
                worst_ratio = worst_ratio.min(w[0] / w[1]);
            }
        }
    }
    let pass = worst_ratio >= 3.5;
    report(
        "2 (step-level equivalence)",
        pass,
        &format!("worst halving ratio {worst_ratio:.2} (need >= 3.5)"),
    );
    assert!(pass);
}

/// Criterion 3: single-run spectral agreement between the faulty circuit
/// and the effective-Hamiltonian evolution at τ = 1000/g, gτ/n = 0.05,
/// σ = 0.5·gτ/n, asserted at the stated 2 % of the dominant faulty peak.
///
/// The stepwise-exact backend drops O(δφ·gτ/n) and O(δφ²) per-step terms;
/// over 20 000 steps they random-walk to a spectral difference of order
/// 10⁻¹ of the peak, so this criterion fails as stated (both for the
/// spec's summed-exponential backend and for the tighter split-matched
/// propagator).  The measured ratios are printed; the analysis lives in
/// the project notes.
#[test]
fn acceptance_03_trajectory_level_agreement() {
    let mut config = base_config();
    config.tau_g = 1000.0;
    config.step_g = 0.05;
    config.noise.std_dev = 0.5 * config.step_g;
    config.noise.temporal_mode = TemporalMode::PerStepIid;
    config.noise.seed = 20_180_212;
    config.ensemble_size = 1;
    config.initial_state = vec![1, 2];
    config.observables = vec![Observable::N1];
    config.backends = vec![Backend::FaultyCircuit, Backend::EffectiveHamiltonian];

    let mut ratios = Vec::new();
    for mode in [EffectiveMode::StepwiseExact, EffectiveMode::SplitMatched] {
        config.effective_mode = mode;
        let result = simulate(&config, None).unwrap();
        let faulty = result.backend(Backend::FaultyCircuit).unwrap();
        let effective = result.backend(Backend::EffectiveHamiltonian).unwrap();
        let fs = faulty.spectrum_mean.as_ref().unwrap();
        let es = effective.spectrum_mean.as_ref().unwrap();
        let peak = fs.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        let diff = fs
            .iter()
            .zip(es)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        ratios.push((mode, diff / peak));
    }
    let stated = ratios[0].1; // the spec's stepwise-exact backend
    let pass = stated < 0.02;
    report(
        "3 (trajectory-level agreement)",
        pass,
        &format!(
            "max |ΔS|/peak = {:.3e} (stepwise-exact), {:.3e} (split-matched); stated bound 2e-2",
            ratios[0].1, ratios[1].1
        ),
    );
    assert!(
        pass,
        "spectral difference {stated:.3e} exceeds the stated 2e-2 bound; \
         see the decisions ledger for the accumulated second-order analysis"
    );
}

/// Criterion 4: ensemble-averaged line shapes broaden monotonically with
/// the noise strength, and the weakest noise adds little width.
#[test]
fn acceptance_04_broadening_monotonicity() {
    let mut config = base_config();
    config.tau_g = 1000.0;
    config.step_g = 0.05;
    config.noise.temporal_mode = TemporalMode::PerStepIid;
    config.ensemble_size = 200;
    config.initial_state = vec![1, 2];
    config.observables = vec![Observable::N1];
    config.backends = vec![Backend::FaultyCircuit, Backend::IdealExact];

    let mut widths = Vec::new();
    let mut ideal_width = 0.0;
    for (i, factor) in [0.1, 0.25, 0.5].into_iter().enumerate() {
        config.noise.std_dev = factor * config.step_g;
        config.noise.seed = 41_000 + i as u64;
        let result = simulate(&config, None).unwrap();
        let freqs = result.frequencies.as_ref().unwrap();
        let faulty = result.backend(Backend::FaultyCircuit).unwrap();
        let mags = faulty.spectrum_abs_mean.as_ref().unwrap();
        widths.push(fwhm_of_dominant_peak(freqs, mags).unwrap());
        if i == 0 {
            let ideal = result.backend(Backend::IdealExact).unwrap();
            let ideal_mags = ideal.spectrum_abs_mean.as_ref().unwrap();
            ideal_width = fwhm_of_dominant_peak(freqs, ideal_mags).unwrap();
        }
    }
    let monotone = widths.windows(2).all(|w| w[1] >= w[0]);
    let little_widening = widths[0] <= 1.2 * ideal_width;
    let pass = monotone && little_widening;
    report(
        "4 (broadening monotonicity)",
        pass,
        &format!(
            "FWHM = {:.4}, {:.4}, {:.4} over Var/step = 0.1, 0.25, 0.5; ideal {:.4}",
            widths[0], widths[1], widths[2], ideal_width
        ),
    );
    assert!(pass);
}

/// Criterion 5: quasi-static noise drives the iSWAP-string variant to a
/// damped spread distinct from half filling, the CNOT-string variant to
/// the half-filling value σ² = 1/2, and only the CNOT variant's disorder
/// breaks particle-number conservation.
#[test]
fn acceptance_05_variant_physics_divergence() {
    let tau = 250.0;
    let step = 0.05;
    let n_steps = (tau / step) as usize;

    // Ideal reference.
    let h = build_hubbard_spinflip(1.0, 1.0, 1.0).realize().unwrap();
    let psi0 = InitialState::new(vec![1]).state_vector(4).unwrap();
    let opts = EvolveOptions::with_sigma2();
    let ideal = evolve_ideal(&h, &psi0, tau, n_steps, &opts).unwrap();
    let ideal_s2 = ideal.sigma2.as_ref().unwrap();
    let half_start = ideal_s2.len() / 2;
    let ideal_longtime =
        ideal_s2[half_start..].iter().sum::<f64>() / (ideal_s2.len() - half_start) as f64;
    let q = ideal_s2.len() - ideal_s2.len() / 4;
    let spread = |xs: &[f64]| {
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
    };
    let ideal_late_osc = spread(&ideal_s2[q..]);

    let mut config = base_config();
    config.tau_g = tau;
    config.step_g = step;
    config.noise.std_dev = 0.1 * step;
    config.noise.temporal_mode = TemporalMode::QuasiStatic;
    config.noise.seed = 88;
    config.ensemble_size = 200;
    config.initial_state = vec![1];
    config.observables = vec![Observable::Sigma2, Observable::N1];
    config.backends = vec![Backend::FaultyCircuit];

    let mut finals = Vec::new();
    let mut oscillations = Vec::new();
    for variant in [Variant::IswapChain, Variant::CnotChain] {
        config.variant = variant;
        let result = simulate(&config, None).unwrap();
        let s2 = result
            .backend(Backend::FaultyCircuit)
            .unwrap()
            .sigma2_mean
            .as_ref()
            .unwrap()
            .clone();
        finals.push(s2[q..].iter().sum::<f64>() / (s2.len() - q) as f64);
        oscillations.push(spread(&s2[q..]));
    }

    // (a) iSWAP-string variant: damped toward the weak-disorder attractor
    // near the ideal long-time mean, clearly below half filling.
    let damped = oscillations[0] < 0.25 * ideal_late_osc;
    let near_ideal = (finals[0] - ideal_longtime).abs() <= 0.2;
    let below_half_filling = finals[0] <= 0.45;
    // (b) CNOT-string variant: half filling within the stated tolerance.
    let cnot_half_filling = (finals[1] - 0.5).abs() <= 0.1;

    // (c) exact conservation of the disorder operators.
    let n_tot = number_operator(&[1, 2, 3, 4], 4).unwrap();
    let mut conserving_ok = true;
    let mut cnot_violates = false;
    for variant in [Variant::CzChain, Variant::IswapChain, Variant::CnotChain] {
        let program = TrotterProgram::build(unit_model(), variant, step, 1).unwrap();
        let noise = NoiseModel::new(0.1 * step, TemporalMode::QuasiStatic, 5).unwrap();
        let r = sample_errors(&program, &noise);
        let trace = derive_trace(&program, &r).unwrap();
        let comm = n_tot.commutator(trace.step(0)).coeff_norm();
        match variant {
            Variant::CnotChain => cnot_violates = comm > 1e-6,
            _ => conserving_ok = conserving_ok && comm < 1e-12,
        }
    }

    let pass =
        damped && near_ideal && below_half_filling && cnot_half_filling && conserving_ok && cnot_violates;
    report(
        "5 (variant physics divergence)",
        pass,
        &format!(
            "iswap final {:.3} (ideal mean {:.3}), cnot final {:.3} (target 0.5), \
             late oscillation {:.4} vs ideal {:.4}, conservation split {}",
            finals[0],
            ideal_longtime,
            finals[1],
            oscillations[0],
            ideal_late_osc,
            conserving_ok && cnot_violates
        ),
    );
    assert!(damped, "iswap-variant oscillation not damped");
    assert!(
        near_ideal,
        "iswap-variant settles at {:.3}, ideal long-time mean {:.3}",
        finals[0], ideal_longtime
    );
    assert!(below_half_filling);
    assert!(
        cnot_half_filling,
        "cnot-variant settles at {:.3}, expected 0.5 ± 0.1",
        finals[1]
    );
    assert!(conserving_ok && cnot_violates);
}

/// Criterion 6: the minimal-fidelity relation F_min = cos(δφ) and the
/// printed reference values.
#[test]
fn acceptance_06_minimal_fidelity() {
    let gate = Gate::iswap(2, 1, 2, false).unwrap();
    let mut worst = 0.0f64;
    let mut bound_ok = true;
    for delta in [0.025, 0.1, 0.3] {
        let r = min_fidelity_bruteforce(&gate, delta, 10_000, 7).unwrap();
        assert!(r.spans_unit_interval);
        worst = worst.max((r.analytic - delta.cos()).abs());
        bound_ok = bound_ok && r.value >= delta.cos() - 1e-9;
    }

    // Printed-precision reference points.
    let f1 = 0.025f64.cos();
    let f2 = 0.0125f64.cos();
    let table_ok = (100.0 * f1 * 1000.0).round() / 1000.0 == 99.969
        && (100.0 * f2 * 1000.0).round() / 1000.0 == 99.992
        && (0.99f64.acos() * 1000.0).round() / 1000.0 == 0.142;

    let pass = worst < 1e-9 && bound_ok && table_ok;
    report(
        "6 (minimal gate fidelity)",
        pass,
        &format!(
            "analytic deviation {worst:.1e}, bound intact {bound_ok}, \
             table 99.969/99.992/0.142 reproduced {table_ok}"
        ),
    );
    assert!(pass);
    // Consistency of the averaged relation at the moderate widths used here.
    assert!((averaged_fidelity(0.142) - 0.98992).abs() < 5e-6);
}

/// Criterion 7: the gate-budget bound M·n < 1/√(2(1−F̄)).
#[test]
fn acceptance_07_gate_budget() {
    let b99 = match gate_budget(0.99, 1).unwrap() {
        BudgetOutcome::Bounded { mn_bound, .. } => mn_bound,
        BudgetOutcome::Unbounded => f64::NAN,
    };
    let b9999 = match gate_budget(0.9999, 1).unwrap() {
        BudgetOutcome::Bounded { mn_bound, .. } => mn_bound,
        BudgetOutcome::Unbounded => f64::NAN,
    };
    let pass = (b99 - 7.0710678118654755).abs() < 1e-6 && (b9999 - 70.71067811865476).abs() < 1e-6;
    report(
        "7 (gate budget)",
        pass,
        &format!("F̄ = 0.99 → {b99:.4}; F̄ = 0.9999 → {b9999:.4}"),
    );
    assert!(pass);

    // A per-step count divides the bound into whole steps.
    match gate_budget(0.999969, 1).unwrap() {
        BudgetOutcome::Bounded { mn_bound, .. } => assert!((mn_bound - 127.0).abs() < 0.1),
        BudgetOutcome::Unbounded => panic!("should be bounded"),
    }
}

/// Criterion 8: chain closed forms match dense iterated conjugation for
/// chain lengths 2 through 6.
#[test]
fn acceptance_08_chain_derivations() {
    let mut worst = 0.0f64;
    for m in 2usize..=6 {
        for (chain, formula) in [
            (build_cnot_chain(m).unwrap(), cnot_chain_conjugated(m).unwrap()),
            (build_iswap_chain(m).unwrap(), iswap_chain_conjugated(m).unwrap()),
        ] {
            // Symbolic engine vs closed form.
            let engine = chain_conjugated_operator(&chain);
            worst = worst.max(engine.sub(&formula).coeff_norm());
            // Dense iterated conjugation oracle.
            let mut w = chain[0].generator.to_dense(m).unwrap();
            for gate in &chain[1..] {
                let u = gate.unitary(0.0);
                w = u.mul(&w).mul(&u.adjoint());
            }
            worst = worst.max(formula.to_dense(m).unwrap().sub(&w).frobenius_norm());
        }
    }
    let pass = worst < 1e-12;
    report(
        "8 (chain derivations)",
        pass,
        &format!("worst defect {worst:.2e} over chain lengths 2..=6"),
    );
    assert!(pass);
}

/// Criterion 9: with fixed angles, doubling the step count doubles the
/// disorder magnitude exactly.
#[test]
fn acceptance_09_linear_disorder_scaling() {
    let tau = 2.0;
    let p1 = TrotterProgram::build(unit_model(), Variant::IswapChain, tau, 8).unwrap();
    let p2 = TrotterProgram::build(unit_model(), Variant::IswapChain, tau, 16).unwrap();
    let gps = p1.step_gates.len();
    let angles: Vec<f64> = (0..gps).map(|g| 0.004 * (g as f64 + 1.0)).collect();
    let tile = |steps: usize| {
        let mut v = Vec::new();
        for _ in 0..steps {
            v.extend(angles.iter().copied());
        }
        ErrorRealization::from_values(steps, gps, v)
    };
    let t1 = derive_trace_terms_only(&p1, &tile(8)).unwrap();
    let t2 = derive_trace_terms_only(&p2, &tile(16)).unwrap();
    let n1 = t1.step(0).spectral_norm();
    let n2 = t2.step(0).spectral_norm();
    let defect = (n2 - 2.0 * n1).abs();
    let operator_defect = t2.step(0).sub(&t1.step(0).scale_re(2.0)).coeff_norm();
    let pass = defect < 1e-12 && operator_defect < 1e-12;
    report(
        "9 (linear disorder scaling)",
        pass,
        &format!("norm defect {defect:.2e}, operator defect {operator_defect:.2e}"),
    );
    assert!(pass);
}

fn base_config() -> ExperimentConfig {
    ExperimentConfig {
        model: unit_model(),
        variant: Variant::from_str("cz_chain").unwrap(),
        tau_g: 10.0,
        step_g: 0.05,
        noise: NoiseModel {
            std_dev: 0.025,
            temporal_mode: TemporalMode::PerStepIid,
            seed: 1,
        },
        ensemble_size: 1,
        initial_state: vec![1, 2],
        observables: vec![Observable::N1],
        backends: vec![Backend::FaultyCircuit],
        effective_mode: EffectiveMode::StepwiseExact,
        window_sigma_g: None,
        r_coords: None,
        out_dir: std::path::PathBuf::from("unused"),
    }
}
