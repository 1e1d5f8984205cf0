use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use overrot_cli::config::{validate, ExperimentConfig};
use overrot_cli::io::run_experiment;
use overrot_cli::{presets, CliError};
use overrot_core::analysis::{gate_budget, BudgetOutcome};
use overrot_core::gates::Variant;

#[derive(Parser)]
#[command(
    name = "overrot",
    version,
    about = "Trotterized Fermi-Hubbard simulation under coherent over-rotation gate errors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a JSON configuration (or a manifest).
    Simulate {
        /// Configuration file; a manifest.json from a previous run works too.
        #[arg(long)]
        config: PathBuf,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the ensemble size.
        #[arg(long)]
        ensemble: Option<usize>,
        /// Override the circuit variant (cz_chain | cnot_chain | iswap_chain).
        #[arg(long)]
        variant: Option<String>,
        /// Override the over-rotation standard deviation (radians).
        #[arg(long)]
        std_dev: Option<f64>,
        /// Override the total time τ·g.
        #[arg(long)]
        tau: Option<f64>,
        /// Override the Trotter step size gτ/n.
        #[arg(long)]
        step: Option<f64>,
        /// Worker threads (default: OVERROT_WORKERS or all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Gate-budget estimate from an averaged minimal gate fidelity.
    Budget {
        /// Averaged minimal gate fidelity, in (0, 1].
        #[arg(long)]
        fidelity: f64,
        /// Faulty two-qubit gates per Trotter step.
        #[arg(long, default_value_t = 1)]
        gates_per_step: u32,
    },
    /// Check a configuration file and report diagnostics.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a named preset (fig4 | fig6 | fig8).
    Preset {
        name: String,
        /// Output root directory (default: runs/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the configuration files without running.
        #[arg(long)]
        config_only: bool,
        /// Override the ensemble size.
        #[arg(long)]
        ensemble: Option<usize>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    // A manifest embeds the configuration under "config".
    let config_value = value.get("config").cloned().unwrap_or(value);
    serde_json::from_value(config_value)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn cmd_simulate(
    config_path: PathBuf,
    out: Option<PathBuf>,
    seed: Option<u64>,
    ensemble: Option<usize>,
    variant: Option<String>,
    std_dev: Option<f64>,
    tau: Option<f64>,
    step: Option<f64>,
    workers: Option<usize>,
) -> Result<(), CliError> {
    let mut config = load_config(&config_path)?;
    if let Some(out) = out {
        config.out_dir = out;
    }
    if let Some(seed) = seed {
        config.noise.seed = seed;
    }
    if let Some(e) = ensemble {
        config.ensemble_size = e;
    }
    if let Some(v) = variant {
        config.variant = Variant::from_str(&v).map_err(CliError::usage)?;
    }
    if let Some(s) = std_dev {
        config.noise.std_dev = s;
    }
    if let Some(t) = tau {
        config.tau_g = t;
    }
    if let Some(s) = step {
        config.step_g = s;
    }
    let diagnostics = validate(&config);
    for w in &diagnostics.warnings {
        eprintln!("warning: {w}");
    }
    if !diagnostics.is_ok() {
        return Err(CliError::usage(diagnostics.errors.join("; ")));
    }
    let (result, summary) = run_experiment(&config, workers)?;
    println!(
        "wrote {} ({} steps, {} noisy gates/step, {} run{})",
        config.out_dir.display(),
        result.n_steps,
        result.noisy_gates_per_step,
        config.ensemble_size,
        if config.ensemble_size == 1 { "" } else { "s" }
    );
    for b in &summary.backends {
        if let (Some(omega), Some(fwhm)) = (b.dominant_peak_omega, b.fwhm) {
            println!(
                "  {:?}: dominant peak at omega = {omega:.4} g, FWHM = {fwhm:.4} g",
                b.backend
            );
        }
        if let Some(s2) = b.final_quarter_sigma2_mean {
            println!("  {:?}: final-quarter mean sigma^2 = {s2:.4}", b.backend);
        }
    }
    if let Some(ratio) = summary.spectral_diff_ratio {
        println!("  faulty-vs-effective spectral difference: {ratio:.3e} of peak");
    }
    Ok(())
}

fn cmd_budget(fidelity: f64, gates_per_step: u32) -> Result<(), CliError> {
    match gate_budget(fidelity, gates_per_step).map_err(|e| CliError::usage(e.to_string()))? {
        BudgetOutcome::Bounded {
            mn_bound,
            max_steps,
        } => {
            println!("averaged minimal fidelity      {fidelity}");
            println!("gates per Trotter step (M)     {gates_per_step}");
            println!("bound on total faulty gates    M*n < {mn_bound:.4}");
            println!("maximum Trotter steps (n)      {max_steps}");
        }
        BudgetOutcome::Unbounded => {
            println!("averaged minimal fidelity      {fidelity}");
            println!("perfect gates: no finite bound on the gate count");
        }
    }
    Ok(())
}

fn cmd_validate(config_path: PathBuf) -> Result<(), CliError> {
    let config = load_config(&config_path)?;
    let diagnostics = validate(&config);
    for w in &diagnostics.warnings {
        println!("warning: {w}");
    }
    if !diagnostics.is_ok() {
        for e in &diagnostics.errors {
            eprintln!("error: {e}");
        }
        return Err(CliError::usage("configuration invalid".to_string()));
    }
    println!(
        "ok: {} Trotter steps, variant {}, ensemble {}",
        config.n_steps().expect("validated"),
        config.variant,
        config.ensemble_size
    );
    Ok(())
}

fn cmd_preset(
    name: String,
    out: Option<PathBuf>,
    config_only: bool,
    ensemble: Option<usize>,
    workers: Option<usize>,
) -> Result<(), CliError> {
    let out_root = out.unwrap_or_else(|| PathBuf::from("runs").join(&name));
    let configs = presets::by_name(&name, &out_root, ensemble)?;
    for (label, config) in configs {
        std::fs::create_dir_all(&config.out_dir)
            .map_err(|e| CliError::runtime(format!("{}: {e}", config.out_dir.display())))?;
        let path = config.out_dir.join("config.json");
        std::fs::write(
            &path,
            serde_json::to_string_pretty(&config).expect("config serializes") + "\n",
        )
        .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
        if config_only {
            println!("wrote {}", path.display());
            continue;
        }
        println!("running {label} ...");
        let (_, summary) = run_experiment(&config, workers)?;
        if let Some(ratio) = summary.spectral_diff_ratio {
            println!("  spectral difference ratio {ratio:.3e}");
        }
        println!("  wrote {}", config.out_dir.display());
    }
    Ok(())
}

fn run() -> Result<(), CliError> {
    let cli = Cli::try_parse().map_err(|e| {
        // clap renders its own message; keep it verbatim.
        let _ = e.print();
        CliError::usage(String::new())
    })?;
    match cli.command {
        Command::Simulate {
            config,
            out,
            seed,
            ensemble,
            variant,
            std_dev,
            tau,
            step,
            workers,
        } => cmd_simulate(
            config, out, seed, ensemble, variant, std_dev, tau, step, workers,
        ),
        Command::Budget {
            fidelity,
            gates_per_step,
        } => cmd_budget(fidelity, gates_per_step),
        Command::Validate { config } => cmd_validate(config),
        Command::Preset {
            name,
            out,
            config_only,
            ensemble,
            workers,
        } => cmd_preset(name, out, config_only, ensemble, workers),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string();
            if !msg.ends_with(": ") && !matches!(&e, CliError::Usage(m) if m.is_empty()) {
                eprintln!("{msg}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
