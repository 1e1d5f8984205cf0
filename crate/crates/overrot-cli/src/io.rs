//! Output files: manifest, trajectory/spectrum CSVs, and the summary.
//!
//! One directory per experiment with `manifest.json`, `trajectories.csv`,
//! `spectrum.csv` (plus `spectrum_diff.csv` when both the faulty and
//! effective backends ran), and `summary.json`.  Floats are written in
//! shortest round-trip form, so identical runs produce identical bytes.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use overrot_core::analysis::fwhm_of_dominant_peak;
use overrot_core::evolve::Backend;

use crate::config::ExperimentConfig;
use crate::experiment::{BackendOutput, ExperimentResult};
use crate::CliError;

fn backend_tag(b: Backend) -> &'static str {
    match b {
        Backend::FaultyCircuit => "faulty",
        Backend::EffectiveHamiltonian => "effective",
        Backend::IdealExact => "ideal",
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'static str,
    config: &'a ExperimentConfig,
    n_steps: usize,
    gates_per_step: usize,
    noisy_gates_per_step: usize,
    run_seeds: &'a [u64],
}

/// Peak statistics and run metadata per backend.
#[derive(Debug, Clone, Serialize)]
pub struct BackendSummary {
    pub backend: Backend,
    pub n_runs: usize,
    pub norm_drift_max: f64,
    pub dominant_peak_omega: Option<f64>,
    pub dominant_peak_height: Option<f64>,
    pub fwhm: Option<f64>,
    pub final_quarter_sigma2_mean: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub backends: Vec<BackendSummary>,
    /// Max |S_faulty − S_effective| over the grid, when both backends ran.
    pub spectral_diff_max: Option<f64>,
    /// The same difference relative to the faulty spectrum's dominant peak.
    pub spectral_diff_ratio: Option<f64>,
}

fn peak_stats(frequencies: &[f64], out: &BackendOutput) -> (Option<f64>, Option<f64>, Option<f64>) {
    // Peaks are read off the averaged line shape (mean of |S|), which is
    // what survives ensemble dephasing.
    let Some(mags) = out.spectrum_abs_mean.as_ref() else {
        return (None, None, None);
    };
    let mags: Vec<f64> = mags.clone();
    let peak = frequencies
        .iter()
        .zip(&mags)
        .filter(|(f, _)| **f > 0.0)
        .map(|(f, m)| (*f, *m))
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let fwhm = fwhm_of_dominant_peak(frequencies, &mags);
    match peak {
        Some((f, h)) => (Some(f), Some(h), fwhm),
        None => (None, None, fwhm),
    }
}

/// Mean over the final quarter of a time series.
pub fn final_quarter_mean(values: &[f64]) -> f64 {
    let start = values.len() - values.len() / 4;
    let tail = &values[start..];
    tail.iter().sum::<f64>() / tail.len().max(1) as f64
}

pub fn summarize(result: &ExperimentResult) -> Summary {
    let backends = result
        .outputs
        .iter()
        .map(|out| {
            let (omega, height, fwhm) = match result.frequencies.as_ref() {
                Some(freqs) => peak_stats(freqs, out),
                None => (None, None, None),
            };
            BackendSummary {
                backend: out.backend,
                n_runs: out.n_runs,
                norm_drift_max: out.norm_drift_max,
                dominant_peak_omega: omega,
                dominant_peak_height: height,
                fwhm,
                final_quarter_sigma2_mean: out
                    .sigma2_mean
                    .as_ref()
                    .map(|s| final_quarter_mean(s)),
            }
        })
        .collect();

    let mut diff_max = None;
    let mut diff_ratio = None;
    if let (Some(f), Some(e)) = (
        result.backend(Backend::FaultyCircuit),
        result.backend(Backend::EffectiveHamiltonian),
    ) {
        if let (Some(fs), Some(es)) = (f.spectrum_mean.as_ref(), e.spectrum_mean.as_ref()) {
            let max = fs
                .iter()
                .zip(es)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0f64, f64::max);
            diff_max = Some(max);
            let peak = fs.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
            if peak > 0.0 {
                diff_ratio = Some(max / peak);
            }
        }
    }
    Summary {
        backends,
        spectral_diff_max: diff_max,
        spectral_diff_ratio: diff_ratio,
    }
}

fn write_rows(
    path: &Path,
    header: &[String],
    n_rows: usize,
    mut cell: impl FnMut(usize, usize) -> f64,
) -> std::io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for row in 0..n_rows {
        for col in 0..header.len() {
            if col > 0 {
                write!(w, ",")?;
            }
            write!(w, "{}", cell(row, col))?;
        }
        writeln!(w)?;
    }
    w.flush()
}

/// Write the full output directory for an experiment.
pub fn write_outputs(
    config: &ExperimentConfig,
    result: &ExperimentResult,
    out_dir: &Path,
) -> Result<Summary, CliError> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::runtime(format!("{}: {e}", out_dir.display())))?;
    let io_err = |e: std::io::Error| CliError::runtime(e.to_string());

    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        config,
        n_steps: result.n_steps,
        gates_per_step: result.gates_per_step,
        noisy_gates_per_step: result.noisy_gates_per_step,
        run_seeds: &result.run_seeds,
    };
    fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n",
    )
    .map_err(io_err)?;

    // trajectories.csv: t_g plus mean/stderr columns per backend.
    let mut header = vec!["t_g".to_string()];
    let mut columns: Vec<&Vec<f64>> = Vec::new();
    let ensemble = config.ensemble_size > 1;
    for out in &result.outputs {
        let tag = backend_tag(out.backend);
        header.push(format!("n1_{tag}"));
        columns.push(&out.n1_mean);
        if ensemble && out.backend != Backend::IdealExact {
            header.push(format!("n1_{tag}_stderr"));
            columns.push(&out.n1_stderr);
        }
        if let Some(s2) = out.sigma2_mean.as_ref() {
            header.push(format!("sigma2_{tag}"));
            columns.push(s2);
            if ensemble && out.backend != Backend::IdealExact {
                header.push(format!("sigma2_{tag}_stderr"));
                columns.push(out.sigma2_stderr.as_ref().expect("stderr with mean"));
            }
        }
    }
    let times = &result.times;
    write_rows(
        &out_dir.join("trajectories.csv"),
        &header,
        times.len(),
        |row, col| {
            if col == 0 {
                times[row]
            } else {
                columns[col - 1][row]
            }
        },
    )
    .map_err(io_err)?;

    // spectrum.csv: omega_g plus |S| per backend (and stderr for ensembles).
    if let Some(frequencies) = result.frequencies.as_ref() {
        let mut header = vec!["omega_g".to_string()];
        let mut columns: Vec<Vec<f64>> = Vec::new();
        for out in &result.outputs {
            let Some(mags) = out.spectrum_abs_mean.as_ref() else {
                continue;
            };
            let tag = backend_tag(out.backend);
            header.push(format!("abs_{tag}"));
            columns.push(mags.clone());
            if ensemble && out.backend != Backend::IdealExact {
                header.push(format!("abs_{tag}_stderr"));
                columns.push(out.spectrum_abs_stderr.clone().expect("stderr with mean"));
            }
        }
        write_rows(
            &out_dir.join("spectrum.csv"),
            &header,
            frequencies.len(),
            |row, col| {
                if col == 0 {
                    frequencies[row]
                } else {
                    columns[col - 1][row]
                }
            },
        )
        .map_err(io_err)?;

        // Difference file when both the faulty and the effective spectra
        // exist (the fine-scale equivalence check).
        if let (Some(f), Some(e)) = (
            result.backend(Backend::FaultyCircuit),
            result.backend(Backend::EffectiveHamiltonian),
        ) {
            if let (Some(fs), Some(es)) = (f.spectrum_mean.as_ref(), e.spectrum_mean.as_ref()) {
                let diff: Vec<f64> = fs.iter().zip(es).map(|(a, b)| (a - b).norm()).collect();
                write_rows(
                    &out_dir.join("spectrum_diff.csv"),
                    &["omega_g".to_string(), "abs_diff".to_string()],
                    frequencies.len(),
                    |row, col| {
                        if col == 0 {
                            frequencies[row]
                        } else {
                            diff[row]
                        }
                    },
                )
                .map_err(io_err)?;
            }
        }
    }

    let summary = summarize(result);
    fs::write(
        out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n",
    )
    .map_err(io_err)?;
    Ok(summary)
}

/// The `simulate` entry point: validate, run, write.
pub fn run_experiment(
    config: &ExperimentConfig,
    workers: Option<usize>,
) -> Result<(ExperimentResult, Summary), CliError> {
    let result = crate::experiment::simulate(config, workers)?;
    let out_dir: PathBuf = config.out_dir.clone();
    let summary = write_outputs(config, &result, &out_dir)?;
    Ok((result, summary))
}
