//! Spectra, ensemble statistics, fidelity relations, and the gate budget.
//!
//! The observable trajectory is mean-removed, multiplied by a Gaussian
//! window centred mid-run, and Fourier transformed on the exact grid of the
//! time slicing (arbitrary-length transforms go through Bluestein's chirp
//! algorithm on top of a radix-2 kernel).  Ensembles are averaged pointwise
//! with a standard error per point, streamed through Welford accumulators so
//! memory is independent of the ensemble size.
//!
//! The fidelity side: an over-rotation by δφ of a gate whose generator
//! spectrum spans [−1, 1] has minimal fidelity cos(δφ) (the Bures angle is
//! |δφ|); averaging cos over a zero-mean normal of width σ gives
//! F̄ ≈ 1 − σ²/2, and requiring the accumulated disorder to stay below the
//! model's energy scale bounds the total number of faulty two-qubit gates by
//! `M n < 1/√(2(1 − F̄))`.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dense::{self, C64};
use crate::error::{Error, Result};
use crate::evolve::Trajectory;
use crate::gates::Gate;
use crate::rng;

pub mod fft {
    //! Forward DFT `X_k = Σ_n x_n e^{−2πi nk/N}` for arbitrary N.

    use super::*;

    /// Direct O(N²) transform; the oracle the fast paths are tested against.
    pub fn dft(x: &[C64]) -> Vec<C64> {
        let n = x.len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (j, &v) in x.iter().enumerate() {
                let phase = -2.0 * core::f64::consts::PI * ((j * k) % n) as f64 / n as f64;
                acc += v * C64::from_polar(1.0, phase);
            }
            *o = acc;
        }
        out
    }

    fn fft_pow2(data: &mut [C64]) {
        let n = data.len();
        debug_assert!(n.is_power_of_two());
        // Bit-reversal permutation.
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                data.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let ang = -2.0 * core::f64::consts::PI / len as f64;
            let wlen = C64::from_polar(1.0, ang);
            let mut i = 0;
            while i < n {
                let mut w = C64::new(1.0, 0.0);
                for j in 0..len / 2 {
                    let u = data[i + j];
                    let v = data[i + j + len / 2] * w;
                    data[i + j] = u + v;
                    data[i + j + len / 2] = u - v;
                    w *= wlen;
                }
                i += len;
            }
            len <<= 1;
        }
    }

    fn ifft_pow2(data: &mut [C64]) {
        for z in data.iter_mut() {
            *z = z.conj();
        }
        fft_pow2(data);
        let n = data.len() as f64;
        for z in data.iter_mut() {
            *z = z.conj() / n;
        }
    }

    /// Chirp phase `e^{s·iπ n²/N}` with the square reduced modulo 2N in
    /// integer arithmetic, so the angle stays small and accurate.
    fn chirp(n: usize, big_n: usize, sign: f64) -> C64 {
        let r = ((n as u64).wrapping_mul(n as u64) % (2 * big_n as u64)) as f64;
        C64::from_polar(1.0, sign * core::f64::consts::PI * r / big_n as f64)
    }

    fn bluestein(x: &[C64]) -> Vec<C64> {
        let n = x.len();
        let m = (2 * n - 1).next_power_of_two();
        let mut a = vec![C64::new(0.0, 0.0); m];
        let mut b = vec![C64::new(0.0, 0.0); m];
        for j in 0..n {
            a[j] = x[j] * chirp(j, n, -1.0);
        }
        b[0] = C64::new(1.0, 0.0);
        for j in 1..n {
            let c = chirp(j, n, 1.0);
            b[j] = c;
            b[m - j] = c;
        }
        fft_pow2(&mut a);
        fft_pow2(&mut b);
        for (av, bv) in a.iter_mut().zip(&b) {
            *av *= bv;
        }
        ifft_pow2(&mut a);
        (0..n).map(|k| a[k] * chirp(k, n, -1.0)).collect()
    }

    /// Fast transform for any length.
    pub fn fft(x: &[C64]) -> Vec<C64> {
        if x.len() <= 1 {
            return x.to_vec();
        }
        if x.len().is_power_of_two() {
            let mut data = x.to_vec();
            fft_pow2(&mut data);
            data
        } else {
            bluestein(x)
        }
    }
}

/// Windowed Fourier spectrum on the FFT grid of the time slicing, with
/// frequencies in units of g sorted ascending (two-sided).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<C64>,
    pub window_sigma: f64,
}

impl Spectrum {
    pub fn magnitudes(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm()).collect()
    }

    /// Largest magnitude at strictly positive frequency.
    pub fn dominant_peak(&self) -> Option<(f64, f64)> {
        self.frequencies
            .iter()
            .zip(&self.amplitudes)
            .filter(|(f, _)| **f > 0.0)
            .map(|(f, a)| (*f, a.norm()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
    }
}

/// Two-sided angular-frequency grid of an `n`-point series with spacing
/// `dt`, sorted ascending; the grid [`windowed_spectrum`] reports on.
pub fn fft_frequency_grid(n: usize, dt: f64) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..n)
        .map(|k| {
            let signed_k = if k <= n / 2 {
                k as f64
            } else {
                k as f64 - n as f64
            };
            2.0 * core::f64::consts::PI * signed_k / (n as f64 * dt)
        })
        .collect();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid
}

/// Spectrum of a mean-removed, Gaussian-windowed time series on a uniform
/// grid; the window is centred mid-trajectory.
pub fn windowed_spectrum(times: &[f64], values: &[f64], window_sigma: f64) -> Result<Spectrum> {
    let n = values.len();
    if n < 8 {
        return Err(Error::TooFewSlices { len: n });
    }
    if times.len() != n {
        return Err(Error::GridMismatch);
    }
    let dt = times[1] - times[0];
    for w in times.windows(2) {
        if libm::fabs(w[1] - w[0] - dt) > 1e-9 * dt.max(1e-12) {
            return Err(Error::GridMismatch);
        }
    }
    if window_sigma <= 0.0 {
        return Err(Error::NotPositive {
            what: "window_sigma",
            value: window_sigma,
        });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let t_center = 0.5 * (times[0] + times[n - 1]);
    let series: Vec<C64> = times
        .iter()
        .zip(values)
        .map(|(&t, &v)| {
            let arg = (t - t_center) / window_sigma;
            C64::new((v - mean) * libm::exp(-0.5 * arg * arg), 0.0)
        })
        .collect();
    let raw = fft::fft(&series);

    // Two-sided grid: k ≤ N/2 positive, the rest wrapped negative.
    let mut pairs: Vec<(f64, C64)> = raw
        .into_iter()
        .enumerate()
        .map(|(k, a)| {
            let signed_k = if k <= n / 2 {
                k as f64
            } else {
                k as f64 - n as f64
            };
            let omega = 2.0 * core::f64::consts::PI * signed_k / (n as f64 * dt);
            (omega, a)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    debug_assert_eq!(
        pairs.first().map(|p| p.0),
        fft_frequency_grid(n, dt).first().copied()
    );
    Ok(Spectrum {
        frequencies: pairs.iter().map(|p| p.0).collect(),
        amplitudes: pairs.into_iter().map(|p| p.1).collect(),
        window_sigma,
    })
}

/// Spectrum of a trajectory's ⟨n₁⟩ series; `window_sigma` defaults to τ/6.
pub fn trajectory_spectrum(traj: &Trajectory, window_sigma: Option<f64>) -> Result<Spectrum> {
    let tau = traj.times.last().copied().unwrap_or(0.0);
    windowed_spectrum(
        &traj.times,
        &traj.n1,
        window_sigma.unwrap_or(tau / 6.0),
    )
}

/// Running mean and standard error per point (Welford).
#[derive(Debug, Clone)]
pub struct SeriesAccumulator {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl SeriesAccumulator {
    pub fn new(len: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    pub fn push(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.mean.len() {
            return Err(Error::GridMismatch);
        }
        self.count += 1;
        let c = self.count as f64;
        for (i, &v) in values.iter().enumerate() {
            let d = v - self.mean[i];
            self.mean[i] += d / c;
            self.m2[i] += d * (v - self.mean[i]);
        }
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Standard error of the mean per point; zero for a single sample.
    pub fn standard_error(&self) -> Vec<f64> {
        if self.count < 2 {
            return vec![0.0; self.mean.len()];
        }
        let n = self.count as f64;
        self.m2
            .iter()
            .map(|m2| libm::sqrt(m2 / (n - 1.0) / n))
            .collect()
    }
}

/// Complex pointwise mean with a per-point scatter estimate.
#[derive(Debug, Clone)]
pub struct ComplexSeriesAccumulator {
    re: SeriesAccumulator,
    im: SeriesAccumulator,
}

impl ComplexSeriesAccumulator {
    pub fn new(len: usize) -> Self {
        Self {
            re: SeriesAccumulator::new(len),
            im: SeriesAccumulator::new(len),
        }
    }

    pub fn push(&mut self, values: &[C64]) -> Result<()> {
        let re: Vec<f64> = values.iter().map(|z| z.re).collect();
        let im: Vec<f64> = values.iter().map(|z| z.im).collect();
        self.re.push(&re)?;
        self.im.push(&im)
    }

    pub fn count(&self) -> usize {
        self.re.count()
    }

    pub fn mean(&self) -> Vec<C64> {
        self.re
            .mean()
            .iter()
            .zip(self.im.mean())
            .map(|(&r, &i)| C64::new(r, i))
            .collect()
    }

    pub fn standard_error(&self) -> Vec<f64> {
        self.re
            .standard_error()
            .iter()
            .zip(self.im.standard_error())
            .map(|(&r, i)| libm::sqrt(r * r + i * i))
            .collect()
    }
}

/// Pointwise ensemble mean of trajectories with standard errors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AveragedTrajectory {
    pub n_runs: usize,
    pub times: Vec<f64>,
    pub mean_n1: Vec<f64>,
    pub stderr_n1: Vec<f64>,
    pub mean_sigma2: Option<Vec<f64>>,
    pub stderr_sigma2: Option<Vec<f64>>,
}

pub fn ensemble_average_trajectories(runs: &[Trajectory]) -> Result<AveragedTrajectory> {
    let first = runs.first().ok_or(Error::EmptyEnsemble)?;
    let len = first.times.len();
    let mut n1 = SeriesAccumulator::new(len);
    let mut s2 = first.sigma2.as_ref().map(|_| SeriesAccumulator::new(len));
    for run in runs {
        if run.times.len() != len
            || run
                .times
                .iter()
                .zip(&first.times)
                .any(|(a, b)| libm::fabs(a - b) > 1e-9)
        {
            return Err(Error::GridMismatch);
        }
        n1.push(&run.n1)?;
        if let Some(acc) = s2.as_mut() {
            let values = run.sigma2.as_ref().ok_or(Error::GridMismatch)?;
            acc.push(values)?;
        }
    }
    Ok(AveragedTrajectory {
        n_runs: runs.len(),
        times: first.times.clone(),
        mean_n1: n1.mean().to_vec(),
        stderr_n1: n1.standard_error(),
        mean_sigma2: s2.as_ref().map(|a| a.mean().to_vec()),
        stderr_sigma2: s2.as_ref().map(|a| a.standard_error()),
    })
}

/// Streaming ensemble statistics of spectra: the complex pointwise mean
/// (the spectrum of the mean trajectory) and the mean of the magnitudes.
/// The magnitude mean is the phase-insensitive line shape that survives
/// ensemble dephasing; disorder broadening is read off it.
#[derive(Debug, Clone)]
pub struct SpectrumAccumulator {
    complex: ComplexSeriesAccumulator,
    abs: SeriesAccumulator,
}

impl SpectrumAccumulator {
    pub fn new(len: usize) -> Self {
        Self {
            complex: ComplexSeriesAccumulator::new(len),
            abs: SeriesAccumulator::new(len),
        }
    }

    pub fn push(&mut self, amplitudes: &[C64]) -> Result<()> {
        self.complex.push(amplitudes)?;
        let mags: Vec<f64> = amplitudes.iter().map(|z| z.norm()).collect();
        self.abs.push(&mags)
    }

    pub fn count(&self) -> usize {
        self.complex.count()
    }

    pub fn finish(&self, frequencies: Vec<f64>, window_sigma: f64) -> AveragedSpectrum {
        AveragedSpectrum {
            n_runs: self.count(),
            frequencies,
            mean: self.complex.mean(),
            stderr: self.complex.standard_error(),
            mean_abs: self.abs.mean().to_vec(),
            stderr_abs: self.abs.standard_error(),
            window_sigma,
        }
    }
}

/// Pointwise ensemble mean of spectra with standard errors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AveragedSpectrum {
    pub n_runs: usize,
    pub frequencies: Vec<f64>,
    /// Complex pointwise mean (equals the spectrum of the mean trajectory).
    pub mean: Vec<C64>,
    pub stderr: Vec<f64>,
    /// Pointwise mean of |S(ω)| across runs.
    pub mean_abs: Vec<f64>,
    pub stderr_abs: Vec<f64>,
    pub window_sigma: f64,
}

impl AveragedSpectrum {
    /// The averaged line shape: mean of the magnitude spectra.
    pub fn magnitudes(&self) -> Vec<f64> {
        self.mean_abs.clone()
    }
}

pub fn ensemble_average_spectra(runs: &[Spectrum]) -> Result<AveragedSpectrum> {
    let first = runs.first().ok_or(Error::EmptyEnsemble)?;
    let len = first.frequencies.len();
    let mut acc = SpectrumAccumulator::new(len);
    for run in runs {
        if run.frequencies.len() != len
            || run
                .frequencies
                .iter()
                .zip(&first.frequencies)
                .any(|(a, b)| libm::fabs(a - b) > 1e-9)
        {
            return Err(Error::GridMismatch);
        }
        acc.push(&run.amplitudes)?;
    }
    Ok(acc.finish(first.frequencies.clone(), first.window_sigma))
}

/// Full width at half maximum of the dominant positive-frequency peak,
/// linearly interpolated between grid points.
pub fn fwhm_of_dominant_peak(frequencies: &[f64], magnitudes: &[f64]) -> Option<f64> {
    let start = frequencies.iter().position(|&f| f > 0.0)?;
    let (peak_idx, peak_val) = magnitudes[start..]
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, v)| (start + i, *v))?;
    if peak_val <= 0.0 {
        return None;
    }
    let half = 0.5 * peak_val;
    // Walk left to the half crossing.
    let mut left = frequencies[peak_idx];
    for i in (1..=peak_idx).rev() {
        if magnitudes[i - 1] <= half {
            let f = (half - magnitudes[i - 1]) / (magnitudes[i] - magnitudes[i - 1]);
            left = frequencies[i - 1] + f * (frequencies[i] - frequencies[i - 1]);
            break;
        }
        left = frequencies[i - 1];
    }
    let mut right = frequencies[peak_idx];
    for i in peak_idx..frequencies.len() - 1 {
        if magnitudes[i + 1] <= half {
            let f = (magnitudes[i] - half) / (magnitudes[i] - magnitudes[i + 1]);
            right = frequencies[i] + f * (frequencies[i + 1] - frequencies[i]);
            break;
        }
        right = frequencies[i + 1];
    }
    Some(right - left)
}

/// Minimal-fidelity relation for a fixed over-rotation angle.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FidelityReport {
    pub delta_phi: f64,
    pub f_min: f64,
    /// arccos(f_min) = |δφ|, the Bures angle.
    pub bures_angle: f64,
    pub averaged: bool,
}

/// `F_min = cos(δφ)` for |δφ| ≤ π/2.
pub fn fidelity_from_overrotation(delta_phi: f64) -> Result<FidelityReport> {
    if libm::fabs(delta_phi) > core::f64::consts::FRAC_PI_2 {
        return Err(Error::AngleOutOfRange { angle: delta_phi });
    }
    Ok(FidelityReport {
        delta_phi,
        f_min: libm::cos(delta_phi),
        bures_angle: libm::fabs(delta_phi),
        averaged: false,
    })
}

/// Average minimal fidelity of a zero-mean normal over-rotation of width σ:
/// `F̄ = 1 − σ²/2` in the small-angle regime.
pub fn averaged_fidelity(std_dev: f64) -> f64 {
    1.0 - 0.5 * std_dev * std_dev
}

/// Inverse relation `σ = √(2(1 − F̄))`.
pub fn std_dev_from_fidelity(f_avg: f64) -> f64 {
    libm::sqrt((2.0 * (1.0 - f_avg)).max(0.0))
}

/// Result of the brute-force minimal-fidelity search.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MinFidelity {
    /// Minimum of |⟨ψ|e^{iδφA}|ψ⟩| over the sampled and analytic states.
    pub value: f64,
    /// Value at the analytic extreme-eigenvector superposition.
    pub analytic: f64,
    /// Whether the generator spectrum spans {−1, +1}; when it does not the
    /// reported value is generator-specific rather than cos(δφ).
    pub spans_unit_interval: bool,
}

/// Minimize the gate fidelity over random input states and the analytic
/// candidate `(|λ_min⟩ + |λ_max⟩)/√2`.
pub fn min_fidelity_bruteforce(
    gate: &Gate,
    delta_phi: f64,
    n_random: usize,
    seed: u64,
) -> Result<MinFidelity> {
    if libm::fabs(delta_phi) > core::f64::consts::FRAC_PI_2 {
        return Err(Error::AngleOutOfRange { angle: delta_phi });
    }
    let n_qubits = gate.n_qubits();
    let dim = 1usize << n_qubits;
    let eig = dense::eigh(&gate.generator.to_dense(n_qubits)?);
    let lam_min = eig.eigenvalues[0];
    let lam_max = eig.eigenvalues[dim - 1];
    let spans =
        libm::fabs(lam_min + 1.0) < 1e-9 && libm::fabs(lam_max - 1.0) < 1e-9;

    // Fidelity of a state expressed by its eigenbasis weights.
    let fidelity = |weights: &[f64]| -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for (w, lam) in weights.iter().zip(&eig.eigenvalues) {
            acc += C64::from_polar(*w, delta_phi * lam);
        }
        acc.norm()
    };

    let mut extreme = vec![0.0; dim];
    extreme[0] = 0.5;
    extreme[dim - 1] = 0.5;
    let analytic = fidelity(&extreme);

    let mut min = analytic;
    let mut weights = vec![0.0; dim];
    for sample in 0..n_random {
        let mut norm = 0.0;
        for (d, w) in weights.iter_mut().enumerate() {
            let (a, b) = rng::standard_normal_pair(rng::mix(
                seed,
                &[sample as u64, d as u64],
            ));
            let p = a * a + b * b;
            *w = p;
            norm += p;
        }
        for w in weights.iter_mut() {
            *w /= norm;
        }
        let f = fidelity(&weights);
        if f < min {
            min = f;
        }
    }
    Ok(MinFidelity {
        value: min,
        analytic,
        spans_unit_interval: spans,
    })
}

/// Worst-case bound on the total number of faulty two-qubit gates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BudgetOutcome {
    Bounded {
        /// The product bound M·n < 1/√(2(1 − F̄)).
        mn_bound: f64,
        /// Largest step count n with M gates per step under the bound.
        max_steps: u64,
    },
    /// Perfect gates: no finite bound.
    Unbounded,
}

/// `M n < 1/√(2(1−F̄))` from the averaged minimal fidelity.
pub fn gate_budget(avg_fidelity: f64, gates_per_step: u32) -> Result<BudgetOutcome> {
    if avg_fidelity == 1.0 {
        return Ok(BudgetOutcome::Unbounded);
    }
    if avg_fidelity <= 0.0 || avg_fidelity > 1.0 {
        return Err(Error::FidelityOutOfRange {
            fidelity: avg_fidelity,
        });
    }
    let mn_bound = 1.0 / libm::sqrt(2.0 * (1.0 - avg_fidelity));
    let max_steps = libm::floor(mn_bound / gates_per_step.max(1) as f64) as u64;
    Ok(BudgetOutcome::Bounded {
        mn_bound,
        max_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{evolve_ideal, EvolveOptions, InitialState};
    use crate::fermion::build_hubbard_spinflip;
    use crate::gates::GateLabel;

    #[test]
    fn fft_matches_direct_transform() {
        for &n in &[8usize, 12, 16, 37, 100, 128] {
            let x: Vec<C64> = (0..n)
                .map(|i| {
                    let a = rng::standard_normal(rng::mix(5, &[i as u64, 0]));
                    let b = rng::standard_normal(rng::mix(5, &[i as u64, 1]));
                    C64::new(a, b)
                })
                .collect();
            let fast = fft::fft(&x);
            let slow = fft::dft(&x);
            let err: f64 = fast
                .iter()
                .zip(&slow)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let scale: f64 = slow.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!(err < 1e-9 * scale.max(1.0), "N = {n}: err {err:.3e}");
        }
    }

    #[test]
    fn cosine_series_peaks_at_its_frequency_with_window_width() {
        let omega0 = 2.0;
        let tau = 200.0;
        let n = 2000usize;
        let dt = tau / n as f64;
        let times: Vec<f64> = (0..=n).map(|m| m as f64 * dt).collect();
        let values: Vec<f64> = times.iter().map(|&t| libm::cos(omega0 * t)).collect();
        let sigma = tau / 6.0;
        let spec = windowed_spectrum(&times, &values, sigma).unwrap();
        let (peak_f, _) = spec.dominant_peak().unwrap();
        let resolution = 2.0 * core::f64::consts::PI / tau;
        assert!((peak_f - omega0).abs() < resolution);
        // Gaussian window of width σ_t gives a frequency FWHM of
        // 2√(2 ln 2)/σ_t.
        let mags = spec.magnitudes();
        let width = fwhm_of_dominant_peak(&spec.frequencies, &mags).unwrap();
        let expected = 2.0 * libm::sqrt(2.0 * libm::log(2.0)) / sigma;
        assert!(
            (width - expected).abs() < 0.25 * expected,
            "width {width} vs {expected}"
        );
        // Hermitian symmetry of a real series: |S(ω)| = |S(−ω)|.
        for (i, &f) in spec.frequencies.iter().enumerate() {
            if f <= 0.0 {
                continue;
            }
            let j = spec
                .frequencies
                .iter()
                .position(|&g| libm::fabs(g + f) < 1e-9)
                .unwrap();
            assert!((mags[i] - mags[j]).abs() < 1e-10 * mags[i].max(1.0));
        }
    }

    #[test]
    fn constant_series_has_zero_spectrum() {
        let times: Vec<f64> = (0..64).map(|m| m as f64 * 0.1).collect();
        let values = vec![0.7; 64];
        let spec = windowed_spectrum(&times, &values, 1.0).unwrap();
        assert!(spec.amplitudes.iter().all(|a| a.norm() < 1e-12));
    }

    #[test]
    fn too_few_slices_is_an_error() {
        let times: Vec<f64> = (0..4).map(|m| m as f64).collect();
        let values = vec![0.0; 4];
        assert!(matches!(
            windowed_spectrum(&times, &values, 1.0),
            Err(Error::TooFewSlices { .. })
        ));
    }

    #[test]
    fn ideal_spectrum_peaks_at_eigenvalue_differences() {
        // Exact-diagonalization oracle: each detected peak of the windowed
        // ⟨n₁(ω)⟩ lies within a grid spacing of some |E_i − E_j|.
        let h = build_hubbard_spinflip(1.0, 1.0, 1.0).realize().unwrap();
        let psi0 = InitialState::new(vec![1, 2]).state_vector(4).unwrap();
        let tau = 400.0;
        let n = 8000;
        let traj = evolve_ideal(&h, &psi0, tau, n, &EvolveOptions::n1_only()).unwrap();
        let spec = trajectory_spectrum(&traj, None).unwrap();
        let eig = dense::eigh(&h.to_dense(4).unwrap());
        let mut diffs = Vec::new();
        for i in 0..16 {
            for j in 0..16 {
                let d = eig.eigenvalues[i] - eig.eigenvalues[j];
                if d > 1e-6 {
                    diffs.push(d);
                }
            }
        }
        let mags = spec.magnitudes();
        let max_mag = mags.iter().cloned().fold(0.0, f64::max);
        let domega = 2.0 * core::f64::consts::PI / tau;
        for i in 1..spec.frequencies.len() - 1 {
            let f = spec.frequencies[i];
            if f <= 0.0 || mags[i] < 0.05 * max_mag {
                continue;
            }
            if mags[i] > mags[i - 1] && mags[i] > mags[i + 1] {
                let nearest = diffs
                    .iter()
                    .map(|d| libm::fabs(d - f))
                    .fold(f64::INFINITY, f64::min);
                assert!(
                    nearest < 2.0 * domega,
                    "peak at ω = {f} is {nearest} away from any level spacing"
                );
            }
        }
    }

    #[test]
    fn ensemble_average_identities() {
        let times: Vec<f64> = (0..10).map(|m| m as f64).collect();
        let make = |vals: Vec<f64>| Trajectory {
            backend: crate::evolve::Backend::IdealExact,
            times: times.clone(),
            n1: vals,
            sigma2: None,
            norm_drift: 0.0,
        };
        let a = make((0..10).map(|i| i as f64).collect());
        // Single run averages to itself with zero standard error.
        let avg = ensemble_average_trajectories(core::slice::from_ref(&a)).unwrap();
        assert_eq!(avg.mean_n1, a.n1);
        assert!(avg.stderr_n1.iter().all(|s| *s == 0.0));
        // A run and its negation average to zero.
        let b = make((0..10).map(|i| -(i as f64)).collect());
        let avg = ensemble_average_trajectories(&[a, b]).unwrap();
        assert!(avg.mean_n1.iter().all(|m| m.abs() < 1e-12));
    }

    #[test]
    fn fidelity_relations_reproduce_reference_values() {
        let r = fidelity_from_overrotation(0.025).unwrap();
        assert!((r.f_min - 0.99969).abs() < 5e-6); // 99.969 %
        let r = fidelity_from_overrotation(0.0125).unwrap();
        assert!((r.f_min - 0.99992).abs() < 5e-6); // 99.992 %
        let r = fidelity_from_overrotation(0.0).unwrap();
        assert!((r.f_min - 1.0).abs() < 1e-15);
        assert!(fidelity_from_overrotation(2.0).is_err());

        // arccos(0.99) ≈ 0.142, and the averaged relation at that width
        // (the rounded width reproduces the quoted 0.98992).
        let sigma = libm::acos(0.99);
        assert!((sigma - 0.142).abs() < 5e-4);
        assert!((averaged_fidelity(0.142) - 0.98992).abs() < 5e-6);
        assert!((averaged_fidelity(sigma) - 0.98992).abs() < 1e-4);
        assert!((averaged_fidelity(0.0) - 1.0).abs() < 1e-15);
        assert!((std_dev_from_fidelity(averaged_fidelity(0.05)) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn averaged_fidelity_matches_monte_carlo_mean() {
        let n = 1_000_000u64;
        for (k, sigma) in [0.05, 0.15].into_iter().enumerate() {
            let mut sum = 0.0;
            for i in 0..n {
                let x = sigma * rng::standard_normal(rng::mix(99 + k as u64, &[i]));
                sum += libm::cos(x);
            }
            let mc = sum / n as f64;
            assert!(
                (mc - averaged_fidelity(sigma)).abs() < 2e-4,
                "sigma {sigma}: MC {mc} vs {}",
                averaged_fidelity(sigma)
            );
        }
    }

    #[test]
    fn bruteforce_minimum_for_spanning_generator_is_cos_delta_phi() {
        let gate = Gate::iswap(2, 1, 2, false).unwrap();
        let delta = 0.1;
        let r = min_fidelity_bruteforce(&gate, delta, 10_000, 7).unwrap();
        assert!(r.spans_unit_interval);
        assert!((r.analytic - libm::cos(delta)).abs() < 1e-9);
        // Random sampling never goes below the bound.
        assert!(r.value >= libm::cos(delta) - 1e-9);
        assert!((r.value - libm::cos(delta)).abs() < 1e-9);
        // Zero over-rotation: fidelity 1 for any gate.
        let r = min_fidelity_bruteforce(&gate, 0.0, 100, 7).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_spanning_generator_is_flagged_with_its_own_minimum() {
        // The on-site generator −n₁n₂ has spectrum {−1, 0}: the worst state
        // mixes the extremes and loses only cos(δφ/2).
        let gate = Gate::onsite(2, 1, 2, 1.0, 1.0).unwrap();
        let delta = 0.2;
        let r = min_fidelity_bruteforce(&gate, delta, 5_000, 3).unwrap();
        assert!(!r.spans_unit_interval);
        assert!((r.analytic - libm::cos(0.5 * delta)).abs() < 1e-9);
        assert!(r.value > libm::cos(delta) + 1e-3);
    }

    #[test]
    fn gate_budget_reference_points() {
        match gate_budget(0.99, 1).unwrap() {
            BudgetOutcome::Bounded { mn_bound, .. } => {
                assert!((mn_bound - 7.0710678).abs() < 1e-6);
            }
            BudgetOutcome::Unbounded => panic!("should be bounded"),
        }
        match gate_budget(0.9999, 7).unwrap() {
            BudgetOutcome::Bounded {
                mn_bound,
                max_steps,
            } => {
                assert!((mn_bound - 70.710678).abs() < 1e-5);
                assert_eq!(max_steps, 10);
            }
            BudgetOutcome::Unbounded => panic!("should be bounded"),
        }
        assert_eq!(gate_budget(1.0, 3).unwrap(), BudgetOutcome::Unbounded);
        assert!(gate_budget(1.5, 1).is_err());
        assert!(gate_budget(0.0, 1).is_err());

        // Monotone: worse fidelity, smaller budget.
        let bound = |f: f64| match gate_budget(f, 1).unwrap() {
            BudgetOutcome::Bounded { mn_bound, .. } => mn_bound,
            BudgetOutcome::Unbounded => f64::INFINITY,
        };
        assert!(bound(0.999) > bound(0.99));
        assert!(bound(0.99) > bound(0.9));
    }

    #[test]
    fn budget_uses_noisy_gate_labels_sanely() {
        // Sanity link with the gate library: labels exist for every noisy
        // two-qubit gate counted in M.
        assert_eq!(alloc::format!("{}", GateLabel::Cnot), "CNOT");
    }
}
