//! Uniformly sampled signals and their discrete Fourier representation.
//!
//! Fourier convention: forward kernel `e^{−2πift}`, inverse `e^{+2πift}`,
//! frequencies in cycles per unit time. Bins are scaled so that they
//! approximate the continuous transform, `x̂(f_k) = Δt · Σ_n x[n] e^{−2πikn/N}`,
//! which gives `Σ|x|²Δt = Σ|x̂|²Δf` exactly.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<Complex64>,
    sample_rate: f64,
    start_time: f64,
    original_len: usize,
}

impl Signal {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Length(format!(
                "a signal needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::Parameter(format!(
                "sample rate must be positive and finite, got {sample_rate}"
            )));
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("signal contains NaN or infinite samples".into()));
        }
        let original_len = samples.len();
        Ok(Self {
            samples,
            sample_rate,
            start_time: 0.0,
            original_len,
        })
    }

    pub fn from_real(values: &[f64], sample_rate: f64) -> Result<Self> {
        Self::new(
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            sample_rate,
        )
    }

    pub fn with_start_time(mut self, start_time: f64) -> Self {
        self.start_time = start_time;
        self
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Length before any zero padding.
    pub fn original_len(&self) -> usize {
        self.original_len
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len())
            .map(|n| self.start_time + n as f64 * self.dt())
            .collect()
    }

    /// True when every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.samples.iter().all(|z| z.im == 0.0)
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.re).collect()
    }

    pub fn is_power_of_two(&self) -> bool {
        self.len().is_power_of_two()
    }

    /// Zero-pads to the next power of two; the original length is kept for
    /// [`Signal::trimmed`].
    pub fn padded(&self) -> Signal {
        let n = self.len().next_power_of_two();
        let mut samples = self.samples.clone();
        samples.resize(n, Complex64::new(0.0, 0.0));
        Signal {
            samples,
            sample_rate: self.sample_rate,
            start_time: self.start_time,
            original_len: self.original_len,
        }
    }

    /// Drops padding added by [`Signal::padded`].
    pub fn trimmed(&self) -> Signal {
        let mut out = self.clone();
        out.samples.truncate(self.original_len);
        out
    }

    pub(crate) fn with_samples(&self, samples: Vec<Complex64>) -> Signal {
        Signal {
            samples,
            sample_rate: self.sample_rate,
            start_time: self.start_time,
            original_len: self.original_len,
        }
    }

    pub fn scaled(&self, k: Complex64) -> Signal {
        self.with_samples(self.samples.iter().map(|&z| z * k).collect())
    }

    /// Sample-wise `a·self + b·other`; both signals must share length and rate.
    pub fn combine(&self, a: Complex64, other: &Signal, b: Complex64) -> Result<Signal> {
        if self.len() != other.len() || self.sample_rate != other.sample_rate {
            return Err(Error::Length(
                "cannot combine signals with different lengths or rates".into(),
            ));
        }
        Ok(self.with_samples(
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(&x, &y)| a * x + b * y)
                .collect(),
        ))
    }
}

/// Discrete spectrum with an explicit two-sided frequency axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    bins: Vec<Complex64>,
    frequency_axis: Vec<f64>,
    sample_rate: f64,
    start_time: f64,
    original_len: usize,
}

impl Spectrum {
    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn bins_mut(&mut self) -> &mut [Complex64] {
        &mut self.bins
    }

    /// Frequencies in cycles per unit time; the Nyquist bin sits at `−rate/2`.
    pub fn frequency_axis(&self) -> &[f64] {
        &self.frequency_axis
    }

    pub fn source_length(&self) -> usize {
        self.bins.len()
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn df(&self) -> f64 {
        self.sample_rate / self.bins.len() as f64
    }

    pub fn with_bins(&self, bins: Vec<Complex64>) -> Spectrum {
        assert_eq!(bins.len(), self.bins.len());
        Spectrum {
            bins,
            frequency_axis: self.frequency_axis.clone(),
            sample_rate: self.sample_rate,
            start_time: self.start_time,
            original_len: self.original_len,
        }
    }
}

/// Two-sided frequency axis for `n` bins at the given rate.
pub fn frequency_axis(n: usize, sample_rate: f64) -> Vec<f64> {
    let df = sample_rate / n as f64;
    (0..n)
        .map(|k| {
            if k < n / 2 {
                k as f64 * df
            } else {
                (k as f64 - n as f64) * df
            }
        })
        .collect()
}

/// Forward and inverse plans for one transform length.
#[derive(Clone)]
pub(crate) struct FftPlan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    len: usize,
}

impl FftPlan {
    pub(crate) fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            len,
        }
    }

    /// In-place `x̂ = Δt · DFT(x)`.
    pub(crate) fn forward(&self, buf: &mut [Complex64], dt: f64) {
        debug_assert_eq!(buf.len(), self.len);
        self.forward.process(buf);
        for z in buf.iter_mut() {
            *z *= dt;
        }
    }

    /// In-place `x = Δf · IDFT(x̂)` with `Δf = 1/(NΔt)`.
    pub(crate) fn inverse(&self, buf: &mut [Complex64], dt: f64) {
        debug_assert_eq!(buf.len(), self.len);
        self.inverse.process(buf);
        let df = 1.0 / (self.len as f64 * dt);
        for z in buf.iter_mut() {
            *z *= df;
        }
    }
}

pub fn fft(signal: &Signal) -> Result<Spectrum> {
    if !signal.is_power_of_two() {
        return Err(Error::Length(format!(
            "transform length {} is not a power of two; pad the signal first",
            signal.len()
        )));
    }
    let plan = FftPlan::new(signal.len());
    let mut bins = signal.samples.clone();
    plan.forward(&mut bins, signal.dt());
    Ok(Spectrum {
        frequency_axis: frequency_axis(bins.len(), signal.sample_rate),
        bins,
        sample_rate: signal.sample_rate,
        start_time: signal.start_time,
        original_len: signal.original_len,
    })
}

/// [`fft`] after zero-padding to a power of two.
pub fn fft_padded(signal: &Signal) -> Spectrum {
    fft(&signal.padded()).expect("padded length is a power of two")
}

pub fn ifft(spectrum: &Spectrum) -> Signal {
    let n = spectrum.bins.len();
    let plan = FftPlan::new(n);
    let mut samples = spectrum.bins.clone();
    let dt = 1.0 / spectrum.sample_rate;
    plan.inverse(&mut samples, dt);
    Signal {
        samples,
        sample_rate: spectrum.sample_rate,
        start_time: spectrum.start_time,
        original_len: spectrum.original_len.min(n),
    }
}

/// Relative magnitude below which a negative-frequency bin counts as empty.
const ANALYTIC_TOL: f64 = 1e-12;

/// Analytic part of a real signal: negative bins zeroed, positive bins
/// doubled, DC and Nyquist kept at unit weight so that `Re(output) = input`.
///
/// Complex input is accepted only when it is already analytic (no content
/// at strictly negative frequencies), in which case it is returned
/// unchanged; this makes the operation a projection.
pub fn analytic_part(signal: &Signal) -> Result<Signal> {
    let spec = fft(signal)?;
    let n = spec.bins.len();
    if !signal.is_real() {
        let peak = spec.bins.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let leak = spec.bins[n / 2 + 1..]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if leak > ANALYTIC_TOL * peak {
            return Err(Error::Domain(
                "analytic_part expects a real signal (or one that is already analytic)".into(),
            ));
        }
        return Ok(signal.clone());
    }
    let mut bins = spec.bins.clone();
    for (k, z) in bins.iter_mut().enumerate() {
        if k == 0 || k == n / 2 {
            continue;
        }
        if k < n / 2 {
            *z *= 2.0;
        } else {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    Ok(ifft(&spec.with_bins(bins)))
}
