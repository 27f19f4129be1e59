//! Deterministic test signals.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{fft, frequency_axis, ifft, Signal};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestSignal {
    /// Hann-windowed linear chirp from `f_start` to `f_end`. With
    /// `band_limit = Some((lo, hi))` every bin with `|f|` outside `[lo, hi]`
    /// is zeroed afterwards, so the result is strictly band-limited.
    Chirp {
        f_start: f64,
        f_end: f64,
        band_limit: Option<(f64, f64)>,
    },
    /// Sum of cosines `Σ a_k cos(2π f_k t)`.
    Multitone { freqs: Vec<f64>, amplitudes: Vec<f64> },
    /// Real Gaussian noise whose one-sided spectral density is `∝ |f|^exponent`
    /// on every non-DC bin.
    PowerLawNoise { exponent: f64, seed: u64 },
    /// Unit sample at index 0.
    Impulse,
}

/// Generates `len` samples at `sample_rate`. Power-law noise needs a
/// power-of-two length.
pub fn generate_test_signal(kind: &TestSignal, len: usize, sample_rate: f64) -> Result<Signal> {
    if len < 2 {
        return Err(Error::Parameter("test signals need at least 2 samples".into()));
    }
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(Error::Parameter("sample rate must be positive".into()));
    }
    let dt = 1.0 / sample_rate;
    let duration = len as f64 * dt;
    match kind {
        TestSignal::Impulse => {
            let mut v = vec![0.0; len];
            v[0] = 1.0;
            Signal::from_real(&v, sample_rate)
        }
        TestSignal::Multitone { freqs, amplitudes } => {
            if freqs.len() != amplitudes.len() || freqs.is_empty() {
                return Err(Error::Parameter(
                    "multitone needs matching, non-empty freqs and amplitudes".into(),
                ));
            }
            if freqs.iter().chain(amplitudes).any(|v| !v.is_finite()) {
                return Err(Error::Parameter("multitone parameters must be finite".into()));
            }
            let v: Vec<f64> = (0..len)
                .map(|n| {
                    let t = n as f64 * dt;
                    freqs
                        .iter()
                        .zip(amplitudes)
                        .map(|(f, a)| a * (2.0 * PI * f * t).cos())
                        .sum()
                })
                .collect();
            Signal::from_real(&v, sample_rate)
        }
        TestSignal::Chirp {
            f_start,
            f_end,
            band_limit,
        } => {
            if !(f_start.is_finite() && f_end.is_finite() && *f_start >= 0.0 && *f_end >= 0.0) {
                return Err(Error::Parameter("chirp frequencies must be finite and ≥ 0".into()));
            }
            let rate = (f_end - f_start) / duration;
            let v: Vec<f64> = (0..len)
                .map(|n| {
                    let t = n as f64 * dt;
                    let hann = 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos();
                    hann * (2.0 * PI * (f_start * t + 0.5 * rate * t * t)).cos()
                })
                .collect();
            let s = Signal::from_real(&v, sample_rate)?;
            match band_limit {
                None => Ok(s),
                Some((lo, hi)) => {
                    if !(lo < hi) || *lo < 0.0 {
                        return Err(Error::Parameter("band limit must satisfy 0 ≤ lo < hi".into()));
                    }
                    if !len.is_power_of_two() {
                        return Err(Error::Length("band-limited chirp needs a power-of-two length".into()));
                    }
                    let spec = fft(&s)?;
                    let bins = spec
                        .bins()
                        .iter()
                        .zip(spec.frequency_axis())
                        .map(|(&z, &f)| {
                            if f.abs() >= *lo && f.abs() <= *hi {
                                z
                            } else {
                                Complex64::new(0.0, 0.0)
                            }
                        })
                        .collect();
                    let out = ifft(&spec.with_bins(bins));
                    Signal::from_real(&out.real_part(), sample_rate)
                }
            }
        }
        TestSignal::PowerLawNoise { exponent, seed } => {
            if !exponent.is_finite() {
                return Err(Error::Parameter("power-law exponent must be finite".into()));
            }
            if !len.is_power_of_two() {
                return Err(Error::Length("power-law noise needs a power-of-two length".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let axis = frequency_axis(len, sample_rate);
            let mut bins = vec![Complex64::new(0.0, 0.0); len];
            let half = len / 2;
            for k in 1..=half {
                let amp = axis[k].abs().powf(0.5 * exponent);
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                if k == half {
                    bins[k] = Complex64::new(amp * re * std::f64::consts::SQRT_2, 0.0);
                } else {
                    bins[k] = Complex64::new(amp * re, amp * im);
                    bins[len - k] = bins[k].conj();
                }
            }
            let template = Signal::from_real(&vec![0.0; len], sample_rate)?;
            let spec = fft(&template)?.with_bins(bins);
            let out = ifft(&spec);
            // normalise to unit RMS so amplitudes do not depend on exponent
            let v = out.real_part();
            let rms = (v.iter().map(|x| x * x).sum::<f64>() / len as f64).sqrt();
            let v: Vec<f64> = if rms > 0.0 { v.iter().map(|x| x / rms).collect() } else { v };
            Signal::from_real(&v, sample_rate)
        }
    }
}
