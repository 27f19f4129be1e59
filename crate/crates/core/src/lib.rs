//! Convolution filters represented as multipliers on the continuous wavelet
//! transform.
//!
//! A convolution operator with system function `W(f)` acts on the wavelet
//! coefficients `x̃(σ, τ)` as multiplication by a scale function `w(σ)`, with
//! `W` the scaling convolution of `w` and the wavelet's spectral density
//! `Ψ`. The Mellin transform diagonalises that convolution, which is how
//! `w` is designed from `W`.
//!
//! Modules:
//! * [`signal`], [`generate`], [`io`]: sampled signals, FFTs, test signals, files.
//! * [`wavelet`], [`engine`]: analytic wavelets, forward transform, synthesis.
//! * [`mellin`]: Mellin transform, inverse, scaling convolution.
//! * [`filter`]: filter pairs, design, admissibility.
//! * [`harness`]: path comparison, exponent regression, denoising.

pub mod engine;
pub mod error;
pub mod filter;
pub mod generate;
pub mod harness;
pub mod interp;
pub mod io;
pub mod mellin;
pub mod scaleogram_io;
pub mod signal;
pub mod special;
pub mod wavelet;

pub use engine::{
    apply_scale_filter, cwt_forward, reconstruct, GridSpec, ScaleTimeGrid, Scaleogram, SynthesisOptions,
};
pub use error::{Error, Result};
pub use filter::{FrequencyFilter, ScaleFilter};
pub use signal::{analytic_part, fft, ifft, Signal, Spectrum};
pub use wavelet::Wavelet;

pub use num_complex::Complex64;
