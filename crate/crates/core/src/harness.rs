//! Cross-checks of wavelet-domain filtering against direct frequency-domain
//! filtering, spectral-exponent regression and power-law denoising.

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::engine::{
    apply_scale_filter, apply_symbol, cwt_forward, effective_symbol, scale_energies, GridSpec,
    Projection, ScaleTimeGrid, Scaleogram, SynthesisOptions,
};
use crate::error::{Error, Result};
use crate::filter::{FrequencyFilter, ScaleFilter};
use crate::io::fmt17;
use crate::signal::{fft_padded, Signal};
use crate::wavelet::Wavelet;

/// Fraction of samples dropped at each end by the interior error metrics.
pub const EDGE_TRIM: f64 = 0.05;

/// Residual RMS (in nats of `ln E`) above which a scale-energy regression
/// is not treated as a power law.
pub const POWER_LAW_RESIDUAL_LIMIT: f64 = 0.5;

fn interior(n: usize) -> std::ops::Range<usize> {
    let k = (n as f64 * EDGE_TRIM).floor() as usize;
    k..n - k
}

/// `‖a − b‖₂ / ‖b‖₂` over the interior; `0/0` counts as 0.
pub fn relative_l2_interior(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let r = interior(a.len());
    let num: f64 = a[r.clone()].iter().zip(&b[r.clone()]).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b[r].iter().map(|y| y.norm_sqr()).sum();
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        (num / den).sqrt()
    }
}

pub fn max_abs_interior(a: &[Complex64], b: &[Complex64]) -> f64 {
    let r = interior(a.len());
    a[r.clone()]
        .iter()
        .zip(&b[r])
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `‖a − b‖₂ / ‖b‖₂` over every sample; `0/0` counts as 0.
pub fn relative_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        (num / den).sqrt()
    }
}

/// `(Wχ)(t) = ∫df e^{2πift} W(f) χ̂(f)`, with the DC bin scaled by the
/// filter's DC gain.
pub fn apply_frequency_filter(signal: &Signal, big: &FrequencyFilter) -> Result<Signal> {
    apply_symbol(signal, |_, f| big.eval(f), big.dc_gain, Projection::Direct, false)
}

/// Frequency-domain reference matching the projection a wavelet synthesis
/// on `grid` would use.
pub fn reference_output(
    signal: &Signal,
    big: &FrequencyFilter,
    grid: &GridSpec,
    opts: &SynthesisOptions,
) -> Result<Signal> {
    let projection = Projection::for_source(grid, signal.is_real());
    apply_symbol(signal, |_, f| big.eval(f), big.dc_gain, projection, opts.real_output)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub forward_s: f64,
    pub synthesis_s: f64,
    pub reference_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub filter: String,
    pub wavelet: String,
    pub grid: GridSpec,
    pub projection: Projection,
    /// Wavelet path against the frequency-domain reference.
    pub relative_l2_error: f64,
    pub max_pointwise_error: f64,
    /// `‖W_eff − W‖∞ / ‖W‖∞` on the bins where the signal has content.
    pub symbol_deviation: f64,
    /// Wavelet path against direct filtering by `W_eff`.
    pub effective_path_agreement: f64,
    /// `(f_lo, f_hi)` of the bins used for the symbol deviation.
    pub band: (f64, f64),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime: Option<Timings>,
}

/// Bins with `|x̂| > 1e−8 · max|x̂|` that the projection keeps.
fn signal_band(signal: &Signal, projection: Projection) -> Vec<(usize, f64)> {
    let spec = fft_padded(signal);
    let peak = spec.bins().iter().map(|z| z.norm()).fold(0.0, f64::max);
    spec.bins()
        .iter()
        .zip(spec.frequency_axis())
        .enumerate()
        .filter(|(_, (z, &f))| {
            f != 0.0
                && z.norm() > 1e-8 * peak
                && (projection == Projection::Direct || f > 0.0)
        })
        .map(|(k, (_, &f))| (k, f))
        .collect()
}

/// Runs both paths on `signal` and collects the error metrics.
pub fn compare_paths(
    signal: &Signal,
    w: &ScaleFilter,
    big: &FrequencyFilter,
    wavelet: &Wavelet,
    grid: &GridSpec,
    opts: &SynthesisOptions,
) -> Result<ComparisonReport> {
    let t0 = Instant::now();
    let stg = ScaleTimeGrid::for_signal(*grid, signal)?;
    let sc = cwt_forward(signal, wavelet, &stg)?;
    let t1 = Instant::now();
    let synth = apply_scale_filter(&sc, w, wavelet, opts)?;
    let t2 = Instant::now();
    let reference = reference_output(signal, big, grid, opts)?;
    let t3 = Instant::now();
    let symbol = &synth.coverage.symbol;
    let effective = apply_symbol(signal, |k, _| symbol[k], w.dc_gain, synth.projection, opts.real_output)?;

    let band = signal_band(signal, synth.projection);
    let mut dev: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &(k, f) in &band {
        let target = big.eval(f);
        dev = dev.max((symbol[k] - target).norm());
        scale = scale.max(target.norm());
    }
    let symbol_deviation = if dev == 0.0 { 0.0 } else { dev / scale };
    let (f_lo, f_hi) = band
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(_, f)| (a.min(f), b.max(f)));

    Ok(ComparisonReport {
        filter: big.describe(),
        wavelet: wavelet.to_string(),
        grid: *grid,
        projection: synth.projection,
        relative_l2_error: relative_l2_interior(synth.output.samples(), reference.samples()),
        max_pointwise_error: max_abs_interior(synth.output.samples(), reference.samples()),
        symbol_deviation,
        effective_path_agreement: relative_l2(synth.output.samples(), effective.samples()),
        band: if band.is_empty() { (0.0, 0.0) } else { (f_lo, f_hi) },
        runtime: Some(Timings {
            forward_s: (t1 - t0).as_secs_f64(),
            synthesis_s: (t2 - t1).as_secs_f64(),
            reference_s: (t3 - t2).as_secs_f64(),
        }),
    })
}

/// Chooses `σ_min` for a grid of the given size so that the effective
/// symbol best matches `W` (sup-norm, relative) on `f ∈ [f_lo, f_hi]`,
/// mirrored to negative `f` when the grid has negative scales.
pub fn fit_grid(
    wavelet: &Wavelet,
    w: &ScaleFilter,
    big: &FrequencyFilter,
    band: (f64, f64),
    voices: usize,
    octaves: usize,
    include_negative_scales: bool,
) -> Result<(GridSpec, f64)> {
    let (f_lo, f_hi) = band;
    if !(f_lo > 0.0 && f_hi > f_lo) {
        return Err(Error::Parameter("band must satisfy 0 < f_lo < f_hi".into()));
    }
    let n = 65;
    let mut freqs: Vec<f64> = (0..n)
        .map(|k| f_lo * (f_hi / f_lo).powf(k as f64 / (n - 1) as f64))
        .collect();
    if include_negative_scales {
        let neg: Vec<f64> = freqs.iter().map(|f| -f).collect();
        freqs.extend(neg);
    }
    let target: Vec<Complex64> = freqs.iter().map(|&f| big.eval(f)).collect();
    let scale = target.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::Parameter("target symbol vanishes on the band".into()));
    }
    let steps_per_octave = 16;
    let lo_k = -((octaves + 8) as i64) * steps_per_octave;
    let hi_k = 8 * steps_per_octave;
    let mut best: Option<(GridSpec, f64)> = None;
    for k in lo_k..=hi_k {
        let sigma_min = f_lo * 2f64.powf(k as f64 / steps_per_octave as f64);
        let spec = GridSpec {
            sigma_min,
            voices,
            octaves,
            include_negative_scales,
        };
        let sym = effective_symbol(&spec, w, wavelet, &freqs);
        let dev = sym
            .iter()
            .zip(&target)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            / scale;
        if best.as_ref().is_none_or(|b| dev < b.1) {
            best = Some((spec, dev));
        }
    }
    Ok(best.expect("non-empty search"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    pub slope: f64,
    /// 95% half-width from the residual variance.
    pub half_width: f64,
    pub band: (f64, f64),
    pub n_scales: usize,
    pub residual_rms: f64,
}

/// Least-squares slope of `ln ∫dτ|x̃(σ,τ)|²` against `ln σ` over the
/// positive grid scales in `band`. For a spectral density `∝ |f|^p` the
/// expected slope is `p`.
pub fn estimate_spectral_exponent(scaleogram: &Scaleogram, band: (f64, f64)) -> Result<ExponentEstimate> {
    let (lo, hi) = band;
    if !(lo > 0.0 && hi >= 4.0 * lo) {
        return Err(Error::Parameter(format!(
            "regression band [{lo}, {hi}] must span at least two octaves"
        )));
    }
    let energies = scale_energies(scaleogram);
    let pts: Vec<(f64, f64)> = scaleogram
        .grid()
        .scales()
        .iter()
        .zip(&energies)
        .filter(|(s, _)| **s >= lo * (1.0 - 1e-12) && **s <= hi * (1.0 + 1e-12))
        .map(|(s, e)| (s.ln(), e.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Parameter("fewer than three grid scales fall inside the band".into()));
    }
    if pts.iter().any(|p| !p.1.is_finite()) {
        return Err(Error::NotPowerLaw("zero energy at a scale inside the band".into()));
    }
    let band_used = (pts[0].0.exp(), pts[pts.len() - 1].0.exp());
    if band_used.1 < 4.0 * band_used.0 * (1.0 - 1e-9) {
        return Err(Error::Parameter("grid scales inside the band span less than two octaves".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let residual_rms = (ss / n).sqrt();
    let se = (ss / (n - 2.0) / sxx).sqrt();
    if residual_rms > POWER_LAW_RESIDUAL_LIMIT {
        return Err(Error::NotPowerLaw(format!(
            "scale energies deviate from a power law by {residual_rms:.3} nats RMS"
        )));
    }
    Ok(ExponentEstimate {
        slope,
        half_width: 1.96 * se,
        band: band_used,
        n_scales: pts.len(),
        residual_rms,
    })
}

/// Plot-ready `(σ, ∫dτ|x̃|²)` rows.
pub fn scale_energy_csv(scaleogram: &Scaleogram) -> String {
    let mut out = String::from("# sigma,energy\n");
    for (s, e) in scaleogram.grid().scales().iter().zip(scale_energies(scaleogram)) {
        out.push_str(&format!("{},{}\n", fmt17(*s), fmt17(e)));
    }
    out
}

/// Per-scale Wiener weights fitted to a two-power-law energy model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenoiseFit {
    pub signal_exponent: f64,
    /// `None` stands for a noiseless model.
    pub noise_exponent: Option<f64>,
    pub signal_amplitude: f64,
    pub noise_amplitude: f64,
    pub scales: Vec<f64>,
    /// `w(σ_j)`, including the `1/Ψ̆(0)` normalisation.
    pub weights: Vec<f64>,
}

/// Fits `E(σ) ≈ A_s |σ|^{p_s} + A_n |σ|^{p_n}` to the scale energies by
/// relative least squares with non-negative amplitudes and returns the
/// weights `w = S/(S + N) / Ψ̆(0)`. `p_n = −∞` means no noise.
pub fn fit_denoise(
    scaleogram: &Scaleogram,
    signal_exponent: f64,
    noise_exponent: f64,
    wavelet: &Wavelet,
) -> Result<DenoiseFit> {
    if !signal_exponent.is_finite() {
        return Err(Error::Parameter("signal exponent must be finite".into()));
    }
    if noise_exponent.is_nan() || noise_exponent == f64::INFINITY {
        return Err(Error::Parameter("noise exponent must be finite or −∞".into()));
    }
    let scales = scaleogram.grid().scales();
    let k = 1.0 / wavelet.admissibility_constant();
    if noise_exponent == f64::NEG_INFINITY {
        return Ok(DenoiseFit {
            signal_exponent,
            noise_exponent: None,
            signal_amplitude: f64::NAN,
            noise_amplitude: 0.0,
            weights: vec![k; scales.len()],
            scales,
        });
    }
    let energies = scale_energies(scaleogram);
    let s_model: Vec<f64> = scales.iter().map(|s| s.abs().powf(signal_exponent)).collect();
    let n_model: Vec<f64> = scales.iter().map(|s| s.abs().powf(noise_exponent)).collect();
    let (a_s, a_n) = fit_two_components(&energies, &s_model, &n_model);
    let weights = s_model
        .iter()
        .zip(&n_model)
        .map(|(s, n)| {
            let (s, n) = (a_s * s, a_n * n);
            if s + n > 0.0 {
                k * s / (s + n)
            } else {
                0.0
            }
        })
        .collect();
    Ok(DenoiseFit {
        signal_exponent,
        noise_exponent: Some(noise_exponent),
        signal_amplitude: a_s,
        noise_amplitude: a_n,
        scales,
        weights,
    })
}

/// Non-negative least squares for `e ≈ a·s + b·n`, each residual divided
/// by `e`. Zero-energy rows are skipped.
fn fit_two_components(e: &[f64], s: &[f64], n: &[f64]) -> (f64, f64) {
    let rows: Vec<(f64, f64, f64)> = e
        .iter()
        .zip(s)
        .zip(n)
        .filter(|((e, _), _)| **e > 0.0)
        .map(|((e, s), n)| (1.0, s / e, n / e))
        .collect();
    if rows.is_empty() {
        return (0.0, 0.0);
    }
    let (mut ss, mut sn, mut nn, mut sy, mut ny) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(y, a, b) in &rows {
        ss += a * a;
        sn += a * b;
        nn += b * b;
        sy += a * y;
        ny += b * y;
    }
    let det = ss * nn - sn * sn;
    let single_s = (sy / ss).max(0.0);
    let single_n = (ny / nn).max(0.0);
    if det.abs() <= 1e-14 * ss * nn {
        return if sy * single_s >= ny * single_n { (single_s, 0.0) } else { (0.0, single_n) };
    }
    let a = (nn * sy - sn * ny) / det;
    let b = (ss * ny - sn * sy) / det;
    if a >= 0.0 && b >= 0.0 {
        return (a, b);
    }
    // one amplitude at its bound: keep the better single-component fit
    let cost = |a: f64, b: f64| -> f64 { rows.iter().map(|&(y, s, n)| (y - a * s - b * n).powi(2)).sum() };
    if cost(single_s, 0.0) <= cost(0.0, single_n) {
        (single_s, 0.0)
    } else {
        (0.0, single_n)
    }
}

/// Synthesis with fixed per-scale weights; linear in the scaleogram.
pub fn apply_denoise(
    scaleogram: &Scaleogram,
    fit: &DenoiseFit,
    wavelet: &Wavelet,
    opts: &SynthesisOptions,
) -> Result<Signal> {
    let w = denoise_filter(scaleogram, fit)?;
    Ok(apply_scale_filter(scaleogram, &w, wavelet, opts)?.output)
}

fn denoise_filter(scaleogram: &Scaleogram, fit: &DenoiseFit) -> Result<ScaleFilter> {
    let scales = scaleogram.grid().scales();
    if scales != fit.scales {
        return Err(Error::GridMismatch("denoising weights were fitted on another grid".into()));
    }
    let vo = scaleogram.grid().spec.voices * scaleogram.grid().spec.octaves;
    let pos: Vec<Complex64> = fit.weights[..vo].iter().map(|&w| Complex64::new(w, 0.0)).collect();
    let mut f = ScaleFilter::from_scale_values(&scales[..vo], &pos, Complex64::new(1.0, 0.0))?;
    if scales.len() > vo {
        let neg: Vec<Complex64> = fit.weights[vo..].iter().map(|&w| Complex64::new(w, 0.0)).collect();
        let neg_scales: Vec<f64> = scales[vo..].iter().map(|s| -s).collect();
        f.negative = crate::filter::Branch::table(&neg_scales, &neg)?;
    }
    // the noiseless model is a plain reconstruction, DC included
    if fit.noise_exponent.is_some() {
        f.dc_gain = Complex64::new(0.0, 0.0);
    }
    Ok(f)
}

#[derive(Debug, Clone)]
pub struct DenoiseResult {
    pub output: Signal,
    pub fit: DenoiseFit,
}

/// Transform, fit the weights, synthesise.
pub fn denoise_power_law(
    signal: &Signal,
    signal_exponent: f64,
    noise_exponent: f64,
    wavelet: &Wavelet,
    grid: &GridSpec,
    opts: &SynthesisOptions,
) -> Result<DenoiseResult> {
    let stg = ScaleTimeGrid::for_signal(*grid, signal)?;
    let sc = cwt_forward(signal, wavelet, &stg)?;
    let fit = fit_denoise(&sc, signal_exponent, noise_exponent, wavelet)?;
    let output = apply_denoise(&sc, &fit, wavelet, opts)?;
    Ok(DenoiseResult { output, fit })
}

/// `10 log₁₀(‖s‖² / ‖y − s‖²)` over the interior.
pub fn snr_db(estimate: &[Complex64], truth: &[Complex64]) -> f64 {
    let r = relative_l2_interior(estimate, truth);
    -20.0 * r.log10()
}
