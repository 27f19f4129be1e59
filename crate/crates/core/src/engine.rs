//! Forward wavelet transform and wavelet-domain synthesis.
//!
//! Wavelet family: `ψ_{σ,τ}(t) = ψ(σt − τ)`, unnormalised, scale first and
//! then shift. The more common `s^{−1/2} ψ((t − b)/s)` corresponds to
//! `s = 1/σ`, `b = τ/σ` up to the amplitude factor.
//!
//! Per scale the transform is `x̃(σ, τ) = y_σ(τ/σ)` with
//! `ŷ_σ(ν) = ψ̂(ν/σ)* x̂(ν) / |σ|`, so rows are stored on the signal's own
//! sample grid and the `τ` values of row `σ` are `σ·t_k`. Synthesis with a
//! scale filter `w` adds `Δσ_j w(σ_j) ψ̂(ν/σ_j) ŷ_j(ν)` over the grid, with
//! `Δσ_j = |σ_j| ln2 / V`.

use std::f64::consts::LN_2;

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{identity_filter, ScaleFilter};
use crate::signal::{frequency_axis, FftPlan, Signal};
use crate::wavelet::Wavelet;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Geometric scale grid parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub sigma_min: f64,
    pub voices: usize,
    pub octaves: usize,
    #[serde(default)]
    pub include_negative_scales: bool,
}

impl GridSpec {
    pub fn new(sigma_min: f64, voices: usize, octaves: usize) -> Self {
        Self {
            sigma_min,
            voices,
            octaves,
            include_negative_scales: false,
        }
    }

    pub fn with_negative_scales(mut self, yes: bool) -> Self {
        self.include_negative_scales = yes;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_min > 0.0 && self.sigma_min.is_finite()) {
            return Err(Error::Parameter(format!("sigma_min must be positive, got {}", self.sigma_min)));
        }
        if self.voices == 0 || self.octaves == 0 {
            return Err(Error::Parameter("voices and octaves must be positive".into()));
        }
        Ok(())
    }

    /// Positive scales `σ_j = σ_min · 2^{j/V}`, `j = 0 … O·V − 1`.
    pub fn positive_scales(&self) -> Vec<f64> {
        (0..self.voices * self.octaves)
            .map(|j| self.sigma_min * 2f64.powf(j as f64 / self.voices as f64))
            .collect()
    }

    /// Positive scales followed, if enabled, by their negatives.
    pub fn signed_scales(&self) -> Vec<f64> {
        let pos = self.positive_scales();
        if self.include_negative_scales {
            pos.iter().copied().chain(pos.iter().map(|s| -s)).collect()
        } else {
            pos
        }
    }

    /// Quadrature weights for `dσ`: `|σ_j| ln2 / V`.
    pub fn weights(&self) -> Vec<f64> {
        self.signed_scales()
            .iter()
            .map(|s| s.abs() * LN_2 / self.voices as f64)
            .collect()
    }

    /// `(σ_min, σ_max)` of the positive scales.
    pub fn range(&self) -> (f64, f64) {
        let s = self.positive_scales();
        (s[0], s[s.len() - 1])
    }
}

/// Scale grid bound to a sample grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleTimeGrid {
    pub spec: GridSpec,
    pub n_times: usize,
    pub sample_rate: f64,
    pub start_time: f64,
}

impl ScaleTimeGrid {
    pub fn new(spec: GridSpec, n_times: usize, sample_rate: f64, start_time: f64) -> Result<Self> {
        spec.validate()?;
        if !n_times.is_power_of_two() || n_times < 2 {
            return Err(Error::Length(format!("time grid length {n_times} is not a power of two")));
        }
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::Parameter("sample rate must be positive".into()));
        }
        Ok(Self {
            spec,
            n_times,
            sample_rate,
            start_time,
        })
    }

    /// Grid matching the padded length, rate and start of `signal`.
    pub fn for_signal(spec: GridSpec, signal: &Signal) -> Result<Self> {
        Self::new(
            spec,
            signal.len().next_power_of_two(),
            signal.sample_rate(),
            signal.start_time(),
        )
    }

    pub fn scales(&self) -> Vec<f64> {
        self.spec.signed_scales()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.spec.weights()
    }

    pub fn n_scales(&self) -> usize {
        self.spec.voices * self.spec.octaves * if self.spec.include_negative_scales { 2 } else { 1 }
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    /// Sample times `t_k`; row `σ` has `τ_k = σ t_k`.
    pub fn times(&self) -> Vec<f64> {
        (0..self.n_times)
            .map(|k| self.start_time + k as f64 / self.sample_rate)
            .collect()
    }
}

/// What the analysed signal looked like.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceMeta {
    pub original_len: usize,
    pub sample_rate: f64,
    pub start_time: f64,
    pub is_real: bool,
    /// `x̂(0)`, which no wavelet sees.
    pub dc: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scaleogram {
    grid: ScaleTimeGrid,
    coefficients: Vec<Complex64>,
    meta: SourceMeta,
}

impl Scaleogram {
    pub fn from_parts(grid: ScaleTimeGrid, coefficients: Vec<Complex64>, meta: SourceMeta) -> Result<Self> {
        if coefficients.len() != grid.n_scales() * grid.n_times {
            return Err(Error::GridMismatch(format!(
                "{} coefficients do not fill a {}×{} grid",
                coefficients.len(),
                grid.n_scales(),
                grid.n_times
            )));
        }
        Ok(Self {
            grid,
            coefficients,
            meta,
        })
    }

    pub fn zeros(grid: ScaleTimeGrid, meta: SourceMeta) -> Self {
        let n = grid.n_scales() * grid.n_times;
        Self {
            grid,
            coefficients: vec![ZERO; n],
            meta,
        }
    }

    pub fn grid(&self) -> &ScaleTimeGrid {
        &self.grid
    }

    pub fn meta(&self) -> &SourceMeta {
        &self.meta
    }

    /// Row-major `(scale, time)` coefficients.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn row(&self, j: usize) -> &[Complex64] {
        let n = self.grid.n_times;
        &self.coefficients[j * n..(j + 1) * n]
    }

    pub fn n_scales(&self) -> usize {
        self.grid.n_scales()
    }

    /// `a·self + b·other` on identical grids.
    pub fn combine(&self, a: Complex64, other: &Scaleogram, b: Complex64) -> Result<Scaleogram> {
        check_same_grid(&self.grid, &other.grid)?;
        let coefficients = self
            .coefficients
            .iter()
            .zip(&other.coefficients)
            .map(|(&x, &y)| a * x + b * y)
            .collect();
        let mut meta = self.meta;
        meta.dc = a * self.meta.dc + b * other.meta.dc;
        // the projection follows the sources, so synthesis stays linear
        meta.is_real = self.meta.is_real && other.meta.is_real;
        Ok(Scaleogram {
            grid: self.grid.clone(),
            coefficients,
            meta,
        })
    }
}

fn check_same_grid(a: &ScaleTimeGrid, b: &ScaleTimeGrid) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch("scaleograms live on different grids".into()));
    }
    Ok(())
}

/// Forward transform on the grid. The signal is zero-padded to the grid's
/// length, which must match.
pub fn cwt_forward(signal: &Signal, wavelet: &Wavelet, grid: &ScaleTimeGrid) -> Result<Scaleogram> {
    let x = signal.padded();
    if x.len() != grid.n_times {
        return Err(Error::GridMismatch(format!(
            "padded signal has {} samples but the grid has {}",
            x.len(),
            grid.n_times
        )));
    }
    if (x.sample_rate() - grid.sample_rate).abs() > 1e-12 * grid.sample_rate {
        return Err(Error::GridMismatch(format!(
            "signal rate {} differs from grid rate {}",
            x.sample_rate(),
            grid.sample_rate
        )));
    }
    let n = x.len();
    let dt = x.dt();
    let plan = FftPlan::new(n);
    let mut spectrum = x.samples().to_vec();
    plan.forward(&mut spectrum, dt);
    let axis = frequency_axis(n, x.sample_rate());
    let scales = grid.scales();

    let overlap = scales.iter().any(|&s| {
        axis.iter()
            .zip(&spectrum)
            .any(|(&f, z)| f != 0.0 && z.norm() > 0.0 && wavelet.spectral(f / s).norm() > 0.0)
    });
    if !overlap && spectrum.iter().any(|z| z.norm() > 0.0) {
        warn!("scale band of the grid does not overlap the signal band");
    }

    let rows: Vec<Vec<Complex64>> = scales
        .par_iter()
        .map(|&s| {
            let inv = 1.0 / s.abs();
            let mut buf: Vec<Complex64> = axis
                .iter()
                .zip(&spectrum)
                .map(|(&f, &z)| wavelet.spectral(f / s).conj() * z * inv)
                .collect();
            plan.inverse(&mut buf, dt);
            buf
        })
        .collect();
    let meta = SourceMeta {
        original_len: signal.original_len(),
        sample_rate: signal.sample_rate(),
        start_time: signal.start_time(),
        is_real: signal.is_real(),
        dc: spectrum[0],
    };
    Scaleogram::from_parts(grid.clone(), rows.concat(), meta)
}

/// How the synthesised spectrum is turned into the output signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    /// Real source, positive scales only: positive bins doubled, negative
    /// bins dropped, giving the analytic part of the filtered signal.
    AnalyticCompletion,
    /// Everything as synthesised.
    Direct,
}

impl Projection {
    pub fn for_source(grid: &GridSpec, source_is_real: bool) -> Self {
        if source_is_real && !grid.include_negative_scales {
            Projection::AnalyticCompletion
        } else {
            Projection::Direct
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SynthesisOptions {
    /// Return the real part of the output.
    pub real_output: bool,
}

/// Effective frequency response of a synthesis on the signal's bins.
#[derive(Debug, Clone, PartialEq)]
pub struct BandCoverage {
    pub frequencies: Vec<f64>,
    pub symbol: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct Synthesis {
    pub output: Signal,
    pub coverage: BandCoverage,
    pub projection: Projection,
}

/// `W_eff(f) = Σ_j Δσ_j w(σ_j) Ψ(f/σ_j) / |σ_j|` at each `f`.
pub fn effective_symbol(grid: &GridSpec, w: &ScaleFilter, wavelet: &Wavelet, freqs: &[f64]) -> Vec<Complex64> {
    let scales = grid.signed_scales();
    let coef: Vec<Complex64> = scales
        .iter()
        .map(|&s| w.eval(s) * (LN_2 / grid.voices as f64))
        .collect();
    freqs
        .par_iter()
        .map(|&f| {
            if f == 0.0 {
                return ZERO;
            }
            let mut acc = ZERO;
            for (&s, &c) in scales.iter().zip(&coef) {
                if c != ZERO {
                    acc += c * wavelet.density(f / s);
                }
            }
            acc
        })
        .collect()
}

/// Applies the output projection and the DC term in place.
fn finish_bins(bins: &mut [Complex64], axis: &[f64], projection: Projection, dc: Complex64) {
    for (z, &f) in bins.iter_mut().zip(axis) {
        if f == 0.0 {
            *z = dc;
        } else if projection == Projection::AnalyticCompletion {
            *z = if f > 0.0 { 2.0 * *z } else { ZERO };
        }
    }
}

fn bins_to_output(
    mut bins: Vec<Complex64>,
    plan: &FftPlan,
    meta: &SourceMeta,
    real_output: bool,
) -> Result<Signal> {
    let dt = 1.0 / meta.sample_rate;
    plan.inverse(&mut bins, dt);
    bins.truncate(meta.original_len);
    if real_output {
        for z in bins.iter_mut() {
            z.im = 0.0;
        }
    }
    Ok(Signal::new(bins, meta.sample_rate)?.with_start_time(meta.start_time))
}

/// Multiplies the spectrum of `signal` by `symbol(f)` on every `f ≠ 0` bin,
/// sets the DC bin to `dc_gain · x̂(0)`, and applies `projection`.
pub fn apply_symbol<S>(
    signal: &Signal,
    symbol: S,
    dc_gain: Complex64,
    projection: Projection,
    real_output: bool,
) -> Result<Signal>
where
    S: Fn(usize, f64) -> Complex64,
{
    let x = signal.padded();
    let n = x.len();
    let plan = FftPlan::new(n);
    let mut bins = x.samples().to_vec();
    plan.forward(&mut bins, x.dt());
    let axis = frequency_axis(n, x.sample_rate());
    let dc = dc_gain * bins[0];
    for (k, (z, &f)) in bins.iter_mut().zip(&axis).enumerate() {
        if f != 0.0 {
            *z *= symbol(k, f);
        }
    }
    finish_bins(&mut bins, &axis, projection, dc);
    let meta = SourceMeta {
        original_len: signal.original_len(),
        sample_rate: signal.sample_rate(),
        start_time: signal.start_time(),
        is_real: signal.is_real(),
        dc,
    };
    bins_to_output(bins, &plan, &meta, real_output)
}

/// Wavelet-domain synthesis `∬dσdτ ψ_{σ,τ}(t) w(σ) x̃(σ,τ)` on the grid.
pub fn apply_scale_filter(
    scaleogram: &Scaleogram,
    w: &ScaleFilter,
    wavelet: &Wavelet,
    opts: &SynthesisOptions,
) -> Result<Synthesis> {
    let grid = scaleogram.grid();
    let scales = grid.scales();
    w.check_band(&scales)?;
    let weights = grid.weights();
    let n = grid.n_times;
    let dt = grid.dt();
    let plan = FftPlan::new(n);
    let axis = frequency_axis(n, grid.sample_rate);
    let coef: Vec<Complex64> = scales
        .iter()
        .zip(&weights)
        .map(|(&s, &wt)| w.eval(s) * wt)
        .collect();
    if coef.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite("scale filter is not finite on the grid".into()));
    }

    let contributions: Vec<Option<Vec<Complex64>>> = (0..scales.len())
        .into_par_iter()
        .map(|j| {
            if coef[j] == ZERO {
                return None;
            }
            let mut buf = scaleogram.row(j).to_vec();
            plan.forward(&mut buf, dt);
            let s = scales[j];
            for (z, &f) in buf.iter_mut().zip(&axis) {
                *z *= coef[j] * wavelet.spectral(f / s);
            }
            Some(buf)
        })
        .collect();
    let mut acc = vec![ZERO; n];
    for c in contributions.into_iter().flatten() {
        for (a, z) in acc.iter_mut().zip(c) {
            *a += z;
        }
    }
    let meta = scaleogram.meta();
    let projection = Projection::for_source(&grid.spec, meta.is_real);
    finish_bins(&mut acc, &axis, projection, w.dc_gain * meta.dc);
    let output = bins_to_output(acc, &plan, meta, opts.real_output)?;
    let symbol = effective_symbol(&grid.spec, w, wavelet, &axis);
    Ok(Synthesis {
        output,
        coverage: BandCoverage {
            frequencies: axis,
            symbol,
        },
        projection,
    })
}

/// Synthesis with `w = 1/Ψ̆(0)`.
pub fn reconstruct(scaleogram: &Scaleogram, wavelet: &Wavelet, opts: &SynthesisOptions) -> Result<Signal> {
    let (w, _) = identity_filter(wavelet);
    Ok(apply_scale_filter(scaleogram, &w, wavelet, opts)?.output)
}

/// `∫dτ |x̃(σ_j, τ)|²` for every grid scale.
pub fn scale_energies(scaleogram: &Scaleogram) -> Vec<f64> {
    let grid = scaleogram.grid();
    grid.scales()
        .iter()
        .enumerate()
        .map(|(j, s)| s.abs() * grid.dt() * scaleogram.row(j).iter().map(|z| z.norm_sqr()).sum::<f64>())
        .collect()
}

fn real_nonnegative(w: &ScaleFilter, scales: &[f64]) -> Result<Vec<f64>> {
    scales
        .iter()
        .map(|&s| {
            let v = w.eval(s);
            if v.re >= 0.0 && v.im.abs() <= 1e-12 * v.re.abs().max(f64::MIN_POSITIVE) && v.re.is_finite() {
                Ok(v.re)
            } else {
                Err(Error::Domain(format!("weight w({s}) = {v} is not real and non-negative")))
            }
        })
        .collect()
}

/// `∬dσdτ w(σ)|x̃(σ,τ)|²`; `w` must be real and non-negative on the grid.
pub fn weighted_energy(scaleogram: &Scaleogram, w: &ScaleFilter) -> Result<f64> {
    let grid = scaleogram.grid();
    let wv = real_nonnegative(w, &grid.scales())?;
    Ok(scale_energies(scaleogram)
        .iter()
        .zip(grid.weights())
        .zip(wv)
        .map(|((e, wt), w)| e * wt * w)
        .sum())
}

/// `∬dσdτ φ̃* w χ̃`.
pub fn parseval_pair(phi: &Scaleogram, chi: &Scaleogram, w: &ScaleFilter) -> Result<Complex64> {
    check_same_grid(phi.grid(), chi.grid())?;
    let grid = phi.grid();
    let dt = grid.dt();
    Ok(grid
        .scales()
        .iter()
        .zip(grid.weights())
        .enumerate()
        .map(|(j, (&s, wt))| {
            let inner: Complex64 = phi.row(j).iter().zip(chi.row(j)).map(|(a, b)| a.conj() * b).sum();
            inner * (s.abs() * dt * wt) * w.eval(s)
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_geometric() {
        let g = GridSpec::new(2.0, 8, 3).with_negative_scales(true);
        let s = g.positive_scales();
        assert_eq!(s.len(), 24);
        for w in s.windows(2) {
            assert!((w[1] / w[0] - 2f64.powf(1.0 / 8.0)).abs() < 1e-12);
        }
        assert_eq!(g.signed_scales().len(), 48);
        assert!(g.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(0.0, 8, 3).validate().is_err());
        assert!(GridSpec::new(1.0, 0, 3).validate().is_err());
        assert!(ScaleTimeGrid::new(GridSpec::new(1.0, 4, 2), 100, 1.0, 0.0).is_err());
    }

    #[test]
    fn rate_mismatch_rejected() {
        let w = Wavelet::cauchy(1.0).unwrap();
        let x = Signal::from_real(&[0.0; 64], 64.0).unwrap();
        let g = ScaleTimeGrid::new(GridSpec::new(1.0, 4, 2), 64, 32.0, 0.0).unwrap();
        assert!(matches!(cwt_forward(&x, &w, &g), Err(Error::GridMismatch(_))));
    }
}
