//! Scale filters from frequency filters.
//!
//! For `W₊ = Ψ • w₊` the Mellin transform factorises, `W̆₊ = Ψ̆ · w̆₊`, so
//! `w₊(σ) = (1/2πi)∫_C dp σ^p W̆₊(p)/Ψ̆(p)`. Pure powers have no Mellin
//! strip of their own; for them the correspondence collapses to
//! `|f|^p ↔ |σ|^p / Ψ̆(p)`, which the closed-form families use directly.

use std::f64::consts::PI;

use log::info;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Branch, FilterForm, FrequencyFilter, ScaleFilter};
use crate::error::{Error, Result};
use crate::mellin::{
    scaling_convolve, ContourSamples, LogQuadrature, MellinContour, MellinFunction, Strip, CONTOUR_DECAY_TOL,
};
use crate::wavelet::Wavelet;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `|Ψ̆(p)| < PSI_ZERO_FLOOR · max|Ψ̆|` on the contour counts as a zero.
pub(crate) const PSI_ZERO_FLOOR: f64 = 1e-12;

/// Polynomial `P(D) = Σ aₙ Dⁿ` with `D = d/dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferentialOperatorSpec {
    pub coefficients: Vec<Complex64>,
}

impl DifferentialOperatorSpec {
    pub fn new(coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::Parameter("need at least one coefficient".into()));
        }
        if coefficients.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::Parameter("coefficients must be finite".into()));
        }
        if coefficients.len() > 1 && coefficients[coefficients.len() - 1] == ZERO {
            return Err(Error::Parameter("leading coefficient must be nonzero".into()));
        }
        Ok(Self { coefficients })
    }

    pub fn from_real(coefficients: &[f64]) -> Result<Self> {
        Self::new(coefficients.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Orders `n` with `aₙ ≠ 0`.
    pub fn active_orders(&self) -> impl Iterator<Item = usize> + '_ {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != ZERO)
            .map(|(n, _)| n)
    }
}

/// Contour and quadrature settings for [`derive_scale_filter`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignOptions {
    /// Contour abscissa; defaults to [`Strip::default_abscissa`] of the
    /// intersected strip.
    pub c: Option<f64>,
    pub u_max: f64,
    pub n_points: usize,
    pub quadrature: LogQuadrature,
    /// Number of frequencies used for the round-trip residual.
    pub residual_points: usize,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self {
            c: None,
            u_max: 10.0,
            n_points: 801,
            quadrature: LogQuadrature::default(),
            residual_points: 17,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignMethod {
    Zero,
    ClosedForm,
    Contour,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchDesign {
    pub strip: Strip,
    pub contour: MellinContour,
    pub min_psi_ratio: f64,
    pub edge_decay: f64,
}

/// Result of [`derive_scale_filter`].
#[derive(Debug, Clone)]
pub struct DesignedFilter {
    pub filter: ScaleFilter,
    pub method: DesignMethod,
    pub positive: Option<BranchDesign>,
    pub negative: Option<BranchDesign>,
    /// `max|Ψ • w − W| / max|W|` over the interior of the band, per branch
    /// maximum; `None` when not computed.
    pub residual: Option<f64>,
}

fn moment_or_inadmissible(wavelet: &Wavelet, p: f64) -> Result<Complex64> {
    let v = wavelet.mellin(Complex64::new(p, 0.0)).map_err(|e| match e {
        Error::Divergence { end, .. } => Error::Admissibility(format!(
            "Ψ̆({p}) diverges at the {end} end for wavelet {wavelet}"
        )),
        other => other,
    })?;
    if !(v.re.is_finite() && v.im.is_finite()) || v.norm() == 0.0 {
        return Err(Error::Admissibility(format!("Ψ̆({p}) = {v} is not finite and nonzero")));
    }
    Ok(v)
}

/// `(w, W) = (1/Ψ̆(0), 1)`.
pub fn identity_filter(wavelet: &Wavelet) -> (ScaleFilter, FrequencyFilter) {
    let k = Complex64::new(1.0 / wavelet.admissibility_constant(), 0.0);
    let mut w = ScaleFilter::new(Branch::Constant(k), Branch::Constant(k), Complex64::new(1.0, 0.0));
    w.form = Some(FilterForm::Identity);
    (w, FrequencyFilter::identity())
}

/// `(w, W) = (|σ|^p, Ψ̆(p)|f|^p)`.
pub fn power_filter(p: f64, wavelet: &Wavelet) -> Result<(ScaleFilter, FrequencyFilter)> {
    if !p.is_finite() {
        return Err(Error::Parameter("power exponent must be finite".into()));
    }
    let m = moment_or_inadmissible(wavelet, p)?;
    let big = FrequencyFilter::power(m, p);
    let one = Complex64::new(1.0, 0.0);
    let b = Branch::Power { coef: one, exponent: p };
    let mut w = ScaleFilter::new(b.clone(), b, big.dc_gain);
    w.form = Some(FilterForm::Power { coef: one, p });
    Ok((w, big))
}

/// `W(f) = Σ aₙ(2πif)ⁿ` and `w(σ) = Σ aₙ(2πiσ)ⁿ/Ψ̆(n)`.
pub fn differential_filter(
    spec: &DifferentialOperatorSpec,
    wavelet: &Wavelet,
) -> Result<(ScaleFilter, FrequencyFilter)> {
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let mut pos = vec![ZERO; spec.coefficients.len()];
    let mut neg = vec![ZERO; spec.coefficients.len()];
    for n in spec.active_orders() {
        let m = moment_or_inadmissible(wavelet, n as f64)?;
        if !(m.re > 0.0) {
            return Err(Error::Admissibility(format!("Ψ̆({n}) = {m} is not positive")));
        }
        let c = spec.coefficients[n] * two_pi_i.powu(n as u32) / m;
        pos[n] = c;
        neg[n] = if n % 2 == 0 { c } else { -c };
    }
    let big = FrequencyFilter::polynomial(&spec.coefficients);
    let mut w = ScaleFilter::new(Branch::Polynomial(pos), Branch::Polynomial(neg), big.dc_gain);
    w.form = big.form.clone();
    Ok((w, big))
}

/// `h(σ) = ∓i/Ψ̆(0)` for `σ ≷ 0`, `H(f) = ∓i` for `f ≷ 0`.
pub fn hilbert_filter(wavelet: &Wavelet) -> Result<(ScaleFilter, FrequencyFilter)> {
    let psi0 = moment_or_inadmissible(wavelet, 0.0)?.re;
    let mut w = ScaleFilter::new(
        Branch::Constant(Complex64::new(0.0, -1.0 / psi0)),
        Branch::Constant(Complex64::new(0.0, 1.0 / psi0)),
        ZERO,
    );
    w.form = Some(FilterForm::Hilbert);
    Ok((w, FrequencyFilter::hilbert()))
}

/// Splits two-sided samples into `W₊(f) = W(f)` and `W₋(f) = W(−f)` for
/// `f > 0`. A sample at `f = 0` is dropped.
pub fn split_signs(freqs: &[f64], values: &[Complex64]) -> Result<FrequencyFilter> {
    if freqs.len() != values.len() {
        return Err(Error::Parameter("frequencies and values differ in length".into()));
    }
    let mut pos: Vec<(f64, Complex64)> = Vec::new();
    let mut neg: Vec<(f64, Complex64)> = Vec::new();
    for (&f, &v) in freqs.iter().zip(values) {
        if !f.is_finite() || !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Parameter("filter samples must be finite".into()));
        }
        if f > 0.0 {
            pos.push((f, v));
        } else if f < 0.0 {
            neg.push((-f, v));
        } else {
            info!("ignoring the f = 0 sample {v}; DC is handled by the filter's DC gain");
        }
    }
    let side = |mut s: Vec<(f64, Complex64)>, name: &str| -> Result<Branch> {
        if s.iter().all(|(_, v)| *v == ZERO) {
            return Ok(Branch::Zero);
        }
        s.sort_by(|a, b| a.0.total_cmp(&b.0));
        if s.len() < 2 {
            return Err(Error::Parameter(format!("{name} branch needs at least two samples")));
        }
        let x: Vec<f64> = s.iter().map(|p| p.0).collect();
        let v: Vec<Complex64> = s.iter().map(|p| p.1).collect();
        Branch::table(&x, &v)
    };
    Ok(FrequencyFilter::new(side(pos, "positive")?, side(neg, "negative")?, ZERO))
}

fn closed_form_pair(form: &FilterForm, wavelet: &Wavelet) -> Result<ScaleFilter> {
    Ok(match form {
        FilterForm::Identity => identity_filter(wavelet).0,
        FilterForm::Power { coef, p } => {
            let (w, _) = power_filter(*p, wavelet)?;
            let m = moment_or_inadmissible(wavelet, *p)?;
            let mut out = w.scaled(coef / m);
            out.form = Some(FilterForm::Power { coef: coef / m, p: *p });
            out.dc_gain = if *p == 0.0 { *coef } else { ZERO };
            out
        }
        FilterForm::Polynomial { coefficients } => {
            differential_filter(&DifferentialOperatorSpec::new(coefficients.clone())?, wavelet)?.0
        }
        FilterForm::Hilbert => hilbert_filter(wavelet)?.0,
    })
}

fn derive_branch(
    branch: &Branch,
    declared: Option<Strip>,
    name: &str,
    wavelet: &Wavelet,
    opts: &DesignOptions,
    sigmas: &[f64],
) -> Result<(Branch, Option<BranchDesign>)> {
    if branch.is_zero() {
        return Ok((Branch::Zero, None));
    }
    let w_strip = declared.or_else(|| branch.inferred_strip()).ok_or_else(|| {
        Error::Admissibility(format!(
            "W{name} has no Mellin strip; pure powers need their closed form"
        ))
    })?;
    let strip = w_strip.intersect(&wavelet.strip());
    if strip.is_empty() {
        return Err(Error::Admissibility(format!(
            "the strips of W̆{name} ({}, {}) and Ψ̆ ({}, {}) do not overlap",
            w_strip.lo, w_strip.hi, wavelet.strip().lo, wavelet.strip().hi
        )));
    }
    let c = match opts.c {
        Some(c) => c,
        None => strip.default_abscissa().expect("non-empty strip"),
    };
    if !strip.contains(c) {
        return Err(Error::Contour(format!(
            "abscissa c = {c} lies outside the common strip ({}, {})",
            strip.lo, strip.hi
        )));
    }
    let contour = MellinContour::new(c, opts.u_max, opts.n_points)?;
    let b = branch.clone();
    let big = MellinFunction::quadrature(move |f| b.eval(f), strip, opts.quadrature)
        .on_contour(&contour)
        .map_err(|e| match e {
            Error::Divergence { end, detail } => Error::Admissibility(format!(
                "Mellin transform of W{name} diverges at the {end} end ({detail})"
            )),
            other => other,
        })?;
    let psi = wavelet.mellin_on_contour(&contour)?;
    let peak = psi.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let floor = psi.values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    let min_ratio = if peak > 0.0 { floor / peak } else { 0.0 };
    if !(min_ratio >= PSI_ZERO_FLOOR) {
        return Err(Error::Admissibility(format!(
            "Ψ̆ has a zero on the contour Re p = {c} (min/max = {min_ratio:.2e})"
        )));
    }
    let ratio = ContourSamples {
        contour,
        values: big
            .values
            .iter()
            .zip(&psi.values)
            .map(|(a, b)| a / b)
            .collect(),
    };
    let edge_decay = ratio.check_decay(CONTOUR_DECAY_TOL)?;
    let mut positive_sigmas: Vec<f64> = sigmas.iter().map(|s| s.abs()).filter(|s| *s > 0.0).collect();
    positive_sigmas.sort_by(f64::total_cmp);
    positive_sigmas.dedup();
    let values: Vec<Complex64> = positive_sigmas.iter().map(|&s| ratio.invert(s)).collect();
    Ok((
        Branch::table(&positive_sigmas, &values)?,
        Some(BranchDesign {
            strip,
            contour,
            min_psi_ratio: min_ratio,
            edge_decay,
        }),
    ))
}

/// Derives `w` from `W` for the given wavelet. Closed-form families use the
/// exact power correspondence; sampled branches go through the Mellin
/// contour. `sigmas` sets where numerically derived branches are tabulated
/// and the band on which the round-trip residual is measured.
pub fn derive_scale_filter(
    big: &FrequencyFilter,
    wavelet: &Wavelet,
    opts: &DesignOptions,
    sigmas: &[f64],
) -> Result<DesignedFilter> {
    if big.positive.is_zero() && big.negative.is_zero() {
        return Ok(DesignedFilter {
            filter: ScaleFilter::new(Branch::Zero, Branch::Zero, big.dc_gain),
            method: DesignMethod::Zero,
            positive: None,
            negative: None,
            residual: Some(0.0),
        });
    }
    let mut positive_design = None;
    let mut negative_design = None;
    let (filter, method) = match &big.form {
        Some(form) => (closed_form_pair(form, wavelet)?, DesignMethod::ClosedForm),
        None => {
            if sigmas.len() < 2 {
                return Err(Error::Parameter("need at least two scales to tabulate w".into()));
            }
            let (p, pd) = derive_branch(&big.positive, big.strips.0, "₊", wavelet, opts, sigmas)?;
            let (n, nd) = derive_branch(&big.negative, big.strips.1, "₋", wavelet, opts, sigmas)?;
            positive_design = pd;
            negative_design = nd;
            let lo = sigmas.iter().map(|s| s.abs()).fold(f64::INFINITY, f64::min);
            let hi = sigmas.iter().map(|s| s.abs()).fold(0.0, f64::max);
            let mut f = ScaleFilter::new(p, n, big.dc_gain);
            f.band = Some((lo, hi));
            (f, DesignMethod::Contour)
        }
    };
    let residual = if sigmas.len() >= 2 && opts.residual_points >= 2 {
        Some(round_trip_residual(big, &filter, wavelet, sigmas, opts)?)
    } else {
        None
    };
    Ok(DesignedFilter {
        filter,
        method,
        positive: positive_design,
        negative: negative_design,
        residual,
    })
}

/// `max|Ψ • w − W| / max|W|` over the interior two-thirds (in log) of the
/// band spanned by `sigmas`, worst branch.
fn round_trip_residual(
    big: &FrequencyFilter,
    w: &ScaleFilter,
    wavelet: &Wavelet,
    sigmas: &[f64],
    opts: &DesignOptions,
) -> Result<f64> {
    let lo = sigmas.iter().map(|s| s.abs()).fold(f64::INFINITY, f64::min).ln();
    let hi = sigmas.iter().map(|s| s.abs()).fold(0.0, f64::max).ln();
    let (a, b) = (lo + (hi - lo) / 6.0, hi - (hi - lo) / 6.0);
    let n = opts.residual_points;
    let freqs: Vec<f64> = (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect();
    let mut worst: f64 = 0.0;
    for (wb, bb) in [(&w.positive, &big.positive), (&w.negative, &big.negative)] {
        if bb.is_zero() && wb.is_zero() {
            continue;
        }
        let conv = scaling_convolve(|s| wb.eval(s), wavelet, &freqs, &opts.quadrature)?;
        let target: Vec<Complex64> = freqs.iter().map(|&f| bb.eval(f)).collect();
        let scale = target.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let dev = conv
            .iter()
            .zip(&target)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        worst = worst.max(if scale > 0.0 { dev / scale } else { dev });
    }
    Ok(worst)
}
