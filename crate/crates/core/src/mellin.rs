//! Numerical Mellin transform `F̆(p) = ∫₀^∞ (dσ/σ) σ^{−p} F(σ)`, its inverse
//! along a vertical contour, and scaling convolution.
//!
//! All forward integrals are trapezoid sums in `x = ln σ` on a grid anchored
//! at `σ = 1`. The grid starts at `[2^−20, 2^20]` and each end is extended
//! in 20-octave steps until the last octave carries less than `tail_tol` of
//! the accumulated mass `Σ|σ^{−Re p} F|`. An end that keeps failing is a
//! divergence and is reported by name.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, TailEnd};
use crate::wavelet::Wavelet;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Evaluation batches smaller than this stay on the calling thread.
const PAR_THRESHOLD: usize = 512;

/// Open strip `lo < Re p < hi` of absolute convergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    pub lo: f64,
    pub hi: f64,
}

impl Strip {
    pub const WHOLE_PLANE: Strip = Strip {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, re: f64) -> bool {
        re > self.lo && re < self.hi
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi)
    }

    pub fn intersect(&self, other: &Strip) -> Strip {
        Strip {
            lo: self.lo.max(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    /// Default contour abscissa: the point of the strip closest to
    /// `Re p = 0` that keeps a margin of `min(1/2, width/2)` from both edges.
    /// For a bounded strip narrower than one unit this is the midpoint.
    pub fn default_abscissa(&self) -> Option<f64> {
        if self.is_empty() {
            return None;
        }
        let margin = (0.5 * (self.hi - self.lo)).min(0.5);
        let (a, b) = (self.lo + margin, self.hi - margin);
        Some(0.0f64.clamp(a, b))
    }
}

/// Tail diagnostics of a sampled log grid: last-octave mass at each end
/// relative to the total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub lower: f64,
    pub upper: f64,
}

impl TailEstimate {
    pub fn max(&self) -> f64 {
        self.lower.max(self.upper)
    }
}

/// Trapezoid quadrature on a uniform grid in `ln σ` with adaptive tails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogQuadrature {
    pub points_per_octave: usize,
    /// Initial grid `[2^lo, 2^hi]`.
    pub initial_octaves: (i32, i32),
    /// Octaves added per extension step.
    pub extension_octaves: i32,
    /// Hard limit on `|log₂ σ|`.
    pub max_octaves: i32,
    /// Convergence threshold on the last-octave mass fraction.
    pub tail_tol: f64,
}

impl Default for LogQuadrature {
    fn default() -> Self {
        Self {
            points_per_octave: 16,
            initial_octaves: (-20, 20),
            extension_octaves: 20,
            max_octaves: 600,
            tail_tol: 1e-10,
        }
    }
}

impl LogQuadrature {
    pub fn with_density(points_per_octave: usize) -> Self {
        Self {
            points_per_octave,
            ..Self::default()
        }
    }

    pub fn step(&self) -> f64 {
        std::f64::consts::LN_2 / self.points_per_octave as f64
    }

    fn eval_range<F>(&self, f: &F, k0: i64, k1: i64) -> Result<Vec<Complex64>>
    where
        F: Fn(f64) -> Complex64 + Sync,
    {
        let h = self.step();
        let eval = |k: i64| {
            let v = f((k as f64 * h).exp());
            if v.re.is_finite() && v.im.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite(format!(
                    "integrand is not finite at σ = {:e}",
                    (k as f64 * h).exp()
                )))
            }
        };
        if (k1 - k0) as usize >= PAR_THRESHOLD {
            (k0..k1).into_par_iter().map(eval).collect()
        } else {
            (k0..k1).map(eval).collect()
        }
    }

    /// Samples `F` on a log grid whose ends are extended until the tails of
    /// `|σ^{−c} F(σ)|` are negligible.
    pub fn sample<F>(&self, f: F, c: f64) -> Result<LogSamples>
    where
        F: Fn(f64) -> Complex64 + Sync,
    {
        if self.points_per_octave == 0 {
            return Err(Error::Parameter("points_per_octave must be positive".into()));
        }
        let ppo = self.points_per_octave as i64;
        let h = self.step();
        let mut k_lo = self.initial_octaves.0 as i64 * ppo;
        let k_hi = self.initial_octaves.1 as i64 * ppo;
        let mut values = self.eval_range(&f, k_lo, k_hi + 1)?;
        let mut k_end = k_hi;

        let weight = |k: i64, v: Complex64| -> f64 {
            let m = v.norm();
            if m == 0.0 {
                0.0
            } else {
                (m.ln() - c * k as f64 * h).exp()
            }
        };

        let mut stalls = [0u32; 2];
        let mut previous = [f64::INFINITY; 2];
        loop {
            let masses: Vec<f64> = values
                .iter()
                .enumerate()
                .map(|(i, &v)| weight(k_lo + i as i64, v))
                .collect();
            let total: f64 = pairwise_sum_f64(&masses);
            if !total.is_finite() {
                return Err(Error::NonFinite("weighted integrand mass overflowed".into()));
            }
            let n = masses.len();
            let lower: f64 = masses[..ppo as usize].iter().sum();
            let upper: f64 = masses[n - ppo as usize..].iter().sum();
            let (lower_rel, upper_rel) = if total > 0.0 {
                (lower / total, upper / total)
            } else {
                (0.0, 0.0)
            };
            let lower_ok = lower_rel <= self.tail_tol;
            let upper_ok = upper_rel <= self.tail_tol;
            if lower_ok && upper_ok {
                return Ok(LogSamples {
                    k_lo,
                    h,
                    values,
                    c,
                    tails: TailEstimate {
                        lower: lower_rel,
                        upper: upper_rel,
                    },
                });
            }
            let ext = self.extension_octaves as i64 * ppo;
            for (side, ok, tail, end) in [
                (0usize, lower_ok, lower, TailEnd::Lower),
                (1usize, upper_ok, upper, TailEnd::Upper),
            ] {
                if ok {
                    continue;
                }
                if tail >= previous[side] {
                    stalls[side] += 1;
                } else {
                    stalls[side] = 0;
                }
                previous[side] = tail;
                let at_limit = match end {
                    TailEnd::Lower => -k_lo >= self.max_octaves as i64 * ppo,
                    TailEnd::Upper => k_end >= self.max_octaves as i64 * ppo,
                };
                if stalls[side] >= 3 || at_limit {
                    let rel = if side == 0 { lower_rel } else { upper_rel };
                    return Err(Error::Divergence {
                        end,
                        detail: format!(
                            "last-octave mass fraction {rel:.3e} at Re p = {c} after extending to 2^{}",
                            if side == 0 { k_lo / ppo } else { k_end / ppo }
                        ),
                    });
                }
            }
            if !lower_ok {
                let new_lo = k_lo - ext;
                let mut front = self.eval_range(&f, new_lo, k_lo)?;
                front.extend_from_slice(&values);
                values = front;
                k_lo = new_lo;
            }
            if !upper_ok {
                let tail = self.eval_range(&f, k_end + 1, k_end + 1 + ext)?;
                values.extend(tail);
                k_end += ext;
            }
        }
    }
}

/// Function values on a converged log grid.
#[derive(Debug, Clone)]
pub struct LogSamples {
    k_lo: i64,
    h: f64,
    values: Vec<Complex64>,
    c: f64,
    tails: TailEstimate,
}

impl LogSamples {
    pub fn tails(&self) -> TailEstimate {
        self.tails
    }

    /// The `Re p` the tails were certified for.
    pub fn abscissa(&self) -> f64 {
        self.c
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Covered range `(σ_min, σ_max)`.
    pub fn range(&self) -> (f64, f64) {
        let lo = self.k_lo as f64 * self.h;
        let hi = (self.k_lo + self.values.len() as i64 - 1) as f64 * self.h;
        (lo.exp(), hi.exp())
    }

    /// `Σ h · σ_k^{−p} F(σ_k)`.
    pub fn mellin(&self, p: Complex64) -> Complex64 {
        let terms: Vec<Complex64> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if v == ZERO {
                    ZERO
                } else {
                    let x = (self.k_lo + i as i64) as f64 * self.h;
                    (v.ln() - p * x).exp()
                }
            })
            .collect();
        pairwise_sum(&terms) * self.h
    }

    /// `∫ dσ/σ F(σ)`.
    pub fn integral(&self) -> Complex64 {
        pairwise_sum(&self.values) * self.h
    }
}

/// Result of a forward transform together with its tail diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MellinValue {
    pub value: Complex64,
    pub tail_bound: f64,
}

pub fn mellin_forward<F>(f: F, quad: &LogQuadrature, p: Complex64) -> Result<MellinValue>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let samples = quad.sample(f, p.re)?;
    Ok(MellinValue {
        value: samples.mellin(p),
        tail_bound: samples.tails().max(),
    })
}

/// Vertical contour `p = c + iu`, `u ∈ [−u_max, u_max]`, trapezoid nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MellinContour {
    pub c: f64,
    pub u_max: f64,
    pub n_points: usize,
}

impl MellinContour {
    pub fn new(c: f64, u_max: f64, n_points: usize) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::Contour(format!("abscissa must be finite, got {c}")));
        }
        if !(u_max > 0.0 && u_max.is_finite()) {
            return Err(Error::Contour(format!("u_max must be positive, got {u_max}")));
        }
        if n_points < 16 || n_points % 2 == 0 {
            return Err(Error::Contour(format!(
                "n_points must be odd and at least 16, got {n_points}"
            )));
        }
        Ok(Self { c, u_max, n_points })
    }

    pub fn du(&self) -> f64 {
        2.0 * self.u_max / (self.n_points - 1) as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = Complex64> + '_ {
        let du = self.du();
        (0..self.n_points).map(move |k| Complex64::new(self.c, -self.u_max + k as f64 * du))
    }

    pub fn shifted(&self, a: f64) -> Self {
        Self {
            c: self.c + a,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Quadrature,
}

type ClosedFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;
type SampledFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

#[derive(Clone)]
enum Source {
    Closed(ClosedFn),
    Quadrature { f: SampledFn, quad: LogQuadrature },
}

/// A Mellin transform `F̆(p)` known on a strip, either in closed form or by
/// quadrature of the underlying `F(σ)`.
#[derive(Clone)]
pub struct MellinFunction {
    source: Source,
    strip: Strip,
}

impl std::fmt::Debug for MellinFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MellinFunction")
            .field("provenance", &self.provenance())
            .field("strip", &self.strip)
            .finish()
    }
}

impl MellinFunction {
    pub fn closed_form<G>(g: G, strip: Strip) -> Self
    where
        G: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            source: Source::Closed(Arc::new(g)),
            strip,
        }
    }

    pub fn quadrature<F>(f: F, strip: Strip, quad: LogQuadrature) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            source: Source::Quadrature {
                f: Arc::new(f),
                quad,
            },
            strip,
        }
    }

    pub fn strip(&self) -> Strip {
        self.strip
    }

    pub fn provenance(&self) -> Provenance {
        match self.source {
            Source::Closed(_) => Provenance::ClosedForm,
            Source::Quadrature { .. } => Provenance::Quadrature,
        }
    }

    /// Grid parameters when the provenance is quadrature.
    pub fn quadrature_params(&self) -> Option<LogQuadrature> {
        match &self.source {
            Source::Quadrature { quad, .. } => Some(*quad),
            Source::Closed(_) => None,
        }
    }

    fn check_strip(&self, re: f64) -> Result<()> {
        if self.strip.contains(re) {
            Ok(())
        } else {
            Err(Error::Contour(format!(
                "Re p = {re} lies outside the strip ({}, {})",
                self.strip.lo, self.strip.hi
            )))
        }
    }

    pub fn eval(&self, p: Complex64) -> Result<Complex64> {
        self.check_strip(p.re)?;
        match &self.source {
            Source::Closed(g) => Ok(g(p)),
            Source::Quadrature { f, quad } => Ok(mellin_forward(|s| f(s), quad, p)?.value),
        }
    }

    /// Values at every contour node. Quadrature sources sample `F` once.
    pub fn on_contour(&self, contour: &MellinContour) -> Result<ContourSamples> {
        self.check_strip(contour.c)?;
        let values = match &self.source {
            Source::Closed(g) => contour.nodes().map(|p| g(p)).collect(),
            Source::Quadrature { f, quad } => {
                let samples = quad.sample(|s| f(s), contour.c)?;
                let nodes: Vec<Complex64> = contour.nodes().collect();
                nodes.par_iter().map(|&p| samples.mellin(p)).collect()
            }
        };
        Ok(ContourSamples {
            contour: *contour,
            values,
        })
    }
}

/// `F̆` sampled at the nodes of a contour.
#[derive(Debug, Clone)]
pub struct ContourSamples {
    pub contour: MellinContour,
    pub values: Vec<Complex64>,
}

/// Default bound on `|F̆(c ± iu_max)| / max|F̆|` along the contour.
pub const CONTOUR_DECAY_TOL: f64 = 1e-6;

impl ContourSamples {
    pub fn map<G: Fn(Complex64, Complex64) -> Complex64>(&self, g: G) -> ContourSamples {
        let values = self
            .contour
            .nodes()
            .zip(&self.values)
            .map(|(p, &v)| g(p, v))
            .collect();
        ContourSamples {
            contour: self.contour,
            values,
        }
    }

    /// `|F̆(c ± iu_max)| / max|F̆|`; zero for an identically vanishing F̆.
    pub fn edge_decay(&self) -> f64 {
        let peak = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let n = self.values.len();
        self.values[0].norm().max(self.values[n - 1].norm()) / peak
    }

    pub fn check_decay(&self, tol: f64) -> Result<f64> {
        let d = self.edge_decay();
        if d.is_finite() && d <= tol {
            Ok(d)
        } else {
            Err(Error::Truncation(format!(
                "integrand has not decayed at u_max = {} (edge/peak = {d:.3e} > {tol:.1e})",
                self.contour.u_max
            )))
        }
    }

    /// `(1/2πi)∫_C dp σ^p F̆(p)` by the trapezoid rule.
    pub fn invert(&self, sigma: f64) -> Complex64 {
        let ln_s = sigma.ln();
        let n = self.values.len();
        let terms: Vec<Complex64> = self
            .contour
            .nodes()
            .zip(&self.values)
            .enumerate()
            .map(|(k, (p, &v))| {
                let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
                w * v * (p * ln_s).exp()
            })
            .collect();
        pairwise_sum(&terms) * (self.contour.du() / (2.0 * PI))
    }
}

/// Inverse transform value with the relative edge magnitude along the
/// contour as a truncation indicator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseValue {
    pub value: Complex64,
    pub truncation: f64,
}

pub fn mellin_inverse(f: &MellinFunction, contour: &MellinContour, sigma: f64) -> Result<InverseValue> {
    Ok(mellin_inverse_many(f, contour, &[sigma])?.remove(0))
}

pub fn mellin_inverse_many(
    f: &MellinFunction,
    contour: &MellinContour,
    sigmas: &[f64],
) -> Result<Vec<InverseValue>> {
    if sigmas.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::Domain("inverse Mellin transform needs σ > 0".into()));
    }
    let samples = f.on_contour(contour)?;
    let truncation = samples.check_decay(CONTOUR_DECAY_TOL)?;
    Ok(sigmas
        .iter()
        .map(|&s| InverseValue {
            value: samples.invert(s),
            truncation,
        })
        .collect())
}

/// `(a • b)(f) = ∫₀^∞ (dσ/σ) a(σ) b(f/σ)` for each `f > 0`.
pub fn scaling_convolution<A, B>(a: A, b: B, freqs: &[f64], quad: &LogQuadrature) -> Result<Vec<MellinValue>>
where
    A: Fn(f64) -> Complex64 + Sync,
    B: Fn(f64) -> Complex64 + Sync,
{
    freqs
        .iter()
        .map(|&f| {
            if !(f > 0.0) {
                return Err(Error::Domain("scaling convolution is defined for f > 0".into()));
            }
            let s = quad.sample(|sigma| a(sigma) * b(f / sigma), 0.0)?;
            Ok(MellinValue {
                value: s.integral(),
                tail_bound: s.tails().max(),
            })
        })
        .collect()
}

/// One branch of `W = Ψ • w`: `W(f) = ∫₀^∞ (dσ/σ) Ψ(σ) w(f/σ)`.
pub fn scaling_convolve<W>(w: W, wavelet: &Wavelet, freqs: &[f64], quad: &LogQuadrature) -> Result<Vec<Complex64>>
where
    W: Fn(f64) -> Complex64 + Sync,
{
    let psi = |s: f64| Complex64::new(wavelet.density(s), 0.0);
    Ok(scaling_convolution(psi, w, freqs, quad)?
        .into_iter()
        .map(|v| v.value)
        .collect())
}

/// Per-point comparison of `M[Ψ • w](p)` against `Ψ̆(p) · w̆(p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductCheckReport {
    pub points: Vec<ProductCheckPoint>,
    pub max_relative_deviation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductCheckPoint {
    pub p: Complex64,
    pub convolved: Complex64,
    pub product: Complex64,
    pub relative_deviation: f64,
}

/// Checks the Mellin product theorem for one branch `w` at `p = c + iu`
/// for each `u` in `imag_parts`. The left side is computed by nested
/// quadrature (scaling convolution, then forward transform); the right side
/// uses the wavelet's Ψ̆ and the supplied `w̆`.
pub fn mellin_product_check<W>(
    w: W,
    w_mellin: &MellinFunction,
    wavelet: &Wavelet,
    c: f64,
    imag_parts: &[f64],
    quad: &LogQuadrature,
) -> Result<ProductCheckReport>
where
    W: Fn(f64) -> Complex64 + Sync,
{
    let inner = *quad;
    let convolved = |f: f64| -> Complex64 {
        let s = inner.sample(|sigma| wavelet.density(sigma) * w(f / sigma), 0.0);
        match s {
            Ok(s) => s.integral(),
            Err(_) => Complex64::new(f64::NAN, f64::NAN),
        }
    };
    let samples = quad.sample(convolved, c)?;
    let mut points = Vec::with_capacity(imag_parts.len());
    for &u in imag_parts {
        let p = Complex64::new(c, u);
        let lhs = samples.mellin(p);
        let rhs = wavelet.mellin(p)? * w_mellin.eval(p)?;
        let dev = if rhs.norm() == 0.0 {
            lhs.norm()
        } else {
            (lhs - rhs).norm() / rhs.norm()
        };
        points.push(ProductCheckPoint {
            p,
            convolved: lhs,
            product: rhs,
            relative_deviation: dev,
        });
    }
    let max_relative_deviation = points
        .iter()
        .map(|p| p.relative_deviation)
        .fold(0.0, f64::max);
    Ok(ProductCheckReport {
        points,
        max_relative_deviation,
    })
}

/// Dumps contour samples as CSV rows `(u, re, im)`.
pub fn contour_csv(samples: &ContourSamples) -> String {
    samples
        .contour
        .nodes()
        .zip(&samples.values)
        .map(|(p, v)| {
            format!(
                "{},{},{}\n",
                crate::io::fmt17(p.im),
                crate::io::fmt17(v.re),
                crate::io::fmt17(v.im)
            )
        })
        .collect()
}

pub(crate) fn pairwise_sum(v: &[Complex64]) -> Complex64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

fn pairwise_sum_f64(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum_f64(&v[..mid]) + pairwise_sum_f64(&v[mid..])
}
