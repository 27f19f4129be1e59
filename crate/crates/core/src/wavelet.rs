//! Analytic wavelets described by their spectral function `ψ̂(f)`, supported
//! on `f > 0`, with spectral density `Ψ(f) = |ψ̂(f)|²` and its Mellin
//! transform `Ψ̆(p)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, TailEnd};
use crate::interp::LogTable;
use crate::mellin::{ContourSamples, LogQuadrature, MellinContour, MellinFunction, Strip};
use crate::special::gamma;

/// Closed form and quadrature must agree this closely at registration.
const CLOSED_FORM_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
enum Family {
    Cauchy { alpha: f64 },
    Sampled { table: Arc<LogTable> },
}

/// Serializable description of a wavelet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WaveletSpec {
    Cauchy { alpha: f64 },
    Sampled { samples: usize, range: (f64, f64) },
}

impl FromStr for WaveletSpec {
    type Err = Error;

    /// Parses `cauchy:ALPHA`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = s.split_once(':').unwrap_or((s, "1"));
        match name.trim().to_ascii_lowercase().as_str() {
            "cauchy" => {
                let alpha: f64 = arg
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad Cauchy order '{arg}'")))?;
                Ok(WaveletSpec::Cauchy { alpha })
            }
            other => Err(Error::Config(format!("unknown wavelet family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Wavelet {
    family: Family,
    strip: Strip,
    psi0: f64,
    quad: LogQuadrature,
}

impl fmt::Display for Wavelet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Cauchy { alpha } => write!(f, "cauchy({alpha})"),
            Family::Sampled { table } => {
                let (lo, hi) = table.range();
                write!(f, "sampled[{lo:e}, {hi:e}]")
            }
        }
    }
}

impl Wavelet {
    /// Cauchy wavelet `ψ̂(f) = f^α e^{−2πf}` for `f > 0`.
    pub fn cauchy(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Parameter(format!("Cauchy order must be positive, got {alpha}")));
        }
        let w = Wavelet {
            family: Family::Cauchy { alpha },
            strip: Strip::new(f64::NEG_INFINITY, 2.0 * alpha),
            psi0: 0.0,
            quad: LogQuadrature::default(),
        };
        w.register()
    }

    /// Wavelet interpolated from samples of `ψ̂`. Entries at `f ≤ 0` must be
    /// zero; the positive part is interpolated in `ln f` and extended by
    /// power laws.
    pub fn sampled(frequencies: &[f64], values: &[Complex64]) -> Result<Self> {
        if frequencies.len() != values.len() {
            return Err(Error::Parameter("frequencies and values differ in length".into()));
        }
        let mut fs = Vec::new();
        let mut vs = Vec::new();
        for (&f, &v) in frequencies.iter().zip(values) {
            if !f.is_finite() || !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::Parameter("wavelet samples must be finite".into()));
            }
            if f <= 0.0 {
                if v.norm() != 0.0 {
                    return Err(Error::Admissibility(format!(
                        "ψ̂ must vanish for f ≤ 0, but ψ̂({f}) = {v}"
                    )));
                }
            } else {
                fs.push(f);
                vs.push(v);
            }
        }
        let table = LogTable::new(&fs, &vs)?;
        let (b0, binf) = table.edge_exponents();
        let w = Wavelet {
            family: Family::Sampled {
                table: Arc::new(table),
            },
            strip: Strip::new(2.0 * binf, 2.0 * b0),
            psi0: 0.0,
            quad: LogQuadrature::default(),
        };
        w.register()
    }

    pub fn from_spec(spec: &WaveletSpec) -> Result<Self> {
        match spec {
            WaveletSpec::Cauchy { alpha } => Self::cauchy(*alpha),
            WaveletSpec::Sampled { .. } => Err(Error::Config(
                "sampled wavelets are built from their samples".into(),
            )),
        }
    }

    pub fn spec(&self) -> WaveletSpec {
        match &self.family {
            Family::Cauchy { alpha } => WaveletSpec::Cauchy { alpha: *alpha },
            Family::Sampled { table } => WaveletSpec::Sampled {
                samples: 0,
                range: table.range(),
            },
        }
    }

    fn register(mut self) -> Result<Self> {
        for f in [-10.0, -1.0, -1e-3, 0.0] {
            if self.spectral(f).norm() != 0.0 {
                return Err(Error::Admissibility(format!("ψ̂({f}) is nonzero")));
            }
        }
        if !self.strip.contains(0.0) {
            return Err(Error::Admissibility(format!(
                "Ψ̆(0) diverges: its strip of convergence ({}, {}) excludes 0",
                self.strip.lo, self.strip.hi
            )));
        }
        let psi0 = match self.mellin_numeric(Complex64::new(0.0, 0.0)) {
            Ok(v) => v.re,
            Err(Error::Divergence { end, detail }) => {
                return Err(Error::Admissibility(format!(
                    "Ψ̆(0) diverges at the {end} end ({detail})"
                )))
            }
            Err(e) => return Err(e),
        };
        if !(psi0 > 0.0 && psi0.is_finite()) {
            return Err(Error::Admissibility(format!("Ψ̆(0) = {psi0} is not finite and positive")));
        }
        self.psi0 = psi0;
        if let Family::Cauchy { alpha } = self.family {
            let two_a = 2.0 * alpha;
            for k in 0..5 {
                let p = Complex64::new(two_a - 0.5 - 0.75 * k as f64, 0.5 * k as f64);
                let closed = self.mellin_closed_form(p).expect("Cauchy has a closed form");
                let numeric = self.mellin_numeric(p)?;
                let dev = (closed - numeric).norm() / closed.norm();
                if !(dev <= CLOSED_FORM_TOL) {
                    return Err(Error::Admissibility(format!(
                        "closed-form Ψ̆({p}) disagrees with quadrature by {dev:.2e}"
                    )));
                }
            }
            self.psi0 = self.mellin_closed_form(Complex64::new(0.0, 0.0)).unwrap().re;
        }
        Ok(self)
    }

    /// `ψ̂(f)`, zero for `f ≤ 0`.
    pub fn spectral(&self, f: f64) -> Complex64 {
        if !(f > 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        match &self.family {
            Family::Cauchy { alpha } => Complex64::new((alpha * f.ln() - 2.0 * PI * f).exp(), 0.0),
            Family::Sampled { table } => table.eval(f),
        }
    }

    /// `Ψ(f) = |ψ̂(f)|²`.
    pub fn density(&self, f: f64) -> f64 {
        if !(f > 0.0) {
            return 0.0;
        }
        match &self.family {
            Family::Cauchy { alpha } => (2.0 * alpha * f.ln() - 4.0 * PI * f).exp(),
            Family::Sampled { table } => table.eval(f).norm_sqr(),
        }
    }

    /// Strip of absolute convergence of `Ψ̆`.
    pub fn strip(&self) -> Strip {
        self.strip
    }

    /// `Ψ̆(0)`, the admissibility constant.
    pub fn admissibility_constant(&self) -> f64 {
        self.psi0
    }

    pub fn has_closed_form(&self) -> bool {
        matches!(self.family, Family::Cauchy { .. })
    }

    /// `(4π)^{p−2α} Γ(2α−p)` for Cauchy wavelets.
    pub fn mellin_closed_form(&self, p: Complex64) -> Option<Complex64> {
        match self.family {
            Family::Cauchy { alpha } => {
                let z = Complex64::new(2.0 * alpha, 0.0) - p;
                Some(((p - 2.0 * alpha) * (4.0 * PI).ln()).exp() * gamma(z))
            }
            Family::Sampled { .. } => None,
        }
    }

    /// `Ψ̆(p)` by log-grid quadrature of `Ψ`.
    pub fn mellin_numeric(&self, p: Complex64) -> Result<Complex64> {
        let samples = self.quad.sample(|s| Complex64::new(self.density(s), 0.0), p.re)?;
        Ok(samples.mellin(p))
    }

    /// `Ψ̆(p)`, from the closed form inside its strip and by quadrature
    /// otherwise. Outside the strip the integral diverges.
    pub fn mellin(&self, p: Complex64) -> Result<Complex64> {
        if !self.strip.contains(p.re) {
            let end = if p.re >= self.strip.hi {
                TailEnd::Lower
            } else {
                TailEnd::Upper
            };
            return Err(Error::Divergence {
                end,
                detail: format!(
                    "Ψ̆({p}) lies outside the strip ({}, {})",
                    self.strip.lo, self.strip.hi
                ),
            });
        }
        match self.mellin_closed_form(p) {
            Some(v) => Ok(v),
            None => self.mellin_numeric(p),
        }
    }

    /// Real moment `Ψ̆(n)` computed by quadrature regardless of closed form,
    /// so a divergent moment is detected from the integrand itself.
    pub fn moment(&self, order: f64) -> Result<f64> {
        Ok(self.mellin_numeric(Complex64::new(order, 0.0))?.re)
    }

    pub fn mellin_function(&self) -> MellinFunction {
        match self.family {
            Family::Cauchy { .. } => {
                let me = self.clone();
                MellinFunction::closed_form(move |p| me.mellin_closed_form(p).unwrap(), self.strip)
            }
            Family::Sampled { .. } => {
                let me = self.clone();
                MellinFunction::quadrature(
                    move |s| Complex64::new(me.density(s), 0.0),
                    self.strip,
                    self.quad,
                )
            }
        }
    }

    pub fn mellin_on_contour(&self, contour: &MellinContour) -> Result<ContourSamples> {
        self.mellin_function().on_contour(contour)
    }

    /// Frequency range outside which `Ψ` falls below `rel · max Ψ`, found by
    /// scanning a log grid.
    pub fn effective_support(&self, rel: f64) -> (f64, f64) {
        let xs: Vec<f64> = (-40 * 16..=40 * 16).map(|k| 2f64.powf(k as f64 / 16.0)).collect();
        let vals: Vec<f64> = xs.iter().map(|&x| self.density(x)).collect();
        let peak = vals.iter().cloned().fold(0.0, f64::max);
        let lo = xs.iter().zip(&vals).find(|(_, &v)| v >= rel * peak).map(|(x, _)| *x);
        let hi = xs.iter().zip(&vals).rev().find(|(_, &v)| v >= rel * peak).map(|(x, _)| *x);
        (lo.unwrap_or(xs[0]), hi.unwrap_or(xs[xs.len() - 1]))
    }
}
