//! Frequency-domain filters `W(f)` and their scale-domain counterparts
//! `w(σ)`, both carried as a pair of branches on the positive half-line:
//! `W(f) = W₊(f) + W₋(−f)` and `w(σ) = w₊(σ) + w₋(−σ)`.

mod admissibility;
mod design;
mod spec;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::LogTable;
use crate::mellin::Strip;

pub use admissibility::{check_admissibility, AdmissibilityReport, AdmissibilityTarget, Clause, ClauseKind};
pub use design::{
    derive_scale_filter, differential_filter, hilbert_filter, identity_filter, power_filter,
    split_signs, BranchDesign, DesignMethod, DesignOptions, DesignedFilter, DifferentialOperatorSpec,
};
pub use spec::{load_sampled_filter_csv, Coefficient, FilterSpec};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

type CustomFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// A function on `x > 0`.
#[derive(Clone)]
pub enum Branch {
    Zero,
    Constant(Complex64),
    /// `coef · x^exponent`
    Power { coef: Complex64, exponent: f64 },
    /// `Σ c_n xⁿ`
    Polynomial(Vec<Complex64>),
    Table(Arc<LogTable>),
    Custom(CustomFn),
}

impl fmt::Debug for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::Zero => f.write_str("Zero"),
            Branch::Constant(c) => write!(f, "Constant({c})"),
            Branch::Power { coef, exponent } => write!(f, "Power({coef}·x^{exponent})"),
            Branch::Polynomial(c) => write!(f, "Polynomial({c:?})"),
            Branch::Table(t) => write!(f, "Table{:?}", t.range()),
            Branch::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl Branch {
    pub fn custom<F: Fn(f64) -> Complex64 + Send + Sync + 'static>(f: F) -> Self {
        Branch::Custom(Arc::new(f))
    }

    pub fn table(x: &[f64], values: &[Complex64]) -> Result<Self> {
        Ok(Branch::Table(Arc::new(LogTable::new(x, values)?)))
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        match self {
            Branch::Zero => ZERO,
            Branch::Constant(c) => *c,
            Branch::Power { coef, exponent } => {
                if *exponent == 0.0 {
                    *coef
                } else {
                    coef * x.powf(*exponent)
                }
            }
            Branch::Polynomial(c) => c.iter().rev().fold(ZERO, |acc, &a| acc * x + a),
            Branch::Table(t) => t.eval(x),
            Branch::Custom(f) => f(x),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Branch::Zero => true,
            Branch::Constant(c) => *c == ZERO,
            Branch::Power { coef, .. } => *coef == ZERO,
            Branch::Polynomial(c) => c.iter().all(|&a| a == ZERO),
            _ => false,
        }
    }

    /// Strip of absolute convergence of the branch's Mellin transform as
    /// far as it can be read off the representation. Powers, constants and
    /// polynomials have none; tables use their edge exponents.
    pub fn inferred_strip(&self) -> Option<Strip> {
        match self {
            Branch::Table(t) => {
                let (b0, binf) = t.edge_exponents();
                Some(Strip::new(binf, b0))
            }
            Branch::Zero => Some(Strip::WHOLE_PLANE),
            _ => None,
        }
    }
}

/// Symbolic description of the shipped filter families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FilterForm {
    Identity,
    /// `coef · |f|^p`
    Power { coef: Complex64, p: f64 },
    /// `Σ aₙ (2πif)ⁿ`
    Polynomial { coefficients: Vec<Complex64> },
    /// `−i·sgn(f)`
    Hilbert,
}

impl fmt::Display for FilterForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterForm::Identity => f.write_str("identity"),
            FilterForm::Power { coef, p } => write!(f, "power(coef={coef}, p={p})"),
            FilterForm::Polynomial { coefficients } => write!(f, "polynomial{coefficients:?}"),
            FilterForm::Hilbert => f.write_str("hilbert"),
        }
    }
}

/// Frequency-domain system function `W(f)`.
#[derive(Debug, Clone)]
pub struct FrequencyFilter {
    pub positive: Branch,
    pub negative: Branch,
    pub form: Option<FilterForm>,
    /// Gain applied to the `f = 0` bin.
    pub dc_gain: Complex64,
    /// Declared Mellin strips of `(W₊, W₋)`; `None` when the branch is a
    /// pure power or has not been characterised.
    pub strips: (Option<Strip>, Option<Strip>),
}

impl FrequencyFilter {
    pub fn new(positive: Branch, negative: Branch, dc_gain: Complex64) -> Self {
        let strips = (positive.inferred_strip(), negative.inferred_strip());
        Self {
            positive,
            negative,
            form: None,
            dc_gain,
            strips,
        }
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        Self {
            positive: Branch::Constant(one),
            negative: Branch::Constant(one),
            form: Some(FilterForm::Identity),
            dc_gain: one,
            strips: (None, None),
        }
    }

    /// `coef · |f|^p`.
    pub fn power(coef: Complex64, p: f64) -> Self {
        let b = Branch::Power { coef, exponent: p };
        Self {
            positive: b.clone(),
            negative: b,
            form: Some(FilterForm::Power { coef, p }),
            dc_gain: if p == 0.0 { coef } else { ZERO },
            strips: (None, None),
        }
    }

    /// `Σ aₙ (2πif)ⁿ`.
    pub fn polynomial(coefficients: &[Complex64]) -> Self {
        let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        let mut pos = Vec::with_capacity(coefficients.len());
        let mut neg = Vec::with_capacity(coefficients.len());
        let mut k = Complex64::new(1.0, 0.0);
        for (n, &a) in coefficients.iter().enumerate() {
            pos.push(a * k);
            neg.push(if n % 2 == 0 { a * k } else { -a * k });
            k *= two_pi_i;
        }
        Self {
            positive: Branch::Polynomial(pos),
            negative: Branch::Polynomial(neg),
            form: Some(FilterForm::Polynomial {
                coefficients: coefficients.to_vec(),
            }),
            dc_gain: coefficients.first().copied().unwrap_or(ZERO),
            strips: (None, None),
        }
    }

    /// `−i·sgn(f)`.
    pub fn hilbert() -> Self {
        Self {
            positive: Branch::Constant(Complex64::new(0.0, -1.0)),
            negative: Branch::Constant(Complex64::new(0.0, 1.0)),
            form: Some(FilterForm::Hilbert),
            dc_gain: ZERO,
            strips: (None, None),
        }
    }

    pub fn zero() -> Self {
        Self::new(Branch::Zero, Branch::Zero, ZERO)
    }

    /// `W(f)`; the `f = 0` value is the DC gain.
    pub fn eval(&self, f: f64) -> Complex64 {
        if f > 0.0 {
            self.positive.eval(f)
        } else if f < 0.0 {
            self.negative.eval(-f)
        } else {
            self.dc_gain
        }
    }

    pub fn is_zero(&self) -> bool {
        self.positive.is_zero() && self.negative.is_zero() && self.dc_gain == ZERO
    }

    pub fn describe(&self) -> String {
        match &self.form {
            Some(f) => f.to_string(),
            None => format!("sampled(+: {:?}, −: {:?})", self.positive, self.negative),
        }
    }
}

/// Scale-domain multiplier `w(σ)`.
#[derive(Debug, Clone)]
pub struct ScaleFilter {
    pub positive: Branch,
    pub negative: Branch,
    pub form: Option<FilterForm>,
    /// Gain the synthesis applies to the input's `f = 0` bin, which the
    /// wavelet sum cannot represent.
    pub dc_gain: Complex64,
    /// `|σ|` range on which the branches are valid, if limited.
    pub band: Option<(f64, f64)>,
}

impl ScaleFilter {
    pub fn new(positive: Branch, negative: Branch, dc_gain: Complex64) -> Self {
        Self {
            positive,
            negative,
            form: None,
            dc_gain,
            band: None,
        }
    }

    pub fn zero() -> Self {
        Self::new(Branch::Zero, Branch::Zero, ZERO)
    }

    /// A filter given by its values at the given positive scales, used for
    /// both signs.
    pub fn from_scale_values(scales: &[f64], values: &[Complex64], dc_gain: Complex64) -> Result<Self> {
        let b = Branch::table(scales, values)?;
        let mut f = Self::new(b.clone(), b, dc_gain);
        f.band = Some((scales[0], scales[scales.len() - 1]));
        Ok(f)
    }

    /// `w(σ)`, reading `σ < 0` from the negative branch.
    pub fn eval(&self, sigma: f64) -> Complex64 {
        if sigma > 0.0 {
            self.positive.eval(sigma)
        } else if sigma < 0.0 {
            self.negative.eval(-sigma)
        } else {
            ZERO
        }
    }

    /// Samples at the given signed scales.
    pub fn tabulate(&self, sigmas: &[f64]) -> Vec<Complex64> {
        sigmas.iter().map(|&s| self.eval(s)).collect()
    }

    pub fn scaled(&self, k: Complex64) -> ScaleFilter {
        let scale = |b: &Branch| match b {
            Branch::Zero => Branch::Zero,
            Branch::Constant(c) => Branch::Constant(c * k),
            Branch::Power { coef, exponent } => Branch::Power {
                coef: coef * k,
                exponent: *exponent,
            },
            Branch::Polynomial(c) => Branch::Polynomial(c.iter().map(|a| a * k).collect()),
            other => {
                let inner = other.clone();
                Branch::custom(move |x| inner.eval(x) * k)
            }
        };
        ScaleFilter {
            positive: scale(&self.positive),
            negative: scale(&self.negative),
            form: None,
            dc_gain: self.dc_gain * k,
            band: self.band,
        }
    }

    /// Checks that every `|σ|` lies inside the filter's band.
    pub fn check_band(&self, sigmas: &[f64]) -> Result<()> {
        if let Some((lo, hi)) = self.band {
            let tol = 1e-9;
            for &s in sigmas {
                let a = s.abs();
                if a < lo * (1.0 - tol) || a > hi * (1.0 + tol) {
                    return Err(Error::GridMismatch(format!(
                        "scale {s} lies outside the filter's band [{lo}, {hi}]"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        match &self.form {
            Some(f) => f.to_string(),
            None => format!("w(+: {:?}, −: {:?})", self.positive, self.negative),
        }
    }
}
