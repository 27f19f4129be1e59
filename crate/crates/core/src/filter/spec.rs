//! JSON filter descriptions.
//!
//! ```json
//! {"type": "power", "p": 0.5}
//! {"type": "polynomial", "coefficients": [1.0, 0.0, [0.0, 1.0]]}
//! {"type": "hilbert"}
//! {"type": "identity"}
//! {"type": "sampled", "path": "w.csv"}
//! ```
//!
//! Polynomial coefficients are `aₙ` of `Σ aₙ(2πif)ⁿ`, each a number or a
//! `[re, im]` pair. Power filters are `coef·|f|^p` (`coef` defaults to 1).
//! Sampled filters are CSV rows `f, re, im` over both signs of `f`.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::design::{split_signs, DifferentialOperatorSpec};
use super::FrequencyFilter;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Coefficient> for Complex64 {
    fn from(c: Coefficient) -> Self {
        match c {
            Coefficient::Real(r) => Complex64::new(r, 0.0),
            Coefficient::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FilterSpec {
    Power {
        p: f64,
        #[serde(default)]
        coef: Option<Coefficient>,
    },
    Polynomial {
        coefficients: Vec<Coefficient>,
    },
    Hilbert,
    Identity,
    Sampled {
        path: PathBuf,
    },
}

impl FilterSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid filter spec: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut spec = Self::from_json(&text)?;
        if let FilterSpec::Sampled { path: p } = &mut spec {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(spec)
    }

    /// The polynomial as an operator spec, if this is one.
    pub fn differential(&self) -> Option<Result<DifferentialOperatorSpec>> {
        match self {
            FilterSpec::Polynomial { coefficients } => Some(DifferentialOperatorSpec::new(
                coefficients.iter().map(|&c| c.into()).collect(),
            )),
            _ => None,
        }
    }

    pub fn frequency_filter(&self) -> Result<FrequencyFilter> {
        match self {
            FilterSpec::Power { p, coef } => {
                if !p.is_finite() {
                    return Err(Error::Parameter("power exponent must be finite".into()));
                }
                let c = coef.map(Complex64::from).unwrap_or(Complex64::new(1.0, 0.0));
                Ok(FrequencyFilter::power(c, *p))
            }
            FilterSpec::Polynomial { .. } => {
                let d = self.differential().expect("polynomial")?;
                Ok(FrequencyFilter::polynomial(&d.coefficients))
            }
            FilterSpec::Hilbert => Ok(FrequencyFilter::hilbert()),
            FilterSpec::Identity => Ok(FrequencyFilter::identity()),
            FilterSpec::Sampled { path } => {
                let (f, v) = load_sampled_filter_csv(path)?;
                split_signs(&f, &v)
            }
        }
    }
}

/// Reads `f, re, im` rows; `#` lines are comments.
pub fn load_sampled_filter_csv(path: &Path) -> Result<(Vec<f64>, Vec<Complex64>)> {
    parse_sampled_filter(&fs::read_to_string(path)?)
}

pub(crate) fn parse_sampled_filter(text: &str) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let mut f = Vec::new();
    let mut v = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected 3 columns (f, re, im), found {}", cols.len()),
            });
        }
        let num = |s: &str| {
            s.parse::<f64>().map_err(|e| Error::Parse {
                line: i + 1,
                message: format!("'{s}': {e}"),
            })
        };
        f.push(num(cols[0])?);
        v.push(Complex64::new(num(cols[1])?, num(cols[2])?));
    }
    if f.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "filter file contains no samples".into(),
        });
    }
    Ok((f, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_type() {
        assert_eq!(
            FilterSpec::from_json(r#"{"type":"power","p":0.5}"#).unwrap(),
            FilterSpec::Power { p: 0.5, coef: None }
        );
        let s = FilterSpec::from_json(r#"{"type":"polynomial","coefficients":[1,0,[0,1]]}"#).unwrap();
        let d = s.differential().unwrap().unwrap();
        assert_eq!(d.coefficients[2], Complex64::new(0.0, 1.0));
        assert_eq!(FilterSpec::from_json(r#"{"type":"hilbert"}"#).unwrap(), FilterSpec::Hilbert);
        assert!(FilterSpec::from_json(r#"{"type":"bogus"}"#).is_err());
    }

    #[test]
    fn sampled_rows() {
        let (f, v) = parse_sampled_filter("# f,re,im\n-1,0,1\n1,0,-1\n").unwrap();
        assert_eq!(f, vec![-1.0, 1.0]);
        assert_eq!(v[1], Complex64::new(0.0, -1.0));
        assert!(matches!(parse_sampled_filter("1,2\n"), Err(Error::Parse { line: 1, .. })));
    }
}
