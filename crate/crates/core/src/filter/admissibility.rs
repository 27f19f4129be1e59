//! Itemised admissibility checks for a filter against a wavelet.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::design::{DesignOptions, DifferentialOperatorSpec, PSI_ZERO_FLOOR};
use super::{Branch, FilterForm, FrequencyFilter};
use crate::error::Error;
use crate::mellin::{MellinContour, MellinFunction, Strip, CONTOUR_DECAY_TOL};
use crate::wavelet::Wavelet;

pub enum AdmissibilityTarget<'a> {
    Frequency(&'a FrequencyFilter),
    Differential(&'a DifferentialOperatorSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum ClauseKind {
    /// `Ψ̆(0)` finite and positive.
    WaveletAdmissible,
    /// `0 < Ψ̆(order) < ∞`.
    MomentFinite { order: f64 },
    /// The contour abscissa lies in the common strip of `W̆` and `Ψ̆`.
    ContourInStrip { branch: String },
    /// `Ψ̆` has no zero along the contour.
    NoZerosOnContour { branch: String },
    /// `W̆` converges on the contour.
    BranchConverges { branch: String },
    /// `W̆/Ψ̆` has decayed at the ends of the contour.
    RatioDecays { branch: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    #[serde(flatten)]
    pub kind: ClauseKind,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub target: String,
    pub wavelet: String,
    pub admissible: bool,
    pub clauses: Vec<Clause>,
    /// Detail of the first failing clause.
    pub failure: Option<String>,
}

impl AdmissibilityReport {
    pub fn failing(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter().filter(|c| !c.passed)
    }
}

fn moment_clause(wavelet: &Wavelet, order: f64) -> Clause {
    let kind = ClauseKind::MomentFinite { order };
    match wavelet.moment(order) {
        Ok(v) if v > 0.0 && v.is_finite() => Clause {
            kind,
            passed: true,
            detail: format!("Ψ̆({order}) = {v:e}"),
        },
        Ok(v) => Clause {
            kind,
            passed: false,
            detail: format!("Ψ̆({order}) = {v:e} is not positive"),
        },
        Err(Error::Divergence { end, .. }) => Clause {
            kind,
            passed: false,
            detail: format!("Ψ̆({order}) diverges at the {end} end"),
        },
        Err(e) => Clause {
            kind,
            passed: false,
            detail: format!("Ψ̆({order}) could not be evaluated: {e}"),
        },
    }
}

fn branch_clauses(
    branch: &Branch,
    declared: Option<Strip>,
    name: &str,
    wavelet: &Wavelet,
    opts: &DesignOptions,
    out: &mut Vec<Clause>,
) {
    if branch.is_zero() {
        return;
    }
    let label = name.to_string();
    let strip_w = declared.or_else(|| branch.inferred_strip());
    let Some(strip_w) = strip_w else {
        out.push(Clause {
            kind: ClauseKind::ContourInStrip { branch: label },
            passed: false,
            detail: format!("W{name} has no Mellin strip"),
        });
        return;
    };
    let strip = strip_w.intersect(&wavelet.strip());
    let c = opts.c.or_else(|| strip.default_abscissa());
    let in_strip = c.is_some_and(|c| strip.contains(c));
    out.push(Clause {
        kind: ClauseKind::ContourInStrip { branch: label.clone() },
        passed: in_strip,
        detail: format!(
            "c = {} against common strip ({}, {})",
            c.map_or("none".to_string(), |c| c.to_string()),
            strip.lo,
            strip.hi
        ),
    });
    if !in_strip {
        return;
    }
    let c = c.unwrap();
    let contour = match MellinContour::new(c, opts.u_max, opts.n_points) {
        Ok(k) => k,
        Err(e) => {
            out.push(Clause {
                kind: ClauseKind::ContourInStrip { branch: label },
                passed: false,
                detail: e.to_string(),
            });
            return;
        }
    };
    let psi = match wavelet.mellin_on_contour(&contour) {
        Ok(v) => v,
        Err(e) => {
            out.push(Clause {
                kind: ClauseKind::NoZerosOnContour { branch: label },
                passed: false,
                detail: e.to_string(),
            });
            return;
        }
    };
    let peak = psi.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let floor = psi.values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    let ratio = if peak > 0.0 { floor / peak } else { 0.0 };
    out.push(Clause {
        kind: ClauseKind::NoZerosOnContour { branch: label.clone() },
        passed: ratio >= PSI_ZERO_FLOOR,
        detail: format!("min|Ψ̆|/max|Ψ̆| = {ratio:e} on Re p = {c}"),
    });
    let b = branch.clone();
    let big = MellinFunction::quadrature(move |f| b.eval(f), strip, opts.quadrature).on_contour(&contour);
    let big = match big {
        Ok(v) => {
            out.push(Clause {
                kind: ClauseKind::BranchConverges { branch: label.clone() },
                passed: true,
                detail: format!("W̆{name} converges on Re p = {c}"),
            });
            v
        }
        Err(e) => {
            out.push(Clause {
                kind: ClauseKind::BranchConverges { branch: label },
                passed: false,
                detail: match e {
                    Error::Divergence { end, .. } => {
                        format!("W̆{name} diverges at the {end} end")
                    }
                    other => other.to_string(),
                },
            });
            return;
        }
    };
    if ratio >= PSI_ZERO_FLOOR {
        let q = crate::mellin::ContourSamples {
            contour,
            values: big.values.iter().zip(&psi.values).map(|(a, b)| a / b).collect(),
        };
        let d = q.edge_decay();
        out.push(Clause {
            kind: ClauseKind::RatioDecays { branch: label },
            passed: d <= CONTOUR_DECAY_TOL,
            detail: format!("|W̆/Ψ̆| at u = ±{} is {d:e} of its peak", opts.u_max),
        });
    }
}

/// Runs every applicable check; findings are collected, never raised.
pub fn check_admissibility(
    target: AdmissibilityTarget<'_>,
    wavelet: &Wavelet,
    opts: &DesignOptions,
) -> AdmissibilityReport {
    let mut clauses = Vec::new();
    let wavelet_ok = moment_clause(wavelet, 0.0);
    clauses.push(Clause {
        kind: ClauseKind::WaveletAdmissible,
        ..wavelet_ok
    });
    let target_name = match &target {
        AdmissibilityTarget::Frequency(f) => f.describe(),
        AdmissibilityTarget::Differential(d) => {
            let a: Vec<String> = d.coefficients.iter().map(|c| c.to_string()).collect();
            format!("P(D) with coefficients [{}]", a.join(", "))
        }
    };
    let polynomial = |coefficients: &[Complex64], clauses: &mut Vec<Clause>| {
        for (n, a) in coefficients.iter().enumerate() {
            if a.norm() != 0.0 && n > 0 {
                clauses.push(moment_clause(wavelet, n as f64));
            }
        }
    };
    match target {
        AdmissibilityTarget::Differential(d) => polynomial(&d.coefficients, &mut clauses),
        AdmissibilityTarget::Frequency(f) => match &f.form {
            Some(FilterForm::Identity) | Some(FilterForm::Hilbert) => {}
            Some(FilterForm::Power { p, .. }) => {
                if *p != 0.0 {
                    clauses.push(moment_clause(wavelet, *p));
                }
            }
            Some(FilterForm::Polynomial { coefficients }) => polynomial(coefficients, &mut clauses),
            None => {
                branch_clauses(&f.positive, f.strips.0, "₊", wavelet, opts, &mut clauses);
                branch_clauses(&f.negative, f.strips.1, "₋", wavelet, opts, &mut clauses);
            }
        },
    }
    let failure = clauses.iter().find(|c| !c.passed).map(|c| c.detail.clone());
    AdmissibilityReport {
        target: target_name,
        wavelet: wavelet.to_string(),
        admissible: failure.is_none(),
        clauses,
        failure,
    }
}
