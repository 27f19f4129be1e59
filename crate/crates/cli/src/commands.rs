use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use scalefilt::engine::effective_symbol;
use scalefilt::filter::{
    check_admissibility, derive_scale_filter, hilbert_filter, identity_filter, AdmissibilityTarget,
    DesignOptions, DesignedFilter, DifferentialOperatorSpec, FilterSpec,
};
use scalefilt::generate::{generate_test_signal, TestSignal};
use scalefilt::harness::{compare_paths, denoise_power_law, estimate_spectral_exponent, fit_grid};
use scalefilt::io::{fmt17, load_signal, save_signal};
use scalefilt::mellin::{mellin_inverse_many, LogQuadrature, MellinContour, MellinFunction, Strip};
use scalefilt::scaleogram_io::{save_scaleogram, scaleogram_to_csv};
use scalefilt::wavelet::WaveletSpec;
use scalefilt::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::Failure;

type Outcome = std::result::Result<Value, Failure>;

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serialisable")
}

fn load_input(cfg: &RunConfig) -> std::result::Result<Signal, Failure> {
    let signal = if let Some(path) = &cfg.input {
        log::info!("reading {}", path.display());
        load_signal(path, cfg.format, cfg.sample_rate)
    } else if let Some(g) = &cfg.generate {
        let mut kind = g.signal.clone();
        if let (TestSignal::PowerLawNoise { seed, .. }, Some(s)) = (&mut kind, cfg.seed) {
            *seed = s;
        }
        generate_test_signal(&kind, g.len, g.sample_rate)
    } else {
        Err(Error::Config("no input: pass --input or --generate".into()))
    };
    signal.map_err(Failure::validation)
}

fn wavelet(cfg: &RunConfig) -> std::result::Result<Wavelet, Failure> {
    Wavelet::from_spec(&cfg.wavelet).map_err(Failure::validation)
}

/// Explicit `sigma_min`, or the one placing the peak of the top scale at the
/// Nyquist frequency.
fn grid_spec(cfg: &RunConfig, rate: Option<f64>) -> GridSpec {
    let g = &cfg.grid;
    let sigma_min = g.sigma_min.unwrap_or_else(|| match rate {
        Some(r) => {
            let top = match cfg.wavelet {
                WaveletSpec::Cauchy { alpha } => PI * r / alpha,
                _ => r / 2.0,
            };
            top / 2f64.powi(g.octaves as i32)
        }
        None => 1.0,
    });
    GridSpec::new(sigma_min, g.voices, g.octaves).with_negative_scales(g.include_negative_scales)
}

fn design_options(cfg: &RunConfig) -> DesignOptions {
    DesignOptions {
        c: cfg.contour.c,
        u_max: cfg.contour.u_max,
        n_points: cfg.contour.n_points,
        ..DesignOptions::default()
    }
}

fn synthesis_options(cfg: &RunConfig) -> SynthesisOptions {
    SynthesisOptions {
        real_output: cfg.grid.real_output,
    }
}

fn write_output(path: &Path, contents: &[u8]) -> std::result::Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::validation(e.into()))
}

struct Designed {
    big: FrequencyFilter,
    design: DesignedFilter,
    admissibility: Value,
}

/// Checks admissibility, then designs `w`. An inadmissible pair is a
/// numerical failure carrying the report.
fn design_filter(cfg: &RunConfig, wavelet: &Wavelet, grid: &GridSpec) -> std::result::Result<Designed, Failure> {
    let spec = cfg
        .filter
        .as_ref()
        .ok_or_else(|| Failure::validation(Error::Config("no filter: pass --filter".into())))?;
    let big = spec.frequency_filter().map_err(Failure::validation)?;
    let opts = design_options(cfg);
    let diff: Option<DifferentialOperatorSpec> = match spec {
        FilterSpec::Polynomial { .. } => Some(spec.differential().expect("polynomial").map_err(Failure::validation)?),
        _ => None,
    };
    let target = match &diff {
        Some(d) => AdmissibilityTarget::Differential(d),
        None => AdmissibilityTarget::Frequency(&big),
    };
    let report = check_admissibility(target, wavelet, &opts);
    let admissibility = to_json(&report);
    if !report.admissible {
        let msg = report.failure.clone().unwrap_or_else(|| "filter is not admissible".into());
        return Err(Failure::from(Error::Admissibility(msg)).with_report(admissibility));
    }
    let design = derive_scale_filter(&big, wavelet, &opts, &grid.signed_scales())?;
    Ok(Designed {
        big,
        design,
        admissibility,
    })
}

pub fn transform(cfg: &RunConfig) -> Outcome {
    let signal = load_input(cfg)?;
    let wavelet = wavelet(cfg)?;
    let spec = grid_spec(cfg, Some(signal.sample_rate()));
    let grid = ScaleTimeGrid::for_signal(spec, &signal).map_err(Failure::validation)?;
    let sc = cwt_forward(&signal, &wavelet, &grid)?;
    let mut report = json!({
        "command": "transform",
        "wavelet": wavelet.to_string(),
        "grid": to_json(&spec),
        "n_scales": sc.n_scales(),
        "n_times": grid.n_times,
        "sample_rate": signal.sample_rate(),
        "max_modulus": sc.coefficients().iter().map(|z| z.norm()).fold(0.0, f64::max),
    });
    if let Some(out) = &cfg.output {
        save_scaleogram(&sc, out).map_err(Failure::validation)?;
        let csv = csv_path(out);
        write_output(&csv, scaleogram_to_csv(&sc).as_bytes())?;
        report["csv"] = json!(csv);
    }
    Ok(report)
}

fn csv_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".csv");
    PathBuf::from(s)
}

pub fn design(cfg: &RunConfig) -> Outcome {
    let wavelet = wavelet(cfg)?;
    let grid = grid_spec(cfg, cfg.sample_rate);
    let d = design_filter(cfg, &wavelet, &grid)?;
    let sigmas = grid.signed_scales();
    if let Some(out) = &cfg.output {
        let mut csv = String::from("# sigma,re,im\n");
        for (s, v) in sigmas.iter().zip(d.design.filter.tabulate(&sigmas)) {
            csv.push_str(&format!("{},{},{}\n", fmt17(*s), fmt17(v.re), fmt17(v.im)));
        }
        write_output(out, csv.as_bytes())?;
    }
    Ok(json!({
        "command": "design",
        "filter": d.big.describe(),
        "scale_filter": d.design.filter.describe(),
        "wavelet": wavelet.to_string(),
        "grid": to_json(&grid),
        "method": to_json(&d.design.method),
        "positive": to_json(&d.design.positive),
        "negative": to_json(&d.design.negative),
        "residual": d.design.residual,
        "admissibility": d.admissibility,
    }))
}

pub fn apply(cfg: &RunConfig) -> Outcome {
    let signal = load_input(cfg)?;
    let wavelet = wavelet(cfg)?;
    let spec = grid_spec(cfg, Some(signal.sample_rate()));
    let d = design_filter(cfg, &wavelet, &spec)?;
    let grid = ScaleTimeGrid::for_signal(spec, &signal).map_err(Failure::validation)?;
    let opts = synthesis_options(cfg);
    let sc = cwt_forward(&signal, &wavelet, &grid)?;
    let synth = apply_scale_filter(&sc, &d.design.filter, &wavelet, &opts)?;
    if let Some(out) = &cfg.output {
        save_signal(&synth.output, out, cfg.format).map_err(Failure::validation)?;
    }
    let mut report = json!({
        "command": "apply",
        "filter": d.big.describe(),
        "wavelet": wavelet.to_string(),
        "grid": to_json(&spec),
        "projection": to_json(&synth.projection),
        "n_samples": synth.output.len(),
    });
    if cfg.compare {
        let mut cmp = compare_paths(&signal, &d.design.filter, &d.big, &wavelet, &spec, &opts)?;
        if !cfg.timings {
            cmp.runtime = None;
        }
        report["comparison"] = to_json(&cmp);
    }
    Ok(report)
}

pub fn denoise(cfg: &RunConfig) -> Outcome {
    let signal = load_input(cfg)?;
    let wavelet = wavelet(cfg)?;
    let spec = grid_spec(cfg, Some(signal.sample_rate()));
    let pn = cfg.denoise.noise_exponent.unwrap_or(f64::NEG_INFINITY);
    let res = denoise_power_law(
        &signal,
        cfg.denoise.signal_exponent,
        pn,
        &wavelet,
        &spec,
        &synthesis_options(cfg),
    )?;
    if let Some(out) = &cfg.output {
        save_signal(&res.output, out, cfg.format).map_err(Failure::validation)?;
    }
    let mut report = json!({
        "command": "denoise",
        "wavelet": wavelet.to_string(),
        "grid": to_json(&spec),
        "fit": to_json(&res.fit),
    });
    if let Some(band) = cfg.denoise.band {
        let grid = ScaleTimeGrid::for_signal(spec, &signal).map_err(Failure::validation)?;
        let sc = cwt_forward(&signal, &wavelet, &grid)?;
        report["exponent"] = to_json(&estimate_spectral_exponent(&sc, band)?);
    }
    Ok(report)
}

pub fn admissibility(cfg: &RunConfig) -> Outcome {
    let wavelet = wavelet(cfg)?;
    let grid = grid_spec(cfg, cfg.sample_rate);
    let d = design_filter(cfg, &wavelet, &grid)?;
    Ok(json!({
        "command": "admissibility",
        "report": d.admissibility,
    }))
}

struct Check {
    name: &'static str,
    value: f64,
    limit: f64,
}

fn band_chirp() -> Result<Signal> {
    generate_test_signal(
        &TestSignal::Chirp {
            f_start: 40.0,
            f_end: 200.0,
            band_limit: Some((32.0, 256.0)),
        },
        4096,
        4096.0,
    )
}

fn selftest_checks() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let opts = SynthesisOptions::default();
    let x = band_chirp()?;

    let c1 = Wavelet::cauchy(1.0)?;
    let (w, big) = identity_filter(&c1);
    let (g, _) = fit_grid(&c1, &w, &big, (32.0, 256.0), 16, 10, false)?;
    checks.push(Check {
        name: "reconstruction",
        value: compare_paths(&x, &w, &big, &c1, &g, &opts)?.relative_l2_error,
        limit: 1e-2,
    });

    let c2 = Wavelet::cauchy(2.0)?;
    let (w, big) = hilbert_filter(&c2)?;
    let (g, _) = fit_grid(&c2, &w, &big, (32.0, 256.0), 16, 12, false)?;
    let rep = compare_paths(&x, &w, &big, &c2, &g, &opts)?;
    checks.push(Check {
        name: "hilbert_paths",
        value: rep.relative_l2_error,
        limit: 1e-2,
    });
    checks.push(Check {
        name: "effective_symbol_agreement",
        value: rep.effective_path_agreement,
        limit: 1e-10,
    });

    let half = FrequencyFilter::power(Complex64::new(1.0, 0.0), 0.5);
    let sigmas: Vec<f64> = (0..=32).map(|k| 2f64.powf(-4.0 + k as f64 / 4.0)).collect();
    let d = derive_scale_filter(&half, &c2, &DesignOptions::default(), &sigmas)?;
    checks.push(Check {
        name: "power_round_trip",
        value: d.residual.unwrap_or(f64::INFINITY),
        limit: 1e-3,
    });

    let lg = |s: f64| (-(s.ln()).powi(2)).exp();
    let f = MellinFunction::quadrature(
        move |s| Complex64::new(lg(s), 0.0),
        Strip::WHOLE_PLANE,
        LogQuadrature::default(),
    );
    let contour = MellinContour::new(0.0, 40.0, 4097)?;
    let sig: Vec<f64> = (0..=24).map(|k| 2f64.powf(-3.0 + k as f64 / 4.0)).collect();
    let worst = mellin_inverse_many(&f, &contour, &sig)?
        .iter()
        .zip(&sig)
        .map(|(v, s)| (v.value - lg(*s)).norm() / lg(*s))
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "mellin_round_trip",
        value: worst,
        limit: 1e-6,
    });

    // an admissible pair must have a finite third moment
    let d3 = DifferentialOperatorSpec::from_real(&[0.0, 0.0, 0.0, 1.0])?;
    let rejected = !check_admissibility(AdmissibilityTarget::Differential(&d3), &c1, &DesignOptions::default()).admissible;
    let accepted =
        check_admissibility(AdmissibilityTarget::Differential(&d3), &Wavelet::cauchy(4.0)?, &DesignOptions::default())
            .admissible;
    checks.push(Check {
        name: "admissibility",
        value: if rejected && accepted { 0.0 } else { 1.0 },
        limit: 0.5,
    });

    // W_eff of the identity pair is flat inside the covered band
    let (w, _) = identity_filter(&c2);
    let g = GridSpec::new(1.0, 16, 20);
    let freqs: Vec<f64> = (0..=16).map(|k| 2f64.powf(4.0 + k as f64 / 4.0)).collect();
    let flat = effective_symbol(&g, &w, &c2, &freqs)
        .iter()
        .map(|v| (v - Complex64::new(1.0, 0.0)).norm())
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "identity_symbol",
        value: flat,
        limit: 1e-2,
    });
    Ok(checks)
}

pub fn selftest(_cfg: &RunConfig) -> Outcome {
    let checks = selftest_checks()?;
    let passed = checks.iter().all(|c| c.value < c.limit);
    let list: Vec<Value> = checks
        .iter()
        .map(|c| json!({"name": c.name, "value": c.value, "limit": c.limit, "passed": c.value < c.limit}))
        .collect();
    let report = json!({"command": "selftest", "passed": passed, "checks": list});
    if passed {
        Ok(report)
    } else {
        let failed: Vec<&str> = checks.iter().filter(|c| c.value >= c.limit).map(|c| c.name).collect();
        Err(Failure {
            error: Error::NonFinite(format!("selftest checks failed: {}", failed.join(", "))),
            exit: 3,
            report: Some(report),
        })
    }
}
