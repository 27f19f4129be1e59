use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use scalefilt::generate::{generate_test_signal, TestSignal};
use scalefilt::io::{load_signal, save_signal, SignalFormat};
use scalefilt::scaleogram_io::load_scaleogram;
use scalefilt::special::gamma;
use scalefilt::*;
use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scalefilt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("JSON on stderr")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Cauchy(α) Mellin transform of the spectral density.
fn psi_mellin(alpha: f64, s: f64) -> f64 {
    (4.0 * PI).powf(s - 2.0 * alpha) * gamma(Complex64::new(2.0 * alpha - s, 0.0)).re
}

fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn write_chirp(dir: &TempDir) -> (std::path::PathBuf, Signal) {
    let x = generate_test_signal(
        &TestSignal::Chirp {
            f_start: 40.0,
            f_end: 200.0,
            band_limit: Some((32.0, 256.0)),
        },
        4096,
        4096.0,
    )
    .unwrap();
    let path = dir.path().join("chirp.csv");
    save_signal(&x, &path, SignalFormat::Csv).unwrap();
    (path, x)
}

#[test]
fn transform_impulse_profile() {
    let dir = TempDir::new().unwrap();
    let (n, rate) = (256usize, 256.0);
    let input = dir.path().join("impulse.csv");
    let mut text = String::from("1\n");
    text.push_str(&"0\n".repeat(n - 1));
    fs::write(&input, text).unwrap();
    let out = dir.path().join("sc.bin");
    let rep = stdout_json(&run(&[
        "transform",
        "--input",
        p(&input),
        "--rate",
        "256",
        "--wavelet",
        "cauchy:2",
        "--sigma-min",
        "4",
        "--voices",
        "4",
        "--octaves",
        "5",
        "--output",
        p(&out),
    ]));
    assert_eq!(rep["n_scales"], 20);
    assert!(dir.path().join("sc.bin.csv").is_file());

    // x̂ = Δt on every bin, so x̃(σ, 0) = Δt·Σ_k ψ̂(f_k/σ) Δf / σ
    let sc = load_scaleogram(&out).unwrap();
    let df = rate / n as f64;
    for (j, sigma) in sc.grid().scales().iter().enumerate() {
        let oracle: f64 = (1..n / 2)
            .map(|k| {
                let u = k as f64 * df / sigma;
                u * u * (-2.0 * PI * u).exp()
            })
            .sum::<f64>()
            * df
            / rate
            / sigma;
        let v = sc.row(j)[0];
        assert!((v.re - oracle).abs() < 1e-12 * oracle && v.im.abs() < 1e-12 * oracle, "σ={sigma}");
    }
}

#[test]
fn transform_empty_input_is_validation_error() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("empty.csv");
    fs::write(&input, "").unwrap();
    let out = run(&["transform", "--input", p(&input), "--rate", "8"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert_eq!(err["code"], 2);
    assert!(err["reason"].is_string());
    assert!(!err["message"].as_str().unwrap().is_empty());
}

#[test]
fn transform_zero_signal() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("zero.csv");
    fs::write(&input, "0\n".repeat(128)).unwrap();
    let out = dir.path().join("zero.bin");
    stdout_json(&run(&["transform", "--input", p(&input), "--rate", "128", "--output", p(&out)]));
    let sc = load_scaleogram(&out).unwrap();
    assert!(sc.coefficients().iter().all(|z| *z == Complex64::new(0.0, 0.0)));
}

fn read_design_csv(path: &Path) -> Vec<(f64, Complex64)> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
            (v[0], Complex64::new(v[1], v[2]))
        })
        .collect()
}

#[test]
fn design_half_power() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("w.csv");
    let rep = stdout_json(&run(&[
        "design",
        "--filter",
        "power:0.5",
        "--wavelet",
        "cauchy:2",
        "--sigma-min",
        "0.5",
        "--voices",
        "4",
        "--octaves",
        "6",
        "--output",
        p(&out),
    ]));
    assert_eq!(rep["admissibility"]["admissible"], true);
    let rows = read_design_csv(&out);
    assert_eq!(rows.len(), 24);
    let m = psi_mellin(2.0, 0.5);
    for (s, v) in rows {
        let expect = s.sqrt() / m;
        assert!((v.re - expect).abs() < 1e-3 * expect && v.im.abs() < 1e-3 * expect);
    }
}

#[test]
fn design_cubic_on_cauchy1_is_numerical_failure() {
    let out = run(&["design", "--filter", "poly:0,0,0,1", "--wavelet", "cauchy:1"]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr_json(&out);
    assert_eq!(err["reason"], "admissibility");
    assert!(err["message"].as_str().unwrap().contains("Ψ̆(3)"));
    let failing: Vec<&Value> = err["report"]["clauses"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .collect();
    assert_eq!(failing.len(), 1);
    assert_eq!(failing[0]["order"], 3.0);
}

#[test]
fn design_identity_is_constant() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("id.csv");
    stdout_json(&run(&[
        "design",
        "--filter",
        "identity",
        "--wavelet",
        "cauchy:1",
        "--voices",
        "3",
        "--octaves",
        "4",
        "--output",
        p(&out),
    ]));
    let expect = 16.0 * PI * PI;
    for (_, v) in read_design_csv(&out) {
        assert!((v.re - expect).abs() < 1e-12 * expect && v.im == 0.0);
    }
}

#[test]
fn admissibility_command() {
    let ok = stdout_json(&run(&["admissibility", "--filter", "poly:0,0,0,1", "--wavelet", "cauchy:4"]));
    assert_eq!(ok["report"]["admissible"], true);
    let bad = run(&["admissibility", "--filter", "poly:0,0,0,1", "--wavelet", "cauchy:1"]);
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn apply_identity_reconstructs() {
    let dir = TempDir::new().unwrap();
    let (input, x) = write_chirp(&dir);
    let out = dir.path().join("y.csv");
    let rep = stdout_json(&run(&[
        "apply",
        "--input",
        p(&input),
        "--filter",
        "identity",
        "--wavelet",
        "cauchy:1",
        "--sigma-min",
        "16",
        "--octaves",
        "12",
        "--output",
        p(&out),
    ]));
    assert_eq!(rep["projection"], "analytic_completion");
    let y = load_signal(&out, SignalFormat::Csv, None).unwrap();
    let a = analytic_part(&x).unwrap();
    let err = rel_l2(y.samples(), a.samples());
    assert!(err < 1e-2, "{err}");
}

#[test]
fn apply_hilbert_on_cosine() {
    let dir = TempDir::new().unwrap();
    let n = 4096;
    let cos: Vec<f64> = (0..n).map(|k| (2.0 * PI * 64.0 * k as f64 / n as f64).cos()).collect();
    let sin: Vec<Complex64> = (0..n)
        .map(|k| Complex64::new((2.0 * PI * 64.0 * k as f64 / n as f64).sin(), 0.0))
        .collect();
    let input = dir.path().join("cos.f64");
    save_signal(&Signal::from_real(&cos, n as f64).unwrap(), &input, SignalFormat::F64le).unwrap();
    let out = dir.path().join("sin.f64");
    let rep = stdout_json(&run(&[
        "apply",
        "--input",
        p(&input),
        "--format",
        "f64le",
        "--rate",
        "4096",
        "--filter",
        "hilbert",
        "--wavelet",
        "cauchy:2",
        "--sigma-min",
        "16",
        "--octaves",
        "12",
        "--negative-scales",
        "--real-output",
        "--output",
        p(&out),
    ]));
    assert_eq!(rep["projection"], "direct");
    let y = load_signal(&out, SignalFormat::F64le, Some(4096.0)).unwrap();
    let err = rel_l2(y.samples(), &sin);
    assert!(err < 1e-2, "{err}");
}

#[test]
fn apply_compare_derivative() {
    let dir = TempDir::new().unwrap();
    let (input, _) = write_chirp(&dir);
    let args = [
        "apply",
        "--input",
        p(&input),
        "--filter",
        "poly:0,1",
        "--wavelet",
        "cauchy:2",
        "--sigma-min",
        "16",
        "--octaves",
        "12",
        "--compare",
    ];
    let first = run(&args);
    let rep = stdout_json(&first);
    let cmp = &rep["comparison"];
    assert!(cmp["relative_l2_error"].as_f64().unwrap() < 1e-2);
    assert!(cmp["effective_path_agreement"].as_f64().unwrap() < 1e-10);
    assert!(cmp["max_pointwise_error"].is_number());
    assert!(cmp["symbol_deviation"].is_number());
    assert!(cmp.get("runtime").is_none());

    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);

    let mut timed = args.to_vec();
    timed.push("--timings");
    let rep = stdout_json(&run(&timed));
    assert!(rep["comparison"]["runtime"]["forward_s"].is_number());
}

#[test]
fn denoise_reports_fit_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (_, clean) = write_chirp(&dir);
    let noise = generate_test_signal(&TestSignal::PowerLawNoise { exponent: 0.0, seed: 3 }, 4096, 4096.0).unwrap();
    let noisy = clean.combine(Complex64::new(1.0, 0.0), &noise, Complex64::new(0.005, 0.0)).unwrap();
    let input = dir.path().join("noisy.csv");
    save_signal(&noisy, &input, SignalFormat::Csv).unwrap();
    let out = dir.path().join("den.csv");
    let args = [
        "denoise",
        "--input",
        p(&input),
        "--sigma-min",
        "256",
        "--voices",
        "16",
        "--octaves",
        "6",
        "--signal-exponent",
        "-2",
        "--noise-exponent",
        "0",
        "--real-output",
        "--output",
        p(&out),
    ];
    let first = run(&args);
    let rep = stdout_json(&first);
    assert_eq!(rep["fit"]["noise_exponent"], 0.0);
    assert_eq!(rep["fit"]["weights"].as_array().unwrap().len(), 96);
    let y = load_signal(&out, SignalFormat::Csv, None).unwrap();
    assert!(y.is_real());
    assert_eq!(y.len(), 4096);
    let bytes = fs::read(&out).unwrap();
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(bytes, fs::read(&out).unwrap());
}

#[test]
fn denoise_exponent_estimate() {
    let rep = stdout_json(&run(&[
        "denoise",
        "--generate",
        "noise:-1.6666666666666667",
        "--seed",
        "5",
        "--sigma-min",
        "16",
        "--voices",
        "8",
        "--octaves",
        "10",
        "--band",
        "200,1600",
    ]));
    let slope = rep["exponent"]["slope"].as_f64().unwrap();
    assert!((slope + 5.0 / 3.0).abs() < 0.5, "{slope}");
}

#[test]
fn config_file_with_flag_override() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{
            "wavelet": {"family": "cauchy", "alpha": 3.0},
            "grid": {"sigma_min": 2.0, "voices": 4, "octaves": 3},
            "filter": {"type": "power", "p": 1.0},
            "output": "w.csv"
        }"#,
    )
    .unwrap();
    let rep = stdout_json(&run(&["design", "--config", p(&cfg), "--voices", "8"]));
    assert_eq!(rep["grid"]["voices"], 8);
    assert_eq!(rep["grid"]["octaves"], 3);
    assert_eq!(rep["wavelet"], "cauchy(3)");
    assert_eq!(read_design_csv(&dir.path().join("w.csv")).len(), 24);

    fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    let out = run(&["design", "--config", p(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["reason"], "config");
}

#[test]
fn usage_errors_are_json() {
    let out = run(&["transform", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["reason"], "usage");
    let out = run(&["design", "--filter", "wiggle"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["apply", "--filter", "identity"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_json(&out)["message"].as_str().unwrap().contains("no input"));
}

#[test]
fn selftest_passes() {
    let rep = stdout_json(&run(&["selftest"]));
    assert_eq!(rep["passed"], true);
    assert!(rep["checks"].as_array().unwrap().len() >= 5);
}
