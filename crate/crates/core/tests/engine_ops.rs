use std::f64::consts::PI;

use scalefilt::engine::{parseval_pair, weighted_energy, Projection};
use scalefilt::filter::{identity_filter, Branch};
use scalefilt::generate::{generate_test_signal, TestSignal};
use scalefilt::harness::{apply_frequency_filter, relative_l2_interior};
use scalefilt::scaleogram_io::{load_scaleogram, save_scaleogram, scaleogram_from_bytes, scaleogram_to_bytes, scaleogram_to_csv};
use scalefilt::*;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn chirp() -> Signal {
    generate_test_signal(
        &TestSignal::Chirp {
            f_start: 40.0,
            f_end: 200.0,
            band_limit: Some((32.0, 256.0)),
        },
        4096,
        4096.0,
    )
    .unwrap()
}

fn transform(x: &Signal, w: &Wavelet, g: GridSpec) -> Scaleogram {
    cwt_forward(x, w, &ScaleTimeGrid::for_signal(g, x).unwrap()).unwrap()
}

#[test]
fn cauchy_one_moments() {
    let w = Wavelet::cauchy(1.0).unwrap();
    let psi0 = 1.0 / (16.0 * PI * PI);
    assert!((w.admissibility_constant() - psi0).abs() < 1e-12 * psi0);
    assert!((w.mellin_numeric(c(0.0)).unwrap().re - psi0).abs() < 1e-10 * psi0);
    let psi1 = 1.0 / (4.0 * PI);
    assert!((w.mellin_numeric(c(1.0)).unwrap().re - psi1).abs() < 1e-10 * psi1);
    assert_eq!(w.spectral(-1.0), c(0.0));
    assert!(matches!(Wavelet::cauchy(0.0), Err(Error::Parameter(_))));
}

#[test]
fn sampled_wavelet_tracks_cauchy() {
    let fs: Vec<f64> = (0..40 * 48).map(|k| 2f64.powf(-20.0 + (k as f64 + 0.5) / 48.0)).collect();
    let vs: Vec<Complex64> = fs.iter().map(|&f| c(f * (-2.0 * PI * f).exp())).collect();
    let s = Wavelet::sampled(&fs, &vs).unwrap();
    let w = Wavelet::cauchy(1.0).unwrap();
    let peak = w.spectral(1.0 / (2.0 * PI)).norm();
    for k in 0..200 {
        let f = 2f64.powf(-8.0 + k as f64 * 0.05);
        let (a, b) = (s.spectral(f), w.spectral(f));
        assert!((a - b).norm() < 1e-6 * peak, "f={f}");
    }
    assert!((s.admissibility_constant() - w.admissibility_constant()).abs() < 1e-6 * w.admissibility_constant());
}

#[test]
fn sampled_wavelet_rejections() {
    let neg = Wavelet::sampled(&[-1.0, 1.0, 2.0], &[c(1.0), c(1.0), c(0.5)]);
    assert!(matches!(neg, Err(Error::Admissibility(_))));
    let fs: Vec<f64> = (-160..=160).map(|k| 2f64.powf(k as f64 / 16.0)).collect();
    let vs: Vec<Complex64> = fs.iter().map(|&f| c(1.0 / f)).collect();
    assert!(matches!(Wavelet::sampled(&fs, &vs), Err(Error::Admissibility(_))));
}

#[test]
fn grid_geometry() {
    let g = GridSpec::new(2.0, 8, 3);
    let s = g.positive_scales();
    assert_eq!(s.len(), 24);
    for p in s.windows(2) {
        assert!((p[1] / p[0] - 2f64.powf(1.0 / 8.0)).abs() < 1e-12);
    }
    // nodes are midpoints in ln σ of cells half a voice wide on each side
    let wsum: f64 = g.weights().iter().sum();
    let (lo, hi) = (s[0] * 2f64.powf(-1.0 / 16.0), s[23] * 2f64.powf(1.0 / 16.0));
    assert!(g.weights().iter().all(|&w| w > 0.0));
    assert!((wsum - (hi - lo)).abs() < 1e-3 * (hi - lo));
    assert!(GridSpec::new(0.0, 8, 3).validate().is_err());
    assert_eq!(g.with_negative_scales(true).signed_scales().len(), 48);
}

#[test]
fn zero_signal_zero_scaleogram() {
    let x = Signal::from_real(&[0.0; 256], 256.0).unwrap();
    let sc = transform(&x, &Wavelet::cauchy(1.0).unwrap(), GridSpec::new(4.0, 4, 4));
    assert!(sc.coefficients().iter().all(|z| z.norm() == 0.0));
}

#[test]
fn complex_exponential_has_flat_modulus() {
    let (n, f0) = (1024, 64.0);
    let v: Vec<Complex64> = (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * PI * f0 * k as f64 / n as f64)).collect();
    let x = Signal::new(v, n as f64).unwrap();
    let w = Wavelet::cauchy(1.0).unwrap();
    let g = GridSpec::new(16.0, 4, 4);
    let sc = transform(&x, &w, g);
    for (j, s) in g.positive_scales().iter().enumerate() {
        // ψ̂(f₀/σ)/σ under the unnormalised family
        let expect = w.spectral(f0 / s).norm() / s;
        let floor = 1e-12 * w.spectral(1.0 / (2.0 * PI)).norm() / s;
        for z in sc.row(j) {
            assert!((z.norm() - expect).abs() < 1e-9 * expect + floor, "σ={s}");
        }
    }
}

#[test]
fn grid_rate_mismatch_is_an_error() {
    let x = Signal::from_real(&[0.0; 256], 256.0).unwrap();
    let grid = ScaleTimeGrid::new(GridSpec::new(4.0, 4, 4), 256, 128.0, 0.0).unwrap();
    assert!(matches!(
        cwt_forward(&x, &Wavelet::cauchy(1.0).unwrap(), &grid),
        Err(Error::GridMismatch(_))
    ));
}

#[test]
fn reconstruction_of_chirp() {
    let x = chirp();
    let w = Wavelet::cauchy(1.0).unwrap();
    let sc = transform(&x, &w, GridSpec::new(2.0, 16, 20));
    let y = reconstruct(&sc, &w, &SynthesisOptions::default()).unwrap();
    let a = analytic_part(&x).unwrap();
    assert!(relative_l2_interior(y.samples(), a.samples()) < 1e-2);
    let yr = reconstruct(&sc, &w, &SynthesisOptions { real_output: true }).unwrap();
    assert!(relative_l2_interior(yr.samples(), x.samples()) < 1e-2);
}

#[test]
fn zero_filter_and_zero_scaleogram() {
    let x = chirp();
    let w = Wavelet::cauchy(1.0).unwrap();
    let sc = transform(&x, &w, GridSpec::new(8.0, 8, 8));
    let out = apply_scale_filter(&sc, &ScaleFilter::zero(), &w, &SynthesisOptions::default()).unwrap();
    assert!(out.output.samples().iter().all(|z| z.norm() == 0.0));
    let z = sc.combine(c(0.0), &sc, c(0.0)).unwrap();
    let r = reconstruct(&z, &w, &SynthesisOptions::default()).unwrap();
    assert!(r.samples().iter().all(|z| z.norm() == 0.0));
}

#[test]
fn first_power_matches_frequency_multiply() {
    let x = chirp();
    let w = Wavelet::cauchy(1.0).unwrap();
    let psi1 = w.mellin(c(1.0)).unwrap();
    let wf = ScaleFilter::new(Branch::custom(move |s| c(s) / psi1), Branch::Zero, c(0.0));
    let sc = transform(&x, &w, GridSpec::new(2.0, 16, 20));
    let y = apply_scale_filter(&sc, &wf, &w, &SynthesisOptions::default()).unwrap();
    assert_eq!(y.projection, Projection::AnalyticCompletion);
    let a = analytic_part(&x).unwrap();
    let big = FrequencyFilter::power(c(1.0), 1.0);
    let reference = apply_frequency_filter(&a, &big).unwrap();
    assert!(relative_l2_interior(y.output.samples(), reference.samples()) < 1e-2);
}

#[test]
fn reconstruction_is_linear() {
    let x = chirp();
    let w = Wavelet::cauchy(1.0).unwrap();
    let g = GridSpec::new(8.0, 8, 8);
    let s1 = transform(&x, &w, g);
    let y = generate_test_signal(
        &TestSignal::Multitone {
            freqs: vec![100.0],
            amplitudes: vec![1.0],
        },
        4096,
        4096.0,
    )
    .unwrap();
    let s2 = transform(&y, &w, g);
    let (a, b) = (Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5));
    let opts = SynthesisOptions::default();
    let lhs = reconstruct(&s1.combine(a, &s2, b).unwrap(), &w, &opts).unwrap();
    let r1 = reconstruct(&s1, &w, &opts).unwrap();
    let r2 = reconstruct(&s2, &w, &opts).unwrap();
    let scale = lhs.samples().iter().map(|z| z.norm()).fold(0.0, f64::max);
    for ((l, p), q) in lhs.samples().iter().zip(r1.samples()).zip(r2.samples()) {
        assert!((l - (a * p + b * q)).norm() < 1e-12 * scale);
    }
}

#[test]
fn weighted_energy_cases() {
    let x = chirp();
    let w = Wavelet::cauchy(1.0).unwrap();
    let g = GridSpec::new(8.0, 8, 8);
    let sc = transform(&x, &w, g);
    let (wi, _) = identity_filter(&w);
    let e1 = weighted_energy(&sc, &wi).unwrap();
    let e2 = weighted_energy(&sc, &wi.scaled(c(2.0))).unwrap();
    assert_eq!(e2, 2.0 * e1);
    let zero = transform(&Signal::from_real(&[0.0; 4096], 4096.0).unwrap(), &w, g);
    assert_eq!(weighted_energy(&zero, &wi).unwrap(), 0.0);
    let neg = ScaleFilter::new(Branch::Constant(c(-1.0)), Branch::Zero, c(0.0));
    assert!(matches!(weighted_energy(&sc, &neg), Err(Error::Domain(_))));
}

#[test]
fn parseval_pair_cases() {
    let w = Wavelet::cauchy(1.0).unwrap();
    let g = GridSpec::new(8.0, 8, 9);
    let (wi, _) = identity_filter(&w);
    let tone = |f: f64| {
        generate_test_signal(
            &TestSignal::Multitone {
                freqs: vec![f],
                amplitudes: vec![1.0],
            },
            4096,
            4096.0,
        )
        .unwrap()
    };
    let x = chirp();
    let sx = transform(&x, &w, g);
    let pp = parseval_pair(&sx, &sx, &wi).unwrap();
    let e = weighted_energy(&sx, &wi).unwrap();
    assert!((pp.re - e).abs() < 1e-12 * e && pp.im.abs() < 1e-12 * e);

    let (a, b) = (transform(&tone(64.0), &w, g), transform(&tone(512.0), &w, g));
    let ab = parseval_pair(&a, &b, &wi).unwrap();
    let ba = parseval_pair(&b, &a, &wi).unwrap();
    let na = weighted_energy(&a, &wi).unwrap();
    let nb = weighted_energy(&b, &wi).unwrap();
    assert!(ab.norm() < 1e-6 * (na * nb).sqrt());
    assert!((ab - ba.conj()).norm() <= 1e-12 * (na * nb).sqrt());

    let other = transform(&x, &w, GridSpec::new(4.0, 8, 9));
    assert!(matches!(parseval_pair(&sx, &other, &wi), Err(Error::GridMismatch(_))));
}

#[test]
fn scaleogram_file_round_trip() {
    let x = chirp();
    let w = Wavelet::cauchy(1.0).unwrap();
    let sc = transform(&x, &w, GridSpec::new(8.0, 4, 3).with_negative_scales(true));
    let bytes = scaleogram_to_bytes(&sc);
    let back = scaleogram_from_bytes(&bytes).unwrap();
    assert_eq!(back.coefficients(), sc.coefficients());
    assert_eq!(back.grid().scales(), sc.grid().scales());
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.sclg");
    save_scaleogram(&sc, &p).unwrap();
    assert_eq!(load_scaleogram(&p).unwrap().coefficients(), sc.coefficients());
    assert!(scaleogram_from_bytes(&bytes[..bytes.len() - 1]).is_err());
    let csv = scaleogram_to_csv(&sc);
    assert_eq!(csv.lines().count(), 1 + sc.coefficients().len());
}
