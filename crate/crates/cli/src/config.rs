use std::fs;
use std::path::{Path, PathBuf};

use scalefilt::filter::{Coefficient, FilterSpec};
use scalefilt::generate::TestSignal;
use scalefilt::io::SignalFormat;
use scalefilt::wavelet::WaveletSpec;
use scalefilt::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Smallest positive scale; chosen from the signal when absent.
    pub sigma_min: Option<f64>,
    pub voices: usize,
    pub octaves: usize,
    pub include_negative_scales: bool,
    pub real_output: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            sigma_min: None,
            voices: 16,
            octaves: 10,
            include_negative_scales: false,
            real_output: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContourConfig {
    pub c: Option<f64>,
    pub u_max: f64,
    pub n_points: usize,
}

impl Default for ContourConfig {
    fn default() -> Self {
        Self {
            c: None,
            u_max: 10.0,
            n_points: 801,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    pub signal: TestSignal,
    #[serde(default = "default_len")]
    pub len: usize,
    #[serde(default = "default_rate")]
    pub sample_rate: f64,
}

fn default_len() -> usize {
    4096
}

fn default_rate() -> f64 {
    4096.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DenoiseConfig {
    pub signal_exponent: f64,
    /// `None` fits a noiseless model.
    pub noise_exponent: Option<f64>,
    /// Band for the spectral-exponent estimate of the input.
    pub band: Option<(f64, f64)>,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        Self {
            signal_exponent: -2.0,
            noise_exponent: Some(0.0),
            band: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub wavelet: WaveletSpec,
    pub grid: GridConfig,
    pub contour: ContourConfig,
    pub filter: Option<FilterSpec>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: SignalFormat,
    pub sample_rate: Option<f64>,
    pub generate: Option<GenerateConfig>,
    pub seed: Option<u64>,
    pub denoise: DenoiseConfig,
    pub compare: bool,
    pub timings: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            wavelet: WaveletSpec::Cauchy { alpha: 1.0 },
            grid: GridConfig::default(),
            contour: ContourConfig::default(),
            filter: None,
            input: None,
            output: None,
            format: SignalFormat::Csv,
            sample_rate: None,
            generate: None,
            seed: None,
            denoise: DenoiseConfig::default(),
            compare: false,
            timings: false,
        }
    }
}

impl RunConfig {
    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        let dir = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        cfg.input.as_mut().map(rebase);
        cfg.output.as_mut().map(rebase);
        if let Some(FilterSpec::Sampled { path }) = cfg.filter.as_mut() {
            rebase(path);
        }
        Ok(cfg)
    }

    /// Checks the settings that do not depend on the input signal.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if g.voices == 0 || g.octaves == 0 {
            return Err(Error::Config("voices and octaves must be positive".into()));
        }
        if let Some(s) = g.sigma_min {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::Config(format!("sigma_min must be positive, got {s}")));
            }
        }
        if let Some(r) = self.sample_rate {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::Config(format!("sample rate must be positive, got {r}")));
            }
        }
        let c = &self.contour;
        if !(c.u_max.is_finite() && c.u_max > 0.0) || c.n_points < 17 || c.n_points % 2 == 0 {
            return Err(Error::Config(
                "contour needs u_max > 0 and an odd n_points of at least 17".into(),
            ));
        }
        if let Some(c) = c.c {
            if !c.is_finite() {
                return Err(Error::Config("contour abscissa must be finite".into()));
            }
        }
        if !self.denoise.signal_exponent.is_finite() {
            return Err(Error::Config("signal exponent must be finite".into()));
        }
        Ok(())
    }
}

/// Parses `--filter`: a JSON file path, or one of `identity`, `hilbert`,
/// `power:P`, `poly:a0,a1,...`.
pub fn parse_filter_arg(arg: &str) -> Result<FilterSpec> {
    let path = Path::new(arg);
    if path.is_file() {
        return FilterSpec::load(path);
    }
    let (name, rest) = arg.split_once(':').unwrap_or((arg, ""));
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("bad number '{s}' in filter '{arg}'")))
    };
    match name {
        "identity" => Ok(FilterSpec::Identity),
        "hilbert" => Ok(FilterSpec::Hilbert),
        "power" => Ok(FilterSpec::Power { p: num(rest)?, coef: None }),
        "poly" => Ok(FilterSpec::Polynomial {
            coefficients: rest
                .split(',')
                .map(|s| num(s).map(Coefficient::Real))
                .collect::<Result<_>>()?,
        }),
        _ => Err(Error::Config(format!(
            "filter '{arg}' is neither a file nor one of identity, hilbert, power:P, poly:a0,a1,..."
        ))),
    }
}

/// Parses `--generate`: `impulse`, `chirp:F0:F1[:LO:HI]`, `tone:F`,
/// `noise:EXPONENT`.
pub fn parse_generate_arg(arg: &str) -> Result<TestSignal> {
    let mut parts = arg.split(':');
    let name = parts.next().unwrap_or("");
    let nums: Vec<f64> = parts
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number '{s}' in '{arg}'")))
        })
        .collect::<Result<_>>()?;
    let bad = || Error::Config(format!("cannot parse test signal '{arg}'"));
    match (name, nums.as_slice()) {
        ("impulse", []) => Ok(TestSignal::Impulse),
        ("chirp", [a, b]) => Ok(TestSignal::Chirp {
            f_start: *a,
            f_end: *b,
            band_limit: None,
        }),
        ("chirp", [a, b, lo, hi]) => Ok(TestSignal::Chirp {
            f_start: *a,
            f_end: *b,
            band_limit: Some((*lo, *hi)),
        }),
        ("tone", [f]) => Ok(TestSignal::Multitone {
            freqs: vec![*f],
            amplitudes: vec![1.0],
        }),
        ("noise", [p]) => Ok(TestSignal::PowerLawNoise { exponent: *p, seed: 0 }),
        _ => Err(bad()),
    }
}
