//! `scalefilt` command-line tool.
//!
//! Every command prints a JSON report on stdout; data go to `--output`.
//! Failures print `{"reason", "code", "message"}` on stderr and exit with 2
//! (invalid input or configuration) or 3 (numerical failure).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use scalefilt::io::SignalFormat;
use scalefilt::wavelet::WaveletSpec;
use scalefilt::Error;
use serde_json::{json, Value};

use config::{parse_filter_arg, parse_generate_arg, GenerateConfig, RunConfig};

#[derive(Parser)]
#[command(name = "scalefilt", version, about = "Convolution filtering in the wavelet domain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forward wavelet transform; writes a scaleogram file and its CSV export.
    Transform(Common),
    /// Designs w(σ) for a filter; writes σ, re, im rows.
    Design(Common),
    /// Filters a signal through the wavelet domain.
    Apply(Common),
    /// Power-law Wiener denoising in the wavelet domain.
    Denoise(Common),
    /// Itemised admissibility report for a filter and wavelet.
    Admissibility(Common),
    /// Runs a short set of numerical checks.
    Selftest(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// csv or f64le
    #[arg(long)]
    format: Option<String>,
    /// Sample rate for one-column CSV, f64le and generated input.
    #[arg(long)]
    rate: Option<f64>,
    /// Synthetic input: impulse, chirp:F0:F1[:LO:HI], tone:F, noise:EXPONENT
    #[arg(long)]
    generate: Option<String>,
    /// Length of the synthetic input.
    #[arg(long)]
    length: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// cauchy:ALPHA
    #[arg(long)]
    wavelet: Option<String>,
    #[arg(long)]
    voices: Option<usize>,
    #[arg(long)]
    octaves: Option<usize>,
    #[arg(long)]
    sigma_min: Option<f64>,
    #[arg(long)]
    negative_scales: bool,
    /// Keep only the real part of synthesised signals.
    #[arg(long)]
    real_output: bool,
    /// JSON filter file, or identity, hilbert, power:P, poly:a0,a1,...
    #[arg(long)]
    filter: Option<String>,
    /// Contour abscissa c.
    #[arg(long)]
    contour_c: Option<f64>,
    #[arg(long)]
    u_max: Option<f64>,
    #[arg(long)]
    n_points: Option<usize>,
    /// Also run the frequency-domain reference and report both paths.
    #[arg(long)]
    compare: bool,
    /// Include wall-clock timings in reports.
    #[arg(long)]
    timings: bool,
    #[arg(long, allow_hyphen_values = true)]
    signal_exponent: Option<f64>,
    /// A number, or "none" for a noiseless model.
    #[arg(long, allow_hyphen_values = true)]
    noise_exponent: Option<String>,
    /// LO,HI frequency band for the spectral-exponent estimate.
    #[arg(long)]
    band: Option<String>,
}

/// A failed run: the error plus anything worth attaching to stderr.
pub struct Failure {
    pub error: Error,
    pub exit: u8,
    pub report: Option<Value>,
}

impl Failure {
    pub fn validation(error: Error) -> Self {
        Self {
            error,
            exit: 2,
            report: None,
        }
    }

    pub fn with_report(mut self, report: Value) -> Self {
        self.report = Some(report);
        self
    }
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        let exit = if error.is_numerical() { 3 } else { 2 };
        Self {
            error,
            exit,
            report: None,
        }
    }
}

fn parse<T>(r: scalefilt::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::validation)
}

fn resolve(common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p).map_err(Failure::validation)?,
        None => RunConfig::default(),
    };
    let c = common.clone();
    if let Some(v) = c.input {
        cfg.input = Some(v);
        cfg.generate = None;
    }
    if let Some(v) = c.output {
        cfg.output = Some(v);
    }
    if let Some(v) = c.format {
        cfg.format = parse(v.parse::<SignalFormat>())?;
    }
    if let Some(v) = c.rate {
        cfg.sample_rate = Some(v);
    }
    if let Some(v) = c.generate {
        let signal = parse(parse_generate_arg(&v))?;
        cfg.generate = Some(GenerateConfig {
            signal,
            len: 4096,
            sample_rate: 4096.0,
        });
        cfg.input = None;
    }
    if let Some(g) = cfg.generate.as_mut() {
        if let Some(n) = c.length {
            g.len = n;
        }
        if let Some(r) = cfg.sample_rate {
            g.sample_rate = r;
        }
    }
    if let Some(v) = c.seed {
        cfg.seed = Some(v);
    }
    if let Some(v) = c.wavelet {
        cfg.wavelet = parse(v.parse::<WaveletSpec>())?;
    }
    if let Some(v) = c.voices {
        cfg.grid.voices = v;
    }
    if let Some(v) = c.octaves {
        cfg.grid.octaves = v;
    }
    if let Some(v) = c.sigma_min {
        cfg.grid.sigma_min = Some(v);
    }
    cfg.grid.include_negative_scales |= c.negative_scales;
    cfg.grid.real_output |= c.real_output;
    if let Some(v) = c.filter {
        cfg.filter = Some(parse(parse_filter_arg(&v))?);
    }
    if let Some(v) = c.contour_c {
        cfg.contour.c = Some(v);
    }
    if let Some(v) = c.u_max {
        cfg.contour.u_max = v;
    }
    if let Some(v) = c.n_points {
        cfg.contour.n_points = v;
    }
    cfg.compare |= c.compare;
    cfg.timings |= c.timings;
    if let Some(v) = c.signal_exponent {
        cfg.denoise.signal_exponent = v;
    }
    if let Some(v) = c.noise_exponent {
        cfg.denoise.noise_exponent = if v.eq_ignore_ascii_case("none") {
            None
        } else {
            Some(parse(
                v.parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad noise exponent '{v}'"))),
            )?)
        };
    }
    if let Some(v) = c.band {
        let nums: Vec<f64> = v.split(',').filter_map(|s| s.trim().parse().ok()).collect();
        match nums.as_slice() {
            [lo, hi] => cfg.denoise.band = Some((*lo, *hi)),
            _ => {
                return Err(Failure::validation(Error::Config(format!(
                    "band must be LO,HI, got '{v}'"
                ))))
            }
        }
    }
    cfg.validate().map_err(Failure::validation)?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<Value, Failure> {
    let (common, cmd): (&Common, fn(&RunConfig) -> Result<Value, Failure>) = match &cli.command {
        Command::Transform(c) => (c, commands::transform),
        Command::Design(c) => (c, commands::design),
        Command::Apply(c) => (c, commands::apply),
        Command::Denoise(c) => (c, commands::denoise),
        Command::Admissibility(c) => (c, commands::admissibility),
        Command::Selftest(c) => (c, commands::selftest),
    };
    let cfg = resolve(common)?;
    log::debug!("resolved configuration: {cfg:?}");
    cmd(&cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let body = json!({"reason": "usage", "code": 2, "message": e.to_string()});
            eprintln!("{body}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report).expect("serialisable report"));
            ExitCode::SUCCESS
        }
        Err(f) => {
            let mut body = json!({
                "reason": f.error.code(),
                "code": f.exit,
                "message": f.error.to_string(),
            });
            if let Some(r) = f.report {
                body["report"] = r;
            }
            eprintln!("{body}");
            ExitCode::from(f.exit)
        }
    }
}
