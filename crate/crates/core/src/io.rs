//! Signal file formats.
//!
//! * CSV: comma separated, `#` starts a comment line, no header. One column
//!   (value, rate supplied by the caller), two columns (time, value) or three
//!   columns (time, re, im). Numbers are written with 17 significant digits.
//! * f64le: raw little-endian `f64` values of a real signal, rate supplied
//!   by the caller.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Signal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalFormat {
    Csv,
    F64le,
}

impl FromStr for SignalFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(SignalFormat::Csv),
            "f64le" => Ok(SignalFormat::F64le),
            other => Err(Error::Config(format!("unknown signal format '{other}'"))),
        }
    }
}

/// Relative tolerance on the time column's spacing.
const UNIFORM_TOL: f64 = 1e-6;

/// Formats a float with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn load_signal(path: &Path, format: SignalFormat, sample_rate: Option<f64>) -> Result<Signal> {
    match format {
        SignalFormat::Csv => parse_csv_signal(&fs::read_to_string(path)?, sample_rate),
        SignalFormat::F64le => {
            let bytes = fs::read(path)?;
            let rate = sample_rate.ok_or_else(|| {
                Error::Config("f64le input needs an explicit sample rate".into())
            })?;
            parse_f64le(&bytes, rate)
        }
    }
}

pub fn parse_f64le(bytes: &[u8], sample_rate: f64) -> Result<Signal> {
    if bytes.len() % 8 != 0 {
        return Err(Error::Parse {
            line: 0,
            message: format!("f64le payload of {} bytes is not a multiple of 8", bytes.len()),
        });
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Signal::from_real(&values, sample_rate)
}

pub fn parse_csv_signal(text: &str, sample_rate: Option<f64>) -> Result<Signal> {
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: i + 1,
                    message: format!("'{}': {e}", f.trim()),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some((_, first)) = rows.first() {
            if first.len() != fields.len() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected {} columns, found {}", first.len(), fields.len()),
                });
            }
        }
        if fields.is_empty() || fields.len() > 3 {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected 1 to 3 columns, found {}", fields.len()),
            });
        }
        rows.push((i + 1, fields));
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "input contains no samples".into(),
        });
    }
    let ncol = rows[0].1.len();
    if ncol == 1 {
        let rate = sample_rate.ok_or_else(|| {
            Error::Config("single-column CSV needs an explicit sample rate".into())
        })?;
        let v: Vec<f64> = rows.iter().map(|(_, r)| r[0]).collect();
        return Signal::from_real(&v, rate);
    }
    if rows.len() < 2 {
        return Err(Error::Parse {
            line: rows[0].0,
            message: "need at least two rows to infer the sample rate".into(),
        });
    }
    let t0 = rows[0].1[0];
    let dt = rows[1].1[0] - t0;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parse {
            line: rows[1].0,
            message: "time column must be strictly increasing".into(),
        });
    }
    for (k, (line, r)) in rows.iter().enumerate() {
        let expect = t0 + k as f64 * dt;
        if (r[0] - expect).abs() > UNIFORM_TOL * dt {
            return Err(Error::Parse {
                line: *line,
                message: format!(
                    "non-uniform time column: t={} but uniform spacing {dt} predicts {expect}; resampling is not supported",
                    r[0]
                ),
            });
        }
    }
    let samples: Vec<Complex64> = rows
        .iter()
        .map(|(_, r)| Complex64::new(r[1], if ncol == 3 { r[2] } else { 0.0 }))
        .collect();
    Ok(Signal::new(samples, 1.0 / dt)?.with_start_time(t0))
}

/// Writes `signal` to `path`. Complex signals are written as three CSV
/// columns; f64le only holds real signals.
pub fn save_signal(signal: &Signal, path: &Path, format: SignalFormat) -> Result<()> {
    match format {
        SignalFormat::Csv => fs::write(path, signal_to_csv(signal)).map_err(Error::from),
        SignalFormat::F64le => {
            if !signal.is_real() {
                return Err(Error::Domain(
                    "f64le holds real samples only; use CSV for complex signals".into(),
                ));
            }
            let mut f = fs::File::create(path)?;
            for z in signal.samples() {
                f.write_all(&z.re.to_le_bytes())?;
            }
            Ok(())
        }
    }
}

pub fn signal_to_csv(signal: &Signal) -> String {
    let real = signal.is_real();
    let mut out = String::with_capacity(signal.len() * 48);
    for (t, z) in signal.times().iter().zip(signal.samples()) {
        if real {
            out.push_str(&format!("{},{}\n", fmt17(*t), fmt17(z.re)));
        } else {
            out.push_str(&format!("{},{},{}\n", fmt17(*t), fmt17(z.re), fmt17(z.im)));
        }
    }
    out
}
