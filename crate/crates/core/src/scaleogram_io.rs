//! Scaleogram files.
//!
//! Binary layout, all little-endian:
//!
//! | field              | type      |
//! |--------------------|-----------|
//! | magic `SCLG`       | 4 bytes   |
//! | version (1)        | u32       |
//! | n_scales, n_times  | u64, u64  |
//! | voices, octaves    | u32, u32  |
//! | negative scales    | u8        |
//! | source is real     | u8        |
//! | sigma_min, rate    | f64, f64  |
//! | start time         | f64       |
//! | original length    | u64       |
//! | dc (re, im)        | f64, f64  |
//! | scales             | n_scales × f64 |
//! | coefficients       | n_scales × n_times × (f64 re, f64 im), row-major |
//!
//! The CSV export has one row `σ, τ, re, im` per coefficient.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::engine::{GridSpec, ScaleTimeGrid, Scaleogram, SourceMeta};
use crate::error::{Error, Result};
use crate::io::fmt17;

const MAGIC: &[u8; 4] = b"SCLG";
const VERSION: u32 = 1;

pub fn scaleogram_to_bytes(s: &Scaleogram) -> Vec<u8> {
    let g = s.grid();
    let m = s.meta();
    let scales = g.scales();
    let mut out = Vec::with_capacity(96 + scales.len() * 8 + s.coefficients().len() * 16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(scales.len() as u64).to_le_bytes());
    out.extend_from_slice(&(g.n_times as u64).to_le_bytes());
    out.extend_from_slice(&(g.spec.voices as u32).to_le_bytes());
    out.extend_from_slice(&(g.spec.octaves as u32).to_le_bytes());
    out.push(g.spec.include_negative_scales as u8);
    out.push(m.is_real as u8);
    out.extend_from_slice(&g.spec.sigma_min.to_le_bytes());
    out.extend_from_slice(&g.sample_rate.to_le_bytes());
    out.extend_from_slice(&g.start_time.to_le_bytes());
    out.extend_from_slice(&(m.original_len as u64).to_le_bytes());
    out.extend_from_slice(&m.dc.re.to_le_bytes());
    out.extend_from_slice(&m.dc.im.to_le_bytes());
    for s in &scales {
        out.extend_from_slice(&s.to_le_bytes());
    }
    for z in s.coefficients() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Parse {
                line: 0,
                message: format!("scaleogram file truncated at byte {}", self.pos),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn scaleogram_from_bytes(bytes: &[u8]) -> Result<Scaleogram> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Parse {
            line: 0,
            message: "not a scaleogram file".into(),
        });
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Parse {
            line: 0,
            message: format!("unsupported scaleogram version {version}"),
        });
    }
    let n_scales = r.u64()? as usize;
    let n_times = r.u64()? as usize;
    let voices = r.u32()? as usize;
    let octaves = r.u32()? as usize;
    let negative = r.u8()? != 0;
    let is_real = r.u8()? != 0;
    let sigma_min = r.f64()?;
    let rate = r.f64()?;
    let start = r.f64()?;
    let original_len = r.u64()? as usize;
    let dc = Complex64::new(r.f64()?, r.f64()?);
    let spec = GridSpec::new(sigma_min, voices, octaves).with_negative_scales(negative);
    let grid = ScaleTimeGrid::new(spec, n_times, rate, start)?;
    if grid.n_scales() != n_scales {
        return Err(Error::Parse {
            line: 0,
            message: "scale count does not match the grid parameters".into(),
        });
    }
    for _ in 0..n_scales {
        r.f64()?;
    }
    let mut coefficients = Vec::with_capacity(n_scales * n_times);
    for _ in 0..n_scales * n_times {
        coefficients.push(Complex64::new(r.f64()?, r.f64()?));
    }
    if r.pos != bytes.len() {
        return Err(Error::Parse {
            line: 0,
            message: "trailing bytes after scaleogram payload".into(),
        });
    }
    let meta = SourceMeta {
        original_len,
        sample_rate: rate,
        start_time: start,
        is_real,
        dc,
    };
    Scaleogram::from_parts(grid, coefficients, meta)
}

pub fn save_scaleogram(s: &Scaleogram, path: &Path) -> Result<()> {
    fs::write(path, scaleogram_to_bytes(s))?;
    Ok(())
}

pub fn load_scaleogram(path: &Path) -> Result<Scaleogram> {
    scaleogram_from_bytes(&fs::read(path)?)
}

pub fn scaleogram_to_csv(s: &Scaleogram) -> String {
    let times = s.grid().times();
    let mut out = String::from("# sigma,tau,re,im\n");
    for (j, sigma) in s.grid().scales().iter().enumerate() {
        for (t, z) in times.iter().zip(s.row(j)) {
            out.push_str(&fmt17(*sigma));
            out.push(',');
            out.push_str(&fmt17(sigma * t));
            out.push(',');
            out.push_str(&fmt17(z.re));
            out.push(',');
            out.push_str(&fmt17(z.im));
            out.push('\n');
        }
    }
    out
}
