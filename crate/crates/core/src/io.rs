//! Frame files and stack manifests.
//!
//! Two frame formats are supported:
//!
//! * `csv`: one image row per line, comma-separated temperatures with a
//!   `.` decimal separator. Values are written in shortest round-trip form,
//!   so save followed by load is exact.
//! * `pgm16`: binary P5 PGM with maxval 65535, samples most-significant
//!   byte first, mapped linearly onto `[t_min, t_max]` °C.
//!
//! A manifest is a JSON document listing frame files relative to its own
//! directory:
//!
//! ```json
//! { "format": "pgm16", "frames": ["f00.pgm", "f01.pgm"],
//!   "lens_positions": [0.0, 1.0], "t_min": 20.0, "t_max": 70.0 }
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{validate_stack, FocalStack, ThermalImage};

pub const PGM_MAXVAL: u16 = 65535;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameFormat {
    Csv,
    Pgm16,
}

/// How frames are stored on disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrameEncoding {
    Csv,
    /// Linear map of `0..=65535` onto `t_min..=t_max`.
    Pgm16 { t_min: f64, t_max: f64 },
}

impl FrameEncoding {
    pub fn pgm16(t_min: f64, t_max: f64) -> Result<Self> {
        if !(t_min.is_finite() && t_max.is_finite() && t_max > t_min) {
            return Err(Error::InvalidConfig(format!(
                "pgm16 needs finite t_max > t_min, got t_min={t_min}, t_max={t_max}"
            )));
        }
        Ok(Self::Pgm16 { t_min, t_max })
    }

    pub fn extension(&self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Pgm16 { .. } => "pgm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackManifest {
    pub format: FrameFormat,
    pub frames: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lens_positions: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
}

impl StackManifest {
    pub fn validate(&self) -> Result<()> {
        if self.frames.is_empty() {
            return Err(Error::InvalidConfig("manifest lists no frames".into()));
        }
        self.encoding().map(|_| ())
    }

    pub fn encoding(&self) -> Result<FrameEncoding> {
        match self.format {
            FrameFormat::Csv => Ok(FrameEncoding::Csv),
            FrameFormat::Pgm16 => match (self.t_min, self.t_max) {
                (Some(lo), Some(hi)) => FrameEncoding::pgm16(lo, hi),
                _ => Err(Error::InvalidConfig(
                    "pgm16 manifest needs t_min and t_max".into(),
                )),
            },
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: Self = serde_json::from_str(&text).map_err(|e| {
            Error::parse(path, format!("line {}, column {}", e.line(), e.column()), e.to_string())
        })?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Loads every frame named by the manifest and validates the stack.
pub fn load_stack(manifest_path: &Path) -> Result<FocalStack> {
    let manifest = StackManifest::read(manifest_path)?;
    let encoding = manifest.encoding()?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let frames = manifest
        .frames
        .iter()
        .map(|f| read_frame(&base.join(f), encoding))
        .collect::<Result<Vec<_>>>()?;
    let mut stack = FocalStack::new(frames);
    if let Some(pos) = manifest.lens_positions {
        stack = stack.with_lens_positions(pos);
    }
    validate_stack(&stack).into_result()?;
    Ok(stack)
}

pub fn read_frame(path: &Path, encoding: FrameEncoding) -> Result<ThermalImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    match encoding {
        FrameEncoding::Csv => parse_csv(path, &bytes),
        FrameEncoding::Pgm16 { t_min, t_max } => parse_pgm16(path, &bytes, t_min, t_max),
    }
}

pub fn write_frame(path: &Path, img: &ThermalImage, encoding: FrameEncoding) -> Result<()> {
    let bytes = match encoding {
        FrameEncoding::Csv => encode_csv(img).into_bytes(),
        FrameEncoding::Pgm16 { t_min, t_max } => encode_pgm16(img, t_min, t_max),
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn encode_csv(img: &ThermalImage) -> String {
    let mut out = String::with_capacity(img.temps().len() * 8);
    for row in img.temps().chunks(img.width()) {
        for (i, t) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{t}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Parses CSV text. Rows must all have the same number of fields; blank
/// lines are ignored.
pub fn parse_csv(path: &Path, bytes: &[u8]) -> Result<ThermalImage> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::parse(path, format!("byte {}", e.valid_up_to()), "not valid UTF-8"))?;
    let mut width = None;
    let mut temps = Vec::new();
    let mut height = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut count = 0;
        for (col, field) in line.split(',').enumerate() {
            let field = field.trim();
            let value: f64 = field.parse().map_err(|_| {
                Error::parse(
                    path,
                    format!("line {}, column {}", lineno + 1, col + 1),
                    format!("invalid number {field:?}"),
                )
            })?;
            temps.push(value);
            count += 1;
        }
        match width {
            None => width = Some(count),
            Some(w) if w != count => {
                return Err(Error::parse(
                    path,
                    format!("line {}", lineno + 1),
                    format!("expected {w} fields, found {count}"),
                ))
            }
            Some(_) => {}
        }
        height += 1;
    }
    let width = width.ok_or_else(|| Error::parse(path, "line 1", "file has no rows"))?;
    ThermalImage::from_raw(width, height, temps)
}

/// Quantized sample for temperature `t`, clamped to the representable range.
pub fn quantize(t: f64, t_min: f64, t_max: f64) -> u16 {
    let q = ((t - t_min) / (t_max - t_min) * PGM_MAXVAL as f64).round();
    q.clamp(0.0, PGM_MAXVAL as f64) as u16
}

pub fn dequantize(v: u16, t_min: f64, t_max: f64) -> f64 {
    t_min + (t_max - t_min) * (v as f64 / PGM_MAXVAL as f64)
}

pub fn encode_pgm16(img: &ThermalImage, t_min: f64, t_max: f64) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{}\n", img.width(), img.height(), PGM_MAXVAL).into_bytes();
    out.reserve(img.temps().len() * 2);
    for &t in img.temps() {
        out.extend_from_slice(&quantize(t, t_min, t_max).to_be_bytes());
    }
    out
}

pub fn parse_pgm16(path: &Path, bytes: &[u8], t_min: f64, t_max: f64) -> Result<ThermalImage> {
    let mut pos = 0;
    let magic = header_token(path, bytes, &mut pos)?;
    if magic != "P5" {
        return Err(Error::parse(path, "byte 0", format!("expected P5 magic, found {magic:?}")));
    }
    let mut number = |what: &str| -> Result<usize> {
        let start = pos;
        let tok = header_token(path, bytes, &mut pos)?;
        tok.parse::<usize>()
            .map_err(|_| Error::parse(path, format!("byte {start}"), format!("invalid {what} {tok:?}")))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if maxval != PGM_MAXVAL as usize {
        return Err(Error::parse(
            path,
            "header",
            format!("expected maxval {PGM_MAXVAL}, found {maxval}"),
        ));
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let needed = width * height * 2;
    let raster = bytes.get(pos..pos + needed).ok_or_else(|| {
        Error::parse(
            path,
            format!("byte {pos}"),
            format!("raster truncated: need {needed} bytes, have {}", bytes.len().saturating_sub(pos)),
        )
    })?;
    let temps = raster
        .chunks_exact(2)
        .map(|b| dequantize(u16::from_be_bytes([b[0], b[1]]), t_min, t_max))
        .collect();
    ThermalImage::from_raw(width, height, temps)
}

/// Next whitespace-delimited header token, skipping `#` comments.
fn header_token<'a>(path: &Path, bytes: &'a [u8], pos: &mut usize) -> Result<&'a str> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::parse(path, format!("byte {start}"), "unexpected end of header"));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .map_err(|_| Error::parse(path, format!("byte {start}"), "non-ASCII header"))
}
