//! Reference-based fusion quality metrics and probe temperature errors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{FocalStack, ThermalImage};

/// Half-size of the square window scanned around a probe point.
pub const DEFAULT_PROBE_RADIUS: usize = 2;

/// A pixel where the true object temperature is known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePoint {
    pub x: usize,
    pub y: usize,
    pub true_temp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameComparison {
    pub index: usize,
    pub rmse: f64,
    pub cc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub cc: f64,
    pub rmse: f64,
    pub mae: f64,
    pub hte: Option<f64>,
    pub per_frame: Vec<FrameComparison>,
}

impl MetricsReport {
    /// CC, RMSE and MAE of `fused` against `reference`, plus HTE when probes
    /// are given.
    pub fn compute(
        reference: &ThermalImage,
        fused: &ThermalImage,
        probes: Option<&[ProbePoint]>,
    ) -> Result<Self> {
        Ok(Self {
            cc: cross_correlation(reference, fused)?,
            rmse: rmse(reference, fused)?,
            mae: mae(reference, fused)?,
            hte: probes.map(|p| hte(fused, p)).transpose()?,
            per_frame: Vec::new(),
        })
    }
}

fn check_dims(a: &ThermalImage, b: &ThermalImage) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            expected: a.dims(),
            found: b.dims(),
        });
    }
    Ok(())
}

/// `2 ΣRF / (ΣR² + ΣF²)`. No mean subtraction, so this is not Pearson's r.
pub fn cross_correlation(reference: &ThermalImage, fused: &ThermalImage) -> Result<f64> {
    check_dims(reference, fused)?;
    let mut cross = 0.0;
    let mut rr = 0.0;
    let mut ff = 0.0;
    for (&r, &f) in reference.temps().iter().zip(fused.temps()) {
        cross += r * f;
        rr += r * r;
        ff += f * f;
    }
    let denom = rr + ff;
    if denom == 0.0 {
        return Err(Error::DegenerateInput("both images are identically zero"));
    }
    Ok(2.0 * cross / denom)
}

pub fn rmse(reference: &ThermalImage, fused: &ThermalImage) -> Result<f64> {
    check_dims(reference, fused)?;
    let n = reference.temps().len() as f64;
    let sq: f64 = reference
        .temps()
        .iter()
        .zip(fused.temps())
        .map(|(r, f)| (r - f) * (r - f))
        .sum();
    Ok((sq / n).sqrt())
}

pub fn mae(reference: &ThermalImage, fused: &ThermalImage) -> Result<f64> {
    check_dims(reference, fused)?;
    let n = reference.temps().len() as f64;
    let abs: f64 = reference
        .temps()
        .iter()
        .zip(fused.temps())
        .map(|(r, f)| (r - f).abs())
        .sum();
    Ok(abs / n)
}

/// Maximum temperature in the `(2r+1)²` window around the probe, clipped to
/// the image.
pub fn probe_reading(image: &ThermalImage, probe: &ProbePoint, radius: usize) -> Result<f64> {
    let (width, height) = image.dims();
    if probe.x >= width || probe.y >= height {
        return Err(Error::ProbeOutOfBounds {
            x: probe.x,
            y: probe.y,
            width,
            height,
        });
    }
    let x0 = probe.x.saturating_sub(radius);
    let x1 = (probe.x + radius).min(width - 1);
    let y0 = probe.y.saturating_sub(radius);
    let y1 = (probe.y + radius).min(height - 1);
    let mut best = f64::NEG_INFINITY;
    for y in y0..=y1 {
        for x in x0..=x1 {
            best = best.max(image.get(x, y));
        }
    }
    Ok(best)
}

/// Absolute temperature error at one probe.
pub fn probe_error(image: &ThermalImage, probe: &ProbePoint, radius: usize) -> Result<f64> {
    Ok((probe_reading(image, probe, radius)? - probe.true_temp).abs())
}

/// Mean absolute probe error, with the default readout radius.
pub fn hte(image: &ThermalImage, probes: &[ProbePoint]) -> Result<f64> {
    hte_with_radius(image, probes, DEFAULT_PROBE_RADIUS)
}

pub fn hte_with_radius(image: &ThermalImage, probes: &[ProbePoint], radius: usize) -> Result<f64> {
    if probes.is_empty() {
        return Err(Error::DegenerateInput("no probe points"));
    }
    let mut total = 0.0;
    for p in probes {
        total += probe_error(image, p, radius)?;
    }
    Ok(total / probes.len() as f64)
}

/// RMSE and CC of every stack frame against `reference`.
pub fn compare_against_stack(
    stack: &FocalStack,
    reference: &ThermalImage,
) -> Result<Vec<FrameComparison>> {
    stack
        .frames()
        .iter()
        .enumerate()
        .map(|(index, frame)| {
            Ok(FrameComparison {
                index,
                rmse: rmse(reference, frame)?,
                cc: cross_correlation(reference, frame)?,
            })
        })
        .collect()
}
