//! Per-pixel activity level: energy of Laplacian, then windowed mean times
//! windowed variance of that energy.
//!
//! Both the 3x3 kernel and the activity window use replicate padding at the
//! image border, so the window support is always `w * w` samples.

use rayon::prelude::*;

use crate::config::FusionConfig;
use crate::error::{Error, Result};
use crate::image::{FocalStack, ThermalImage};

/// 3x3 second-derivative kernel, row-major. Weights sum to zero.
pub const LAPLACIAN_KERNEL: [[f64; 3]; 3] = [
    [-1.0, -4.0, -1.0],
    [-4.0, 20.0, -4.0],
    [-1.0, -4.0, -1.0],
];

/// Squared Laplacian response of a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct EolMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

/// Non-negative activity level of a frame, one value per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

macro_rules! grid_accessors {
    ($ty:ty) => {
        impl $ty {
            /// Wraps raw values. Entries must be finite and non-negative.
            pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
                if width == 0 || height == 0 || values.len() != width * height {
                    return Err(Error::InvalidImage(format!(
                        "{width}x{height} grid cannot hold {} values",
                        values.len()
                    )));
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::InvalidImage(
                        "entries must be finite and non-negative".into(),
                    ));
                }
                Ok(Self {
                    width,
                    height,
                    values,
                })
            }

            #[inline]
            pub fn width(&self) -> usize {
                self.width
            }

            #[inline]
            pub fn height(&self) -> usize {
                self.height
            }

            #[inline]
            pub fn dims(&self) -> (usize, usize) {
                (self.width, self.height)
            }

            #[inline]
            pub fn get(&self, x: usize, y: usize) -> f64 {
                self.values[y * self.width + x]
            }

            pub fn values(&self) -> &[f64] {
                &self.values
            }

            pub fn max_value(&self) -> f64 {
                self.values.iter().copied().fold(0.0, f64::max)
            }
        }
    };
}

grid_accessors!(EolMap);
grid_accessors!(ActivityMap);

/// Squared response of [`LAPLACIAN_KERNEL`] at every pixel.
pub fn energy_of_laplacian(img: &ThermalImage) -> EolMap {
    let (width, height) = img.dims();
    let mut values = Vec::with_capacity(width * height);
    for y in 0..height as isize {
        for x in 0..width as isize {
            let mut response = 0.0;
            for (ky, row) in LAPLACIAN_KERNEL.iter().enumerate() {
                for (kx, &k) in row.iter().enumerate() {
                    response += k * img.get_clamped(x + kx as isize - 1, y + ky as isize - 1);
                }
            }
            values.push(response * response);
        }
    }
    EolMap {
        width,
        height,
        values,
    }
}

/// Windowed mean times windowed population variance of an EOL map.
///
/// `window` must be odd, at least 3, and no larger than either dimension.
pub fn windowed_activity(eol: &EolMap, window: usize) -> Result<ActivityMap> {
    if window < 3 || window.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!(
            "window must be odd and at least 3, got {window}"
        )));
    }
    let (width, height) = eol.dims();
    if window > width || window > height {
        return Err(Error::WindowTooLarge {
            window,
            width,
            height,
        });
    }
    let r = window / 2;
    let padded = pad_replicate(eol, r);
    let pw = width + 2 * r;
    let n = (window * window) as f64;

    let mut values = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            // Window rows y..y+window in padded coordinates are centered on y.
            let rows = (y..y + window).map(|py| &padded[py * pw + x..py * pw + x + window]);
            // Shift by one sample so a constant window gives exactly zero
            // variance and an exact mean.
            let pivot = padded[y * pw + x];
            let mut shifted_sum = 0.0;
            for row in rows.clone() {
                for &v in row {
                    shifted_sum += v - pivot;
                }
            }
            let mean = pivot + shifted_sum / n;
            let mut sq = 0.0;
            for row in rows {
                for &v in row {
                    let d = v - mean;
                    sq += d * d;
                }
            }
            let variance = sq / n;
            values.push((mean * variance).max(0.0));
        }
    }
    Ok(ActivityMap {
        width,
        height,
        values,
    })
}

fn pad_replicate(eol: &EolMap, r: usize) -> Vec<f64> {
    let (w, h) = eol.dims();
    let pw = w + 2 * r;
    let ph = h + 2 * r;
    let mut out = Vec::with_capacity(pw * ph);
    for py in 0..ph {
        let y = py.saturating_sub(r).min(h - 1);
        for px in 0..pw {
            let x = px.saturating_sub(r).min(w - 1);
            out.push(eol.get(x, y));
        }
    }
    out
}

/// Activity level of a single frame.
pub fn compute_activity(img: &ThermalImage, cfg: &FusionConfig) -> Result<ActivityMap> {
    cfg.validate()?;
    let (width, height) = img.dims();
    if cfg.window > width || cfg.window > height {
        return Err(Error::WindowTooLarge {
            window: cfg.window,
            width,
            height,
        });
    }
    windowed_activity(&energy_of_laplacian(img), cfg.window)
}

/// Activity maps for every frame of a stack, computed in parallel on the
/// current rayon pool. Output order matches frame order.
pub fn stack_activity(stack: &FocalStack, cfg: &FusionConfig) -> Result<Vec<ActivityMap>> {
    if stack.is_empty() {
        return Err(Error::EmptyStack);
    }
    stack
        .frames()
        .par_iter()
        .map(|frame| compute_activity(frame, cfg))
        .collect()
}
