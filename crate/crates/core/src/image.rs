//! Radiometric images and focal stacks.
//!
//! Pixel values are physical temperatures in degrees Celsius. Quantization
//! only happens at the file-format boundary (see [`crate::io`]).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A row-major grid of temperatures.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalImage {
    width: usize,
    height: usize,
    temps: Vec<f64>,
}

impl ThermalImage {
    /// Builds an image, rejecting bad dimensions and non-finite pixels.
    pub fn new(width: usize, height: usize, temps: Vec<f64>) -> Result<Self> {
        let img = Self::from_raw(width, height, temps)?;
        if let Some(i) = img.temps.iter().position(|t| !t.is_finite()) {
            return Err(Error::InvalidImage(format!(
                "non-finite value at ({}, {})",
                i % width,
                i / width
            )));
        }
        Ok(img)
    }

    /// Builds an image checking only the shape. Finiteness is left to
    /// [`validate_stack`], so ingested data can be reported on rather than
    /// rejected outright.
    pub fn from_raw(width: usize, height: usize, temps: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if temps.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{width}x{height} image needs {} values, got {}",
                width * height,
                temps.len()
            )));
        }
        Ok(Self {
            width,
            height,
            temps,
        })
    }

    pub fn filled(width: usize, height: usize, temp: f64) -> Result<Self> {
        Self::new(width, height, vec![temp; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut temps = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                temps.push(f(x, y));
            }
        }
        Self::new(width, height, temps)
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

    /// Temperature at column `x`, row `y`.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.temps[y * self.width + x]
    }

    /// Replicate-padded access: coordinates outside the grid are clamped to
    /// the nearest edge pixel.
    #[inline]
    pub(crate) fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    pub fn temps(&self) -> &[f64] {
        &self.temps
    }

    pub fn into_temps(self) -> Vec<f64> {
        self.temps
    }

    pub fn min_temp(&self) -> f64 {
        self.temps.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_temp(&self) -> f64 {
        self.temps.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Returns a new image with `f` applied to every pixel.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.width, self.height, self.temps.iter().map(|&t| f(t)).collect())
    }

    pub(crate) fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.temps
            .iter()
            .position(|t| !t.is_finite())
            .map(|i| (i % self.width, i / self.width))
    }
}

/// An ordered sequence of same-sized frames, one per lens position.
#[derive(Debug, Clone, PartialEq)]
pub struct FocalStack {
    frames: Vec<ThermalImage>,
    lens_positions: Option<Vec<f64>>,
}

impl FocalStack {
    /// Wraps frames without checking them; see [`FocalStack::validated`].
    pub fn new(frames: Vec<ThermalImage>) -> Self {
        Self {
            frames,
            lens_positions: None,
        }
    }

    pub fn with_lens_positions(mut self, positions: Vec<f64>) -> Self {
        self.lens_positions = Some(positions);
        self
    }

    /// Builds a stack and fails unless every invariant holds.
    pub fn validated(frames: Vec<ThermalImage>, lens_positions: Option<Vec<f64>>) -> Result<Self> {
        let stack = Self {
            frames,
            lens_positions,
        };
        validate_stack(&stack).into_result()?;
        Ok(stack)
    }

    pub fn frames(&self) -> &[ThermalImage] {
        &self.frames
    }

    pub fn lens_positions(&self) -> Option<&[f64]> {
        self.lens_positions.as_deref()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Dimensions of the first frame.
    pub fn dims(&self) -> Option<(usize, usize)> {
        self.frames.first().map(ThermalImage::dims)
    }

    /// Keeps only the frames at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            frames: indices.iter().map(|&i| self.frames[i].clone()).collect(),
            lens_positions: self
                .lens_positions
                .as_ref()
                .map(|p| indices.iter().map(|&i| p[i]).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Empty,
    DimensionMismatch {
        frame: usize,
        expected: (usize, usize),
        found: (usize, usize),
    },
    NonFinite {
        frame: usize,
        x: usize,
        y: usize,
    },
    LensPositionCount {
        expected: usize,
        found: usize,
    },
    LensPositionsNotIncreasing {
        index: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "stack has no frames"),
            Violation::DimensionMismatch {
                frame,
                expected,
                found,
            } => write!(
                f,
                "dimension mismatch at frame {frame}: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Violation::NonFinite { frame, x, y } => {
                write!(f, "non-finite temperature at frame {frame}, pixel ({x}, {y})")
            }
            Violation::LensPositionCount { expected, found } => write!(
                f,
                "expected {expected} lens positions, found {found}"
            ),
            Violation::LensPositionsNotIncreasing { index } => {
                write!(f, "lens positions not strictly increasing at index {index}")
            }
        }
    }
}

/// Outcome of [`validate_stack`]. Empty means the stack is valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(Error::Validation(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every stack invariant, reporting each violation with its frame
/// index instead of stopping at the first.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN positions must count as violations
pub fn validate_stack(stack: &FocalStack) -> ValidationReport {
    let mut violations = Vec::new();
    let Some(expected) = stack.dims() else {
        violations.push(Violation::Empty);
        return ValidationReport { violations };
    };
    for (frame, img) in stack.frames.iter().enumerate() {
        if img.dims() != expected {
            violations.push(Violation::DimensionMismatch {
                frame,
                expected,
                found: img.dims(),
            });
        }
        if let Some((x, y)) = img.first_non_finite() {
            violations.push(Violation::NonFinite { frame, x, y });
        }
    }
    if let Some(pos) = &stack.lens_positions {
        if pos.len() != stack.len() {
            violations.push(Violation::LensPositionCount {
                expected: stack.len(),
                found: pos.len(),
            });
        }
        for (index, w) in pos.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                violations.push(Violation::LensPositionsNotIncreasing { index: index + 1 });
            }
        }
    }
    ValidationReport { violations }
}
