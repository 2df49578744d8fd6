//! Synthetic focal stacks with known ground truth.
//!
//! Each object is a flat-temperature shape that is sharp at its own focus
//! frame. In frame `i` it is blurred by a uniform disc whose radius grows
//! linearly with `|i - focus_index|`. The background is uniform; uneven
//! backgrounds are modelled as large objects with a far focus index.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{FocalStack, ThermalImage};
use crate::metrics::ProbePoint;

/// Noise standard deviation used when a scene does not set one, in °C.
pub const DEFAULT_NOISE_STD: f64 = 0.02;

/// Sub-pixel samples per axis when estimating partial disc coverage.
const COVERAGE_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// Pixels whose center lies within `radius` of `(cx, cy)`.
    Disc { cx: f64, cy: f64, radius: f64 },
    /// Pixels with `x <= px < x + width` and `y <= py < y + height`.
    Rect {
        x: f64,
        y: f64,
        width: f64,
        height: f64,
    },
}

impl Shape {
    pub fn contains(&self, px: usize, py: usize) -> bool {
        let (px, py) = (px as f64, py as f64);
        match *self {
            Shape::Disc { cx, cy, radius } => {
                let (dx, dy) = (px - cx, py - cy);
                dx * dx + dy * dy <= radius * radius
            }
            Shape::Rect {
                x,
                y,
                width,
                height,
            } => px >= x && px < x + width && py >= y && py < y + height,
        }
    }
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub shape: Shape,
    /// °C
    pub temp: f64,
    /// Frame in which the object is rendered sharp.
    pub focus_index: usize,
    /// Whether a probe is placed at the object's centroid.
    #[serde(default = "default_true")]
    pub probe: bool,
}

fn default_noise() -> f64 {
    DEFAULT_NOISE_STD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub background_temp: f64,
    /// Painted in order; later objects cover earlier ones.
    pub objects: Vec<SceneObject>,
    pub frames: usize,
    /// Blur radius growth, in pixels per frame of defocus.
    pub blur_slope: f64,
    /// Standard deviation of additive Gaussian noise, °C.
    #[serde(default = "default_noise")]
    pub noise_std: f64,
    /// Blur radius of an in-focus object, in pixels. Zero renders the focus
    /// frame exactly sharp.
    #[serde(default)]
    pub psf_radius: f64,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScene(msg));
        if self.width == 0 || self.height == 0 {
            return bad(format!("dimensions must be positive, got {}x{}", self.width, self.height));
        }
        if self.frames == 0 {
            return bad("frame count must be positive".into());
        }
        if !(self.blur_slope.is_finite() && self.blur_slope >= 0.0) {
            return bad(format!("blur_slope must be finite and >= 0, got {}", self.blur_slope));
        }
        if !(self.psf_radius.is_finite() && self.psf_radius >= 0.0) {
            return bad(format!("psf_radius must be finite and >= 0, got {}", self.psf_radius));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return bad(format!("noise_std must be finite and >= 0, got {}", self.noise_std));
        }
        if !self.background_temp.is_finite() {
            return bad("background_temp must be finite".into());
        }
        for (i, obj) in self.objects.iter().enumerate() {
            if !obj.temp.is_finite() {
                return bad(format!("object {i}: temperature must be finite"));
            }
            if obj.focus_index >= self.frames {
                return bad(format!(
                    "object {i}: focus_index {} outside 0..{}",
                    obj.focus_index, self.frames
                ));
            }
            let shape_ok = match obj.shape {
                Shape::Disc { cx, cy, radius } => {
                    cx.is_finite() && cy.is_finite() && radius.is_finite() && radius >= 0.0
                }
                Shape::Rect {
                    x,
                    y,
                    width,
                    height,
                } => x.is_finite() && y.is_finite() && width > 0.0 && height > 0.0,
            };
            if !shape_ok {
                return bad(format!("object {i}: malformed shape"));
            }
            if self.pixels_of(&obj.shape).next().is_none() {
                return bad(format!("object {i}: shape covers no pixel"));
            }
        }
        Ok(())
    }

    fn pixels_of<'a>(&'a self, shape: &'a Shape) -> impl Iterator<Item = (usize, usize)> + 'a {
        (0..self.height).flat_map(move |y| {
            (0..self.width)
                .filter(move |&x| shape.contains(x, y))
                .map(move |x| (x, y))
        })
    }

    /// Blur radius of object `obj` in frame `frame`.
    pub fn blur_radius(&self, obj: &SceneObject, frame: usize) -> f64 {
        self.defocus_radius(frame.abs_diff(obj.focus_index))
    }

    /// Defocus and in-focus blur add in quadrature.
    fn defocus_radius(&self, distance: usize) -> f64 {
        (self.blur_slope * distance as f64).hypot(self.psf_radius)
    }
}

/// A normalized, symmetric convolution kernel on a `(2r+1)²` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscKernel {
    radius: usize,
    weights: Vec<f64>,
}

impl DiscKernel {
    /// Uniform disc of the given radius, with partially covered pixels
    /// weighted by their covered area. Radii below half a pixel give the
    /// identity kernel.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn new(radius: f64) -> Self {
        if !(radius >= 0.5) {
            return Self {
                radius: 0,
                weights: vec![1.0],
            };
        }
        let r = (radius + 0.5).ceil() as usize;
        let side = 2 * r + 1;
        let r2 = radius * radius;
        let mut weights = Vec::with_capacity(side * side);
        for dy in -(r as isize)..=(r as isize) {
            for dx in -(r as isize)..=(r as isize) {
                weights.push(pixel_coverage(dx as f64, dy as f64, radius, r2));
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Self { radius: r, weights }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn is_identity(&self) -> bool {
        self.radius == 0
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, dx: isize, dy: isize) -> f64 {
        let r = self.radius as isize;
        let side = 2 * r + 1;
        self.weights[((dy + r) * side + dx + r) as usize]
    }

    /// Each kernel row as runs `(dx_start, dx_end, weight)` of equal weight,
    /// zero runs dropped.
    fn row_runs(&self) -> Vec<Vec<(isize, isize, f64)>> {
        let r = self.radius as isize;
        (-r..=r)
            .map(|dy| {
                let mut runs: Vec<(isize, isize, f64)> = Vec::new();
                for dx in -r..=r {
                    let w = self.weight(dx, dy);
                    if w == 0.0 {
                        continue;
                    }
                    match runs.last_mut() {
                        Some(last) if last.2 == w && last.1 + 1 == dx => last.1 = dx,
                        _ => runs.push((dx, dx, w)),
                    }
                }
                runs
            })
            .collect()
    }
}

/// Fraction of the unit pixel centred at `(cx, cy)` inside the disc.
fn pixel_coverage(cx: f64, cy: f64, radius: f64, r2: f64) -> f64 {
    // Nearest and farthest points of the pixel square from the origin.
    let near = |c: f64| (c.abs() - 0.5).max(0.0);
    let far = |c: f64| c.abs() + 0.5;
    if near(cx).powi(2) + near(cy).powi(2) > r2 {
        return 0.0;
    }
    if far(cx).powi(2) + far(cy).powi(2) <= r2 {
        return 1.0;
    }
    let n = COVERAGE_SAMPLES;
    let step = 1.0 / n as f64;
    let mut inside = 0usize;
    for sy in 0..n {
        let y = cy - 0.5 + (sy as f64 + 0.5) * step;
        for sx in 0..n {
            let x = cx - 0.5 + (sx as f64 + 0.5) * step;
            if x * x + y * y <= radius * radius {
                inside += 1;
            }
        }
    }
    inside as f64 / (n * n) as f64
}

/// A single object's contribution above background, nonzero only inside
/// `bbox` (inclusive pixel bounds).
struct Layer {
    values: Vec<f64>,
    bbox: (usize, usize, usize, usize),
}

/// Convolves `layer` with `kernel` using replicate padding, accumulating the
/// result into `out`.
fn blur_into(layer: &Layer, width: usize, height: usize, kernel: &DiscKernel, out: &mut [f64]) {
    let (x0, y0, x1, y1) = layer.bbox;
    if kernel.is_identity() {
        for y in y0..=y1 {
            for x in x0..=x1 {
                out[y * width + x] += layer.values[y * width + x];
            }
        }
        return;
    }
    let r = kernel.radius();
    let pw = width + 2 * r;
    let ph = height + 2 * r;
    // Row prefix sums of the padded layer: prefix[py][k] = Σ_{j<k} padded[py][j].
    let mut prefix = vec![0.0; ph * (pw + 1)];
    let py0 = y0;
    let py1 = y1 + 2 * r;
    for py in py0..=py1.min(ph - 1) {
        let y = py.saturating_sub(r).min(height - 1);
        let row = &mut prefix[py * (pw + 1)..(py + 1) * (pw + 1)];
        let mut acc = 0.0;
        for px in 0..pw {
            let x = px.saturating_sub(r).min(width - 1);
            acc += layer.values[y * width + x];
            row[px + 1] = acc;
        }
    }
    let runs = kernel.row_runs();
    let ox0 = x0.saturating_sub(r);
    let ox1 = (x1 + r).min(width - 1);
    let oy0 = y0.saturating_sub(r);
    let oy1 = (y1 + r).min(height - 1);
    for y in oy0..=oy1 {
        for x in ox0..=ox1 {
            let mut acc = 0.0;
            for (ky, row_runs) in runs.iter().enumerate() {
                // Padded row of source row y + ky - r.
                let prow = &prefix[(y + ky) * (pw + 1)..(y + ky + 1) * (pw + 1)];
                for &(a, b, w) in row_runs {
                    let lo = (x as isize + a + r as isize) as usize;
                    let hi = (x as isize + b + r as isize) as usize + 1;
                    acc += w * (prow[hi] - prow[lo]);
                }
            }
            out[y * width + x] += acc;
        }
    }
}

/// Generated stack with its ground truth and object probes.
#[derive(Debug, Clone)]
pub struct SimulatedStack {
    pub stack: FocalStack,
    pub ground_truth: ThermalImage,
    pub probes: Vec<ProbePoint>,
}

/// Renders `scene` into a focal stack. Frames are independent of each other
/// and of the worker count: frame `i` draws its noise from stream `i` of a
/// generator seeded with `seed`.
pub fn simulate_stack(scene: &SceneSpec, seed: u64) -> Result<SimulatedStack> {
    scene.validate()?;
    let (width, height) = (scene.width, scene.height);

    let mut owner: Vec<Option<usize>> = vec![None; width * height];
    for (i, obj) in scene.objects.iter().enumerate() {
        for (x, y) in scene.pixels_of(&obj.shape) {
            owner[y * width + x] = Some(i);
        }
    }

    let mut layers = Vec::with_capacity(scene.objects.len());
    for (i, obj) in scene.objects.iter().enumerate() {
        let mut values = vec![0.0; width * height];
        let mut bbox = (usize::MAX, usize::MAX, 0, 0);
        for (p, o) in owner.iter().enumerate() {
            if *o == Some(i) {
                let (x, y) = (p % width, p / width);
                values[p] = obj.temp - scene.background_temp;
                bbox = (bbox.0.min(x), bbox.1.min(y), bbox.2.max(x), bbox.3.max(y));
            }
        }
        // Fully covered by later objects: nothing to render.
        if bbox.0 == usize::MAX {
            bbox = (0, 0, 0, 0);
        }
        layers.push(Layer { values, bbox });
    }

    let render = |kernels: &[&DiscKernel]| -> Vec<f64> {
        let mut acc = vec![0.0; width * height];
        for (layer, kernel) in layers.iter().zip(kernels) {
            blur_into(layer, width, height, kernel, &mut acc);
        }
        acc.iter().map(|v| scene.background_temp + v).collect()
    };

    let identity = DiscKernel::new(0.0);
    let ground_truth = ThermalImage::new(width, height, render(&vec![&identity; layers.len()]))?;

    // One kernel per distinct defocus distance.
    let mut kernels: HashMap<usize, DiscKernel> = HashMap::new();
    for obj in &scene.objects {
        for frame in 0..scene.frames {
            let d = frame.abs_diff(obj.focus_index);
            kernels
                .entry(d)
                .or_insert_with(|| DiscKernel::new(scene.defocus_radius(d)));
        }
    }

    let noise = if scene.noise_std > 0.0 {
        Some(Normal::new(0.0, scene.noise_std).map_err(|e| Error::InvalidScene(e.to_string()))?)
    } else {
        None
    };

    let frames: Vec<ThermalImage> = (0..scene.frames)
        .into_par_iter()
        .map(|frame| {
            let frame_kernels: Vec<&DiscKernel> = scene
                .objects
                .iter()
                .map(|obj| &kernels[&frame.abs_diff(obj.focus_index)])
                .collect();
            let mut temps = render(&frame_kernels);
            if let Some(noise) = &noise {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(frame as u64);
                temps.iter_mut().for_each(|t| *t += noise.sample(&mut rng));
            }
            ThermalImage::new(width, height, temps)
        })
        .collect::<Result<_>>()?;

    let probes = scene
        .objects
        .iter()
        .enumerate()
        .filter(|(_, obj)| obj.probe)
        .filter_map(|(i, obj)| {
            let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
            for (p, o) in owner.iter().enumerate() {
                if *o == Some(i) {
                    sx += (p % width) as f64;
                    sy += (p / width) as f64;
                    n += 1;
                }
            }
            (n > 0).then(|| ProbePoint {
                x: (sx / n as f64).round() as usize,
                y: (sy / n as f64).round() as usize,
                true_temp: obj.temp,
            })
        })
        .collect();

    Ok(SimulatedStack {
        stack: FocalStack::new(frames),
        ground_truth,
        probes,
    })
}
