//! Pixel-level weighted averaging of frames by normalized activity.

use crate::activity::{stack_activity, ActivityMap};
use crate::config::{FusionConfig, ZeroWeightPolicy};
use crate::error::{Error, Result};
use crate::image::{validate_stack, FocalStack, ThermalImage};
use crate::select::{max_activity_curve, select_frames, ActivityCurve, SelectionResult};

/// Per-frame weights; at every pixel they sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightField {
    width: usize,
    height: usize,
    weights: Vec<Vec<f64>>,
}

impl WeightField {
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn frame_count(&self) -> usize {
        self.weights.len()
    }

    /// Row-major weights of frame `i`.
    pub fn frame(&self, i: usize) -> &[f64] {
        &self.weights[i]
    }

    pub fn get(&self, frame: usize, x: usize, y: usize) -> f64 {
        self.weights[frame][y * self.width + x]
    }
}

pub fn normalize_weights(maps: &[ActivityMap], policy: ZeroWeightPolicy) -> Result<WeightField> {
    let first = maps.first().ok_or(Error::EmptyStack)?;
    let (width, height) = first.dims();
    if let Some(bad) = maps.iter().find(|m| m.dims() != (width, height)) {
        return Err(Error::DimensionMismatch {
            expected: (width, height),
            found: bad.dims(),
        });
    }
    let n = maps.len();
    let mut weights = vec![vec![0.0; width * height]; n];
    for p in 0..width * height {
        let total: f64 = maps.iter().map(|m| m.values()[p]).sum();
        if total > 0.0 {
            for (w, m) in weights.iter_mut().zip(maps) {
                w[p] = m.values()[p] / total;
            }
        } else {
            match policy {
                ZeroWeightPolicy::UniformFallback => {
                    let u = 1.0 / n as f64;
                    weights.iter_mut().for_each(|w| w[p] = u);
                }
                ZeroWeightPolicy::MaxActivityWinner => weights[0][p] = 1.0,
            }
        }
    }
    Ok(WeightField {
        width,
        height,
        weights,
    })
}

/// Weighted sum of `frames`. The result is clamped to the per-pixel range
/// of the inputs so rounding can never push it outside the convex hull.
pub fn fuse_stack(frames: &[ThermalImage], weights: &WeightField) -> Result<ThermalImage> {
    let first = frames.first().ok_or(Error::EmptyStack)?;
    let dims = first.dims();
    if let Some(bad) = frames.iter().find(|f| f.dims() != dims) {
        return Err(Error::DimensionMismatch {
            expected: dims,
            found: bad.dims(),
        });
    }
    if weights.dims() != dims {
        return Err(Error::DimensionMismatch {
            expected: dims,
            found: weights.dims(),
        });
    }
    if weights.frame_count() != frames.len() {
        return Err(Error::DimensionMismatch {
            expected: (frames.len(), 1),
            found: (weights.frame_count(), 1),
        });
    }
    let (width, height) = dims;
    let mut out = Vec::with_capacity(width * height);
    for p in 0..width * height {
        let mut acc = 0.0;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, frame) in frames.iter().enumerate() {
            let t = frame.temps()[p];
            acc += weights.frame(i)[p] * t;
            lo = lo.min(t);
            hi = hi.max(t);
        }
        out.push(acc.clamp(lo, hi));
    }
    ThermalImage::new(width, height, out)
}

/// Fused image plus the diagnostics that produced it.
#[derive(Debug, Clone)]
pub struct FusionOutcome {
    pub fused: ThermalImage,
    /// With pre-selection off, every frame is listed as selected.
    pub selection: SelectionResult,
    pub curve: ActivityCurve,
}

/// Activity for every frame, optional pre-selection, then weighted fusion.
pub fn fuse_pipeline(stack: &FocalStack, cfg: &FusionConfig, preselect: bool) -> Result<FusionOutcome> {
    if stack.is_empty() {
        return Err(Error::EmptyStack);
    }
    validate_stack(stack).into_result()?;
    cfg.validate()?;

    let maps = stack_activity(stack, cfg)?;
    let curve = max_activity_curve(&maps)?;
    let selection = if preselect {
        select_frames(&curve, cfg)
    } else {
        let peaks = select_frames(&curve, cfg).peak_indices;
        SelectionResult::all(stack.len(), peaks)
    };

    let chosen_maps: Vec<ActivityMap> = selection
        .selected_indices
        .iter()
        .map(|&i| maps[i].clone())
        .collect();
    let chosen_frames: Vec<ThermalImage> = selection
        .selected_indices
        .iter()
        .map(|&i| stack.frames()[i].clone())
        .collect();
    let weights = normalize_weights(&chosen_maps, cfg.zero_weight_policy)?;
    let fused = fuse_stack(&chosen_frames, &weights)?;
    Ok(FusionOutcome {
        fused,
        selection,
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map1(v: f64) -> ActivityMap {
        ActivityMap::new(1, 1, vec![v]).unwrap()
    }

    #[test]
    fn equal_activity_splits_evenly() {
        let w = normalize_weights(&[map1(3.0), map1(3.0)], Default::default()).unwrap();
        assert_eq!((w.get(0, 0, 0), w.get(1, 0, 0)), (0.5, 0.5));
    }

    #[test]
    fn proportional_weights() {
        let w = normalize_weights(&[map1(1.0), map1(3.0)], Default::default()).unwrap();
        assert_eq!((w.get(0, 0, 0), w.get(1, 0, 0)), (0.25, 0.75));
    }

    #[test]
    fn zero_activity_policies() {
        let maps = [map1(0.0), map1(0.0), map1(0.0)];
        let w = normalize_weights(&maps, ZeroWeightPolicy::UniformFallback).unwrap();
        for i in 0..3 {
            assert_eq!(w.get(i, 0, 0), 1.0 / 3.0);
        }
        let w = normalize_weights(&maps, ZeroWeightPolicy::MaxActivityWinner).unwrap();
        assert_eq!(
            (w.get(0, 0, 0), w.get(1, 0, 0), w.get(2, 0, 0)),
            (1.0, 0.0, 0.0)
        );
        assert!(matches!(
            normalize_weights(&[], ZeroWeightPolicy::UniformFallback),
            Err(Error::EmptyStack)
        ));
    }

    #[test]
    fn weighted_pixel() {
        let frames = [
            ThermalImage::filled(1, 1, 40.0).unwrap(),
            ThermalImage::filled(1, 1, 44.0).unwrap(),
        ];
        let w = normalize_weights(&[map1(1.0), map1(3.0)], Default::default()).unwrap();
        assert_eq!(fuse_stack(&frames, &w).unwrap().get(0, 0), 43.0);
    }

    #[test]
    fn identical_frames_pass_through() {
        let img = ThermalImage::from_fn(3, 2, |x, y| 20.0 + x as f64 * 0.1 + y as f64).unwrap();
        let frames = vec![img.clone(); 3];
        let maps: Vec<_> = [0.2, 5.0, 1e-3]
            .iter()
            .map(|&v| ActivityMap::new(3, 2, vec![v; 6]).unwrap())
            .collect();
        let w = normalize_weights(&maps, Default::default()).unwrap();
        assert_eq!(fuse_stack(&frames, &w).unwrap(), img);
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let frames = [
            ThermalImage::filled(2, 2, 1.0).unwrap(),
            ThermalImage::filled(2, 3, 1.0).unwrap(),
        ];
        let maps = vec![ActivityMap::new(2, 2, vec![1.0; 4]).unwrap(); 2];
        let w = normalize_weights(&maps, Default::default()).unwrap();
        assert!(matches!(
            fuse_stack(&frames, &w),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn single_frame_pipeline_is_identity() {
        let img = ThermalImage::from_fn(6, 6, |x, y| ((x * 7 + y * 3) % 5) as f64 + 20.0).unwrap();
        let stack = FocalStack::new(vec![img.clone()]);
        for preselect in [true, false] {
            let out = fuse_pipeline(&stack, &FusionConfig::default(), preselect).unwrap();
            assert_eq!(out.fused, img);
            assert_eq!(out.selection.selected_indices, vec![0]);
        }
    }

    #[test]
    fn constant_stack_pipeline() {
        let img = ThermalImage::filled(8, 8, 33.3).unwrap();
        let stack = FocalStack::new(vec![img.clone(); 5]);
        for preselect in [true, false] {
            let out = fuse_pipeline(&stack, &FusionConfig::default(), preselect).unwrap();
            assert_eq!(out.fused, img);
        }
    }

    #[test]
    fn pipeline_propagates_errors() {
        let stack = FocalStack::new(vec![ThermalImage::filled(3, 3, 1.0).unwrap()]);
        assert!(matches!(
            fuse_pipeline(&stack, &FusionConfig::default(), true),
            Err(Error::WindowTooLarge { .. })
        ));
        assert!(matches!(
            fuse_pipeline(&FocalStack::new(vec![]), &FusionConfig::default(), true),
            Err(Error::EmptyStack)
        ));
    }
}
