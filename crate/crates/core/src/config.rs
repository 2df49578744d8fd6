use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What to do at pixels where every frame has zero activity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroWeightPolicy {
    /// Average all frames equally.
    #[default]
    UniformFallback,
    /// Give the whole weight to the lowest-index frame.
    MaxActivityWinner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FusionConfig {
    /// Side of the square activity window, in pixels. Odd, at least 3.
    pub window: usize,
    /// Frames kept around each peak of the activity curve, peak included.
    pub frames_per_peak: usize,
    /// Minimum distance, in frames, between two accepted peaks.
    pub peak_min_separation: usize,
    /// Peaks below this fraction of the curve's global maximum are dropped.
    pub peak_threshold_frac: f64,
    pub zero_weight_policy: ZeroWeightPolicy,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            window: 5,
            frames_per_peak: 4,
            peak_min_separation: 8,
            peak_threshold_frac: 0.10,
            zero_weight_policy: ZeroWeightPolicy::UniformFallback,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "window must be odd and at least 3, got {}",
                self.window
            )));
        }
        if self.frames_per_peak == 0 {
            return Err(Error::InvalidConfig("frames_per_peak must be at least 1".into()));
        }
        if self.peak_min_separation == 0 {
            return Err(Error::InvalidConfig(
                "peak_min_separation must be at least 1".into(),
            ));
        }
        if !(self.peak_threshold_frac > 0.0 && self.peak_threshold_frac <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "peak_threshold_frac must lie in (0, 1], got {}",
                self.peak_threshold_frac
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = FusionConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.window, 5);
        assert_eq!(cfg.frames_per_peak, 4);
    }

    #[test]
    fn rejects_even_or_small_windows() {
        for window in [0, 1, 2, 4, 6] {
            let cfg = FusionConfig {
                window,
                ..Default::default()
            };
            assert!(cfg.validate().is_err(), "window {window}");
        }
        let cfg = FusionConfig {
            peak_threshold_frac: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = FusionConfig {
            frames_per_peak: 0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
