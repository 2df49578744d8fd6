//! Frame pre-selection from the per-frame maximum activity.
//!
//! Fully blurred frames have near-zero activity everywhere, so their
//! maximum activity is small. Peaks of the curve mark frames where some
//! object is in focus; only frames near those peaks are kept.

use serde::{Deserialize, Serialize};

use crate::activity::ActivityMap;
use crate::config::FusionConfig;
use crate::error::{Error, Result};

/// Maximum activity of each frame, index-aligned with the stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityCurve {
    values: Vec<f64>,
}

impl ActivityCurve {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidImage(
                "activity curve entries must be finite and non-negative".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of the global maximum, lowest index on ties.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &v) in self.values.iter().enumerate() {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        best.map(|(i, _)| i)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Sorted ascending.
    pub peak_indices: Vec<usize>,
    /// Sorted ascending, never empty.
    pub selected_indices: Vec<usize>,
}

impl SelectionResult {
    /// Selection that keeps every frame of an `n`-frame stack.
    pub fn all(n: usize, peak_indices: Vec<usize>) -> Self {
        Self {
            peak_indices,
            selected_indices: (0..n).collect(),
        }
    }
}

pub fn max_activity_curve(maps: &[ActivityMap]) -> Result<ActivityCurve> {
    let first = maps.first().ok_or(Error::EmptyStack)?;
    if let Some(bad) = maps.iter().find(|m| m.dims() != first.dims()) {
        return Err(Error::DimensionMismatch {
            expected: first.dims(),
            found: bad.dims(),
        });
    }
    ActivityCurve::new(maps.iter().map(ActivityMap::max_value).collect())
}

/// Local maxima of the curve that survive the relative threshold and the
/// minimum-separation suppression. Returned sorted ascending.
///
/// A plateau counts as one candidate located at its leftmost index; values
/// beyond either end of the curve are treated as lower than any entry.
/// Candidates are accepted greedily by descending value (lower index first
/// on ties) and each must be at least `peak_min_separation` frames from
/// every peak accepted before it.
pub fn find_peaks(curve: &ActivityCurve, cfg: &FusionConfig) -> Vec<usize> {
    let v = curve.values();
    let global_max = v.iter().copied().fold(0.0, f64::max);
    if global_max <= 0.0 {
        return Vec::new();
    }
    let threshold = cfg.peak_threshold_frac * global_max;

    let mut candidates = Vec::new();
    let mut start = 0;
    while start < v.len() {
        let mut end = start;
        while end + 1 < v.len() && v[end + 1] == v[start] {
            end += 1;
        }
        let rises = start == 0 || v[start - 1] < v[start];
        let falls = end + 1 == v.len() || v[end + 1] < v[start];
        if rises && falls && v[start] > 0.0 && v[start] >= threshold {
            candidates.push(start);
        }
        start = end + 1;
    }

    candidates.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
    let mut accepted: Vec<usize> = Vec::new();
    for c in candidates {
        if accepted.iter().all(|&p| p.abs_diff(c) >= cfg.peak_min_separation) {
            accepted.push(c);
        }
    }
    accepted.sort_unstable();
    accepted
}

/// The `count` indices in `0..len` closest to `peak`, ordered by
/// `(distance, index)`.
pub fn frames_around(peak: usize, count: usize, len: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(count.min(len));
    out.push(peak);
    let mut d = 1;
    while out.len() < count.min(len) {
        if d <= peak {
            out.push(peak - d);
        }
        if out.len() < count && peak + d < len {
            out.push(peak + d);
        }
        d += 1;
    }
    out
}

pub fn select_frames(curve: &ActivityCurve, cfg: &FusionConfig) -> SelectionResult {
    let peak_indices = find_peaks(curve, cfg);
    let mut selected: Vec<usize> = peak_indices
        .iter()
        .flat_map(|&p| frames_around(p, cfg.frames_per_peak, curve.len()))
        .collect();
    if selected.is_empty() {
        selected.extend(curve.argmax());
    }
    selected.sort_unstable();
    selected.dedup();
    SelectionResult {
        peak_indices,
        selected_indices: selected,
    }
}
