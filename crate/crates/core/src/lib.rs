//! Multi-focus fusion of radiometric thermal focal stacks.
//!
//! The pipeline measures a per-pixel activity level on every frame (energy
//! of Laplacian, then windowed mean times windowed variance), keeps only the
//! frames near peaks of the per-frame maximum activity, and averages those
//! frames with per-pixel weights proportional to activity.
//!
//! ```
//! use thermfuse_core::{fuse_pipeline, preset, simulate_stack, rmse, FusionConfig};
//!
//! let scene = preset("set5_bulbs_no_holders").unwrap();
//! let sim = simulate_stack(&scene, 7)?;
//! let out = fuse_pipeline(&sim.stack, &FusionConfig::default(), true)?;
//! assert_eq!(out.selection.peak_indices.len(), 2);
//! assert!(rmse(&sim.ground_truth, &out.fused)? < 1.0);
//! # Ok::<(), thermfuse_core::Error>(())
//! ```

pub mod activity;
pub mod config;
pub mod error;
pub mod fuse;
pub mod image;
pub mod io;
pub mod metrics;
pub mod optics;
pub mod presets;
pub mod select;
pub mod simulate;

pub use activity::{compute_activity, energy_of_laplacian, stack_activity, ActivityMap, EolMap};
pub use config::{FusionConfig, ZeroWeightPolicy};
pub use error::{Error, Result};
pub use fuse::{fuse_pipeline, fuse_stack, normalize_weights, FusionOutcome, WeightField};
pub use image::{validate_stack, FocalStack, ThermalImage, ValidationReport, Violation};
pub use io::{load_stack, FrameEncoding, FrameFormat, StackManifest};
pub use metrics::{
    compare_against_stack, cross_correlation, hte, mae, rmse, FrameComparison, MetricsReport,
    ProbePoint,
};
pub use optics::{airy_disc_diameter, airy_disc_diameter_far_field, depth_of_field, LensSpec};
pub use presets::{preset, PRESET_NAMES};
pub use select::{find_peaks, max_activity_curve, select_frames, ActivityCurve, SelectionResult};
pub use simulate::{simulate_stack, DiscKernel, SceneObject, SceneSpec, Shape, SimulatedStack};
