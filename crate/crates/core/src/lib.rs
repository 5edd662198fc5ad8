//! Turns eye-gaze recordings over whole-slide images into binary ROI masks
//! and bounding-box labels, and scores labels against ground truth.
//!
//! The pipeline runs:
//!
//! 1. [`ingest`]: parse a JSON-Lines gaze session and project screen-space
//!    samples into level-0 slide pixels through the viewport history.
//! 2. [`kde`]: accumulate Gaussian fixation intensity on a downsampled grid,
//!    split it into clusters, derive a per-image threshold, and merge the
//!    masks of several kernel sizes.
//! 3. [`mask_ops`]: components, tight boxes and mask IOU.
//! 4. [`det_eval`]: AP, miss rate vs FPPI and LAMR over overlap thresholds.
//! 5. [`tiler`]: patch layout and label remapping.
//!
//! [`simulator`] produces synthetic scenes and sessions for end-to-end tests
//! and [`report`] holds the parameter sweep and annotation-timing arithmetic.

pub mod det_eval;
pub mod error;
pub mod formats;
pub mod ingest;
pub mod kde;
pub mod mask_ops;
pub mod raster;
pub mod report;
pub mod simulator;
pub mod tiler;

pub use error::{Error, Result};
pub use ingest::{GazeSample, GazeSession, GazeTrace, SlideGeometry, TracePoint, ViewportEvent};
pub use kde::{Cluster, DensityGrid, ThresholdStats};
pub use mask_ops::BBox;
pub use raster::{BinaryMask, GridSpec};
