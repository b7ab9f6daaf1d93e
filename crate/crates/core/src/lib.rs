// SPDX-License-Identifier: MIT OR Apache-2.0

//! Evaluation of time series event detection results.
//!
//! Three families of metrics are computed over the same validated
//! [`EvaluationInstance`]:
//!
//! * hard classification metrics, which credit only exact-time matches
//!   ([`hard_metrics`]);
//! * SoftED metrics, which credit each event with its best representative
//!   detection weighted by a triangular temporal membership ([`softed`]);
//! * a NAB-style windowed score with its window-derived confusion counts
//!   ([`nab`]).
//!
//! [`analysis`] composes them into per-method reports, rankings and
//! tolerance sweeps, [`detectors`] provides baseline event/anomaly/change
//! point classifiers plus synthetic series, and [`scenarios`] reconstructs a
//! small suite of two-method comparison cases.
//!
//! Time indices are 1-based observation positions throughout.

#![forbid(unsafe_code)]

pub mod analysis;
pub mod detectors;
pub mod domain;
mod error;
pub mod hard_metrics;
pub mod nab;
pub mod scenarios;
mod score;
pub mod softed;

pub use domain::{
    validate_instance, DetectionSet, DuplicateWarning, EvaluationInstance, EventSet, RawDetections,
    Timeline, ToleranceConfig,
};
pub use error::{Error, Result};
pub use score::{Score, ScoreSet};
