// SPDX-License-Identifier: MIT OR Apache-2.0

//! NAB-style windowed scoring.
//!
//! Each event is surrounded by an anomaly window whose nominal size is 10%
//! of the series length divided by the number of events. The earliest
//! detection inside a window earns a sigmoid weight that favours early
//! detections; detections outside every window are penalised relative to
//! the closest preceding window; windows without a detection cost a miss.
//! The profile weights are configuration, not constants of the formula.

use serde::{Deserialize, Serialize};

use crate::domain::{DetectionSet, EvaluationInstance, EventSet, Timeline};
use crate::error::{Error, Result};
use crate::hard_metrics::HardCounts;
use crate::score::{Score, ScoreSet};

/// Steepness of the scoring sigmoid.
pub const SIGMOID_STEEPNESS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnomalyWindow {
    pub event: usize,
    /// Inclusive bounds, clipped to the timeline.
    pub left: usize,
    pub right: usize,
    /// Nominal window size `floor(0.1 * length / m)` before clipping.
    pub size: usize,
}

impl AnomalyWindow {
    pub fn width(&self) -> usize {
        self.right - self.left + 1
    }

    pub fn contains(&self, t: usize) -> bool {
        (self.left..=self.right).contains(&t)
    }

    /// Span used to normalise positions: the unclipped distance between
    /// the window edges, at least 1.
    fn scale(&self) -> f64 {
        ((self.size / 2) * 2).max(1) as f64
    }

    /// Signed offset from the right edge in units of the window span:
    /// -1 at the unclipped left edge, 0 at the right edge, positive after.
    pub fn relative_position(&self, t: usize) -> f64 {
        (t as f64 - self.right as f64) / self.scale()
    }
}

/// Weights of true positives, false positives and misses in the raw score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplicationProfile {
    pub name: String,
    pub weight_tp: f64,
    pub weight_fp: f64,
    pub weight_fn: f64,
}

impl ApplicationProfile {
    pub fn standard() -> Self {
        Self::custom("standard", 1.0, 0.11, 1.0)
    }

    pub fn reward_low_fp() -> Self {
        Self::custom("low-fp", 1.0, 0.22, 1.0)
    }

    pub fn reward_low_fn() -> Self {
        Self::custom("low-fn", 1.0, 0.11, 2.0)
    }

    fn custom(name: &str, weight_tp: f64, weight_fp: f64, weight_fn: f64) -> Self {
        ApplicationProfile {
            name: name.to_string(),
            weight_tp,
            weight_fp,
            weight_fn,
        }
    }

    pub fn new(
        name: impl Into<String>,
        weight_tp: f64,
        weight_fp: f64,
        weight_fn: f64,
    ) -> Result<Self> {
        let profile = ApplicationProfile {
            name: name.into(),
            weight_tp,
            weight_fp,
            weight_fn,
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<()> {
        for (label, w) in [
            ("weight_tp", self.weight_tp),
            ("weight_fp", self.weight_fp),
            ("weight_fn", self.weight_fn),
        ] {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::config(format!(
                    "profile {label} must be finite and non-negative, got {w}"
                )));
            }
        }
        Ok(())
    }

    /// One of the built-in profiles: `standard`, `low-fp`, `low-fn`.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "standard" => Ok(Self::standard()),
            "low-fp" => Ok(Self::reward_low_fp()),
            "low-fn" => Ok(Self::reward_low_fn()),
            other => Err(Error::config(format!("unknown NAB profile {other:?}"))),
        }
    }
}

impl Default for ApplicationProfile {
    fn default() -> Self {
        Self::standard()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NabResult {
    pub raw_score: f64,
    /// Window-based confusion counts.
    pub counts: HardCounts,
    pub f1: Score,
    pub windows: Vec<AnomalyWindow>,
}

/// One window per event, nominal size `floor(0.1 * length / m)` and
/// `floor(size / 2)` observations on each side, clipped to the timeline.
/// A zero size collapses the window onto the event.
pub fn make_windows(events: &EventSet, timeline: &Timeline) -> Vec<AnomalyWindow> {
    let m = events.m();
    if m == 0 {
        return Vec::new();
    }
    // floor(0.1 * length / m) in integer arithmetic.
    let size = timeline.length() / (10 * m);
    let half = size / 2;
    events
        .times()
        .iter()
        .map(|&event| AnomalyWindow {
            event,
            left: event.saturating_sub(half).max(1),
            right: (event + half).min(timeline.length()),
            size,
        })
        .collect()
}

/// `2 / (1 + e^(5y)) - 1`: near 1 for early positions (y ≤ -1), 0 at the
/// right window edge, negative after it.
pub fn sigmoid_weight(relative_position: f64) -> f64 {
    2.0 / (1.0 + (SIGMOID_STEEPNESS * relative_position).exp()) - 1.0
}

pub fn nab_score(
    instance: &EvaluationInstance,
    method: &str,
    profile: &ApplicationProfile,
) -> Result<NabResult> {
    let detections = instance.detection(method)?;
    Ok(score_detections(
        instance.timeline(),
        instance.events(),
        detections,
        profile,
    ))
}

pub fn score_detections(
    timeline: &Timeline,
    events: &EventSet,
    detections: &DetectionSet,
    profile: &ApplicationProfile,
) -> NabResult {
    let windows = make_windows(events, timeline);
    let mut first_hit: Vec<Option<usize>> = vec![None; windows.len()];
    let mut fp_penalty = 0.0;
    let mut fp = 0usize;

    for &t in detections.times() {
        match windows.iter().position(|w| w.contains(t)) {
            Some(i) => {
                // Detections are ascending, so the first one seen is the earliest.
                first_hit[i].get_or_insert(t);
            }
            None => {
                fp += 1;
                let preceding = windows.iter().rev().find(|w| w.right < t);
                let weight = match preceding {
                    Some(w) => sigmoid_weight(w.relative_position(t)).abs(),
                    None => 1.0,
                };
                fp_penalty += profile.weight_fp * weight;
            }
        }
    }

    let mut raw_score = -fp_penalty;
    let mut tp = 0usize;
    for (w, hit) in windows.iter().zip(&first_hit) {
        match hit {
            Some(t) => {
                tp += 1;
                raw_score += profile.weight_tp * sigmoid_weight(w.relative_position(*t));
            }
            None => raw_score -= profile.weight_fn,
        }
    }

    let m = events.m();
    let counts = HardCounts {
        tp,
        fp,
        tn: timeline.length() - m - fp,
        fn_: m - tp,
    };
    let f1 = ScoreSet::from_counts(
        counts.tp as f64,
        counts.fp as f64,
        counts.tn as f64,
        counts.fn_ as f64,
        1.0,
    )
    .f1;

    NabResult {
        raw_score,
        counts,
        f1,
        windows,
    }
}
