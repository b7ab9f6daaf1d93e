// SPDX-License-Identifier: MIT OR Apache-2.0

//! Exact-match confusion counts and the classification scores built on them.

use serde::{Deserialize, Serialize};

use crate::domain::{DetectionSet, EvaluationInstance, EventSet, Timeline};
use crate::error::Result;
use crate::score::ScoreSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HardCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl HardCounts {
    pub fn scores(&self, beta: f64) -> ScoreSet {
        scores(self, beta)
    }
}

/// Confusion counts for `method` in `instance`.
pub fn hard_confusion(instance: &EvaluationInstance, method: &str) -> Result<HardCounts> {
    let detections = instance.detection(method)?;
    Ok(confusion(
        instance.timeline(),
        instance.events(),
        detections,
    ))
}

/// `tp = |E ∩ D|`, `fp = |D \ E|`, `fn = |E \ D|`, `tn = length - |E ∪ D|`.
pub fn confusion(timeline: &Timeline, events: &EventSet, detections: &DetectionSet) -> HardCounts {
    let (e, d) = (events.times(), detections.times());
    let (mut i, mut j, mut tp) = (0, 0, 0);
    while i < e.len() && j < d.len() {
        match e[i].cmp(&d[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                tp += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = e.len() + d.len() - tp;
    HardCounts {
        tp,
        fp: d.len() - tp,
        tn: timeline.length() - union,
        fn_: e.len() - tp,
    }
}

pub fn scores(counts: &HardCounts, beta: f64) -> ScoreSet {
    ScoreSet::from_counts(
        counts.tp as f64,
        counts.fp as f64,
        counts.tn as f64,
        counts.fn_ as f64,
        beta,
    )
}
