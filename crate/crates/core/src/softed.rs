// SPDX-License-Identifier: MIT OR Apache-2.0

//! SoftED: temporally tolerant confusion counts.
//!
//! Every detection is attributed to its nearest event(s). Each event then
//! gets at most one representative detection, scored by the triangular
//! membership of its distance to the event; every other detection scores 0.
//! The detection scores sum to the soft true positive count, from which the
//! remaining soft counts and the usual scores follow.
//!
//! Two constraints keep the soft counts on the same scale as hard counts:
//! a detection carries exactly one score (it represents at most one event),
//! and the credit attributed to one event never exceeds 1. Together they
//! give `Σ ds ≤ m`.
//!
//! All ordering decisions compare integer distances, so ties are exact.
//! Membership values are only used as the scores themselves.

use serde::{Deserialize, Serialize};

use crate::domain::{DetectionSet, EvaluationInstance, EventSet, Timeline};
use crate::error::{Error, Result};
use crate::score::ScoreSet;

/// Tolerance when comparing totals of membership values.
const TOTAL_EPS: f64 = 1e-9;

/// Triangular membership of a detection at `t_d` for an event at `t_e`:
/// 1 at the event, falling linearly to 0 at `t_e ± k`, 0 beyond.
pub fn membership(t_d: usize, t_e: usize, k: f64) -> f64 {
    membership_at_offset(t_d as f64 - t_e as f64, k)
}

/// Membership as a function of the signed offset `t_d - t_e`.
pub fn membership_at_offset(offset: f64, k: f64) -> f64 {
    let rising = (offset + k) / k;
    let falling = (k - offset) / k;
    rising.min(falling).max(0.0)
}

fn membership_at_distance(distance: usize, k: f64) -> f64 {
    membership_at_offset(distance as f64, k)
}

fn check_k(k: f64) -> Result<()> {
    if k.is_finite() && k > 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!(
            "tolerance k must be positive, got {k}"
        )))
    }
}

/// How events compete for a detection that is equidistant from two of them.
///
/// Such a contested detection lies exactly midway between two adjacent
/// events and can represent only one of them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConsumptionRule {
    /// Events are visited in ascending time order and each takes its
    /// best-ranked candidate that still allows the maximum total credit;
    /// an event whose preferred contested detection is better used by its
    /// neighbour falls back to its next candidate. Identical to
    /// [`ConsumptionRule::GreedyFallback`] whenever that is already optimal.
    #[default]
    OptimalFallback,
    /// Events are visited in ascending time order; each takes its
    /// best-ranked unconsumed candidate.
    GreedyFallback,
    /// Each event may only take its best-ranked candidate; if an earlier
    /// event already consumed it, the event scores 0.
    NoFallback,
}

impl std::str::FromStr for ConsumptionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal-fallback" => Ok(ConsumptionRule::OptimalFallback),
            "greedy-fallback" => Ok(ConsumptionRule::GreedyFallback),
            "no-fallback" => Ok(ConsumptionRule::NoFallback),
            other => Err(Error::config(format!("unknown consumption rule {other:?}"))),
        }
    }
}

impl std::fmt::Display for ConsumptionRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ConsumptionRule::OptimalFallback => "optimal-fallback",
            ConsumptionRule::GreedyFallback => "greedy-fallback",
            ConsumptionRule::NoFallback => "no-fallback",
        })
    }
}

/// A detection within tolerance of an event it is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    /// Index into the detection set.
    pub detection: usize,
    pub time: usize,
    pub distance: usize,
    pub membership: f64,
}

/// Event/detection bookkeeping for one detection set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    k: f64,
    /// Per detection: indices of the events maximizing its membership.
    event_of_detection: Vec<Vec<usize>>,
    /// Per event: candidates ordered by descending membership, ties by time.
    detections_of_event: Vec<Vec<Candidate>>,
    /// Per event: index of its representative detection.
    representative: Vec<Option<usize>>,
    event_score: Vec<f64>,
    detection_score: Vec<f64>,
    rule: Option<ConsumptionRule>,
}

impl Attribution {
    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn event_of_detection(&self) -> &[Vec<usize>] {
        &self.event_of_detection
    }

    pub fn detections_of_event(&self) -> &[Vec<Candidate>] {
        &self.detections_of_event
    }

    pub fn representative(&self) -> &[Option<usize>] {
        &self.representative
    }

    pub fn event_score(&self) -> &[f64] {
        &self.event_score
    }

    pub fn detection_score(&self) -> &[f64] {
        &self.detection_score
    }

    /// The rule used by [`resolve_representatives`], `None` before resolution.
    pub fn rule(&self) -> Option<ConsumptionRule> {
        self.rule
    }

    pub fn is_resolved(&self) -> bool {
        self.rule.is_some()
    }

    /// Soft true positives, `Σ ds`.
    pub fn total_credit(&self) -> f64 {
        self.detection_score.iter().sum()
    }
}

/// Assignment phase: nearest-event attribution of every detection and the
/// candidate list of every event.
///
/// A detection equidistant from two events is attributed to both. It joins
/// an event's candidates only with positive membership.
pub fn attribute(events: &EventSet, detections: &DetectionSet, k: f64) -> Result<Attribution> {
    check_k(k)?;
    let e = events.times();
    let m = e.len();
    let mut event_of_detection = Vec::with_capacity(detections.n());
    let mut detections_of_event: Vec<Vec<Candidate>> = vec![Vec::new(); m];

    for (i, &t) in detections.times().iter().enumerate() {
        let nearest = nearest_events(e, t);
        if let Some(&first) = nearest.first() {
            let distance = e[first].abs_diff(t);
            let mu = membership_at_distance(distance, k);
            if mu > 0.0 {
                for &j in &nearest {
                    detections_of_event[j].push(Candidate {
                        detection: i,
                        time: t,
                        distance,
                        membership: mu,
                    });
                }
            }
        }
        event_of_detection.push(nearest);
    }
    for candidates in &mut detections_of_event {
        candidates.sort_by_key(|c| (c.distance, c.time));
    }

    Ok(Attribution {
        k,
        event_of_detection,
        detections_of_event,
        representative: vec![None; m],
        event_score: vec![0.0; m],
        detection_score: vec![0.0; detections.n()],
        rule: None,
    })
}

/// Indices of the events at minimal distance from `t` (one, or two on a tie).
fn nearest_events(events: &[usize], t: usize) -> Vec<usize> {
    let p = events.partition_point(|&x| x < t);
    match (p.checked_sub(1), (p < events.len()).then_some(p)) {
        (Some(l), Some(r)) => {
            let (dl, dr) = (t - events[l], events[r] - t);
            match dl.cmp(&dr) {
                std::cmp::Ordering::Less => vec![l],
                std::cmp::Ordering::Greater => vec![r],
                std::cmp::Ordering::Equal => vec![l, r],
            }
        }
        (Some(l), None) => vec![l],
        (None, Some(r)) => vec![r],
        (None, None) => Vec::new(),
    }
}

/// Scoring phase: picks each event's representative under `rule` and fills
/// in event and detection scores.
pub fn resolve_representatives(mut attribution: Attribution, rule: ConsumptionRule) -> Attribution {
    let chosen = match rule {
        ConsumptionRule::GreedyFallback => choose_greedy(&attribution, true),
        ConsumptionRule::NoFallback => choose_greedy(&attribution, false),
        ConsumptionRule::OptimalFallback => choose_optimal(&attribution),
    };

    attribution
        .detection_score
        .iter_mut()
        .for_each(|s| *s = 0.0);
    for (j, pick) in chosen.into_iter().enumerate() {
        let candidate = pick.map(|slot| attribution.detections_of_event[j][slot]);
        attribution.representative[j] = candidate.map(|c| c.detection);
        attribution.event_score[j] = candidate.map_or(0.0, |c| c.membership);
        if let Some(c) = candidate {
            attribution.detection_score[c.detection] = c.membership;
        }
    }
    attribution.rule = Some(rule);
    attribution
}

/// Per event, the slot in its candidate list that was chosen.
fn choose_greedy(attribution: &Attribution, fallback: bool) -> Vec<Option<usize>> {
    let mut consumed = vec![false; attribution.detection_score.len()];
    attribution
        .detections_of_event
        .iter()
        .map(|candidates| {
            let slot = if fallback {
                candidates.iter().position(|c| !consumed[c.detection])
            } else {
                (!candidates.is_empty() && !consumed[candidates[0].detection]).then_some(0)
            };
            if let Some(s) = slot {
                consumed[candidates[s].detection] = true;
            }
            slot
        })
        .collect()
}

/// How a candidate relates to the neighbouring events.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Share {
    Exclusive,
    WithPrevious,
    WithNext,
}

fn share_of(attribution: &Attribution, event: usize, candidate: &Candidate) -> Share {
    match attribution.event_of_detection[candidate.detection].as_slice() {
        [a, b] if *b == event && *a + 1 == event => Share::WithPrevious,
        [a, b] if *a == event && *b == event + 1 => Share::WithNext,
        _ => Share::Exclusive,
    }
}

/// Dynamic program over events in ascending order. A contested detection
/// lies midway between two adjacent events, so the only coupling between
/// event `j` and the rest is whether event `j - 1` took the detection they
/// share. `best[j][taken]` is the maximal credit of events `j..` given that
/// state. Reconstruction walks events forward and keeps, for each, the
/// first candidate in preference order that still reaches the optimum.
fn choose_optimal(attribution: &Attribution) -> Vec<Option<usize>> {
    let cands = &attribution.detections_of_event;
    let m = cands.len();
    let mut best = vec![[0.0f64; 2]; m + 1];

    let option_value = |best: &[[f64; 2]], j: usize, taken: bool, c: &Candidate| -> Option<f64> {
        match share_of(attribution, j, c) {
            Share::Exclusive => Some(c.membership + best[j + 1][0]),
            Share::WithPrevious if taken => None,
            Share::WithPrevious => Some(c.membership + best[j + 1][0]),
            Share::WithNext => Some(c.membership + best[j + 1][1]),
        }
    };

    for j in (0..m).rev() {
        for taken in [false, true] {
            let skip = best[j + 1][0];
            let v = cands[j]
                .iter()
                .filter_map(|c| option_value(&best, j, taken, c))
                .fold(skip, f64::max);
            best[j][taken as usize] = v;
        }
    }

    let mut taken = false;
    let mut chosen = Vec::with_capacity(m);
    for j in 0..m {
        let target = best[j][taken as usize] - TOTAL_EPS;
        let slot = cands[j]
            .iter()
            .position(|c| option_value(&best, j, taken, c).is_some_and(|v| v >= target));
        taken = slot.is_some_and(|s| share_of(attribution, j, &cands[j][s]) == Share::WithNext);
        chosen.push(slot);
    }
    chosen
}

/// Real-valued confusion counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoftCounts {
    pub tps: f64,
    pub fps: f64,
    pub tns: f64,
    pub fns: f64,
}

impl SoftCounts {
    pub fn scores(&self, beta: f64) -> ScoreSet {
        soft_scores(self, beta)
    }
}

/// Soft counts from a resolved attribution:
/// `tps = Σ ds`, `fns = m - tps`, `fps = Σ (1 - ds) = n - tps`,
/// `tns = (length - m) - fps`.
pub fn soft_counts(
    attribution: &Attribution,
    timeline: &Timeline,
    events: &EventSet,
    detections: &DetectionSet,
) -> SoftCounts {
    debug_assert_eq!(attribution.detection_score.len(), detections.n());
    debug_assert_eq!(attribution.event_score.len(), events.m());
    let tps = attribution.total_credit();
    let m = events.m() as f64;
    let n = detections.n() as f64;
    let fps = n - tps;
    SoftCounts {
        tps,
        fps,
        tns: (timeline.length() as f64 - m) - fps,
        fns: m - tps,
    }
}

pub fn soft_scores(counts: &SoftCounts, beta: f64) -> ScoreSet {
    ScoreSet::from_counts(counts.tps, counts.fps, counts.tns, counts.fns, beta)
}

/// Resolved attribution and soft counts of one method.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftEvaluation {
    pub attribution: Attribution,
    pub counts: SoftCounts,
}

/// Runs both phases and the counts for `method` in `instance`.
pub fn soft_confusion(
    instance: &EvaluationInstance,
    method: &str,
    k: f64,
    rule: ConsumptionRule,
) -> Result<SoftEvaluation> {
    let detections = instance.detection(method)?;
    let attribution = resolve_representatives(attribute(instance.events(), detections, k)?, rule);
    let counts = soft_counts(
        &attribution,
        instance.timeline(),
        instance.events(),
        detections,
    );
    Ok(SoftEvaluation {
        attribution,
        counts,
    })
}
