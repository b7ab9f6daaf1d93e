// SPDX-License-Identifier: MIT OR Apache-2.0

//! Domain types shared by every metric family, and instance validation.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The observation axis of one series. Valid indices are `1..=length`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timeline {
    length: usize,
    /// Free-text note mapping indices to wall-clock time, e.g. "index 1 = 2005-01".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<String>,
}

impl Timeline {
    pub fn new(length: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::EmptyTimeline);
        }
        Ok(Timeline {
            length,
            origin: None,
        })
    }

    pub fn with_origin(mut self, origin: impl Into<String>) -> Self {
        self.origin = Some(origin.into());
        self
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn contains(&self, t: usize) -> bool {
        (1..=self.length).contains(&t)
    }
}

fn check_strictly_increasing(times: &[usize], what: &str) -> Result<()> {
    if times.first() == Some(&0) {
        return Err(Error::config(format!(
            "{what} times are 1-based; got index 0"
        )));
    }
    if let Some(w) = times.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::config(format!(
            "{what} times must be strictly increasing; got {} then {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Ground-truth event times, strictly increasing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct EventSet {
    times: Vec<usize>,
}

impl EventSet {
    pub fn new(times: Vec<usize>) -> Result<Self> {
        check_strictly_increasing(&times, "event")?;
        Ok(EventSet { times })
    }

    pub fn times(&self) -> &[usize] {
        &self.times
    }

    /// Number of events.
    pub fn m(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn contains(&self, t: usize) -> bool {
        self.times.binary_search(&t).is_ok()
    }
}

impl TryFrom<Vec<usize>> for EventSet {
    type Error = Error;

    fn try_from(times: Vec<usize>) -> Result<Self> {
        EventSet::new(times)
    }
}

impl From<EventSet> for Vec<usize> {
    fn from(set: EventSet) -> Self {
        set.times
    }
}

/// Detection times reported by one named method. May be empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionSet {
    method: String,
    times: Vec<usize>,
}

impl DetectionSet {
    pub fn new(method: impl Into<String>, times: Vec<usize>) -> Result<Self> {
        let method = method.into();
        if method.is_empty() {
            return Err(Error::EmptyMethodName);
        }
        check_strictly_increasing(&times, "detection")?;
        Ok(DetectionSet { method, times })
    }

    pub fn method(&self) -> &str {
        &self.method
    }

    pub fn times(&self) -> &[usize] {
        &self.times
    }

    /// Number of detections.
    pub fn n(&self) -> usize {
        self.times.len()
    }

    pub fn contains(&self, t: usize) -> bool {
        self.times.binary_search(&t).is_ok()
    }
}

/// Temporal tolerance `k` (in observations) and the F-beta weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    k: f64,
    beta: f64,
}

impl ToleranceConfig {
    pub const DEFAULT_K: f64 = 15.0;

    pub fn new(k: f64, beta: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::config(format!(
                "tolerance k must be positive, got {k}"
            )));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::config(format!("beta must be positive, got {beta}")));
        }
        Ok(ToleranceConfig { k, beta })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn with_k(self, k: f64) -> Result<Self> {
        ToleranceConfig::new(k, self.beta)
    }
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            k: Self::DEFAULT_K,
            beta: 1.0,
        }
    }
}

/// Unvalidated detection times for one method, as parsed from input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDetections {
    pub method: String,
    pub times: Vec<i64>,
}

impl RawDetections {
    pub fn new(method: impl Into<String>, times: Vec<i64>) -> Self {
        RawDetections {
            method: method.into(),
            times,
        }
    }
}

/// A repeated time index removed during validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DuplicateWarning {
    /// `"events"` or the method name.
    pub source: String,
    pub time: usize,
}

/// A validated, immutable evaluation input: one timeline, its ground truth
/// and one or more uniquely named detection sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationInstance {
    timeline: Timeline,
    events: EventSet,
    detections: Vec<DetectionSet>,
}

impl EvaluationInstance {
    pub fn timeline(&self) -> &Timeline {
        &self.timeline
    }

    pub fn events(&self) -> &EventSet {
        &self.events
    }

    pub fn detections(&self) -> &[DetectionSet] {
        &self.detections
    }

    pub fn methods(&self) -> impl Iterator<Item = &str> {
        self.detections.iter().map(DetectionSet::method)
    }

    pub fn detection(&self, method: &str) -> Result<&DetectionSet> {
        self.detections
            .iter()
            .find(|d| d.method == method)
            .ok_or_else(|| Error::UnknownMethod(method.to_string()))
    }

    /// The raw form of this instance, suitable for re-validation.
    pub fn to_raw(&self) -> (Timeline, Vec<i64>, Vec<RawDetections>) {
        let widen = |v: &[usize]| v.iter().map(|&t| t as i64).collect::<Vec<_>>();
        (
            self.timeline.clone(),
            widen(self.events.times()),
            self.detections
                .iter()
                .map(|d| RawDetections::new(d.method.clone(), widen(d.times())))
                .collect(),
        )
    }
}

fn normalize(
    raw: &[i64],
    timeline: &Timeline,
    source: &str,
    warnings: &mut Vec<DuplicateWarning>,
) -> Result<Vec<usize>> {
    let mut times = Vec::with_capacity(raw.len());
    for &t in raw {
        if t < 1 || t as u64 > timeline.length as u64 {
            return Err(Error::IndexOutOfRange {
                what: source.to_string(),
                index: t,
                length: timeline.length,
            });
        }
        times.push(t as usize);
    }
    times.sort_unstable();
    let before = times.len();
    let mut out: Vec<usize> = Vec::with_capacity(before);
    for t in times {
        if out.last() == Some(&t) {
            warnings.push(DuplicateWarning {
                source: source.to_string(),
                time: t,
            });
        } else {
            out.push(t);
        }
    }
    Ok(out)
}

/// Validates raw inputs into an [`EvaluationInstance`].
///
/// Times are sorted and deduplicated; each removed duplicate yields one
/// warning. Out-of-range indices, an empty event set, an empty method list,
/// and empty or repeated method names are errors.
pub fn validate_instance(
    timeline: Timeline,
    events: &[i64],
    detections: Vec<RawDetections>,
) -> Result<(EvaluationInstance, Vec<DuplicateWarning>)> {
    if timeline.length == 0 {
        return Err(Error::EmptyTimeline);
    }
    let mut warnings = Vec::new();
    let event_times = normalize(events, &timeline, "events", &mut warnings)?;
    if event_times.is_empty() {
        return Err(Error::EmptyEvents);
    }
    if detections.is_empty() {
        return Err(Error::NoMethods);
    }

    let mut seen = HashSet::new();
    let mut sets = Vec::with_capacity(detections.len());
    for raw in detections {
        if raw.method.is_empty() {
            return Err(Error::EmptyMethodName);
        }
        if !seen.insert(raw.method.clone()) {
            return Err(Error::DuplicateMethod(raw.method));
        }
        let times = normalize(&raw.times, &timeline, &raw.method, &mut warnings)?;
        sets.push(DetectionSet {
            method: raw.method,
            times,
        });
    }

    Ok((
        EvaluationInstance {
            timeline,
            events: EventSet { times: event_times },
            detections: sets,
        },
        warnings,
    ))
}
