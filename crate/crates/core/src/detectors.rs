// SPDX-License-Identifier: MIT OR Apache-2.0

//! Baseline point classifiers and synthetic series.
//!
//! A point `x_t` deviates on a side when it differs by more than `sigma`
//! from the expected value estimated from the `neighborhood` observations
//! on that side. Events deviate on at least one side, anomalies on both,
//! change points on exactly one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::domain::EventSet;
use crate::error::{Error, Result};

/// Observed values `x_1..x_n`; stored 0-based, addressed 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesData {
    values: Vec<f64>,
}

impl SeriesData {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyTimeline);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(i + 1));
        }
        Ok(SeriesData { values })
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

    /// Value at 1-based index `t`.
    pub fn at(&self, t: usize) -> f64 {
        self.values[t - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Before,
    After,
}

impl Side {
    fn label(self) -> &'static str {
        match self {
            Side::Before => "before",
            Side::After => "after",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    #[default]
    Mean,
    Median,
}

impl Estimator {
    fn apply(self, window: &[f64]) -> f64 {
        match self {
            Estimator::Mean => window.iter().sum::<f64>() / window.len() as f64,
            Estimator::Median => {
                let mut v = window.to_vec();
                v.sort_by(f64::total_cmp);
                let mid = v.len() / 2;
                if v.len().is_multiple_of(2) {
                    (v[mid - 1] + v[mid]) / 2.0
                } else {
                    v[mid]
                }
            }
        }
    }
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Estimator::Mean),
            "median" => Ok(Estimator::Median),
            other => Err(Error::config(format!("unknown estimator {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    neighborhood: usize,
    sigma: f64,
    estimator: Estimator,
}

impl DetectorConfig {
    pub fn new(neighborhood: usize, sigma: f64, estimator: Estimator) -> Result<Self> {
        if neighborhood == 0 {
            return Err(Error::config("neighborhood must be at least 1"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::config(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        Ok(DetectorConfig {
            neighborhood,
            sigma,
            estimator,
        })
    }

    pub fn neighborhood(&self) -> usize {
        self.neighborhood
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn estimator(&self) -> Estimator {
        self.estimator
    }
}

/// Expected value of `x_t` from up to `neighborhood` observations on one
/// side of `t`. Windows are truncated at the series bounds.
pub fn expected_value(
    series: &SeriesData,
    t: usize,
    side: Side,
    neighborhood: usize,
    estimator: Estimator,
) -> Result<f64> {
    let n = series.len();
    // 0-based half-open range of the side window.
    let (lo, hi) = match side {
        Side::Before => (
            t.saturating_sub(1 + neighborhood),
            t.saturating_sub(1).min(n),
        ),
        Side::After => (t.min(n), (t + neighborhood).min(n)),
    };
    if t == 0 || t > n || lo >= hi {
        return Err(Error::EstimatorUndefined {
            t,
            side: side.label(),
        });
    }
    Ok(estimator.apply(&series.values[lo..hi]))
}

/// Which of the two sides of each point deviate; `None` where a side has
/// no observations.
fn side_deviations(
    series: &SeriesData,
    config: &DetectorConfig,
) -> Result<Vec<(Option<bool>, Option<bool>)>> {
    let required = config.neighborhood + 1;
    if series.len() < required {
        return Err(Error::SeriesTooShort {
            length: series.len(),
            required,
        });
    }
    let deviates = |t: usize, side: Side| {
        expected_value(series, t, side, config.neighborhood, config.estimator)
            .ok()
            .map(|e| (series.at(t) - e).abs() > config.sigma)
    };
    Ok((1..=series.len())
        .map(|t| (deviates(t, Side::Before), deviates(t, Side::After)))
        .collect())
}

fn classify(
    series: &SeriesData,
    config: &DetectorConfig,
    rule: impl Fn(Option<bool>, Option<bool>) -> bool,
) -> Result<EventSet> {
    let times = side_deviations(series, config)?
        .into_iter()
        .enumerate()
        .filter(|(_, (b, a))| rule(*b, *a))
        .map(|(i, _)| i + 1)
        .collect();
    EventSet::new(times)
}

/// Points deviating on either side. Boundary points use the side they have.
pub fn classify_events(series: &SeriesData, config: &DetectorConfig) -> Result<EventSet> {
    classify(series, config, |b, a| b == Some(true) || a == Some(true))
}

/// Points deviating on both sides. Boundary points are skipped.
pub fn classify_anomalies(series: &SeriesData, config: &DetectorConfig) -> Result<EventSet> {
    classify(series, config, |b, a| {
        matches!((b, a), (Some(true), Some(true)))
    })
}

/// Points deviating on exactly one side. Boundary points are skipped.
pub fn classify_change_points(series: &SeriesData, config: &DetectorConfig) -> Result<EventSet> {
    classify(
        series,
        config,
        |b, a| matches!((b, a), (Some(x), Some(y)) if x != y),
    )
}

/// Underlying signal of a synthetic series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BaseSignal {
    Constant {
        level: f64,
    },
    Trend {
        intercept: f64,
        slope: f64,
    },
    Seasonal {
        level: f64,
        amplitude: f64,
        period: f64,
    },
    RandomWalk {
        start: f64,
        step: f64,
    },
}

impl Default for BaseSignal {
    fn default() -> Self {
        BaseSignal::Constant { level: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Injection {
    /// Adds `magnitude` at the event time only.
    Spike { magnitude: f64 },
    /// Adds `delta` from the event time onwards.
    LevelShift { delta: f64 },
    /// Multiplies the noise scale by `factor` from the event time onwards.
    VarianceShift { factor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InjectedEvent {
    pub time: usize,
    #[serde(flatten)]
    pub injection: Injection,
}

/// Recipe for [`generate_synthetic`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub length: usize,
    #[serde(default)]
    pub base: BaseSignal,
    /// Standard deviation of the Gaussian noise.
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub events: Vec<InjectedEvent>,
    #[serde(default)]
    pub seed: u64,
}

/// Builds a series from `spec`; the returned event set is the injected
/// ground truth. Output is a pure function of the spec, seed included.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(SeriesData, EventSet)> {
    if spec.length == 0 {
        return Err(Error::EmptyTimeline);
    }
    if !(spec.noise.is_finite() && spec.noise >= 0.0) {
        return Err(Error::config(format!(
            "noise must be non-negative, got {}",
            spec.noise
        )));
    }
    for e in &spec.events {
        if e.time < 1 || e.time > spec.length {
            return Err(Error::IndexOutOfRange {
                what: "injected event".into(),
                index: e.time as i64,
                length: spec.length,
            });
        }
        if let Injection::VarianceShift { factor } = e.injection {
            if !(factor.is_finite() && factor >= 0.0) {
                return Err(Error::config(format!(
                    "variance factor must be non-negative, got {factor}"
                )));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let standard = Normal::new(0.0, 1.0).expect("unit normal");
    let n = spec.length;

    let mut values: Vec<f64> = match spec.base {
        BaseSignal::Constant { level } => vec![level; n],
        BaseSignal::Trend { intercept, slope } => {
            (1..=n).map(|t| intercept + slope * t as f64).collect()
        }
        BaseSignal::Seasonal {
            level,
            amplitude,
            period,
        } => {
            if !(period.is_finite() && period > 0.0) {
                return Err(Error::config(format!(
                    "period must be positive, got {period}"
                )));
            }
            (1..=n)
                .map(|t| level + amplitude * (std::f64::consts::TAU * t as f64 / period).sin())
                .collect()
        }
        BaseSignal::RandomWalk { start, step } => {
            let mut x = start;
            (0..n)
                .map(|i| {
                    if i > 0 {
                        x += step * standard.sample(&mut rng);
                    }
                    x
                })
                .collect()
        }
    };

    let mut noise_scale = vec![spec.noise; n];
    for e in &spec.events {
        let i = e.time - 1;
        match e.injection {
            Injection::Spike { magnitude } => values[i] += magnitude,
            Injection::LevelShift { delta } => values[i..].iter_mut().for_each(|v| *v += delta),
            Injection::VarianceShift { factor } => {
                noise_scale[i..].iter_mut().for_each(|s| *s *= factor)
            }
        }
    }
    for (v, s) in values.iter_mut().zip(&noise_scale) {
        *v += s * standard.sample(&mut rng);
    }

    let mut truth: Vec<usize> = spec.events.iter().map(|e| e.time).collect();
    truth.sort_unstable();
    truth.dedup();
    Ok((SeriesData::new(values)?, EventSet::new(truth)?))
}
