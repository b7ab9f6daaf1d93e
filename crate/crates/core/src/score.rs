// SPDX-License-Identifier: MIT OR Apache-2.0

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Token used for a score whose defining ratio is 0/0.
pub const NOT_APPLICABLE: &str = "n/a";

/// A metric value, or the explicit not-applicable marker for 0/0 ratios.
///
/// Serializes as a plain number or the string `"n/a"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Score {
    Value(f64),
    NotApplicable,
}

impl Score {
    /// `num / den`, not-applicable when both are zero.
    ///
    /// Only 0/0 is undefined; counts are non-negative so `den == 0` implies
    /// `num == 0` for every ratio built here.
    pub fn ratio(num: f64, den: f64) -> Score {
        if den == 0.0 {
            Score::NotApplicable
        } else {
            Score::Value(num / den)
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Score::Value(v) => Some(v),
            Score::NotApplicable => None,
        }
    }

    pub fn is_applicable(self) -> bool {
        matches!(self, Score::Value(_))
    }

    pub fn map(self, f: impl FnOnce(f64) -> f64) -> Score {
        match self {
            Score::Value(v) => Score::Value(f(v)),
            Score::NotApplicable => Score::NotApplicable,
        }
    }

    /// `self - other`, not-applicable if either side is.
    pub fn delta(self, other: Score) -> Score {
        match (self, other) {
            (Score::Value(a), Score::Value(b)) => Score::Value(a - b),
            _ => Score::NotApplicable,
        }
    }

    /// Descending order used by rankings: larger values first, n/a last.
    pub fn cmp_desc(self, other: Score) -> Ordering {
        match (self, other) {
            (Score::Value(a), Score::Value(b)) => b.total_cmp(&a),
            (Score::Value(_), Score::NotApplicable) => Ordering::Less,
            (Score::NotApplicable, Score::Value(_)) => Ordering::Greater,
            (Score::NotApplicable, Score::NotApplicable) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Score::Value(v) => write!(f, "{v}"),
            Score::NotApplicable => f.write_str(NOT_APPLICABLE),
        }
    }
}

impl From<f64> for Score {
    fn from(v: f64) -> Self {
        Score::Value(v)
    }
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Score::Value(v) => serializer.serialize_f64(*v),
            Score::NotApplicable => serializer.serialize_str(NOT_APPLICABLE),
        }
    }
}

impl<'de> Deserialize<'de> for Score {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ScoreVisitor;

        impl Visitor<'_> for ScoreVisitor {
            type Value = Score;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or the string \"n/a\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Score, E> {
                Ok(Score::Value(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Score, E> {
                Ok(Score::Value(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Score, E> {
                Ok(Score::Value(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Score, E> {
                if v == NOT_APPLICABLE {
                    Ok(Score::NotApplicable)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }

        deserializer.deserialize_any(ScoreVisitor)
    }
}

/// Classification scores derived from one confusion quadruple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreSet {
    pub precision: Score,
    pub recall: Score,
    pub sensitivity: Score,
    pub specificity: Score,
    pub f_beta: Score,
    pub f1: Score,
}

impl ScoreSet {
    /// Shared by hard and soft counts; the formulas are identical.
    pub fn from_counts(tp: f64, fp: f64, tn: f64, fn_: f64, beta: f64) -> ScoreSet {
        let precision = Score::ratio(tp, tp + fp);
        let recall = Score::ratio(tp, tp + fn_);
        let specificity = Score::ratio(tn, tn + fp);
        ScoreSet {
            precision,
            recall,
            sensitivity: recall,
            specificity,
            f_beta: f_beta(precision, recall, beta),
            f1: f_beta(precision, recall, 1.0),
        }
    }
}

/// `(1 + b^2) P R / (b^2 P + R)`; n/a when either input is n/a or the
/// denominator vanishes (zero precision and zero recall).
pub fn f_beta(precision: Score, recall: Score, beta: f64) -> Score {
    match (precision, recall) {
        (Score::Value(p), Score::Value(r)) => {
            let b2 = beta * beta;
            Score::ratio((1.0 + b2) * p * r, b2 * p + r)
        }
        _ => Score::NotApplicable,
    }
}
