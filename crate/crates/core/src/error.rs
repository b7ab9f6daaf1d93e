// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("timeline length must be at least 1")]
    EmptyTimeline,
    #[error("index out of range: {what} index {index} is outside [1, {length}]")]
    IndexOutOfRange {
        what: String,
        index: i64,
        length: usize,
    },
    #[error("event set is empty; metrics over zero events are undefined")]
    EmptyEvents,
    #[error("instance has no detection methods")]
    NoMethods,
    #[error("method name must not be empty")]
    EmptyMethodName,
    #[error("duplicate method name {0:?}")]
    DuplicateMethod(String),
    #[error("unknown method {0:?}")]
    UnknownMethod(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("estimator undefined at t={t}: no in-range neighbors on the {side} side")]
    EstimatorUndefined { t: usize, side: &'static str },
    #[error("series of length {length} is shorter than neighborhood + 1 = {required}")]
    SeriesTooShort { length: usize, required: usize },
    #[error("series value at t={0} is not finite")]
    NonFiniteValue(usize),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
