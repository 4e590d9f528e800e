//! Mapping between the time domain and milliseconds on the animation clock.

use crate::model::spec::{TimeDomain, TimeRange};
use crate::model::value::Value;
use crate::normalize::NormalizedSpec;

#[derive(Debug, Clone, PartialEq)]
pub enum Timeline {
    /// `values[i]` holds for `[i·step, (i+1)·step)`.
    Discrete { values: Vec<Value>, step: f64 },
    /// Linear from `lo` at 0ms to `hi` at `duration`.
    Continuous { lo: Value, hi: Value, duration: f64 },
}

impl Timeline {
    pub fn new(domain: &TimeDomain, range: TimeRange) -> Timeline {
        match domain {
            TimeDomain::Discrete(values) => {
                let step = match range {
                    TimeRange::Step(s) => s,
                    TimeRange::Duration(d) => d / values.len().max(1) as f64,
                };
                Timeline::Discrete {
                    values: values.clone(),
                    step,
                }
            }
            TimeDomain::Continuous(lo, hi) => {
                let duration = match range {
                    TimeRange::Duration(d) => d,
                    TimeRange::Step(s) => s * (hi.as_f64().unwrap_or(1.0) - lo.as_f64().unwrap_or(0.0)),
                };
                Timeline::Continuous {
                    lo: lo.clone(),
                    hi: hi.clone(),
                    duration,
                }
            }
        }
    }

    pub fn from_spec(nspec: &NormalizedSpec) -> Option<Timeline> {
        Some(Timeline::new(nspec.time_domain()?, nspec.time_range()?))
    }

    /// Cycle length without pauses.
    pub fn active_ms(&self) -> f64 {
        match self {
            Timeline::Discrete { values, step } => values.len() as f64 * step,
            Timeline::Continuous { duration, .. } => *duration,
        }
    }

    /// Clock position where `v` starts.
    pub fn position(&self, v: &Value) -> Option<f64> {
        match self {
            Timeline::Discrete { values, step } => {
                let i = values.iter().position(|d| d.try_eq(v).unwrap_or(false))?;
                Some(i as f64 * step)
            }
            Timeline::Continuous { lo, hi, duration } => {
                let (lo, hi, x) = (lo.as_f64()?, hi.as_f64()?, v.as_f64()?);
                if x < lo || x > hi {
                    return None;
                }
                Some((x - lo) / (hi - lo) * duration)
            }
        }
    }
}
