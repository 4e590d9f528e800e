//! Scalar values carried by data tables, expressions and signals.

use std::cmp::Ordering;
use std::fmt;

use chrono::{DateTime, NaiveDate, NaiveDateTime, SecondsFormat, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::TypeError;

/// A single data-domain value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    String(String),
    Bool(bool),
    Null,
    /// Milliseconds since the Unix epoch.
    Timestamp(f64),
}

/// Kind tag used in diagnostics and type errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ValueKind {
    Number,
    String,
    Bool,
    Null,
    Timestamp,
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ValueKind::Number => "number",
            ValueKind::String => "string",
            ValueKind::Bool => "boolean",
            ValueKind::Null => "null",
            ValueKind::Timestamp => "timestamp",
        };
        f.write_str(s)
    }
}

impl Value {
    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Number(_) => ValueKind::Number,
            Value::String(_) => ValueKind::String,
            Value::Bool(_) => ValueKind::Bool,
            Value::Null => ValueKind::Null,
            Value::Timestamp(_) => ValueKind::Timestamp,
        }
    }

    /// Numeric view of numbers and timestamps.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Number(n) | Value::Timestamp(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::String(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    fn is_numeric(&self) -> bool {
        matches!(self, Value::Number(_) | Value::Timestamp(_))
    }

    /// Strict comparison. Values of different kinds are incomparable, except
    /// numbers and timestamps which compare numerically. `null` only compares
    /// with `null`.
    pub fn try_cmp(&self, other: &Value) -> Result<Ordering, TypeError> {
        match (self, other) {
            (a, b) if a.is_numeric() && b.is_numeric() => {
                let (x, y) = (a.as_f64().unwrap(), b.as_f64().unwrap());
                x.partial_cmp(&y).ok_or(TypeError::Unordered)
            }
            (Value::String(a), Value::String(b)) => Ok(a.cmp(b)),
            (Value::Bool(a), Value::Bool(b)) => Ok(a.cmp(b)),
            (Value::Null, Value::Null) => Ok(Ordering::Equal),
            (a, b) => Err(TypeError::Mismatch {
                left: a.kind(),
                right: b.kind(),
            }),
        }
    }

    pub fn try_eq(&self, other: &Value) -> Result<bool, TypeError> {
        self.try_cmp(other).map(|o| o == Ordering::Equal)
    }

    /// Total order used for sorting domains and canonical keys. Kinds are
    /// ranked null < bool < number/timestamp < string.
    pub fn total_cmp(&self, other: &Value) -> Ordering {
        fn rank(v: &Value) -> u8 {
            match v {
                Value::Null => 0,
                Value::Bool(_) => 1,
                Value::Number(_) | Value::Timestamp(_) => 2,
                Value::String(_) => 3,
            }
        }
        match (self, other) {
            (a, b) if a.is_numeric() && b.is_numeric() => a.as_f64().unwrap().total_cmp(&b.as_f64().unwrap()),
            (Value::String(a), Value::String(b)) => a.cmp(b),
            (Value::Bool(a), Value::Bool(b)) => a.cmp(b),
            (a, b) => rank(a).cmp(&rank(b)),
        }
    }

    /// Stable textual identity used for row keys and selection stores.
    pub fn canonical_key(&self) -> String {
        match self {
            Value::Number(n) => format!("n:{}", fmt_number(*n)),
            Value::Timestamp(t) => format!("t:{}", fmt_number(*t)),
            Value::String(s) => format!("s:{s}"),
            Value::Bool(b) => format!("b:{b}"),
            Value::Null => "null".to_string(),
        }
    }

    /// Human-facing label (axis ticks, tooltips, diagnostics).
    pub fn label(&self) -> String {
        match self {
            Value::Number(n) => fmt_number(*n),
            Value::String(s) => s.clone(),
            Value::Bool(b) => b.to_string(),
            Value::Null => "null".to_string(),
            Value::Timestamp(t) => format_timestamp(*t),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Number(n) => serde_json::Number::from_f64(*n)
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
            Value::String(s) => serde_json::Value::String(s.clone()),
            Value::Bool(b) => serde_json::Value::Bool(*b),
            Value::Null => serde_json::Value::Null,
            Value::Timestamp(t) => serde_json::Value::String(format_timestamp(*t)),
        }
    }

    /// Converts a JSON scalar. Strings in ISO-8601 date or date-time form
    /// become timestamps. Arrays and objects are rejected.
    pub fn from_json(v: &serde_json::Value) -> Option<Value> {
        match v {
            serde_json::Value::Null => Some(Value::Null),
            serde_json::Value::Bool(b) => Some(Value::Bool(*b)),
            serde_json::Value::Number(n) => n.as_f64().map(Value::Number),
            serde_json::Value::String(s) => Some(
                parse_timestamp(s)
                    .map(Value::Timestamp)
                    .unwrap_or_else(|| Value::String(s.clone())),
            ),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::String(s) => write!(f, "{s:?}"),
            other => f.write_str(&other.label()),
        }
    }
}

impl From<f64> for Value {
    fn from(n: f64) -> Self {
        Value::Number(n)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::String(s.to_string())
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let json = serde_json::Value::deserialize(deserializer)?;
        Value::from_json(&json).ok_or_else(|| serde::de::Error::custom("expected a scalar value"))
    }
}

/// Shortest round-tripping decimal form, with integral values printed
/// without a fractional part.
pub fn fmt_number(n: f64) -> String {
    if n == 0.0 {
        return "0".to_string();
    }
    if n.fract() == 0.0 && n.abs() < 1e15 {
        format!("{}", n as i64)
    } else {
        format!("{n}")
    }
}

pub fn parse_timestamp(s: &str) -> Option<f64> {
    let s = s.trim();
    // Require a leading four-digit year so plain numbers and words never match.
    let b = s.as_bytes();
    if b.len() < 10 || !b[..4].iter().all(u8::is_ascii_digit) || b[4] != b'-' {
        return None;
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.timestamp_millis() as f64);
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(dt.and_utc().timestamp_millis() as f64);
        }
    }
    if s.len() == 10 {
        if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
            return Some(d.and_hms_opt(0, 0, 0)?.and_utc().timestamp_millis() as f64);
        }
    }
    None
}

pub fn format_timestamp(ms: f64) -> String {
    match DateTime::<Utc>::from_timestamp_millis(ms.round() as i64) {
        Some(dt) => dt.to_rfc3339_opts(SecondsFormat::Millis, true),
        None => fmt_number(ms),
    }
}
