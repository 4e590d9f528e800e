//! Newline-delimited event traces and their headless replay.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::RuntimeError;
use crate::runtime::{Event, RuntimeState};
use crate::scene::{encode_frame, Scenegraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t_offset_ms: f64,
    pub event: Event,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("trace line {line}: offset {offset} precedes the previous record")]
    OutOfOrder { line: usize, offset: f64 },
    #[error("trace record {index}: {source}")]
    Event {
        index: usize,
        #[source]
        source: RuntimeError,
    },
}

/// Parses one record per non-blank line.
pub fn parse_trace(text: &str) -> Result<Vec<TraceRecord>, TraceError> {
    let mut out = Vec::new();
    let mut last = 0.0;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: TraceRecord = serde_json::from_str(line).map_err(|e| TraceError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        if rec.t_offset_ms.is_nan() || rec.t_offset_ms < last {
            return Err(TraceError::OutOfOrder {
                line: i + 1,
                offset: rec.t_offset_ms,
            });
        }
        last = rec.t_offset_ms;
        out.push(rec);
    }
    Ok(out)
}

/// Applies `records` in order, advancing logical time by the gap since the
/// previous record (or since zero) before each event. Returns the frame
/// after each record followed by the final-state frame.
pub fn replay(state: &mut RuntimeState, records: &[TraceRecord]) -> Result<Vec<Scenegraph>, TraceError> {
    let mut frames = Vec::with_capacity(records.len() + 1);
    let mut now = 0.0;
    for (index, rec) in records.iter().enumerate() {
        let gap = rec.t_offset_ms - now;
        if gap > 0.0 {
            state
                .advance(gap)
                .map_err(|source| TraceError::Event { index, source })?;
        }
        now = rec.t_offset_ms;
        state
            .inject_event(&rec.event)
            .map_err(|source| TraceError::Event { index, source })?;
        frames.push(encode_frame(state));
    }
    frames.push(encode_frame(state));
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ndjson_and_rejects_regressions() {
        let text = r#"{"t_offset_ms": 0, "event": {"type": "timer", "dt": 10}}

{"t_offset_ms": 40, "event": {"type": "click", "x": 1, "y": 2}}"#;
        let recs = parse_trace(text).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].event, Event::click(1.0, 2.0));

        let bad = r#"{"t_offset_ms": 5, "event": {"type": "timer", "dt": 1}}
{"t_offset_ms": 4, "event": {"type": "timer", "dt": 1}}"#;
        assert!(matches!(parse_trace(bad), Err(TraceError::OutOfOrder { line: 2, .. })));
        assert!(matches!(parse_trace("{"), Err(TraceError::Parse { line: 1, .. })));
    }
}
