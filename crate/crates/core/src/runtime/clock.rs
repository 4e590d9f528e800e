//! Clock arithmetic: pauses, easing and inversion through the time scale.

use crate::compile::ir::{DomainSpec, PauseWindow, RangeSpec, ScaleNode};
use crate::easing::Easing;
use crate::model::value::Value;

/// Maps the cycle clock to the effective clock. Inside a pause window the
/// clock holds the window's anchor; elsewhere the preceding pause time is
/// removed and easing maps the remaining active time over `active_ms`.
pub fn effective_clock(cycle: f64, windows: &[PauseWindow], easing: Easing, active_ms: f64) -> f64 {
    let mut shift = 0.0;
    for w in windows {
        if cycle < w.start_ms {
            break;
        }
        if cycle < w.start_ms + w.duration_ms {
            return w.anchor_ms;
        }
        shift += w.duration_ms;
    }
    let active = cycle - shift;
    if easing == Easing::Linear || active_ms <= 0.0 {
        active
    } else {
        active_ms * easing.apply(active / active_ms)
    }
}

/// Earliest cycle clock position whose effective clock is `anchor`.
pub fn cycle_position(anchor: f64, windows: &[PauseWindow], easing: Easing, active_ms: f64) -> f64 {
    let tau = if easing == Easing::Linear || active_ms <= 0.0 {
        anchor
    } else {
        active_ms * easing.inverse(anchor / active_ms)
    };
    let before: f64 = windows
        .iter()
        .filter(|w| w.anchor_ms < anchor)
        .map(|w| w.duration_ms)
        .sum();
    tau + before
}

fn static_values(scale: &ScaleNode) -> &[Value] {
    match &scale.domain {
        DomainSpec::Static { values } => values,
        _ => &[],
    }
}

/// `(index, count, step)` of the band containing `clock`, for band scales.
pub fn band(scale: &ScaleNode, clock: f64) -> Option<(usize, usize, f64)> {
    let RangeSpec::Steps { step } = scale.range else {
        return None;
    };
    let n = static_values(scale).len();
    if n == 0 {
        return None;
    }
    let i = if step > 0.0 && clock > 0.0 {
        ((clock / step).floor() as usize).min(n - 1)
    } else {
        0
    };
    Some((i, n, step))
}

/// Domain value at `clock`.
pub fn invert(scale: &ScaleNode, clock: f64) -> Value {
    let values = static_values(scale);
    if let Some((i, _, _)) = band(scale, clock) {
        return values[i].clone();
    }
    let (Some(lo), Some(hi)) = (values.first(), values.get(1)) else {
        return Value::Null;
    };
    let RangeSpec::Interval { lo: r0, hi: r1 } = scale.range else {
        return lo.clone();
    };
    let (Some(a), Some(b)) = (lo.as_f64(), hi.as_f64()) else {
        return lo.clone();
    };
    let span = r1 - r0;
    let t = if span > 0.0 { (clock - r0) / span } else { 0.0 };
    let v = a + t * (b - a);
    match lo {
        Value::Timestamp(_) => Value::Timestamp(v),
        _ => Value::Number(v),
    }
}

/// Domain value `offset` bands after the one at `clock`, clamped to the
/// last band. Continuous scales have no keyframes and return the current
/// value.
pub fn keyframe_value(scale: &ScaleNode, clock: f64, offset: usize) -> Value {
    match band(scale, clock) {
        Some((i, n, _)) => static_values(scale)[(i + offset).min(n - 1)].clone(),
        None => invert(scale, clock),
    }
}

/// Fraction of the current band elapsed; 0 within the final band, which
/// has no successor to tween toward.
pub fn tween_fraction(scale: &ScaleNode, clock: f64) -> f64 {
    match band(scale, clock) {
        Some((i, n, step)) if i + 1 < n && step > 0.0 => {
            let u = (clock - i as f64 * step) / step;
            u.clamp(0.0, 1.0)
        }
        _ => 0.0,
    }
}

/// Clock position where `v` starts on the time scale. Discrete values not
/// in the domain snap to the greatest domain value below them.
pub fn clock_position(scale: &ScaleNode, v: &Value) -> Option<f64> {
    let values = static_values(scale);
    match scale.range {
        RangeSpec::Steps { step } => {
            if let Some(i) = values.iter().position(|d| d.try_eq(v).unwrap_or(false)) {
                return Some(i as f64 * step);
            }
            let mut best = None;
            for (i, d) in values.iter().enumerate() {
                if d.try_cmp(v).is_ok_and(|o| o.is_le()) {
                    best = Some(i);
                }
            }
            Some(best.unwrap_or(0) as f64 * step)
        }
        RangeSpec::Interval { lo: r0, hi: r1 } => {
            let (a, b) = (values.first()?.as_f64()?, values.get(1)?.as_f64()?);
            let x = v.as_f64()?.clamp(a.min(b), a.max(b));
            if b == a {
                return Some(r0);
            }
            Some(r0 + (x - a) / (b - a) * (r1 - r0))
        }
        RangeSpec::Colors { .. } => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::ir::ScaleKind;

    fn years() -> ScaleNode {
        ScaleNode {
            name: "time".into(),
            scale: ScaleKind::Band,
            domain: DomainSpec::Static {
                values: (1955..=2005).step_by(5).map(|y| Value::Number(y as f64)).collect(),
            },
            range: RangeSpec::Steps { step: 500.0 },
        }
    }

    #[test]
    fn band_inversion() {
        let s = years();
        assert_eq!(invert(&s, 0.0), Value::Number(1955.0));
        assert_eq!(invert(&s, 500.0), Value::Number(1960.0));
        assert_eq!(invert(&s, 750.0), Value::Number(1960.0));
        assert_eq!(invert(&s, 5499.0), Value::Number(2005.0));
        assert_eq!(keyframe_value(&s, 5499.0, 1), Value::Number(2005.0));
        assert_eq!(tween_fraction(&s, 750.0), 0.5);
        assert_eq!(tween_fraction(&s, 5250.0), 0.0);
    }

    #[test]
    fn continuous_inversion_midpoint() {
        let lo = crate::model::value::parse_timestamp("2020-01-01T00:00:00Z").unwrap();
        let hi = crate::model::value::parse_timestamp("2020-01-01T23:30:00Z").unwrap();
        let s = ScaleNode {
            name: "time".into(),
            scale: ScaleKind::Time,
            domain: DomainSpec::Static {
                values: vec![Value::Timestamp(lo), Value::Timestamp(hi)],
            },
            range: RangeSpec::Interval { lo: 0.0, hi: 10000.0 },
        };
        let mid = lo + 11.75 * 3_600_000.0;
        assert_eq!(invert(&s, 5000.0), Value::Timestamp(mid));
        assert_eq!(clock_position(&s, &Value::Timestamp(mid)), Some(5000.0));
    }

    #[test]
    fn pause_plateau_and_shift() {
        let w = [PauseWindow {
            value: Value::Number(1995.0),
            anchor_ms: 4000.0,
            start_ms: 4000.0,
            duration_ms: 2000.0,
        }];
        assert_eq!(effective_clock(3999.0, &w, Easing::Linear, 5500.0), 3999.0);
        assert_eq!(effective_clock(4000.0, &w, Easing::Linear, 5500.0), 4000.0);
        assert_eq!(effective_clock(5999.0, &w, Easing::Linear, 5500.0), 4000.0);
        assert_eq!(effective_clock(6000.0, &w, Easing::Linear, 5500.0), 4000.0);
        assert_eq!(effective_clock(6500.0, &w, Easing::Linear, 5500.0), 4500.0);
        assert_eq!(cycle_position(4500.0, &w, Easing::Linear, 5500.0), 6500.0);
        assert_eq!(cycle_position(4000.0, &w, Easing::Linear, 5500.0), 4000.0);
    }

    #[test]
    fn easing_applies_to_whole_cycle() {
        let t = 8000.0;
        assert_eq!(effective_clock(t / 2.0, &[], Easing::CubicIn, t), t / 8.0);
        assert_eq!(effective_clock(1234.0, &[], Easing::Linear, t), 1234.0);
    }
}
