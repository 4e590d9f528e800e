use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modifier {
    Shift,
    Ctrl,
    Alt,
    Meta,
}

/// Input to the runtime. Coordinates are chart-local pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    Timer {
        dt: f64,
    },
    #[serde(rename = "pointermove")]
    PointerMove {
        x: f64,
        y: f64,
    },
    Click {
        x: f64,
        y: f64,
        #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
        modifiers: BTreeSet<Modifier>,
    },
    WidgetSet {
        widget: String,
        value: Value,
    },
}

impl Event {
    pub fn timer(dt: f64) -> Event {
        Event::Timer { dt }
    }

    pub fn click(x: f64, y: f64) -> Event {
        Event::Click {
            x,
            y,
            modifiers: BTreeSet::new(),
        }
    }

    pub fn shift_click(x: f64, y: f64) -> Event {
        Event::Click {
            x,
            y,
            modifiers: [Modifier::Shift].into(),
        }
    }

    pub fn widget_set(widget: impl Into<String>, value: impl Into<Value>) -> Event {
        Event::WidgetSet {
            widget: widget.into(),
            value: value.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_format() {
        let e: Event = serde_json::from_str(r#"{"type": "click", "x": 1, "y": 2, "modifiers": ["shift"]}"#).unwrap();
        assert_eq!(e, Event::shift_click(1.0, 2.0));
        let e: Event =
            serde_json::from_str(r#"{"type": "widget_set", "widget": "current_frame", "value": 1995}"#).unwrap();
        assert_eq!(e, Event::widget_set("current_frame", 1995.0));
        assert_eq!(
            serde_json::to_string(&Event::timer(16.0)).unwrap(),
            r#"{"type":"timer","dt":16.0}"#
        );
        let e: Event = serde_json::from_str(r#"{"type": "pointermove", "x": 3, "y": 4}"#).unwrap();
        assert_eq!(e, Event::PointerMove { x: 3.0, y: 4.0 });
    }
}
