//! Frame encoding: resolved mark items, axes and legends for the current
//! runtime state, plus SVG output and hit testing.

mod encode;
mod hit;
mod svg;

use std::collections::BTreeMap;

use serde::Serialize;

pub use encode::{apply_scale, encode_frame, nice_ticks, Scaled};
pub use hit::hit_test;
pub use svg::{render_svg, PAD_BOTTOM, PAD_LEFT, PAD_RIGHT, PAD_TOP};

use crate::model::spec::MarkType;
use crate::model::value::Value;
use crate::runtime::WidgetState;

/// One visual item in chart-local pixels. Bars carry their rectangle in
/// `x..x2` and `y..y2`; ticks carry a segment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkItem {
    pub kind: MarkType,
    /// Source row id.
    pub key: String,
    pub x: f64,
    pub y: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y2: Option<f64>,
    /// Area in square pixels.
    pub size: f64,
    pub fill: String,
    pub stroke: String,
    pub opacity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tooltip: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    /// Line series the item belongs to.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

impl MarkItem {
    pub fn radius(&self) -> f64 {
        (self.size.max(0.0) / std::f64::consts::PI).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tick {
    pub position: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisItem {
    pub channel: String,
    pub title: String,
    pub domain: Vec<Value>,
    pub ticks: Vec<Tick>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LegendEntry {
    pub label: String,
    pub color: String,
}

/// Everything needed to draw one frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenegraph {
    pub width: f64,
    pub height: f64,
    pub mark: MarkType,
    pub items: Vec<MarkItem>,
    pub axes: Vec<AxisItem>,
    pub legend: Vec<LegendEntry>,
    pub widgets: Vec<WidgetState>,
    /// Current value of each animated selection.
    pub anim_values: BTreeMap<String, Value>,
    /// Store contents of each point selection.
    pub selections: BTreeMap<String, Vec<String>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Scenegraph {
    /// Frame document: the scenegraph as pretty JSON with a trailing newline.
    pub fn to_document(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenegraph serializes");
        s.push('\n');
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("scenegraph serializes")
    }
}
