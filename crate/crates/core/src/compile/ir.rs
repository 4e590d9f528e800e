//! Dataflow graph IR produced by the compiler and interpreted by the runtime.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::easing::Easing;
use crate::model::expr::Expr;
use crate::model::spec::{Channel, CompareOp, EventSource, MarkType, WidgetKind};
use crate::model::value::Value;

/// Compile stage that emitted a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Base,
    Clock,
    TimeScale,
    Selections,
    FilterTransforms,
    Key,
    EnterExit,
}

impl Stage {
    pub const ANIMATION: [Stage; 6] = [
        Stage::Clock,
        Stage::TimeScale,
        Stage::Selections,
        Stage::FilterTransforms,
        Stage::Key,
        Stage::EnterExit,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub stage: Stage,
    /// Set when a later stage replaced a node emitted by an earlier one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rewritten_by: Option<Stage>,
    #[serde(flatten)]
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeKind {
    EventSource(EventSourceNode),
    Signal(SignalNode),
    Selection(SelectionNode),
    PauseTable(PauseTableNode),
    Dataset(DatasetNode),
    Scale(ScaleNode),
    Mark(MarkNode),
    Widget(WidgetNode),
    EnterExit(EnterExitNode),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSourceNode {
    pub source: EventSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalNode {
    pub name: String,
    pub init: Value,
    pub update: SignalUpdate,
}

/// How a signal's value is recomputed during propagation. Identifiers in
/// `bindings` maps resolve to the named signal node's value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum SignalUpdate {
    /// Set only from outside (widgets, initial value).
    Param,
    /// Accumulates timer `dt` while `gate` evaluates true.
    RawClock {
        timer: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gate: Option<Expr>,
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        bindings: BTreeMap<String, String>,
    },
    /// `raw mod period`.
    CycleClock { raw: String, period: f64 },
    /// Removes pause plateaus from the cycle clock and applies easing over
    /// the remaining `active_ms`.
    EffectiveClock {
        cycle: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pauses: Option<String>,
        easing: Easing,
        active_ms: f64,
    },
    /// Inverts the time scale at the clock position.
    Invert { scale: String, clock: String },
    /// Domain value `offset` keyframes after the current one, clamped to the
    /// last keyframe.
    KeyframeValue {
        scale: String,
        clock: String,
        offset: usize,
    },
    /// Fraction of the current keyframe band elapsed; 0 on the last band.
    TweenFraction { scale: String, clock: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledComparison {
    pub field: String,
    pub op: CompareOp,
    pub rhs: Expr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Membership {
    /// Conjunction of row comparisons; `bindings` resolve rhs identifiers.
    Predicate {
        comparisons: Vec<CompiledComparison>,
        bindings: BTreeMap<String, String>,
    },
    /// Store of projected row keys populated by pointer events.
    Point {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fields: Option<Vec<String>>,
        toggle: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionNode {
    pub name: String,
    pub on: String,
    pub membership: Membership,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauseWindow {
    pub value: Value,
    /// Effective clock position held during the pause.
    pub anchor_ms: f64,
    /// Start of the pause on the cycle clock.
    pub start_ms: f64,
    pub duration_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauseTableNode {
    pub selection: String,
    pub windows: Vec<PauseWindow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    Raw,
    Dataset(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum TransformOp {
    /// Keeps rows where `expr` is true. Identifiers in `bindings` are
    /// signals; all others are row fields.
    Filter {
        expr: Expr,
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        bindings: BTreeMap<String, String>,
    },
    /// Keeps rows whose projection is in a point selection's store.
    InSelection { selection: String },
    /// Joins the input (current keyframe) with `next` by `key`.
    TweenJoin {
        next: String,
        key: String,
        fraction: String,
        interpolate: Vec<String>,
        include_enter: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetNode {
    pub name: String,
    pub source: DatasetSource,
    pub ops: Vec<TransformOp>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleKind {
    Linear,
    Point,
    Band,
    OrdinalColor,
    SequentialColor,
    Sqrt,
    Time,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DomainSpec {
    Static {
        values: Vec<Value>,
    },
    Extent {
        dataset: String,
        fields: Vec<String>,
        zero: bool,
    },
    Distinct {
        dataset: String,
        field: String,
        sort: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RangeSpec {
    Interval {
        lo: f64,
        hi: f64,
    },
    /// Band `i` starts at `i·step`.
    Steps {
        step: f64,
    },
    Colors {
        values: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleNode {
    pub name: String,
    pub scale: ScaleKind,
    pub domain: DomainSpec,
    pub range: RangeSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChannelEncoding {
    Field {
        field: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<String>,
    },
    Value {
        value: Value,
    },
    Conditional {
        selection: String,
        branch: Box<ChannelEncoding>,
        default: Box<ChannelEncoding>,
    },
}

impl ChannelEncoding {
    fn refs<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            ChannelEncoding::Field { scale, .. } => out.extend(scale.as_deref()),
            ChannelEncoding::Value { .. } => {}
            ChannelEncoding::Conditional {
                selection,
                branch,
                default,
            } => {
                out.push(selection);
                branch.refs(out);
                default.refs(out);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkStyle {
    pub fill: String,
    pub stroke: String,
    pub font_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkNode {
    pub mark: MarkType,
    pub dataset: String,
    pub channels: BTreeMap<Channel, ChannelEncoding>,
    pub style: MarkStyle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidgetNode {
    pub name: String,
    pub widget: WidgetKind,
    /// Signal or selection written by the widget.
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

/// Value overrides faded in for entering items and out for exiting items
/// over a tween interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnterExitNode {
    pub mark: String,
    pub dataset: String,
    pub fraction: String,
    pub enter: BTreeMap<Channel, Value>,
    pub exit: BTreeMap<Channel, Value>,
}

impl Node {
    /// Upstream node ids this node reads.
    pub fn inputs(&self) -> Vec<&str> {
        let mut out = Vec::new();
        match &self.kind {
            NodeKind::EventSource(_) | NodeKind::Widget(_) => {}
            NodeKind::Signal(s) => match &s.update {
                SignalUpdate::Param => {}
                SignalUpdate::RawClock { timer, bindings, .. } => {
                    out.push(timer.as_str());
                    out.extend(bindings.values().map(String::as_str));
                }
                SignalUpdate::CycleClock { raw, .. } => out.push(raw),
                SignalUpdate::EffectiveClock { cycle, pauses, .. } => {
                    out.push(cycle);
                    out.extend(pauses.as_deref());
                }
                SignalUpdate::Invert { scale, clock }
                | SignalUpdate::KeyframeValue { scale, clock, .. }
                | SignalUpdate::TweenFraction { scale, clock } => {
                    out.push(scale);
                    out.push(clock);
                }
            },
            NodeKind::Selection(s) => {
                out.push(&s.on);
                if let Membership::Predicate { bindings, .. } = &s.membership {
                    out.extend(bindings.values().map(String::as_str));
                }
            }
            NodeKind::PauseTable(_) => {}
            NodeKind::Dataset(d) => {
                if let DatasetSource::Dataset(src) = &d.source {
                    out.push(src);
                }
                for op in &d.ops {
                    match op {
                        TransformOp::Filter { bindings, .. } => out.extend(bindings.values().map(String::as_str)),
                        TransformOp::InSelection { selection } => out.push(selection),
                        TransformOp::TweenJoin { next, fraction, .. } => {
                            out.push(next);
                            out.push(fraction);
                        }
                    }
                }
            }
            NodeKind::Scale(s) => match &s.domain {
                DomainSpec::Static { .. } => {}
                DomainSpec::Extent { dataset, .. } | DomainSpec::Distinct { dataset, .. } => out.push(dataset),
            },
            NodeKind::Mark(m) => {
                out.push(&m.dataset);
                for c in m.channels.values() {
                    c.refs(&mut out);
                }
            }
            NodeKind::EnterExit(e) => {
                out.push(&e.dataset);
                out.push(&e.fraction);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Downstream nodes written by this node (widgets and overrides).
    pub fn targets(&self) -> Vec<&str> {
        match &self.kind {
            NodeKind::Widget(w) => vec![w.target.as_str()],
            NodeKind::EnterExit(e) => vec![e.mark.as_str()],
            _ => Vec::new(),
        }
    }
}

/// Compiled program. Nodes are keyed by id; `edges` run producer to
/// consumer and are derived from node references.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataflowGraph {
    pub width: f64,
    pub height: f64,
    pub nodes: BTreeMap<String, Node>,
    pub edges: Vec<(String, String)>,
    pub roots: Vec<String>,
}

impl DataflowGraph {
    pub fn from_nodes(width: f64, height: f64, nodes: impl IntoIterator<Item = Node>) -> Self {
        let mut g = DataflowGraph {
            width,
            height,
            nodes: nodes.into_iter().map(|n| (n.id.clone(), n)).collect(),
            edges: Vec::new(),
            roots: Vec::new(),
        };
        g.rebuild_edges();
        g
    }

    /// Recomputes `edges` and `roots` from node references.
    pub fn rebuild_edges(&mut self) {
        let mut edges = Vec::new();
        let mut roots = Vec::new();
        for n in self.nodes.values() {
            for i in n.inputs() {
                edges.push((i.to_string(), n.id.clone()));
            }
            for t in n.targets() {
                edges.push((n.id.clone(), t.to_string()));
            }
            if matches!(n.kind, NodeKind::EventSource(_) | NodeKind::Widget(_)) {
                roots.push(n.id.clone());
            }
        }
        edges.sort();
        edges.dedup();
        self.edges = edges;
        self.roots = roots;
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn signal(&self, id: &str) -> Option<&SignalNode> {
        match &self.nodes.get(id)?.kind {
            NodeKind::Signal(s) => Some(s),
            _ => None,
        }
    }

    pub fn dataset(&self, id: &str) -> Option<&DatasetNode> {
        match &self.nodes.get(id)?.kind {
            NodeKind::Dataset(d) => Some(d),
            _ => None,
        }
    }

    pub fn scale(&self, id: &str) -> Option<&ScaleNode> {
        match &self.nodes.get(id)?.kind {
            NodeKind::Scale(s) => Some(s),
            _ => None,
        }
    }

    pub fn selection(&self, id: &str) -> Option<&SelectionNode> {
        match &self.nodes.get(id)?.kind {
            NodeKind::Selection(s) => Some(s),
            _ => None,
        }
    }

    pub fn marks(&self) -> impl Iterator<Item = (&str, &MarkNode)> {
        self.nodes.values().filter_map(|n| match &n.kind {
            NodeKind::Mark(m) => Some((n.id.as_str(), m)),
            _ => None,
        })
    }

    pub fn widgets(&self) -> impl Iterator<Item = (&str, &WidgetNode)> {
        self.nodes.values().filter_map(|n| match &n.kind {
            NodeKind::Widget(w) => Some((n.id.as_str(), w)),
            _ => None,
        })
    }

    pub fn signals(&self) -> impl Iterator<Item = (&str, &SignalNode)> {
        self.nodes.values().filter_map(|n| match &n.kind {
            NodeKind::Signal(s) => Some((n.id.as_str(), s)),
            _ => None,
        })
    }

    /// Ids of raw clock signals.
    pub fn clocks(&self) -> Vec<&str> {
        self.signals()
            .filter(|(_, s)| matches!(s.update, SignalUpdate::RawClock { .. }))
            .map(|(id, _)| id)
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("graph serializes")
    }

    /// Pretty-printed IR document.
    pub fn to_document(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("graph serializes");
        s.push('\n');
        s
    }
}

pub fn signal_id(name: &str) -> String {
    format!("signal:{name}")
}

pub fn selection_id(name: &str) -> String {
    format!("selection:{name}")
}

pub fn dataset_id(name: &str) -> String {
    format!("data:{name}")
}

pub fn scale_id(name: &str) -> String {
    format!("scale:{name}")
}

pub fn event_id(source: EventSource) -> String {
    format!("event:{}", source.name())
}

pub fn widget_id(name: &str) -> String {
    format!("widget:{name}")
}
