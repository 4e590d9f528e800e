//! Deterministic interpreter for a [`DataflowGraph`].
//!
//! Time only moves through [`RuntimeState::advance`]; the runtime never
//! reads a wall clock. Every mutation ends with one full propagation in
//! topological order, so no partially updated state is observable.

pub mod clock;
pub mod event;
pub mod scales;
pub mod tween;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;

pub use clock::effective_clock;
pub use event::{Event, Modifier};
pub use scales::{ResolvedDomain, ResolvedScale};
pub use tween::tween_dataset;

use crate::compile::ir::*;
use crate::compile::stages::{anim_value_id, clock_id, cycle_clock_id, raw_clock_id};
use crate::compile::{topological_order, verify_graph};
use crate::error::RuntimeError;
use crate::model::expr::{apply_binary, eval_expression, Expr};
use crate::model::spec::WidgetKind;
use crate::model::table::{Column, DataTable, FieldType};
use crate::model::value::Value;
use crate::normalize::PLAY_PARAM;
use crate::scene;

/// Hidden column holding each source row's index.
pub const ROW_ID: &str = "_row";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidgetState {
    pub id: String,
    pub kind: WidgetKind,
    pub target: String,
    pub value: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeState {
    graph: Arc<DataflowGraph>,
    order: Arc<Vec<String>>,
    source: Arc<DataTable>,
    signals: BTreeMap<String, Value>,
    stores: BTreeMap<String, BTreeSet<String>>,
    datasets: BTreeMap<String, DataTable>,
    scales: BTreeMap<String, ResolvedScale>,
    warnings: BTreeSet<String>,
}

fn truthy(v: &Value) -> bool {
    matches!(v, Value::Bool(true))
}

/// Fields a graph reads from the raw table.
fn required_fields(g: &DataflowGraph) -> BTreeSet<String> {
    fn channel(c: &ChannelEncoding, out: &mut BTreeSet<String>) {
        match c {
            ChannelEncoding::Field { field, .. } => {
                out.insert(field.clone());
            }
            ChannelEncoding::Value { .. } => {}
            ChannelEncoding::Conditional { branch, default, .. } => {
                channel(branch, out);
                channel(default, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    for n in g.nodes.values() {
        match &n.kind {
            NodeKind::Mark(m) => m.channels.values().for_each(|c| channel(c, &mut out)),
            NodeKind::Selection(SelectionNode {
                membership: Membership::Predicate { comparisons, .. },
                ..
            }) => out.extend(comparisons.iter().map(|c| c.field.clone())),
            NodeKind::Selection(SelectionNode {
                membership: Membership::Point { fields: Some(f), .. },
                ..
            }) => out.extend(f.iter().cloned()),
            NodeKind::Dataset(d) => {
                for op in &d.ops {
                    if let TransformOp::TweenJoin { key, interpolate, .. } = op {
                        out.insert(key.clone());
                        out.extend(interpolate.iter().cloned());
                    }
                }
            }
            _ => {}
        }
    }
    out
}

impl RuntimeState {
    /// Builds the initial state: clocks at zero, signals at their initial
    /// values, one full propagation.
    pub fn init(graph: impl Into<Arc<DataflowGraph>>, data: &DataTable) -> Result<RuntimeState, RuntimeError> {
        let graph: Arc<DataflowGraph> = graph.into();
        if let Some(d) = verify_graph(&graph).into_iter().find(|d| d.is_error()) {
            return Err(RuntimeError::Graph(d.to_string()));
        }
        let order =
            topological_order(&graph).map_err(|c| RuntimeError::Graph(format!("cycle through {}", c.join(", "))))?;
        for f in required_fields(&graph) {
            if data.column(&f).is_none() {
                return Err(RuntimeError::MissingField(f));
            }
        }
        let source = if data.column(ROW_ID).is_some() {
            data.clone()
        } else {
            data.with_column(Column::new(ROW_ID, FieldType::Ordinal), |i| Value::Number(i as f64))
                .map_err(|e| RuntimeError::Graph(e.to_string()))?
        };
        let signals = graph
            .signals()
            .map(|(id, s)| (id.to_string(), s.init.clone()))
            .collect();
        let stores = graph
            .nodes
            .values()
            .filter_map(|n| match &n.kind {
                NodeKind::Selection(SelectionNode {
                    membership: Membership::Point { .. },
                    ..
                }) => Some((n.id.clone(), BTreeSet::new())),
                _ => None,
            })
            .collect();
        let mut state = RuntimeState {
            graph,
            order: Arc::new(order),
            source: Arc::new(source),
            signals,
            stores,
            datasets: BTreeMap::new(),
            scales: BTreeMap::new(),
            warnings: BTreeSet::new(),
        };
        state.propagate();
        Ok(state)
    }

    pub fn graph(&self) -> &DataflowGraph {
        &self.graph
    }

    /// Source table with the row id column.
    pub fn source(&self) -> &DataTable {
        &self.source
    }

    pub fn signal(&self, id: &str) -> Option<&Value> {
        self.signals.get(id)
    }

    pub fn signals(&self) -> &BTreeMap<String, Value> {
        &self.signals
    }

    pub fn dataset(&self, id: &str) -> Option<&DataTable> {
        self.datasets.get(id)
    }

    pub fn scale(&self, id: &str) -> Option<&ResolvedScale> {
        self.scales.get(id)
    }

    pub fn store(&self, selection_id: &str) -> Option<&BTreeSet<String>> {
        self.stores.get(selection_id)
    }

    /// Point selection stores keyed by selection id.
    pub fn stores(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.stores
    }

    pub fn warnings(&self) -> impl Iterator<Item = &str> {
        self.warnings.iter().map(String::as_str)
    }

    /// Names of animated selections, in graph order.
    pub fn animated_selections(&self) -> Vec<&str> {
        self.graph
            .nodes
            .values()
            .filter_map(|n| match &n.kind {
                NodeKind::Selection(
                    s @ SelectionNode {
                        membership: Membership::Predicate { .. },
                        ..
                    },
                ) => Some(s.name.as_str()),
                _ => None,
            })
            .collect()
    }

    /// The selection whose clock drives the rendered keyframes: the first
    /// animated selection filtering the mark data, else the first animated
    /// selection.
    fn primary_selection(&self) -> Option<String> {
        let animated = self.animated_selections();
        let mut ds = self.graph.marks().next().map(|(_, m)| m.dataset.clone());
        let mut filtering = None;
        while let Some(id) = ds {
            let Some(d) = self.graph.dataset(&id) else { break };
            for op in &d.ops {
                if let TransformOp::Filter { bindings, .. } = op {
                    if let Some(sig) = bindings.get(crate::ANIM_VALUE) {
                        if let Some(s) = animated.iter().find(|s| anim_value_id(s) == *sig) {
                            filtering = Some(s.to_string());
                        }
                    }
                }
            }
            ds = match &d.source {
                DatasetSource::Dataset(s) => Some(s.clone()),
                DatasetSource::Raw => None,
            };
        }
        filtering.or_else(|| animated.first().map(|s| s.to_string()))
    }

    /// Current `anim_value` of the primary animated selection; null for a
    /// static graph.
    pub fn current_anim_value(&self) -> Value {
        self.primary_selection()
            .and_then(|s| self.signals.get(&anim_value_id(&s)).cloned())
            .unwrap_or(Value::Null)
    }

    /// Effective clock of the primary animated selection.
    pub fn current_clock(&self) -> Option<f64> {
        let s = self.primary_selection()?;
        self.signals.get(&clock_id(&s))?.as_f64()
    }

    /// Raw clock of the primary animated selection.
    pub fn raw_clock(&self) -> Option<f64> {
        let s = self.primary_selection()?;
        self.signals.get(&raw_clock_id(&s))?.as_f64()
    }

    /// Full cycle length (including pauses) of the primary selection.
    pub fn cycle_ms(&self) -> Option<f64> {
        let s = self.primary_selection()?;
        match self.graph.signal(&cycle_clock_id(&s))?.update {
            SignalUpdate::CycleClock { period, .. } => Some(period),
            _ => None,
        }
    }

    /// Steps the logical clock: each raw clock whose gate holds moves by
    /// `dt`, then the graph propagates.
    pub fn advance(&mut self, dt: f64) -> Result<(), RuntimeError> {
        if dt.is_nan() || dt < 0.0 || dt.is_infinite() {
            return Err(RuntimeError::NegativeStep(dt));
        }
        let mut moves = Vec::new();
        for id in self.order.iter() {
            let Some(SignalNode {
                update: SignalUpdate::RawClock { gate, bindings, .. },
                ..
            }) = self.graph.signal(id)
            else {
                continue;
            };
            let open = match gate {
                None => true,
                Some(g) => self.eval_bound(g, bindings, None).is_some_and(|v| truthy(&v)),
            };
            if open {
                moves.push(id.clone());
            }
        }
        for id in moves {
            let v = self.signals.get(&id).and_then(Value::as_f64).unwrap_or(0.0);
            self.signals.insert(id, Value::Number(v + dt));
        }
        self.propagate();
        Ok(())
    }

    pub fn inject_event(&mut self, event: &Event) -> Result<(), RuntimeError> {
        match event {
            Event::Timer { dt } => self.advance(*dt),
            Event::WidgetSet { widget, value } => self.set_widget(widget, value),
            Event::PointerMove { x, y } => {
                let hit = self.hit(*x, *y);
                for (id, fields) in self.point_selections(false) {
                    let key = hit.as_deref().and_then(|r| self.project_row_key(r, fields.as_deref()));
                    let store = self.stores.entry(id).or_default();
                    store.clear();
                    store.extend(key);
                }
                self.propagate();
                Ok(())
            }
            Event::Click { x, y, modifiers } => {
                let hit = self.hit(*x, *y);
                let shift = modifiers.contains(&Modifier::Shift);
                for (id, fields) in self.point_selections(true) {
                    let key = hit.as_deref().and_then(|r| self.project_row_key(r, fields.as_deref()));
                    let store = self.stores.entry(id).or_default();
                    match (key, shift) {
                        (Some(k), true) => {
                            if !store.remove(&k) {
                                store.insert(k);
                            }
                        }
                        (Some(k), false) => {
                            store.clear();
                            store.insert(k);
                        }
                        (None, true) => {}
                        (None, false) => store.clear(),
                    }
                }
                self.propagate();
                Ok(())
            }
        }
    }

    /// Point selections driven by clicks (`toggle`) or by pointer moves,
    /// with their projections.
    fn point_selections(&self, toggle: bool) -> Vec<(String, Option<Vec<String>>)> {
        self.graph
            .nodes
            .values()
            .filter_map(|n| match &n.kind {
                NodeKind::Selection(SelectionNode {
                    membership: Membership::Point { toggle: t, fields },
                    ..
                }) if *t == toggle => Some((n.id.clone(), fields.clone())),
                _ => None,
            })
            .collect()
    }

    /// Row id of the topmost rendered item under the pointer.
    fn hit(&self, x: f64, y: f64) -> Option<String> {
        scene::hit_test(&scene::encode_frame(self), x, y)
    }

    fn set_widget(&mut self, name: &str, value: &Value) -> Result<(), RuntimeError> {
        let id = if name.starts_with("widget:") {
            name.to_string()
        } else {
            widget_id(name)
        };
        let w = match self.graph.node(&id).map(|n| &n.kind) {
            Some(NodeKind::Widget(w)) => w.clone(),
            _ => return Err(RuntimeError::UnknownWidget(name.to_string())),
        };
        let bad = |m: &str| RuntimeError::WidgetValue {
            widget: w.name.clone(),
            message: m.to_string(),
        };
        match w.widget {
            WidgetKind::Checkbox => {
                let Value::Bool(_) = value else {
                    return Err(bad("expected a boolean"));
                };
                self.signals.insert(w.target.clone(), value.clone());
            }
            WidgetKind::RangeSlider => {
                let is_clock = matches!(
                    self.graph.signal(&w.target).map(|s| &s.update),
                    Some(SignalUpdate::RawClock { .. })
                );
                if is_clock {
                    self.scrub(&w, value).map_err(|m| bad(&m))?;
                } else {
                    if value.as_f64().is_none() {
                        return Err(bad("expected a number"));
                    }
                    self.signals.insert(w.target.clone(), value.clone());
                }
            }
        }
        self.propagate();
        Ok(())
    }

    /// Moves every animated clock to where `value` starts and pauses
    /// playback by clearing the boolean params gating the bound clock.
    fn scrub(&mut self, w: &WidgetNode, value: &Value) -> Result<(), String> {
        let time = self
            .graph
            .scale(crate::compile::stages::TIME_SCALE)
            .ok_or("graph has no time scale")?
            .clone();
        let target = match (&time.domain, &time.range, value) {
            // Index-based slider over a non-numeric discrete domain.
            (DomainSpec::Static { values }, RangeSpec::Steps { .. }, Value::Number(i))
                if values.iter().any(|v| v.as_f64().is_none()) =>
            {
                let i = (i.max(0.0).round() as usize).min(values.len().saturating_sub(1));
                values.get(i).cloned().ok_or("empty time domain")?
            }
            (_, _, v) if v.as_f64().is_some() || matches!(v, Value::String(_)) => v.clone(),
            _ => return Err("expected a number".into()),
        };
        let anchor = clock::clock_position(&time, &target).ok_or("value outside the time domain")?;
        for s in self
            .animated_selections()
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>()
        {
            let Some(SignalUpdate::EffectiveClock {
                pauses,
                easing,
                active_ms,
                ..
            }) = self.graph.signal(&clock_id(&s)).map(|n| n.update.clone())
            else {
                continue;
            };
            let windows = pauses
                .and_then(|p| match &self.graph.node(&p)?.kind {
                    NodeKind::PauseTable(t) => Some(t.windows.clone()),
                    _ => None,
                })
                .unwrap_or_default();
            let mut pos = clock::cycle_position(anchor, &windows, easing, active_ms);
            // The cycle clock wraps at the period, so the end of a continuous
            // domain is reached just before it.
            if let Some(SignalUpdate::CycleClock { period, .. }) =
                self.graph.signal(&cycle_clock_id(&s)).map(|n| &n.update)
            {
                if *period > 0.0 && pos >= *period {
                    pos = period.next_down();
                }
            }
            self.signals.insert(raw_clock_id(&s), Value::Number(pos));
        }
        if let Some(SignalUpdate::RawClock { bindings, .. }) = self.graph.signal(&w.target).map(|s| &s.update) {
            for sig in bindings.values() {
                if matches!(self.signals.get(sig), Some(Value::Bool(_))) {
                    self.signals.insert(sig.clone(), Value::Bool(false));
                }
            }
        }
        // A slider always pauses the auto play checkbox, even when the
        // gate is a compound expression.
        let play = signal_id(PLAY_PARAM);
        if matches!(self.signals.get(&play), Some(Value::Bool(_))) {
            self.signals.insert(play, Value::Bool(false));
        }
        Ok(())
    }

    pub fn widgets(&self) -> Vec<WidgetState> {
        self.graph
            .widgets()
            .map(|(_, w)| {
                let value = match w.widget {
                    WidgetKind::Checkbox => self.signals.get(&w.target).cloned(),
                    WidgetKind::RangeSlider => {
                        let clocked = matches!(
                            self.graph.signal(&w.target).map(|s| &s.update),
                            Some(SignalUpdate::RawClock { .. })
                        );
                        if clocked {
                            self.signals.get(&anim_value_id(&w.name)).cloned()
                        } else {
                            self.signals.get(&w.target).cloned()
                        }
                    }
                };
                WidgetState {
                    id: w.name.clone(),
                    kind: w.widget,
                    target: w.target.clone(),
                    value: value.unwrap_or(Value::Null),
                    min: w.min,
                    max: w.max,
                    step: w.step,
                }
            })
            .collect()
    }

    /// Evaluates `expr` with `bindings` resolved to signal values and other
    /// identifiers to fields of `row`.
    fn eval_bound(
        &self,
        expr: &Expr,
        bindings: &BTreeMap<String, String>,
        row: Option<(&DataTable, &[Value])>,
    ) -> Option<Value> {
        let env = |name: &str| -> Option<Value> {
            if let Some(sig) = bindings.get(name) {
                return self.signals.get(sig).cloned();
            }
            let (t, r) = row?;
            t.column_index(name).map(|i| r[i].clone())
        };
        eval_expression(expr, &env).ok()
    }

    /// Membership of one row of `table` in the named selection. Predicate
    /// selections test their comparisons against the current signals;
    /// point selections test the row's projection against their store.
    pub fn evaluate_selection(&self, name: &str, table: &DataTable, row: &[Value]) -> bool {
        let id = if name.starts_with("selection:") {
            name.to_string()
        } else {
            selection_id(name)
        };
        let Some(sel) = self.graph.selection(&id) else {
            return false;
        };
        match &sel.membership {
            Membership::Predicate { comparisons, bindings } => comparisons.iter().all(|c| {
                let Some(lhs) = table.column_index(&c.field).map(|i| &row[i]) else {
                    return false;
                };
                let Some(rhs) = self.eval_bound(&c.rhs, bindings, Some((table, row))) else {
                    return false;
                };
                matches!(apply_binary(c.op.to_binary(), lhs, &rhs), Ok(Value::Bool(true)))
            }),
            Membership::Point { fields, .. } => {
                let store = &self.stores[&id];
                !store.is_empty() && project(table, row, fields.as_deref()).is_some_and(|k| store.contains(&k))
            }
        }
    }

    fn propagate(&mut self) {
        let graph = Arc::clone(&self.graph);
        let order = Arc::clone(&self.order);
        for id in order.iter() {
            let node = &graph.nodes[id];
            match &node.kind {
                NodeKind::Signal(s) => {
                    if let Some(v) = self.compute_signal(&s.update) {
                        self.signals.insert(id.clone(), v);
                    }
                }
                NodeKind::Dataset(d) => {
                    let t = self.materialize(id, d);
                    self.datasets.insert(id.clone(), t);
                }
                NodeKind::Scale(s) => {
                    let data = match &s.domain {
                        DomainSpec::Extent { dataset, .. } | DomainSpec::Distinct { dataset, .. } => {
                            self.datasets.get(dataset)
                        }
                        DomainSpec::Static { .. } => None,
                    };
                    let r = scales::resolve_scale(s, data, self.scales.get(id));
                    self.scales.insert(id.clone(), r);
                }
                _ => {}
            }
        }
    }

    /// Store key of the source row with id `row_id` under a projection.
    fn project_row_key(&self, row_id: &str, fields: Option<&[String]>) -> Option<String> {
        let n: f64 = row_id.parse().ok()?;
        let ri = self.source.column_index(ROW_ID)?;
        let row = self.source.rows().iter().find(|r| r[ri].as_f64() == Some(n))?;
        project(&self.source, row, fields)
    }

    fn compute_signal(&self, update: &SignalUpdate) -> Option<Value> {
        let num = |id: &str| self.signals.get(id).and_then(Value::as_f64).unwrap_or(0.0);
        Some(match update {
            SignalUpdate::Param | SignalUpdate::RawClock { .. } => return None,
            SignalUpdate::CycleClock { raw, period } => {
                let r = num(raw);
                Value::Number(if *period > 0.0 { r % period } else { 0.0 })
            }
            SignalUpdate::EffectiveClock {
                cycle,
                pauses,
                easing,
                active_ms,
            } => {
                let windows: &[PauseWindow] = match pauses.as_ref().and_then(|p| self.graph.node(p)) {
                    Some(Node {
                        kind: NodeKind::PauseTable(t),
                        ..
                    }) => &t.windows,
                    _ => &[],
                };
                Value::Number(clock::effective_clock(num(cycle), windows, *easing, *active_ms))
            }
            SignalUpdate::Invert { scale, clock } => clock::invert(self.graph.scale(scale)?, num(clock)),
            SignalUpdate::KeyframeValue { scale, clock, offset } => {
                clock::keyframe_value(self.graph.scale(scale)?, num(clock), *offset)
            }
            SignalUpdate::TweenFraction { scale, clock } => {
                Value::Number(clock::tween_fraction(self.graph.scale(scale)?, num(clock)))
            }
        })
    }

    fn materialize(&mut self, id: &str, d: &DatasetNode) -> DataTable {
        let mut t = match &d.source {
            DatasetSource::Raw => (*self.source).clone(),
            DatasetSource::Dataset(s) => self.datasets.get(s).cloned().unwrap_or_default(),
        };
        for op in &d.ops {
            t = match op {
                TransformOp::Filter { expr, bindings } => {
                    let keep: Vec<bool> = t
                        .rows()
                        .iter()
                        .map(|r| {
                            self.eval_bound(expr, bindings, Some((&t, r)))
                                .is_some_and(|v| truthy(&v))
                        })
                        .collect();
                    let mut i = 0;
                    t.filter(|_| {
                        i += 1;
                        keep[i - 1]
                    })
                }
                TransformOp::InSelection { selection } => {
                    let keep: Vec<bool> = t
                        .rows()
                        .iter()
                        .map(|r| self.evaluate_selection(selection, &t, r))
                        .collect();
                    let mut i = 0;
                    t.filter(|_| {
                        i += 1;
                        keep[i - 1]
                    })
                }
                TransformOp::TweenJoin {
                    next,
                    key,
                    fraction,
                    interpolate,
                    include_enter,
                } => {
                    let u = self.signals.get(fraction).and_then(Value::as_f64).unwrap_or(0.0);
                    let next_t = self.datasets.get(next).cloned().unwrap_or_else(|| t.empty_like());
                    match tween::tween_dataset(&t, &next_t, key, u, interpolate, *include_enter) {
                        Ok(out) => out,
                        Err(e) => {
                            self.warnings
                                .insert(format!("{id}: {e}; showing keyframes without tweening"));
                            tween::with_status(&t, tween::STATUS_UPDATE)
                        }
                    }
                }
            };
        }
        t
    }
}

/// Canonical projection key of `row`: the row id by default, else the
/// listed fields.
pub(crate) fn project(table: &DataTable, row: &[Value], fields: Option<&[String]>) -> Option<String> {
    match fields {
        None => {
            let i = table.column_index(ROW_ID)?;
            Some(format!("row:{}", row[i].label()))
        }
        Some(fs) => {
            let mut parts = Vec::with_capacity(fs.len());
            for f in fs {
                parts.push(row[table.column_index(f)?].canonical_key());
            }
            Some(parts.join("|"))
        }
    }
}
