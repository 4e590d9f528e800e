use std::collections::{BTreeMap, BTreeSet};

use super::ir::*;
use super::timing::Timeline;
use super::GraphBuilder;
use crate::easing::Easing;
use crate::error::CompileError;
use crate::model::expr::Expr;
use crate::model::spec::{
    Channel, ChannelDef, EventSource, MarkType, ParamDef, PauseEntry, SelectionDef, TransformDef, WidgetKind,
};
use crate::model::table::{DataTable, FieldType};
use crate::model::value::Value;
use crate::normalize::NormalizedSpec;
use crate::ANIM_VALUE;

pub const TABLEAU10: [&str; 10] = [
    "#4c78a8", "#f58518", "#e45756", "#72b7b2", "#54a24b", "#eeca3b", "#b279a2", "#ff9da6", "#9d755d", "#bab0ac",
];
pub const SEQUENTIAL: [&str; 2] = ["#deebf7", "#08519c"];
pub const MAX_RADIUS: f64 = 20.0;

pub(crate) const SOURCE: &str = "data:source";
pub(crate) const RENDERED: &str = "data:rendered";
pub(crate) const MARK: &str = "mark:main";
pub(crate) const TIME_SCALE: &str = "scale:time";
pub(crate) const KEYFRAME_CURRENT: &str = "data:keyframe_current";
pub(crate) const KEYFRAME_NEXT: &str = "data:keyframe_next";
pub(crate) const KEYFRAME_TWEEN: &str = "data:keyframe_tween";
pub(crate) const ENTER_EXIT: &str = "enter_exit:main";

pub(crate) fn raw_clock_id(sel: &str) -> String {
    signal_id(&format!("{sel}_raw_clock"))
}

pub(crate) fn cycle_clock_id(sel: &str) -> String {
    signal_id(&format!("{sel}_cycle_clock"))
}

pub(crate) fn clock_id(sel: &str) -> String {
    signal_id(&format!("{sel}_clock"))
}

pub(crate) fn anim_value_id(sel: &str) -> String {
    signal_id(&format!("{sel}_anim_value"))
}

pub(crate) fn next_value_id(sel: &str) -> String {
    signal_id(&format!("{sel}_anim_value_next"))
}

pub(crate) fn tween_id(sel: &str) -> String {
    signal_id(&format!("{sel}_tween"))
}

/// Variable params that gate an animation clock. They belong to the clock
/// stage rather than the static base.
fn clock_params(nspec: &NormalizedSpec) -> BTreeSet<String> {
    let vars: BTreeSet<&str> = nspec
        .params
        .iter()
        .filter_map(|p| match p {
            ParamDef::Variable(v) => Some(v.name.as_str()),
            _ => None,
        })
        .collect();
    nspec
        .animated_selections()
        .filter_map(|s| s.on.filter.as_ref())
        .flat_map(Expr::free_identifiers)
        .filter(|id| vars.contains(id.as_str()))
        .collect()
}

/// Identifiers in `idents` that name variable params, bound to their
/// signals.
fn param_bindings<'a>(
    nspec: &NormalizedSpec,
    idents: impl IntoIterator<Item = &'a String>,
) -> BTreeMap<String, String> {
    idents
        .into_iter()
        .filter(|id| matches!(nspec.param(id), Some(ParamDef::Variable(_))))
        .map(|id| (id.clone(), signal_id(id)))
        .collect()
}

/// Animated selections that filter the mark data, in transform order.
fn animated_filters(nspec: &NormalizedSpec) -> Vec<&SelectionDef> {
    nspec
        .transforms
        .iter()
        .filter_map(|t| match t {
            TransformDef::FilterSelection(n) => nspec.selection(n).filter(|s| s.is_animated()),
            _ => None,
        })
        .collect()
}

fn predicate_bindings(nspec: &NormalizedSpec, sel: &SelectionDef, anim: String) -> BTreeMap<String, String> {
    let mut idents = BTreeSet::new();
    for c in sel.predicate.iter().flat_map(|p| &p.comparisons) {
        idents.extend(c.rhs.free_identifiers());
    }
    let mut b = param_bindings(nspec, idents.iter());
    b.insert(ANIM_VALUE.to_string(), anim);
    b
}

fn predicate_expr(sel: &SelectionDef) -> Expr {
    sel.predicate.clone().unwrap_or_default().to_expr()
}

fn dataset(name: &str, source: DatasetSource, ops: Vec<TransformOp>) -> NodeKind {
    NodeKind::Dataset(DatasetNode {
        name: name.to_string(),
        source,
        ops,
    })
}

fn signal(name: &str, init: Value, update: SignalUpdate) -> NodeKind {
    NodeKind::Signal(SignalNode {
        name: name.to_string(),
        init,
        update,
    })
}

fn rendered_source(b: &GraphBuilder) -> Result<String, CompileError> {
    match b.get(RENDERED).map(|n| &n.kind) {
        Some(NodeKind::Dataset(DatasetNode {
            source: DatasetSource::Dataset(s),
            ..
        })) => Ok(s.clone()),
        _ => Err(CompileError::Verify("rendered dataset missing".into())),
    }
}

fn point_rendered_at(b: &mut GraphBuilder, stage: Stage, source: &str) -> Result<(), CompileError> {
    b.rewrite(
        stage,
        RENDERED,
        dataset("rendered", DatasetSource::Dataset(source.to_string()), vec![]),
    )
}

/// Data, params, point selections, scales and the mark: everything that
/// does not depend on the time encoding.
pub fn compile_static(nspec: &NormalizedSpec, data: &DataTable, b: &mut GraphBuilder) -> Result<(), CompileError> {
    let gated = clock_params(nspec);
    for p in &nspec.params {
        match p {
            ParamDef::Variable(v) if !gated.contains(&v.name) => {
                let sid = signal_id(&v.name);
                b.emit(Stage::Base, &sid, signal(&v.name, v.value.clone(), SignalUpdate::Param))?;
                if let Some(bind) = &v.bind {
                    b.emit(
                        Stage::Base,
                        widget_id(&v.name),
                        NodeKind::Widget(WidgetNode {
                            name: v.name.clone(),
                            widget: bind.widget,
                            target: sid,
                            min: bind.min,
                            max: bind.max,
                            step: bind.step,
                        }),
                    )?;
                }
            }
            ParamDef::Selection(s) if !s.is_animated() => {
                let ev = event_id(s.on.source);
                b.emit(
                    Stage::Base,
                    &ev,
                    NodeKind::EventSource(EventSourceNode { source: s.on.source }),
                )?;
                b.emit(
                    Stage::Base,
                    selection_id(&s.name),
                    NodeKind::Selection(SelectionNode {
                        name: s.name.clone(),
                        on: ev,
                        membership: Membership::Point {
                            fields: s.fields.clone(),
                            toggle: s.on.source == EventSource::Click,
                        },
                    }),
                )?;
            }
            _ => {}
        }
    }

    b.emit(Stage::Base, SOURCE, dataset("source", DatasetSource::Raw, vec![]))?;
    let mut last = SOURCE.to_string();
    let mut exprs = 0;
    for t in &nspec.transforms {
        let (name, op) = match t {
            TransformDef::FilterExpr(e) => (
                {
                    exprs += 1;
                    format!("filter_{}", exprs - 1)
                },
                TransformOp::Filter {
                    expr: e.clone(),
                    bindings: param_bindings(nspec, e.free_identifiers().iter()),
                },
            ),
            TransformDef::FilterSelection(n) if nspec.selection(n).is_some_and(|s| !s.is_animated()) => (
                format!("{n}_filter"),
                TransformOp::InSelection {
                    selection: selection_id(n),
                },
            ),
            _ => continue,
        };
        let id = dataset_id(&name);
        b.emit(Stage::Base, &id, dataset(&name, DatasetSource::Dataset(last), vec![op]))?;
        last = id;
    }
    b.emit(
        Stage::Base,
        RENDERED,
        dataset("rendered", DatasetSource::Dataset(last), vec![]),
    )?;

    let mut channels = BTreeMap::new();
    for (&ch, def) in &nspec.encoding {
        for fd in def.field_defs() {
            if data.column(&fd.field).is_none() {
                return Err(CompileError::Invalid(format!("unknown field \"{}\"", fd.field)));
            }
        }
        let scale = match channel_scale(nspec, ch, def) {
            Some(node) => {
                let id = scale_id(ch.name());
                b.emit(Stage::Base, &id, NodeKind::Scale(node))?;
                Some(id)
            }
            None => None,
        };
        channels.insert(ch, channel_encoding(def, scale.as_deref()));
    }
    b.emit(
        Stage::Base,
        MARK,
        NodeKind::Mark(MarkNode {
            mark: nspec.mark.kind,
            dataset: RENDERED.to_string(),
            channels,
            style: MarkStyle {
                fill: nspec.mark.fill.clone().unwrap_or_default(),
                stroke: nspec.mark.stroke.clone().unwrap_or_default(),
                font_size: nspec.mark.font_size.unwrap_or(11.0),
            },
        }),
    )
}

fn channel_encoding(def: &ChannelDef, scale: Option<&str>) -> ChannelEncoding {
    match def {
        ChannelDef::Field(f) => ChannelEncoding::Field {
            field: f.field.clone(),
            scale: scale.map(String::from),
        },
        ChannelDef::Value(v) => ChannelEncoding::Value { value: v.clone() },
        ChannelDef::Conditional(c) => ChannelEncoding::Conditional {
            selection: selection_id(&c.param),
            branch: Box::new(channel_encoding(&c.branch, scale)),
            default: Box::new(channel_encoding(&c.default, scale)),
        },
    }
}

fn is_continuous(nspec: &NormalizedSpec, ch: Channel) -> Option<bool> {
    let def = nspec.encoding.get(&ch)?;
    let fd = def.field_defs().into_iter().next()?;
    Some(fd.field_type.is_some_and(FieldType::is_continuous))
}

/// For bars, the axis that carries bar length.
fn is_measure_axis(nspec: &NormalizedSpec, ch: Channel) -> bool {
    let other = if ch == Channel::X { Channel::Y } else { Channel::X };
    match is_continuous(nspec, other) {
        None | Some(false) => true,
        Some(true) => ch == Channel::X,
    }
}

fn channel_scale(nspec: &NormalizedSpec, ch: Channel, def: &ChannelDef) -> Option<ScaleNode> {
    let fds = def.field_defs();
    let fd = *fds.first()?;
    let ft = fd.field_type.unwrap_or(FieldType::Nominal);
    let mut fields: Vec<String> = Vec::new();
    for f in &fds {
        if !fields.contains(&f.field) {
            fields.push(f.field.clone());
        }
    }
    let user = fd.scale.clone().unwrap_or_default();
    let bar = nspec.mark.kind == MarkType::Bar;
    let (w, h) = (nspec.width(), nspec.height());
    let src = SOURCE.to_string();
    let user_interval = user.range.as_ref().and_then(|r| match r.as_slice() {
        [a, b] => Some(RangeSpec::Interval {
            lo: a.as_f64()?,
            hi: b.as_f64()?,
        }),
        _ => None,
    });
    let user_colors = user.range.as_ref().and_then(|r| {
        r.iter()
            .map(|v| v.as_str().map(String::from))
            .collect::<Option<Vec<_>>>()
    });
    let continuous_domain = |zero: bool| match &user.domain {
        Some(values) => DomainSpec::Static { values: values.clone() },
        None => DomainSpec::Extent {
            dataset: src.clone(),
            fields: fields.clone(),
            zero: user.zero.unwrap_or(zero),
        },
    };
    let discrete_domain = || match &user.domain {
        Some(values) => DomainSpec::Static { values: values.clone() },
        None => DomainSpec::Distinct {
            dataset: src.clone(),
            field: fd.field.clone(),
            sort: ft == FieldType::Ordinal,
        },
    };
    let (scale, domain, range) = match ch {
        Channel::X | Channel::Y => {
            let cont = ft.is_continuous();
            let range = user_interval.unwrap_or(match (ch, cont) {
                (Channel::X, _) => RangeSpec::Interval { lo: 0.0, hi: w },
                (_, true) => RangeSpec::Interval { lo: h, hi: 0.0 },
                (_, false) => RangeSpec::Interval { lo: 0.0, hi: h },
            });
            if cont {
                let kind = if ft == FieldType::Temporal {
                    ScaleKind::Time
                } else {
                    ScaleKind::Linear
                };
                (kind, continuous_domain(bar && is_measure_axis(nspec, ch)), range)
            } else {
                let kind = if bar { ScaleKind::Band } else { ScaleKind::Point };
                (kind, discrete_domain(), range)
            }
        }
        Channel::Color => {
            if ft.is_continuous() {
                let colors = user_colors.unwrap_or_else(|| SEQUENTIAL.map(String::from).to_vec());
                (
                    ScaleKind::SequentialColor,
                    continuous_domain(false),
                    RangeSpec::Colors { values: colors },
                )
            } else {
                let colors = user_colors.unwrap_or_else(|| TABLEAU10.map(String::from).to_vec());
                (
                    ScaleKind::OrdinalColor,
                    discrete_domain(),
                    RangeSpec::Colors { values: colors },
                )
            }
        }
        Channel::Size if ft.is_continuous() => (
            ScaleKind::Sqrt,
            continuous_domain(true),
            user_interval.unwrap_or(RangeSpec::Interval {
                lo: 0.0,
                hi: MAX_RADIUS,
            }),
        ),
        Channel::Opacity => {
            let range = user_interval.unwrap_or(RangeSpec::Interval { lo: 0.2, hi: 1.0 });
            if ft.is_continuous() {
                (ScaleKind::Linear, continuous_domain(false), range)
            } else {
                (ScaleKind::Point, discrete_domain(), range)
            }
        }
        _ => return None,
    };
    Some(ScaleNode {
        name: ch.name().to_string(),
        scale,
        domain,
        range,
    })
}

/// Raw and cycle clock signals per animated selection, plus the params
/// that gate them.
pub fn compile_animation_clock(nspec: &NormalizedSpec, b: &mut GraphBuilder) -> Result<(), CompileError> {
    let Some(timeline) = Timeline::from_spec(nspec) else {
        return Ok(());
    };
    let selections: Vec<&SelectionDef> = nspec.animated_selections().collect();
    if selections.is_empty() {
        return Ok(());
    }
    for s in &selections {
        for id in s.on.filter.iter().flat_map(Expr::free_identifiers) {
            if !matches!(nspec.param(&id), Some(ParamDef::Variable(_))) {
                return Err(CompileError::UndeclaredParam {
                    selection: s.name.clone(),
                    param: id,
                });
            }
        }
    }
    for name in clock_params(nspec) {
        if let Some(ParamDef::Variable(v)) = nspec.param(&name) {
            b.emit(
                Stage::Clock,
                signal_id(&name),
                signal(&name, v.value.clone(), SignalUpdate::Param),
            )?;
        }
    }
    let timer = event_id(EventSource::Timer);
    b.emit(
        Stage::Clock,
        &timer,
        NodeKind::EventSource(EventSourceNode {
            source: EventSource::Timer,
        }),
    )?;
    for s in selections {
        let gate = s.on.filter.clone();
        let bindings = param_bindings(
            nspec,
            gate.iter().flat_map(Expr::free_identifiers).collect::<Vec<_>>().iter(),
        );
        let raw = raw_clock_id(&s.name);
        b.emit(
            Stage::Clock,
            &raw,
            signal(
                &format!("{}_raw_clock", s.name),
                Value::Number(0.0),
                SignalUpdate::RawClock {
                    timer: timer.clone(),
                    gate,
                    bindings,
                },
            ),
        )?;
        let paused: f64 = s.pause.iter().flatten().map(|p| p.duration).sum();
        b.emit(
            Stage::Clock,
            cycle_clock_id(&s.name),
            signal(
                &format!("{}_cycle_clock", s.name),
                Value::Number(0.0),
                SignalUpdate::CycleClock {
                    raw,
                    period: timeline.active_ms() + paused,
                },
            ),
        )?;
    }
    Ok(())
}

/// The time scale and one `anim_value` inversion per animated selection;
/// rewires x/y domains to the rendered data when rescaling.
pub fn compile_time_scale(nspec: &NormalizedSpec, b: &mut GraphBuilder) -> Result<(), CompileError> {
    let Some(timeline) = Timeline::from_spec(nspec) else {
        return Ok(());
    };
    let temporal = nspec.time().and_then(|t| t.field_type) == Some(FieldType::Temporal);
    let (node, first) = match &timeline {
        Timeline::Discrete { values, step } => (
            ScaleNode {
                name: "time".into(),
                scale: ScaleKind::Band,
                domain: DomainSpec::Static { values: values.clone() },
                range: RangeSpec::Steps { step: *step },
            },
            values.first().cloned().unwrap_or(Value::Null),
        ),
        Timeline::Continuous { lo, hi, duration } => (
            ScaleNode {
                name: "time".into(),
                scale: if temporal { ScaleKind::Time } else { ScaleKind::Linear },
                domain: DomainSpec::Static {
                    values: vec![lo.clone(), hi.clone()],
                },
                range: RangeSpec::Interval { lo: 0.0, hi: *duration },
            },
            lo.clone(),
        ),
    };
    b.emit(Stage::TimeScale, TIME_SCALE, NodeKind::Scale(node))?;
    for s in nspec.animated_selections() {
        b.emit(
            Stage::TimeScale,
            anim_value_id(&s.name),
            signal(
                &format!("{}_anim_value", s.name),
                first.clone(),
                SignalUpdate::Invert {
                    scale: TIME_SCALE.into(),
                    clock: clock_id(&s.name),
                },
            ),
        )?;
    }
    if nspec.rescale() {
        for ch in [Channel::X, Channel::Y] {
            let id = scale_id(ch.name());
            let Some(Node {
                kind: NodeKind::Scale(sc),
                ..
            }) = b.get(&id)
            else {
                continue;
            };
            if let DomainSpec::Extent { fields, zero, .. } = &sc.domain {
                let mut sc = sc.clone();
                sc.domain = DomainSpec::Extent {
                    dataset: RENDERED.into(),
                    fields: fields.clone(),
                    zero: *zero,
                };
                b.rewrite(Stage::TimeScale, &id, NodeKind::Scale(sc))?;
            }
        }
    }
    Ok(())
}

/// Pause tables, eased clocks, predicate selections and widgets.
pub fn compile_animation_selections(nspec: &NormalizedSpec, b: &mut GraphBuilder) -> Result<(), CompileError> {
    let Some(timeline) = Timeline::from_spec(nspec) else {
        return Ok(());
    };
    let active = timeline.active_ms();
    let selections: Vec<&SelectionDef> = nspec.animated_selections().collect();
    for s in &selections {
        let easing = s.easing.unwrap_or_default();
        let mut anchored: Vec<(f64, &PauseEntry)> = s
            .pause
            .iter()
            .flatten()
            .map(|p| {
                timeline
                    .position(&p.value)
                    .map(|a| (a, p))
                    .ok_or_else(|| CompileError::Invalid(format!("pause value {} not in time domain", p.value)))
            })
            .collect::<Result<_, _>>()?;
        anchored.sort_by(|a, b| a.0.total_cmp(&b.0));
        let pauses = if anchored.is_empty() {
            None
        } else {
            let mut shift = 0.0;
            let mut windows = Vec::new();
            for (anchor, p) in anchored {
                // Pauses sit on the eased timeline where the clock reaches
                // the anchor, so plateaus stay exact under any easing.
                let tau = if easing == Easing::Linear || active <= 0.0 {
                    anchor
                } else {
                    active * easing.inverse(anchor / active)
                };
                windows.push(PauseWindow {
                    value: p.value.clone(),
                    anchor_ms: anchor,
                    start_ms: tau + shift,
                    duration_ms: p.duration,
                });
                shift += p.duration;
            }
            let id = format!("pause:{}", s.name);
            b.emit(
                Stage::Selections,
                &id,
                NodeKind::PauseTable(PauseTableNode {
                    selection: s.name.clone(),
                    windows,
                }),
            )?;
            Some(id)
        };
        b.emit(
            Stage::Selections,
            clock_id(&s.name),
            signal(
                &format!("{}_clock", s.name),
                Value::Number(0.0),
                SignalUpdate::EffectiveClock {
                    cycle: cycle_clock_id(&s.name),
                    pauses,
                    easing,
                    active_ms: active,
                },
            ),
        )?;
        let comparisons = s
            .predicate
            .iter()
            .flat_map(|p| &p.comparisons)
            .map(|c| CompiledComparison {
                field: c.field.clone(),
                op: c.op,
                rhs: c.rhs.clone(),
            })
            .collect();
        b.emit(
            Stage::Selections,
            selection_id(&s.name),
            NodeKind::Selection(SelectionNode {
                name: s.name.clone(),
                on: event_id(EventSource::Timer),
                membership: Membership::Predicate {
                    comparisons,
                    bindings: predicate_bindings(nspec, s, anim_value_id(&s.name)),
                },
            }),
        )?;
        if let Some(bind) = s.bind.as_ref().filter(|b| b.widget == WidgetKind::RangeSlider) {
            b.emit(
                Stage::Selections,
                widget_id(&s.name),
                NodeKind::Widget(WidgetNode {
                    name: s.name.clone(),
                    widget: bind.widget,
                    target: raw_clock_id(&s.name),
                    min: bind.min,
                    max: bind.max,
                    step: bind.step,
                }),
            )?;
        }
    }
    if !selections.is_empty() {
        for name in clock_params(nspec) {
            if let Some(ParamDef::Variable(v)) = nspec.param(&name) {
                if let Some(bind) = &v.bind {
                    b.emit(
                        Stage::Selections,
                        widget_id(&name),
                        NodeKind::Widget(WidgetNode {
                            name: name.clone(),
                            widget: bind.widget,
                            target: signal_id(&name),
                            min: bind.min,
                            max: bind.max,
                            step: bind.step,
                        }),
                    )?;
                }
            }
        }
    }
    Ok(())
}

/// One filtered dataset per animated selection used as a filter, chained
/// after the static filters.
pub fn compile_filter_transforms(nspec: &NormalizedSpec, b: &mut GraphBuilder) -> Result<(), CompileError> {
    if nspec.time().is_none() {
        return Ok(());
    }
    let chain = animated_filters(nspec);
    if chain.is_empty() {
        return Ok(());
    }
    let mut last = rendered_source(b)?;
    for s in chain {
        let name = format!("{}_filter", s.name);
        let id = dataset_id(&name);
        b.emit(
            Stage::FilterTransforms,
            &id,
            dataset(
                &name,
                DatasetSource::Dataset(last),
                vec![TransformOp::Filter {
                    expr: predicate_expr(s),
                    bindings: predicate_bindings(nspec, s, anim_value_id(&s.name)),
                }],
            ),
        )?;
        last = id;
    }
    point_rendered_at(b, Stage::FilterTransforms, &last)
}

/// Current, next and tweened keyframe datasets joined on the key field.
pub fn compile_key(nspec: &NormalizedSpec, b: &mut GraphBuilder) -> Result<(), CompileError> {
    let Some(Timeline::Discrete { values, .. }) = Timeline::from_spec(nspec) else {
        return Ok(());
    };
    let chain = animated_filters(nspec);
    if chain.is_empty() {
        return Ok(());
    }
    let Some(key) = nspec.key() else {
        if nspec.enter.is_some() || nspec.exit.is_some() {
            return Err(CompileError::MissingKey);
        }
        return Ok(());
    };
    let current_end = rendered_source(b)?;
    let first_filter = dataset_id(&format!("{}_filter", chain[0].name));
    let base_end = match b.get(&first_filter).map(|n| &n.kind) {
        Some(NodeKind::Dataset(DatasetNode {
            source: DatasetSource::Dataset(s),
            ..
        })) => s.clone(),
        _ => return Err(CompileError::Verify(format!("{first_filter} missing"))),
    };

    let next_init = values.get(1).or(values.first()).cloned().unwrap_or(Value::Null);
    let mut next_ops = Vec::new();
    for s in &chain {
        let nid = next_value_id(&s.name);
        b.emit(
            Stage::Key,
            &nid,
            signal(
                &format!("{}_anim_value_next", s.name),
                next_init.clone(),
                SignalUpdate::KeyframeValue {
                    scale: TIME_SCALE.into(),
                    clock: clock_id(&s.name),
                    offset: 1,
                },
            ),
        )?;
        next_ops.push(TransformOp::Filter {
            expr: predicate_expr(s),
            bindings: predicate_bindings(nspec, s, nid),
        });
    }
    let primary = &chain[0].name;
    let fraction = tween_id(primary);
    b.emit(
        Stage::Key,
        &fraction,
        signal(
            &format!("{primary}_tween"),
            Value::Number(0.0),
            SignalUpdate::TweenFraction {
                scale: TIME_SCALE.into(),
                clock: clock_id(primary),
            },
        ),
    )?;

    let mut interpolate: Vec<String> = nspec
        .encoding
        .values()
        .flat_map(ChannelDef::field_defs)
        .filter(|f| f.field_type.is_some_and(FieldType::is_continuous) && f.field != key)
        .map(|f| f.field.clone())
        .collect();
    interpolate.sort();
    interpolate.dedup();

    b.emit(
        Stage::Key,
        KEYFRAME_CURRENT,
        dataset("keyframe_current", DatasetSource::Dataset(current_end), vec![]),
    )?;
    b.emit(
        Stage::Key,
        KEYFRAME_NEXT,
        dataset("keyframe_next", DatasetSource::Dataset(base_end), next_ops),
    )?;
    b.emit(
        Stage::Key,
        KEYFRAME_TWEEN,
        dataset(
            "keyframe_tween",
            DatasetSource::Dataset(KEYFRAME_CURRENT.into()),
            vec![TransformOp::TweenJoin {
                next: KEYFRAME_NEXT.into(),
                key: key.to_string(),
                fraction,
                interpolate,
                include_enter: nspec.enter.is_some(),
            }],
        ),
    )?;
    point_rendered_at(b, Stage::Key, KEYFRAME_TWEEN)
}

/// Opacity overrides for entering and exiting items.
pub fn compile_enter_exit(nspec: &NormalizedSpec, b: &mut GraphBuilder) -> Result<(), CompileError> {
    if nspec.enter.is_none() && nspec.exit.is_none() {
        return Ok(());
    }
    let Some(Node {
        kind: NodeKind::Dataset(tween),
        ..
    }) = b.get(KEYFRAME_TWEEN)
    else {
        return Ok(());
    };
    let fraction = tween
        .ops
        .iter()
        .find_map(|op| match op {
            TransformOp::TweenJoin { fraction, .. } => Some(fraction.clone()),
            _ => None,
        })
        .ok_or_else(|| CompileError::Verify("tween dataset has no join".into()))?;
    b.emit(
        Stage::EnterExit,
        ENTER_EXIT,
        NodeKind::EnterExit(EnterExitNode {
            mark: MARK.into(),
            dataset: KEYFRAME_TWEEN.into(),
            fraction,
            enter: nspec.enter.clone().unwrap_or_default(),
            exit: nspec.exit.clone().unwrap_or_default(),
        }),
    )
}
