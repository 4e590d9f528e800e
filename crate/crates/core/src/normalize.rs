//! Default elaboration: turns a user spec into a [`NormalizedSpec`] where
//! every implicit default is written out.

use std::collections::{BTreeMap, HashSet};
use std::ops::Deref;

use crate::easing::Easing;
use crate::model::diagnostic::{has_errors, Diagnostic};
use crate::model::expr::Expr;
use crate::model::spec::{
    BindDef, Channel, ChannelDef, EventSource, EventStreamDef, KeyDef, MarkType, ParamDef, PredicateDef, SelectionDef,
    Spec, TimeDomain, TimeEncodingDef, TimeRange, TimeScaleDef, TransformDef, VariableParamDef, WidgetKind,
};
use crate::model::table::{DataTable, FieldType};
use crate::model::validate::validate_spec;
use crate::model::value::Value;

pub const DEFAULT_SELECTION: &str = "current_frame";
pub const PLAY_PARAM: &str = "is_playing";
pub const DEFAULT_STEP_MS: f64 = 500.0;
pub const DEFAULT_WIDTH: f64 = 400.0;
pub const DEFAULT_HEIGHT: f64 = 300.0;
pub const DEFAULT_FILL: &str = "#4c78a8";
pub const DEFAULT_FONT_SIZE: f64 = 11.0;

/// A spec with every default filled in. Only [`normalize`] constructs one.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSpec {
    spec: Spec,
}

impl Deref for NormalizedSpec {
    type Target = Spec;

    fn deref(&self) -> &Spec {
        &self.spec
    }
}

impl NormalizedSpec {
    pub fn spec(&self) -> &Spec {
        &self.spec
    }

    pub fn into_spec(self) -> Spec {
        self.spec
    }

    pub fn width(&self) -> f64 {
        self.spec.width.unwrap_or(DEFAULT_WIDTH)
    }

    pub fn height(&self) -> f64 {
        self.spec.height.unwrap_or(DEFAULT_HEIGHT)
    }

    pub fn time(&self) -> Option<&TimeEncodingDef> {
        self.spec.time_encoding.as_ref()
    }

    pub fn time_domain(&self) -> Option<&TimeDomain> {
        self.time()?.scale.as_ref()?.domain.as_ref()
    }

    pub fn time_range(&self) -> Option<TimeRange> {
        self.time()?.scale.as_ref()?.range
    }

    pub fn key(&self) -> Option<&str> {
        self.time()?.key.as_ref()?.field()
    }

    pub fn rescale(&self) -> bool {
        self.time().and_then(|t| t.rescale).unwrap_or(false)
    }

    /// Effective type of a plain field channel.
    pub fn channel_type(&self, ch: Channel) -> Option<FieldType> {
        self.spec.encoding.get(&ch)?.field()?.field_type
    }
}

/// Elaborates `spec` against `data`. Fails with the validation diagnostics
/// when the spec has errors.
pub fn normalize(spec: &Spec, data: &DataTable) -> Result<NormalizedSpec, Vec<Diagnostic>> {
    let diags = validate_spec(spec, data);
    if has_errors(&diags) {
        return Err(diags.into_iter().filter(Diagnostic::is_error).collect());
    }
    let mut s = spec.clone();

    s.width.get_or_insert(DEFAULT_WIDTH);
    s.height.get_or_insert(DEFAULT_HEIGHT);
    s.mark.fill.get_or_insert_with(|| DEFAULT_FILL.to_string());
    s.mark.stroke.get_or_insert_with(|| match s.mark.kind {
        MarkType::Line | MarkType::Tick => DEFAULT_FILL.to_string(),
        _ => "none".to_string(),
    });
    s.mark.font_size.get_or_insert(DEFAULT_FONT_SIZE);

    for def in s.encoding.values_mut() {
        for fd in def.field_defs_mut() {
            if fd.field_type.is_none() {
                fd.field_type = Some(inferred_type(data, &fd.field));
            }
        }
    }

    if let Some(te) = spec.time_encoding.as_ref() {
        let ft = time_field_type(te, data).expect("validated time field");
        let key = match &te.key {
            Some(k) => k.clone(),
            None => match infer_key(spec, data) {
                Some(k) if keyframe_key_conflict(data, &te.field, &k).is_none() => KeyDef::Field(k),
                _ => KeyDef::Disabled,
            },
        };
        let scale = default_time_scale(te, data);
        let nte = TimeEncodingDef {
            field: te.field.clone(),
            field_type: Some(ft),
            key: Some(key),
            scale: Some(scale.clone()),
            rescale: Some(te.rescale.unwrap_or(false)),
        };
        s.time_encoding = Some(nte.clone());

        if s.animated_selections().next().is_none() {
            let (sel, filter) = elaborate_time_encoding(&nte);
            s.params.push(ParamDef::Selection(sel));
            s.transforms.push(filter);
        }
        fill_animated_selections(&mut s, &nte, scale.domain.as_ref().expect("domain filled"));
    }

    Ok(NormalizedSpec { spec: s })
}

fn fill_animated_selections(s: &mut Spec, te: &TimeEncodingDef, domain: &TimeDomain) {
    let filtered: HashSet<String> = s.filtered_selections().into_iter().map(String::from).collect();
    let conditioned: HashSet<String> = s.conditioned_selections().into_iter().map(String::from).collect();
    let mut extra_filters = Vec::new();
    let mut needs_play = false;

    for p in s.params.iter_mut() {
        let ParamDef::Selection(sel) = p else { continue };
        if !sel.is_animated() {
            continue;
        }
        sel.predicate
            .get_or_insert_with(|| PredicateDef::eq_anim_value(&te.field));
        sel.easing.get_or_insert(Easing::Linear);
        sel.pause.get_or_insert_with(Vec::new);
        if let Some(b) = sel.bind.as_mut().filter(|b| b.widget == WidgetKind::RangeSlider) {
            fill_slider(b, domain);
            if sel.on.filter.is_none() {
                sel.on.filter = Some(Expr::ident(PLAY_PARAM));
            }
        }
        if sel
            .on
            .filter
            .as_ref()
            .is_some_and(|f| f.free_identifiers().contains(PLAY_PARAM))
        {
            needs_play = true;
        }
        if !filtered.contains(&sel.name) && !conditioned.contains(&sel.name) {
            extra_filters.push(TransformDef::FilterSelection(sel.name.clone()));
        }
    }
    s.transforms.extend(extra_filters);

    if needs_play {
        let has_slider = s
            .animated_selections()
            .any(|sel| sel.bind.as_ref().is_some_and(|b| b.widget == WidgetKind::RangeSlider));
        match s.params.iter_mut().find(|p| p.name() == PLAY_PARAM) {
            Some(ParamDef::Variable(v)) => {
                if v.bind.is_none() && has_slider {
                    v.bind = Some(BindDef::checkbox());
                }
            }
            Some(ParamDef::Selection(_)) => {}
            None => s.params.push(ParamDef::Variable(VariableParamDef {
                name: PLAY_PARAM.to_string(),
                value: Value::Bool(true),
                bind: Some(BindDef::checkbox()),
            })),
        }
    }
}

/// Slider bounds default to the time domain: numeric domains use their
/// values, other discrete domains are scrubbed by index.
fn fill_slider(b: &mut BindDef, domain: &TimeDomain) {
    let (min, max, step) = match domain {
        TimeDomain::Continuous(lo, hi) => (lo.as_f64().unwrap_or(0.0), hi.as_f64().unwrap_or(1.0), 0.0),
        TimeDomain::Discrete(vals) => {
            let nums: Option<Vec<f64>> = vals.iter().map(Value::as_f64).collect();
            match nums {
                Some(n) if !n.is_empty() => {
                    let gaps: Vec<f64> = n.windows(2).map(|w| w[1] - w[0]).collect();
                    let step = match gaps.first() {
                        Some(g) if gaps.iter().all(|x| x == g) => *g,
                        Some(_) => 0.0,
                        None => 1.0,
                    };
                    (n[0], n[n.len() - 1], step)
                }
                _ => (0.0, vals.len().saturating_sub(1) as f64, 1.0),
            }
        }
    };
    b.min.get_or_insert(min);
    b.max.get_or_insert(max);
    b.step.get_or_insert(step);
}

/// Default selection plus the filter transform that applies it to the mark
/// data.
pub fn elaborate_time_encoding(te: &TimeEncodingDef) -> (SelectionDef, TransformDef) {
    let sel = SelectionDef {
        name: DEFAULT_SELECTION.to_string(),
        on: EventStreamDef {
            source: EventSource::Timer,
            filter: None,
        },
        predicate: Some(PredicateDef::eq_anim_value(&te.field)),
        bind: None,
        pause: Some(Vec::new()),
        easing: Some(Easing::Linear),
        fields: None,
    };
    (sel, TransformDef::FilterSelection(DEFAULT_SELECTION.to_string()))
}

/// Detail field if present, else a nominal/ordinal color field.
pub fn infer_key(spec: &Spec, data: &DataTable) -> Option<String> {
    if let Some(fd) = spec.encoding.get(&Channel::Detail).and_then(ChannelDef::field) {
        return Some(fd.field.clone());
    }
    let fd = spec.encoding.get(&Channel::Color).and_then(ChannelDef::field)?;
    let ft = fd.field_type.unwrap_or_else(|| inferred_type(data, &fd.field));
    matches!(ft, FieldType::Nominal | FieldType::Ordinal).then(|| fd.field.clone())
}

/// Distinct sorted values of the time field with a 500ms step, keeping any
/// user-specified domain or range.
pub fn default_time_scale(te: &TimeEncodingDef, data: &DataTable) -> TimeScaleDef {
    let user = te.scale.clone().unwrap_or_default();
    let domain = user.domain.unwrap_or_else(|| {
        let ft = time_field_type(te, data).unwrap_or(FieldType::Quantitative);
        TimeDomain::Discrete(sorted_domain(data, &te.field, ft))
    });
    // A continuous domain has no natural step, so the default spends 500ms
    // per distinct field value over the whole domain.
    let range = user.range.unwrap_or_else(|| match domain {
        TimeDomain::Discrete(_) => TimeRange::Step(DEFAULT_STEP_MS),
        TimeDomain::Continuous(..) => {
            TimeRange::Duration(DEFAULT_STEP_MS * data.distinct(&te.field).len().max(1) as f64)
        }
    });
    TimeScaleDef {
        domain: Some(domain),
        range: Some(range),
    }
}

/// Declared type of the time field, or the column's type.
pub fn time_field_type(te: &TimeEncodingDef, data: &DataTable) -> Option<FieldType> {
    te.field_type.or_else(|| data.field_type(&te.field))
}

pub(crate) fn inferred_type(data: &DataTable, field: &str) -> FieldType {
    match data.field_type(field) {
        Some(FieldType::Quantitative) => FieldType::Quantitative,
        Some(FieldType::Temporal) => FieldType::Temporal,
        _ => FieldType::Nominal,
    }
}

/// Numbers and timestamps ascending; other ordinal values keep their
/// first-appearance order.
pub fn sorted_domain(data: &DataTable, field: &str, ft: FieldType) -> Vec<Value> {
    let mut vals = data.distinct(field);
    let numeric = vals.iter().all(|v| v.as_f64().is_some());
    if numeric || ft != FieldType::Ordinal {
        vals.sort_by(Value::total_cmp);
    }
    vals
}

/// First `(keyframe value, duplicated key value)` where `key` repeats within
/// one keyframe of `time_field`.
pub fn keyframe_key_conflict(data: &DataTable, time_field: &str, key: &str) -> Option<(Value, Value)> {
    let ti = data.column_index(time_field)?;
    let ki = data.column_index(key)?;
    let mut seen: BTreeMap<String, HashSet<String>> = BTreeMap::new();
    for row in data.rows() {
        let frame = seen.entry(row[ti].canonical_key()).or_default();
        if !frame.insert(row[ki].canonical_key()) {
            return Some((row[ti].clone(), row[ki].clone()));
        }
    }
    None
}
