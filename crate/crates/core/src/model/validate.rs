//! Static checks of a spec against its bound data table.

use std::collections::BTreeSet;

use super::diagnostic::Diagnostic;
use super::expr::Expr;
use super::spec::{
    BindDef, Channel, ChannelDef, FieldDef, KeyDef, ParamDef, SelectionDef, Spec, TimeDomain, TimeRange, TransformDef,
    WidgetKind,
};
use super::table::{DataTable, FieldType};
use super::value::Value;
use crate::normalize::{
    infer_key, keyframe_key_conflict, sorted_domain, time_field_type, DEFAULT_SELECTION, PLAY_PARAM,
};
use crate::ANIM_VALUE;

/// Checks every spec invariant against `data`. The result is empty iff the
/// spec is valid; warnings never make a spec invalid.
pub fn validate_spec(spec: &Spec, data: &DataTable) -> Vec<Diagnostic> {
    let mut v = Validator {
        spec,
        data,
        out: Vec::new(),
    };
    v.run();
    v.out
}

struct Validator<'a> {
    spec: &'a Spec,
    data: &'a DataTable,
    out: Vec<Diagnostic>,
}

impl<'a> Validator<'a> {
    fn error(&mut self, path: impl Into<String>, msg: impl Into<String>) {
        self.out.push(Diagnostic::error(path, msg));
    }

    fn warning(&mut self, path: impl Into<String>, msg: impl Into<String>) {
        self.out.push(Diagnostic::warning(path, msg));
    }

    fn run(&mut self) {
        for (k, v) in [("width", self.spec.width), ("height", self.spec.height)] {
            if let Some(x) = v {
                if !(x > 0.0 && x.is_finite()) {
                    self.error(format!("/{k}"), format!("{k} must be positive"));
                }
            }
        }
        self.check_params();
        self.check_encoding();
        self.check_time_encoding();
        self.check_transforms();
        self.check_overrides();
    }

    fn param_names(&self) -> BTreeSet<&'a str> {
        let spec: &'a Spec = self.spec;
        spec.params.iter().map(ParamDef::name).collect()
    }

    fn check_field_exists(&mut self, path: &str, field: &str) -> bool {
        if self.data.column(field).is_none() {
            self.error(path, format!("unknown field \"{field}\""));
            false
        } else {
            true
        }
    }

    fn check_field_def(&mut self, path: &str, fd: &FieldDef) {
        if !self.check_field_exists(&format!("{path}/field"), &fd.field) {
            return;
        }
        let col = self.data.field_type(&fd.field).unwrap();
        match fd.field_type {
            Some(FieldType::Quantitative) if col != FieldType::Quantitative => self.error(
                format!("{path}/type"),
                format!("field \"{}\" is {col}, not numeric", fd.field),
            ),
            Some(FieldType::Temporal) if col.is_discrete() => self.error(
                format!("{path}/type"),
                format!("field \"{}\" is {col}, not temporal", fd.field),
            ),
            _ => {}
        }
    }

    fn check_selection_ref(&mut self, path: &str, name: &str) {
        match self.spec.param(name) {
            Some(ParamDef::Selection(_)) => {}
            Some(ParamDef::Variable(_)) => self.error(path, format!("`{name}` is a variable, not a selection")),
            None => self.error(path, format!("unknown selection `{name}`")),
        }
    }

    fn check_encoding(&mut self) {
        for (ch, def) in &self.spec.encoding {
            let path = format!("/encoding/{}", ch.name());
            match def {
                ChannelDef::Field(fd) => self.check_field_def(&path, fd),
                ChannelDef::Value(_) => {}
                ChannelDef::Conditional(c) => {
                    self.check_selection_ref(&format!("{path}/condition/param"), &c.param);
                    if let ChannelDef::Field(fd) = c.branch.as_ref() {
                        self.check_field_def(&format!("{path}/condition"), fd);
                    }
                    if let ChannelDef::Field(fd) = c.default.as_ref() {
                        self.check_field_def(&path, fd);
                    }
                }
            }
        }
    }

    fn time_domain_values(&self) -> Option<TimeDomain> {
        let te = self.spec.time_encoding.as_ref()?;
        if let Some(d) = te.scale.as_ref().and_then(|s| s.domain.clone()) {
            return Some(d);
        }
        let ft = time_field_type(te, self.data)?;
        Some(TimeDomain::Discrete(sorted_domain(self.data, &te.field, ft)))
    }

    fn check_time_encoding(&mut self) {
        let Some(te) = &self.spec.time_encoding else {
            if let Some(s) = self.spec.animated_selections().next() {
                let i = self.param_index(&s.name);
                self.error(
                    format!("/params/{i}/select/on"),
                    "timer selections require a time encoding",
                );
            }
            return;
        };
        let base = "/encoding/time";
        if !self.check_field_exists(&format!("{base}/field"), &te.field) {
            return;
        }
        let ft = time_field_type(te, self.data).unwrap();
        if ft == FieldType::Nominal {
            self.error(
                format!("{base}/field"),
                format!(
                    "time field \"{}\" is nominal; it needs a sort order (quantitative, ordinal or temporal)",
                    te.field
                ),
            );
        }
        let col = self.data.field_type(&te.field).unwrap();
        if te.field_type == Some(FieldType::Quantitative) && col != FieldType::Quantitative {
            self.error(format!("{base}/type"), format!("field \"{}\" is not numeric", te.field));
        }

        let mut continuous = false;
        if let Some(scale) = &te.scale {
            match &scale.domain {
                Some(TimeDomain::Continuous(lo, hi)) => {
                    continuous = true;
                    match (lo.as_f64(), hi.as_f64()) {
                        (Some(a), Some(b)) if a < b => {}
                        (Some(_), Some(_)) => {
                            self.error(format!("{base}/scale/domain"), "continuous domain requires lo < hi")
                        }
                        _ => self.error(
                            format!("{base}/scale/domain"),
                            "continuous domain bounds must be numbers or timestamps",
                        ),
                    }
                }
                Some(TimeDomain::Discrete(vals)) => {
                    if vals.is_empty() {
                        self.error(format!("{base}/scale/domain"), "domain is empty");
                    }
                    let mut seen = BTreeSet::new();
                    for (i, v) in vals.iter().enumerate() {
                        if !seen.insert(v.canonical_key()) {
                            self.error(
                                format!("{base}/scale/domain/{i}"),
                                format!("duplicate domain value {v}"),
                            );
                        }
                    }
                }
                None => {}
            }
            match scale.range {
                Some(TimeRange::Step(s)) if !(s > 0.0 && s.is_finite()) => {
                    self.error(format!("{base}/scale/range/step"), "step must be > 0")
                }
                Some(TimeRange::Duration(d)) if !(d > 0.0 && d.is_finite()) => {
                    self.error(format!("{base}/scale/range/duration"), "duration must be > 0")
                }
                _ => {}
            }
        }

        if self.data.is_empty() && !continuous {
            self.error(format!("{base}/field"), "time field has no values to animate over");
        }

        // Keys only matter when keyframes exist.
        if continuous {
            return;
        }
        match &te.key {
            Some(KeyDef::Field(k)) => {
                if self.check_field_exists(&format!("{base}/key"), k) {
                    if let Some((frame, dup)) = keyframe_key_conflict(self.data, &te.field, k) {
                        self.error(
                            format!("{base}/key"),
                            format!(
                                "key \"{k}\" not unique within keyframe {}: duplicate value {dup}",
                                frame.label()
                            ),
                        );
                    }
                }
            }
            Some(KeyDef::Disabled) => {}
            None => {
                if let Some(k) = infer_key(self.spec, self.data) {
                    if let Some((frame, dup)) = keyframe_key_conflict(self.data, &te.field, &k) {
                        self.warning(
                            format!("{base}/key"),
                            format!(
                                "inferred key \"{k}\" is not unique within keyframe {} (duplicate value {dup}); keyframes will not tween",
                                frame.label()
                            ),
                        );
                    }
                } else {
                    self.warning(
                        format!("{base}/key"),
                        "no key could be inferred from detail or color; keyframes will not tween",
                    );
                }
            }
        }
    }

    fn param_index(&self, name: &str) -> usize {
        self.spec.params.iter().position(|p| p.name() == name).unwrap_or(0)
    }

    fn check_params(&mut self) {
        let mut seen = BTreeSet::new();
        for (i, p) in self.spec.params.iter().enumerate() {
            if !seen.insert(p.name()) {
                self.error(
                    format!("/params/{i}/name"),
                    format!("duplicate param name `{}`", p.name()),
                );
            }
            if p.name() == ANIM_VALUE {
                self.error(format!("/params/{i}/name"), format!("`{ANIM_VALUE}` is reserved"));
            }
            match p {
                ParamDef::Selection(s) => self.check_selection(i, s),
                ParamDef::Variable(v) => {
                    if let Some(b) = &v.bind {
                        match b.widget {
                            WidgetKind::Checkbox if !matches!(v.value, Value::Bool(_)) => self.error(
                                format!("/params/{i}/value"),
                                "a checkbox-bound param needs a boolean value",
                            ),
                            WidgetKind::RangeSlider if v.value.as_f64().is_none() => self.error(
                                format!("/params/{i}/value"),
                                "a slider-bound param needs a numeric value",
                            ),
                            _ => {}
                        }
                    }
                }
            }
        }

        // Default elaboration collisions.
        if self.spec.time_encoding.is_some()
            && self.spec.animated_selections().next().is_none()
            && self.spec.param(DEFAULT_SELECTION).is_some()
        {
            let i = self.param_index(DEFAULT_SELECTION);
            self.error(
                format!("/params/{i}/name"),
                format!("default animation selection name `{DEFAULT_SELECTION}` collides with a declared param"),
            );
        }
        let needs_play = self
            .spec
            .animated_selections()
            .any(|s| s.on.filter.is_none() && s.bind.as_ref().is_some_and(|b| b.widget == WidgetKind::RangeSlider));
        if needs_play {
            match self.spec.param(PLAY_PARAM) {
                Some(ParamDef::Variable(v)) if matches!(v.value, Value::Bool(_)) => {}
                None => {}
                Some(_) => {
                    let i = self.param_index(PLAY_PARAM);
                    self.error(
                        format!("/params/{i}"),
                        format!("`{PLAY_PARAM}` must be a boolean variable to gate a bound slider"),
                    );
                }
            }
        }
    }

    fn check_selection(&mut self, i: usize, s: &SelectionDef) {
        let base = format!("/params/{i}/select");
        let params = self.param_names();
        if let Some(f) = &s.on.filter {
            for id in f.free_identifiers() {
                if !params.contains(id.as_str()) && !(s.is_animated() && id == PLAY_PARAM) {
                    self.error(
                        format!("{base}/on/filter"),
                        format!("filter references undeclared parameter `{id}`"),
                    );
                }
            }
        }
        if let Some(fields) = &s.fields {
            for (j, f) in fields.iter().enumerate() {
                self.check_field_exists(&format!("{base}/fields/{j}"), f);
            }
        }
        if let Some(b) = &s.bind {
            self.check_bind(&format!("/params/{i}/bind"), s, b);
        }
        if !s.is_animated() {
            if s.predicate.is_some() {
                self.warning(
                    format!("{base}/predicate"),
                    "predicates only apply to timer selections; ignored",
                );
            }
            if s.pause.is_some() || s.easing.is_some() {
                self.warning(base.clone(), "pause and easing only apply to timer selections; ignored");
            }
            return;
        }
        if let Some(pred) = &s.predicate {
            for (j, c) in pred.comparisons.iter().enumerate() {
                let p = format!("{base}/predicate/{j}");
                self.check_field_exists(&format!("{p}/field"), &c.field);
                for id in c.rhs.free_identifiers() {
                    if id != ANIM_VALUE && !params.contains(id.as_str()) {
                        self.error(
                            format!("{p}/{}", c.op.name()),
                            format!("unbound identifier `{id}` (expected `{ANIM_VALUE}` or a param)"),
                        );
                    }
                }
            }
        }
        if let Some(pauses) = &s.pause {
            let domain = self.time_domain_values();
            for (j, p) in pauses.iter().enumerate() {
                let pp = format!("{base}/pause/{j}");
                if !(p.duration >= 0.0 && p.duration.is_finite()) {
                    self.error(format!("{pp}/duration"), "pause duration must be >= 0");
                }
                let in_domain = match &domain {
                    Some(TimeDomain::Discrete(vals)) => vals.iter().any(|v| v.try_eq(&p.value).unwrap_or(false)),
                    Some(TimeDomain::Continuous(lo, hi)) => {
                        matches!((lo.as_f64(), hi.as_f64(), p.value.as_f64()),
                                 (Some(a), Some(b), Some(x)) if a <= x && x <= b)
                    }
                    None => true,
                };
                if !in_domain {
                    self.error(
                        format!("{pp}/value"),
                        format!("pause value {} is not in the time domain", p.value),
                    );
                }
            }
        }
    }

    fn check_bind(&mut self, path: &str, s: &SelectionDef, b: &BindDef) {
        match b.widget {
            WidgetKind::RangeSlider if !s.is_animated() => self.error(
                path,
                "range sliders can only bind timer selections or numeric variables",
            ),
            WidgetKind::Checkbox => self.error(path, "checkboxes bind boolean variables, not selections"),
            _ => {}
        }
        if let Some(st) = b.step {
            if st < 0.0 {
                self.error(format!("{path}/step"), "step must be >= 0");
            }
        }
    }

    fn check_transforms(&mut self) {
        let params = self.param_names();
        for (i, t) in self.spec.transforms.iter().enumerate() {
            let path = format!("/transform/{i}/filter");
            match t {
                TransformDef::FilterSelection(name) => self.check_selection_ref(&format!("{path}/param"), name),
                TransformDef::FilterExpr(e) => self.check_row_expr(&path, e, &params),
            }
        }
    }

    fn check_row_expr(&mut self, path: &str, e: &Expr, params: &BTreeSet<&str>) {
        for id in e.free_identifiers() {
            let known = self.data.column(&id).is_some()
                || params.contains(id.as_str())
                || (id == ANIM_VALUE && self.spec.time_encoding.is_some());
            if !known {
                self.error(path, format!("unbound identifier `{id}`"));
            }
        }
    }

    fn check_overrides(&mut self) {
        for (key, ov) in [("enter", &self.spec.enter), ("exit", &self.spec.exit)] {
            let Some(ov) = ov else { continue };
            for (ch, v) in ov {
                let path = format!("/{key}/{}", ch.name());
                if *ch != Channel::Opacity {
                    self.warning(path, format!("only opacity is supported for {key}; ignored"));
                } else if !matches!(v.as_f64(), Some(x) if (0.0..=1.0).contains(&x)) {
                    self.error(path, "opacity must be a number in [0, 1]");
                }
            }
        }
    }
}
