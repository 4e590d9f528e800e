//! The specification document model, its parser and its serializer.
//!
//! Documents are JSON. The `time` channel lives inside `encoding` in the
//! document but is lifted into [`Spec::time_encoding`] here.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::{json, Map, Value as Json};

use super::diagnostic::Diagnostic;
use super::expr::{parse_expression, Expr};
use super::table::{DataTable, FieldType};
use super::value::Value;
use crate::easing::Easing;
use crate::error::SpecError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    X,
    Y,
    Color,
    Size,
    Opacity,
    Shape,
    Tooltip,
    Detail,
}

impl Channel {
    pub const ALL: [Channel; 8] = [
        Channel::X,
        Channel::Y,
        Channel::Color,
        Channel::Size,
        Channel::Opacity,
        Channel::Shape,
        Channel::Tooltip,
        Channel::Detail,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::X => "x",
            Channel::Y => "y",
            Channel::Color => "color",
            Channel::Size => "size",
            Channel::Opacity => "opacity",
            Channel::Shape => "shape",
            Channel::Tooltip => "tooltip",
            Channel::Detail => "detail",
        }
    }

    pub fn parse(s: &str) -> Option<Channel> {
        Channel::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkType {
    Circle,
    Line,
    Bar,
    Text,
    Tick,
}

impl MarkType {
    pub fn parse(s: &str) -> Option<MarkType> {
        Some(match s {
            "circle" => MarkType::Circle,
            "line" => MarkType::Line,
            "bar" => MarkType::Bar,
            "text" => MarkType::Text,
            "tick" => MarkType::Tick,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            MarkType::Circle => "circle",
            MarkType::Line => "line",
            MarkType::Bar => "bar",
            MarkType::Text => "text",
            MarkType::Tick => "tick",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkDef {
    pub kind: MarkType,
    pub fill: Option<String>,
    pub stroke: Option<String>,
    pub font_size: Option<f64>,
}

impl MarkDef {
    pub fn new(kind: MarkType) -> Self {
        MarkDef {
            kind,
            fill: None,
            stroke: None,
            font_size: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Inline(DataTable),
    Url(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortOrder {
    Ascending,
    Descending,
}

/// Scale overrides for visual channels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScaleDef {
    pub kind: Option<String>,
    pub domain: Option<Vec<Value>>,
    pub range: Option<Vec<Value>>,
    pub zero: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDef {
    pub field: String,
    pub field_type: Option<FieldType>,
    pub scale: Option<ScaleDef>,
    pub sort: Option<SortOrder>,
}

impl FieldDef {
    pub fn new(field: impl Into<String>) -> Self {
        FieldDef {
            field: field.into(),
            field_type: None,
            scale: None,
            sort: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelDef {
    Field(FieldDef),
    Value(Value),
    Conditional(ConditionalDef),
}

/// `branch` applies to rows in the selection, `default` to the rest. Both
/// are field or value definitions.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalDef {
    pub param: String,
    pub branch: Box<ChannelDef>,
    pub default: Box<ChannelDef>,
}

impl ChannelDef {
    /// Field definitions reachable from this channel, including both
    /// branches of a conditional.
    pub fn field_defs(&self) -> Vec<&FieldDef> {
        match self {
            ChannelDef::Field(f) => vec![f],
            ChannelDef::Value(_) => vec![],
            ChannelDef::Conditional(c) => {
                let mut v = c.branch.field_defs();
                v.extend(c.default.field_defs());
                v
            }
        }
    }

    pub fn field_defs_mut(&mut self) -> Vec<&mut FieldDef> {
        match self {
            ChannelDef::Field(f) => vec![f],
            ChannelDef::Value(_) => vec![],
            ChannelDef::Conditional(c) => {
                let mut v = c.branch.field_defs_mut();
                v.extend(c.default.field_defs_mut());
                v
            }
        }
    }

    /// The field of a plain field channel.
    pub fn field(&self) -> Option<&FieldDef> {
        match self {
            ChannelDef::Field(f) => Some(f),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KeyDef {
    Field(String),
    /// Explicitly no key: keyframes snap without tweening.
    Disabled,
}

impl KeyDef {
    pub fn field(&self) -> Option<&str> {
        match self {
            KeyDef::Field(f) => Some(f),
            KeyDef::Disabled => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TimeDomain {
    Discrete(Vec<Value>),
    Continuous(Value, Value),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeRange {
    /// Milliseconds per domain value (discrete) or per domain unit
    /// (continuous).
    Step(f64),
    /// Total milliseconds for the whole domain.
    Duration(f64),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeScaleDef {
    pub domain: Option<TimeDomain>,
    pub range: Option<TimeRange>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeEncodingDef {
    pub field: String,
    pub field_type: Option<FieldType>,
    pub key: Option<KeyDef>,
    pub scale: Option<TimeScaleDef>,
    pub rescale: Option<bool>,
}

impl TimeEncodingDef {
    pub fn new(field: impl Into<String>) -> Self {
        TimeEncodingDef {
            field: field.into(),
            field_type: None,
            key: None,
            scale: None,
            rescale: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventSource {
    Timer,
    PointerMove,
    Click,
    Widget,
}

impl EventSource {
    pub fn name(self) -> &'static str {
        match self {
            EventSource::Timer => "timer",
            EventSource::PointerMove => "pointermove",
            EventSource::Click => "click",
            EventSource::Widget => "widget",
        }
    }

    pub fn parse(s: &str) -> Option<EventSource> {
        Some(match s {
            "timer" => EventSource::Timer,
            "pointermove" | "mousemove" | "mouseover" => EventSource::PointerMove,
            "click" => EventSource::Click,
            "widget" => EventSource::Widget,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventStreamDef {
    pub source: EventSource,
    pub filter: Option<Expr>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompareOp {
    Eq,
    Lt,
    Lte,
    Gt,
    Gte,
}

impl CompareOp {
    pub const ALL: [CompareOp; 5] = [
        CompareOp::Eq,
        CompareOp::Lt,
        CompareOp::Lte,
        CompareOp::Gt,
        CompareOp::Gte,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CompareOp::Eq => "eq",
            CompareOp::Lt => "lt",
            CompareOp::Lte => "lte",
            CompareOp::Gt => "gt",
            CompareOp::Gte => "gte",
        }
    }

    pub fn to_binary(self) -> super::expr::BinaryOp {
        use super::expr::BinaryOp;
        match self {
            CompareOp::Eq => BinaryOp::Eq,
            CompareOp::Lt => BinaryOp::Lt,
            CompareOp::Lte => BinaryOp::Lte,
            CompareOp::Gt => BinaryOp::Gt,
            CompareOp::Gte => BinaryOp::Gte,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub field: String,
    pub op: CompareOp,
    pub rhs: Expr,
}

/// A conjunction: a row satisfies the predicate iff every comparison holds.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PredicateDef {
    pub comparisons: Vec<Comparison>,
}

impl PredicateDef {
    pub fn eq_anim_value(field: &str) -> Self {
        PredicateDef {
            comparisons: vec![Comparison {
                field: field.to_string(),
                op: CompareOp::Eq,
                rhs: Expr::ident(crate::ANIM_VALUE),
            }],
        }
    }

    /// The predicate as a boolean expression over row fields and
    /// `anim_value`/params.
    pub fn to_expr(&self) -> Expr {
        Expr::all(
            self.comparisons
                .iter()
                .map(|c| Expr::binary(c.op.to_binary(), Expr::ident(&c.field), c.rhs.clone()))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WidgetKind {
    RangeSlider,
    Checkbox,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BindDef {
    pub widget: WidgetKind,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub step: Option<f64>,
}

impl BindDef {
    pub fn checkbox() -> Self {
        BindDef {
            widget: WidgetKind::Checkbox,
            min: None,
            max: None,
            step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauseEntry {
    pub value: Value,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionDef {
    pub name: String,
    pub on: EventStreamDef,
    pub predicate: Option<PredicateDef>,
    pub bind: Option<BindDef>,
    pub pause: Option<Vec<PauseEntry>>,
    pub easing: Option<Easing>,
    pub fields: Option<Vec<String>>,
}

impl SelectionDef {
    pub fn is_animated(&self) -> bool {
        self.on.source == EventSource::Timer
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableParamDef {
    pub name: String,
    pub value: Value,
    pub bind: Option<BindDef>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamDef {
    Selection(SelectionDef),
    Variable(VariableParamDef),
}

impl ParamDef {
    pub fn name(&self) -> &str {
        match self {
            ParamDef::Selection(s) => &s.name,
            ParamDef::Variable(v) => &v.name,
        }
    }

    pub fn as_selection(&self) -> Option<&SelectionDef> {
        match self {
            ParamDef::Selection(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransformDef {
    FilterSelection(String),
    FilterExpr(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spec {
    pub data: DataSource,
    pub mark: MarkDef,
    pub encoding: BTreeMap<Channel, ChannelDef>,
    pub time_encoding: Option<TimeEncodingDef>,
    pub params: Vec<ParamDef>,
    pub transforms: Vec<TransformDef>,
    /// Value overrides applied to items entering during a tween.
    pub enter: Option<BTreeMap<Channel, Value>>,
    /// Value overrides applied to items exiting during a tween.
    pub exit: Option<BTreeMap<Channel, Value>>,
    pub width: Option<f64>,
    pub height: Option<f64>,
}

impl Spec {
    pub fn new(data: DataSource, mark: MarkDef) -> Self {
        Spec {
            data,
            mark,
            encoding: BTreeMap::new(),
            time_encoding: None,
            params: Vec::new(),
            transforms: Vec::new(),
            enter: None,
            exit: None,
            width: None,
            height: None,
        }
    }

    pub fn param(&self, name: &str) -> Option<&ParamDef> {
        self.params.iter().find(|p| p.name() == name)
    }

    pub fn selection(&self, name: &str) -> Option<&SelectionDef> {
        self.param(name).and_then(ParamDef::as_selection)
    }

    pub fn selections(&self) -> impl Iterator<Item = &SelectionDef> {
        self.params.iter().filter_map(ParamDef::as_selection)
    }

    pub fn animated_selections(&self) -> impl Iterator<Item = &SelectionDef> {
        self.selections().filter(|s| s.is_animated())
    }

    /// Selection names referenced by filter transforms.
    pub fn filtered_selections(&self) -> Vec<&str> {
        self.transforms
            .iter()
            .filter_map(|t| match t {
                TransformDef::FilterSelection(n) => Some(n.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Selection names referenced by conditional encodings.
    pub fn conditioned_selections(&self) -> Vec<&str> {
        self.encoding
            .values()
            .filter_map(|c| match c {
                ChannelDef::Conditional(c) => Some(c.param.as_str()),
                _ => None,
            })
            .collect()
    }

    pub fn inline_data(&self) -> Option<&DataTable> {
        match &self.data {
            DataSource::Inline(t) => Some(t),
            DataSource::Url(_) => None,
        }
    }
}

/// Result of [`parse_spec`]: the spec plus non-fatal warnings.
#[derive(Debug, Clone)]
pub struct ParsedSpec {
    pub spec: Spec,
    pub warnings: Vec<Diagnostic>,
}

// ---------------------------------------------------------------------------
// Parsing

pub fn parse_spec(text: &str) -> Result<ParsedSpec, SpecError> {
    let json: Json = serde_json::from_str(text).map_err(|e| SpecError::Syntax {
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })?;
    spec_from_json(&json)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

pub fn spec_from_json(json: &Json) -> Result<ParsedSpec, SpecError> {
    let mut warnings = Vec::new();
    let obj = json
        .as_object()
        .ok_or_else(|| SpecError::schema("/", "expected an object"))?;
    let mut root = Obj::new(obj, String::new());
    let missing: Vec<&str> = ["data", "mark"].into_iter().filter(|k| !obj.contains_key(*k)).collect();
    if !missing.is_empty() {
        return Err(SpecError::schema("/", format!("missing: {}", missing.join(", "))));
    }

    let data = parse_data(root.take("data").unwrap(), "/data")?;
    let mark = parse_mark(root.take("mark").unwrap(), "/mark", &mut warnings)?;
    let mut encoding = BTreeMap::new();
    let mut time_encoding = None;
    if let Some(enc) = root.take("encoding") {
        let enc_obj = as_object(enc, "/encoding")?;
        for (k, v) in enc_obj {
            let path = format!("/encoding/{k}");
            if k == "time" {
                time_encoding = Some(parse_time_encoding(v, &path, &mut warnings)?);
            } else if let Some(ch) = Channel::parse(k) {
                encoding.insert(ch, parse_channel(v, &path, true, &mut warnings)?);
            } else {
                return Err(SpecError::schema(path, format!("unknown channel `{k}`")));
            }
        }
    }
    let params = match root.take("params") {
        Some(p) => as_array(p, "/params")?
            .iter()
            .enumerate()
            .map(|(i, p)| parse_param(p, &format!("/params/{i}"), &mut warnings))
            .collect::<Result<_, _>>()?,
        None => Vec::new(),
    };
    let transforms = match root.take("transform") {
        Some(t) => as_array(t, "/transform")?
            .iter()
            .enumerate()
            .map(|(i, t)| parse_transform(t, &format!("/transform/{i}"), &mut warnings))
            .collect::<Result<_, _>>()?,
        None => Vec::new(),
    };
    let enter = root.take("enter").map(|v| parse_overrides(v, "/enter")).transpose()?;
    let exit = root.take("exit").map(|v| parse_overrides(v, "/exit")).transpose()?;
    let width = root.take("width").map(|v| number(v, "/width")).transpose()?;
    let height = root.take("height").map(|v| number(v, "/height")).transpose()?;
    root.finish(&mut warnings);

    Ok(ParsedSpec {
        spec: Spec {
            data,
            mark,
            encoding,
            time_encoding,
            params,
            transforms,
            enter,
            exit,
            width,
            height,
        },
        warnings,
    })
}

/// Tracks which keys of an object were consumed so the rest can be reported.
struct Obj<'a> {
    map: &'a Map<String, Json>,
    path: String,
    used: Vec<&'a str>,
}

impl<'a> Obj<'a> {
    fn new(map: &'a Map<String, Json>, path: String) -> Self {
        Obj {
            map,
            path,
            used: Vec::new(),
        }
    }

    fn take(&mut self, key: &'a str) -> Option<&'a Json> {
        self.used.push(key);
        self.map.get(key)
    }

    fn finish(self, warnings: &mut Vec<Diagnostic>) {
        for k in self.map.keys() {
            if !self.used.contains(&k.as_str()) {
                warnings.push(Diagnostic::warning(
                    format!("{}/{k}", self.path),
                    format!("unknown key `{k}` ignored"),
                ));
            }
        }
    }
}

fn as_object<'a>(v: &'a Json, path: &str) -> Result<&'a Map<String, Json>, SpecError> {
    v.as_object()
        .ok_or_else(|| SpecError::schema(path, "expected an object"))
}

fn as_array<'a>(v: &'a Json, path: &str) -> Result<&'a Vec<Json>, SpecError> {
    v.as_array().ok_or_else(|| SpecError::schema(path, "expected an array"))
}

fn string(v: &Json, path: &str) -> Result<String, SpecError> {
    v.as_str()
        .map(str::to_string)
        .ok_or_else(|| SpecError::schema(path, "expected a string"))
}

fn number(v: &Json, path: &str) -> Result<f64, SpecError> {
    v.as_f64().ok_or_else(|| SpecError::schema(path, "expected a number"))
}

fn boolean(v: &Json, path: &str) -> Result<bool, SpecError> {
    v.as_bool().ok_or_else(|| SpecError::schema(path, "expected a boolean"))
}

fn scalar(v: &Json, path: &str) -> Result<Value, SpecError> {
    Value::from_json(v).ok_or_else(|| SpecError::schema(path, "expected a scalar value"))
}

fn expr_text(v: &Json, path: &str) -> Result<Expr, SpecError> {
    match v {
        Json::String(s) => match super::value::parse_timestamp(s) {
            Some(t) => Ok(Expr::Literal(Value::Timestamp(t))),
            None => parse_expression(s).map_err(|e| SpecError::schema(path, e.to_string())),
        },
        other => Ok(Expr::Literal(scalar(other, path)?)),
    }
}

fn field_type(v: &Json, path: &str) -> Result<FieldType, SpecError> {
    let s = string(v, path)?;
    FieldType::parse(&s).ok_or_else(|| SpecError::schema(path, format!("unknown field type `{s}`")))
}

fn parse_data(v: &Json, path: &str) -> Result<DataSource, SpecError> {
    let obj = as_object(v, path)?;
    if let Some(values) = obj.get("values") {
        let rows = as_array(values, &format!("{path}/values"))?;
        let table =
            DataTable::from_json_rows(rows).map_err(|e| SpecError::schema(format!("{path}/values"), e.to_string()))?;
        Ok(DataSource::Inline(table))
    } else if let Some(url) = obj.get("url") {
        Ok(DataSource::Url(string(url, &format!("{path}/url"))?))
    } else {
        Err(SpecError::schema(path, "expected `values` or `url`"))
    }
}

fn parse_mark(v: &Json, path: &str, warnings: &mut Vec<Diagnostic>) -> Result<MarkDef, SpecError> {
    let kind_of =
        |s: &str, p: &str| MarkType::parse(s).ok_or_else(|| SpecError::schema(p, format!("unknown mark type `{s}`")));
    match v {
        Json::String(s) => Ok(MarkDef::new(kind_of(s, path)?)),
        Json::Object(map) => {
            let mut o = Obj::new(map, path.to_string());
            let t = o.take("type").ok_or_else(|| SpecError::schema(path, "missing: type"))?;
            let mut mark = MarkDef::new(kind_of(&string(t, &format!("{path}/type"))?, path)?);
            mark.fill = o.take("fill").map(|v| string(v, &format!("{path}/fill"))).transpose()?;
            mark.stroke = o
                .take("stroke")
                .map(|v| string(v, &format!("{path}/stroke")))
                .transpose()?;
            mark.font_size = o
                .take("fontSize")
                .map(|v| number(v, &format!("{path}/fontSize")))
                .transpose()?;
            o.finish(warnings);
            Ok(mark)
        }
        _ => Err(SpecError::schema(path, "expected a mark type or object")),
    }
}

fn parse_scale(v: &Json, path: &str, warnings: &mut Vec<Diagnostic>) -> Result<ScaleDef, SpecError> {
    let mut o = Obj::new(as_object(v, path)?, path.to_string());
    let mut s = ScaleDef {
        kind: o.take("type").map(|v| string(v, &format!("{path}/type"))).transpose()?,
        ..ScaleDef::default()
    };
    if let Some(d) = o.take("domain") {
        let p = format!("{path}/domain");
        s.domain = Some(
            as_array(d, &p)?
                .iter()
                .map(|v| scalar(v, &p))
                .collect::<Result<_, _>>()?,
        );
    }
    if let Some(r) = o.take("range") {
        let p = format!("{path}/range");
        s.range = Some(
            as_array(r, &p)?
                .iter()
                .map(|v| scalar(v, &p))
                .collect::<Result<_, _>>()?,
        );
    }
    s.zero = o
        .take("zero")
        .map(|v| boolean(v, &format!("{path}/zero")))
        .transpose()?;
    o.finish(warnings);
    Ok(s)
}

fn parse_channel(
    v: &Json,
    path: &str,
    allow_condition: bool,
    warnings: &mut Vec<Diagnostic>,
) -> Result<ChannelDef, SpecError> {
    let map = as_object(v, path)?;
    let mut o = Obj::new(map, path.to_string());
    let condition = o.take("condition");
    let field = o.take("field");
    let value = o.take("value");
    let type_ = o.take("type");
    let scale = o.take("scale");
    let sort = o.take("sort");
    o.finish(warnings);

    let base = if let Some(f) = field {
        let mut fd = FieldDef::new(string(f, &format!("{path}/field"))?);
        fd.field_type = type_.map(|t| field_type(t, &format!("{path}/type"))).transpose()?;
        fd.scale = scale
            .map(|s| parse_scale(s, &format!("{path}/scale"), warnings))
            .transpose()?;
        fd.sort = sort
            .map(|s| match s.as_str() {
                Some("ascending") => Ok(SortOrder::Ascending),
                Some("descending") => Ok(SortOrder::Descending),
                _ => Err(SpecError::schema(
                    format!("{path}/sort"),
                    "expected `ascending` or `descending`",
                )),
            })
            .transpose()?;
        Some(ChannelDef::Field(fd))
    } else {
        value
            .map(|v| scalar(v, &format!("{path}/value")).map(ChannelDef::Value))
            .transpose()?
    };

    match (condition, base) {
        (Some(_), _) if !allow_condition => Err(SpecError::schema(
            format!("{path}/condition"),
            "nested conditions are not supported",
        )),
        (Some(c), Some(default)) => {
            let cpath = format!("{path}/condition");
            let cmap = as_object(c, &cpath)?;
            let param = cmap
                .get("param")
                .ok_or_else(|| SpecError::schema(&cpath, "missing: param"))?;
            let param = string(param, &format!("{cpath}/param"))?;
            let mut rest = cmap.clone();
            rest.remove("param");
            let branch = parse_channel(&Json::Object(rest), &cpath, false, warnings)?;
            Ok(ChannelDef::Conditional(ConditionalDef {
                param,
                branch: Box::new(branch),
                default: Box::new(default),
            }))
        }
        (Some(_), None) => Err(SpecError::schema(
            path,
            "conditional channel needs a default `field` or `value`",
        )),
        (None, Some(b)) => Ok(b),
        (None, None) => Err(SpecError::schema(path, "expected `field` or `value`")),
    }
}

fn parse_time_encoding(v: &Json, path: &str, warnings: &mut Vec<Diagnostic>) -> Result<TimeEncodingDef, SpecError> {
    let mut o = Obj::new(as_object(v, path)?, path.to_string());
    let field = o
        .take("field")
        .ok_or_else(|| SpecError::schema(path, "missing: field"))?;
    let mut te = TimeEncodingDef::new(string(field, &format!("{path}/field"))?);
    te.field_type = o
        .take("type")
        .map(|t| field_type(t, &format!("{path}/type")))
        .transpose()?;
    te.key = match o.take("key") {
        None => None,
        Some(Json::Null) => Some(KeyDef::Disabled),
        Some(k) => Some(KeyDef::Field(string(k, &format!("{path}/key"))?)),
    };
    te.rescale = o
        .take("rescale")
        .map(|r| boolean(r, &format!("{path}/rescale")))
        .transpose()?;
    if let Some(s) = o.take("scale") {
        let spath = format!("{path}/scale");
        let mut so = Obj::new(as_object(s, &spath)?, spath.clone());
        let kind = so
            .take("type")
            .map(|t| string(t, &format!("{spath}/type")))
            .transpose()?;
        let continuous = match kind.as_deref() {
            None | Some("band") => false,
            Some("linear") => true,
            Some(other) => {
                return Err(SpecError::schema(
                    format!("{spath}/type"),
                    format!("unknown time scale type `{other}` (expected `band` or `linear`)"),
                ))
            }
        };
        let domain = match so.take("domain") {
            None => None,
            Some(d) => {
                let dpath = format!("{spath}/domain");
                let vals: Vec<Value> = as_array(d, &dpath)?
                    .iter()
                    .map(|v| scalar(v, &dpath))
                    .collect::<Result<_, _>>()?;
                if continuous {
                    if vals.len() != 2 {
                        return Err(SpecError::schema(dpath, "a continuous domain needs exactly two values"));
                    }
                    Some(TimeDomain::Continuous(vals[0].clone(), vals[1].clone()))
                } else {
                    Some(TimeDomain::Discrete(vals))
                }
            }
        };
        if continuous && domain.is_none() {
            return Err(SpecError::schema(
                format!("{spath}/domain"),
                "a linear time scale needs an explicit [lo, hi] domain",
            ));
        }
        let range = match so.take("range") {
            None => None,
            Some(r) => {
                let rpath = format!("{spath}/range");
                let mut ro = Obj::new(as_object(r, &rpath)?, rpath.clone());
                let step = ro.take("step");
                let duration = ro.take("duration");
                ro.finish(warnings);
                match (step, duration) {
                    (Some(s), None) => Some(TimeRange::Step(number(s, &format!("{rpath}/step"))?)),
                    (None, Some(d)) => Some(TimeRange::Duration(number(d, &format!("{rpath}/duration"))?)),
                    _ => return Err(SpecError::schema(rpath, "expected exactly one of `step` or `duration`")),
                }
            }
        };
        so.finish(warnings);
        te.scale = Some(TimeScaleDef { domain, range });
    }
    o.finish(warnings);
    Ok(te)
}

fn parse_bind(v: &Json, path: &str, warnings: &mut Vec<Diagnostic>) -> Result<BindDef, SpecError> {
    let mut o = Obj::new(as_object(v, path)?, path.to_string());
    let input = o
        .take("input")
        .ok_or_else(|| SpecError::schema(path, "missing: input"))?;
    let widget = match string(input, &format!("{path}/input"))?.as_str() {
        "range" | "range-slider" => WidgetKind::RangeSlider,
        "checkbox" => WidgetKind::Checkbox,
        other => {
            return Err(SpecError::schema(
                format!("{path}/input"),
                format!("unknown input `{other}` (expected `range` or `checkbox`)"),
            ))
        }
    };
    let mut num = |k: &'static str| -> Result<Option<f64>, SpecError> {
        o.take(k).map(|v| number(v, &format!("{path}/{k}"))).transpose()
    };
    let (min, max, step) = (num("min")?, num("max")?, num("step")?);
    o.finish(warnings);
    Ok(BindDef { widget, min, max, step })
}

fn parse_predicate(v: &Json, path: &str) -> Result<PredicateDef, SpecError> {
    let items: Vec<(String, &Json)> = match v {
        Json::Array(a) => a.iter().enumerate().map(|(i, x)| (format!("{path}/{i}"), x)).collect(),
        other => vec![(path.to_string(), other)],
    };
    let mut comparisons = Vec::new();
    for (p, item) in items {
        let map = as_object(item, &p)?;
        let field = map
            .get("field")
            .ok_or_else(|| SpecError::schema(&p, "missing: field"))?;
        let field = string(field, &format!("{p}/field"))?;
        let mut found = false;
        for op in CompareOp::ALL {
            if let Some(rhs) = map.get(op.name()) {
                comparisons.push(Comparison {
                    field: field.clone(),
                    op,
                    rhs: expr_text(rhs, &format!("{p}/{}", op.name()))?,
                });
                found = true;
            }
        }
        if let Some(k) = map
            .keys()
            .find(|k| *k != "field" && !CompareOp::ALL.iter().any(|o| o.name() == *k))
        {
            return Err(SpecError::schema(
                format!("{p}/{k}"),
                format!("unknown predicate operator `{k}`"),
            ));
        }
        if !found {
            return Err(SpecError::schema(&p, "expected one of `eq`, `lt`, `lte`, `gt`, `gte`"));
        }
    }
    Ok(PredicateDef { comparisons })
}

fn parse_param(v: &Json, path: &str, warnings: &mut Vec<Diagnostic>) -> Result<ParamDef, SpecError> {
    let mut o = Obj::new(as_object(v, path)?, path.to_string());
    let name = o.take("name").ok_or_else(|| SpecError::schema(path, "missing: name"))?;
    let name = string(name, &format!("{path}/name"))?;
    let bind = o
        .take("bind")
        .map(|b| parse_bind(b, &format!("{path}/bind"), warnings))
        .transpose()?;
    let select = o.take("select");
    let value = o.take("value");
    o.finish(warnings);

    let Some(select) = select else {
        let value = value
            .map(|v| scalar(v, &format!("{path}/value")))
            .transpose()?
            .unwrap_or(Value::Null);
        return Ok(ParamDef::Variable(VariableParamDef { name, value, bind }));
    };

    let spath = format!("{path}/select");
    let (smap_owned, type_only);
    let smap = match select {
        Json::String(t) => {
            type_only = t.clone();
            smap_owned = Map::from_iter([("type".to_string(), Json::String(type_only))]);
            &smap_owned
        }
        other => as_object(other, &spath)?,
    };
    let mut so = Obj::new(smap, spath.clone());
    match so.take("type").and_then(Json::as_str) {
        Some("point") => {}
        Some(other) => {
            return Err(SpecError::schema(
                format!("{spath}/type"),
                format!("unsupported selection type `{other}` (only `point`)"),
            ))
        }
        None => return Err(SpecError::schema(&spath, "missing: type")),
    }
    let on = match so.take("on") {
        None => EventStreamDef {
            source: EventSource::Click,
            filter: None,
        },
        Some(Json::String(s)) => EventStreamDef {
            source: EventSource::parse(s)
                .ok_or_else(|| SpecError::schema(format!("{spath}/on"), format!("unknown event source `{s}`")))?,
            filter: None,
        },
        Some(other) => {
            let opath = format!("{spath}/on");
            let mut oo = Obj::new(as_object(other, &opath)?, opath.clone());
            let t = oo
                .take("type")
                .ok_or_else(|| SpecError::schema(&opath, "missing: type"))?;
            let t = string(t, &format!("{opath}/type"))?;
            let source = EventSource::parse(&t)
                .ok_or_else(|| SpecError::schema(format!("{opath}/type"), format!("unknown event source `{t}`")))?;
            let filter = oo
                .take("filter")
                .map(|f| {
                    let fp = format!("{opath}/filter");
                    let s = string(f, &fp)?;
                    parse_expression(&s).map_err(|e| SpecError::schema(fp, e.to_string()))
                })
                .transpose()?;
            oo.finish(warnings);
            EventStreamDef { source, filter }
        }
    };
    let predicate = so
        .take("predicate")
        .map(|p| parse_predicate(p, &format!("{spath}/predicate")))
        .transpose()?;
    let pause = match so.take("pause") {
        None => None,
        Some(p) => {
            let ppath = format!("{spath}/pause");
            let mut out = Vec::new();
            for (i, e) in as_array(p, &ppath)?.iter().enumerate() {
                let epath = format!("{ppath}/{i}");
                let mut eo = Obj::new(as_object(e, &epath)?, epath.clone());
                let value = eo
                    .take("value")
                    .ok_or_else(|| SpecError::schema(&epath, "missing: value"))?;
                let duration = eo
                    .take("duration")
                    .ok_or_else(|| SpecError::schema(&epath, "missing: duration"))?;
                out.push(PauseEntry {
                    value: scalar(value, &format!("{epath}/value"))?,
                    duration: number(duration, &format!("{epath}/duration"))?,
                });
                eo.finish(warnings);
            }
            Some(out)
        }
    };
    let easing = so
        .take("easing")
        .map(|e| {
            let ep = format!("{spath}/easing");
            string(e, &ep)?
                .parse::<Easing>()
                .map_err(|err| SpecError::schema(ep, err.to_string()))
        })
        .transpose()?;
    let fields = so
        .take("fields")
        .map(|f| {
            let fp = format!("{spath}/fields");
            as_array(f, &fp)?
                .iter()
                .map(|x| string(x, &fp))
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;
    so.finish(warnings);
    Ok(ParamDef::Selection(SelectionDef {
        name,
        on,
        predicate,
        bind,
        pause,
        easing,
        fields,
    }))
}

fn parse_transform(v: &Json, path: &str, warnings: &mut Vec<Diagnostic>) -> Result<TransformDef, SpecError> {
    let mut o = Obj::new(as_object(v, path)?, path.to_string());
    let filter = o
        .take("filter")
        .ok_or_else(|| SpecError::schema(path, "only `filter` transforms are supported"))?;
    o.finish(warnings);
    let fpath = format!("{path}/filter");
    match filter {
        Json::String(s) => parse_expression(s)
            .map(TransformDef::FilterExpr)
            .map_err(|e| SpecError::schema(fpath, e.to_string())),
        Json::Object(m) => {
            let p = m
                .get("param")
                .ok_or_else(|| SpecError::schema(&fpath, "missing: param"))?;
            Ok(TransformDef::FilterSelection(string(p, &format!("{fpath}/param"))?))
        }
        _ => Err(SpecError::schema(fpath, "expected an expression or {\"param\": ...}")),
    }
}

fn parse_overrides(v: &Json, path: &str) -> Result<BTreeMap<Channel, Value>, SpecError> {
    let mut out = BTreeMap::new();
    for (k, x) in as_object(v, path)? {
        let p = format!("{path}/{k}");
        let ch = Channel::parse(k).ok_or_else(|| SpecError::schema(&p, format!("unknown channel `{k}`")))?;
        let val = match x {
            Json::Object(m) => scalar(
                m.get("value").ok_or_else(|| SpecError::schema(&p, "missing: value"))?,
                &format!("{p}/value"),
            )?,
            other => scalar(other, &p)?,
        };
        out.insert(ch, val);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Serialization

impl Spec {
    pub fn to_json(&self) -> Json {
        let mut root = Map::new();
        root.insert(
            "data".into(),
            match &self.data {
                DataSource::Inline(t) => json!({ "values": t.to_json_rows() }),
                DataSource::Url(u) => json!({ "url": u }),
            },
        );
        root.insert("mark".into(), mark_json(&self.mark));
        let mut enc = Map::new();
        for (ch, def) in &self.encoding {
            enc.insert(ch.name().into(), channel_json(def));
        }
        if let Some(te) = &self.time_encoding {
            enc.insert("time".into(), time_json(te));
        }
        if !enc.is_empty() {
            root.insert("encoding".into(), Json::Object(enc));
        }
        if !self.params.is_empty() {
            root.insert(
                "params".into(),
                Json::Array(self.params.iter().map(param_json).collect()),
            );
        }
        if !self.transforms.is_empty() {
            root.insert(
                "transform".into(),
                Json::Array(
                    self.transforms
                        .iter()
                        .map(|t| match t {
                            TransformDef::FilterSelection(p) => json!({"filter": {"param": p}}),
                            TransformDef::FilterExpr(e) => json!({"filter": e.to_string()}),
                        })
                        .collect(),
                ),
            );
        }
        for (key, ov) in [("enter", &self.enter), ("exit", &self.exit)] {
            if let Some(ov) = ov {
                let m: Map<String, Json> = ov
                    .iter()
                    .map(|(c, v)| (c.name().to_string(), json!({"value": v.to_json()})))
                    .collect();
                root.insert(key.into(), Json::Object(m));
            }
        }
        if let Some(w) = self.width {
            root.insert("width".into(), json!(w));
        }
        if let Some(h) = self.height {
            root.insert("height".into(), json!(h));
        }
        Json::Object(root)
    }

    /// Pretty-printed JSON document.
    pub fn to_document(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("spec JSON is always serializable")
    }
}

fn mark_json(m: &MarkDef) -> Json {
    if m.fill.is_none() && m.stroke.is_none() && m.font_size.is_none() {
        return json!(m.kind.name());
    }
    let mut o = Map::new();
    o.insert("type".into(), json!(m.kind.name()));
    if let Some(f) = &m.fill {
        o.insert("fill".into(), json!(f));
    }
    if let Some(s) = &m.stroke {
        o.insert("stroke".into(), json!(s));
    }
    if let Some(fs) = m.font_size {
        o.insert("fontSize".into(), json!(fs));
    }
    Json::Object(o)
}

fn field_json(f: &FieldDef, out: &mut Map<String, Json>) {
    out.insert("field".into(), json!(f.field));
    if let Some(t) = f.field_type {
        out.insert("type".into(), json!(t.as_str()));
    }
    if let Some(s) = &f.scale {
        let mut so = Map::new();
        if let Some(k) = &s.kind {
            so.insert("type".into(), json!(k));
        }
        if let Some(d) = &s.domain {
            so.insert("domain".into(), Json::Array(d.iter().map(Value::to_json).collect()));
        }
        if let Some(r) = &s.range {
            so.insert("range".into(), Json::Array(r.iter().map(Value::to_json).collect()));
        }
        if let Some(z) = s.zero {
            so.insert("zero".into(), json!(z));
        }
        out.insert("scale".into(), Json::Object(so));
    }
    if let Some(s) = f.sort {
        out.insert(
            "sort".into(),
            json!(match s {
                SortOrder::Ascending => "ascending",
                SortOrder::Descending => "descending",
            }),
        );
    }
}

fn channel_json(def: &ChannelDef) -> Json {
    let mut o = Map::new();
    match def {
        ChannelDef::Field(f) => field_json(f, &mut o),
        ChannelDef::Value(v) => {
            o.insert("value".into(), v.to_json());
        }
        ChannelDef::Conditional(c) => {
            let mut cond = Map::new();
            cond.insert("param".into(), json!(c.param));
            if let Json::Object(b) = channel_json(&c.branch) {
                cond.extend(b);
            }
            o.insert("condition".into(), Json::Object(cond));
            if let Json::Object(d) = channel_json(&c.default) {
                o.extend(d);
            }
        }
    }
    Json::Object(o)
}

fn time_json(te: &TimeEncodingDef) -> Json {
    let mut o = Map::new();
    o.insert("field".into(), json!(te.field));
    if let Some(t) = te.field_type {
        o.insert("type".into(), json!(t.as_str()));
    }
    match &te.key {
        Some(KeyDef::Field(k)) => {
            o.insert("key".into(), json!(k));
        }
        Some(KeyDef::Disabled) => {
            o.insert("key".into(), Json::Null);
        }
        None => {}
    }
    if let Some(s) = &te.scale {
        let mut so = Map::new();
        match &s.domain {
            Some(TimeDomain::Discrete(vals)) => {
                so.insert("type".into(), json!("band"));
                so.insert("domain".into(), Json::Array(vals.iter().map(Value::to_json).collect()));
            }
            Some(TimeDomain::Continuous(lo, hi)) => {
                so.insert("type".into(), json!("linear"));
                so.insert("domain".into(), json!([lo.to_json(), hi.to_json()]));
            }
            None => {}
        }
        match s.range {
            Some(TimeRange::Step(st)) => {
                so.insert("range".into(), json!({ "step": st }));
            }
            Some(TimeRange::Duration(d)) => {
                so.insert("range".into(), json!({ "duration": d }));
            }
            None => {}
        }
        o.insert("scale".into(), Json::Object(so));
    }
    if let Some(r) = te.rescale {
        o.insert("rescale".into(), json!(r));
    }
    Json::Object(o)
}

fn bind_json(b: &BindDef) -> Json {
    let mut o = Map::new();
    o.insert(
        "input".into(),
        json!(match b.widget {
            WidgetKind::RangeSlider => "range",
            WidgetKind::Checkbox => "checkbox",
        }),
    );
    for (k, v) in [("min", b.min), ("max", b.max), ("step", b.step)] {
        if let Some(v) = v {
            o.insert(k.into(), json!(v));
        }
    }
    Json::Object(o)
}

fn param_json(p: &ParamDef) -> Json {
    let mut o = Map::new();
    match p {
        ParamDef::Variable(v) => {
            o.insert("name".into(), json!(v.name));
            o.insert("value".into(), v.value.to_json());
            if let Some(b) = &v.bind {
                o.insert("bind".into(), bind_json(b));
            }
        }
        ParamDef::Selection(s) => {
            o.insert("name".into(), json!(s.name));
            let mut sel = Map::new();
            sel.insert("type".into(), json!("point"));
            let mut on = Map::new();
            on.insert("type".into(), json!(s.on.source.name()));
            if let Some(f) = &s.on.filter {
                on.insert("filter".into(), json!(f.to_string()));
            }
            sel.insert("on".into(), Json::Object(on));
            if let Some(pred) = &s.predicate {
                let items = pred
                    .comparisons
                    .iter()
                    .map(|c| {
                        let mut m = Map::new();
                        m.insert("field".into(), json!(c.field));
                        let rhs = match &c.rhs {
                            Expr::Literal(v) if !matches!(v, Value::String(_)) => v.to_json(),
                            e => json!(e.to_string()),
                        };
                        m.insert(c.op.name().into(), rhs);
                        Json::Object(m)
                    })
                    .collect();
                sel.insert("predicate".into(), Json::Array(items));
            }
            if let Some(pause) = &s.pause {
                sel.insert(
                    "pause".into(),
                    Json::Array(
                        pause
                            .iter()
                            .map(|p| json!({"value": p.value.to_json(), "duration": p.duration}))
                            .collect(),
                    ),
                );
            }
            if let Some(e) = s.easing {
                sel.insert("easing".into(), json!(e.name()));
            }
            if let Some(f) = &s.fields {
                sel.insert("fields".into(), json!(f));
            }
            o.insert("select".into(), Json::Object(sel));
            if let Some(b) = &s.bind {
                o.insert("bind".into(), bind_json(b));
            }
        }
    }
    Json::Object(o)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GAPMINDER: &str = r#"{
        "data": {"url": "gapminder.csv"},
        "mark": "circle",
        "encoding": {
            "x": {"field": "fertility", "type": "quantitative"},
            "y": {"field": "life_expect", "type": "quantitative"},
            "size": {"field": "pop", "type": "quantitative"},
            "color": {"field": "country"},
            "time": {"field": "year"}
        }
    }"#;

    #[test]
    fn parses_minimal_time_encoding_spec() {
        let p = parse_spec(GAPMINDER).unwrap();
        assert!(p.warnings.is_empty());
        let s = p.spec;
        assert_eq!(s.mark.kind, MarkType::Circle);
        assert_eq!(s.time_encoding.as_ref().unwrap().field, "year");
        let chans: Vec<_> = s.encoding.keys().copied().collect();
        assert_eq!(chans, [Channel::X, Channel::Y, Channel::Color, Channel::Size]);
        assert_eq!(s.data, DataSource::Url("gapminder.csv".into()));
    }

    #[test]
    fn empty_document_reports_missing_keys() {
        match parse_spec("{}") {
            Err(SpecError::Schema { path, message }) => {
                assert_eq!(path, "/");
                assert_eq!(message, "missing: data, mark");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_are_positioned() {
        match parse_spec("{\n  \"mark\": ,\n}") {
            Err(SpecError::Syntax { line, column, .. }) => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pause_list() {
        let text = r#"{
            "data": {"values": [{"year": 1995}]},
            "mark": "circle",
            "encoding": {"time": {"field": "year"}},
            "params": [{"name": "current_frame",
                        "select": {"type": "point", "on": "timer",
                                   "pause": [{"value": 1995, "duration": 2000}]}}]
        }"#;
        let s = parse_spec(text).unwrap().spec;
        let sel = s.selection("current_frame").unwrap();
        assert_eq!(
            sel.pause.as_deref(),
            Some(
                &[PauseEntry {
                    value: Value::Number(1995.0),
                    duration: 2000.0
                }][..]
            )
        );
        assert!(sel.is_animated());
    }

    #[test]
    fn unknown_keys_warn() {
        let text = r#"{"data": {"url": "x.csv"}, "mark": "bar", "title": "hello",
                       "encoding": {"x": {"field": "a", "axis": {"grid": false}}}}"#;
        let p = parse_spec(text).unwrap();
        let paths: Vec<_> = p.warnings.iter().map(|d| d.path.as_str()).collect();
        assert_eq!(paths, ["/encoding/x/axis", "/title"]);
    }

    #[test]
    fn schema_errors_are_path_annotated() {
        let text = r#"{"data": {"url": "x.csv"}, "mark": "circle",
                       "params": [{"name": "p", "select": {"type": "point", "easing": "wobble"}}]}"#;
        match parse_spec(text) {
            Err(SpecError::Schema { path, .. }) => assert_eq!(path, "/params/0/select/easing"),
            other => panic!("unexpected {other:?}"),
        }
        let text = r#"{"data": {"url": "x.csv"}, "mark": "hexagon"}"#;
        assert!(matches!(parse_spec(text), Err(SpecError::Schema { .. })));
    }

    #[test]
    fn predicate_forms() {
        let text = r#"{"data": {"url": "x.csv"}, "mark": "circle",
            "encoding": {"time": {"field": "day"}},
            "params": [
              {"name": "a", "select": {"type": "point", "on": "timer",
                 "predicate": {"field": "year", "lte": "anim_value"}}},
              {"name": "b", "select": {"type": "point", "on": "timer",
                 "predicate": [{"field": "day", "gte": "anim_value - 5"},
                               {"field": "day", "lte": "anim_value"}]}}]}"#;
        let s = parse_spec(text).unwrap().spec;
        let a = s.selection("a").unwrap().predicate.as_ref().unwrap();
        assert_eq!(a.comparisons.len(), 1);
        assert_eq!(a.comparisons[0].op, CompareOp::Lte);
        let b = s.selection("b").unwrap().predicate.as_ref().unwrap();
        assert_eq!(b.to_expr().to_string(), "day >= anim_value - 5 && day <= anim_value");
    }

    #[test]
    fn conditional_channel() {
        let text = r#"{"data": {"url": "x.csv"}, "mark": "circle",
            "params": [{"name": "highlight", "select": {"type": "point", "on": "click"}}],
            "encoding": {"opacity": {"condition": {"param": "highlight", "value": 1}, "value": 0.3}}}"#;
        let s = parse_spec(text).unwrap().spec;
        match &s.encoding[&Channel::Opacity] {
            ChannelDef::Conditional(c) => {
                assert_eq!(c.param, "highlight");
                assert_eq!(*c.branch, ChannelDef::Value(Value::Number(1.0)));
                assert_eq!(*c.default, ChannelDef::Value(Value::Number(0.3)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn serialization_round_trips() {
        let text = r#"{"data": {"values": [{"a": 1, "b": "x", "t": "2020-01-01"}]},
            "mark": {"type": "circle", "fill": "red"},
            "encoding": {
                "x": {"field": "a", "type": "quantitative", "scale": {"domain": [0, 10], "zero": false}},
                "color": {"condition": {"param": "s", "field": "b"}, "value": "grey"},
                "time": {"field": "a", "key": null,
                         "scale": {"type": "linear", "domain": [0, 23.5], "range": {"duration": 8000}},
                         "rescale": true}},
            "params": [
                {"name": "s", "select": {"type": "point", "on": {"type": "timer", "filter": "is_playing"},
                    "predicate": [{"field": "a", "gte": "anim_value - 5"}, {"field": "a", "eq": 3}],
                    "easing": "cubic-in-out", "pause": [{"value": 3, "duration": 10}]},
                 "bind": {"input": "range", "step": 1}},
                {"name": "is_playing", "value": true, "bind": {"input": "checkbox"}}],
            "transform": [{"filter": {"param": "s"}}, {"filter": "a > 0 || b == 'y'"}],
            "enter": {"opacity": 0},
            "width": 300, "height": 200}"#;
        let s = parse_spec(text).unwrap().spec;
        let again = parse_spec(&s.to_document()).unwrap();
        assert!(again.warnings.is_empty());
        assert_eq!(again.spec, s);
    }
}
