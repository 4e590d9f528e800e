use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use super::{AxisItem, LegendEntry, MarkItem, Scenegraph, Tick};
use crate::compile::ir::{ChannelEncoding, EnterExitNode, MarkNode, NodeKind, RangeSpec, ScaleKind};
use crate::compile::stages::anim_value_id;
use crate::model::spec::{Channel, MarkType};
use crate::model::table::DataTable;
use crate::model::value::{fmt_number, format_timestamp, Value};
use crate::runtime::scales::{ResolvedDomain, ResolvedScale};
use crate::runtime::tween::STATUS;
use crate::runtime::{RuntimeState, ROW_ID};

const DEFAULT_SIZE: f64 = 64.0;
const BAND_FILL: f64 = 0.8;
const TICK_LENGTH: f64 = 10.0;
const MAX_TICKS: usize = 10;

/// A channel value after scale application.
#[derive(Debug, Clone, PartialEq)]
pub enum Scaled {
    Num(f64),
    Color(String),
    Raw(Value),
}

impl Scaled {
    fn num(&self) -> Option<f64> {
        match self {
            Scaled::Num(n) => Some(*n),
            Scaled::Raw(v) => v.as_f64(),
            Scaled::Color(_) => None,
        }
    }

    fn color(&self) -> Option<String> {
        match self {
            Scaled::Color(c) => Some(c.clone()),
            Scaled::Raw(Value::String(s)) => Some(s.clone()),
            _ => None,
        }
    }
}

fn interval(range: &RangeSpec) -> (f64, f64) {
    match range {
        RangeSpec::Interval { lo, hi } => (*lo, *hi),
        _ => (0.0, 1.0),
    }
}

fn index_of(values: &[Value], v: &Value) -> Option<usize> {
    let k = v.canonical_key();
    values.iter().position(|d| d.canonical_key() == k)
}

/// Width of one band or point step for a discrete positional scale.
fn step(scale: &ResolvedScale) -> Option<f64> {
    let ResolvedDomain::Discrete { values } = &scale.domain else {
        return None;
    };
    let (r0, r1) = interval(&scale.range);
    Some((r1 - r0).abs() / values.len().max(1) as f64)
}

fn parse_hex(c: &str) -> Option<[f64; 3]> {
    let h = c.strip_prefix('#')?;
    if h.len() != 6 {
        return None;
    }
    let mut out = [0.0; 3];
    for (i, o) in out.iter_mut().enumerate() {
        *o = u8::from_str_radix(&h[2 * i..2 * i + 2], 16).ok()? as f64;
    }
    Some(out)
}

fn mix(a: &str, b: &str, t: f64) -> String {
    match (parse_hex(a), parse_hex(b)) {
        (Some(x), Some(y)) => {
            let c: Vec<u8> = (0..3)
                .map(|i| (x[i] + t * (y[i] - x[i])).round().clamp(0.0, 255.0) as u8)
                .collect();
            format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
        }
        _ => a.to_string(),
    }
}

/// Maps a data value through a resolved scale. Band scales return the band
/// start; point scales the band centre.
pub fn apply_scale(scale: &ResolvedScale, v: &Value) -> Option<Scaled> {
    match &scale.domain {
        ResolvedDomain::Continuous { lo, hi } => {
            let x = v.as_f64()?;
            let t = match scale.scale {
                ScaleKind::Sqrt => {
                    let (a, b) = (lo.max(0.0).sqrt(), hi.max(0.0).sqrt());
                    if b == a {
                        0.0
                    } else {
                        (x.max(0.0).sqrt() - a) / (b - a)
                    }
                }
                _ if hi == lo => 0.5,
                _ => (x - lo) / (hi - lo),
            };
            Some(match &scale.range {
                RangeSpec::Colors { values } => match values.as_slice() {
                    [] => return None,
                    [only] => Scaled::Color(only.clone()),
                    [first, .., last] => Scaled::Color(mix(first, last, t.clamp(0.0, 1.0))),
                },
                range => {
                    let (r0, r1) = interval(range);
                    Scaled::Num(r0 + t * (r1 - r0))
                }
            })
        }
        ResolvedDomain::Discrete { values } => {
            if let RangeSpec::Colors { values: colors } = &scale.range {
                // Values outside the domain continue the palette cycle.
                let i = index_of(values, v).unwrap_or(values.len());
                return colors.get(i % colors.len().max(1)).cloned().map(Scaled::Color);
            }
            let i = index_of(values, v)?;
            Some(match &scale.range {
                RangeSpec::Colors { .. } => return None,
                range => {
                    let (r0, r1) = interval(range);
                    let n = values.len() as f64;
                    let dir = if r1 >= r0 { 1.0 } else { -1.0 };
                    let w = (r1 - r0).abs() / n;
                    let offset = match scale.scale {
                        ScaleKind::Band => i as f64 * w + (1.0 - BAND_FILL) / 2.0 * w,
                        _ => (i as f64 + 0.5) * w,
                    };
                    Scaled::Num(r0 + dir * offset)
                }
            })
        }
    }
}

struct Encoder<'a> {
    state: &'a RuntimeState,
    mark: &'a MarkNode,
    table: &'a DataTable,
    misses: RefCell<BTreeSet<String>>,
}

impl Encoder<'_> {
    fn scale(&self, ch: Channel) -> Option<&ResolvedScale> {
        match self.mark.channels.get(&ch)? {
            ChannelEncoding::Field { scale: Some(s), .. } => self.state.scale(s),
            ChannelEncoding::Conditional { branch, default, .. } => {
                [branch, default].into_iter().find_map(|e| match e.as_ref() {
                    ChannelEncoding::Field { scale: Some(s), .. } => self.state.scale(s),
                    _ => None,
                })
            }
            _ => None,
        }
    }

    fn resolve(&self, enc: &ChannelEncoding, row: &[Value]) -> Option<Scaled> {
        match enc {
            ChannelEncoding::Field { field, scale } => {
                let v = &row[self.table.column_index(field)?];
                match scale.as_deref().and_then(|s| self.state.scale(s)) {
                    Some(s) => {
                        if let (ResolvedDomain::Discrete { values }, RangeSpec::Colors { .. }) = (&s.domain, &s.range) {
                            if index_of(values, v).is_none() {
                                self.misses
                                    .borrow_mut()
                                    .insert(format!("value {} of `{field}` is outside the color domain", v.label()));
                            }
                        }
                        apply_scale(s, v)
                    }
                    None => Some(Scaled::Raw(v.clone())),
                }
            }
            ChannelEncoding::Value { value } => Some(Scaled::Raw(value.clone())),
            ChannelEncoding::Conditional {
                selection,
                branch,
                default,
            } => {
                if self.state.evaluate_selection(selection, self.table, row) {
                    self.resolve(branch, row)
                } else {
                    self.resolve(default, row)
                }
            }
        }
    }

    fn channel(&self, ch: Channel, row: &[Value]) -> Option<Scaled> {
        self.resolve(self.mark.channels.get(&ch)?, row)
    }

    /// Unscaled value of a channel, for labels and grouping.
    fn raw(&self, ch: Channel, row: &[Value]) -> Option<Value> {
        fn go(e: &Encoder, enc: &ChannelEncoding, row: &[Value]) -> Option<Value> {
            match enc {
                ChannelEncoding::Field { field, .. } => Some(row[e.table.column_index(field)?].clone()),
                ChannelEncoding::Value { value } => Some(value.clone()),
                ChannelEncoding::Conditional {
                    selection,
                    branch,
                    default,
                } => {
                    if e.state.evaluate_selection(selection, e.table, row) {
                        go(e, branch, row)
                    } else {
                        go(e, default, row)
                    }
                }
            }
        }
        go(self, self.mark.channels.get(&ch)?, row)
    }

    /// Pixel position of data value zero on a continuous positional scale.
    fn baseline(&self, ch: Channel) -> f64 {
        let s = self.scale(ch);
        match s.and_then(|s| apply_scale(s, &Value::Number(0.0))) {
            Some(Scaled::Num(p)) => {
                let (r0, r1) = interval(&s.expect("scale exists").range);
                p.clamp(r0.min(r1), r0.max(r1))
            }
            _ => {
                if ch == Channel::X {
                    0.0
                } else {
                    self.state.graph().height
                }
            }
        }
    }

    fn is_discrete(&self, ch: Channel) -> bool {
        self.scale(ch)
            .is_some_and(|s| matches!(s.domain, ResolvedDomain::Discrete { .. }))
    }

    /// Thickness of bars along a continuous cross axis: the band width the
    /// cross field would get if its source values were categories.
    fn cross_thickness(&self, cross: Channel, span: f64) -> f64 {
        let n = match self.mark.channels.get(&cross) {
            Some(ChannelEncoding::Field { field, .. }) => self
                .state
                .dataset(crate::compile::stages::SOURCE)
                .map(|t| t.distinct(field).len())
                .unwrap_or(1),
            _ => 1,
        };
        BAND_FILL * span.abs() / n.max(1) as f64
    }

    fn item(&self, row: &[Value], overrides: Option<(&EnterExitNode, f64)>) -> MarkItem {
        let g = self.state.graph();
        let (w, h) = (g.width, g.height);
        let kind = self.mark.mark;
        let key = self
            .table
            .column_index(ROW_ID)
            .map(|i| row[i].label())
            .unwrap_or_default();
        let x = self.channel(Channel::X, row).and_then(|s| s.num());
        let y = self.channel(Channel::Y, row).and_then(|s| s.num());
        let status = self
            .table
            .column_index(STATUS)
            .and_then(|i| row[i].as_str().map(String::from));

        let color = self.channel(Channel::Color, row).and_then(|s| s.color());
        let fill = match kind {
            MarkType::Line | MarkType::Tick => "none".to_string(),
            _ => color.clone().unwrap_or_else(|| self.mark.style.fill.clone()),
        };
        let stroke = match kind {
            MarkType::Line | MarkType::Tick => color.unwrap_or_else(|| self.mark.style.stroke.clone()),
            _ => self.mark.style.stroke.clone(),
        };
        let size = match self.channel(Channel::Size, row) {
            Some(Scaled::Num(r)) => std::f64::consts::PI * r * r,
            Some(Scaled::Raw(v)) => v.as_f64().unwrap_or(DEFAULT_SIZE),
            _ => match kind {
                MarkType::Text => self.mark.style.font_size,
                _ => DEFAULT_SIZE,
            },
        };
        let mut opacity = self.channel(Channel::Opacity, row).and_then(|s| s.num()).unwrap_or(1.0);
        if let (Some((ee, u)), Some(st)) = (overrides, status.as_deref()) {
            let target = match st {
                "enter" => ee.enter.get(&Channel::Opacity),
                "exit" => ee.exit.get(&Channel::Opacity),
                _ => None,
            };
            if let Some(t) = target.and_then(Value::as_f64) {
                opacity = if st == "enter" {
                    t + u * (opacity - t)
                } else {
                    opacity + u * (t - opacity)
                };
            }
        }
        let tooltip = self.raw(Channel::Tooltip, row).map(|v| v.label());
        let group = match kind {
            MarkType::Line => self
                .raw(Channel::Detail, row)
                .or_else(|| self.raw(Channel::Color, row))
                .map(|v| v.label()),
            _ => None,
        };

        let mut item = MarkItem {
            kind,
            key,
            x: x.unwrap_or(w / 2.0),
            y: y.unwrap_or(h / 2.0),
            x2: None,
            y2: None,
            size,
            fill,
            stroke,
            opacity,
            text: None,
            tooltip: tooltip.clone(),
            status,
            group,
        };
        match kind {
            MarkType::Bar => self.bar_geometry(&mut item, x, y),
            MarkType::Tick => {
                if self.is_discrete(Channel::X) && !self.is_discrete(Channel::Y) {
                    let half = self.scale(Channel::X).and_then(step).unwrap_or(TICK_LENGTH) * BAND_FILL / 2.0;
                    let c = item.x + self.band_center_offset(Channel::X);
                    item.x = c - half;
                    item.x2 = Some(c + half);
                    item.y2 = Some(item.y);
                } else {
                    let half = if self.is_discrete(Channel::Y) {
                        self.scale(Channel::Y).and_then(step).unwrap_or(TICK_LENGTH) * BAND_FILL / 2.0
                    } else {
                        TICK_LENGTH / 2.0
                    };
                    let c = item.y + self.band_center_offset(Channel::Y);
                    item.y = c - half;
                    item.y2 = Some(c + half);
                    item.x2 = Some(item.x);
                }
            }
            MarkType::Text => item.text = tooltip,
            MarkType::Circle | MarkType::Line => {
                item.x += self.band_center_offset(Channel::X);
                item.y += self.band_center_offset(Channel::Y);
            }
        }
        item
    }

    /// Offset from a band start to its centre; zero for other scales.
    fn band_center_offset(&self, ch: Channel) -> f64 {
        match self.scale(ch) {
            Some(s) if s.scale == ScaleKind::Band => step(s).unwrap_or(0.0) * BAND_FILL / 2.0,
            _ => 0.0,
        }
    }

    fn bar_geometry(&self, item: &mut MarkItem, x: Option<f64>, y: Option<f64>) {
        let g = self.state.graph();
        let (dx, dy) = (self.is_discrete(Channel::X), self.is_discrete(Channel::Y));
        let band = |ch| self.scale(ch).and_then(step).unwrap_or(0.0) * BAND_FILL;
        let (x0, x1, y0, y1) = match (dx, dy) {
            (true, true) => {
                let (bx, by) = (band(Channel::X), band(Channel::Y));
                (item.x, item.x + bx, item.y, item.y + by)
            }
            (true, false) => {
                let base = self.baseline(Channel::Y);
                (item.x, item.x + band(Channel::X), y.unwrap_or(base), base)
            }
            (false, true) => {
                let base = self.baseline(Channel::X);
                (base, x.unwrap_or(base), item.y, item.y + band(Channel::Y))
            }
            (false, false) => {
                let base = self.baseline(Channel::X);
                let t = self.cross_thickness(Channel::Y, g.height);
                (base, x.unwrap_or(base), item.y - t / 2.0, item.y + t / 2.0)
            }
        };
        item.x = x0.min(x1);
        item.x2 = Some(x0.max(x1));
        item.y = y0.min(y1);
        item.y2 = Some(y0.max(y1));
    }
}

/// Ticks at multiples of 1, 2 or 5 times a power of ten, at most
/// `MAX_TICKS` of them, covering `[lo, hi]`.
pub fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
        return if lo.is_finite() { vec![lo] } else { Vec::new() };
    }
    let raw = (hi - lo) / (MAX_TICKS - 1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last)
        .map(|k| {
            let v = k as f64 * step;
            // Trim representation noise such as 0.30000000000000004.
            let digits = (-mag.log10()).max(0.0) as i32 + 1;
            let f = 10f64.powi(digits);
            (v * f).round() / f
        })
        .collect()
}

fn axis(channel: Channel, title: &str, scale: &ResolvedScale) -> AxisItem {
    match &scale.domain {
        ResolvedDomain::Continuous { lo, hi } => {
            let label = |v: f64| {
                if scale.scale == ScaleKind::Time {
                    format_timestamp(v)
                } else {
                    fmt_number(v)
                }
            };
            // Domain endpoints plus the nice ticks strictly between them.
            let mut values = vec![*lo];
            values.extend(nice_ticks(*lo, *hi).into_iter().filter(|v| v > lo && v < hi));
            if hi > lo {
                values.push(*hi);
            }
            let ticks = values
                .into_iter()
                .filter_map(|v| {
                    let p = apply_scale(scale, &Value::Number(v))?.num()?;
                    Some(Tick {
                        position: p,
                        label: label(v),
                    })
                })
                .collect();
            let wrap = |v: f64| {
                if scale.scale == ScaleKind::Time {
                    Value::Timestamp(v)
                } else {
                    Value::Number(v)
                }
            };
            AxisItem {
                channel: channel.name().into(),
                title: title.into(),
                domain: vec![wrap(*lo), wrap(*hi)],
                ticks,
            }
        }
        ResolvedDomain::Discrete { values } => {
            let centre = if scale.scale == ScaleKind::Band {
                step(scale).unwrap_or(0.0) * BAND_FILL / 2.0
            } else {
                0.0
            };
            let ticks = values
                .iter()
                .filter_map(|v| {
                    Some(Tick {
                        position: apply_scale(scale, v)?.num()? + centre,
                        label: v.label(),
                    })
                })
                .collect();
            AxisItem {
                channel: channel.name().into(),
                title: title.into(),
                domain: values.clone(),
                ticks,
            }
        }
    }
}

fn legend(scale: &ResolvedScale) -> Vec<LegendEntry> {
    let values = match &scale.domain {
        ResolvedDomain::Discrete { values } => values.clone(),
        ResolvedDomain::Continuous { lo, hi } => vec![Value::Number(*lo), Value::Number(*hi)],
    };
    values
        .iter()
        .filter_map(|v| {
            Some(LegendEntry {
                label: v.label(),
                color: apply_scale(scale, v)?.color()?,
            })
        })
        .collect()
}

fn field_title(enc: &ChannelEncoding) -> Option<&str> {
    match enc {
        ChannelEncoding::Field { field, .. } => Some(field),
        ChannelEncoding::Value { .. } => None,
        ChannelEncoding::Conditional { branch, default, .. } => field_title(branch).or_else(|| field_title(default)),
    }
}

/// Encodes the state's current frame.
pub fn encode_frame(state: &RuntimeState) -> Scenegraph {
    let g = state.graph();
    let (mark_id, mark) = g.marks().next().expect("verified graph has a mark");
    let empty = DataTable::default();
    let table = state.dataset(&mark.dataset).unwrap_or(&empty);
    let overrides = g.nodes.values().find_map(|n| match &n.kind {
        NodeKind::EnterExit(e) if e.mark == mark_id => {
            let u = state.signal(&e.fraction).and_then(Value::as_f64).unwrap_or(0.0);
            Some((e, u))
        }
        _ => None,
    });
    let enc = Encoder {
        state,
        mark,
        table,
        misses: RefCell::new(BTreeSet::new()),
    };
    let mut items: Vec<MarkItem> = table.rows().iter().map(|r| enc.item(r, overrides)).collect();
    if mark.mark == MarkType::Line {
        // Series in first-appearance order, points ordered along x.
        let mut order: Vec<Option<String>> = Vec::new();
        for it in &items {
            if !order.contains(&it.group) {
                order.push(it.group.clone());
            }
        }
        items.sort_by(|a, b| {
            let ga = order.iter().position(|g| *g == a.group);
            let gb = order.iter().position(|g| *g == b.group);
            ga.cmp(&gb).then(a.x.total_cmp(&b.x))
        });
    }

    let mut axes = Vec::new();
    for ch in [Channel::X, Channel::Y] {
        if let (Some(s), Some(e)) = (enc.scale(ch), mark.channels.get(&ch)) {
            axes.push(axis(ch, field_title(e).unwrap_or(ch.name()), s));
        }
    }
    let legend = enc.scale(Channel::Color).map(legend).unwrap_or_default();

    let anim_values: BTreeMap<String, Value> = state
        .animated_selections()
        .into_iter()
        .map(|s| {
            let v = state.signal(&anim_value_id(s)).cloned().unwrap_or(Value::Null);
            (s.to_string(), v)
        })
        .collect();
    let selections = state
        .stores()
        .iter()
        .map(|(id, keys)| {
            let name = id.strip_prefix("selection:").unwrap_or(id).to_string();
            (name, keys.iter().cloned().collect())
        })
        .collect();

    let mut warnings: Vec<String> = state.warnings().map(String::from).collect();
    warnings.extend(enc.misses.into_inner());
    Scenegraph {
        width: g.width,
        height: g.height,
        mark: mark.mark,
        items,
        axes,
        legend,
        widgets: state.widgets(),
        anim_values,
        selections,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(lo: f64, hi: f64, r0: f64, r1: f64) -> ResolvedScale {
        ResolvedScale {
            scale: ScaleKind::Linear,
            domain: ResolvedDomain::Continuous { lo, hi },
            range: RangeSpec::Interval { lo: r0, hi: r1 },
        }
    }

    #[test]
    fn linear_and_inverted_ranges() {
        let s = linear(0.0, 10.0, 0.0, 400.0);
        assert_eq!(apply_scale(&s, &Value::Number(2.5)), Some(Scaled::Num(100.0)));
        let s = linear(0.0, 10.0, 300.0, 0.0);
        assert_eq!(apply_scale(&s, &Value::Number(10.0)), Some(Scaled::Num(0.0)));
    }

    #[test]
    fn band_start_and_point_centre() {
        let values = vec![Value::from("a"), Value::from("b")];
        let band = ResolvedScale {
            scale: ScaleKind::Band,
            domain: ResolvedDomain::Discrete { values: values.clone() },
            range: RangeSpec::Interval { lo: 0.0, hi: 100.0 },
        };
        assert_eq!(apply_scale(&band, &Value::from("b")), Some(Scaled::Num(55.0)));
        let point = ResolvedScale {
            scale: ScaleKind::Point,
            ..band
        };
        assert_eq!(apply_scale(&point, &Value::from("a")), Some(Scaled::Num(25.0)));
        assert_eq!(apply_scale(&point, &Value::from("z")), None);
    }

    #[test]
    fn colors() {
        let ord = ResolvedScale {
            scale: ScaleKind::OrdinalColor,
            domain: ResolvedDomain::Discrete {
                values: vec![Value::from("x"), Value::from("y")],
            },
            range: RangeSpec::Colors {
                values: vec!["#000000".into()],
            },
        };
        assert_eq!(
            apply_scale(&ord, &Value::from("y")),
            Some(Scaled::Color("#000000".into()))
        );
        assert_eq!(
            apply_scale(&ord, &Value::from("miss")),
            Some(Scaled::Color("#000000".into()))
        );
        let seq = ResolvedScale {
            scale: ScaleKind::SequentialColor,
            domain: ResolvedDomain::Continuous { lo: 0.0, hi: 1.0 },
            range: RangeSpec::Colors {
                values: vec!["#000000".into(), "#ffffff".into()],
            },
        };
        assert_eq!(
            apply_scale(&seq, &Value::Number(0.5)),
            Some(Scaled::Color("#808080".into()))
        );
    }

    #[test]
    fn sqrt_scale_maps_area() {
        let s = ResolvedScale {
            scale: ScaleKind::Sqrt,
            domain: ResolvedDomain::Continuous { lo: 0.0, hi: 100.0 },
            range: RangeSpec::Interval { lo: 0.0, hi: 20.0 },
        };
        assert_eq!(apply_scale(&s, &Value::Number(25.0)), Some(Scaled::Num(10.0)));
    }

    #[test]
    fn ticks_are_nice_and_bounded() {
        assert_eq!(nice_ticks(0.0, 1.0), vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0]);
        assert_eq!(nice_ticks(1955.0, 2005.0), vec![1960.0, 1970.0, 1980.0, 1990.0, 2000.0]);
        assert!(nice_ticks(0.0, 37.1).len() <= MAX_TICKS);
        assert_eq!(nice_ticks(3.0, 3.0), vec![3.0]);
        let t = nice_ticks(0.1, 0.7);
        assert!(t.contains(&0.3), "{t:?}");
    }
}
