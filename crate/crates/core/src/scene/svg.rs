use std::fmt::Write;

use super::{AxisItem, MarkItem, Scenegraph};
use crate::model::spec::MarkType;

pub const PAD_LEFT: f64 = 40.0;
pub const PAD_TOP: f64 = 10.0;
pub const PAD_RIGHT: f64 = 10.0;
pub const PAD_BOTTOM: f64 = 30.0;

/// Fixed three-decimal form; `-0` prints as `0` and non-finite values as 0.
fn num(v: f64) -> String {
    if !v.is_finite() {
        return "0".into();
    }
    let s = format!("{v:.3}");
    if s.trim_start_matches('-')
        .trim_matches(|c| c == '0' || c == '.')
        .is_empty()
    {
        "0.000".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn title(out: &mut String, item: &MarkItem) {
    if let Some(t) = &item.tooltip {
        let _ = write!(out, "<title>{}</title>", escape(t));
    }
}

fn write_item(out: &mut String, it: &MarkItem) {
    let common = format!(
        r#"fill="{}" stroke="{}" opacity="{}""#,
        escape(&it.fill),
        escape(&it.stroke),
        num(it.opacity)
    );
    match it.kind {
        MarkType::Circle => {
            let _ = write!(
                out,
                r#"<circle cx="{}" cy="{}" r="{}" {common}"#,
                num(it.x),
                num(it.y),
                num(it.radius())
            );
        }
        MarkType::Bar => {
            let _ = write!(
                out,
                r#"<rect x="{}" y="{}" width="{}" height="{}" {common}"#,
                num(it.x),
                num(it.y),
                num(it.x2.unwrap_or(it.x) - it.x),
                num(it.y2.unwrap_or(it.y) - it.y)
            );
        }
        MarkType::Tick => {
            let _ = write!(
                out,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" {common}"#,
                num(it.x),
                num(it.y),
                num(it.x2.unwrap_or(it.x)),
                num(it.y2.unwrap_or(it.y))
            );
        }
        MarkType::Text => {
            let _ = write!(
                out,
                r#"<text x="{}" y="{}" font-size="{}" text-anchor="middle" {common}>{}"#,
                num(it.x),
                num(it.y),
                num(it.size),
                escape(it.text.as_deref().unwrap_or(""))
            );
            title(out, it);
            out.push_str("</text>\n");
            return;
        }
        MarkType::Line => unreachable!("lines are drawn per series"),
    }
    if it.tooltip.is_some() {
        out.push('>');
        title(out, it);
        let tag = match it.kind {
            MarkType::Circle => "circle",
            MarkType::Bar => "rect",
            _ => "line",
        };
        let _ = writeln!(out, "</{tag}>");
    } else {
        out.push_str("/>\n");
    }
}

fn write_lines(out: &mut String, items: &[MarkItem]) {
    let mut start = 0;
    while start < items.len() {
        let group = &items[start].group;
        let end = items[start..]
            .iter()
            .position(|i| &i.group != group)
            .map_or(items.len(), |p| start + p);
        let series = &items[start..end];
        let d: Vec<String> = series
            .iter()
            .enumerate()
            .map(|(i, p)| format!("{}{},{}", if i == 0 { "M" } else { "L" }, num(p.x), num(p.y)))
            .collect();
        let first = &series[0];
        let _ = writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="{}" stroke-width="2" opacity="{}"/>"#,
            d.join(""),
            escape(&first.stroke),
            num(first.opacity)
        );
        start = end;
    }
}

fn write_axis(out: &mut String, axis: &AxisItem, w: f64, h: f64) {
    let horizontal = axis.channel == "x";
    out.push_str(r##"<g class="axis" stroke="#888" fill="#444" font-size="10">"##);
    out.push('\n');
    if horizontal {
        let _ = writeln!(
            out,
            r#"<line x1="0.000" y1="{}" x2="{}" y2="{}"/>"#,
            num(h),
            num(w),
            num(h)
        );
    } else {
        let _ = writeln!(out, r#"<line x1="0.000" y1="0.000" x2="0.000" y2="{}"/>"#, num(h));
    }
    for t in &axis.ticks {
        if horizontal {
            let _ = writeln!(
                out,
                r#"<line x1="{p}" y1="{}" x2="{p}" y2="{}"/><text x="{p}" y="{}" stroke="none" text-anchor="middle">{}</text>"#,
                num(h),
                num(h + 4.0),
                num(h + 15.0),
                escape(&t.label),
                p = num(t.position)
            );
        } else {
            let _ = writeln!(
                out,
                r#"<line x1="-4.000" y1="{p}" x2="0.000" y2="{p}"/><text x="-6.000" y="{p}" stroke="none" text-anchor="end" dominant-baseline="middle">{}</text>"#,
                escape(&t.label),
                p = num(t.position)
            );
        }
    }
    out.push_str("</g>\n");
}

/// Standalone SVG document for a frame.
pub fn render_svg(sg: &Scenegraph) -> String {
    let (w, h) = (sg.width, sg.height);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{tw}" height="{th}" viewBox="0 0 {tw} {th}">"#,
        tw = num(w + PAD_LEFT + PAD_RIGHT),
        th = num(h + PAD_TOP + PAD_BOTTOM)
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<g transform="translate({},{})">"#, PAD_LEFT, PAD_TOP);
    for a in &sg.axes {
        write_axis(&mut out, a, w, h);
    }
    out.push_str("<g class=\"marks\">\n");
    if sg.mark == MarkType::Line {
        write_lines(&mut out, &sg.items);
    } else {
        for it in &sg.items {
            write_item(&mut out, it);
        }
    }
    out.push_str("</g>\n");
    if !sg.legend.is_empty() {
        out.push_str("<g class=\"legend\" font-size=\"10\">\n");
        for (i, e) in sg.legend.iter().enumerate() {
            let y = 4.0 + 14.0 * i as f64;
            let _ = writeln!(
                out,
                r##"<rect x="{}" y="{}" width="10" height="10" fill="{}"/><text x="{}" y="{}" fill="#444">{}</text>"##,
                num(w - 90.0),
                num(y),
                escape(&e.color),
                num(w - 76.0),
                num(y + 9.0),
                escape(&e.label)
            );
        }
        out.push_str("</g>\n");
    }
    if let Some(v) = sg.anim_values.values().next() {
        let _ = writeln!(
            out,
            r##"<text class="anim-value" x="{}" y="{}" font-size="28" fill="#bbb" text-anchor="end">{}</text>"##,
            num(w - 4.0),
            num(h - 8.0),
            escape(&v.label())
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}
