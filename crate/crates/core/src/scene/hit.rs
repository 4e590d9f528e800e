use super::{MarkItem, Scenegraph};
use crate::model::spec::MarkType;

/// Pointer tolerance in pixels for thin items.
const SLOP: f64 = 5.0;

fn dist_to_segment(px: f64, py: f64, (ax, ay): (f64, f64), (bx, by): (f64, f64)) -> f64 {
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((px - ax) * dx + (py - ay) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (px - (ax + t * dx)).hypot(py - (ay + t * dy))
}

fn hits(item: &MarkItem, x: f64, y: f64) -> bool {
    match item.kind {
        MarkType::Circle => (x - item.x).hypot(y - item.y) <= item.radius().max(SLOP),
        MarkType::Bar => {
            let (x2, y2) = (item.x2.unwrap_or(item.x), item.y2.unwrap_or(item.y));
            x >= item.x && x <= x2 && y >= item.y && y <= y2
        }
        MarkType::Tick => {
            let end = (item.x2.unwrap_or(item.x), item.y2.unwrap_or(item.y));
            dist_to_segment(x, y, (item.x, item.y), end) <= SLOP
        }
        MarkType::Text | MarkType::Line => (x - item.x).hypot(y - item.y) <= SLOP,
    }
}

/// Row id of the topmost item at chart-local `(x, y)`. Items later in
/// z-order win. Line segments report the nearer endpoint.
pub fn hit_test(sg: &Scenegraph, x: f64, y: f64) -> Option<String> {
    if sg.mark == MarkType::Line {
        let items = &sg.items;
        for i in (0..items.len()).rev() {
            let a = &items[i];
            if let Some(b) = items.get(i + 1).filter(|b| b.group == a.group) {
                if dist_to_segment(x, y, (a.x, a.y), (b.x, b.y)) <= SLOP {
                    let da = (x - a.x).hypot(y - a.y);
                    let db = (x - b.x).hypot(y - b.y);
                    return Some(if db < da { b.key.clone() } else { a.key.clone() });
                }
            }
            if hits(a, x, y) {
                return Some(a.key.clone());
            }
        }
        return None;
    }
    sg.items.iter().rev().find(|it| hits(it, x, y)).map(|it| it.key.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn item(kind: MarkType, key: &str, x: f64, y: f64) -> MarkItem {
        MarkItem {
            kind,
            key: key.into(),
            x,
            y,
            x2: None,
            y2: None,
            size: 64.0,
            fill: "#000".into(),
            stroke: "none".into(),
            opacity: 1.0,
            text: None,
            tooltip: None,
            status: None,
            group: None,
        }
    }

    fn scene(mark: MarkType, items: Vec<MarkItem>) -> Scenegraph {
        Scenegraph {
            width: 100.0,
            height: 100.0,
            mark,
            items,
            axes: vec![],
            legend: vec![],
            widgets: vec![],
            anim_values: BTreeMap::new(),
            selections: BTreeMap::new(),
            warnings: vec![],
        }
    }

    #[test]
    fn topmost_circle_wins() {
        let sg = scene(
            MarkType::Circle,
            vec![
                item(MarkType::Circle, "0", 10.0, 10.0),
                item(MarkType::Circle, "1", 12.0, 10.0),
            ],
        );
        assert_eq!(hit_test(&sg, 11.0, 10.0).as_deref(), Some("1"));
        assert_eq!(hit_test(&sg, 50.0, 50.0), None);
    }

    #[test]
    fn bar_containment() {
        let mut b = item(MarkType::Bar, "0", 10.0, 20.0);
        b.x2 = Some(30.0);
        b.y2 = Some(100.0);
        let sg = scene(MarkType::Bar, vec![b]);
        assert_eq!(hit_test(&sg, 30.0, 50.0).as_deref(), Some("0"));
        assert_eq!(hit_test(&sg, 31.0, 50.0), None);
    }

    #[test]
    fn line_segments_report_nearer_endpoint() {
        let sg = scene(
            MarkType::Line,
            vec![
                item(MarkType::Line, "0", 0.0, 0.0),
                item(MarkType::Line, "1", 100.0, 0.0),
            ],
        );
        assert_eq!(hit_test(&sg, 80.0, 3.0).as_deref(), Some("1"));
        assert_eq!(hit_test(&sg, 20.0, 3.0).as_deref(), Some("0"));
        assert_eq!(hit_test(&sg, 50.0, 6.0), None);
    }
}
