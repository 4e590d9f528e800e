use std::collections::BTreeMap;
use std::path::PathBuf;

use animflow::model::spec::MarkType;
use animflow::scene::{MarkItem, Scenegraph};
use animflow::{encode_frame, hit_test, render_svg, Chart, DataTable, Event};

fn circle(key: &str, x: f64, y: f64, size: f64) -> MarkItem {
    MarkItem {
        kind: MarkType::Circle,
        key: key.into(),
        x,
        y,
        x2: None,
        y2: None,
        size,
        fill: "#4c78a8".into(),
        stroke: "none".into(),
        opacity: 1.0,
        text: None,
        tooltip: None,
        status: None,
        group: None,
    }
}

fn scene(items: Vec<MarkItem>) -> Scenegraph {
    Scenegraph {
        width: 100.0,
        height: 100.0,
        mark: MarkType::Circle,
        items,
        axes: Vec::new(),
        legend: Vec::new(),
        widgets: Vec::new(),
        anim_values: BTreeMap::new(),
        selections: BTreeMap::new(),
        warnings: Vec::new(),
    }
}

fn chart(name: &str) -> Chart {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
        .join("spec.json");
    Chart::load(&path, None).unwrap()
}

#[test]
fn circle_radius_comes_from_area() {
    let svg = render_svg(&scene(vec![circle("0", 10.0, 20.0, 64.0 * std::f64::consts::PI)]));
    assert_eq!(svg.matches("<circle").count(), 1);
    assert!(svg.contains(r#"<circle cx="10.000" cy="20.000" r="8.000""#), "{svg}");
}

#[test]
fn empty_scene_has_no_marks() {
    let svg = render_svg(&scene(Vec::new()));
    assert!(!svg.contains("<circle"));
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn hit_test_geometry() {
    let sg = scene(vec![circle("a", 50.0, 50.0, 400.0), circle("b", 55.0, 50.0, 400.0)]);
    assert_eq!(hit_test(&sg, 53.0, 50.0).as_deref(), Some("b"));
    assert_eq!(hit_test(&sg, 40.0, 50.0).as_deref(), Some("a"));
    assert_eq!(hit_test(&sg, 5.0, 5.0), None);
}

#[test]
fn first_gapminder_frame_shows_1955_rows() {
    let c = chart("gapminder");
    let st = c.start().unwrap();
    let sg = encode_frame(&st);
    let expected: Vec<String> = (0..c.data.len())
        .filter(|&r| c.data.value(r, "year").and_then(|v| v.as_f64()) == Some(1955.0))
        .map(|r| r.to_string())
        .collect();
    let keys: Vec<String> = sg.items.iter().map(|i| i.key.clone()).collect();
    assert_eq!(keys, expected);
}

#[test]
fn dunkin_colors_open_stores() {
    let c = chart("dunkin");
    let mut st = c.start().unwrap();
    st.advance(3600.0).unwrap();
    let now = st.current_anim_value().as_f64().unwrap();
    let sg = encode_frame(&st);
    assert_eq!(sg.items.len(), c.data.len());
    for it in &sg.items {
        let row: usize = it.key.parse().unwrap();
        let open = c.data.value(row, "open").unwrap().as_f64().unwrap();
        let close = c.data.value(row, "close").unwrap().as_f64().unwrap();
        let want = if open <= now && now <= close {
            "#f58518"
        } else {
            "#bbbbbb"
        };
        assert_eq!(it.fill, want, "{}", it.tooltip.as_deref().unwrap_or(""));
    }
    assert!(sg.items.iter().any(|i| i.fill == "#f58518"));
    assert!(sg.items.iter().any(|i| i.fill == "#bbbbbb"));
}

#[test]
fn hover_highlights_one_bar() {
    let mut st = chart("static").start().unwrap();
    let sg = encode_frame(&st);
    assert!(sg.items.iter().all(|i| i.opacity == 0.7));
    let target = &sg.items[1];
    let (x, y) = (
        (target.x + target.x2.unwrap()) / 2.0,
        (target.y + target.y2.unwrap()) / 2.0,
    );
    st.inject_event(&Event::PointerMove { x, y }).unwrap();
    let sg = encode_frame(&st);
    let opaque: Vec<&str> = sg
        .items
        .iter()
        .filter(|i| i.opacity == 1.0)
        .map(|i| i.key.as_str())
        .collect();
    assert_eq!(opaque, vec![target.key.as_str()]);
    st.inject_event(&Event::PointerMove { x: -30.0, y: -30.0 }).unwrap();
    assert!(encode_frame(&st).items.iter().all(|i| i.opacity == 0.7));
}

#[test]
fn empty_frame_still_has_axes() {
    let spec = r#"{"data": {"values": [{"a": 1, "b": 2, "t": 1}]}, "mark": "circle",
        "transform": [{"filter": "a > 5"}],
        "encoding": {"x": {"field": "a", "type": "quantitative"}, "y": {"field": "b", "type": "quantitative"}}}"#;
    let c = Chart::from_text(spec, None, None).unwrap();
    let sg = encode_frame(&c.start().unwrap());
    assert!(sg.items.is_empty());
    assert_eq!(sg.axes.len(), 2);
}

#[test]
fn frames_are_pure_functions_of_state() {
    let mut st = chart("birds").start().unwrap();
    st.advance(777.0).unwrap();
    assert_eq!(render_svg(&encode_frame(&st)), render_svg(&encode_frame(&st)));
    let copy = st.clone();
    assert_eq!(encode_frame(&copy).to_document(), encode_frame(&st).to_document());
}

#[test]
fn json_rows_load() {
    let rows = serde_json::json!([{"a": 1}, {"a": 2}]);
    assert_eq!(DataTable::from_json_rows(rows.as_array().unwrap()).unwrap().len(), 2);
}
