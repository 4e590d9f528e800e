use std::path::PathBuf;

use animflow::{encode_frame, Chart, Event, RuntimeError, RuntimeState, Value};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
        .join("spec.json")
}

fn start(name: &str) -> RuntimeState {
    Chart::load(&corpus(name), None).unwrap().start().unwrap()
}

/// Gapminder with its time encoding and selection replaced.
fn gapminder_with(time: serde_json::Value, select: serde_json::Value) -> RuntimeState {
    let mut spec: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(corpus("gapminder")).unwrap()).unwrap();
    spec["encoding"]["time"] = time;
    spec["params"] = serde_json::json!([{"name": "current_frame", "select": select}]);
    let dir = corpus("gapminder");
    Chart::from_text(&spec.to_string(), dir.parent(), None)
        .unwrap()
        .start()
        .unwrap()
}

fn at(st: &mut RuntimeState, dt: f64) -> Value {
    st.advance(dt).unwrap();
    st.current_anim_value()
}

#[test]
fn rejects_bad_steps() {
    let mut st = start("gapminder");
    for dt in [-1.0, f64::NAN, f64::INFINITY] {
        assert!(matches!(st.advance(dt), Err(RuntimeError::NegativeStep(_))));
    }
    assert_eq!(st.current_anim_value(), Value::Number(1955.0));
}

#[test]
fn loops_after_last_keyframe_holds_a_full_step() {
    let mut st = start("gapminder");
    assert_eq!(at(&mut st, 5499.0), Value::Number(2005.0));
    assert_eq!(at(&mut st, 1.0), Value::Number(1955.0));
    assert_eq!(st.cycle_ms(), Some(5500.0));
}

#[test]
fn pauses_add_their_durations() {
    let select = serde_json::json!({
        "type": "point",
        "on": "timer",
        "pause": [{"value": 1960, "duration": 300}, {"value": 2005, "duration": 1200}]
    });
    let mut st = gapminder_with(serde_json::json!({"field": "year"}), select);
    assert_eq!(st.cycle_ms(), Some(5500.0 + 1500.0));
    assert_eq!(at(&mut st, 500.0), Value::Number(1960.0));
    assert_eq!(at(&mut st, 700.0), Value::Number(1960.0));
    assert_eq!(at(&mut st, 100.0), Value::Number(1965.0));
}

#[test]
fn easing_bends_the_clock_but_not_pause_plateaus() {
    let select = serde_json::json!({
        "type": "point",
        "on": "timer",
        "easing": "cubic-in-out",
        "pause": [{"value": 1980, "duration": 1000}]
    });
    let mut st = gapminder_with(serde_json::json!({"field": "year"}), select);
    let period = st.cycle_ms().unwrap();
    assert_eq!(period, 6500.0);
    let mut seen = Vec::new();
    for _ in 0..65 {
        seen.push(at(&mut st, 100.0).as_f64().unwrap());
    }
    assert!(seen.windows(2).all(|w| w[0] <= w[1] || w[1] == 1955.0));
    // Slow start: the first keyframe holds longer than its linear 500 ms.
    assert_eq!(seen[5], 1955.0);
    let plateau = seen.iter().filter(|&&v| v == 1980.0).count();
    assert!(plateau >= 10, "{plateau}");
}

#[test]
fn slider_snaps_to_domain_and_pauses() {
    let mut st = start("gapminder_slider");
    st.inject_event(&Event::widget_set("current_frame", 1997.0)).unwrap();
    assert_eq!(st.current_anim_value(), Value::Number(1995.0));
    assert_eq!(st.raw_clock(), Some(4000.0));
    assert_eq!(at(&mut st, 2000.0), Value::Number(1995.0));
    st.inject_event(&Event::widget_set("is_playing", true)).unwrap();
    assert_eq!(at(&mut st, 500.0), Value::Number(2000.0));
    assert!(st.inject_event(&Event::widget_set("missing", 1.0)).is_err());
}

#[test]
fn continuous_slider_clamps() {
    let mut st = start("dunkin");
    let max = st.widgets().into_iter().find(|w| w.id == "now").unwrap().max.unwrap();
    st.inject_event(&Event::widget_set("now", max + 1.0e9)).unwrap();
    let v = st.current_anim_value().as_f64().unwrap();
    assert!((v - max).abs() <= 1e-9 * max, "{v} vs {max}");
    assert!(st.raw_clock().unwrap() < 12000.0);
    st.inject_event(&Event::widget_set("now", 0.0)).unwrap();
    assert_eq!(st.raw_clock(), Some(0.0));
}

#[test]
fn continuous_clock_interpolates() {
    let mut st = start("dunkin");
    let lo = st.current_anim_value().as_f64().unwrap();
    let mid = at(&mut st, 6000.0).as_f64().unwrap();
    let span = 23.5 * 3_600_000.0;
    assert!((mid - (lo + span / 2.0)).abs() < 1e-6);
}

#[test]
fn click_selects_and_shift_click_toggles() {
    let mut st = start("birds");
    st.advance(400.0).unwrap();
    let sg = encode_frame(&st);
    let a = sg.items[0].clone();
    let b = sg
        .items
        .iter()
        .find(|i| i.tooltip != a.tooltip && (i.x - a.x).hypot(i.y - a.y) > 20.0)
        .unwrap()
        .clone();
    st.inject_event(&Event::click(a.x, a.y)).unwrap();
    assert_eq!(st.store("selection:highlight").unwrap().len(), 1);
    st.inject_event(&Event::click(b.x, b.y)).unwrap();
    let key = Value::from(b.tooltip.as_deref().unwrap()).canonical_key();
    assert_eq!(
        st.store("selection:highlight").unwrap().iter().collect::<Vec<_>>(),
        vec![&key]
    );
    st.inject_event(&Event::shift_click(a.x, a.y)).unwrap();
    assert_eq!(st.store("selection:highlight").unwrap().len(), 2);
    st.inject_event(&Event::shift_click(a.x, a.y)).unwrap();
    assert_eq!(st.store("selection:highlight").unwrap().len(), 1);

    // Highlighted birds take their species color, the rest stay grey.
    let sg = encode_frame(&st);
    for it in &sg.items {
        assert_eq!(it.fill == "#bbbbbb", it.tooltip != b.tooltip, "{:?}", it.tooltip);
    }

    st.inject_event(&Event::click(-50.0, -50.0)).unwrap();
    assert!(st.store("selection:highlight").unwrap().is_empty());
}

#[test]
fn static_chart_has_no_clock() {
    let mut st = start("static");
    assert_eq!(st.cycle_ms(), None);
    assert_eq!(st.current_anim_value(), Value::Null);
    let before = encode_frame(&st).to_document();
    st.advance(1000.0).unwrap();
    assert_eq!(encode_frame(&st).to_document(), before);
    assert!(st.graph().signals().all(|(id, _)| !id.contains("clock")));
}

fn rescale_chart(values: serde_json::Value) -> RuntimeState {
    let spec = serde_json::json!({
        "data": {"values": values},
        "mark": "bar",
        "encoding": {
            "x": {"field": "v", "type": "quantitative", "scale": {"zero": false}},
            "y": {"field": "n", "type": "nominal"},
            "time": {"field": "t", "key": null, "rescale": true}
        }
    });
    Chart::from_text(&spec.to_string(), None, None)
        .unwrap()
        .start()
        .unwrap()
}

#[test]
fn single_row_rescale_pads_extent() {
    let mut st = rescale_chart(serde_json::json!([
        {"n": "a", "v": 40, "t": 1},
        {"n": "a", "v": 10, "t": 2},
        {"n": "b", "v": 30, "t": 2}
    ]));
    assert_eq!(st.scale("scale:x").unwrap().extent(), Some((38.0, 42.0)));
    st.advance(500.0).unwrap();
    assert_eq!(st.scale("scale:x").unwrap().extent(), Some((10.0, 30.0)));
}
