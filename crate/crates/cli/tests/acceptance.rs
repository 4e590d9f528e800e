//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use animflow::runtime::ROW_ID;
use animflow::{encode_frame, render_svg, Chart, DataTable, Easing, Event, RuntimeState, Value};
use animflow_cli::render::{FrameFormat, RenderConfig};
use animflow_cli::{cmd_compile, cmd_render};
use serde_json::{json, Value as Json};

type Outcome = Result<String, String>;
type Check = Box<dyn Fn() -> Outcome>;

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn spec_path(name: &str) -> PathBuf {
    corpus().join(name).join("spec.json")
}

fn load(name: &str) -> Chart {
    Chart::load(&spec_path(name), None).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn start(name: &str) -> RuntimeState {
    load(name).start().expect("runtime starts")
}

fn svg(st: &RuntimeState) -> String {
    render_svg(&encode_frame(st))
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn close(actual: f64, expected: f64, rel: f64) -> bool {
    (actual - expected).abs() <= rel * expected.abs().max(f64::MIN_POSITIVE)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Distinct numeric values of `field`, ascending.
fn domain(t: &DataTable, field: &str) -> Vec<f64> {
    let mut v: Vec<f64> = t.values(field).map(num).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn source_row<'a>(t: &'a DataTable, row_id: &str) -> &'a [Value] {
    let ri = t.column_index(ROW_ID).expect("row id column");
    t.rows()
        .iter()
        .find(|r| r[ri].label() == row_id)
        .unwrap_or_else(|| panic!("no row {row_id}"))
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let chart = load("gapminder");
    let mut got = Vec::new();
    for clock in [0.0, 500.0, 1000.0] {
        let mut st = chart.start().map_err(|e| e.to_string())?;
        st.advance(clock).map_err(|e| e.to_string())?;
        got.push(st.current_anim_value());
    }
    let want: Vec<Value> = [1955.0, 1960.0, 1965.0].into_iter().map(Value::Number).collect();
    ensure(got == want, || format!("anim_value {got:?}, expected {want:?}"))?;
    let ms = t0.elapsed().as_secs_f64() * 1000.0;
    ensure(ms < 1000.0, || format!("took {ms:.0} ms"))?;
    Ok(format!("1955/1960/1965 at 0/500/1000 ms in {ms:.1} ms"))
}

/// Converts every JSON number to a float so `1955` and `1955.0` compare equal.
fn floats(v: Json) -> Json {
    match v {
        Json::Number(n) => json!(n.as_f64().expect("finite")),
        Json::Array(a) => Json::Array(a.into_iter().map(floats).collect()),
        Json::Object(o) => Json::Object(o.into_iter().map(|(k, v)| (k, floats(v))).collect()),
        other => other,
    }
}

fn criterion_2() -> Outcome {
    let mut out = Vec::new();
    cmd_compile(&spec_path("gapminder"), None, None, true, &mut out).map_err(|f| f.message)?;
    let got: Json = serde_json::from_slice(&out).map_err(|e| e.to_string())?;
    let expected = json!({
        "data": {"url": "gapminder.csv"},
        "mark": {"type": "circle", "fill": "#4c78a8", "stroke": "none", "fontSize": 11},
        "encoding": {
            "x": {"field": "fertility", "type": "quantitative"},
            "y": {"field": "life_expect", "type": "quantitative"},
            "color": {"field": "country", "type": "nominal"},
            "size": {"field": "pop", "type": "quantitative"},
            "time": {
                "field": "year",
                "type": "quantitative",
                "key": "country",
                "scale": {
                    "type": "band",
                    "domain": [1955, 1960, 1965, 1970, 1975, 1980, 1985, 1990, 1995, 2000, 2005],
                    "range": {"step": 500}
                },
                "rescale": false
            }
        },
        "params": [{
            "name": "current_frame",
            "select": {
                "type": "point",
                "on": {"type": "timer"},
                "predicate": [{"field": "year", "eq": "anim_value"}],
                "pause": [],
                "easing": "linear"
            }
        }],
        "transform": [{"filter": {"param": "current_frame"}}],
        "width": 400,
        "height": 300
    });
    let (got, expected) = (floats(got), floats(expected));
    ensure(got == expected, || {
        format!(
            "normalized spec differs:\n{}",
            serde_json::to_string_pretty(&got).unwrap_or_default()
        )
    })?;
    Ok("current_frame, eq predicate, key=country, step 500 ms".into())
}

fn corpus_names() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(corpus())
        .expect("corpus dir")
        .filter_map(|e| e.ok())
        .filter(|e| e.path().join("spec.json").exists())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

fn criterion_3() -> Outcome {
    let mut checked = Vec::new();
    for name in corpus_names() {
        let chart = load(&name);
        if chart.graph.nodes.keys().any(|k| k.starts_with("pause:")) {
            continue;
        }
        let period = chart.start().map_err(|e| e.to_string())?.cycle_ms().unwrap_or(1000.0);
        for k in 0..20u32 {
            // Whole milliseconds keep t and t + T exactly representable.
            let t = (period * k as f64 / 20.0).floor() + 7.0;
            let mut a = chart.start().map_err(|e| e.to_string())?;
            let mut b = chart.start().map_err(|e| e.to_string())?;
            a.advance(t).map_err(|e| e.to_string())?;
            b.advance(t + period).map_err(|e| e.to_string())?;
            let (fa, fb) = (encode_frame(&a), encode_frame(&b));
            ensure(render_svg(&fa) == render_svg(&fb), || {
                format!("{name}: svg differs at t={t}")
            })?;
            ensure(fa.to_document() == fb.to_document(), || {
                format!("{name}: frame doc differs at t={t}")
            })?;
        }
        checked.push(name);
    }
    Ok(format!("20 samples each: {}", checked.join(", ")))
}

fn without_key(name: &str) -> Chart {
    let path = spec_path(name);
    let mut spec: Json = serde_json::from_str(&std::fs::read_to_string(&path).expect("spec")).expect("json");
    spec["encoding"]["time"]["key"] = Json::Null;
    Chart::from_text(&spec.to_string(), path.parent(), None).expect("keyless chart")
}

fn criterion_4() -> Outcome {
    let keyed = load("gapminder");
    let pure = without_key("gapminder");
    let years = domain(&keyed.data, "year");
    for i in 0..years.len() {
        let t = i as f64 * 500.0;
        let mut a = keyed.start().map_err(|e| e.to_string())?;
        let mut b = pure.start().map_err(|e| e.to_string())?;
        a.advance(t).map_err(|e| e.to_string())?;
        b.advance(t).map_err(|e| e.to_string())?;
        ensure(svg(&a) == svg(&b), || {
            format!("boundary frame at {t} ms differs from keyframe filter")
        })?;
    }

    let fields = ["fertility", "life_expect", "pop"];
    let mut checks = 0;
    for i in 0..years.len() - 1 {
        let mut st = keyed.start().map_err(|e| e.to_string())?;
        st.advance(i as f64 * 500.0 + 250.0).map_err(|e| e.to_string())?;
        let source = st.source().clone();
        let find = |country: &Value, year: f64| {
            source
                .rows()
                .iter()
                .enumerate()
                .find(|(r, _)| {
                    source.value(*r, "country") == Some(country) && source.value(*r, "year").map(num) == Some(year)
                })
                .map(|(r, _)| r)
        };
        let rendered = st.dataset("data:rendered").ok_or("no rendered dataset")?;
        ensure(rendered.len() == 3, || {
            format!("{} rows at midpoint {i}", rendered.len())
        })?;
        for r in 0..rendered.len() {
            let country = rendered.value(r, "country").ok_or("no country")?;
            let a = find(country, years[i]).ok_or("no start row")?;
            let b = find(country, years[i + 1]).ok_or("no end row")?;
            for f in fields {
                let lo = num(source.value(a, f).ok_or("missing")?);
                let hi = num(source.value(b, f).ok_or("missing")?);
                let got = num(rendered.value(r, f).ok_or("missing")?);
                let mean = (lo + hi) / 2.0;
                ensure(close(got, mean, 1e-9), || {
                    format!("{f} of {country:?} at midpoint {i}: {got} vs {mean}")
                })?;
                checks += 1;
            }
        }

        // Positional pixels are linear in data under a fixed domain.
        let pixels = |st: &RuntimeState| -> BTreeMap<String, (f64, f64)> {
            let sg = encode_frame(st);
            sg.items
                .iter()
                .map(|it| {
                    let row = source_row(st.source(), &it.key);
                    let c = source.column_index("country").expect("country");
                    (row[c].label(), (it.x, it.y))
                })
                .collect()
        };
        let mut s0 = keyed.start().map_err(|e| e.to_string())?;
        let mut s1 = keyed.start().map_err(|e| e.to_string())?;
        s0.advance(i as f64 * 500.0).map_err(|e| e.to_string())?;
        s1.advance((i + 1) as f64 * 500.0).map_err(|e| e.to_string())?;
        let (p0, p1, pm) = (pixels(&s0), pixels(&s1), pixels(&st));
        for (c, (x, y)) in &pm {
            let (x0, y0) = p0[c];
            let (x1, y1) = p1[c];
            ensure(
                close(*x, (x0 + x1) / 2.0, 1e-9) && close(*y, (y0 + y1) / 2.0, 1e-9),
                || format!("pixel position of {c} at midpoint {i} is not the mean"),
            )?;
            checks += 2;
        }
    }
    Ok(format!(
        "{} boundary frames identical, {checks} midpoint values",
        years.len()
    ))
}

/// Time at which the anim_value first returns to its initial value,
/// stepping in whole milliseconds.
fn measured_cycle(st: &mut RuntimeState, limit: u32) -> Result<Option<u32>, String> {
    let first = st.current_anim_value();
    let mut left = false;
    for t in 1..=limit {
        st.advance(1.0).map_err(|e| e.to_string())?;
        let v = st.current_anim_value();
        if v != first {
            left = true;
        } else if left {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

fn criterion_5() -> Outcome {
    let plain = measured_cycle(&mut start("gapminder"), 20_000)?.ok_or("gapminder never wraps")?;
    let paused = measured_cycle(&mut start("gapminder_pause"), 20_000)?.ok_or("paused gapminder never wraps")?;
    ensure(paused - plain == 2000, || format!("cycle {plain} ms vs {paused} ms"))?;

    // 1995 is keyframe 8, so its hold begins 8 · 500 ms into the cycle.
    let chart = load("gapminder_pause");
    let mut samples = Vec::new();
    for k in 0..10 {
        let t = 4000.0 + 100.0 + 200.0 * k as f64;
        let mut st = chart.start().map_err(|e| e.to_string())?;
        st.advance(t).map_err(|e| e.to_string())?;
        samples.push(st.current_anim_value());
    }
    ensure(samples.iter().all(|v| *v == Value::Number(1995.0)), || {
        format!("samples {samples:?}")
    })?;
    Ok(format!("cycle {plain} ms -> {paused} ms, 10 samples hold 1995"))
}

fn criterion_6() -> Outcome {
    for e in Easing::ALL {
        let (f0, f1) = (e.apply(0.0), e.apply(1.0));
        ensure(f0.abs() <= 1e-9 && (f1 - 1.0).abs() <= 1e-9, || {
            format!("{}: f(0)={f0}, f(1)={f1}", e.name())
        })?;
    }
    for i in 0..1000 {
        let t = i as f64 / 999.0;
        let y = Easing::Linear.apply(t);
        ensure(y == t, || format!("linear({t}) = {y}"))?;
    }
    Ok(format!("{} easings, 1000 linear samples", Easing::ALL.len()))
}

fn criterion_7() -> Outcome {
    let chart = load("gapminder_slider");
    let years = domain(&chart.data, "year");
    for (i, &v) in years.iter().enumerate() {
        let mut scrubbed = chart.start().map_err(|e| e.to_string())?;
        scrubbed
            .inject_event(&Event::widget_set("current_frame", v))
            .map_err(|e| e.to_string())?;
        let mut timed = chart.start().map_err(|e| e.to_string())?;
        timed.advance(i as f64 * 500.0).map_err(|e| e.to_string())?;
        ensure(svg(&scrubbed) == svg(&timed), || format!("frames differ at {v}"))?;
    }
    Ok(format!("{} domain values", years.len()))
}

fn rendered_rows(st: &RuntimeState) -> BTreeSet<String> {
    st.dataset("data:rendered")
        .map(|t| t.values(ROW_ID).map(Value::label).collect())
        .unwrap_or_default()
}

fn criterion_8() -> Outcome {
    let window = load("birds");
    let cumulative = load("birds_cumulative");
    let days = domain(&window.data, "day");
    ensure(window.data.len() == 366, || format!("{} rows", window.data.len()))?;
    for k in 0..50 {
        let idx = (k * 37 + 3) % days.len();
        let v = days[idx];

        let mut st = window.start().map_err(|e| e.to_string())?;
        st.inject_event(&Event::widget_set("trail", v))
            .map_err(|e| e.to_string())?;
        ensure(st.current_anim_value() == Value::Number(v), || {
            format!("trail scrub to {v}")
        })?;
        let src = st.source();
        let day = src.column_index("day").ok_or("no day")?;
        let ri = src.column_index(ROW_ID).ok_or("no row id")?;
        let mut oracle = BTreeSet::new();
        for row in src.rows() {
            let d = num(&row[day]);
            let want = v - 6.0 <= d && d <= v;
            ensure(st.evaluate_selection("trail", src, row) == want, || {
                format!("trail row day {d} at {v}")
            })?;
            if want {
                oracle.insert(row[ri].label());
            }
        }
        ensure(rendered_rows(&st) == oracle, || format!("trail rows at {v}"))?;

        let mut st = cumulative.start().map_err(|e| e.to_string())?;
        st.advance(idx as f64 * 25.0).map_err(|e| e.to_string())?;
        ensure(st.current_anim_value() == Value::Number(v), || {
            format!("cumulative clock at {v}")
        })?;
        let src = st.source();
        let mut oracle = BTreeSet::new();
        for row in src.rows() {
            let want = num(&row[day]) <= v;
            ensure(st.evaluate_selection("seen", src, row) == want, || {
                format!("seen row at {v}")
            })?;
            if want {
                oracle.insert(row[ri].label());
            }
        }
        ensure(rendered_rows(&st) == oracle, || format!("cumulative rows at {v}"))?;
    }
    Ok(format!(
        "50 anim_values over {} rows, window and cumulative",
        window.data.len()
    ))
}

/// Extent of the bar-race frame at `t` ms, built from the raw table: shared
/// names interpolate, exiting names hold, entering names show their target
/// once the transition has begun. Zero is included for the measure axis.
fn bar_race_extent(data: &DataTable, t: f64) -> (f64, f64) {
    let years = domain(data, "year");
    let i = ((t / 1000.0).floor() as usize).min(years.len() - 1);
    let last = i + 1 >= years.len();
    let u = if last { 0.0 } else { (t - i as f64 * 1000.0) / 1000.0 };
    let at = |year: f64| -> BTreeMap<String, f64> {
        (0..data.len())
            .filter(|&r| data.value(r, "year").map(num) == Some(year))
            .map(|r| {
                (
                    data.value(r, "name").expect("name").label(),
                    num(data.value(r, "value").expect("value")),
                )
            })
            .collect()
    };
    let cur = at(years[i]);
    let next = if last { cur.clone() } else { at(years[i + 1]) };
    let mut values = vec![0.0];
    for (name, a) in &cur {
        values.push(match next.get(name) {
            Some(b) => a + u * (b - a),
            None => *a,
        });
    }
    if u > 0.0 {
        values.extend(next.iter().filter(|(n, _)| !cur.contains_key(*n)).map(|(_, b)| *b));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn criterion_9() -> Outcome {
    let chart = load("bar_race");
    let mut st = chart.start().map_err(|e| e.to_string())?;
    let period = st.cycle_ms().ok_or("no clock")?;
    let steps = (period / 25.0) as usize;
    let mut widths = BTreeSet::new();
    for s in 0..steps {
        if s > 0 {
            st.advance(25.0).map_err(|e| e.to_string())?;
        }
        let t = s as f64 * 25.0;
        let (lo, hi) = bar_race_extent(&chart.data, t);
        let (dlo, dhi) = st.scale("scale:x").and_then(|s| s.extent()).ok_or("no x extent")?;
        ensure(close(dlo, lo, 1e-9) && close(dhi, hi, 1e-9), || {
            format!("t={t}: domain [{dlo}, {dhi}], oracle [{lo}, {hi}]")
        })?;
        widths.insert(format!("{dhi:.6}"));
    }
    ensure(widths.len() > 1, || "rescaled domain never changed".into())?;

    let fixed = load("bar_race_fixed");
    let values: Vec<f64> = fixed.data.values("value").map(num).collect();
    let full = (
        values.iter().copied().fold(0.0, f64::min),
        values.iter().copied().fold(0.0, f64::max),
    );
    let mut st = fixed.start().map_err(|e| e.to_string())?;
    for s in 0..steps {
        if s > 0 {
            st.advance(25.0).map_err(|e| e.to_string())?;
        }
        let d = st.scale("scale:x").and_then(|s| s.extent()).ok_or("no x extent")?;
        ensure(d == full, || {
            format!("fixed domain {d:?} at step {s}, expected {full:?}")
        })?;
    }
    Ok(format!(
        "{steps} frames rescaled ({} distinct domains), fixed domain {full:?}",
        widths.len()
    ))
}

fn criterion_10() -> Outcome {
    let mut report = Vec::new();
    for (name, widget) in [("birds", "is_playing"), ("gapminder_slider", "is_playing")] {
        let mut st = start(name);
        st.advance(1234.0).map_err(|e| e.to_string())?;
        st.inject_event(&Event::widget_set(widget, false))
            .map_err(|e| e.to_string())?;
        let before = (st.current_anim_value(), st.raw_clock());
        for _ in 0..100 {
            st.advance(16.0).map_err(|e| e.to_string())?;
            let now = (st.current_anim_value(), st.raw_clock());
            ensure(now == before, || format!("{name}: moved from {before:?} to {now:?}"))?;
        }
        report.push(format!("{name} held {:?}", before.0));
    }
    Ok(report.join(", "))
}

fn render_corpus(root: &Path) -> Result<BTreeMap<String, String>, String> {
    let cfg = RenderConfig {
        format: FrameFormat::Svg,
        ..RenderConfig::default()
    };
    let mut manifests = BTreeMap::new();
    for name in corpus_names() {
        let out = root.join(&name);
        cmd_render(&spec_path(&name), None, &cfg, &out).map_err(|f| format!("{name}: {}", f.message))?;
        let text = std::fs::read_to_string(out.join("manifest.json")).map_err(|e| e.to_string())?;
        manifests.insert(name, text);
    }
    Ok(manifests)
}

fn criterion_11(suite_start: Instant) -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = render_corpus(a.path())?;
    let second = render_corpus(b.path())?;
    for (name, m) in &first {
        ensure(second.get(name) == Some(m), || format!("{name}: manifests differ"))?;
    }
    let frames: usize = first
        .values()
        .map(|m| {
            serde_json::from_str::<Json>(m)
                .ok()
                .and_then(|j| j["frames"].as_array().map(Vec::len))
                .unwrap_or(0)
        })
        .sum();
    let secs = suite_start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("suite took {secs:.1} s"))?;
    Ok(format!(
        "{} specs, {frames} frames per run, suite {secs:.1} s",
        first.len()
    ))
}

fn main() {
    let suite_start = Instant::now();
    let criteria: Vec<(&str, Check)> = vec![
        (
            "default time scale maps 0/500/1000 ms to 1955/1960/1965",
            Box::new(criterion_1),
        ),
        ("normalized gapminder matches the elaboration", Box::new(criterion_2)),
        ("loop periodicity", Box::new(criterion_3)),
        ("tween boundaries and midpoints", Box::new(criterion_4)),
        ("pause conservation", Box::new(criterion_5)),
        ("easing contracts", Box::new(criterion_6)),
        ("slider frame equals timer frame", Box::new(criterion_7)),
        ("predicate oracle", Box::new(criterion_8)),
        ("rescale domains", Box::new(criterion_9)),
        ("gated clock holds", Box::new(criterion_10)),
        (
            "deterministic corpus render",
            Box::new(move || criterion_11(suite_start)),
        ),
    ];
    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        let outcome =
            std::panic::catch_unwind(std::panic::AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {title}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {title}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
