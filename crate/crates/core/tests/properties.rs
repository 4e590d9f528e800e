use std::path::PathBuf;
use std::sync::OnceLock;

use animflow::{encode_frame, render_svg, Chart, Event, RuntimeState, Value};
use proptest::prelude::*;

fn chart(name: &'static str) -> &'static Chart {
    static CHARTS: OnceLock<Vec<(&'static str, Chart)>> = OnceLock::new();
    let charts = CHARTS.get_or_init(|| {
        [
            "gapminder",
            "gapminder_slider",
            "birds",
            "bar_race",
            "dunkin",
            "birds_cumulative",
        ]
        .into_iter()
        .map(|n| {
            let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
                .join("../../corpus")
                .join(n)
                .join("spec.json");
            (n, Chart::load(&path, None).unwrap())
        })
        .collect()
    });
    &charts.iter().find(|(n, _)| *n == name).unwrap().1
}

fn run(name: &'static str, steps: &[u32]) -> RuntimeState {
    let mut st = chart(name).start().unwrap();
    for &dt in steps {
        st.advance(dt as f64).unwrap();
    }
    st
}

fn any_spec() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["gapminder", "birds", "bar_race", "dunkin", "birds_cumulative"])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn anim_value_stays_in_domain(steps in prop::collection::vec(0u32..3000, 0..12)) {
        let st = run("gapminder", &steps);
        let v = st.current_anim_value().as_f64().unwrap();
        prop_assert!((1955.0..=2005.0).contains(&v) && (v - 1955.0) % 5.0 == 0.0);
    }

    #[test]
    fn items_respect_channel_bounds(name in any_spec(), steps in prop::collection::vec(0u32..2000, 0..8)) {
        let sg = encode_frame(&run(name, &steps));
        for it in &sg.items {
            prop_assert!((0.0..=1.0).contains(&it.opacity));
            prop_assert!(it.size >= 0.0);
            for c in [Some(it.x), Some(it.y), it.x2, it.y2].into_iter().flatten() {
                prop_assert!(c.is_finite());
                prop_assert!((-1.0..=sg.width.max(sg.height) + 1.0).contains(&c), "{c}");
            }
        }
    }

    #[test]
    fn split_steps_match_one_step(name in any_spec(), steps in prop::collection::vec(0u32..2000, 1..8)) {
        let total: u32 = steps.iter().sum();
        let a = encode_frame(&run(name, &steps));
        let b = encode_frame(&run(name, &[total]));
        prop_assert_eq!(render_svg(&a), render_svg(&b));
    }

    #[test]
    fn frames_repeat_every_cycle(name in any_spec(), t in 0u32..20_000, k in 1u32..4) {
        let period = chart(name).start().unwrap().cycle_ms().unwrap();
        let later = t as f64 + k as f64 * period;
        prop_assume!(later.fract() == 0.0);
        let a = run(name, &[t]);
        let b = run(name, &[later as u32]);
        prop_assert_eq!(encode_frame(&a).to_document(), encode_frame(&b).to_document());
    }

    #[test]
    fn gate_holds_under_any_steps(before in 0u32..5000, steps in prop::collection::vec(0u32..5000, 1..20)) {
        let mut st = run("birds", &[before]);
        st.inject_event(&Event::widget_set("is_playing", false)).unwrap();
        let held = st.current_anim_value();
        for dt in steps {
            st.advance(dt as f64).unwrap();
            prop_assert_eq!(&st.current_anim_value(), &held);
        }
    }

    #[test]
    fn linear_x_preserves_order(steps in prop::collection::vec(0u32..3000, 0..6)) {
        let st = run("gapminder", &steps);
        let sg = encode_frame(&st);
        let rendered = st.dataset("data:rendered").unwrap();
        let xs: Vec<f64> = rendered.values("fertility").filter_map(Value::as_f64).collect();
        prop_assert_eq!(xs.len(), sg.items.len());
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                if xs[i] < xs[j] {
                    prop_assert!(sg.items[i].x < sg.items[j].x);
                }
            }
        }
    }

    #[test]
    fn scrub_matches_timer_for_any_keyframe(i in 0usize..11) {
        let year = 1955.0 + 5.0 * i as f64;
        let mut a = chart("gapminder_slider").start().unwrap();
        a.inject_event(&Event::widget_set("current_frame", year)).unwrap();
        let b = {
            let mut s = chart("gapminder_slider").start().unwrap();
            s.advance(500.0 * i as f64).unwrap();
            s
        };
        prop_assert_eq!(render_svg(&encode_frame(&a)), render_svg(&encode_frame(&b)));
    }
}
