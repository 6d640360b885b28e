use etconsensus::scenario::{EdgeSpec, GraphSpec, RoundPolicy, ScenarioConfig, ScheduleEntry, SigmaSpec, Sufficiency, Ties};
use etconsensus::Mode;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, Just(0.1), Just(-0.0), Just(1e-300), Just(0.999)]
}

fn graph_spec() -> impl Strategy<Value = GraphSpec> {
    (1usize..6).prop_flat_map(|n| {
        (
            Just(n),
            any::<bool>(),
            prop::collection::vec((1..=n, 1..=n, 0.01..10.0f64).prop_map(|(from, to, weight)| EdgeSpec { from, to, weight }), 0..6),
        )
            .prop_map(|(n, undirected, edges)| GraphSpec { n, undirected, edges })
    })
}

fn scenario() -> impl Strategy<Value = ScenarioConfig> {
    let head = (
        prop::option::of("[a-z][a-z0-9_-]{0,8}"),
        prop_oneof![Just(Mode::EventDriven), Just(Mode::PeriodicEvent), Just(Mode::PeriodicLaplacian)],
        0.1..1e3f64,
        prop::collection::vec(finite(), 1..6),
        prop_oneof![(0.01..0.99f64).prop_map(SigmaSpec::Uniform), prop::collection::vec(0.01..0.99f64, 1..6).prop_map(SigmaSpec::PerAgent)],
        prop::option::of(prop::collection::vec(1e-4..1.0f64, 1..6)),
        prop::option::of(1e-4..1.0f64),
    );
    let tail = (
        any::<bool>(),
        1e-4..1.0f64,
        1usize..1_000_000,
        prop_oneof![Just(Sufficiency::Off), Just(Sufficiency::Warn), Just(Sufficiency::Reject)],
        prop_oneof![Just(RoundPolicy::SingleRound), Just(RoundPolicy::UntilAdmissible)],
        prop_oneof![Just(Ties::Serial), Just(Ties::Simultaneous)],
        any::<bool>(),
        prop::option::of("[a-z]{1,6}(/[a-z]{1,6})?"),
        prop::option::of(0.5..10.0f64),
        prop_oneof![
            graph_spec().prop_map(|g| (Some(g), vec![])),
            prop::collection::vec((0.0..100.0f64, graph_spec()).prop_map(|(at, graph)| ScheduleEntry { at, graph }), 1..3)
                .prop_map(|s| (None, s)),
        ],
    );
    (head, tail).prop_map(
        |(
            (name, mode, horizon, x0, sigma, epsilon, h),
            (cooldown, sample_dt, zeno_ceiling, sufficiency, rounds, ties, allow_unbalanced, out, schedule_period, (graph, schedule)),
        )| ScenarioConfig {
            name,
            mode,
            horizon,
            x0,
            sigma,
            epsilon,
            h,
            cooldown,
            sample_dt,
            zeno_ceiling,
            sufficiency,
            rounds,
            ties,
            allow_unbalanced,
            out: out.map(Into::into),
            schedule_period,
            graph,
            schedule,
        },
    )
}

proptest! {
    #[test]
    fn text_round_trip(cfg in scenario()) {
        let text = cfg.to_toml_string();
        let back = ScenarioConfig::from_toml_str(&text).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn file_round_trip() {
    let src = r#"
        name = "pair"
        horizon = 3.0
        x0 = [1.0, 0.1]
        sigma = [0.5, 0.25]

        [graph]
        n = 2
        undirected = true
        edges = [{ from = 1, to = 2, weight = 0.3 }]
    "#;
    let cfg = ScenarioConfig::from_toml_str(src).unwrap();
    let path = std::env::temp_dir().join(format!("etconsensus-roundtrip-{}.scenario", std::process::id()));
    cfg.write(&path).unwrap();
    let back = ScenarioConfig::load(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(back, cfg);
    assert!(back.prepare().is_ok());
}
