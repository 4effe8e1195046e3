//! Property tests for the trace algebra, generators, and contact structure.

use proptest::prelude::*;

use manetlab::config::{ModelKind, ScenarioConfig};
use manetlab::contact::{build_timeline, sample_adjacency};
use manetlab::geom::Vec2;
use manetlab::metrics::compute_all;
use manetlab::models::generate;
use manetlab::trace::{NodeTrace, Scenario, Waypoint};

fn arb_trace() -> impl Strategy<Value = NodeTrace> {
    prop::collection::vec(((0.1f64..30.0), (0.0f64..1000.0), (0.0f64..1000.0)), 1..12).prop_map(
        |steps| {
            let mut t = 0.0;
            let mut wps = vec![Waypoint::new(0.0, Vec2::new(steps[0].1, steps[0].2))];
            for (dt, x, y) in steps {
                t += dt;
                wps.push(Waypoint::new(t, Vec2::new(x, y)));
            }
            NodeTrace::new(0, wps)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Within one segment, displacement equals velocity times elapsed time.
    #[test]
    fn displacement_matches_velocity_within_segment(
        trace in arb_trace(),
        seg_frac in 0.0f64..1.0,
        a_frac in 0.0f64..1.0,
        b_frac in 0.0f64..1.0,
    ) {
        let n = trace.waypoints.len();
        prop_assume!(n >= 2);
        let seg = ((seg_frac * (n - 1) as f64) as usize).min(n - 2);
        let (t0, t1) = (trace.waypoints[seg].time, trace.waypoints[seg + 1].time);
        let (lo, hi) = (a_frac.min(b_frac), a_frac.max(b_frac));
        let ta = t0 + lo * (t1 - t0);
        let tb = t0 + hi * (t1 - t0);
        prop_assume!(tb > ta);

        let moved = trace
            .position_at(tb)
            .unwrap()
            .distance(trace.position_at(ta).unwrap());
        let expect = trace.velocity_at(ta).unwrap().norm() * (tb - ta);
        prop_assert!((moved - expect).abs() <= 1e-9 * expect.max(1.0));
    }

    /// position_at is continuous: small time steps move the point by at most
    /// the segment speed (plus slack for crossing a waypoint boundary).
    #[test]
    fn position_is_continuous(trace in arb_trace(), t in 0.0f64..300.0) {
        let eps = 1e-6;
        let here = trace.position_at(t).unwrap();
        let there = trace.position_at(t + eps).unwrap();
        let max_speed = trace
            .waypoints
            .windows(2)
            .map(|w| w[0].position.distance(w[1].position) / (w[1].time - w[0].time))
            .fold(0.0f64, f64::max);
        prop_assert!(here.distance(there) <= max_speed * eps + 1e-9);
    }
}

fn arb_config() -> impl Strategy<Value = ScenarioConfig> {
    (
        prop::sample::select(ModelKind::ALL.to_vec()),
        2usize..14,
        2usize..5,
        1.0f64..20.0,
        0.0f64..8.0,
        any::<u64>(),
    )
        .prop_map(|(model, node_count, group_size, max_speed, max_pause, seed)| {
            ScenarioConfig {
                model,
                node_count,
                group_size: group_size.min(node_count),
                min_speed: 0.5f64.min(max_speed),
                max_speed,
                max_pause,
                duration: 45.0,
                seed,
                ..Default::default()
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Every generator yields a structurally valid scenario that respects
    /// the speed bound, for arbitrary configurations and seeds.
    #[test]
    fn generators_always_validate(config in arb_config()) {
        let scenario = generate(&config).unwrap();
        prop_assert_eq!(scenario.node_count(), config.node_count);
        let report = manetlab::validate(&scenario, Some(config.max_speed));
        prop_assert!(
            report.is_valid(),
            "model {} seed {}: {:?}",
            config.model,
            config.seed,
            &report.violations[..report.violations.len().min(3)]
        );
        for trace in &scenario.traces {
            prop_assert!(trace.last_time() >= config.duration);
        }
    }

    /// Same config, same seed: structurally identical output.
    #[test]
    fn generation_is_deterministic(config in arb_config()) {
        let a = generate(&config).unwrap();
        let b = generate(&config).unwrap();
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Relabeling nodes permutes the timeline without changing its content.
    #[test]
    fn timeline_invariant_under_relabeling(seed in any::<u64>()) {
        let config = ScenarioConfig {
            node_count: 8,
            duration: 30.0,
            seed,
            ..Default::default()
        };
        let scenario = generate(&config).unwrap();
        let timeline = build_timeline(&scenario, 75.0, 1.0).unwrap();

        // Reverse the node order.
        let n = scenario.node_count();
        let relabel = |i: usize| n - 1 - i;
        let mut reversed = scenario.clone();
        reversed.traces.reverse();
        for (idx, tr) in reversed.traces.iter_mut().enumerate() {
            tr.node_id = idx;
        }
        let relabeled = build_timeline(&reversed, 75.0, 1.0).unwrap();

        for i in 0..n {
            for j in i + 1..n {
                prop_assert_eq!(
                    timeline.intervals_for(i, j),
                    relabeled.intervals_for(relabel(i), relabel(j)),
                    "pair ({}, {})", i, j
                );
            }
        }
    }

    /// Total up time per pair never exceeds the observation window, and the
    /// timeline agrees with instantaneous adjacency on the grid.
    #[test]
    fn timeline_consistency(seed in any::<u64>()) {
        let config = ScenarioConfig {
            node_count: 6,
            duration: 25.0,
            seed,
            ..Default::default()
        };
        let scenario = generate(&config).unwrap();
        let timeline = build_timeline(&scenario, 75.0, 1.0).unwrap();
        for (_, _, intervals) in timeline.linked_pairs() {
            let total: f64 = intervals.iter().map(|iv| iv.length()).sum();
            prop_assert!(total <= scenario.duration + 1e-9);
            for w in intervals.windows(2) {
                prop_assert!(w[0].end <= w[1].start, "intervals must be disjoint and sorted");
            }
        }
        for k in 0..timeline.sample_count {
            let snap = sample_adjacency(&scenario, k as f64, 75.0).unwrap();
            for i in 0..scenario.node_count() {
                for j in i + 1..scenario.node_count() {
                    prop_assert_eq!(snap.has_edge(i, j), timeline.is_up_at_sample(i, j, k));
                }
            }
        }
    }

    /// Metrics only depend on linked pairs: an isolated far-away node does
    /// not change RS.
    #[test]
    fn relative_speed_ignores_never_linked_pairs(seed in any::<u64>()) {
        let config = ScenarioConfig {
            node_count: 5,
            area_width: 300.0,
            area_height: 300.0,
            duration: 25.0,
            seed,
            ..Default::default()
        };
        let scenario = generate(&config).unwrap();
        let base = compute_all(&scenario, 75.0, 1.0).unwrap();

        let mut widened = Scenario {
            area_width: 5000.0,
            area_height: 5000.0,
            ..scenario.clone()
        };
        widened.traces.push(NodeTrace::stationary(
            5,
            Vec2::new(4900.0, 4900.0),
            widened.duration,
        ));
        let extended = compute_all(&widened, 75.0, 1.0).unwrap();
        prop_assert_eq!(base.avg_relative_speed, extended.avg_relative_speed);
        prop_assert_eq!(base.avg_link_duration, extended.avg_link_duration);
        prop_assert_eq!(base.total_link_changes, extended.total_link_changes);
    }
}
