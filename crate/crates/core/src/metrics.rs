//! The five protocol-independent mobility metrics: node degree, network
//! partitions, link changes, link duration, relative speed.

use crate::contact::{
    edges_at, sample_count, AdjacencySnapshot, ContactTimeline, TimelineBuilder,
};
use crate::error::Result;
use crate::geom::Vec2;
use crate::trace::{Scenario, TraceCursor};

/// Aggregated mobility metrics for one scenario.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricReport {
    /// ND: mean neighbor count over all samples and nodes.
    pub avg_node_degree: f64,
    /// NP: mean connected-component count over all samples.
    pub avg_partitions: f64,
    /// LC: total up/down transitions over all pairs.
    pub total_link_changes: u64,
    /// LC normalized by the number of unordered pairs.
    pub link_changes_per_pair: f64,
    /// LD: mean up-interval length, seconds; 0 if no link ever existed.
    pub avg_link_duration: f64,
    /// RS: mean |v_j - v_k| over linked pairs and samples, m/s.
    pub avg_relative_speed: f64,
    pub sample_interval: f64,
    pub radio_range: f64,
}

struct UnionFind {
    parent: Vec<usize>,
    components: usize,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            components: n,
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
            self.components -= 1;
        }
    }
}

fn component_count(node_count: usize, edges: &[(usize, usize)]) -> usize {
    let mut uf = UnionFind::new(node_count);
    for &(i, j) in edges {
        uf.union(i, j);
    }
    uf.components
}

/// ND over a set of snapshots: mean per-node neighbor count.
pub fn node_degree(snapshots: &[AdjacencySnapshot]) -> f64 {
    if snapshots.is_empty() {
        return 0.0;
    }
    let n = snapshots[0].node_count();
    if n == 0 {
        return 0.0;
    }
    let total: u64 = snapshots
        .iter()
        .map(|s| s.neighbors.iter().map(|l| l.len() as u64).sum::<u64>())
        .sum();
    total as f64 / (snapshots.len() as f64 * n as f64)
}

/// NP over a set of snapshots: mean connected-component count.
pub fn network_partitions(snapshots: &[AdjacencySnapshot]) -> f64 {
    if snapshots.is_empty() {
        return 0.0;
    }
    let total: u64 = snapshots
        .iter()
        .map(|s| {
            let mut uf = UnionFind::new(s.node_count());
            for (i, list) in s.neighbors.iter().enumerate() {
                for &j in list {
                    uf.union(i, j);
                }
            }
            uf.components as u64
        })
        .sum();
    total as f64 / snapshots.len() as f64
}

/// LC: total observed up/down transitions on the sampling grid, plus the
/// per-pair mean. A run starting at the first sample was never seen coming
/// up, and one extending to the final sample was never seen going down, so
/// each contributes one transition fewer.
pub fn link_changes(timeline: &ContactTimeline) -> (u64, f64) {
    let last_sample = timeline.sample_count - 1;
    let total: u64 = timeline
        .all_intervals()
        .map(|iv| {
            let up = if iv.first_sample > 0 { 1 } else { 0 };
            let down = if iv.last_sample < last_sample { 1 } else { 0 };
            up + down
        })
        .sum();
    let pairs = timeline.pair_count();
    let per_pair = if pairs == 0 {
        0.0
    } else {
        total as f64 / pairs as f64
    };
    (total, per_pair)
}

/// LD: mean up-interval length over all pairs; 0 when no link ever existed.
pub fn link_duration(timeline: &ContactTimeline) -> f64 {
    let mut sum = 0.0;
    let mut count = 0u64;
    for iv in timeline.all_intervals() {
        sum += iv.length();
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// RS: mean magnitude of the velocity-vector difference over all
/// (linked pair, sample) observations; 0 with no observations.
pub fn relative_speed(
    scenario: &Scenario,
    timeline: &ContactTimeline,
    sample_interval: f64,
) -> Result<f64> {
    let n = scenario.node_count();
    let samples = sample_count(scenario.duration, sample_interval);
    let mut sum = 0.0;
    let mut count = 0u64;
    for k in 0..samples {
        let t = k as f64 * sample_interval;
        for i in 0..n {
            for j in i + 1..n {
                if timeline.is_up_at_sample(i, j, k) {
                    let vi = scenario.velocity_at(i, t)?;
                    let vj = scenario.velocity_at(j, t)?;
                    sum += (vi - vj).norm();
                    count += 1;
                }
            }
        }
    }
    Ok(if count == 0 { 0.0 } else { sum / count as f64 })
}

/// Compute all five metrics in one pass over the sampling grid: positions and
/// velocities come from per-trace cursors, adjacency from the spatial grid,
/// and the timeline is built incrementally alongside the per-sample sums.
pub fn compute_all(scenario: &Scenario, range: f64, sample_interval: f64) -> Result<MetricReport> {
    let n = scenario.node_count();
    let samples = sample_count(scenario.duration, sample_interval);
    let mut cursors: Vec<TraceCursor> = scenario
        .traces
        .iter()
        .map(TraceCursor::new)
        .collect::<Result<_>>()?;

    let mut builder = TimelineBuilder::new(n, sample_interval, scenario.duration);
    let mut positions = vec![Vec2::ZERO; n];
    let mut velocities = vec![Vec2::ZERO; n];
    let mut degree_total = 0u64;
    let mut component_total = 0u64;
    let mut rs_sum = 0.0;
    let mut rs_count = 0u64;

    for k in 0..samples {
        let t = k as f64 * sample_interval;
        for (slot, cur) in cursors.iter_mut().enumerate() {
            let (p, v) = cur.sample(t);
            positions[slot] = p;
            velocities[slot] = v;
        }
        let edges = edges_at(&positions, range);
        degree_total += 2 * edges.len() as u64;
        component_total += component_count(n, &edges) as u64;
        for &(i, j) in &edges {
            rs_sum += (velocities[i] - velocities[j]).norm();
            rs_count += 1;
        }
        builder.observe(k, &edges);
    }

    let timeline = builder.finish();
    let (lc_total, lc_per_pair) = link_changes(&timeline);
    Ok(MetricReport {
        avg_node_degree: degree_total as f64 / (samples as f64 * n as f64),
        avg_partitions: component_total as f64 / samples as f64,
        total_link_changes: lc_total,
        link_changes_per_pair: lc_per_pair,
        avg_link_duration: link_duration(&timeline),
        avg_relative_speed: if rs_count == 0 {
            0.0
        } else {
            rs_sum / rs_count as f64
        },
        sample_interval,
        radio_range: range,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioConfig;
    use crate::contact::{build_timeline, sample_adjacency};
    use crate::rng::RandomStream;
    use crate::trace::{NodeTrace, Waypoint};

    fn static_scenario(points: &[(f64, f64)], duration: f64) -> Scenario {
        Scenario {
            area_width: 1000.0,
            area_height: 1000.0,
            duration,
            radio_range: 75.0,
            traces: points
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| NodeTrace::stationary(i, Vec2::new(x, y), duration))
                .collect(),
        }
    }

    fn snapshots_of(scenario: &Scenario, range: f64, dt: f64) -> Vec<AdjacencySnapshot> {
        (0..sample_count(scenario.duration, dt))
            .map(|k| sample_adjacency(scenario, k as f64 * dt, range).unwrap())
            .collect()
    }

    #[test]
    fn static_clique_degenerate_values() {
        // 5 nodes packed within range of each other.
        let s = static_scenario(
            &[(0.0, 0.0), (10.0, 0.0), (0.0, 10.0), (10.0, 10.0), (5.0, 5.0)],
            900.0,
        );
        let r = compute_all(&s, 75.0, 1.0).unwrap();
        assert_eq!(r.avg_node_degree, 4.0);
        assert_eq!(r.avg_partitions, 1.0);
        assert_eq!(r.total_link_changes, 0);
        assert_eq!(r.avg_link_duration, 900.0);
        assert_eq!(r.avg_relative_speed, 0.0);
    }

    #[test]
    fn isolated_node_has_zero_degree() {
        let s = static_scenario(&[(0.0, 0.0)], 10.0);
        let r = compute_all(&s, 75.0, 1.0).unwrap();
        assert_eq!(r.avg_node_degree, 0.0);
        assert_eq!(r.avg_partitions, 1.0);
        assert_eq!(r.avg_link_duration, 0.0);
    }

    #[test]
    fn partitions_match_flood_fill_oracle() {
        let mut rng = RandomStream::new(17);
        for _ in 0..100 {
            let points: Vec<(f64, f64)> = (0..15)
                .map(|_| {
                    let p = rng.point_in_rect(1000.0, 1000.0);
                    (p.x, p.y)
                })
                .collect();
            let s = static_scenario(&points, 1.0);
            let snap = sample_adjacency(&s, 0.0, 75.0).unwrap();
            // Flood fill over the neighbor lists.
            let mut seen = vec![false; 15];
            let mut flood = 0;
            for start in 0..15 {
                if seen[start] {
                    continue;
                }
                flood += 1;
                let mut stack = vec![start];
                seen[start] = true;
                while let Some(u) = stack.pop() {
                    for &v in &snap.neighbors[u] {
                        if !seen[v] {
                            seen[v] = true;
                            stack.push(v);
                        }
                    }
                }
            }
            assert_eq!(network_partitions(&[snap]), flood as f64);
        }
    }

    #[test]
    fn link_change_counting_rules() {
        // Pair 0-1 permanently linked: 0 transitions.
        let s = static_scenario(&[(0.0, 0.0), (10.0, 0.0)], 100.0);
        let tl = build_timeline(&s, 75.0, 1.0).unwrap();
        assert_eq!(link_changes(&tl).0, 0);

        // One interior interval: 2 transitions (one up + one down).
        let mover = NodeTrace::new(
            1,
            vec![
                Waypoint::new(0.0, Vec2::new(500.0, 0.0)),
                Waypoint::new(10.0, Vec2::new(50.0, 0.0)),
                Waypoint::new(20.0, Vec2::new(50.0, 0.0)),
                Waypoint::new(30.0, Vec2::new(500.0, 0.0)),
                Waypoint::new(100.0, Vec2::new(500.0, 0.0)),
            ],
        );
        let s = Scenario {
            area_width: 1000.0,
            area_height: 1000.0,
            duration: 100.0,
            radio_range: 75.0,
            traces: vec![NodeTrace::stationary(0, Vec2::ZERO, 100.0), mover],
        };
        let tl = build_timeline(&s, 75.0, 1.0).unwrap();
        assert_eq!(link_changes(&tl).0, 2);
    }

    #[test]
    fn link_change_state_machine_oracle_on_scripted_trace() {
        // Node 1 visits node 0 twice; node 2 stays isolated.
        let visitor = NodeTrace::new(
            1,
            vec![
                Waypoint::new(0.0, Vec2::new(300.0, 0.0)),
                Waypoint::new(10.0, Vec2::new(40.0, 0.0)),
                Waypoint::new(15.0, Vec2::new(40.0, 0.0)),
                Waypoint::new(25.0, Vec2::new(300.0, 0.0)),
                Waypoint::new(40.0, Vec2::new(40.0, 0.0)),
                Waypoint::new(45.0, Vec2::new(40.0, 0.0)),
                Waypoint::new(55.0, Vec2::new(300.0, 0.0)),
                Waypoint::new(120.0, Vec2::new(300.0, 0.0)),
            ],
        );
        let s = Scenario {
            area_width: 1000.0,
            area_height: 1000.0,
            duration: 120.0,
            radio_range: 75.0,
            traces: vec![
                NodeTrace::stationary(0, Vec2::ZERO, 120.0),
                visitor,
                NodeTrace::stationary(2, Vec2::new(900.0, 900.0), 120.0),
            ],
        };
        let tl = build_timeline(&s, 75.0, 1.0).unwrap();

        // Oracle: explicit per-sample state machine over adjacency samples.
        let mut expected = 0u64;
        for i in 0..3 {
            for j in i + 1..3 {
                let mut prev = None;
                for k in 0..tl.sample_count {
                    let snap = sample_adjacency(&s, k as f64, 75.0).unwrap();
                    let up = snap.has_edge(i, j);
                    if let Some(p) = prev {
                        if p != up {
                            expected += 1;
                        }
                    }
                    prev = Some(up);
                }
            }
        }
        assert_eq!(expected, 4, "scripted trace should have two interior visits");
        assert_eq!(link_changes(&tl).0, expected);
    }

    #[test]
    fn link_duration_arithmetic() {
        // Intervals of 10 s and 30 s -> mean 20 s. Approach speeds are chosen
        // so the 75 m boundary is crossed strictly between grid samples.
        let visitor = NodeTrace::new(
            1,
            vec![
                Waypoint::new(0.0, Vec2::new(310.0, 0.0)),
                Waypoint::new(10.0, Vec2::new(50.0, 0.0)),
                Waypoint::new(19.0, Vec2::new(50.0, 0.0)),
                Waypoint::new(20.0, Vec2::new(310.0, 0.0)),
                Waypoint::new(40.0, Vec2::new(50.0, 0.0)),
                Waypoint::new(68.0, Vec2::new(50.0, 0.0)),
                Waypoint::new(69.0, Vec2::new(310.0, 0.0)),
                Waypoint::new(200.0, Vec2::new(310.0, 0.0)),
            ],
        );
        let s = Scenario {
            area_width: 1000.0,
            area_height: 1000.0,
            duration: 200.0,
            radio_range: 75.0,
            traces: vec![NodeTrace::stationary(0, Vec2::ZERO, 200.0), visitor],
        };
        let tl = build_timeline(&s, 75.0, 1.0).unwrap();
        let lengths: Vec<f64> = tl.all_intervals().map(|iv| iv.length()).collect();
        // First pass: linked samples 10..=19 -> [10, 20). Second pass: the
        // approach crosses 75 m at t ~ 38.1, so linked samples 39..=68 -> [39, 69).
        assert_eq!(lengths, vec![10.0, 30.0]);
        assert_eq!(link_duration(&tl), 20.0);
    }

    #[test]
    fn relative_speed_conventions() {
        // Two nodes side by side moving with identical velocity: RS = 0.
        let co_a = NodeTrace::new(
            0,
            vec![
                Waypoint::new(0.0, Vec2::new(0.0, 0.0)),
                Waypoint::new(10.0, Vec2::new(100.0, 0.0)),
            ],
        );
        let co_b = NodeTrace::new(
            1,
            vec![
                Waypoint::new(0.0, Vec2::new(0.0, 10.0)),
                Waypoint::new(10.0, Vec2::new(100.0, 10.0)),
            ],
        );
        let s = Scenario {
            area_width: 1000.0,
            area_height: 1000.0,
            duration: 10.0,
            radio_range: 75.0,
            traces: vec![co_a, co_b],
        };
        let r = compute_all(&s, 75.0, 1.0).unwrap();
        assert_eq!(r.avg_relative_speed, 0.0);

        // Head-on at 10 m/s each: |v0 - v1| = 20. Traces extend one second
        // past the duration so every sample sits on a moving segment.
        let left = NodeTrace::new(
            0,
            vec![
                Waypoint::new(0.0, Vec2::new(0.0, 0.0)),
                Waypoint::new(11.0, Vec2::new(110.0, 0.0)),
            ],
        );
        let right = NodeTrace::new(
            1,
            vec![
                Waypoint::new(0.0, Vec2::new(110.0, 0.0)),
                Waypoint::new(11.0, Vec2::new(0.0, 0.0)),
            ],
        );
        let s = Scenario {
            area_width: 1000.0,
            area_height: 1000.0,
            duration: 10.0,
            radio_range: 200.0,
            traces: vec![left, right],
        };
        let r = compute_all(&s, 200.0, 1.0).unwrap();
        assert!((r.avg_relative_speed - 20.0).abs() < 1e-12);
    }

    #[test]
    fn compute_all_matches_modular_path() {
        let cfg = ScenarioConfig {
            node_count: 12,
            duration: 60.0,
            seed: 55,
            ..Default::default()
        };
        let mut rng = RandomStream::new(cfg.seed);
        let s = crate::models::generate_rwp(&cfg, &mut rng).unwrap();

        let fast = compute_all(&s, 75.0, 1.0).unwrap();

        let snaps = snapshots_of(&s, 75.0, 1.0);
        let tl = build_timeline(&s, 75.0, 1.0).unwrap();
        assert_eq!(fast.avg_node_degree, node_degree(&snaps));
        assert_eq!(fast.avg_partitions, network_partitions(&snaps));
        let (lc, lc_pp) = link_changes(&tl);
        assert_eq!(fast.total_link_changes, lc);
        assert_eq!(fast.link_changes_per_pair, lc_pp);
        assert_eq!(fast.avg_link_duration, link_duration(&tl));
        let rs = relative_speed(&s, &tl, 1.0).unwrap();
        assert!((fast.avg_relative_speed - rs).abs() < 1e-12);
    }

    #[test]
    fn rpgm_zero_deviation_intra_group_rs_is_zero() {
        let cfg = ScenarioConfig {
            model: crate::config::ModelKind::Rpgm,
            node_count: 5,
            group_size: 5,
            duration: 60.0,
            rpgm_max_deviation: 0.0,
            seed: 3,
            ..Default::default()
        };
        let s = crate::models::generate(&cfg).unwrap();
        let r = compute_all(&s, 75.0, 1.0).unwrap();
        // All five nodes share one trace: relative speed is identically zero.
        assert_eq!(r.avg_relative_speed, 0.0);
        assert_eq!(r.avg_node_degree, 4.0);
    }

    #[test]
    fn aggregates_invariant_under_relabeling_and_translation() {
        let cfg = ScenarioConfig {
            node_count: 10,
            duration: 40.0,
            seed: 77,
            ..Default::default()
        };
        let s = crate::models::generate(&cfg).unwrap();
        let base = compute_all(&s, 75.0, 1.0).unwrap();

        // Relabel: reverse node order.
        let n = s.node_count();
        let mut relabeled = s.clone();
        relabeled.traces.reverse();
        for (idx, tr) in relabeled.traces.iter_mut().enumerate() {
            tr.node_id = idx;
        }
        let rel = compute_all(&relabeled, 75.0, 1.0).unwrap();
        assert_eq!(base.avg_node_degree, rel.avg_node_degree);
        assert_eq!(base.avg_partitions, rel.avg_partitions);
        assert_eq!(base.total_link_changes, rel.total_link_changes);
        assert_eq!(base.avg_link_duration, rel.avg_link_duration);
        assert!((base.avg_relative_speed - rel.avg_relative_speed).abs() < 1e-12);
        assert_eq!(n, relabeled.node_count());

        // Rigid translation of all traces.
        let shift = Vec2::new(13.0, -7.5);
        let mut moved = s.clone();
        for tr in &mut moved.traces {
            for wp in &mut tr.waypoints {
                wp.position = wp.position + shift;
            }
        }
        let tr = compute_all(&moved, 75.0, 1.0).unwrap();
        assert!((base.avg_node_degree - tr.avg_node_degree).abs() < 1e-9);
        assert!((base.avg_partitions - tr.avg_partitions).abs() < 1e-9);
        assert_eq!(base.total_link_changes, tr.total_link_changes);
        assert!((base.avg_link_duration - tr.avg_link_duration).abs() < 1e-9);
        assert!((base.avg_relative_speed - tr.avg_relative_speed).abs() < 1e-9);
    }
}
