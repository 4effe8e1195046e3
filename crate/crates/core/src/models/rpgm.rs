use super::rwp::rwp_path;
use super::{group_ranges, GroupAssignment};
use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::geom::Vec2;
use crate::rng::RandomStream;
use crate::trace::{NodeTrace, Scenario, Waypoint};

/// Grid on which member positions are emitted and deviations updated.
const SAMPLE_INTERVAL: f64 = 1.0;
/// Members chase their deviation target at up to this fraction of max_speed
/// relative to the reference point, so group members move at speeds that
/// differ only a little from their leader.
const DEVIATION_RATE_FRACTION: f64 = 0.04;

/// Reference Point Group Mobility. Nodes are partitioned into groups; each
/// group's leader travels an independent checkpoint path, and every member
/// tracks the leader with a bounded deviation offset. Member waypoints are
/// emitted on a fixed grid; the leader trace is resampled onto the same grid
/// so member-to-leader distance never exceeds the configured deviation.
pub fn generate_rpgm(
    config: &ScenarioConfig,
    rng: &mut RandomStream,
) -> Result<(Scenario, GroupAssignment)> {
    config.validate()?;
    let steps = (config.duration / SAMPLE_INTERVAL).ceil() as usize;
    let grid: Vec<f64> = (0..=steps).map(|k| k as f64 * SAMPLE_INTERVAL).collect();
    let radius = config.rpgm_max_deviation;
    let step_budget = DEVIATION_RATE_FRACTION * config.max_speed * SAMPLE_INTERVAL;
    let hop_budget = config.max_speed * SAMPLE_INTERVAL;

    let ranges = group_ranges(config.node_count, config.group_size);
    let mut group_of = vec![0usize; config.node_count];
    let mut is_leader = vec![false; config.node_count];
    let mut traces: Vec<Option<NodeTrace>> = vec![None; config.node_count];

    for (gid, range) in ranges.iter().enumerate() {
        let leader_id = range.start;
        is_leader[leader_id] = true;
        for node in range.clone() {
            group_of[node] = gid;
        }

        let leader_path = NodeTrace::new(leader_id, rwp_path(config, rng));
        let reference: Vec<Vec2> = {
            let mut cursor = crate::trace::TraceCursor::new(&leader_path)?;
            grid.iter().map(|&t| cursor.sample(t).0).collect()
        };
        traces[leader_id] = Some(NodeTrace::new(
            leader_id,
            grid.iter()
                .zip(&reference)
                .map(|(&t, &p)| Waypoint::new(t, p))
                .collect(),
        ));

        for member in range.clone().skip(1) {
            let mut dev = rng.point_in_disc(radius);
            let mut waypoints = Vec::with_capacity(grid.len());
            let mut pos =
                (reference[0] + dev).clamp_to_rect(config.area_width, config.area_height);
            dev = pos - reference[0];
            waypoints.push(Waypoint::new(grid[0], pos));

            for k in 1..grid.len() {
                let target = rng.point_in_disc(radius);
                let step = (target - dev).clamp_norm(step_budget);
                let ref_delta = reference[k] - reference[k - 1];
                let scale = shrink_to_budget(ref_delta, step, hop_budget);
                dev = dev + step * scale;
                pos = (reference[k] + dev).clamp_to_rect(config.area_width, config.area_height);
                dev = pos - reference[k];
                waypoints.push(Waypoint::new(grid[k], pos));
            }
            traces[member] = Some(NodeTrace::new(member, waypoints));
        }
    }

    let scenario = Scenario {
        area_width: config.area_width,
        area_height: config.area_height,
        duration: config.duration,
        radio_range: config.radio_range,
        traces: traces.into_iter().map(Option::unwrap).collect(),
    };
    let assignment = GroupAssignment {
        group_of,
        is_leader,
        anchors: Vec::new(),
    };
    Ok((scenario, assignment))
}

/// Largest s in [0, 1] with |base + s*step| <= budget. `base` is already
/// within budget (the leader obeys max_speed), so s always exists.
fn shrink_to_budget(base: Vec2, step: Vec2, budget: f64) -> f64 {
    let full = base + step;
    if full.norm() <= budget {
        return 1.0;
    }
    let bb = step.dot(step);
    if bb <= 0.0 {
        return 1.0;
    }
    let ab = base.dot(step);
    let c = base.dot(base) - budget * budget;
    let disc = ab * ab - bb * c;
    if disc <= 0.0 {
        return 0.0;
    }
    ((-ab + disc.sqrt()) / bb).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ModelKind;
    use crate::trace::validate;

    fn config(node_count: usize, group_size: usize, seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            model: ModelKind::Rpgm,
            node_count,
            group_size,
            duration: 120.0,
            seed,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn ninety_nodes_form_eighteen_groups() {
        let cfg = config(90, 5, 1);
        let mut rng = RandomStream::new(cfg.seed);
        let (_, assignment) = generate_rpgm(&cfg, &mut rng).unwrap();
        assert_eq!(assignment.group_count(), 18);
        assert_eq!(assignment.is_leader.iter().filter(|&&l| l).count(), 18);
    }

    #[test]
    fn zero_deviation_members_equal_leader() {
        let mut cfg = config(6, 3, 4);
        cfg.rpgm_max_deviation = 0.0;
        let mut rng = RandomStream::new(cfg.seed);
        let (scenario, assignment) = generate_rpgm(&cfg, &mut rng).unwrap();
        for gid in 0..assignment.group_count() {
            let members: Vec<usize> = (0..6).filter(|&n| assignment.group_of[n] == gid).collect();
            let leader = members
                .iter()
                .copied()
                .find(|&n| assignment.is_leader[n])
                .unwrap();
            for &m in &members {
                assert_eq!(
                    scenario.traces[m].waypoints, scenario.traces[leader].waypoints,
                    "member {m} deviates from leader {leader}"
                );
            }
        }
    }

    #[test]
    fn members_stay_within_deviation_of_leader() {
        let cfg = config(20, 5, 77);
        let mut rng = RandomStream::new(cfg.seed);
        let (scenario, assignment) = generate_rpgm(&cfg, &mut rng).unwrap();
        for node in 0..20 {
            let gid = assignment.group_of[node];
            let leader = (0..20)
                .find(|&n| assignment.group_of[n] == gid && assignment.is_leader[n])
                .unwrap();
            for wp in &scenario.traces[node].waypoints {
                let lp = scenario.traces[leader].position_at(wp.time).unwrap();
                let d = wp.position.distance(lp);
                assert!(
                    d <= cfg.rpgm_max_deviation + 1e-6,
                    "node {node} at t={} is {d} m from leader",
                    wp.time
                );
            }
        }
    }

    #[test]
    fn output_validates_with_speed_bound() {
        let cfg = config(25, 5, 13);
        let mut rng = RandomStream::new(cfg.seed);
        let (scenario, _) = generate_rpgm(&cfg, &mut rng).unwrap();
        let report = validate(&scenario, Some(cfg.max_speed));
        assert!(report.is_valid(), "{:?}", &report.violations[..report.violations.len().min(3)]);
    }

    #[test]
    fn oversized_group_rejected() {
        let cfg = config(4, 10, 1);
        let mut rng = RandomStream::new(1);
        assert!(generate_rpgm(&cfg, &mut rng).is_err());
    }

    #[test]
    fn partial_last_group_allowed() {
        let cfg = config(11, 4, 2);
        let mut rng = RandomStream::new(cfg.seed);
        let (scenario, assignment) = generate_rpgm(&cfg, &mut rng).unwrap();
        assert_eq!(assignment.group_count(), 3);
        assert_eq!(scenario.node_count(), 11);
    }
}
