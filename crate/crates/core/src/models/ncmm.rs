use super::{group_ranges, GroupAssignment};
use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::geom::Vec2;
use crate::rng::RandomStream;
use crate::trace::{NodeTrace, Scenario, Waypoint};

const SPEED_FLOOR: f64 = 1e-9;
/// Attempts at drawing an anchor destination far enough away before settling
/// for the farthest seen.
const DEST_RETRIES: usize = 200;

/// Nomadic Community. Each group shares an invisible anchor that alternates
/// dwells with relocations, RWP-style. While the anchor dwells, members roam
/// independently inside the disc of `ncmm_roam_radius` around it; while it
/// relocates, members move straight to fresh positions inside the new disc,
/// arriving together with the anchor.
///
/// Anchor hops are kept long relative to the roam radius and anchor speed is
/// capped at max_speed * d / (d + 2R), which bounds every member segment at
/// max_speed and keeps members within the roam radius at all times.
pub fn generate_ncmm(
    config: &ScenarioConfig,
    rng: &mut RandomStream,
) -> Result<(Scenario, GroupAssignment)> {
    config.validate()?;
    let ranges = group_ranges(config.node_count, config.group_size);
    let mut group_of = vec![0usize; config.node_count];
    let mut traces: Vec<Option<NodeTrace>> = vec![None; config.node_count];
    let mut anchors = Vec::with_capacity(ranges.len());

    for (gid, range) in ranges.iter().enumerate() {
        let anchor = anchor_path(config, rng);
        for node in range.clone() {
            group_of[node] = gid;
            traces[node] = Some(member_trace(node, &anchor, config, rng));
        }
        anchors.push(NodeTrace::new(gid, anchor));
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
        is_leader: vec![false; config.node_count],
        anchors,
    };
    Ok((scenario, assignment))
}

fn anchor_path(config: &ScenarioConfig, rng: &mut RandomStream) -> Vec<Waypoint> {
    let (w, h) = (config.area_width, config.area_height);
    let radius = config.ncmm_roam_radius;
    let min_hop = (2.0 * radius).min(0.5 * w.min(h));

    let mut pos = rng.point_in_rect(w, h);
    let mut t = 0.0;
    let mut wps = vec![Waypoint::new(0.0, pos)];

    while t < config.duration {
        if config.max_pause > 0.0 {
            let dwell = rng.uniform(0.0, config.max_pause);
            if dwell > 0.0 {
                t += dwell;
                wps.push(Waypoint::new(t, pos));
                if t >= config.duration {
                    break;
                }
            }
        }

        let mut dest = rng.point_in_rect(w, h);
        let mut dist = pos.distance(dest);
        let mut tries = 0;
        while dist < min_hop && tries < DEST_RETRIES {
            let candidate = rng.point_in_rect(w, h);
            let d = pos.distance(candidate);
            if d > dist {
                dest = candidate;
                dist = d;
            }
            tries += 1;
        }
        if dist < 1e-9 {
            // Degenerate geometry; hold position to the end of the run.
            wps.push(Waypoint::new(config.duration, pos));
            break;
        }
        let speed_cap = config.max_speed * dist / (dist + 2.0 * radius);
        let upper = speed_cap.max(SPEED_FLOOR);
        let lower = config.min_speed.min(upper);
        let speed = rng.uniform(lower, upper).max(SPEED_FLOOR);
        t += dist / speed;
        wps.push(Waypoint::new(t, dest));
        pos = dest;
    }

    wps
}

fn member_trace(
    node_id: usize,
    anchor: &[Waypoint],
    config: &ScenarioConfig,
    rng: &mut RandomStream,
) -> NodeTrace {
    let (w, h) = (config.area_width, config.area_height);
    let radius = config.ncmm_roam_radius;

    let mut pos = (anchor[0].position + rng.point_in_disc(radius)).clamp_to_rect(w, h);
    let mut wps = vec![Waypoint::new(0.0, pos)];

    for pair in anchor.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b.time <= a.time {
            continue;
        }
        if a.position == b.position {
            roam_window(&mut wps, &mut pos, a.position, a.time, b.time, config, rng);
        } else {
            // Relocation: arrive inside the new disc together with the anchor.
            pos = (b.position + rng.point_in_disc(radius)).clamp_to_rect(w, h);
            wps.push(Waypoint::new(b.time, pos));
        }
    }

    NodeTrace::new(node_id, wps)
}

/// Local movement inside the disc around a dwelling anchor: short trips to
/// uniform points of the disc with pauses, clipped to the dwell window.
fn roam_window(
    wps: &mut Vec<Waypoint>,
    pos: &mut Vec2,
    center: Vec2,
    t_start: f64,
    t_end: f64,
    config: &ScenarioConfig,
    rng: &mut RandomStream,
) {
    let (w, h) = (config.area_width, config.area_height);
    let radius = config.ncmm_roam_radius;
    let mut t = t_start;

    while t < t_end {
        let target = (center + rng.point_in_disc(radius)).clamp_to_rect(w, h);
        let dist = pos.distance(target);
        if dist < 1e-9 {
            if config.max_pause <= 0.0 {
                // No room to move and no pauses to draw: hold position.
                break;
            }
            let p = rng.uniform(0.0, config.max_pause);
            if p <= 0.0 {
                continue;
            }
            t = (t + p).min(t_end);
            if t < t_end {
                wps.push(Waypoint::new(t, *pos));
            }
            continue;
        }

        let speed = rng
            .uniform(config.min_speed, config.max_speed)
            .max(SPEED_FLOOR);
        let arrival = t + dist / speed;
        if arrival >= t_end {
            let frac = (t_end - t) / (arrival - t);
            *pos = *pos + (target - *pos) * frac;
            break;
        }
        t = arrival;
        *pos = target;
        wps.push(Waypoint::new(t, target));

        if config.max_pause > 0.0 {
            let p = rng.uniform(0.0, config.max_pause);
            if p > 0.0 {
                t = (t + p).min(t_end);
                if t < t_end {
                    wps.push(Waypoint::new(t, target));
                }
            }
        }
    }

    wps.push(Waypoint::new(t_end, *pos));
}
