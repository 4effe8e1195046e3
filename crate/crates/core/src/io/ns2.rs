//! ns-2 movement files: initial `$node_(i) set X_/Y_/Z_` lines plus
//! `$ns_ at <t> "$node_(i) setdest <x> <y> <speed>"` commands per movement
//! segment. Pauses emit no line; fixed 6-decimal precision.

use std::collections::BTreeMap;

use super::bonnmotion::ImportGeometry;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::trace::{NodeTrace, Scenario, Waypoint};

pub fn export_ns2_movements(scenario: &Scenario) -> String {
    let mut out = String::new();
    for trace in &scenario.traces {
        let id = trace.node_id;
        let start = trace.waypoints[0].position;
        out.push_str(&format!("$node_({id}) set X_ {:.6}\n", start.x));
        out.push_str(&format!("$node_({id}) set Y_ {:.6}\n", start.y));
        out.push_str(&format!("$node_({id}) set Z_ 0.000000\n"));
        for w in trace.waypoints.windows(2) {
            let (a, b) = (w[0], w[1]);
            let dist = a.position.distance(b.position);
            let dt = b.time - a.time;
            if dist <= 0.0 || dt <= 0.0 {
                continue; // pause or degenerate segment
            }
            let speed = dist / dt;
            out.push_str(&format!(
                "$ns_ at {:.6} \"$node_({id}) setdest {:.6} {:.6} {:.6}\"\n",
                a.time, b.position.x, b.position.y, speed
            ));
        }
    }
    out
}

/// Largest arrival/command overlap attributed to 6-decimal speed rounding.
const SETDEST_OVERLAP_TOLERANCE: f64 = 0.01;

#[derive(Default)]
struct PendingNode {
    x: Option<f64>,
    y: Option<f64>,
    moves: Vec<(f64, f64, f64, f64, usize)>, // t, x, y, speed, lineno
}

/// Parse an ns-2 movement file back into traces. Movement segments are
/// reconstructed from each setdest command's start time and speed; gaps
/// between an arrival and the next command become pauses, and every node is
/// held at its final position through `duration`.
pub fn import_ns2_movements(text: &str, geometry: &ImportGeometry) -> Result<Scenario> {
    let mut nodes: BTreeMap<usize, PendingNode> = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with("$node_(") {
            let (id, rest) = parse_node_ref(line, lineno)?;
            let mut parts = rest.split_whitespace();
            let (kw, axis, value) = (parts.next(), parts.next(), parts.next());
            if kw != Some("set") || value.is_none() || parts.next().is_some() {
                return Err(Error::parse(lineno, 1, "expected '$node_(i) set <axis> <value>'"));
            }
            let value: f64 = value
                .unwrap()
                .parse()
                .map_err(|_| Error::parse(lineno, 1, "bad coordinate value"))?;
            let node = nodes.entry(id).or_default();
            match axis {
                Some("X_") => node.x = Some(value),
                Some("Y_") => node.y = Some(value),
                Some("Z_") => {} // flat scenarios; value ignored
                _ => return Err(Error::parse(lineno, 1, "unknown axis (expected X_, Y_ or Z_)")),
            }
        } else if line.starts_with("$ns_") {
            let (id, t, x, y, speed) = parse_setdest(line, lineno)?;
            if speed <= 0.0 {
                return Err(Error::parse(lineno, 1, "setdest speed must be positive"));
            }
            nodes.entry(id).or_default().moves.push((t, x, y, speed, lineno));
        } else {
            return Err(Error::parse(lineno, 1, format!("unrecognized line '{line}'")));
        }
    }

    let mut traces = Vec::with_capacity(nodes.len());
    for (expected, (id, node)) in nodes.into_iter().enumerate() {
        if id != expected {
            return Err(Error::parse(
                0,
                0,
                format!("node ids not contiguous: expected node {expected}, found {id}"),
            ));
        }
        let (Some(x), Some(y)) = (node.x, node.y) else {
            return Err(Error::parse(
                0,
                0,
                format!("node {id} has setdest commands but no initial X_/Y_"),
            ));
        };
        let mut pos = Vec2::new(x, y);
        let mut time = 0.0;
        let mut waypoints = vec![Waypoint::new(0.0, pos)];
        let mut moves = node.moves;
        moves.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (t, dx, dy, speed, lineno) in moves {
            if t < time {
                // 6-decimal speeds can make a reconstructed arrival overshoot
                // the next command by a hair; pull the arrival back to the
                // command time. Larger overlaps are real scheduling conflicts.
                if time - t <= SETDEST_OVERLAP_TOLERANCE {
                    if let Some(last) = waypoints.last_mut() {
                        last.time = t;
                    }
                    time = t;
                } else {
                    return Err(Error::parse(
                        lineno,
                        1,
                        format!("setdest at t={t} while the previous movement is still in progress"),
                    ));
                }
            }
            if t > time {
                waypoints.push(Waypoint::new(t, pos));
                time = t;
            }
            let dest = Vec2::new(dx, dy);
            let dist = pos.distance(dest);
            if dist <= 0.0 {
                continue;
            }
            time += dist / speed;
            waypoints.push(Waypoint::new(time, dest));
            pos = dest;
        }
        if time < geometry.duration {
            waypoints.push(Waypoint::new(geometry.duration, pos));
        }
        traces.push(NodeTrace::new(id, waypoints));
    }

    Ok(Scenario {
        area_width: geometry.area_width,
        area_height: geometry.area_height,
        duration: geometry.duration,
        radio_range: geometry.radio_range,
        traces,
    })
}

/// Split `$node_(<id>) <rest>`, returning the id and the remainder.
fn parse_node_ref(line: &str, lineno: usize) -> Result<(usize, &str)> {
    let after = &line["$node_(".len()..];
    let close = after
        .find(')')
        .ok_or_else(|| Error::parse(lineno, 1, "missing ')' in node reference"))?;
    let id = after[..close]
        .parse::<usize>()
        .map_err(|_| Error::parse(lineno, 1, "bad node id"))?;
    Ok((id, after[close + 1..].trim_start()))
}

fn parse_setdest(line: &str, lineno: usize) -> Result<(usize, f64, f64, f64, f64)> {
    // $ns_ at <t> "$node_(<id>) setdest <x> <y> <speed>"
    let rest = line
        .strip_prefix("$ns_")
        .map(str::trim_start)
        .and_then(|s| s.strip_prefix("at"))
        .map(str::trim_start)
        .ok_or_else(|| Error::parse(lineno, 1, "expected '$ns_ at <t> \"...\"'"))?;
    let (t_str, quoted) = rest
        .split_once(' ')
        .ok_or_else(|| Error::parse(lineno, 1, "missing setdest command"))?;
    let t: f64 = t_str
        .parse()
        .map_err(|_| Error::parse(lineno, 1, "bad event time"))?;
    let inner = quoted
        .trim()
        .strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .ok_or_else(|| Error::parse(lineno, 1, "setdest command must be quoted"))?;
    let (id, rest) = parse_node_ref(inner.trim(), lineno)?;
    let mut parts = rest.split_whitespace();
    if parts.next() != Some("setdest") {
        return Err(Error::parse(lineno, 1, "expected 'setdest'"));
    }
    let mut num = |what: &str| -> Result<f64> {
        parts
            .next()
            .ok_or_else(|| Error::parse(lineno, 1, format!("missing {what}")))?
            .parse()
            .map_err(|_| Error::parse(lineno, 1, format!("bad {what}")))
    };
    let x = num("x coordinate")?;
    let y = num("y coordinate")?;
    let speed = num("speed")?;
    Ok((id, t, x, y, speed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometry(duration: f64) -> ImportGeometry {
        ImportGeometry {
            area_width: 1000.0,
            area_height: 1000.0,
            duration,
            radio_range: 75.0,
        }
    }

    #[test]
    fn single_segment_export_layout() {
        let s = Scenario {
            area_width: 1000.0,
            area_height: 1000.0,
            duration: 5.0,
            radio_range: 75.0,
            traces: vec![NodeTrace::new(
                0,
                vec![
                    Waypoint::new(0.0, Vec2::new(0.0, 0.0)),
                    Waypoint::new(5.0, Vec2::new(10.0, 0.0)),
                ],
            )],
        };
        let text = export_ns2_movements(&s);
        let expected = "$node_(0) set X_ 0.000000\n\
                        $node_(0) set Y_ 0.000000\n\
                        $node_(0) set Z_ 0.000000\n\
                        $ns_ at 0.000000 \"$node_(0) setdest 10.000000 0.000000 2.000000\"\n";
        assert_eq!(text, expected);
    }

    #[test]
    fn pure_pause_trace_emits_only_initial_lines() {
        let s = Scenario {
            area_width: 1000.0,
            area_height: 1000.0,
            duration: 50.0,
            radio_range: 75.0,
            traces: vec![NodeTrace::stationary(0, Vec2::new(3.0, 4.0), 50.0)],
        };
        let text = export_ns2_movements(&s);
        assert_eq!(text.lines().count(), 3);
        assert!(!text.contains("setdest"));
    }

    #[test]
    fn import_reconstructs_pause_and_motion() {
        let text = "$node_(0) set X_ 0.000000\n\
                    $node_(0) set Y_ 0.000000\n\
                    $node_(0) set Z_ 0.000000\n\
                    $ns_ at 2.000000 \"$node_(0) setdest 10.000000 0.000000 2.000000\"\n";
        let s = import_ns2_movements(text, &geometry(20.0)).unwrap();
        let tr = &s.traces[0];
        // Pause at origin until t=2, arrive at t=7, hold to 20.
        assert_eq!(tr.position_at(1.0).unwrap(), Vec2::new(0.0, 0.0));
        assert_eq!(tr.position_at(7.0).unwrap(), Vec2::new(10.0, 0.0));
        assert_eq!(tr.position_at(20.0).unwrap(), Vec2::new(10.0, 0.0));
        let mid = tr.position_at(4.5).unwrap();
        assert!((mid.x - 5.0).abs() < 1e-9);
    }

    #[test]
    fn round_trip_positions_agree_on_one_second_grid() {
        for model in crate::config::ModelKind::ALL {
            let cfg = crate::config::ScenarioConfig {
                model,
                node_count: 10,
                duration: 60.0,
                seed: 9,
                ..Default::default()
            };
            let s = crate::models::generate(&cfg).unwrap();
            let text = export_ns2_movements(&s);
            let back = import_ns2_movements(&text, &ImportGeometry::of(&s)).unwrap();
            assert_eq!(back.node_count(), s.node_count());
            for node in 0..s.node_count() {
                for k in 0..=60 {
                    let t = k as f64;
                    let a = s.position_at(node, t).unwrap();
                    let b = back.position_at(node, t).unwrap();
                    assert!(
                        a.distance(b) <= 1e-4,
                        "{model}: node {node} drifted {} m at t={t}",
                        a.distance(b)
                    );
                }
            }
        }
    }

    #[test]
    fn garbage_line_is_parse_error() {
        let err = import_ns2_movements("hello world\n", &geometry(10.0)).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn setdest_without_initial_position_is_error() {
        let text = "$ns_ at 1.0 \"$node_(0) setdest 5 5 2\"\n";
        assert!(import_ns2_movements(text, &geometry(10.0)).is_err());
    }
}
