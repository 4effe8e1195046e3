use crate::error::{Error, Result};
use crate::geom::Vec2;

/// A timestamped position on a node's piecewise-linear path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Waypoint {
    pub time: f64,
    pub position: Vec2,
}

impl Waypoint {
    pub fn new(time: f64, position: Vec2) -> Self {
        Waypoint { time, position }
    }
}

/// One node's movement path: ordered waypoints, linearly interpolated.
/// A pause is encoded as the same position repeated at a later time.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeTrace {
    pub node_id: usize,
    pub waypoints: Vec<Waypoint>,
}

impl NodeTrace {
    pub fn new(node_id: usize, waypoints: Vec<Waypoint>) -> Self {
        NodeTrace { node_id, waypoints }
    }

    /// Static trace pinned at `position` over [0, duration].
    pub fn stationary(node_id: usize, position: Vec2, duration: f64) -> Self {
        NodeTrace::new(
            node_id,
            vec![Waypoint::new(0.0, position), Waypoint::new(duration, position)],
        )
    }

    fn check_nonempty(&self) -> Result<()> {
        if self.waypoints.is_empty() {
            Err(Error::usage(format!(
                "trace for node {} has no waypoints",
                self.node_id
            )))
        } else {
            Ok(())
        }
    }

    /// Index of the segment containing `t`: largest i with waypoints[i].time <= t.
    fn segment_index(&self, t: f64) -> usize {
        // partition_point returns the first index with time > t.
        let idx = self.waypoints.partition_point(|w| w.time <= t);
        idx.saturating_sub(1)
    }

    /// Position at time `t`: linear interpolation on the containing segment,
    /// clamped to the endpoints outside the covered range.
    pub fn position_at(&self, t: f64) -> Result<Vec2> {
        self.check_nonempty()?;
        let i = self.segment_index(t);
        let a = self.waypoints[i];
        if t <= a.time || i + 1 >= self.waypoints.len() {
            return Ok(a.position);
        }
        let b = self.waypoints[i + 1];
        let dt = b.time - a.time;
        if dt <= 0.0 {
            return Ok(b.position);
        }
        let u = (t - a.time) / dt;
        Ok(a.position + (b.position - a.position) * u)
    }

    /// Piecewise-constant velocity at time `t`. At an exact waypoint time this
    /// is the velocity of the following segment; zero after the final waypoint.
    pub fn velocity_at(&self, t: f64) -> Result<Vec2> {
        self.check_nonempty()?;
        let i = self.segment_index(t);
        if i + 1 >= self.waypoints.len() {
            return Ok(Vec2::ZERO);
        }
        let a = self.waypoints[i];
        let b = self.waypoints[i + 1];
        let dt = b.time - a.time;
        if dt <= 0.0 {
            return Ok(Vec2::ZERO);
        }
        Ok((b.position - a.position) * (1.0 / dt))
    }

    pub fn last_time(&self) -> f64 {
        self.waypoints.last().map_or(0.0, |w| w.time)
    }
}

/// Streaming evaluator for monotone time queries against one trace.
/// Amortizes segment lookup to O(1) per sample when times never go backward.
pub struct TraceCursor<'a> {
    trace: &'a NodeTrace,
    seg: usize,
}

impl<'a> TraceCursor<'a> {
    pub fn new(trace: &'a NodeTrace) -> Result<Self> {
        trace.check_nonempty()?;
        Ok(TraceCursor { trace, seg: 0 })
    }

    /// Position and velocity at `t`. Queries must be non-decreasing in `t`.
    pub fn sample(&mut self, t: f64) -> (Vec2, Vec2) {
        let wps = &self.trace.waypoints;
        while self.seg + 1 < wps.len() && wps[self.seg + 1].time <= t {
            self.seg += 1;
        }
        let a = wps[self.seg];
        if self.seg + 1 >= wps.len() {
            return (a.position, Vec2::ZERO);
        }
        let b = wps[self.seg + 1];
        let dt = b.time - a.time;
        if dt <= 0.0 {
            return (b.position, Vec2::ZERO);
        }
        let vel = (b.position - a.position) * (1.0 / dt);
        if t <= a.time {
            (a.position, vel)
        } else {
            let u = (t - a.time) / dt;
            (a.position + (b.position - a.position) * u, vel)
        }
    }
}

/// Area geometry, duration, radio range, and all node traces from one model
/// run with one seed.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub area_width: f64,
    pub area_height: f64,
    pub duration: f64,
    pub radio_range: f64,
    pub traces: Vec<NodeTrace>,
}

impl Scenario {
    pub fn node_count(&self) -> usize {
        self.traces.len()
    }

    pub fn position_at(&self, node: usize, t: f64) -> Result<Vec2> {
        self.trace(node)?.position_at(t)
    }

    pub fn velocity_at(&self, node: usize, t: f64) -> Result<Vec2> {
        self.trace(node)?.velocity_at(t)
    }

    fn trace(&self, node: usize) -> Result<&NodeTrace> {
        self.traces
            .get(node)
            .ok_or_else(|| Error::usage(format!("no trace for node {node}")))
    }
}

/// A single validation finding. Violations are data, not failures.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    OutOfBounds {
        node: usize,
        waypoint: usize,
        position: Vec2,
    },
    TimeRegression {
        node: usize,
        waypoint: usize,
        prev_time: f64,
        time: f64,
    },
    NonZeroStart {
        node: usize,
        time: f64,
    },
    DuplicateNodeId {
        node: usize,
    },
    NodeIdGap {
        expected: usize,
        found: usize,
    },
    EmptyTrace {
        node: usize,
    },
    ShortCoverage {
        node: usize,
        last_time: f64,
        duration: f64,
    },
    SpeedExceeded {
        node: usize,
        waypoint: usize,
        speed: f64,
        max_speed: f64,
    },
    NonFinite {
        node: usize,
        waypoint: usize,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::OutOfBounds { node, waypoint, position } => write!(
                f,
                "node {node} waypoint {waypoint}: out of bounds at ({}, {})",
                position.x, position.y
            ),
            Violation::TimeRegression { node, waypoint, prev_time, time } => write!(
                f,
                "node {node} waypoint {waypoint}: time regression {prev_time} -> {time}"
            ),
            Violation::NonZeroStart { node, time } => {
                write!(f, "node {node}: first waypoint time is {time}, expected 0")
            }
            Violation::DuplicateNodeId { node } => write!(f, "duplicate node_id {node}"),
            Violation::NodeIdGap { expected, found } => {
                write!(f, "node ids not contiguous: expected {expected}, found {found}")
            }
            Violation::EmptyTrace { node } => write!(f, "node {node}: empty trace"),
            Violation::ShortCoverage { node, last_time, duration } => write!(
                f,
                "node {node}: trace ends at {last_time}, before duration {duration}"
            ),
            Violation::SpeedExceeded { node, waypoint, speed, max_speed } => write!(
                f,
                "node {node} segment ending at waypoint {waypoint}: speed {speed} exceeds max {max_speed}"
            ),
            Violation::NonFinite { node, waypoint } => {
                write!(f, "node {node} waypoint {waypoint}: non-finite coordinate")
            }
        }
    }
}

/// Outcome of `validate`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Relative tolerance for the max-speed check.
const SPEED_TOLERANCE: f64 = 1e-6;

/// Scan a scenario for structural violations: bounds, time ordering, id
/// layout, duration coverage, and (when `max_speed` is given) segment speed.
pub fn validate(scenario: &Scenario, max_speed: Option<f64>) -> ValidationReport {
    let mut v = Vec::new();
    let mut seen_ids = std::collections::HashSet::new();

    for (slot, trace) in scenario.traces.iter().enumerate() {
        let node = trace.node_id;
        if !seen_ids.insert(node) {
            v.push(Violation::DuplicateNodeId { node });
        }
        if node != slot {
            v.push(Violation::NodeIdGap {
                expected: slot,
                found: node,
            });
        }
        if trace.waypoints.is_empty() {
            v.push(Violation::EmptyTrace { node });
            continue;
        }
        let first = trace.waypoints[0];
        if first.time != 0.0 {
            v.push(Violation::NonZeroStart {
                node,
                time: first.time,
            });
        }
        let mut prev = first;
        for (i, wp) in trace.waypoints.iter().enumerate() {
            if !wp.position.is_finite() || !wp.time.is_finite() {
                v.push(Violation::NonFinite { node, waypoint: i });
                continue;
            }
            if wp.position.x < 0.0
                || wp.position.y < 0.0
                || wp.position.x > scenario.area_width
                || wp.position.y > scenario.area_height
            {
                v.push(Violation::OutOfBounds {
                    node,
                    waypoint: i,
                    position: wp.position,
                });
            }
            if i > 0 {
                if wp.time < prev.time {
                    v.push(Violation::TimeRegression {
                        node,
                        waypoint: i,
                        prev_time: prev.time,
                        time: wp.time,
                    });
                } else if let Some(max) = max_speed {
                    let dist = wp.position.distance(prev.position);
                    let dt = wp.time - prev.time;
                    let limit = max * (1.0 + SPEED_TOLERANCE);
                    // dt == 0 with displacement is an instant jump: infinite speed.
                    let speed = if dt > 0.0 { dist / dt } else { f64::INFINITY };
                    if dist > 0.0 && speed > limit {
                        v.push(Violation::SpeedExceeded {
                            node,
                            waypoint: i,
                            speed,
                            max_speed: max,
                        });
                    }
                }
            }
            prev = *wp;
        }
        if trace.last_time() < scenario.duration {
            v.push(Violation::ShortCoverage {
                node,
                last_time: trace.last_time(),
                duration: scenario.duration,
            });
        }
    }

    ValidationReport { violations: v }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(points: &[(f64, f64, f64)]) -> NodeTrace {
        NodeTrace::new(
            0,
            points
                .iter()
                .map(|&(t, x, y)| Waypoint::new(t, Vec2::new(x, y)))
                .collect(),
        )
    }

    #[test]
    fn position_midpoint_of_segment() {
        let tr = trace(&[(0.0, 0.0, 0.0), (10.0, 10.0, 0.0)]);
        assert_eq!(tr.position_at(5.0).unwrap(), Vec2::new(5.0, 0.0));
    }

    #[test]
    fn position_single_waypoint_clamps() {
        let tr = trace(&[(0.0, 3.0, 4.0)]);
        assert_eq!(tr.position_at(100.0).unwrap(), Vec2::new(3.0, 4.0));
    }

    #[test]
    fn position_inside_pause_segment() {
        // t=7 falls in the pause segment: hand interpolation gives (8, 6).
        let tr = trace(&[(0.0, 0.0, 0.0), (4.0, 8.0, 6.0), (10.0, 8.0, 6.0)]);
        assert_eq!(tr.position_at(7.0).unwrap(), Vec2::new(8.0, 6.0));
    }

    #[test]
    fn position_beyond_end_returns_last() {
        let tr = trace(&[(0.0, 0.0, 0.0), (4.0, 8.0, 6.0)]);
        assert_eq!(tr.position_at(99.0).unwrap(), Vec2::new(8.0, 6.0));
    }

    #[test]
    fn velocity_constant_segment() {
        let tr = trace(&[(0.0, 0.0, 0.0), (10.0, 10.0, 0.0)]);
        assert_eq!(tr.velocity_at(3.0).unwrap(), Vec2::new(1.0, 0.0));
    }

    #[test]
    fn velocity_pause_is_zero() {
        let tr = trace(&[(0.0, 0.0, 0.0), (4.0, 8.0, 6.0), (10.0, 8.0, 6.0)]);
        assert_eq!(tr.velocity_at(5.0).unwrap(), Vec2::ZERO);
    }

    #[test]
    fn velocity_hand_oracle() {
        // Displacement (3,4) over 5 s -> (0.6, 0.8).
        let tr = trace(&[(0.0, 0.0, 0.0), (5.0, 3.0, 4.0)]);
        let v = tr.velocity_at(1.0).unwrap();
        assert!((v.x - 0.6).abs() < 1e-12);
        assert!((v.y - 0.8).abs() < 1e-12);
    }

    #[test]
    fn velocity_at_waypoint_time_uses_following_segment() {
        let tr = trace(&[(0.0, 0.0, 0.0), (5.0, 5.0, 0.0), (10.0, 5.0, 10.0)]);
        assert_eq!(tr.velocity_at(5.0).unwrap(), Vec2::new(0.0, 2.0));
        assert_eq!(tr.velocity_at(0.0).unwrap(), Vec2::new(1.0, 0.0));
        assert_eq!(tr.velocity_at(10.0).unwrap(), Vec2::ZERO);
    }

    #[test]
    fn empty_trace_is_usage_error() {
        let tr = NodeTrace::new(0, vec![]);
        assert!(tr.position_at(0.0).is_err());
        assert!(tr.velocity_at(0.0).is_err());
    }

    #[test]
    fn cursor_matches_random_access() {
        let tr = trace(&[
            (0.0, 0.0, 0.0),
            (4.0, 8.0, 6.0),
            (10.0, 8.0, 6.0),
            (20.0, 0.0, 0.0),
        ]);
        let mut cur = TraceCursor::new(&tr).unwrap();
        for k in 0..=50 {
            let t = k as f64 * 0.5;
            let (p, v) = cur.sample(t);
            assert_eq!(p, tr.position_at(t).unwrap(), "position at t={t}");
            assert_eq!(v, tr.velocity_at(t).unwrap(), "velocity at t={t}");
        }
    }

    fn scenario_with(traces: Vec<NodeTrace>) -> Scenario {
        Scenario {
            area_width: 1000.0,
            area_height: 1000.0,
            duration: 10.0,
            radio_range: 75.0,
            traces,
        }
    }

    #[test]
    fn validate_accepts_clean_scenario() {
        let s = scenario_with(vec![
            NodeTrace::stationary(0, Vec2::new(5.0, 5.0), 10.0),
            NodeTrace::stationary(1, Vec2::new(50.0, 50.0), 10.0),
        ]);
        assert!(validate(&s, None).is_valid());
    }

    #[test]
    fn validate_flags_out_of_bounds() {
        let s = scenario_with(vec![NodeTrace::stationary(0, Vec2::new(1001.0, 50.0), 10.0)]);
        let rep = validate(&s, None);
        assert!(rep
            .violations
            .iter()
            .any(|v| matches!(v, Violation::OutOfBounds { .. })));
    }

    #[test]
    fn validate_flags_time_regression() {
        let tr = trace(&[(0.0, 1.0, 1.0), (5.0, 2.0, 2.0), (3.0, 3.0, 3.0)]);
        let s = scenario_with(vec![tr]);
        let rep = validate(&s, None);
        assert!(rep
            .violations
            .iter()
            .any(|v| matches!(v, Violation::TimeRegression { .. })));
    }

    #[test]
    fn validate_flags_duplicate_ids_and_speed() {
        let fast = trace(&[(0.0, 0.0, 0.0), (1.0, 100.0, 0.0), (10.0, 100.0, 0.0)]);
        let mut dup = fast.clone();
        dup.node_id = 0;
        let s = scenario_with(vec![fast, dup]);
        let rep = validate(&s, Some(20.0));
        assert!(rep
            .violations
            .iter()
            .any(|v| matches!(v, Violation::DuplicateNodeId { .. })));
        assert!(rep
            .violations
            .iter()
            .any(|v| matches!(v, Violation::SpeedExceeded { .. })));
    }
}
