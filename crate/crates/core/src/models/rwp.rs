use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::rng::RandomStream;
use crate::trace::{NodeTrace, Scenario, Waypoint};

/// Floor applied to drawn speeds so a zero min_speed cannot stall a node
/// on an unbounded segment.
const SPEED_FLOOR: f64 = 1e-9;

/// Random Waypoint: each node independently alternates straight-line trips to
/// uniform destinations (speed uniform in [min, max]) with uniform pauses.
pub fn generate_rwp(config: &ScenarioConfig, rng: &mut RandomStream) -> Result<Scenario> {
    config.validate()?;
    let traces = (0..config.node_count)
        .map(|id| rwp_trace(id, config, rng))
        .collect();
    Ok(Scenario {
        area_width: config.area_width,
        area_height: config.area_height,
        duration: config.duration,
        radio_range: config.radio_range,
        traces,
    })
}

fn rwp_trace(node_id: usize, config: &ScenarioConfig, rng: &mut RandomStream) -> NodeTrace {
    NodeTrace::new(node_id, rwp_path(config, rng))
}

/// One destination/speed/pause waypoint path covering [0, duration].
/// Shared with the RPGM leader ("checkpoint") path.
pub(crate) fn rwp_path(config: &ScenarioConfig, rng: &mut RandomStream) -> Vec<Waypoint> {
    let mut waypoints = Vec::new();
    let mut pos = rng.point_in_rect(config.area_width, config.area_height);
    let mut t = 0.0;
    waypoints.push(Waypoint::new(t, pos));

    while t < config.duration {
        let dest = rng.point_in_rect(config.area_width, config.area_height);
        let dist = pos.distance(dest);
        if dist < 1e-9 {
            continue;
        }
        let speed = rng
            .uniform(config.min_speed, config.max_speed)
            .max(SPEED_FLOOR);
        t += dist / speed;
        waypoints.push(Waypoint::new(t, dest));
        pos = dest;

        if config.max_pause > 0.0 && t < config.duration {
            let pause = rng.uniform(0.0, config.max_pause);
            if pause > 0.0 {
                t += pause;
                waypoints.push(Waypoint::new(t, pos));
            }
        }
    }

    waypoints
}

/// Speed of the segment ending at waypoint index `i` (for tests).
#[cfg(test)]
fn segment_speed(trace: &NodeTrace, i: usize) -> f64 {
    let a = trace.waypoints[i - 1];
    let b = trace.waypoints[i];
    a.position.distance(b.position) / (b.time - a.time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::validate;

    #[test]
    fn move_segments_stay_within_speed_band() {
        let config = ScenarioConfig {
            node_count: 1,
            max_pause: 0.0,
            duration: 2000.0,
            ..ScenarioConfig::default()
        };
        let mut rng = RandomStream::new(5);
        let scenario = generate_rwp(&config, &mut rng).unwrap();
        let trace = &scenario.traces[0];
        assert!(trace.waypoints.len() > 3, "long run should produce many trips");
        for i in 1..trace.waypoints.len() {
            let s = segment_speed(trace, i);
            assert!(
                (config.min_speed..=config.max_speed + 1e-9).contains(&s),
                "segment {i} speed {s}"
            );
        }
    }

    #[test]
    fn degenerate_speed_band_gives_exact_speed() {
        let config = ScenarioConfig {
            node_count: 1,
            min_speed: 7.0,
            max_speed: 7.0,
            max_pause: 0.0,
            duration: 500.0,
            ..ScenarioConfig::default()
        };
        let mut rng = RandomStream::new(11);
        let scenario = generate_rwp(&config, &mut rng).unwrap();
        let trace = &scenario.traces[0];
        for i in 1..trace.waypoints.len() {
            assert!((segment_speed(trace, i) - 7.0).abs() < 1e-9);
        }
    }

    #[test]
    fn default_population_validates() {
        let config = ScenarioConfig {
            seed: 42,
            ..ScenarioConfig::default()
        };
        let mut rng = RandomStream::new(config.seed);
        let scenario = generate_rwp(&config, &mut rng).unwrap();
        assert_eq!(scenario.node_count(), 90);
        let report = validate(&scenario, Some(config.max_speed));
        assert!(report.is_valid(), "{:?}", &report.violations[..report.violations.len().min(3)]);
        for tr in &scenario.traces {
            assert!(tr.last_time() >= config.duration);
        }
    }

    #[test]
    fn pauses_emit_repeated_positions() {
        let config = ScenarioConfig {
            node_count: 1,
            max_pause: 10.0,
            duration: 900.0,
            seed: 3,
            ..ScenarioConfig::default()
        };
        let mut rng = RandomStream::new(config.seed);
        let scenario = generate_rwp(&config, &mut rng).unwrap();
        let wps = &scenario.traces[0].waypoints;
        let paused = wps
            .windows(2)
            .any(|w| w[0].position == w[1].position && w[1].time > w[0].time);
        assert!(paused, "expected at least one pause segment");
    }

    #[test]
    fn rejects_zero_speed_config() {
        let config = ScenarioConfig {
            max_speed: 0.0,
            min_speed: 0.0,
            ..ScenarioConfig::default()
        };
        let mut rng = RandomStream::new(1);
        assert!(generate_rwp(&config, &mut rng).is_err());
    }
}
