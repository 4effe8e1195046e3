use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::rng::RandomStream;
use crate::trace::{NodeTrace, Scenario, Waypoint};

/// Innovation scale for speed, as a fraction of the mean speed. With the
/// sqrt(1 - alpha^2) factor in the update this is also the stationary
/// standard deviation of the speed process.
const SPEED_STD_FRACTION: f64 = 0.25;
/// Stationary standard deviation of the direction process, radians.
const DIRECTION_STD: f64 = std::f64::consts::PI / 8.0;

/// Autoregressive speed/direction state of one Gauss-Markov node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GmState {
    pub speed: f64,
    pub direction: f64,
    pub mean_speed: f64,
    pub mean_direction: f64,
    pub alpha: f64,
}

impl GmState {
    pub fn new(
        speed: f64,
        direction: f64,
        mean_speed: f64,
        mean_direction: f64,
        alpha: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::config(format!("alpha {alpha} outside [0, 1]")));
        }
        Ok(GmState {
            speed,
            direction,
            mean_speed,
            mean_direction,
            alpha,
        })
    }
}

/// One autoregressive update:
///   speed'     = a*speed     + (1-a)*mean_speed     + sqrt(1-a^2)*gauss_v
///   direction' = a*direction + (1-a)*mean_direction + sqrt(1-a^2)*gauss_d
/// The new speed is clamped to [0, max_speed]; direction is unbounded.
pub fn gm_update(state: &GmState, gauss_v: f64, gauss_d: f64, max_speed: f64) -> GmState {
    let a = state.alpha;
    let noise = (1.0 - a * a).sqrt();
    let speed = a * state.speed + (1.0 - a) * state.mean_speed + noise * gauss_v;
    let direction = a * state.direction + (1.0 - a) * state.mean_direction + noise * gauss_d;
    GmState {
        speed: speed.clamp(0.0, max_speed),
        direction,
        ..*state
    }
}

/// Advance a position by one interval of motion at the state's speed and
/// direction: displacement is speed * dt along the direction angle.
pub fn gm_advance(position: Vec2, state: &GmState, dt: f64) -> Vec2 {
    position + Vec2::from_angle(state.direction) * (state.speed * dt)
}

/// Representative of `angle` (mod 2 pi) nearest to `reference`, so the mean
/// pull never unwinds accumulated full turns the long way around.
fn nearest_angle(angle: f64, reference: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let turns = ((reference - angle) / tau).round();
    angle + turns * tau
}

/// Gauss-Markov generator. Nodes start at uniform positions with speed at the
/// process mean and a uniform direction; every update interval the state is
/// updated per `gm_update` and integrated per `gm_advance`. Nodes nearing an
/// edge have their mean direction steered toward the area center; positions
/// are clamped to the area as a last resort.
pub fn generate_gm(config: &ScenarioConfig, rng: &mut RandomStream) -> Result<Scenario> {
    config.validate()?;
    let dt = config.gm_update_interval;
    let steps = (config.duration / dt).ceil() as usize;
    let mean_speed = config.max_speed / 2.0;
    let sigma_v = mean_speed * SPEED_STD_FRACTION;
    let edge_margin = 2.0 * config.max_speed * dt;
    let center = Vec2::new(config.area_width / 2.0, config.area_height / 2.0);

    let mut traces = Vec::with_capacity(config.node_count);
    for id in 0..config.node_count {
        let mut pos = rng.point_in_rect(config.area_width, config.area_height);
        let initial_direction = rng.uniform(0.0, std::f64::consts::TAU);
        let mut state = GmState::new(
            mean_speed,
            initial_direction,
            mean_speed,
            initial_direction,
            config.gm_alpha,
        )?;

        let mut waypoints = Vec::with_capacity(steps + 1);
        waypoints.push(Waypoint::new(0.0, pos));
        for step in 1..=steps {
            let near_edge = pos.x < edge_margin
                || pos.y < edge_margin
                || pos.x > config.area_width - edge_margin
                || pos.y > config.area_height - edge_margin;
            let target_mean = if near_edge {
                (center - pos).y.atan2((center - pos).x)
            } else {
                state.mean_direction
            };
            let mut update_state = state;
            update_state.mean_direction = nearest_angle(target_mean, state.direction);

            let gauss_v = rng.standard_normal() * sigma_v;
            let gauss_d = rng.standard_normal() * DIRECTION_STD;
            state = gm_update(&update_state, gauss_v, gauss_d, config.max_speed);

            pos = gm_advance(pos, &state, dt).clamp_to_rect(config.area_width, config.area_height);
            waypoints.push(Waypoint::new(step as f64 * dt, pos));
        }
        traces.push(NodeTrace::new(id, waypoints));
    }

    Ok(Scenario {
        area_width: config.area_width,
        area_height: config.area_height,
        duration: config.duration,
        radio_range: config.radio_range,
        traces,
    })
}
