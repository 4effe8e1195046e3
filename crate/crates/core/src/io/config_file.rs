//! Line-oriented `key = value` configuration files with `[scenario]`,
//! `[routing]` and `[experiment]` sections. Keys are case-sensitive and named
//! after the simulation parameter tables; unknown keys are errors.

use crate::config::{ModelKind, ScenarioConfig};
use crate::error::{Error, Result};
use crate::experiment::{ExperimentPlan, OutputKind};
use crate::routesim::SimParams;

/// Everything a config file can describe. Each section is optional and
/// falls back to defaults.
#[derive(Clone, Debug)]
pub struct FileConfig {
    pub scenario: ScenarioConfig,
    pub sim: SimParams,
    pub plan: ExperimentPlan,
}

impl Default for FileConfig {
    fn default() -> Self {
        let scenario = ScenarioConfig::default();
        let sim = SimParams::default();
        let plan = ExperimentPlan {
            base: scenario.clone(),
            sim,
            ..ExperimentPlan::default()
        };
        FileConfig {
            scenario,
            sim,
            plan,
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Scenario,
    Routing,
    Experiment,
}

pub fn parse_config(text: &str) -> Result<FileConfig> {
    let mut cfg = FileConfig::default();
    let mut section = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }

        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = Some(match name {
                "scenario" => Section::Scenario,
                "routing" => Section::Routing,
                "experiment" => Section::Experiment,
                other => {
                    return Err(Error::config(format!(
                        "line {}: unknown section [{other}]",
                        lineno + 1
                    )))
                }
            });
            continue;
        }

        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::config(format!(
                "line {}: expected 'key = value', got '{line}'",
                lineno + 1
            )));
        };
        let key = key.trim();
        let value = value.trim();
        let Some(section) = section else {
            return Err(Error::config(format!(
                "line {}: key '{key}' appears before any [section]",
                lineno + 1
            )));
        };
        apply_key(&mut cfg, section, key, value).map_err(|e| {
            let msg = match e {
                Error::Config(m) => m,
                other => other.to_string(),
            };
            Error::config(format!("line {}: {msg}", lineno + 1))
        })?;
    }

    cfg.plan.base = cfg.scenario.clone();
    cfg.plan.sim = cfg.sim;
    cfg.scenario.validate()?;
    cfg.sim.validate()?;
    cfg.plan.validate()?;
    Ok(cfg)
}

fn apply_key(cfg: &mut FileConfig, section: Section, key: &str, value: &str) -> Result<()> {
    match section {
        Section::Scenario => apply_scenario_key(&mut cfg.scenario, key, value),
        Section::Routing => apply_routing_key(&mut cfg.sim, key, value),
        Section::Experiment => apply_experiment_key(&mut cfg.plan, key, value),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(format!("key '{key}': cannot parse value '{value}'")))
}

fn apply_scenario_key(s: &mut ScenarioConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "model" => s.model = ModelKind::parse(value)?,
        "node_count" => s.node_count = parse_num(key, value)?,
        "area_width" => s.area_width = parse_num(key, value)?,
        "area_height" => s.area_height = parse_num(key, value)?,
        "min_speed" => s.min_speed = parse_num(key, value)?,
        "max_speed" => s.max_speed = parse_num(key, value)?,
        "max_pause" => s.max_pause = parse_num(key, value)?,
        "duration" => s.duration = parse_num(key, value)?,
        "radio_range_metrics" => s.radio_range = parse_num(key, value)?,
        "group_size" => s.group_size = parse_num(key, value)?,
        "gm_alpha" => s.gm_alpha = parse_num(key, value)?,
        "gm_update_interval" => s.gm_update_interval = parse_num(key, value)?,
        "rpgm_max_deviation" => s.rpgm_max_deviation = parse_num(key, value)?,
        "ncmm_roam_radius" => s.ncmm_roam_radius = parse_num(key, value)?,
        "seed" => s.seed = parse_num(key, value)?,
        other => {
            return Err(Error::config(format!(
                "unknown key '{other}' in [scenario]"
            )))
        }
    }
    Ok(())
}

fn apply_routing_key(p: &mut SimParams, key: &str, value: &str) -> Result<()> {
    match key {
        "transmission_range_routing" => p.routing_radio_range = parse_num(key, value)?,
        "data_rate" => p.data_rate = parse_num(key, value)?,
        "per_hop_processing" => p.per_hop_processing = parse_num(key, value)?,
        "rreq_ttl_max" => p.rreq_ttl_max = parse_num(key, value)?,
        "route_lifetime" => p.route_lifetime = parse_num(key, value)?,
        "discovery_timeout" => p.discovery_timeout = parse_num(key, value)?,
        "max_buffered_per_flow" => p.max_buffered_per_flow = parse_num(key, value)?,
        "rreq_retries" => p.rreq_retries = parse_num(key, value)?,
        "broadcast_jitter_max" => p.broadcast_jitter_max = parse_num(key, value)?,
        "duration" => p.sim_duration = parse_num(key, value)?,
        "max_connections" => p.max_connections = parse_num(key, value)?,
        "packet_size" => p.packet_size = parse_num(key, value)?,
        "sending_rate" => p.sending_rate = parse_num(key, value)?,
        other => {
            return Err(Error::config(format!("unknown key '{other}' in [routing]")))
        }
    }
    Ok(())
}

fn apply_experiment_key(plan: &mut ExperimentPlan, key: &str, value: &str) -> Result<()> {
    match key {
        "models" => {
            plan.models = value
                .split(',')
                .map(|m| ModelKind::parse(m.trim()))
                .collect::<Result<_>>()?;
        }
        "speed_points" => {
            plan.speed_points = value
                .split(',')
                .map(|v| parse_num("speed_points", v.trim()))
                .collect::<Result<_>>()?;
        }
        "seeds" => plan.seeds = parse_num(key, value)?,
        "outputs" => plan.outputs = OutputKind::parse(value)?,
        other => {
            return Err(Error::config(format!(
                "unknown key '{other}' in [experiment]"
            )))
        }
    }
    Ok(())
}
