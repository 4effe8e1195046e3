use crate::error::{Error, Result};

/// The four supported mobility models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Random Waypoint: independent destination / speed / pause cycles.
    Rwp,
    /// Gauss-Markov: first-order autoregressive speed and direction.
    Gm,
    /// Reference Point Group Mobility: members track a group leader.
    Rpgm,
    /// Nomadic Community: members roam around a relocating anchor.
    Ncmm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Rwp, ModelKind::Gm, ModelKind::Rpgm, ModelKind::Ncmm];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Rwp => "RWP",
            ModelKind::Gm => "GM",
            ModelKind::Rpgm => "RPGM",
            ModelKind::Ncmm => "NCMM",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "RWP" => Ok(ModelKind::Rwp),
            "GM" => Ok(ModelKind::Gm),
            "RPGM" => Ok(ModelKind::Rpgm),
            "NCMM" => Ok(ModelKind::Ncmm),
            other => Err(Error::config(format!(
                "unknown model '{other}' (expected RWP, GM, RPGM or NCMM)"
            ))),
        }
    }

    /// Group models correlate movement within groups; entity models don't.
    pub fn is_group_model(self) -> bool {
        matches!(self, ModelKind::Rpgm | ModelKind::Ncmm)
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Full parameter set for one scenario generation run.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub model: ModelKind,
    pub node_count: usize,
    pub area_width: f64,
    pub area_height: f64,
    /// Lower speed bound, m/s. Strictly positive by default to avoid the
    /// random-waypoint average-speed decay where near-zero draws dominate.
    pub min_speed: f64,
    pub max_speed: f64,
    pub max_pause: f64,
    pub duration: f64,
    pub radio_range: f64,
    /// Group models only; the last group may be smaller.
    pub group_size: usize,
    /// Gauss-Markov memory parameter in [0, 1].
    pub gm_alpha: f64,
    pub gm_update_interval: f64,
    /// Max distance between an RPGM member and its leader, meters.
    pub rpgm_max_deviation: f64,
    /// Radius of the roaming disc around an NCMM anchor, meters.
    pub ncmm_roam_radius: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            model: ModelKind::Rwp,
            node_count: 90,
            area_width: 1000.0,
            area_height: 1000.0,
            min_speed: 0.5,
            max_speed: 20.0,
            max_pause: 10.0,
            duration: 900.0,
            radio_range: 75.0,
            group_size: 5,
            gm_alpha: 0.75,
            gm_update_interval: 1.0,
            rpgm_max_deviation: 50.0,
            ncmm_roam_radius: 100.0,
            seed: 1,
        }
    }
}

impl ScenarioConfig {
    /// Check parameter sanity common to all models.
    pub fn validate(&self) -> Result<()> {
        if self.node_count < 1 {
            return Err(Error::config("node_count must be at least 1"));
        }
        if self.area_width <= 0.0 || self.area_height <= 0.0 {
            return Err(Error::config("area dimensions must be positive"));
        }
        if self.max_speed <= 0.0 {
            return Err(Error::config("max_speed must be positive"));
        }
        if self.min_speed < 0.0 || self.min_speed > self.max_speed {
            return Err(Error::config("require 0 <= min_speed <= max_speed"));
        }
        if self.max_pause < 0.0 {
            return Err(Error::config("max_pause must be non-negative"));
        }
        if self.duration <= 0.0 {
            return Err(Error::config("duration must be positive"));
        }
        if self.radio_range <= 0.0 {
            return Err(Error::config("radio_range must be positive"));
        }
        if !(0.0..=1.0).contains(&self.gm_alpha) {
            return Err(Error::config("gm_alpha must lie in [0, 1]"));
        }
        if self.gm_update_interval <= 0.0 {
            return Err(Error::config("gm_update_interval must be positive"));
        }
        if self.rpgm_max_deviation < 0.0 {
            return Err(Error::config("rpgm_max_deviation must be non-negative"));
        }
        if self.ncmm_roam_radius < 0.0 {
            return Err(Error::config("ncmm_roam_radius must be non-negative"));
        }
        if self.model.is_group_model() {
            if self.group_size < 1 {
                return Err(Error::config("group_size must be at least 1"));
            }
            if self.group_size > self.node_count {
                return Err(Error::config(format!(
                    "group_size {} exceeds node_count {}",
                    self.group_size, self.node_count
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        assert!(ScenarioConfig::default().validate().is_ok());
    }

    #[test]
    fn model_parse_round_trip() {
        for m in ModelKind::ALL {
            assert_eq!(ModelKind::parse(m.name()).unwrap(), m);
        }
        assert!(ModelKind::parse("rwp").is_err());
        assert!(ModelKind::parse("WALK").is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut c = ScenarioConfig::default();
        c.max_speed = 0.0;
        assert!(c.validate().is_err());

        let mut c = ScenarioConfig::default();
        c.min_speed = 30.0;
        assert!(c.validate().is_err());

        let mut c = ScenarioConfig::default();
        c.area_width = 0.0;
        assert!(c.validate().is_err());

        let mut c = ScenarioConfig {
            model: ModelKind::Rpgm,
            ..ScenarioConfig::default()
        };
        c.group_size = 200;
        assert!(c.validate().is_err());

        let mut c = ScenarioConfig::default();
        c.gm_alpha = 1.5;
        assert!(c.validate().is_err());
    }
}
