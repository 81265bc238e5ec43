//! Scenario files: TOML documents holding run metadata plus every section of
//! a [`SimConfig`]. Unknown keys are rejected.

use std::path::Path;

use geoswarm::fields::FieldSpec;
use geoswarm::sim::{
    AttitudeConfig, ControllerSection, DesiredConfig, GainConfig, GainSelect, IntegrationConfig,
    PlacementConfig, RateFrame, SensingConfig, SimConfig, SwarmConfig,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub scenario: Metadata,
    pub swarm: SwarmConfig,
    pub integration: IntegrationConfig,
    pub controller: ControllerSection,
    pub gain: GainConfig,
    pub desired: DesiredConfig,
    pub placement: PlacementConfig,
    pub attitudes: AttitudeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSpec>,
    #[serde(default, skip_serializing_if = "is_default_sensing")]
    pub sensing: SensingConfig,
}

fn is_default_sensing(s: &SensingConfig) -> bool {
    *s == SensingConfig::default()
}

/// Command-line overrides applied on top of a scenario.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub seed: Option<u64>,
    pub rate_frame: Option<RateFrame>,
    pub gain: Option<GainSelect>,
}

impl ScenarioFile {
    /// Parses and validates a scenario.
    pub fn parse(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let scenario = Self::parse(&text).map_err(|source| CliError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        scenario.config().validate()?;
        Ok(scenario)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn config(&self) -> SimConfig {
        SimConfig {
            swarm: self.swarm.clone(),
            integration: self.integration.clone(),
            controller: self.controller.clone(),
            gain: self.gain.clone(),
            desired: self.desired.clone(),
            placement: self.placement.clone(),
            attitudes: self.attitudes.clone(),
            field: self.field.clone(),
            sensing: self.sensing.clone(),
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(dt) = o.dt {
            self.integration.dt = dt;
        }
        if let Some(t_end) = o.t_end {
            self.integration.t_end = t_end;
        }
        if let Some(seed) = o.seed {
            self.integration.seed = seed;
        }
        if let Some(frame) = o.rate_frame {
            self.desired.rate_frame = frame;
        }
        if let Some(select) = o.gain {
            self.gain = GainConfig::Planned { select };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[scenario]
name = "minimal"

[swarm]
agents = 1
speed = 1.0

[integration]
dt = 0.01
t_end = 1.0
seed = 4

[controller]
law = "known_feed_forward"
delta_star = 0.4

[gain]
mode = "manual"
k_w = 2.0

[desired]
mode = "constant"

[placement]
kind = "explicit"
positions = [[0.0, 0.0, 0.0]]

[attitudes]
kind = "ball"
radius = 1.0
"#;

    #[test]
    fn parses_minimal_scenario_with_defaults() {
        let s = ScenarioFile::parse(MINIMAL).unwrap();
        assert_eq!(s.integration.reproject_every, 1000);
        assert_eq!(s.desired.rate_frame, RateFrame::Literal);
        assert_eq!(s.controller.mu_star(), 0.4);
        s.config().validate().unwrap();
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = MINIMAL.replace("speed = 1.0", "speed = 1.0\ncolour = \"red\"");
        assert!(ScenarioFile::parse(&text).is_err());
        let text = MINIMAL.replace("radius = 1.0", "radius = 1.0\nspread = 2.0");
        assert!(ScenarioFile::parse(&text).is_err());
    }

    #[test]
    fn emit_is_idempotent() {
        let s = ScenarioFile::parse(MINIMAL).unwrap();
        let once = s.to_toml().unwrap();
        let back = ScenarioFile::parse(&once).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_toml().unwrap(), once);
    }

    #[test]
    fn overrides_replace_fields() {
        let mut s = ScenarioFile::parse(MINIMAL).unwrap();
        s.apply(&Overrides {
            dt: Some(1e-4),
            seed: Some(9),
            rate_frame: Some(RateFrame::Body),
            gain: Some(GainSelect::K2),
            ..Default::default()
        });
        assert_eq!(s.integration.dt, 1e-4);
        assert_eq!(s.integration.seed, 9);
        assert_eq!(s.desired.rate_frame, RateFrame::Body);
        assert_eq!(
            s.gain,
            GainConfig::Planned {
                select: GainSelect::K2
            }
        );
    }
}
