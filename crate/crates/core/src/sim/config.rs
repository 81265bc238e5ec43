//! Simulation configuration. Every section maps one-to-one onto a table of
//! the scenario file format, so unknown keys are rejected at parse time.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::FieldSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwarmConfig {
    /// Number of agents N.
    pub agents: usize,
    /// Constant forward speed s, space units per time unit.
    pub speed: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Seeds initial-condition sampling and the optional sensing noise.
    pub seed: u64,
    /// Re-project agent attitudes onto SO(3) every this many steps (0 = never).
    #[serde(default = "default_reproject_every")]
    pub reproject_every: usize,
}

fn default_reproject_every() -> usize {
    1000
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlLaw {
    /// Feed-forward of the known rate only.
    KnownFeedForward,
    /// Feed-forward of the full desired rate; only meaningful when the
    /// simulator knows the whole rate (constant or prescribed modes).
    FullFeedForward,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSection {
    pub law: ControlLaw,
    /// Heading tolerance δ*, radians.
    pub delta_star: f64,
    /// Attitude error bound μ*, radians; defaults to `delta_star`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_star: Option<f64>,
}

impl ControllerSection {
    pub fn mu_star(&self) -> f64 {
        self.mu_star.unwrap_or(self.delta_star)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainSelect {
    /// `max(k1, k2)`.
    Max,
    /// Bounded-rate gain only.
    K1,
    /// Non-degeneracy gain only.
    K2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum GainConfig {
    Manual { k_w: f64 },
    Planned { select: GainSelect },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesiredMode {
    Constant,
    PrescribedRates,
    SourceSeeking,
}

/// How the configured known rate `w^k` enters the body rate of `R_d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateFrame {
    /// Body rate `R_dᵀ w^k + w^u`: `w^k` is a world-frame vector.
    Literal,
    /// Body rate `w^k + w^u`: both vectors are already in the body frame of `R_d`.
    Body,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesiredConfig {
    pub mode: DesiredMode,
    #[serde(default = "default_rate_frame")]
    pub rate_frame: RateFrame,
    /// Initial desired attitude as a rotation vector.
    #[serde(default)]
    pub initial: [f64; 3],
    /// Known rate `w^k`, rad per time unit.
    #[serde(default)]
    pub omega_known: [f64; 3],
    /// Unknown rate `w^u` (prescribed mode only), hidden from the controller.
    #[serde(default)]
    pub omega_unknown: [f64; 3],
    /// Declared bound `ω_max` on the unknown rate.
    #[serde(default)]
    pub omega_max: f64,
}

fn default_rate_frame() -> RateFrame {
    RateFrame::Literal
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlacementConfig {
    Explicit {
        positions: Vec<[f64; 3]>,
    },
    /// Uniform in a ball.
    RandomBall {
        center: [f64; 3],
        radius: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AttitudeConfig {
    /// Haar-uniform in the geodesic ball of this radius about `R_d(0)`.
    Ball { radius: f64 },
    /// Rotation vectors relative to `R_d(0)`, one per agent.
    Explicit { rotation_vectors: Vec<[f64; 3]> },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensingConfig {
    /// Standard deviation of additive noise on field samples.
    #[serde(default)]
    pub noise_std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
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

fn finite3(name: &'static str, v: &[f64; 3]) -> Result<()> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::param(name, "components must be finite"))
    }
}

impl SimConfig {
    pub fn steps(&self) -> usize {
        (self.integration.t_end / self.integration.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.swarm.agents;
        if n == 0 {
            return Err(Error::param("swarm.agents", "must be >= 1"));
        }
        if !(self.swarm.speed > 0.0 && self.swarm.speed.is_finite()) {
            return Err(Error::param("swarm.speed", "must be > 0"));
        }
        let ic = &self.integration;
        if !(ic.dt > 0.0 && ic.dt.is_finite()) {
            return Err(Error::param("integration.dt", "must be > 0"));
        }
        if !(ic.t_end >= ic.dt && ic.t_end.is_finite()) {
            return Err(Error::param("integration.t_end", "must be >= dt"));
        }
        let c = &self.controller;
        let mu_star = c.mu_star();
        if !(mu_star > 0.0 && mu_star <= c.delta_star && c.delta_star <= std::f64::consts::PI) {
            return Err(Error::param(
                "controller.mu_star",
                "need 0 < mu_star <= delta_star <= pi",
            ));
        }
        if let GainConfig::Manual { k_w } = self.gain {
            if !(k_w > 0.0 && k_w.is_finite()) {
                return Err(Error::param("gain.k_w", "must be > 0"));
            }
        }
        let d = &self.desired;
        finite3("desired.initial", &d.initial)?;
        finite3("desired.omega_known", &d.omega_known)?;
        finite3("desired.omega_unknown", &d.omega_unknown)?;
        if !(d.omega_max >= 0.0 && d.omega_max.is_finite()) {
            return Err(Error::param("desired.omega_max", "must be >= 0"));
        }
        match d.mode {
            DesiredMode::SourceSeeking => {
                if self.field.is_none() {
                    return Err(Error::Config(
                        "source_seeking mode needs a [field] table".into(),
                    ));
                }
                if c.law == ControlLaw::FullFeedForward {
                    return Err(Error::Config(
                        "full_feed_forward is unavailable in source_seeking mode: the heading rate is unknown".into(),
                    ));
                }
                if d.omega_unknown != [0.0; 3] {
                    return Err(Error::Config(
                        "omega_unknown is induced by the field in source_seeking mode and must not be set".into(),
                    ));
                }
            }
            DesiredMode::Constant => {
                if d.omega_known != [0.0; 3] || d.omega_unknown != [0.0; 3] {
                    return Err(Error::Config("constant mode takes no rates".into()));
                }
            }
            DesiredMode::PrescribedRates => {}
        }
        match &self.placement {
            PlacementConfig::Explicit { positions } => {
                if positions.len() != n {
                    return Err(Error::Config(format!(
                        "placement lists {} positions for {} agents",
                        positions.len(),
                        n
                    )));
                }
                for p in positions {
                    finite3("placement.positions", p)?;
                }
            }
            PlacementConfig::RandomBall { center, radius } => {
                finite3("placement.center", center)?;
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::param("placement.radius", "must be > 0"));
                }
            }
        }
        match &self.attitudes {
            AttitudeConfig::Ball { radius } => {
                if !(*radius >= 0.0 && *radius < std::f64::consts::PI) {
                    return Err(Error::param("attitudes.radius", "must lie in [0, pi)"));
                }
            }
            AttitudeConfig::Explicit { rotation_vectors } => {
                if rotation_vectors.len() != n {
                    return Err(Error::Config(format!(
                        "attitudes lists {} rotation vectors for {} agents",
                        rotation_vectors.len(),
                        n
                    )));
                }
                for v in rotation_vectors {
                    finite3("attitudes.rotation_vectors", v)?;
                    if Vector3::from(*v).norm() >= std::f64::consts::PI {
                        return Err(Error::param(
                            "attitudes.rotation_vectors",
                            "angles must be < pi",
                        ));
                    }
                }
            }
        }
        if !(self.sensing.noise_std >= 0.0 && self.sensing.noise_std.is_finite()) {
            return Err(Error::param("sensing.noise_std", "must be >= 0"));
        }
        Ok(())
    }
}
