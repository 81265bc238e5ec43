//! Fixtures shared by the benchmarks.

use geoswarm::sim::{
    AttitudeConfig, ControlLaw, ControllerSection, DesiredConfig, DesiredMode, GainConfig,
    IntegrationConfig, PlacementConfig, RateFrame, SensingConfig, SimConfig, SwarmConfig,
};
use geoswarm::{FieldSpec, Vector3};

/// Four agents with `λ_min(P) = 0.07` and `D = 3.87`.
pub fn fig2_positions() -> Vec<Vector3<f64>> {
    let (a, c) = (3.0, 0.07f64.sqrt());
    let b = (3.87f64 * 3.87 - a * a - c * c).sqrt();
    vec![
        Vector3::new(a, b, c),
        Vector3::new(a, -b, -c),
        Vector3::new(-a, b, -c),
        Vector3::new(-a, -b, c),
    ]
}

fn base(agents: usize, speed: f64, dt: f64, k_w: f64) -> SimConfig {
    SimConfig {
        swarm: SwarmConfig { agents, speed },
        integration: IntegrationConfig {
            dt,
            t_end: 1e9 * dt,
            seed: 1,
            reproject_every: 1000,
        },
        controller: ControllerSection {
            law: ControlLaw::KnownFeedForward,
            delta_star: 0.4,
            mu_star: None,
        },
        gain: GainConfig::Manual { k_w },
        desired: DesiredConfig {
            mode: DesiredMode::PrescribedRates,
            rate_frame: RateFrame::Literal,
            initial: [0.0; 3],
            omega_known: [std::f64::consts::FRAC_PI_2, 0.0, 0.0],
            omega_unknown: [0.0, 0.0, -std::f64::consts::PI / 20.0],
            omega_max: std::f64::consts::PI / 20.0,
        },
        placement: PlacementConfig::Explicit {
            positions: fig2_positions().iter().map(|p| [p.x, p.y, p.z]).collect(),
        },
        attitudes: AttitudeConfig::Ball { radius: 2.0 },
        field: None,
        sensing: SensingConfig::default(),
    }
}

/// Prescribed-rate alignment run with four agents.
pub fn alignment_config() -> SimConfig {
    base(4, 0.6, 0.01, 0.5554)
}

/// Source seeking with `agents` robots on a gaussian field.
pub fn seeking_config(agents: usize) -> SimConfig {
    let mut cfg = base(agents, 15.0, 1e-3, 2.777);
    cfg.desired.mode = DesiredMode::SourceSeeking;
    cfg.desired.rate_frame = RateFrame::Body;
    cfg.desired.omega_known = [std::f64::consts::PI, 0.0, 0.0];
    cfg.desired.omega_unknown = [0.0; 3];
    cfg.desired.omega_max = std::f64::consts::FRAC_PI_4;
    cfg.placement = PlacementConfig::RandomBall {
        center: [-120.0, 40.0, 30.0],
        radius: 8.0,
    };
    cfg.attitudes = AttitudeConfig::Ball { radius: 1.5 };
    cfg.field = Some(FieldSpec::Gaussian {
        source: [0.0; 3],
        amplitude: 100.0,
        covariance: [[2500.0, 0.0, 0.0], [0.0, 1600.0, 0.0], [0.0, 0.0, 2025.0]],
    });
    cfg
}
