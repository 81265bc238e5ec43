//! Deterministic fixed-step closed-loop simulator for a swarm of constant-speed
//! 3D unicycles tracking a shared desired attitude.
//!
//! Each step follows the same order: every agent's control is evaluated from
//! one immutable snapshot of the swarm and of `R_d`, all agents are moved,
//! and then the desired attitude is advanced (in source-seeking mode from
//! the new swarm snapshot). Attitudes are propagated with the exact
//! exponential for the piecewise-constant rate; positions use the heading
//! at the half step.

mod config;

pub use config::*;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, UnitSphere};

use crate::attitude::{
    attitude_error, control_full_ff, control_known_ff, heading_alignment_delta, DesiredAttitudeRate,
};
use crate::deployment::{
    ascending_direction, deployment_stats, heading_field, heading_tolerance, plan_gains,
    DeploymentStats, GainPlan,
};
use crate::error::{Error, Result};
use crate::fields::Field;
use crate::so3::{
    exp_so3, hat, log_so3, project_to_so3, Rotation, RotationVector, SkewMatrix, UnitVector3,
};

/// Position and attitude of one agent. The body x-axis is the direction of travel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RobotState {
    pub position: Vector3<f64>,
    pub attitude: Rotation,
}

/// Advances one agent by `dt` under a constant body rate `omega`.
pub fn step_agent(state: &RobotState, omega: &SkewMatrix, speed: f64, dt: f64) -> RobotState {
    let w = omega.vee();
    let midpoint = state.attitude * exp_so3(&RotationVector::new(w * (0.5 * dt)));
    RobotState {
        position: state.position + midpoint.column(0) * (speed * dt),
        attitude: state.attitude * exp_so3(&RotationVector::new(w * dt)),
    }
}

/// Rotates `prev` by the smallest rotation that carries its first column onto `x_d`.
///
/// The result has first column `x_d` and varies continuously with `x_d`,
/// so a smoothly moving heading never flips the completed frame.
pub fn complete_frame(x_d: &UnitVector3, prev: &Rotation) -> Result<Rotation> {
    let a = prev.column(0);
    let b = x_d.vector();
    if (a + b).norm() < 1e-6 {
        return Err(Error::AntipodalHeading);
    }
    let cross = a.cross(b);
    let sin = cross.norm();
    if sin == 0.0 {
        return Ok(*prev);
    }
    let angle = sin.atan2(a.dot(b));
    let q = exp_so3(&RotationVector::new(cross * (angle / sin)));
    Ok(q * *prev)
}

/// The shared desired attitude `R_d(t)` and its rate decomposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesiredAttitudeTrajectory {
    pub mode: DesiredMode,
    pub rate_frame: RateFrame,
    pub rotation: Rotation,
    /// Configured known rate `w^k`.
    pub omega_known: Vector3<f64>,
    /// Configured unknown rate `w^u` (prescribed mode).
    pub omega_unknown: Vector3<f64>,
    pub omega_max_declared: f64,
    /// Body-frame known part of the rate realized over the last step.
    pub realized_known: Vector3<f64>,
    /// Body-frame unknown part of the rate realized over the last step.
    pub realized_unknown: Vector3<f64>,
}

impl DesiredAttitudeTrajectory {
    pub fn new(config: &DesiredConfig, rotation: Rotation) -> Self {
        let mut traj = DesiredAttitudeTrajectory {
            mode: config.mode,
            rate_frame: config.rate_frame,
            rotation,
            omega_known: Vector3::from(config.omega_known),
            omega_unknown: Vector3::from(config.omega_unknown),
            omega_max_declared: config.omega_max,
            realized_known: Vector3::zeros(),
            realized_unknown: Vector3::zeros(),
        };
        traj.realized_known = traj.known_rate();
        traj.realized_unknown = traj.unknown_rate();
        traj
    }

    /// Body-frame known rate at the current `R_d`; this is all the controller sees.
    pub fn known_rate(&self) -> Vector3<f64> {
        match (self.mode, self.rate_frame) {
            (DesiredMode::Constant, _) => Vector3::zeros(),
            (_, RateFrame::Literal) => self.rotation.matrix().transpose() * self.omega_known,
            (_, RateFrame::Body) => self.omega_known,
        }
    }

    /// Body-frame unknown rate: the configured one in prescribed mode, the
    /// last realized one in source-seeking mode.
    pub fn unknown_rate(&self) -> Vector3<f64> {
        match self.mode {
            DesiredMode::Constant => Vector3::zeros(),
            DesiredMode::PrescribedRates => self.omega_unknown,
            DesiredMode::SourceSeeking => self.realized_unknown,
        }
    }

    pub fn heading(&self) -> UnitVector3 {
        self.rotation.heading()
    }

    /// `true` when the last realized unknown rate broke the declared bound.
    pub fn exceeds_declared_bound(&self) -> bool {
        self.realized_unknown.norm() > self.omega_max_declared * (1.0 + 1e-12) + 1e-12
    }
}

/// Advances `R_d` by `dt`.
///
/// Prescribed rates compose the exponential of the total body rate. In
/// source-seeking mode the frame is first rolled by the known rate and then
/// re-aimed at `heading` with [`complete_frame`]; whatever rotation that
/// re-aiming adds is reported as the unknown part.
pub fn advance_desired(
    traj: &DesiredAttitudeTrajectory,
    dt: f64,
    heading: Option<&UnitVector3>,
) -> Result<DesiredAttitudeTrajectory> {
    let mut next = *traj;
    let known = traj.known_rate();
    match traj.mode {
        DesiredMode::Constant => {
            next.realized_known = Vector3::zeros();
            next.realized_unknown = Vector3::zeros();
        }
        DesiredMode::PrescribedRates => {
            let total = known + traj.omega_unknown;
            next.rotation = traj.rotation * exp_so3(&RotationVector::new(total * dt));
            next.realized_known = known;
            next.realized_unknown = traj.omega_unknown;
        }
        DesiredMode::SourceSeeking => {
            let heading = heading
                .ok_or_else(|| Error::Config("source-seeking update needs a heading".into()))?;
            let rolled = traj.rotation * exp_so3(&RotationVector::new(known * dt));
            next.rotation = complete_frame(heading, &rolled)?;
            let total = *log_so3(&(traj.rotation.transpose() * next.rotation))?.vector() / dt;
            next.realized_known = known;
            next.realized_unknown = total - known;
        }
    }
    Ok(next)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AgentRecord {
    pub position: Vector3<f64>,
    pub attitude: Rotation,
    /// Attitude error angle `μ_{R_e}`.
    pub mu: f64,
    /// Heading alignment error `δ`.
    pub delta: f64,
}

/// Everything logged at one time step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub agents: Vec<AgentRecord>,
    pub desired: Rotation,
    pub centroid: Vector3<f64>,
    pub lambda_min: f64,
    pub radius: f64,
    pub field_at_centroid: Option<f64>,
    pub source_distance: Option<f64>,
    /// `max_{i,j} |p_ij(t) - p_ij(0)|`.
    pub max_pair_displacement: f64,
    /// `ε(t) = max_i |x_i(t) - x_i(0)|`.
    pub max_offset_change: f64,
    pub known_rate_norm: f64,
    pub unknown_rate_norm: f64,
    pub unknown_rate_exceeds_bound: bool,
    /// The ascending-direction estimate vanished and the previous heading was kept.
    pub heading_held: bool,
    /// `min_i tr(R_e,i) + 1`; stays positive away from the log singularity.
    pub min_trace_margin: f64,
}

fn sample_in_ball(rng: &mut ChaCha8Rng, radius: f64) -> Vector3<f64> {
    let dir: [f64; 3] = UnitSphere.sample(rng);
    let r = radius * rng.random::<f64>().cbrt();
    Vector3::from(dir) * r
}

/// Haar-uniform rotation vector with angle at most `radius` (< π).
/// The angle density on SO(3) is proportional to `1 - cos θ`.
fn sample_rotation_in_ball(rng: &mut ChaCha8Rng, radius: f64) -> Vector3<f64> {
    let axis: [f64; 3] = UnitSphere.sample(rng);
    if radius == 0.0 {
        return Vector3::zeros();
    }
    let peak = 1.0 - radius.cos();
    loop {
        let theta = radius * rng.random::<f64>();
        if rng.random::<f64>() * peak <= 1.0 - theta.cos() {
            return Vector3::from(axis) * theta;
        }
    }
}

fn sample_positions(config: &SimConfig, rng: &mut ChaCha8Rng) -> Vec<Vector3<f64>> {
    match &config.placement {
        PlacementConfig::Explicit { positions } => {
            positions.iter().map(|p| Vector3::from(*p)).collect()
        }
        PlacementConfig::RandomBall { center, radius } => (0..config.swarm.agents)
            .map(|_| Vector3::from(*center) + sample_in_ball(rng, *radius))
            .collect(),
    }
}

/// Initial positions exactly as [`Simulation::new`] places them.
pub fn initial_positions(config: &SimConfig) -> Result<Vec<Vector3<f64>>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.integration.seed);
    Ok(sample_positions(config, &mut rng))
}

/// A running closed-loop simulation.
pub struct Simulation {
    config: SimConfig,
    field: Option<Field>,
    agents: Vec<RobotState>,
    initial_positions: Vec<Vector3<f64>>,
    stats0: DeploymentStats,
    desired: DesiredAttitudeTrajectory,
    k_w: f64,
    gains: Option<GainPlan>,
    step: usize,
    steps: usize,
    noise: Option<(ChaCha8Rng, Normal<f64>)>,
    heading_held: bool,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.integration.seed);
        let positions = sample_positions(&config, &mut rng);
        let stats0 = deployment_stats(&positions)?;
        let field = config.field.clone().map(Field::new).transpose()?;

        let noise = if config.sensing.noise_std > 0.0 {
            let mut noise_rng = ChaCha8Rng::seed_from_u64(config.integration.seed);
            noise_rng.set_stream(1);
            let normal = Normal::new(0.0, config.sensing.noise_std)
                .map_err(|e| Error::param("sensing.noise_std", e.to_string()))?;
            Some((noise_rng, normal))
        } else {
            None
        };

        let mut sim = Simulation {
            k_w: 0.0,
            gains: None,
            agents: Vec::new(),
            desired: DesiredAttitudeTrajectory::new(
                &config.desired,
                exp_so3(&RotationVector::new(Vector3::from(config.desired.initial))),
            ),
            steps: config.steps(),
            config,
            field,
            initial_positions: positions.clone(),
            stats0,
            step: 0,
            noise,
            heading_held: false,
        };

        if sim.config.desired.mode == DesiredMode::SourceSeeking {
            let heading = sim.estimate_heading(&positions)?;
            sim.desired.rotation = complete_frame(&heading, &sim.desired.rotation)?;
            sim.desired.realized_known = sim.desired.known_rate();
            sim.desired.realized_unknown = Vector3::zeros();
        }

        let r_d0 = sim.desired.rotation;
        let offsets: Vec<Vector3<f64>> = match &sim.config.attitudes {
            AttitudeConfig::Ball { radius } => (0..sim.config.swarm.agents)
                .map(|_| sample_rotation_in_ball(&mut rng, *radius))
                .collect(),
            AttitudeConfig::Explicit { rotation_vectors } => {
                rotation_vectors.iter().map(|v| Vector3::from(*v)).collect()
            }
        };
        sim.agents = positions
            .iter()
            .zip(&offsets)
            .map(|(p, tau)| RobotState {
                position: *p,
                attitude: r_d0 * exp_so3(&RotationVector::new(*tau)),
            })
            .collect();

        match sim.config.gain {
            GainConfig::Manual { k_w } => sim.k_w = k_w,
            GainConfig::Planned { select } => {
                let plan = plan_gains(
                    sim.config.desired.omega_max,
                    sim.config.controller.mu_star(),
                    sim.config.swarm.speed,
                    &sim.stats0,
                )?;
                sim.k_w = match select {
                    GainSelect::Max => plan.k_w,
                    GainSelect::K1 => plan.k1,
                    GainSelect::K2 => plan.k2,
                };
                sim.gains = Some(plan);
                if !(sim.k_w > 0.0) {
                    return Err(Error::param("gain", "selected planned gain is zero"));
                }
            }
        }
        Ok(sim)
    }

    /// `m_d` from the field samples at the given positions.
    fn estimate_heading(&mut self, positions: &[Vector3<f64>]) -> Result<UnitVector3> {
        let field = self
            .field
            .as_ref()
            .ok_or_else(|| Error::Config("source seeking needs a field".into()))?;
        let stats = deployment_stats(positions)?;
        let mut samples: Vec<f64> = positions.iter().map(|p| field.eval(p)).collect();
        if let Some((rng, normal)) = self.noise.as_mut() {
            for s in samples.iter_mut() {
                *s += normal.sample(rng);
            }
        }
        let l = ascending_direction(&samples, &stats)?;
        heading_field(&l, heading_tolerance(&samples))
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn k_w(&self) -> f64 {
        self.k_w
    }

    pub fn gains(&self) -> Option<&GainPlan> {
        self.gains.as_ref()
    }

    pub fn initial_stats(&self) -> &DeploymentStats {
        &self.stats0
    }

    pub fn field(&self) -> Option<&Field> {
        self.field.as_ref()
    }

    pub fn agents(&self) -> &[RobotState] {
        &self.agents
    }

    pub fn desired(&self) -> &DesiredAttitudeTrajectory {
        &self.desired
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn total_steps(&self) -> usize {
        self.steps
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.config.integration.dt
    }

    pub fn is_finished(&self) -> bool {
        self.step >= self.steps
    }

    /// Snapshot of the current state.
    pub fn record(&self) -> Result<StepRecord> {
        let r_d = self.desired.rotation;
        let m_d = r_d.heading();
        let mut agents = Vec::with_capacity(self.agents.len());
        let mut min_trace_margin = f64::INFINITY;
        for a in &self.agents {
            let err = attitude_error(&r_d, &a.attitude)?;
            min_trace_margin = min_trace_margin.min(err.rotation.trace() + 1.0);
            agents.push(AgentRecord {
                position: a.position,
                attitude: a.attitude,
                mu: err.mu,
                delta: heading_alignment_delta(&a.attitude.heading(), &m_d),
            });
        }
        let positions: Vec<Vector3<f64>> = self.agents.iter().map(|a| a.position).collect();
        let stats = deployment_stats(&positions)?;
        let shifts: Vec<Vector3<f64>> = positions
            .iter()
            .zip(&self.initial_positions)
            .map(|(p, p0)| p - p0)
            .collect();
        let mut max_pair_displacement = 0.0f64;
        for i in 0..shifts.len() {
            for j in i + 1..shifts.len() {
                max_pair_displacement = max_pair_displacement.max((shifts[i] - shifts[j]).norm());
            }
        }
        let max_offset_change = stats
            .offsets
            .iter()
            .zip(&self.stats0.offsets)
            .map(|(x, x0)| (x - x0).norm())
            .fold(0.0, f64::max);
        Ok(StepRecord {
            step: self.step,
            t: self.time(),
            agents,
            desired: r_d,
            centroid: stats.centroid,
            lambda_min: stats.lambda_min,
            radius: stats.radius,
            field_at_centroid: self.field.as_ref().map(|f| f.eval(&stats.centroid)),
            source_distance: self
                .field
                .as_ref()
                .map(|f| (stats.centroid - f.source()).norm()),
            max_pair_displacement,
            max_offset_change,
            known_rate_norm: self.desired.realized_known.norm(),
            unknown_rate_norm: self.desired.realized_unknown.norm(),
            unknown_rate_exceeds_bound: self.desired.exceeds_declared_bound(),
            heading_held: self.heading_held,
            min_trace_margin,
        })
    }

    /// Body-rate command of every agent, from the current snapshot.
    pub fn controls(&self) -> Result<Vec<SkewMatrix>> {
        let r_d = self.desired.rotation;
        let known = hat(&self.desired.known_rate());
        let rate = DesiredAttitudeRate::new(known, self.desired.omega_max_declared)?;
        let full = hat(&(self.desired.known_rate() + self.desired.unknown_rate()));
        self.agents
            .iter()
            .map(|a| {
                let r_e = r_d.transpose() * a.attitude;
                match self.config.controller.law {
                    ControlLaw::KnownFeedForward => control_known_ff(&r_e, &rate, self.k_w),
                    ControlLaw::FullFeedForward => control_full_ff(&r_e, &full, self.k_w),
                }
            })
            .collect()
    }

    /// One integration step.
    pub fn advance(&mut self) -> Result<()> {
        let dt = self.config.integration.dt;
        let speed = self.config.swarm.speed;
        let controls = self.controls()?;
        for (agent, omega) in self.agents.iter_mut().zip(&controls) {
            *agent = step_agent(agent, omega, speed, dt);
        }
        self.step += 1;
        let every = self.config.integration.reproject_every;
        if every > 0 && self.step.is_multiple_of(every) {
            for agent in self.agents.iter_mut() {
                agent.attitude = project_to_so3(agent.attitude.matrix())?;
            }
        }

        let heading = if self.desired.mode == DesiredMode::SourceSeeking {
            let positions: Vec<Vector3<f64>> = self.agents.iter().map(|a| a.position).collect();
            match self.estimate_heading(&positions) {
                Ok(h) => {
                    self.heading_held = false;
                    Some(h)
                }
                Err(Error::DegenerateDirection { .. }) | Err(Error::CollocatedSwarm) => {
                    self.heading_held = true;
                    Some(self.desired.heading())
                }
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        self.desired = advance_desired(&self.desired, dt, heading.as_ref())?;
        Ok(())
    }
}

/// A run that stopped early; `records` holds everything logged before the failure.
#[derive(Debug)]
pub struct RunError {
    pub error: Error,
    pub records: Vec<StepRecord>,
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "run aborted after {} records: {}",
            self.records.len(),
            self.error
        )
    }
}

impl std::error::Error for RunError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Drives a simulation to completion, handing each record to `sink`.
pub fn run_with<F: FnMut(&StepRecord)>(sim: &mut Simulation, mut sink: F) -> Result<()> {
    loop {
        let rec = sim.record()?;
        sink(&rec);
        if sim.is_finished() {
            return Ok(());
        }
        sim.advance()?;
    }
}

/// Runs `config` and returns one record per step, `t = 0` included.
pub fn run(config: SimConfig) -> std::result::Result<Vec<StepRecord>, RunError> {
    let mut sim = Simulation::new(config).map_err(|error| RunError {
        error,
        records: Vec::new(),
    })?;
    let mut records = Vec::with_capacity(sim.total_steps() + 1);
    match run_with(&mut sim, |r| records.push(r.clone())) {
        Ok(()) => Ok(records),
        Err(error) => Err(RunError { error, records }),
    }
}
