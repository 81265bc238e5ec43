//! Run summary, accumulated record by record. Every quantity here can be
//! recomputed from the step table plus the gains in its preamble.

use std::f64::consts::PI;

use geoswarm::sim::{DesiredMode, Simulation, StepRecord};
use serde::Serialize;

/// Lower end of the decay-fit window for `μ`.
pub const DECAY_FIT_FLOOR: f64 = 1e-6;
/// Allowed relative error of the fitted decay slope against `-k_w`.
pub const DECAY_SLOPE_TOL: f64 = 0.02;
/// Transient fits must be at least this fraction of `-k_w` steep.
pub const TRANSIENT_SLOPE_FRACTION: f64 = 0.9;
/// Slack on the heading band after entry, in units of `dt k_w`.
pub const BAND_SLACK_STEPS: f64 = 5.0;
pub const WEYL_TOL: f64 = 1e-9;

/// Run-level constants the summary is judged against.
#[derive(Clone, Debug, Serialize)]
pub struct RunMeta {
    pub scenario: String,
    pub agents: usize,
    pub speed: f64,
    pub dt: f64,
    pub k_w: f64,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub epsilon_max: Option<f64>,
    pub mu_star: f64,
    pub delta_star: f64,
    pub omega_max: f64,
    pub constant_target: bool,
    pub source_seeking: bool,
}

impl RunMeta {
    pub fn from_simulation(name: &str, sim: &Simulation) -> Self {
        let cfg = sim.config();
        RunMeta {
            scenario: name.to_string(),
            agents: cfg.swarm.agents,
            speed: cfg.swarm.speed,
            dt: cfg.integration.dt,
            k_w: sim.k_w(),
            k1: sim.gains().map(|g| g.k1),
            k2: sim.gains().map(|g| g.k2),
            epsilon_max: sim.gains().map(|g| g.epsilon_max),
            mu_star: cfg.controller.mu_star(),
            delta_star: cfg.controller.delta_star,
            omega_max: cfg.desired.omega_max,
            constant_target: cfg.desired.mode == DesiredMode::Constant,
            source_seeking: cfg.desired.mode == DesiredMode::SourceSeeking,
        }
    }

    /// Preamble lines for the step table.
    pub fn preamble(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_else(|| "-".into());
        vec![
            format!("scenario: {}", self.scenario),
            format!(
                "agents: {}  speed: {}  dt: {}",
                self.agents, self.speed, self.dt
            ),
            format!(
                "k_w: {}  k1: {}  k2: {}  epsilon_max: {}",
                self.k_w,
                opt(self.k1),
                opt(self.k2),
                opt(self.epsilon_max)
            ),
            format!(
                "mu_star: {}  delta_star: {}  omega_max: {}",
                self.mu_star, self.delta_star, self.omega_max
            ),
        ]
    }
}

/// Least-squares line through `(t, ln μ)`.
#[derive(Clone, Debug, Default)]
struct LogLinearFit {
    n: f64,
    st: f64,
    sy: f64,
    stt: f64,
    sty: f64,
    closed: bool,
}

impl LogLinearFit {
    /// Adds a point while `inside` holds; the window closes the first time it does not.
    fn offer(&mut self, t: f64, mu: f64, inside: bool) {
        if self.closed {
            return;
        }
        if !inside || mu <= 0.0 {
            self.closed = true;
            return;
        }
        let y = mu.ln();
        self.n += 1.0;
        self.st += t;
        self.sy += y;
        self.stt += t * t;
        self.sty += t * y;
    }

    fn slope(&self) -> Option<f64> {
        if self.n < 3.0 {
            return None;
        }
        let denom = self.n * self.stt - self.st * self.st;
        (denom > 0.0).then(|| (self.n * self.sty - self.st * self.sy) / denom)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AgentSummary {
    pub initial_mu: f64,
    pub final_mu: f64,
    pub final_delta: f64,
    /// Slope of `ln μ` over the window `μ ∈ [1e-6, μ(0)]`.
    pub decay_slope: Option<f64>,
    pub decay_slope_rel_error: Option<f64>,
    pub decay_fit_points: usize,
    /// Slope of `ln μ` while `μ > μ*`.
    pub transient_slope: Option<f64>,
    pub transient_fit_points: usize,
    /// First time `δ <= δ*`.
    pub delta_entry_time: Option<f64>,
    pub max_delta_after_entry: Option<f64>,
    /// First time `μ < μ*`.
    pub mu_entry_time: Option<f64>,
    /// Steps where `μ > μ*` and `μ` still grew.
    pub lyapunov_increases: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SourceSummary {
    pub initial_distance: f64,
    pub final_distance: f64,
    /// Time at which every agent has had `μ < μ*` at least once.
    pub aligned_at: Option<f64>,
    /// First time after alignment with `|p_c - p_σ| <= 2 D`.
    pub reached_at: Option<f64>,
    /// Steps in the monitored window where the distance grew by more than `s dt`.
    pub increases_over_tolerance: usize,
    /// Steps in the monitored window where the distance grew at all.
    pub increases: usize,
    pub max_increase: f64,
    pub monitored_steps: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Flags {
    pub decay_slope_within_tolerance: Option<bool>,
    pub transient_exponential: Option<bool>,
    pub delta_enters_and_stays_in_band: bool,
    pub delta_final_in_band: bool,
    /// Only defined for deployments that start non-degenerate.
    pub lambda_min_positive: Option<bool>,
    pub pair_displacement_within_bound: bool,
    pub weyl_chain_holds: bool,
    pub trace_guard_holds: bool,
    pub lyapunov_monotone: bool,
    pub source_distance_monotone: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SummaryReport {
    pub meta: RunMeta,
    pub completed: bool,
    pub abort_reason: Option<String>,
    pub records: usize,
    pub t_final: f64,
    pub agents: Vec<AgentSummary>,
    pub lambda_min_initial: f64,
    pub lambda_min_min: f64,
    pub lambda_min_final: f64,
    pub radius_initial: f64,
    pub max_pair_displacement: f64,
    pub pair_displacement_bound: f64,
    pub pair_displacement_violations: usize,
    pub weyl_min_margin: f64,
    pub weyl_violations: usize,
    pub max_unknown_rate: f64,
    pub unknown_rate_violations: usize,
    pub heading_held_steps: usize,
    pub min_trace_margin: f64,
    pub source: Option<SourceSummary>,
    pub flags: Flags,
}

struct AgentAcc {
    decay: LogLinearFit,
    transient: LogLinearFit,
    initial_mu: f64,
    last_mu: f64,
    last_delta: f64,
    delta_entry: Option<f64>,
    max_delta_after: f64,
    mu_entry: Option<f64>,
    increases: usize,
}

struct SourceAcc {
    initial: f64,
    last: f64,
    aligned_at: Option<f64>,
    reached_at: Option<f64>,
    over_tol: usize,
    increases: usize,
    max_increase: f64,
    monitored: usize,
}

pub struct SummaryBuilder {
    meta: RunMeta,
    agents: Vec<AgentAcc>,
    records: usize,
    t_final: f64,
    lambda0: f64,
    radius0: f64,
    lambda_min: f64,
    lambda_last: f64,
    max_pair: f64,
    pair_violations: usize,
    weyl_min_margin: f64,
    weyl_violations: usize,
    max_unknown: f64,
    unknown_violations: usize,
    held: usize,
    min_trace: f64,
    source: Option<SourceAcc>,
}

impl SummaryBuilder {
    pub fn new(meta: RunMeta) -> Self {
        SummaryBuilder {
            meta,
            agents: Vec::new(),
            records: 0,
            t_final: 0.0,
            lambda0: f64::NAN,
            radius0: f64::NAN,
            lambda_min: f64::INFINITY,
            lambda_last: f64::NAN,
            max_pair: 0.0,
            pair_violations: 0,
            weyl_min_margin: f64::INFINITY,
            weyl_violations: 0,
            max_unknown: 0.0,
            unknown_violations: 0,
            held: 0,
            min_trace: f64::INFINITY,
            source: None,
        }
    }

    pub fn pair_displacement_bound(&self) -> f64 {
        2.0 * PI * self.meta.speed / self.meta.k_w
    }

    pub fn observe(&mut self, rec: &StepRecord) {
        let m = &self.meta;
        if self.records == 0 {
            self.lambda0 = rec.lambda_min;
            self.radius0 = rec.radius;
            self.agents = rec
                .agents
                .iter()
                .map(|a| AgentAcc {
                    decay: LogLinearFit::default(),
                    transient: LogLinearFit::default(),
                    initial_mu: a.mu,
                    last_mu: a.mu,
                    last_delta: a.delta,
                    delta_entry: None,
                    max_delta_after: 0.0,
                    mu_entry: None,
                    increases: 0,
                })
                .collect();
            self.source = rec.source_distance.map(|d| SourceAcc {
                initial: d,
                last: d,
                aligned_at: None,
                reached_at: None,
                over_tol: 0,
                increases: 0,
                max_increase: 0.0,
                monitored: 0,
            });
        }
        let t = rec.t;
        for (acc, a) in self.agents.iter_mut().zip(&rec.agents) {
            acc.decay.offer(t, a.mu, a.mu >= DECAY_FIT_FLOOR);
            acc.transient.offer(t, a.mu, a.mu > m.mu_star);
            if self.records > 0 && acc.last_mu > m.mu_star + 1e-9 && a.mu > acc.last_mu {
                acc.increases += 1;
            }
            if acc.delta_entry.is_none() && a.delta <= m.delta_star {
                acc.delta_entry = Some(t);
            }
            if acc.delta_entry.is_some() {
                acc.max_delta_after = acc.max_delta_after.max(a.delta);
            }
            if acc.mu_entry.is_none() && a.mu < m.mu_star {
                acc.mu_entry = Some(t);
            }
            acc.last_mu = a.mu;
            acc.last_delta = a.delta;
        }

        self.lambda_min = self.lambda_min.min(rec.lambda_min);
        self.lambda_last = rec.lambda_min;
        self.max_pair = self.max_pair.max(rec.max_pair_displacement);
        if rec.max_pair_displacement > self.pair_displacement_bound() {
            self.pair_violations += 1;
        }
        let eps = rec.max_offset_change;
        let margin = rec.lambda_min - (self.lambda0 - (2.0 * self.radius0 * eps + eps * eps));
        self.weyl_min_margin = self.weyl_min_margin.min(margin);
        if margin < -WEYL_TOL {
            self.weyl_violations += 1;
        }
        self.max_unknown = self.max_unknown.max(rec.unknown_rate_norm);
        if rec.unknown_rate_exceeds_bound {
            self.unknown_violations += 1;
        }
        if rec.heading_held {
            self.held += 1;
        }
        self.min_trace = self.min_trace.min(rec.min_trace_margin);

        if let (Some(src), Some(d)) = (self.source.as_mut(), rec.source_distance) {
            if src.aligned_at.is_none() && self.agents.iter().all(|a| a.mu_entry.is_some()) {
                src.aligned_at = Some(t);
            } else if src.aligned_at.is_some() && src.reached_at.is_none() {
                let inc = d - src.last;
                src.monitored += 1;
                if inc > 0.0 {
                    src.increases += 1;
                    src.max_increase = src.max_increase.max(inc);
                }
                if inc > m.speed * m.dt {
                    src.over_tol += 1;
                }
            }
            if src.aligned_at.is_some() && src.reached_at.is_none() && d <= 2.0 * rec.radius {
                src.reached_at = Some(t);
            }
            src.last = d;
        }

        self.records += 1;
        self.t_final = t;
    }

    pub fn finish(self, abort_reason: Option<String>) -> SummaryReport {
        let m = &self.meta;
        let k = m.k_w;
        let agents: Vec<AgentSummary> = self
            .agents
            .iter()
            .map(|a| {
                let decay_slope = a.decay.slope();
                AgentSummary {
                    initial_mu: a.initial_mu,
                    final_mu: a.last_mu,
                    final_delta: a.last_delta,
                    decay_slope,
                    decay_slope_rel_error: decay_slope.map(|s| (s + k).abs() / k),
                    decay_fit_points: a.decay.n as usize,
                    transient_slope: a.transient.slope(),
                    transient_fit_points: a.transient.n as usize,
                    delta_entry_time: a.delta_entry,
                    max_delta_after_entry: a.delta_entry.map(|_| a.max_delta_after),
                    mu_entry_time: a.mu_entry,
                    lyapunov_increases: a.increases,
                }
            })
            .collect();

        let band = m.delta_star + BAND_SLACK_STEPS * m.dt * k;
        let transient: Vec<f64> = agents.iter().filter_map(|a| a.transient_slope).collect();
        let flags = Flags {
            decay_slope_within_tolerance: m.constant_target.then(|| {
                agents.iter().all(|a| {
                    a.decay_slope_rel_error
                        .is_some_and(|e| e <= DECAY_SLOPE_TOL)
                })
            }),
            transient_exponential: (!transient.is_empty()).then(|| {
                transient
                    .iter()
                    .all(|s| *s <= -TRANSIENT_SLOPE_FRACTION * k)
            }),
            delta_enters_and_stays_in_band: agents
                .iter()
                .all(|a| a.max_delta_after_entry.is_some_and(|d| d <= band)),
            delta_final_in_band: agents.iter().all(|a| a.final_delta <= m.delta_star),
            lambda_min_positive: (self.lambda0 > 0.0).then_some(self.lambda_min > 0.0),
            pair_displacement_within_bound: self.pair_violations == 0,
            weyl_chain_holds: self.weyl_violations == 0,
            trace_guard_holds: self.min_trace > 0.0,
            lyapunov_monotone: agents.iter().all(|a| a.lyapunov_increases == 0),
            source_distance_monotone: self
                .source
                .as_ref()
                .map(|s| s.aligned_at.is_some() && s.over_tol == 0),
        };
        SummaryReport {
            completed: abort_reason.is_none(),
            abort_reason,
            records: self.records,
            t_final: self.t_final,
            agents,
            lambda_min_initial: self.lambda0,
            lambda_min_min: self.lambda_min,
            lambda_min_final: self.lambda_last,
            radius_initial: self.radius0,
            max_pair_displacement: self.max_pair,
            pair_displacement_bound: self.pair_displacement_bound(),
            pair_displacement_violations: self.pair_violations,
            weyl_min_margin: self.weyl_min_margin,
            weyl_violations: self.weyl_violations,
            max_unknown_rate: self.max_unknown,
            unknown_rate_violations: self.unknown_violations,
            heading_held_steps: self.held,
            min_trace_margin: self.min_trace,
            source: self.source.map(|s| SourceSummary {
                initial_distance: s.initial,
                final_distance: s.last,
                aligned_at: s.aligned_at,
                reached_at: s.reached_at,
                increases_over_tolerance: s.over_tol,
                increases: s.increases,
                max_increase: s.max_increase,
                monitored_steps: s.monitored,
            }),
            flags,
            meta: self.meta,
        }
    }
}
