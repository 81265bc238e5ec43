//! Randomized property checks over the whole library, reported as a table.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use geoswarm::attitude::{attitude_error, control_known_ff, DesiredAttitudeRate};
use geoswarm::deployment::{
    covariance_perturbation_bound, deployment_stats, pairwise_displacement_bound,
};
use geoswarm::fields::{Field, FieldSpec};
use geoswarm::sim::{
    run_with, step_agent, AttitudeConfig, ControlLaw, ControllerSection, DesiredConfig,
    DesiredMode, GainConfig, IntegrationConfig, PlacementConfig, RateFrame, RobotState,
    SensingConfig, SimConfig, Simulation, SwarmConfig,
};
use geoswarm::so3::{
    adjoint_rotate, dist_frobenius, dist_geodesic, dist_log, exp_coord_derivative, exp_so3, hat,
    lie_bracket, log_so3,
};
use geoswarm::{Rotation, RotationVector, SkewMatrix, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::{DECAY_FIT_FLOOR, DECAY_SLOPE_TOL};

/// Randomized cases per kernel property in a full run.
pub const FULL_SAMPLES: usize = 10_000;
pub const QUICK_SAMPLES: usize = 500;

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest observed error measure (same units as `tolerance`).
    pub worst: f64,
    pub tolerance: f64,
}

impl PropertyResult {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

struct Tally {
    name: &'static str,
    tolerance: f64,
    cases: usize,
    failures: usize,
    worst: f64,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Tally {
            name,
            tolerance,
            cases: 0,
            failures: 0,
            worst: 0.0,
        }
    }

    fn check(&mut self, err: f64) {
        self.cases += 1;
        if !(err <= self.tolerance) {
            self.failures += 1;
        }
        if err.is_nan() || err > self.worst {
            self.worst = err;
        }
    }

    fn done(self) -> PropertyResult {
        PropertyResult {
            name: self.name,
            cases: self.cases,
            failures: self.failures,
            worst: self.worst,
            tolerance: self.tolerance,
        }
    }
}

fn unit_vector(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

fn rotation_vector(rng: &mut ChaCha8Rng, max_angle: f64) -> Vector3<f64> {
    unit_vector(rng) * rng.random_range(0.0..max_angle)
}

fn rotation(rng: &mut ChaCha8Rng) -> Rotation {
    exp_so3(&RotationVector::new(rotation_vector(rng, PI)))
}

fn skew(rng: &mut ChaCha8Rng, scale: f64) -> SkewMatrix {
    hat(&Vector3::from_fn(|_, _| rng.random_range(-scale..scale)))
}

pub fn exp_log_roundtrip(rng: &mut ChaCha8Rng, n: usize) -> PropertyResult {
    let mut t = Tally::new("exp/log roundtrip", 1e-9);
    for _ in 0..n {
        let tau = rotation_vector(rng, PI - 0.1);
        let err = match log_so3(&exp_so3(&RotationVector::new(tau))) {
            Ok(back) => (back.vector() - tau).norm(),
            Err(_) => f64::INFINITY,
        };
        t.check(err);
    }
    t.done()
}

pub fn group_closure(rng: &mut ChaCha8Rng, n: usize) -> PropertyResult {
    let mut t = Tally::new("group closure", 1e-9);
    for _ in 0..n {
        let r = rotation(rng) * rotation(rng);
        t.check(
            r.orthonormality_error()
                .max((r.matrix().determinant() - 1.0).abs()),
        );
    }
    t.done()
}

pub fn metric_ordering(rng: &mut ChaCha8Rng, n: usize) -> PropertyResult {
    let mut t = Tally::new("metric ordering", 1e-12);
    for _ in 0..n {
        let a = rotation(rng);
        let b = a * exp_so3(&RotationVector::new(rotation_vector(rng, PI - 0.05)));
        let err = match (dist_geodesic(&a, &b), dist_log(&a, &b)) {
            (Ok(g), Ok(l)) => (dist_frobenius(&a, &b) - l)
                .max(0.0)
                .max((l - SQRT_2 * g).abs()),
            _ => f64::INFINITY,
        };
        t.check(err);
    }
    t.done()
}

pub fn ad_invariance(rng: &mut ChaCha8Rng, n: usize) -> PropertyResult {
    let mut t = Tally::new("Ad-invariance", 1e-10);
    for _ in 0..n {
        let r = rotation(rng);
        let (w1, w2) = (skew(rng, 2.0), skew(rng, 2.0));
        let lhs = adjoint_rotate(&r, &w1).inner(&adjoint_rotate(&r, &w2));
        t.check((lhs - w1.inner(&w2)).abs());
    }
    t.done()
}

pub fn skew_identity(rng: &mut ChaCha8Rng, n: usize) -> PropertyResult {
    let mut t = Tally::new("skew-symmetry identity", 1e-10);
    for _ in 0..n {
        let (a, b, c) = (skew(rng, 2.0), skew(rng, 2.0), skew(rng, 2.0));
        let lhs = lie_bracket(&a, &b).inner(&c);
        let rhs = -b.inner(&lie_bracket(&a, &c));
        t.check((lhs - rhs).abs());
    }
    t.done()
}

pub fn frobenius_euclidean(rng: &mut ChaCha8Rng, n: usize) -> PropertyResult {
    let mut t = Tally::new("|hat v|_F = sqrt2 |v|", 1e-12);
    for _ in 0..n {
        let v = Vector3::from_fn(|_, _| rng.random_range(-10.0..10.0));
        t.check((hat(&v).frobenius_norm() - SQRT_2 * v.norm()).abs() / (1.0 + v.norm()));
    }
    t.done()
}

pub fn exp_coord_derivative_fd(rng: &mut ChaCha8Rng, n: usize) -> PropertyResult {
    let mut t = Tally::new("exp-coord derivative vs FD", 1e-4);
    let h = 1e-6;
    for _ in 0..n {
        let tau = rotation_vector(rng, PI - 0.1);
        let w = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let r = exp_so3(&RotationVector::new(tau));
        let fwd = log_so3(&(r * exp_so3(&RotationVector::new(w * h))));
        let bwd = log_so3(&(r * exp_so3(&RotationVector::new(w * -h))));
        let b = exp_coord_derivative(&RotationVector::new(tau), &hat(&w));
        let err = match (fwd, bwd, b) {
            (Ok(f), Ok(bk), Ok(b)) => ((f.vector() - bk.vector()) / (2.0 * h) - b.vee()).norm(),
            _ => f64::INFINITY,
        };
        t.check(err);
    }
    t.done()
}

pub fn field_gradient_fd(rng: &mut ChaCha8Rng, n: usize) -> PropertyResult {
    let mut t = Tally::new("field gradient vs FD", 1e-6);
    for i in 0..n {
        let source = Vector3::from_fn(|_, _| rng.random_range(-20.0..20.0));
        let spec = if i % 2 == 0 {
            let d: [f64; 3] = std::array::from_fn(|_| rng.random_range(5.0f64..60.0).powi(2));
            FieldSpec::Gaussian {
                source: source.into(),
                amplitude: rng.random_range(1.0..100.0),
                covariance: [[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]],
            }
        } else {
            let q: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.01..1.0));
            FieldSpec::Quadratic {
                source: source.into(),
                amplitude: 1e4,
                curvature: [[q[0], 0.0, 0.0], [0.0, q[1], 0.0], [0.0, 0.0, q[2]]],
                domain_radius: 90.0,
            }
        };
        let f = Field::new(spec).expect("generated fields are valid");
        let p = source + unit_vector(rng) * rng.random_range(0.5..60.0);
        let g = f.gradient(&p);
        let h = 1e-5 * (1.0 + p.norm());
        let fd = Vector3::from_fn(|k, _| {
            let e = Vector3::ith(k, h);
            (f.eval(&(p + e)) - f.eval(&(p - e))) / (2.0 * h)
        });
        // relative to the gradient, with a floor for the flat tails
        let scale = g.norm().max(1e-6 * f.eval(&f.source()));
        t.check((fd - g).norm() / scale);
    }
    t.done()
}

/// Eigenvalue perturbation chain: `λ_min(P') >= λ_min(P) - (2 D ε + ε²)`.
pub fn weyl_chain(rng: &mut ChaCha8Rng, n: usize) -> PropertyResult {
    let mut t = Tally::new("Weyl chain", 1e-9);
    for _ in 0..n {
        let agents = rng.random_range(4..12);
        let ps: Vec<Vector3<f64>> = (0..agents)
            .map(|_| unit_vector(rng) * rng.random_range(0.1..5.0))
            .collect();
        let shifted: Vec<Vector3<f64>> = ps
            .iter()
            .map(|p| p + unit_vector(rng) * rng.random_range(0.0..0.5))
            .collect();
        let (s0, s1) = match (deployment_stats(&ps), deployment_stats(&shifted)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                t.check(f64::INFINITY);
                continue;
            }
        };
        let eps = s1
            .offsets
            .iter()
            .zip(&s0.offsets)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let floor = s0.lambda_min - covariance_perturbation_bound(eps, &s0);
        t.check((floor - s1.lambda_min).max(0.0));
    }
    t.done()
}

/// Pairwise displacement bound `2πs/k_w` over short closed-loop runs with full feed-forward.
pub fn pairwise_bound(rng: &mut ChaCha8Rng, n: usize) -> PropertyResult {
    let mut t = Tally::new("pairwise displacement bound", 0.0);
    for case in 0..n {
        let k_w = rng.random_range(0.5..5.0);
        let omega_known: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let omega_unknown: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.2..0.2));
        let config = SimConfig {
            swarm: SwarmConfig {
                agents: 4,
                speed: 1.0,
            },
            integration: IntegrationConfig {
                dt: 0.02 / k_w,
                t_end: 12.0 / k_w,
                seed: case as u64,
                reproject_every: 1000,
            },
            controller: ControllerSection {
                law: ControlLaw::FullFeedForward,
                delta_star: 0.4,
                mu_star: None,
            },
            gain: GainConfig::Manual { k_w },
            desired: DesiredConfig {
                mode: DesiredMode::PrescribedRates,
                rate_frame: RateFrame::Body,
                initial: rotation_vector(rng, PI).into(),
                omega_known,
                omega_unknown,
                omega_max: Vector3::from(omega_unknown).norm(),
            },
            placement: PlacementConfig::RandomBall {
                center: [0.0; 3],
                radius: 3.0,
            },
            attitudes: AttitudeConfig::Ball { radius: 2.5 },
            field: None,
            sensing: SensingConfig::default(),
        };
        let bound = pairwise_displacement_bound(1.0, k_w).expect("positive inputs");
        let mut worst = 0.0f64;
        let outcome = Simulation::new(config)
            .and_then(|mut sim| run_with(&mut sim, |r| worst = worst.max(r.max_pair_displacement)));
        t.check(match outcome {
            Ok(()) => (worst - bound).max(0.0),
            Err(_) => f64::INFINITY,
        });
    }
    t.done()
}

/// A feedback law `Ω(R_e, Ω_d^known, k_w)`.
pub type ControlLawFn = dyn Fn(&Rotation, &SkewMatrix, f64) -> geoswarm::Result<SkewMatrix>;

/// The shipped law: proportional term plus known feed-forward.
pub fn shipped_law(r_e: &Rotation, known: &SkewMatrix, k_w: f64) -> geoswarm::Result<SkewMatrix> {
    control_known_ff(r_e, &DesiredAttitudeRate::new(*known, 0.0)?, k_w)
}

/// Fitted slope of `ln μ` for one agent chasing a rotating target whose whole
/// rate is known, under `law`.
pub fn decay_slope(
    law: &ControlLawFn,
    k_w: f64,
    omega_d: Vector3<f64>,
    tau0: Vector3<f64>,
) -> geoswarm::Result<f64> {
    let dt = 0.01 / k_w;
    let w = hat(&omega_d);
    let step_d = exp_so3(&RotationVector::new(omega_d * dt));
    let mut r_d = Rotation::identity();
    let mut agent = RobotState {
        position: Vector3::zeros(),
        attitude: exp_so3(&RotationVector::new(tau0)),
    };
    let (mut n, mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..100_000 {
        let err = attitude_error(&r_d, &agent.attitude)?;
        if err.mu < DECAY_FIT_FLOOR {
            break;
        }
        let t = i as f64 * dt;
        let y = err.mu.ln();
        n += 1.0;
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
        let omega = law(&err.rotation, &w, k_w)?;
        agent = step_agent(&agent, &omega, 1.0, dt);
        r_d = r_d * step_d;
    }
    Ok((n * sty - st * sy) / (n * stt - st * st))
}

pub fn decay_slope_property(law: &ControlLawFn, rng: &mut ChaCha8Rng, n: usize) -> PropertyResult {
    let mut t = Tally::new("decay slope vs -k_w", DECAY_SLOPE_TOL);
    for i in 0..n {
        let k_w = [0.5, 2.0, 10.0][i % 3];
        let omega_d = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let tau0 = rotation_vector(rng, 2.8);
        t.check(match decay_slope(law, k_w, omega_d, tau0) {
            Ok(s) => (s + k_w).abs() / k_w,
            Err(_) => f64::INFINITY,
        });
    }
    t.done()
}

/// The full suite; simulation-backed properties use fewer cases.
pub fn run_suite(samples: usize, seed: u64) -> Vec<PropertyResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sims = (samples / 100).max(6);
    vec![
        exp_log_roundtrip(&mut rng, samples),
        group_closure(&mut rng, samples),
        metric_ordering(&mut rng, samples),
        ad_invariance(&mut rng, samples),
        skew_identity(&mut rng, samples),
        frobenius_euclidean(&mut rng, samples),
        exp_coord_derivative_fd(&mut rng, samples),
        field_gradient_fd(&mut rng, samples),
        weyl_chain(&mut rng, samples),
        pairwise_bound(&mut rng, sims),
        decay_slope_property(&shipped_law, &mut rng, sims),
    ]
}

pub struct Table<'a>(pub &'a [PropertyResult]);

impl fmt::Display for Table<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<30} {:>7} {:>9} {:>11} {:>10}  result",
            "property", "cases", "failures", "worst", "tolerance"
        )?;
        for r in self.0 {
            writeln!(
                f,
                "{:<30} {:>7} {:>9} {:>11.3e} {:>10.1e}  {}",
                r.name,
                r.cases,
                r.failures,
                r.worst,
                r.tolerance,
                if r.passed() { "PASS" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}
