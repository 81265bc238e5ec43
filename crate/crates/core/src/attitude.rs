//! Attitude error dynamics and proportional feed-forward control on SO(3).
//!
//! With `R_e = R_dᵀ R` and `Ṙ_d = R_d Ω_d`, the error evolves as
//! `Ṙ_e = R_e Ω_e` where `Ω_e = Ω - Ad_{R_eᵀ}(Ω_d)`. Choosing
//! `Ω = -k_w log(R_e) + Ad_{R_eᵀ}(Ω_d)` makes `Ω_e = -k_w log(R_e)`, so the
//! error angle decays as `μ(t) = μ(0) e^{-k_w t}`.
//!
//! When only part of `Ω_d` is known, the unknown remainder acts as a
//! bounded disturbance. The gain `k_w = √2 ω_max / μ*` then drives the
//! error into `[0, μ*]` and keeps it there.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::so3::{adjoint_rotate, log_so3, Rotation, SkewMatrix, UnitVector3};

/// The relative rotation `R_e = R_dᵀ R` together with its angle and axis-angle vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttitudeError {
    pub rotation: Rotation,
    /// Geodesic distance between desired and actual attitude, in `[0, π)`.
    pub mu: f64,
    /// `log(R_e)^∨`.
    pub tau: Vector3<f64>,
}

pub fn attitude_error(desired: &Rotation, actual: &Rotation) -> Result<AttitudeError> {
    let rotation = desired.transpose() * *actual;
    let tau = *log_so3(&rotation)?.vector();
    Ok(AttitudeError {
        rotation,
        mu: tau.norm(),
        tau,
    })
}

/// Body rate of the desired attitude split into a known and an unknown part.
///
/// Only the known part is passed to the controller; `unknown_bound` is the
/// declared bound `ω_max` on the norm of the unknown part.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesiredAttitudeRate {
    pub known: SkewMatrix,
    pub unknown_bound: f64,
}

impl DesiredAttitudeRate {
    pub fn new(known: SkewMatrix, unknown_bound: f64) -> Result<Self> {
        if !(unknown_bound.is_finite() && unknown_bound >= 0.0) {
            return Err(Error::param("unknown_bound", "must be finite and >= 0"));
        }
        Ok(DesiredAttitudeRate {
            known,
            unknown_bound,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    /// Proportional gain, 1/time.
    pub k_w: f64,
    /// Ultimate bound on the attitude error, radians.
    pub mu_star: f64,
    /// Target alignment tolerance on the heading, radians.
    pub delta_star: f64,
}

impl ControllerConfig {
    /// `mu_star` defaults to `delta_star` when not given.
    pub fn new(k_w: f64, mu_star: Option<f64>, delta_star: f64) -> Result<Self> {
        let mu_star = mu_star.unwrap_or(delta_star);
        if !(k_w.is_finite() && k_w > 0.0) {
            return Err(Error::param("k_w", format!("must be > 0, got {k_w}")));
        }
        if !(mu_star > 0.0 && mu_star <= delta_star && delta_star <= std::f64::consts::PI) {
            return Err(Error::param(
                "mu_star",
                format!("need 0 < mu_star <= delta_star <= pi, got {mu_star} and {delta_star}"),
            ));
        }
        Ok(ControllerConfig {
            k_w,
            mu_star,
            delta_star,
        })
    }
}

/// `Ω_e = Ω - Ad_{R_eᵀ}(Ω_d)`.
pub fn error_rate(omega: &SkewMatrix, omega_d: &SkewMatrix, r_e: &Rotation) -> SkewMatrix {
    *omega - adjoint_rotate(&r_e.transpose(), omega_d)
}

fn proportional_feed_forward(
    r_e: &Rotation,
    feed_forward: &SkewMatrix,
    k_w: f64,
) -> Result<SkewMatrix> {
    if !(k_w.is_finite() && k_w > 0.0) {
        return Err(Error::param("k_w", format!("must be > 0, got {k_w}")));
    }
    let log_e = log_so3(r_e)?.hat();
    Ok(log_e * (-k_w) + adjoint_rotate(&r_e.transpose(), feed_forward))
}

/// `Ω = -k_w log(R_e) + Ad_{R_eᵀ}(Ω_d)` with the full desired rate known.
pub fn control_full_ff(r_e: &Rotation, omega_d: &SkewMatrix, k_w: f64) -> Result<SkewMatrix> {
    proportional_feed_forward(r_e, omega_d, k_w)
}

/// `Ω = -k_w log(R_e) + Ad_{R_eᵀ}(Ω_d^k)`; the unknown component is never read.
pub fn control_known_ff(
    r_e: &Rotation,
    rate: &DesiredAttitudeRate,
    k_w: f64,
) -> Result<SkewMatrix> {
    proportional_feed_forward(r_e, &rate.known, k_w)
}

/// `k_w = √2 ω_max / μ*`, the gain that bounds the error by `μ*` under an
/// unknown desired rate of norm at most `ω_max`.
pub fn gain_for_bounded_rate(omega_max: f64, mu_star: f64) -> Result<f64> {
    if !(mu_star.is_finite() && mu_star > 0.0) {
        return Err(Error::param(
            "mu_star",
            format!("must be > 0, got {mu_star}"),
        ));
    }
    if !(omega_max.is_finite() && omega_max >= 0.0) {
        return Err(Error::param(
            "omega_max",
            format!("must be >= 0, got {omega_max}"),
        ));
    }
    Ok(std::f64::consts::SQRT_2 * omega_max / mu_star)
}

/// Which Lyapunov candidate to report.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LyapunovVariant {
    /// `½ |log R_e|_F² = μ²`, decays as `e^{-2 k_w t}` under full feed-forward.
    FullFeedForward,
    /// `¼ μ²`, used for the bounded-unknown-rate analysis.
    BoundedRate,
}

pub fn lyapunov_value(err: &AttitudeError, variant: LyapunovVariant) -> f64 {
    let mu2 = err.mu * err.mu;
    match variant {
        LyapunovVariant::FullFeedForward => mu2,
        LyapunovVariant::BoundedRate => 0.25 * mu2,
    }
}

/// Great-circle angle between the body heading and the target heading, in `[0, π]`.
pub fn heading_alignment_delta(x_b: &UnitVector3, m_d: &UnitVector3) -> f64 {
    x_b.vector().dot(m_d.vector()).clamp(-1.0, 1.0).acos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::so3::{exp_so3, hat, RotationVector};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn rot(v: [f64; 3]) -> Rotation {
        exp_so3(&RotationVector::new(Vector3::from(v)))
    }

    #[test]
    fn error_of_equal_attitudes_is_zero() {
        let r = rot([0.3, -0.2, 1.0]);
        let e = attitude_error(&r, &r).unwrap();
        assert!(e.mu < 1e-15);
        assert!(e.tau.norm() < 1e-15);
        let e = attitude_error(&Rotation::identity(), &rot([0.0, 0.0, 0.4])).unwrap();
        assert_abs_diff_eq!(e.mu, 0.4, epsilon = 1e-15);
    }

    #[test]
    fn error_recovers_relative_rotation_vector() {
        let r_d = rot([1.2, -0.4, 0.7]);
        let tau = Vector3::new(-0.3, 0.5, 0.9);
        let r = r_d * rot(tau.into());
        let e = attitude_error(&r_d, &r).unwrap();
        assert!((e.tau - tau).amax() < 1e-12);
        assert_abs_diff_eq!(e.mu, e.tau.norm(), epsilon = 1e-15);
    }

    #[test]
    fn error_near_half_turn_is_rejected() {
        let err = attitude_error(&Rotation::identity(), &rot([PI, 0.0, 0.0]));
        assert!(matches!(err, Err(Error::NearPiSingularity { .. })));
    }

    #[test]
    fn error_rate_cases() {
        let w = hat(&Vector3::new(0.1, 0.2, 0.3));
        let wd = hat(&Vector3::new(-1.0, 0.5, 0.25));
        let r_e = rot([0.4, 0.1, -0.9]);
        assert_eq!(error_rate(&w, &SkewMatrix::zero(), &r_e), w);
        let at_identity = error_rate(&w, &wd, &Rotation::identity());
        assert!((at_identity.matrix() - (w - wd).matrix()).amax() < 1e-15);
        // Vector form: Ω_e^∨ = Ω^∨ - R_eᵀ Ω_d^∨
        let got = error_rate(&w, &wd, &r_e).vee();
        let want = w.vee() - r_e.matrix().transpose() * wd.vee();
        assert!((got - want).amax() < 1e-12);
    }

    #[test]
    fn full_feed_forward_examples() {
        let wd = hat(&Vector3::new(0.2, -0.3, 0.5));
        assert_eq!(
            control_full_ff(&Rotation::identity(), &wd, 3.0).unwrap(),
            wd
        );
        let u = control_full_ff(&rot([0.0, 0.0, 0.4]), &SkewMatrix::zero(), 2.0).unwrap();
        assert_abs_diff_eq!(u.vee(), Vector3::new(0.0, 0.0, -0.8), epsilon = 1e-15);
        assert!(control_full_ff(&Rotation::identity(), &wd, 0.0).is_err());
    }

    #[test]
    fn full_feed_forward_cancels_desired_motion() {
        let r_e = rot([0.9, -0.2, 0.3]);
        let wd = hat(&Vector3::new(0.7, 0.1, -1.3));
        let k = 1.7;
        let u = control_full_ff(&r_e, &wd, k).unwrap();
        let omega_e = error_rate(&u, &wd, &r_e);
        let log_e = log_so3(&r_e).unwrap().hat();
        assert!((omega_e.matrix() - (log_e * -k).matrix()).amax() < 1e-14);
    }

    #[test]
    fn known_feed_forward_matches_full_when_nothing_is_unknown() {
        let r_e = rot([0.1, 0.5, -0.6]);
        let wd = hat(&Vector3::new(0.3, 0.3, 0.1));
        let rate = DesiredAttitudeRate::new(wd, 0.0).unwrap();
        let a = control_known_ff(&r_e, &rate, 0.9).unwrap();
        let b = control_full_ff(&r_e, &wd, 0.9).unwrap();
        assert_eq!(a, b);
        let rate = DesiredAttitudeRate::new(wd, 0.5).unwrap();
        assert_eq!(
            control_known_ff(&Rotation::identity(), &rate, 0.9).unwrap(),
            wd
        );
        assert!(DesiredAttitudeRate::new(wd, -1.0).is_err());
    }

    #[test]
    fn bounded_rate_gain_values() {
        // k1 for ω_max = π/20, μ* = 0.4
        assert_abs_diff_eq!(
            gain_for_bounded_rate(PI / 20.0, 0.4).unwrap(),
            0.555_360_367_269_795_8,
            epsilon = 1e-12
        );
        assert_eq!(gain_for_bounded_rate(0.0, 0.3).unwrap(), 0.0);
        assert_abs_diff_eq!(
            gain_for_bounded_rate(PI / 4.0, 0.4).unwrap(),
            2.776_801_836_348_979,
            epsilon = 1e-12
        );
        assert!(gain_for_bounded_rate(1.0, 0.0).is_err());
        assert!(gain_for_bounded_rate(1.0, -0.1).is_err());
    }

    #[test]
    fn lyapunov_values() {
        let zero = attitude_error(&Rotation::identity(), &Rotation::identity()).unwrap();
        assert_eq!(lyapunov_value(&zero, LyapunovVariant::FullFeedForward), 0.0);
        let e = attitude_error(&Rotation::identity(), &rot([0.0, 0.4, 0.0])).unwrap();
        assert_abs_diff_eq!(
            lyapunov_value(&e, LyapunovVariant::BoundedRate),
            0.04,
            epsilon = 1e-15
        );
        // ½|log R_e|_F² equals μ²
        let half_frob = 0.5 * hat(&e.tau).frobenius_norm().powi(2);
        assert_abs_diff_eq!(
            lyapunov_value(&e, LyapunovVariant::FullFeedForward),
            half_frob,
            epsilon = 1e-15
        );
    }

    #[test]
    fn heading_delta_cases() {
        let u = UnitVector3::normalize(Vector3::new(1.0, 2.0, 3.0)).unwrap();
        assert_eq!(heading_alignment_delta(&u, &u), 0.0);
        assert_abs_diff_eq!(
            heading_alignment_delta(&UnitVector3::x(), &UnitVector3::y()),
            FRAC_PI_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn controller_config_validation() {
        let c = ControllerConfig::new(1.0, None, 0.4).unwrap();
        assert_eq!(c.mu_star, 0.4);
        assert!(ControllerConfig::new(1.0, Some(0.5), 0.4).is_err());
        assert!(ControllerConfig::new(-1.0, None, 0.4).is_err());
        assert!(ControllerConfig::new(1.0, Some(0.0), 0.4).is_err());
    }
}
