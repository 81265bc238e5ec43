//! Swarm geometry: centroid, barycentric offsets, covariance, the
//! ascending-direction estimate, and gain bounds that keep the deployment
//! non-degenerate while the attitudes converge.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::attitude::gain_for_bounded_rate;
use crate::error::{Error, Result};
use crate::linalg::symmetric_min_eigenvalue;
use crate::so3::UnitVector3;

/// Eigenvalues below this fraction of the covariance scale are reported as exactly zero.
const RANK_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct DeploymentStats {
    /// `p_c = (1/N) Σ p_i`.
    pub centroid: Vector3<f64>,
    /// Barycentric positions `x_i = p_i - p_c`.
    pub offsets: Vec<Vector3<f64>>,
    /// `P = (1/N) Σ x_i x_iᵀ`.
    pub covariance: Matrix3<f64>,
    pub lambda_min: f64,
    /// `D = max_i |x_i|`.
    pub radius: f64,
}

impl DeploymentStats {
    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// The offsets span R³.
    pub fn is_non_degenerate(&self) -> bool {
        self.lambda_min > 0.0
    }
}

pub fn deployment_stats(positions: &[Vector3<f64>]) -> Result<DeploymentStats> {
    if positions.is_empty() {
        return Err(Error::EmptySwarm);
    }
    if positions.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
        return Err(Error::NonFinite);
    }
    let n = positions.len() as f64;
    let centroid = positions.iter().sum::<Vector3<f64>>() / n;
    let offsets: Vec<_> = positions.iter().map(|p| p - centroid).collect();
    let covariance = offsets
        .iter()
        .map(|x| x * x.transpose())
        .sum::<Matrix3<f64>>()
        / n;
    let radius = offsets.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut lambda_min = symmetric_min_eigenvalue(&covariance);
    if lambda_min <= RANK_TOL * covariance.trace() {
        lambda_min = 0.0;
    }
    Ok(DeploymentStats {
        centroid,
        offsets,
        covariance,
        lambda_min,
        radius,
    })
}

/// `L_σ = (1 / (N D²)) Σ σ_i x_i`, with `σ_i` sampled at `p_c + x_i`.
pub fn ascending_direction(samples: &[f64], stats: &DeploymentStats) -> Result<Vector3<f64>> {
    if samples.len() != stats.len() {
        return Err(Error::param(
            "samples",
            format!("expected {} samples, got {}", stats.len(), samples.len()),
        ));
    }
    if stats.radius == 0.0 {
        return Err(Error::CollocatedSwarm);
    }
    let n = stats.len() as f64;
    let sum: Vector3<f64> = samples
        .iter()
        .zip(&stats.offsets)
        .map(|(s, x)| x * *s)
        .sum();
    Ok(sum / (n * stats.radius * stats.radius))
}

/// Threshold below which `|L_σ|` counts as vanished: `1e-9 (1 + max |σ_i|)`.
pub fn heading_tolerance(samples: &[f64]) -> f64 {
    1e-9 * (1.0 + samples.iter().fold(0.0f64, |m, s| m.max(s.abs())))
}

/// `m_d = L / |L|`.
pub fn heading_field(l: &Vector3<f64>, tolerance: f64) -> Result<UnitVector3> {
    let norm = l.norm();
    if !(norm > tolerance) {
        return Err(Error::DegenerateDirection { norm });
    }
    UnitVector3::normalize(*l)
}

/// Bound `2πs / k_w` on how far any relative position `p_i - p_j` drifts
/// from its initial value while the attitudes converge.
pub fn pairwise_displacement_bound(speed: f64, k_w: f64) -> Result<f64> {
    if !(speed > 0.0 && speed.is_finite()) {
        return Err(Error::param("speed", format!("must be > 0, got {speed}")));
    }
    if !(k_w > 0.0 && k_w.is_finite()) {
        return Err(Error::param("k_w", format!("must be > 0, got {k_w}")));
    }
    Ok(2.0 * PI * speed / k_w)
}

/// Largest offset perturbation `ε_max` with `2 D₀ ε + ε² <= λ_min(P₀)`,
/// i.e. `-D₀ + √(D₀² + λ_min)`.
pub fn nondegeneracy_margin(stats0: &DeploymentStats) -> Result<f64> {
    if !stats0.is_non_degenerate() {
        return Err(Error::DegenerateDeployment {
            lambda_min: stats0.lambda_min,
        });
    }
    let d = stats0.radius;
    // Rationalized to avoid cancellation when λ_min << D₀².
    Ok(stats0.lambda_min / (d + (d * d + stats0.lambda_min).sqrt()))
}

/// `2πs / ε_max`: the gain that keeps `λ_min(P(t)) > 0` for all time.
pub fn gain_for_nondegeneracy(speed: f64, stats0: &DeploymentStats) -> Result<f64> {
    if !(speed >= 0.0 && speed.is_finite()) {
        return Err(Error::param("speed", format!("must be >= 0, got {speed}")));
    }
    let eps_max = nondegeneracy_margin(stats0)?;
    Ok(2.0 * PI * speed / eps_max)
}

/// `2 D₀ ε + ε²`, the bound on `|P(t) - P(t₀)|₂` when every offset moved by at most `ε`.
pub fn covariance_perturbation_bound(eps: f64, stats0: &DeploymentStats) -> f64 {
    2.0 * stats0.radius * eps + eps * eps
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainPlan {
    /// Bounded-rate gain.
    pub k1: f64,
    /// Non-degeneracy gain.
    pub k2: f64,
    /// `max(k1, k2)`.
    pub k_w: f64,
    pub epsilon_max: f64,
}

pub fn plan_gains(
    omega_max: f64,
    mu_star: f64,
    speed: f64,
    stats0: &DeploymentStats,
) -> Result<GainPlan> {
    let k1 = gain_for_bounded_rate(omega_max, mu_star)?;
    let k2 = gain_for_nondegeneracy(speed, stats0)?;
    Ok(GainPlan {
        k1,
        k2,
        k_w: k1.max(k2),
        epsilon_max: nondegeneracy_margin(stats0)?,
    })
}
