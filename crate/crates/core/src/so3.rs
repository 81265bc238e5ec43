//! The rotation group SO(3) and its Lie algebra so(3).
//!
//! Rotations are stored as 3×3 orthonormal matrices; algebra elements as
//! exactly skew-symmetric matrices. Angular quantities are in radians.
//!
//! The logarithm is only defined on the open ball of rotation angle < π.
//! Every operation that goes through it returns
//! [`Error::NearPiSingularity`] once `tr(R) <= -1 + TRACE_GUARD` instead of
//! picking an arbitrary axis.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Orthonormality / determinant tolerance for accepting a [`Rotation`].
pub const ROTATION_TOL: f64 = 1e-9;
/// Tolerance on `|S + Sᵀ|_F` for accepting a [`SkewMatrix`].
pub const SKEW_TOL: f64 = 1e-9;
/// Tolerance on `| |u| - 1 |` for accepting a [`UnitVector3`].
pub const UNIT_TOL: f64 = 1e-6;
/// Below this angle exp/log use Taylor expansions.
pub const SMALL_ANGLE: f64 = 1e-4;
/// Singularity guard: the log fails when `tr(R) <= -1 + TRACE_GUARD`.
pub const TRACE_GUARD: f64 = 1e-6;
/// Largest `|RᵀR - I|_F` that [`project_to_so3`] agrees to repair.
pub const PROJECTION_TOL: f64 = 1e-3;

fn check_finite(v: &Vector3<f64>) -> Result<()> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// An element of so(3).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkewMatrix(Matrix3<f64>);

impl SkewMatrix {
    pub fn zero() -> Self {
        SkewMatrix(Matrix3::zeros())
    }

    /// Accepts `m` if `|m + mᵀ|_F <= SKEW_TOL`, storing its exact skew part.
    pub fn from_matrix(m: &Matrix3<f64>) -> Result<Self> {
        let residual = (m + m.transpose()).norm();
        if !(residual <= SKEW_TOL) {
            return Err(Error::NotSkew { residual });
        }
        Ok(Self::skew_part(m))
    }

    /// ½(m - mᵀ), used after products that are skew up to rounding.
    pub(crate) fn skew_part(m: &Matrix3<f64>) -> Self {
        hat(&Vector3::new(
            0.5 * (m[(2, 1)] - m[(1, 2)]),
            0.5 * (m[(0, 2)] - m[(2, 0)]),
            0.5 * (m[(1, 0)] - m[(0, 1)]),
        ))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn vee(&self) -> Vector3<f64> {
        Vector3::new(self.0[(2, 1)], self.0[(0, 2)], self.0[(1, 0)])
    }

    /// Frobenius inner product `tr(selfᵀ other)`.
    pub fn inner(&self, other: &SkewMatrix) -> f64 {
        (self.0.transpose() * other.0).trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }
}

impl Add for SkewMatrix {
    type Output = SkewMatrix;
    fn add(self, rhs: SkewMatrix) -> SkewMatrix {
        SkewMatrix(self.0 + rhs.0)
    }
}

impl Sub for SkewMatrix {
    type Output = SkewMatrix;
    fn sub(self, rhs: SkewMatrix) -> SkewMatrix {
        SkewMatrix(self.0 - rhs.0)
    }
}

impl Neg for SkewMatrix {
    type Output = SkewMatrix;
    fn neg(self) -> SkewMatrix {
        SkewMatrix(-self.0)
    }
}

impl Mul<f64> for SkewMatrix {
    type Output = SkewMatrix;
    fn mul(self, k: f64) -> SkewMatrix {
        SkewMatrix(self.0 * k)
    }
}

/// `hat(v) u = v × u`.
pub fn hat(v: &Vector3<f64>) -> SkewMatrix {
    SkewMatrix(Matrix3::new(
        0.0, -v.z, v.y, //
        v.z, 0.0, -v.x, //
        -v.y, v.x, 0.0,
    ))
}

pub fn vee(s: &SkewMatrix) -> Vector3<f64> {
    s.vee()
}

/// vee of an arbitrary matrix, rejecting inputs that are not skew within `SKEW_TOL`.
pub fn vee_matrix(m: &Matrix3<f64>) -> Result<Vector3<f64>> {
    SkewMatrix::from_matrix(m).map(|s| s.vee())
}

/// Exponential coordinates of a rotation (axis × angle).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationVector(Vector3<f64>);

impl RotationVector {
    pub fn new(v: Vector3<f64>) -> Self {
        RotationVector(v)
    }

    pub fn zero() -> Self {
        RotationVector(Vector3::zeros())
    }

    pub fn vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn angle(&self) -> f64 {
        self.0.norm()
    }

    pub fn hat(&self) -> SkewMatrix {
        hat(&self.0)
    }
}

impl From<Vector3<f64>> for RotationVector {
    fn from(v: Vector3<f64>) -> Self {
        RotationVector(v)
    }
}

/// A point on the unit sphere S².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitVector3(Vector3<f64>);

impl UnitVector3 {
    /// Accepts `v` when its norm is within `UNIT_TOL` of one, then renormalizes.
    pub fn new(v: Vector3<f64>) -> Result<Self> {
        check_finite(&v)?;
        let norm = v.norm();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit { norm });
        }
        Ok(UnitVector3(v / norm))
    }

    /// Normalizes any finite nonzero vector.
    pub fn normalize(v: Vector3<f64>) -> Result<Self> {
        check_finite(&v)?;
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::NotUnit { norm });
        }
        Ok(UnitVector3(v / norm))
    }

    pub fn x() -> Self {
        UnitVector3(Vector3::x())
    }

    pub fn y() -> Self {
        UnitVector3(Vector3::y())
    }

    pub fn z() -> Self {
        UnitVector3(Vector3::z())
    }

    pub fn vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Vector3<f64> {
        self.0
    }
}

/// An element of SO(3).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation(Matrix3<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Matrix3::identity())
    }

    /// Accepts `m` when `RᵀR = I` entrywise and `det R = 1`, both within `ROTATION_TOL`.
    pub fn from_matrix(m: &Matrix3<f64>) -> Result<Self> {
        let residual = (m.transpose() * m - Matrix3::identity()).amax();
        let det = m.determinant();
        if !(residual <= ROTATION_TOL) || !((det - 1.0).abs() <= ROTATION_TOL) {
            return Err(Error::NotRotation { residual, det });
        }
        Ok(Rotation(*m))
    }

    /// Reads nine values in row-major order.
    pub fn from_row_major(values: &[f64; 9]) -> Result<Self> {
        Self::from_matrix(&Matrix3::from_row_slice(values))
    }

    /// Nine values in row-major order; the serialization used by step logs.
    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.0;
        [
            m[(0, 0)],
            m[(0, 1)],
            m[(0, 2)],
            m[(1, 0)],
            m[(1, 1)],
            m[(1, 2)],
            m[(2, 0)],
            m[(2, 1)],
            m[(2, 2)],
        ]
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Rotation {
        Rotation(self.0.transpose())
    }

    pub fn inverse(&self) -> Rotation {
        self.transpose()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    /// Body x-axis expressed in the world frame (first column).
    pub fn heading(&self) -> UnitVector3 {
        UnitVector3(self.0.column(0).into_owned())
    }

    pub fn column(&self, i: usize) -> Vector3<f64> {
        self.0.column(i).into_owned()
    }

    /// Max entry of `|RᵀR - I|`.
    pub fn orthonormality_error(&self) -> f64 {
        (self.0.transpose() * self.0 - Matrix3::identity()).amax()
    }

    pub fn exp(tau: &RotationVector) -> Rotation {
        exp_so3(tau)
    }

    pub fn log(&self) -> Result<RotationVector> {
        log_so3(self)
    }
}

impl Mul for Rotation {
    type Output = Rotation;
    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

impl Mul<&Rotation> for &Rotation {
    type Output = Rotation;
    fn mul(self, rhs: &Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

impl fmt::Display for Rotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_row_major();
        write!(
            f,
            "[[{:.6}, {:.6}, {:.6}], [{:.6}, {:.6}, {:.6}], [{:.6}, {:.6}, {:.6}]]",
            v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]
        )
    }
}

/// Rodrigues coefficients `(sin θ / θ, (1 - cos θ) / θ²)`.
fn rodrigues_coefficients(theta: f64) -> (f64, f64) {
    if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        let a = 1.0 - t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0));
        let b = 0.5 - t2 / 24.0 * (1.0 - t2 / 30.0 * (1.0 - t2 / 56.0));
        (a, b)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
    }
}

/// Rodrigues' formula.
pub fn exp_so3(tau: &RotationVector) -> Rotation {
    let k = tau.hat().0;
    let (a, b) = rodrigues_coefficients(tau.angle());
    Rotation(Matrix3::identity() + k * a + (k * k) * b)
}

/// Principal logarithm, angle in `[0, π)`.
pub fn log_so3(r: &Rotation) -> Result<RotationVector> {
    let trace = r.trace();
    if trace <= -1.0 + TRACE_GUARD {
        return Err(Error::NearPiSingularity { trace });
    }
    let m = &r.0;
    // vee(R - Rᵀ) = 2 sin θ · axis
    let w = Vector3::new(
        m[(2, 1)] - m[(1, 2)],
        m[(0, 2)] - m[(2, 0)],
        m[(1, 0)] - m[(0, 1)],
    );
    let cos_theta = ((trace - 1.0) * 0.5).clamp(-1.0, 1.0);
    let sin_theta = (0.5 * w.norm()).min(1.0);
    // atan2 keeps full relative accuracy near zero where arccos does not.
    let theta = sin_theta.atan2(cos_theta);
    let factor = if theta < SMALL_ANGLE {
        // θ / (2 sin θ)
        let t2 = theta * theta;
        0.5 * (1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0 + 31.0 * t2 * t2 * t2 / 15120.0)
    } else {
        theta / (2.0 * theta.sin())
    };
    Ok(RotationVector(w * factor))
}

/// `log(R)` as an algebra element.
pub fn log_matrix(r: &Rotation) -> Result<SkewMatrix> {
    log_so3(r).map(|t| t.hat())
}

/// Geodesic distance: the angle of `R1ᵀR2`.
pub fn dist_geodesic(r1: &Rotation, r2: &Rotation) -> Result<f64> {
    log_so3(&(r1.transpose() * *r2)).map(|t| t.angle())
}

/// `|log(R1ᵀR2)|_F`, which equals √2 times the geodesic distance.
pub fn dist_log(r1: &Rotation, r2: &Rotation) -> Result<f64> {
    log_matrix(&(r1.transpose() * *r2)).map(|s| s.frobenius_norm())
}

/// `|R1 - R2|_F`; defined everywhere, including at angle π.
pub fn dist_frobenius(r1: &Rotation, r2: &Rotation) -> f64 {
    (r1.0 - r2.0).norm()
}

/// `Ad_R(Ω) = R Ω Rᵀ`.
pub fn adjoint_rotate(r: &Rotation, omega: &SkewMatrix) -> SkewMatrix {
    SkewMatrix::skew_part(&(r.0 * omega.0 * r.0.transpose()))
}

/// `[Ω1, Ω2] = Ω1Ω2 - Ω2Ω1`.
pub fn lie_bracket(a: &SkewMatrix, b: &SkewMatrix) -> SkewMatrix {
    SkewMatrix::skew_part(&(a.0 * b.0 - b.0 * a.0))
}

/// `(1 - α(θ)) / θ²` with `α(θ) = (θ/2) cot(θ/2)`.
fn second_order_coefficient(theta: f64) -> f64 {
    if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0
    } else {
        let half = 0.5 * theta;
        let alpha = half / half.tan();
        (1.0 - alpha) / (theta * theta)
    }
}

/// Time derivative of the exponential coordinates `τ = log R` when `Ṙ = RΩ`:
/// `Ω + ½ ad_τ(Ω) + ((1 - α(θ)) / θ²) ad_τ²(Ω)`.
pub fn exp_coord_derivative(tau: &RotationVector, omega: &SkewMatrix) -> Result<SkewMatrix> {
    let theta = tau.angle();
    if !theta.is_finite() {
        return Err(Error::NonFinite);
    }
    let trace = 1.0 + 2.0 * theta.cos();
    if theta >= std::f64::consts::PI || trace <= -1.0 + TRACE_GUARD {
        return Err(Error::NearPiSingularity { trace });
    }
    let t = tau.hat();
    let ad = lie_bracket(&t, omega);
    let ad2 = lie_bracket(&t, &ad);
    Ok(*omega + ad * 0.5 + ad2 * second_order_coefficient(theta))
}

/// Nearest rotation to `m` (orthogonal polar factor) for repairing integrator drift.
pub fn project_to_so3(m: &Matrix3<f64>) -> Result<Rotation> {
    let residual = (m.transpose() * m - Matrix3::identity()).norm();
    let det = m.determinant();
    if !(residual < PROJECTION_TOL) || det <= 0.0 {
        return Err(Error::NotRotation { residual, det });
    }
    let svd = m.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::NotRotation { residual, det }),
    };
    Ok(Rotation(u * v_t))
}
