//! Small dense helpers for 3×3 symmetric matrices.

use std::f64::consts::PI;

use nalgebra::Matrix3;

/// Roots closer than this (relative to the spectral scale) are refined iteratively.
/// Near a double root the closed form loses about half the digits, so the
/// computed gap itself can be off by ~1e-8 of the scale.
const CLUSTER_TOL: f64 = 1e-6;

/// Eigenvalues of a symmetric matrix in ascending order.
///
/// Uses the closed-form trigonometric solution of the characteristic cubic.
/// When two roots are clustered the cubic is ill-conditioned, so the result
/// is replaced by cyclic Jacobi sweeps.
pub fn symmetric_eigenvalues(a: &Matrix3<f64>) -> [f64; 3] {
    let a = symmetrize(a);
    let mut values = characteristic_roots(&a);
    let scale = values
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    if values[1] - values[0] < CLUSTER_TOL * scale || values[2] - values[1] < CLUSTER_TOL * scale {
        values = jacobi_eigenvalues(&a);
    }
    values
}

pub fn symmetric_min_eigenvalue(a: &Matrix3<f64>) -> f64 {
    symmetric_eigenvalues(a)[0]
}

fn symmetrize(a: &Matrix3<f64>) -> Matrix3<f64> {
    (a + a.transpose()) * 0.5
}

fn characteristic_roots(a: &Matrix3<f64>) -> [f64; 3] {
    let off = a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2);
    if off == 0.0 {
        let mut d = [a[(0, 0)], a[(1, 1)], a[(2, 2)]];
        d.sort_by(|x, y| x.total_cmp(y));
        return d;
    }
    let q = a.trace() / 3.0;
    let p2 =
        (a[(0, 0)] - q).powi(2) + (a[(1, 1)] - q).powi(2) + (a[(2, 2)] - q).powi(2) + 2.0 * off;
    let p = (p2 / 6.0).sqrt();
    let b = (a - Matrix3::identity() * q) / p;
    let r = (0.5 * b.determinant()).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let largest = q + 2.0 * p * phi.cos();
    let smallest = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let middle = 3.0 * q - largest - smallest;
    let mut v = [smallest, middle, largest];
    v.sort_by(|x, y| x.total_cmp(y));
    v
}

fn jacobi_eigenvalues(a: &Matrix3<f64>) -> [f64; 3] {
    let mut m = *a;
    for _ in 0..64 {
        let off = m[(0, 1)].abs() + m[(0, 2)].abs() + m[(1, 2)].abs();
        if off <= f64::EPSILON * m.amax() {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = m[(p, q)];
            if apq == 0.0 {
                continue;
            }
            let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let mut rot = Matrix3::identity();
            rot[(p, p)] = c;
            rot[(q, q)] = c;
            rot[(p, q)] = s;
            rot[(q, p)] = -s;
            m = rot.transpose() * m * rot;
        }
    }
    let mut d = [m[(0, 0)], m[(1, 1)], m[(2, 2)]];
    d.sort_by(|x, y| x.total_cmp(y));
    d
}
